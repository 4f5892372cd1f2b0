"""Hamiltonian builders: full (static and rotating), effective and truncated Fock."""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .model import SingularityError, SystemParams, atom_slice
from .normal_modes import NormalModeTransform, build_transform, detuning_spectrum

FULL_STATIC = "full-static"
FULL_INTERACTION = "full-interaction-picture"
EFFECTIVE = "effective-atomic"
FULL_FOCK = "full-fock"

SINGULAR_EPS = 1e-9
DEFAULT_FOCK_CAP = 200_000


@dataclass(frozen=True)
class HamiltonianMatrix:
    matrix: np.ndarray
    representation: str
    time: float | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _full_skeleton(p: SystemParams) -> np.ndarray:
    n = p.n_atoms
    h = np.zeros((p.dim, p.dim), dtype=complex)
    fiber = 2 * n + 1
    for l in range(1, n + 1):
        h[n + l, fiber] = h[fiber, n + l] = p.nu
    return h


def build_full_static(p: SystemParams) -> HamiltonianMatrix:
    """Time-independent frame: atoms detuned by Delta, photons at zero."""
    n = p.n_atoms
    h = _full_skeleton(p)
    for l in range(1, n + 1):
        h[l, l] = p.delta
        h[l, n + l] = h[n + l, l] = p.f
    h.setflags(write=False)
    return HamiltonianMatrix(h, FULL_STATIC)


def build_full_interaction_picture(p: SystemParams, t: float) -> HamiltonianMatrix:
    """Explicitly time-dependent form with atom-cavity phases exp(-+i Delta t)."""
    n = p.n_atoms
    h = _full_skeleton(p)
    phase = p.f * np.exp(-1j * p.delta * t)
    for l in range(1, n + 1):
        h[n + l, l] = phase
        h[l, n + l] = np.conj(phase)
    h.setflags(write=False)
    return HamiltonianMatrix(h, FULL_INTERACTION, t)


def interaction_picture_builder(p: SystemParams):
    """Fast callable t -> H(t) for the integrators (skips dataclass wrapping)."""
    n = p.n_atoms
    base = _full_skeleton(p)
    rows = np.arange(n + 1, 2 * n + 1)
    cols = np.arange(1, n + 1)

    def h_of_t(t: float) -> np.ndarray:
        h = base.copy()
        phase = p.f * np.exp(-1j * p.delta * t)
        h[rows, cols] = phase
        h[cols, rows] = np.conj(phase)
        return h

    return h_of_t


def to_interaction_frame(p: SystemParams, psi_static: np.ndarray, t: float) -> np.ndarray:
    """Undo the static-frame atomic phase exp(-i Delta t)."""
    psi = np.array(psi_static, dtype=complex)
    psi[atom_slice(p.n_atoms)] *= np.exp(1j * p.delta * t)
    return psi


def _check_singular(p: SystemParams) -> None:
    eps = SINGULAR_EPS * p.f**2
    if abs(p.delta) < eps:
        raise SingularityError("effective couplings singular: Delta = 0")
    if abs(p.delta**2 - p.n_atoms * p.nu**2) < eps:
        raise SingularityError("effective couplings singular: Delta^2 = N nu^2")


def effective_xi_eta(p: SystemParams) -> tuple[float, float]:
    """Level shift xi_N and hopping rate eta_N of the dispersive model."""
    _check_singular(p)
    n, d = p.n_atoms, p.delta
    pole = d / (d * d - n * p.nu**2)
    xi = p.f**2 / n * ((n - 1) / d + pole)
    eta = p.f**2 / n * (1.0 / d - pole)
    return xi, eta


def build_effective(p: SystemParams) -> HamiltonianMatrix:
    xi, eta = effective_xi_eta(p)
    n = p.n_atoms
    h = np.full((n, n), -eta, dtype=complex)
    np.fill_diagonal(h, xi)
    h.setflags(write=False)
    return HamiltonianMatrix(h, EFFECTIVE)


def effective_from_sum(p: SystemParams, tr: NormalModeTransform | None = None) -> HamiltonianMatrix:
    """Second-order couplings summed mode by mode: f^2 sum_a chi_la chi_ma / Delta_a."""
    _check_singular(p)
    if tr is None:
        tr = build_transform(p.n_atoms)
    if tr.n_atoms != p.n_atoms:
        raise ValueError(f"transform built for N={tr.n_atoms}, params have N={p.n_atoms}")
    chi = tr.inverse[: p.n_atoms, :]  # rows: cavities l, columns: modes alpha
    d_alpha = detuning_spectrum(p).delta_alpha
    h = p.f**2 * (chi / d_alpha) @ chi.T
    return HamiltonianMatrix(h.astype(complex), EFFECTIVE)


def excitation_number(p: SystemParams) -> np.ndarray:
    e = np.ones(p.dim)
    e[0] = 0.0
    return np.diag(e)


# --- truncated Fock space -------------------------------------------------


def fock_dimension(n_atoms: int, n_max: int) -> int:
    return 2**n_atoms * (n_max + 1) ** (n_atoms + 1)


def _fock_dims(n_atoms: int, n_max: int) -> list[int]:
    return [2] * n_atoms + [n_max + 1] * (n_atoms + 1)


def _embed(op: sp.spmatrix, site: int, dims: list[int]) -> sp.csr_matrix:
    factors = [op if k == site else sp.identity(d, format="csr") for k, d in enumerate(dims)]
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), factors)


def build_full_fock(p: SystemParams, n_max: int, cap: int = DEFAULT_FOCK_CAP) -> HamiltonianMatrix:
    """Static-frame Hamiltonian on N qubits x (N+1) oscillators truncated at n_max photons.

    Subsystem order: atoms 1..N, cavities 1..N, fiber. Returns a sparse CSR
    matrix in ``matrix``.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    n = p.n_atoms
    dim = fock_dimension(n, n_max)
    if dim > cap:
        raise ValueError(f"Fock dimension {dim} exceeds cap {cap}")
    dims = _fock_dims(n, n_max)
    sigma_minus = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    annihilate = sp.csr_matrix(np.diag(np.sqrt(np.arange(1, n_max + 1)), 1))
    b = _embed(annihilate, 2 * n, dims)
    h = sp.csr_matrix((dim, dim), dtype=complex)
    for l in range(n):
        s = _embed(sigma_minus, l, dims)
        a = _embed(annihilate, n + l, dims)
        h = h + p.delta * (s.T @ s)
        h = h + p.f * (a.T @ s + s.T @ a)
        h = h + p.nu * (a.T @ b + b.T @ a)
    return HamiltonianMatrix(h.tocsr(), FULL_FOCK)


def fock_sector_indices(n_atoms: int, n_max: int) -> np.ndarray:
    """Fock-space index of every single-excitation basis label, in canonical order."""
    dims = _fock_dims(n_atoms, n_max)
    strides = np.cumprod([1] + dims[::-1])[:-1][::-1]
    idx = [0]
    for site in range(2 * n_atoms + 1):
        idx.append(int(strides[site]))
    return np.array(idx)


def fock_excitation_number(n_atoms: int, n_max: int) -> sp.csr_matrix:
    dims = _fock_dims(n_atoms, n_max)
    total = sp.csr_matrix((fock_dimension(n_atoms, n_max),) * 2)
    for site, d in enumerate(dims):
        total = total + _embed(sp.diags(np.arange(d, dtype=float)).tocsr(), site, dims)
    return total.tocsr()


def commutator_norm(h, other) -> float:
    c = h @ other - other @ h
    if sp.issparse(c):
        return float(abs(c).max()) if c.nnz else 0.0
    return float(np.max(np.abs(c)))


def hermiticity_residual(h) -> float:
    d = h - h.conj().T
    if sp.issparse(d):
        return float(abs(d).max()) if d.nnz else 0.0
    return float(np.max(np.abs(d)))

