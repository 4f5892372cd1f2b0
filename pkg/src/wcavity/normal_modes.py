"""Delocalised bosonic modes of the cavity array plus star-coupler fiber.

Row alpha of ``t_matrix`` holds the amplitudes of normal mode c_alpha on the
local modes (a_1, ..., a_N, b). Rows 1..N-1 are fiber-free Helmert-style
differences of cavity modes; row N is (b - A)/sqrt(2) and row N+1 is
(b + A)/sqrt(2), with A the symmetric cavity mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ParameterError, SystemParams


@dataclass(frozen=True)
class NormalModeTransform:
    n_atoms: int
    t_matrix: np.ndarray

    @property
    def inverse(self) -> np.ndarray:
        """chi = T^-1 = T^T (real orthogonal)."""
        return self.t_matrix.T

    def to_normal(self, local: np.ndarray) -> np.ndarray:
        """Map local-mode amplitudes (a_1..a_N, b) to normal-mode amplitudes c_alpha."""
        return self.t_matrix @ local

    def to_local(self, normal: np.ndarray) -> np.ndarray:
        return self.inverse @ normal


def build_transform(n_atoms: int) -> NormalModeTransform:
    if n_atoms < 3:
        raise ParameterError(f"n_atoms must be >= 3, got {n_atoms}")
    n = n_atoms
    t = np.zeros((n + 1, n + 1))
    for j in range(1, n):
        rest = n - j  # number of cavity columns to the right of the diagonal
        t[j - 1, j - 1] = math.sqrt(rest) / math.sqrt(rest + 1)
        t[j - 1, j:n] = -1.0 / math.sqrt((rest + 1) * rest)
    edge = 1.0 / math.sqrt(2 * n)
    t[n - 1, :n] = -edge
    t[n, :n] = edge
    t[n - 1, n] = t[n, n] = 1.0 / math.sqrt(2.0)
    t.setflags(write=False)
    return NormalModeTransform(n, t)


@dataclass(frozen=True)
class DetuningSpectrum:
    delta_alpha: np.ndarray


def detuning_spectrum(p: SystemParams) -> DetuningSpectrum:
    """Atom-minus-mode frequency for every normal mode."""
    d = np.full(p.n_atoms + 1, float(p.delta))
    d[-2] += p.collective_shift
    d[-1] -= p.collective_shift
    return DetuningSpectrum(d)


def photon_coupling_matrix(p: SystemParams) -> np.ndarray:
    """Fiber coupling H_1 on the one-photon space, ordered (a_1..a_N, b)."""
    n = p.n_atoms
    h = np.zeros((n + 1, n + 1))
    h[:n, n] = h[n, :n] = p.nu
    return h


def normal_mode_energies(p: SystemParams) -> np.ndarray:
    e = np.zeros(p.n_atoms + 1)
    e[-2] = -p.collective_shift
    e[-1] = p.collective_shift
    return e


def transformed_photon_coupling(p: SystemParams, tr: NormalModeTransform) -> np.ndarray:
    """H_1 expressed on the single-photon states c_alpha^dag|0>: T H_1 T^T."""
    if tr.n_atoms != p.n_atoms:
        raise ValueError(f"transform built for N={tr.n_atoms}, params have N={p.n_atoms}")
    t = tr.t_matrix
    return t @ photon_coupling_matrix(p) @ t.T


def verify_diagonalization(p: SystemParams, tr: NormalModeTransform) -> float:
    """Max-abs deviation of T H_1 T^T from diag(0, ..., 0, -sqrt(N) nu, +sqrt(N) nu)."""
    h = transformed_photon_coupling(p, tr)
    return float(np.max(np.abs(h - np.diag(normal_mode_energies(p)))))


def dump_transform_csv(tr: NormalModeTransform) -> str:
    return "".join(",".join(f"{x:.17g}" for x in row) + "\n" for row in tr.t_matrix)
