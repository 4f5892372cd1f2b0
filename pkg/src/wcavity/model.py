"""Physical parameters, the single-excitation basis and state helpers.

Units: hbar = 1 and every rate is a multiple of the atom-cavity coupling f.
The basis covers the vacuum plus every state carrying exactly one excitation
(an excited atom, a cavity photon or the fiber photon), which is closed under
the full Hamiltonian and under all decay channels.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class ParameterError(ValueError):
    """Raised for structurally invalid physical parameters."""


class SingularityError(ValueError):
    """Raised when the dispersive couplings hit a pole (Delta = 0 or Delta^2 = N nu^2)."""


class IntegratorError(RuntimeError):
    """Raised when a conserved quantity drifts beyond its abort threshold."""


@dataclass(frozen=True)
class SystemParams:
    n_atoms: int
    f: float = 1.0
    nu: float = 10.0
    delta: float = 10.0
    gamma_atom: float = 0.0
    gamma_cavity: float = 0.0
    kappa: float = 0.0
    # angular frequency f in rad/us (i.e. "2pi x MHz"); None keeps pure ratios
    f_absolute_mhz: float | None = None

    def __post_init__(self):
        if isinstance(self.n_atoms, bool) or int(self.n_atoms) != self.n_atoms:
            raise ParameterError(f"n_atoms must be an integer, got {self.n_atoms!r}")
        object.__setattr__(self, "n_atoms", int(self.n_atoms))
        if self.n_atoms < 3:
            raise ParameterError(f"n_atoms must be >= 3, got {self.n_atoms}")
        for name in ("f", "nu", "delta", "gamma_atom", "gamma_cavity", "kappa"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.f <= 0:
            raise ParameterError(f"f must be > 0, got {self.f}")
        if self.nu < 0:
            raise ParameterError(f"nu must be >= 0, got {self.nu}")
        for name in ("delta", "gamma_atom", "gamma_cavity", "kappa"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.f_absolute_mhz is not None and not (
            math.isfinite(self.f_absolute_mhz) and self.f_absolute_mhz > 0
        ):
            raise ParameterError(f"f_absolute_mhz must be > 0, got {self.f_absolute_mhz!r}")

    @property
    def dim(self) -> int:
        return 2 * self.n_atoms + 2

    @property
    def collective_shift(self) -> float:
        """sqrt(N) * nu, the splitting of the two fiber-hybridised normal modes."""
        return math.sqrt(self.n_atoms) * self.nu

    @property
    def has_dissipation(self) -> bool:
        return self.gamma_atom > 0 or self.gamma_cavity > 0 or self.kappa > 0

    def rate_scale(self) -> float:
        """Largest frequency scale of the problem; sets the integrator step."""
        return max(
            abs(self.delta) + self.collective_shift,
            self.f,
            self.nu,
            self.gamma_atom,
            self.gamma_cavity,
            self.kappa,
        )

    def replace(self, **changes) -> "SystemParams":
        from dataclasses import replace

        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {
            "n_atoms": self.n_atoms,
            "f": self.f,
            "nu": self.nu,
            "delta": self.delta,
            "gamma_atom": self.gamma_atom,
            "gamma_cavity": self.gamma_cavity,
            "kappa": self.kappa,
            "f_absolute_mhz": self.f_absolute_mhz,
        }


class Kind(enum.Enum):
    VACUUM = "vacuum"
    ATOM = "atom"
    CAVITY = "cavity"
    FIBER = "fiber"


@dataclass(frozen=True)
class BasisLabel:
    kind: Kind
    site: int | None = None

    @classmethod
    def vacuum(cls) -> "BasisLabel":
        return cls(Kind.VACUUM)

    @classmethod
    def atom(cls, site: int) -> "BasisLabel":
        return cls(Kind.ATOM, site)

    @classmethod
    def cavity(cls, site: int) -> "BasisLabel":
        return cls(Kind.CAVITY, site)

    @classmethod
    def fiber(cls) -> "BasisLabel":
        return cls(Kind.FIBER)

    def __str__(self):
        if self.site is None:
            return self.kind.value
        return f"{self.kind.value}_{self.site}"


def basis_index(label: BasisLabel, n_atoms: int) -> int:
    """Canonical position: vacuum 0, atom l -> l, cavity l -> N + l, fiber -> 2N + 1."""
    if label.kind in (Kind.VACUUM, Kind.FIBER):
        if label.site is not None:
            raise ValueError(f"{label.kind.value} label takes no site index")
        return 0 if label.kind is Kind.VACUUM else 2 * n_atoms + 1
    if label.site is None or not 1 <= label.site <= n_atoms:
        raise ValueError(f"site index {label.site!r} out of range [1, {n_atoms}]")
    offset = 0 if label.kind is Kind.ATOM else n_atoms
    return offset + label.site


def basis_labels(n_atoms: int) -> list[BasisLabel]:
    labels = [BasisLabel.vacuum()]
    labels += [BasisLabel.atom(l) for l in range(1, n_atoms + 1)]
    labels += [BasisLabel.cavity(l) for l in range(1, n_atoms + 1)]
    labels.append(BasisLabel.fiber())
    return labels


def atom_slice(n_atoms: int) -> slice:
    return slice(1, n_atoms + 1)


def cavity_slice(n_atoms: int) -> slice:
    return slice(n_atoms + 1, 2 * n_atoms + 1)


def basis_state(label: BasisLabel, n_atoms: int) -> np.ndarray:
    psi = np.zeros(2 * n_atoms + 2, dtype=complex)
    psi[basis_index(label, n_atoms)] = 1.0
    return psi


def atomic_state(amplitudes, n_atoms: int | None = None) -> np.ndarray:
    """Embed N atomic amplitudes (empty fields) into the full sector."""
    amplitudes = np.asarray(amplitudes, dtype=complex)
    n = len(amplitudes) if n_atoms is None else n_atoms
    if len(amplitudes) != n:
        raise ValueError(f"expected {n} atomic amplitudes, got {len(amplitudes)}")
    psi = np.zeros(2 * n + 2, dtype=complex)
    psi[atom_slice(n)] = amplitudes
    return psi


def density(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


@dataclass
class DensityCheck:
    hermiticity: float
    trace_error: float
    min_eigenvalue: float
    ok: bool = field(default=True)


def check_density_matrix(
    rho: np.ndarray,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-8,
    pos_tol: float = 1e-8,
) -> DensityCheck:
    rho = np.asarray(rho)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    tr = float(abs(np.trace(rho) - 1.0))
    lam = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    ok = herm <= herm_tol and tr <= trace_tol and lam >= -pos_tol
    return DensityCheck(herm, tr, lam, ok)


@dataclass
class Check:
    name: str
    passed: bool
    message: str


@dataclass
class ValidationReport:
    checks: list[Check]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def warnings(self) -> list[str]:
        return [c.message for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def validate_params(p: SystemParams, dispersive_ratio: float = 5.0) -> ValidationReport:
    """Flag parameters outside the dispersive regime. Never raises for finite input."""
    if not math.isfinite(dispersive_ratio):
        raise ParameterError("dispersive_ratio must be finite")
    threshold = dispersive_ratio * p.f
    shift = p.collective_shift
    checks = []
    for name, gap in (
        ("delta", abs(p.delta)),
        ("delta_plus", abs(p.delta + shift)),
        ("delta_minus", abs(p.delta - shift)),
    ):
        passed = gap >= threshold
        msg = f"|{name}| = {gap:.6g} f" + (
            f" >= {dispersive_ratio:g} f" if passed else f" < {dispersive_ratio:g} f: not dispersive"
        )
        checks.append(Check(name, passed, msg))
    below = p.delta < shift
    checks.append(
        Check(
            "hopping_sign",
            below,
            f"delta/nu = {p.delta / p.nu if p.nu else math.inf:.6g} < sqrt(N) = {math.sqrt(p.n_atoms):.6g}"
            if below
            else "delta >= sqrt(N) nu: eta_N <= 0, generation times are not positive",
        )
    )
    return ValidationReport(checks)
