"""Closed-form dynamics of the dispersive (atom-only) model.

Starting from atom 1 excited, the amplitudes stay symmetric over atoms
2..N, and the state cycles through W-class states with period 2 pi / (N eta).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import effective_xi_eta
from .model import ParameterError, SystemParams


@dataclass(frozen=True)
class EffectiveCouplings:
    xi: float
    eta: float


@dataclass(frozen=True)
class AnalyticCoefficients:
    t: float
    c: np.ndarray


@dataclass(frozen=True)
class TargetState:
    amplitudes: np.ndarray

    @property
    def n_atoms(self) -> int:
        return len(self.amplitudes)


def effective_couplings(p: SystemParams) -> EffectiveCouplings:
    xi, eta = effective_xi_eta(p)
    return EffectiveCouplings(xi, eta)


def coefficients(p: SystemParams, t: float, couplings: EffectiveCouplings | None = None) -> AnalyticCoefficients:
    k = couplings or effective_couplings(p)
    n = p.n_atoms
    envelope = np.exp(-1j * (k.xi + k.eta) * t) / n
    hop = np.exp(1j * n * k.eta * t)
    c = np.full(n, envelope * (hop - 1.0), dtype=complex)
    c[0] = envelope * (hop + n - 1)
    return AnalyticCoefficients(t, c)


def coefficients_series(p: SystemParams, times) -> np.ndarray:
    """Vectorised coefficients; shape (len(times), N)."""
    k = effective_couplings(p)
    n = p.n_atoms
    times = np.asarray(times, dtype=float)
    envelope = np.exp(-1j * (k.xi + k.eta) * times) / n
    hop = np.exp(1j * n * k.eta * times)
    out = np.empty((len(times), n), dtype=complex)
    out[:, 0] = envelope * (hop + n - 1)
    out[:, 1:] = (envelope * (hop - 1.0))[:, None]
    return out


def generation_times(p: SystemParams, k_max: int = 0) -> np.ndarray:
    """Times (2k+1) pi / (N eta) at which the target W-class state appears."""
    eta = effective_couplings(p).eta
    if eta <= 0:
        raise ParameterError("no positive generation time; requires Delta < sqrt(N) nu")
    k = np.arange(k_max + 1)
    return (2 * k + 1) * math.pi / (p.n_atoms * eta)


def first_generation_time(p: SystemParams) -> float:
    return float(generation_times(p, 0)[0])


def target_state(n_atoms: int) -> TargetState:
    if n_atoms < 3:
        raise ParameterError(f"n_atoms must be >= 3, got {n_atoms}")
    amps = np.full(n_atoms, -2.0 / n_atoms)
    amps[0] = (n_atoms - 2) / n_atoms
    amps.setflags(write=False)
    return TargetState(amps)


def coefficient_ode_rhs(p: SystemParams, c, couplings: EffectiveCouplings | None = None) -> np.ndarray:
    """Time derivative of the atomic amplitudes under the dispersive model."""
    k = couplings or effective_couplings(p)
    c = np.asarray(c, dtype=complex)
    if len(c) != p.n_atoms:
        raise ValueError(f"expected {p.n_atoms} amplitudes, got {len(c)}")
    others = c.sum() - c
    return -1j * (k.xi * c - k.eta * others)


def analytic_fidelity(p: SystemParams, times) -> np.ndarray:
    c = coefficients_series(p, times)
    return np.abs(c @ target_state(p.n_atoms).amplitudes) ** 2
