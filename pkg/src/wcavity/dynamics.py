"""Schrodinger and Lindblad time evolution on the single-excitation sector.

All integrators are fixed-step classical RK4. For a time-independent linear
generator G one RK4 step is exactly x -> P x with
P = 1 + dtG + (dtG)^2/2 + (dtG)^3/6 + (dtG)^4/24, so n steps are applied as
P^n by repeated squaring ("power" mode). Time-dependent Hamiltonians are
always stepped explicitly ("step" mode); both modes are the same scheme.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import analytic
from .hamiltonian import HamiltonianMatrix, build_effective, build_full_static
from .model import (
    IntegratorError,
    SingularityError,
    SystemParams,
    atom_slice,
    cavity_slice,
)

DEFAULT_COURANT = 0.005
ABORT_DRIFT = 1e-6
ABORT_NEGATIVITY = -1e-6


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float | None = None
    courant: float = DEFAULT_COURANT
    record_stride: int | None = None
    max_samples: int = 2000
    mode: str = "auto"  # auto | power | step
    keep_states: bool = False
    abort_drift: float = ABORT_DRIFT

    def __post_init__(self):
        if self.dt is not None and not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not 0 < self.courant <= 0.05:
            raise ValueError(f"courant must be in (0, 0.05], got {self.courant}")
        if self.record_stride is not None and self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.mode not in ("auto", "power", "step"):
            raise ValueError(f"unknown integrator mode {self.mode!r}")

    def step_for(self, p: SystemParams) -> float:
        return self.dt if self.dt is not None else self.courant / p.rate_scale()

    def as_dict(self) -> dict:
        return {
            "method": "rk4",
            "dt": self.dt,
            "courant": self.courant,
            "record_stride": self.record_stride,
            "max_samples": self.max_samples,
            "mode": self.mode,
        }


@dataclass
class RunResult:
    t: np.ndarray
    tau: np.ndarray
    fidelity: np.ndarray
    populations: np.ndarray
    trace: np.ndarray
    purity: np.ndarray
    params: SystemParams
    model: str
    config: dict
    min_eigenvalue: np.ndarray | None = None
    final_state: np.ndarray | None = None
    states: list | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def t_f(self) -> np.ndarray:
        return self.t * self.params.f

    @property
    def t_ns(self) -> np.ndarray | None:
        if self.params.f_absolute_mhz is None:
            return None
        return self.t_f / self.params.f_absolute_mhz * 1e3

    def columns(self) -> list[str]:
        n = self.params.n_atoms
        cols = ["t_f", "tau"]
        if self.params.f_absolute_mhz is not None:
            cols.append("t_ns")
        cols.append("fidelity")
        cols += [f"pop_atom_{l}" for l in range(1, n + 1)]
        cols += [f"pop_cav_{l}" for l in range(1, n + 1)]
        cols += ["pop_fiber", "pop_vacuum", "trace", "purity"]
        return cols

    def rows(self):
        n = self.params.n_atoms
        t_ns = self.t_ns
        for i in range(len(self.t)):
            pops = self.populations[i]
            row = [self.t_f[i], self.tau[i]]
            if t_ns is not None:
                row.append(t_ns[i])
            row.append(self.fidelity[i])
            row += list(pops[atom_slice(n)])
            row += list(pops[cavity_slice(n)])
            row += [pops[2 * n + 1], pops[0], self.trace[i], self.purity[i]]
            yield row

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns())
        for row in self.rows():
            writer.writerow([fmt(x) for x in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def summary(self) -> dict:
        i = int(np.argmax(self.fidelity))
        return {
            "model": self.model,
            "params": self.params.as_dict(),
            "integrator": self.config,
            "samples": len(self.t),
            "final_fidelity": float(self.fidelity[-1]),
            "peak_fidelity": float(self.fidelity[i]),
            "peak_t_f": float(self.t_f[i]),
            "peak_tau": float(self.tau[i]),
            **self.metadata,
        }

    def to_json(self, path=None) -> str:
        doc = {"metadata": self.summary(), "columns": self.columns(), "data": list(self.rows())}
        text = json.dumps(doc, default=_json_default, indent=1, allow_nan=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def fmt(x) -> str:
    """Fixed 12-significant-digit rendering used by every CSV writer."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(type(obj))


# --- reduction and fidelity -----------------------------------------------


def reduce_to_atoms(state: np.ndarray) -> np.ndarray:
    """Trace out the photonic modes; index 0 of the result is the all-ground atomic state."""
    state = np.asarray(state, dtype=complex)
    d = state.shape[0]
    if (d - 2) % 2:
        raise ValueError(f"dimension {d} is not 2N + 2")
    n = (d - 2) // 2
    rho = np.outer(state, state.conj()) if state.ndim == 1 else state
    out = np.empty((n + 1, n + 1), dtype=complex)
    out[1:, 1:] = rho[1 : n + 1, 1 : n + 1]
    out[0, 1:] = rho[0, 1 : n + 1]
    out[1:, 0] = rho[1 : n + 1, 0]
    out[0, 0] = rho[0, 0] + np.trace(rho[n + 1 :, n + 1 :])
    return out


def _target_vector(target, dim: int) -> np.ndarray:
    amps = np.asarray(getattr(target, "amplitudes", target), dtype=complex)
    if dim == len(amps):
        return amps
    if dim == len(amps) + 1:
        return np.concatenate([[0.0], amps])
    raise ValueError(f"target of length {len(amps)} incompatible with state dimension {dim}")


def fidelity(rho_atoms: np.ndarray, target) -> float:
    """<Psi|rho|Psi>, or |<Psi|phi>|^2 for a state vector."""
    rho_atoms = np.asarray(rho_atoms, dtype=complex)
    v = _target_vector(target, rho_atoms.shape[0])
    if rho_atoms.ndim == 1:
        return float(abs(np.vdot(v, rho_atoms)) ** 2)
    return float(np.real(np.vdot(v, rho_atoms @ v)))


# --- dissipators ----------------------------------------------------------


def decay_rates(p: SystemParams) -> np.ndarray:
    """Per-basis decay rate into the vacuum (zero for the vacuum itself)."""
    r = np.zeros(p.dim)
    r[atom_slice(p.n_atoms)] = p.gamma_atom
    r[cavity_slice(p.n_atoms)] = p.gamma_cavity
    r[2 * p.n_atoms + 1] = p.kappa
    return r


def jump_operators(p: SystemParams) -> list[np.ndarray]:
    """sqrt(rate) * lowering operator for every atom, cavity and the fiber."""
    ops = []
    for k, rate in enumerate(decay_rates(p)):
        if rate > 0:
            op = np.zeros((p.dim, p.dim), dtype=complex)
            op[0, k] = math.sqrt(rate)
            ops.append(op)
    return ops


def lindblad_rhs(h: np.ndarray, rho: np.ndarray, rates: np.ndarray) -> np.ndarray:
    """Master-equation right-hand side in matrix form for decay into the vacuum."""
    out = -1j * (h @ rho - rho @ h)
    if rates.any():
        out -= 0.5 * (rates[:, None] + rates[None, :]) * rho
        out[0, 0] += np.dot(rates, np.diag(rho))
    return out


def liouvillian(h: np.ndarray, jumps: list[np.ndarray]) -> np.ndarray:
    """Superoperator acting on row-major vec(rho): vec(A rho B) = (A kron B^T) vec(rho)."""
    d = h.shape[0]
    eye = np.eye(d)
    lv = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for op in jumps:
        ldl = op.conj().T @ op
        lv += np.kron(op, op.conj()) - 0.5 * np.kron(ldl, eye) - 0.5 * np.kron(eye, ldl.T)
    return lv


# --- generic RK4 ----------------------------------------------------------


def rk4_propagator(generator: np.ndarray, dt: float) -> np.ndarray:
    """One RK4 step of x' = G x as a matrix."""
    a = dt * generator
    eye = np.eye(a.shape[0], dtype=complex)
    return eye + a @ (eye + a @ (eye / 2 + a @ (eye / 6 + a / 24)))


def rk4_step(rhs: Callable, t: float, x: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(t, x)
    k2 = rhs(t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = rhs(t + dt, x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _schedule(t_end: float, dt: float, cfg: IntegratorConfig) -> tuple[int, float, int]:
    if t_end < 0 or not math.isfinite(t_end):
        raise ValueError(f"t_end must be finite and >= 0, got {t_end}")
    n_steps = max(1, math.ceil(t_end / dt - 1e-9)) if t_end > 0 else 0
    step = t_end / n_steps if n_steps else 0.0
    stride = cfg.record_stride or max(1, math.ceil(n_steps / cfg.max_samples))
    return n_steps, step, stride


def _march_power(generator, x0, n_steps, dt, stride):
    """Yield (step, x) at the recorded steps, applying the RK4 step matrix by powers."""
    p1 = rk4_propagator(generator, dt)
    p_stride = np.linalg.matrix_power(p1, stride)
    x = x0
    done = 0
    yield 0, x
    while done < n_steps:
        chunk = min(stride, n_steps - done)
        x = (p_stride if chunk == stride else np.linalg.matrix_power(p1, chunk)) @ x
        done += chunk
        yield done, x


def _march_step(rhs, x0, n_steps, dt, stride):
    x = x0
    yield 0, x
    for k in range(n_steps):
        x = rk4_step(rhs, k * dt, x, dt)
        if (k + 1) % stride == 0 or k + 1 == n_steps:
            yield k + 1, x


def _hamiltonian_array(h):
    if isinstance(h, HamiltonianMatrix):
        return h.matrix
    return h


def _tau(p: SystemParams, t: np.ndarray) -> np.ndarray:
    try:
        eta = analytic.effective_couplings(p).eta
    except SingularityError:
        return np.full_like(t, np.nan)
    return p.n_atoms * eta * t


# --- Schrodinger ----------------------------------------------------------


def evolve_schrodinger(
    h,
    psi0,
    t_end: float,
    cfg: IntegratorConfig | None = None,
    *,
    params: SystemParams,
    model: str = "full",
) -> RunResult:
    """Integrate i dpsi/dt = H psi on the full sector.

    ``h`` is a HamiltonianMatrix, a dense array, or a callable ``t -> array``
    for a time-dependent Hamiltonian.
    """
    cfg = cfg or IntegratorConfig()
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-9:
        raise ValueError("initial state must be normalised")
    dt = cfg.step_for(params)
    n_steps, dt, stride = _schedule(t_end, dt, cfg)
    h = _hamiltonian_array(h)
    if callable(h):
        if cfg.mode == "power":
            raise ValueError("power mode needs a time-independent Hamiltonian")
        march = _march_step(lambda t, x: -1j * (h(t) @ x), psi0, n_steps, dt, stride)
    else:
        if h.shape[0] != psi0.shape[0]:
            raise ValueError(f"Hamiltonian dim {h.shape[0]} != state dim {psi0.shape[0]}")
        if cfg.mode == "step":
            march = _march_step(lambda t, x: -1j * (h @ x), psi0, n_steps, dt, stride)
        else:
            march = _march_power(-1j * h, psi0, n_steps, dt, stride)

    return _collect_pure(march, dt, n_steps, stride, params, cfg, model)


def _collect_pure(march, dt, n_steps, stride, params, cfg, model, project=None) -> RunResult:
    target = analytic.target_state(params.n_atoms)
    n = params.n_atoms
    times, fids, pops, norms, states, leaks = [], [], [], [], [], []
    for step, psi in march:
        norm2 = float(np.real(np.vdot(psi, psi)))
        if abs(norm2 - 1.0) > cfg.abort_drift:
            raise IntegratorError(
                f"norm drift {norm2 - 1.0:.3e} at t={step * dt:.6g}; reduce dt (currently {dt:.3e})"
            )
        if project is not None:
            full = psi
            psi = project(full)
            leaks.append(max(0.0, norm2 - float(np.real(np.vdot(psi, psi)))))
        times.append(step * dt)
        pops.append(np.abs(psi) ** 2)
        norms.append(norm2)
        atoms = psi if psi.shape[0] == n else psi[atom_slice(n)]
        fids.append(fidelity(atoms, target))
        if cfg.keep_states:
            states.append(psi.copy())
    t = np.array(times)
    pops = np.array(pops)
    if pops.shape[1] == n:
        full_pops = np.zeros((len(t), params.dim))
        full_pops[:, atom_slice(n)] = pops
        pops = full_pops
    norms = np.array(norms)
    result = RunResult(
        t=t,
        tau=_tau(params, t),
        fidelity=np.array(fids),
        populations=pops,
        trace=norms,
        purity=norms**2,
        params=params,
        model=model,
        config={**cfg.as_dict(), "dt": dt, "n_steps": n_steps, "record_stride": stride},
        final_state=psi,
        states=states if cfg.keep_states else None,
    )
    if project is not None:
        result.metadata["max_sector_leakage"] = float(max(leaks))
    return result


def evolve_full(p: SystemParams, psi0, t_end: float, cfg=None, frame: str = "static") -> RunResult:
    if frame == "static":
        return evolve_schrodinger(build_full_static(p), psi0, t_end, cfg, params=p, model="full")
    if frame == "interaction":
        from .hamiltonian import interaction_picture_builder

        cfg = cfg or IntegratorConfig()
        return evolve_schrodinger(
            interaction_picture_builder(p), psi0, t_end, cfg, params=p, model="full"
        )
    raise ValueError(f"unknown frame {frame!r}")


def evolve_effective(p: SystemParams, c0, t_end: float, cfg: IntegratorConfig | None = None) -> RunResult:
    """Integrate the N-dimensional dispersive model from atomic amplitudes ``c0``."""
    c0 = np.asarray(c0, dtype=complex)
    if len(c0) != p.n_atoms:
        raise ValueError(f"expected {p.n_atoms} amplitudes, got {len(c0)}")
    return evolve_schrodinger(build_effective(p), c0, t_end, cfg, params=p, model="effective")


def evolve_fock(p: SystemParams, n_max: int, t_end: float, cfg: IntegratorConfig | None = None) -> RunResult:
    """Truncated-Fock evolution from atom 1 excited, projected back onto the sector.

    Validates that the single-excitation truncation is exact.
    """
    from .hamiltonian import build_full_fock, fock_sector_indices

    cfg = cfg or IntegratorConfig()
    h = build_full_fock(p, n_max).matrix
    idx = fock_sector_indices(p.n_atoms, n_max)
    psi0 = np.zeros(h.shape[0], dtype=complex)
    psi0[idx[1]] = 1.0
    dt = cfg.step_for(p)
    n_steps, dt, stride = _schedule(t_end, dt, cfg)
    if cfg.mode != "step" and h.shape[0] <= FOCK_DENSE_MAX_DIM:
        march = _march_power(-1j * h.toarray(), psi0, n_steps, dt, stride)
    else:
        march = _march_step(lambda t, x: -1j * (h @ x), psi0, n_steps, dt, stride)
    return _collect_pure(march, dt, n_steps, stride, p, cfg, f"full-fock-{n_max}", project=lambda x: x[idx])


FOCK_DENSE_MAX_DIM = 1024

# --- Lindblad -------------------------------------------------------------

POWER_MODE_MAX_DIM = 40


def evolve_lindblad(
    p: SystemParams,
    rho0,
    t_end: float,
    cfg: IntegratorConfig | None = None,
    h=None,
) -> RunResult:
    """Integrate the master equation with atomic, cavity and fiber decay.

    ``h`` defaults to the static full Hamiltonian; pass a callable for a
    time-dependent one.
    """
    cfg = cfg or IntegratorConfig()
    rho0 = np.asarray(rho0, dtype=complex)
    d = p.dim
    if rho0.shape != (d, d):
        raise ValueError(f"rho0 must be {d}x{d}, got {rho0.shape}")
    h = _hamiltonian_array(h if h is not None else build_full_static(p))
    dt = cfg.step_for(p)
    n_steps, dt, stride = _schedule(t_end, dt, cfg)
    rates = decay_rates(p)

    use_power = not callable(h) and (
        cfg.mode == "power" or (cfg.mode == "auto" and d <= POWER_MODE_MAX_DIM)
    )
    if use_power:
        gen = liouvillian(h, jump_operators(p))
        vec_march = _march_power(gen, rho0.reshape(-1), n_steps, dt, stride)
        march = ((s, v.reshape(d, d)) for s, v in vec_march)
    else:
        if callable(h):
            rhs = lambda t, r: lindblad_rhs(h(t), r, rates)  # noqa: E731
        else:
            rhs = lambda t, r: lindblad_rhs(h, r, rates)  # noqa: E731
        march = _march_step(rhs, rho0, n_steps, dt, stride)

    target = analytic.target_state(p.n_atoms)
    times, fids, pops, traces, purities, mins, states = [], [], [], [], [], [], []
    for step, rho in march:
        tr = float(np.real(np.trace(rho)))
        herm = 0.5 * (rho + rho.conj().T)
        lam = float(np.linalg.eigvalsh(herm)[0])
        if abs(tr - 1.0) > cfg.abort_drift:
            raise IntegratorError(f"trace drift {tr - 1.0:.3e} at t={step * dt:.6g}; reduce dt")
        if lam < ABORT_NEGATIVITY:
            raise IntegratorError(f"negative eigenvalue {lam:.3e} at t={step * dt:.6g}; reduce dt")
        times.append(step * dt)
        traces.append(tr)
        mins.append(lam)
        pops.append(np.real(np.diag(rho)).copy())
        purities.append(float(np.real(np.vdot(rho, rho))))
        fids.append(fidelity(reduce_to_atoms(rho), target))
        if cfg.keep_states:
            states.append(rho.copy())
    t = np.array(times)
    return RunResult(
        t=t,
        tau=_tau(p, t),
        fidelity=np.array(fids),
        populations=np.array(pops),
        trace=np.array(traces),
        purity=np.array(purities),
        params=p,
        model="lindblad",
        config={
            **cfg.as_dict(),
            "dt": dt,
            "n_steps": n_steps,
            "record_stride": stride,
            "mode": "power" if use_power else "step",
        },
        min_eigenvalue=np.array(mins),
        final_state=rho,
        states=states if cfg.keep_states else None,
    )


def fidelity_at(p: SystemParams, t: float, model: str = "lindblad", cfg: IntegratorConfig | None = None) -> float:
    """Fidelity to the W-class target at a single time, starting from atom 1 excited."""
    from .model import atomic_state, density

    psi0 = atomic_state(np.eye(p.n_atoms)[0])
    cfg = cfg or IntegratorConfig(max_samples=1)
    if model == "lindblad":
        return float(evolve_lindblad(p, density(psi0), t, cfg).fidelity[-1])
    if model == "full":
        return float(evolve_full(p, psi0, t, cfg).fidelity[-1])
    if model == "effective":
        return float(evolve_effective(p, np.eye(p.n_atoms)[0], t, cfg).fidelity[-1])
    raise ValueError(f"unknown model {model!r}")
