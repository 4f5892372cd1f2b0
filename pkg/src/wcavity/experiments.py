"""Named scenarios, parameter sweeps and their file output.

Every rate in a config or sweep is a ratio to the atom-cavity coupling f,
so runs are built with f = 1.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from . import analytic
from .dynamics import IntegratorConfig, RunResult, evolve_effective, evolve_full, evolve_lindblad, fidelity_at, fmt
from .model import (
    ParameterError,
    SingularityError,
    SystemParams,
    atomic_state,
    density,
    validate_params,
)


class ConfigError(ValueError):
    """Invalid scenario or sweep configuration; the message names the offending key."""


AXIS_NAMES = ("delta_over_f", "nu_over_f", "delta_over_nu", "Gamma_over_f", "gamma_over_f", "kappa_over_f")
MODELS = ("full", "effective", "lindblad")
SCENARIOS = (
    "fig2a",
    "fig2b",
    "fig3",
    "fig4a",
    "fig4b",
    "fig4c",
    "fig5a",
    "fig5b",
    "feasibility",
    "custom",
)
DEFAULT_MAX_POINTS = 10_000

# experimental rates quoted as 2pi x MHz, except the fiber loss quoted as a plain rate
FEASIBILITY_F_MHZ = 2 * math.pi * 750.0
FEASIBILITY_RATES = {
    "Gamma_over_f": 2.62 / 750.0,
    "gamma_over_f": 3.5 / 750.0,
    "kappa_over_f": 0.152 / FEASIBILITY_F_MHZ,
}


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    points: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ConfigError(f"{self.name}: not a sweepable parameter (choose from {', '.join(AXIS_NAMES)})")
        if isinstance(self.points, bool) or int(self.points) != self.points or self.points < 2:
            raise ConfigError(f"{self.name}.points: must be an integer >= 2, got {self.points!r}")
        if not (math.isfinite(self.min) and math.isfinite(self.max)) or self.min > self.max:
            raise ConfigError(f"{self.name}: need finite min <= max, got {self.min!r}..{self.max!r}")
        if self.min < 0:
            raise ConfigError(f"{self.name}.min: must be >= 0, got {self.min}")

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, int(self.points))


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[Axis, ...]
    fixed: dict = field(default_factory=dict)
    n_atoms: int = 4
    model: str = "lindblad"
    k: int = 0
    f_absolute_mhz: float | None = None
    max_points: int = DEFAULT_MAX_POINTS

    def __post_init__(self):
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ConfigError(f"axes: duplicate axis in {names}")
        for key in self.fixed:
            if key not in AXIS_NAMES:
                raise ConfigError(f"{key}: unknown fixed parameter")
            if key in names:
                raise ConfigError(f"{key}: both fixed and swept")
        if self.model not in MODELS:
            raise ConfigError(f"model: must be one of {', '.join(MODELS)}, got {self.model!r}")
        if self.k < 0:
            raise ConfigError(f"k: must be >= 0, got {self.k}")

    @property
    def n_points(self) -> int:
        return int(np.prod([a.points for a in self.axes])) if self.axes else 1

    def grid(self):
        """Axis-value dicts in row-major order (last axis fastest)."""
        for combo in product(*(a.values() for a in self.axes)):
            yield dict(zip((a.name for a in self.axes), (float(x) for x in combo)))


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    overrides: dict = field(default_factory=dict)
    out: str | None = None
    fmt: str = "csv"
    workers: int = 1

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ConfigError(f"scenario: unknown {self.name!r}; valid scenarios: {', '.join(SCENARIOS)}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format: must be csv or json, got {self.fmt!r}")


# --- parameter resolution -------------------------------------------------


def resolve_params(ratios: dict, n_atoms: int, f_absolute_mhz: float | None = None) -> SystemParams:
    """Turn a ratio dictionary into SystemParams with f = 1."""
    has = {k: ratios.get(k) is not None for k in ("delta_over_f", "nu_over_f", "delta_over_nu")}
    if all(has.values()):
        raise ConfigError("delta_over_nu: overdetermined together with delta_over_f and nu_over_f")
    delta = ratios.get("delta_over_f")
    nu = ratios.get("nu_over_f")
    ratio = ratios.get("delta_over_nu")
    if ratio is not None:
        if ratio <= 0:
            raise ConfigError(f"delta_over_nu: must be > 0, got {ratio}")
        if delta is None:
            delta = ratio * (10.0 if nu is None else nu)
        else:
            nu = delta / ratio
    delta = 10.0 if delta is None else delta
    nu = 10.0 if nu is None else nu
    try:
        return SystemParams(
            n_atoms=n_atoms,
            f=1.0,
            nu=nu,
            delta=delta,
            gamma_atom=ratios.get("Gamma_over_f") or 0.0,
            gamma_cavity=ratios.get("gamma_over_f") or 0.0,
            kappa=ratios.get("kappa_over_f") or 0.0,
            f_absolute_mhz=f_absolute_mhz,
        )
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc


# --- sweeps ---------------------------------------------------------------


@dataclass
class SweepRow:
    values: dict
    delta: float
    nu: float
    t_f: float
    fidelity: float
    status: str
    wall_time: float


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow]

    def column(self, name: str) -> np.ndarray:
        return np.array([r.values[name] for r in self.rows])

    @property
    def fidelity(self) -> np.ndarray:
        return np.array([r.fidelity for r in self.rows])

    def as_grid(self) -> np.ndarray:
        return self.fidelity.reshape([a.points for a in self.spec.axes] or [1])

    def to_csv(self, path=None, timing: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = [a.name for a in self.spec.axes] + ["delta_over_f", "nu_over_f", "t_f", "fidelity", "status"]
        if timing:
            header.append("wall_time_s")
        w.writerow(header)
        for r in self.rows:
            line = [fmt(r.values[a.name]) for a in self.spec.axes]
            line += [fmt(r.delta), fmt(r.nu), fmt(r.t_f), fmt(r.fidelity), r.status]
            if timing:
                line.append(f"{r.wall_time:.6f}")
            w.writerow(line)
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_json(self, path=None) -> str:
        doc = {
            "sweep": sweep_spec_dict(self.spec),
            "summary": self.summary(),
            "rows": [
                {**r.values, "delta_over_f": r.delta, "nu_over_f": r.nu, "t_f": r.t_f,
                 "fidelity": None if math.isnan(r.fidelity) else r.fidelity, "status": r.status}
                for r in self.rows
            ],
        }
        text = json.dumps(doc, indent=1)
        if path is not None:
            Path(path).write_text(text)
        return text

    def summary(self) -> dict:
        fid = self.fidelity
        ok = ~np.isnan(fid)
        out = {"points": len(self.rows), "valid_points": int(ok.sum())}
        if ok.any():
            i = int(np.nanargmax(fid))
            out.update(
                max_fidelity=float(fid[i]),
                max_at=self.rows[i].values,
                min_fidelity=float(np.nanmin(fid)),
                mean_fidelity=float(np.nanmean(fid)),
            )
        out["status_counts"] = {s: sum(r.status == s for r in self.rows) for s in sorted({r.status for r in self.rows})}
        return out


def sweep_spec_dict(spec: SweepSpec) -> dict:
    return {
        "axes": [{"name": a.name, "min": a.min, "max": a.max, "points": a.points} for a in spec.axes],
        "fixed": spec.fixed,
        "n_atoms": spec.n_atoms,
        "model": spec.model,
        "k": spec.k,
    }


def evaluate_point(spec: SweepSpec, values: dict, cfg: IntegratorConfig | None = None) -> SweepRow:
    """Fidelity at the k-th generation time for one grid point; never raises for physics issues."""
    start = time.perf_counter()
    ratios = {**spec.fixed, **values}
    p = resolve_params(ratios, spec.n_atoms, spec.f_absolute_mhz)
    try:
        t = float(analytic.generation_times(p, spec.k)[-1])
    except SingularityError:
        return SweepRow(values, p.delta, p.nu, math.nan, math.nan, "singular", time.perf_counter() - start)
    except ParameterError:
        return SweepRow(values, p.delta, p.nu, math.nan, math.nan, "no_generation_time", time.perf_counter() - start)
    fid = fidelity_at(p, t, spec.model, cfg)
    status = "ok" if validate_params(p).ok else "non_dispersive"
    return SweepRow(values, p.delta, p.nu, t * p.f, fid, status, time.perf_counter() - start)


def _evaluate_packed(args):
    spec, values, cfg = args
    return evaluate_point(spec, values, cfg)


def run_sweep(spec: SweepSpec, workers: int = 1, cfg: IntegratorConfig | None = None) -> SweepResult:
    if spec.n_points > spec.max_points:
        raise ConfigError(f"axes: {spec.n_points} grid points exceed the cap of {spec.max_points}")
    points = list(spec.grid())
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(points) // (4 * workers))
            rows = list(pool.map(_evaluate_packed, [(spec, v, cfg) for v in points], chunksize=chunk))
    else:
        rows = [evaluate_point(spec, v, cfg) for v in points]
    return SweepResult(spec, rows)


# --- scenarios ------------------------------------------------------------

FIG4_DELTA = {"min": 5.0, "max": 20.0, "points": 41}
FIG4_RATIO = {"min": 0.8, "max": 2.0, "points": 41}

SCENARIO_DEFAULTS: dict[str, dict] = {
    "fig2a": {"n_list": [3, 4, 5, 6], "delta_over_f": 10.0, "nu_over_f": 10.0, "model": "full", "periods": 2.0},
    "fig2b": {"n_list": [3, 4, 5, 6], "delta_over_f": 10.0, "nu_over_f": 10.0, "model": "full", "periods": 2.0},
    "fig3": {"n_atoms": 4, "nu_over_f": 10.0, "delta_over_f": {"min": 2.0, "max": 12.0, "points": 201}, "model": "full"},
    "fig4a": {"n_atoms": 4, "delta_over_f": FIG4_DELTA, "delta_over_nu": FIG4_RATIO, "Gamma_over_f": 0.01, "model": "lindblad"},
    "fig4b": {"n_atoms": 4, "delta_over_f": FIG4_DELTA, "delta_over_nu": FIG4_RATIO, "gamma_over_f": 0.3, "model": "lindblad"},
    "fig4c": {"n_atoms": 4, "delta_over_f": FIG4_DELTA, "delta_over_nu": FIG4_RATIO, "kappa_over_f": 0.3, "model": "lindblad"},
    "fig5a": {
        "n_atoms": 4, "delta_over_f": 10.0, "nu_over_f": 10.0, "model": "lindblad",
        "Gamma_over_f": {"min": 0.0, "max": 0.05, "points": 21},
        "gamma_over_f": {"min": 0.0, "max": 0.3, "points": 21},
    },
    "fig5b": {
        "n_atoms": 4, "delta_over_f": 10.0, "nu_over_f": 10.0, "model": "lindblad",
        "Gamma_over_f": {"min": 0.0, "max": 0.05, "points": 21},
        "kappa_over_f": {"min": 0.0, "max": 0.3, "points": 21},
    },
    "feasibility": {
        "n_atoms": 4, "delta_over_f": 10.0, "nu_over_f": 10.0, "model": "lindblad",
        "f_absolute_mhz": FEASIBILITY_F_MHZ, **FEASIBILITY_RATES,
    },
    "custom": {"n_atoms": 4, "delta_over_f": 10.0, "nu_over_f": 10.0, "model": "lindblad"},
}

SCENARIO_NOTES = {
    "fig4a": "delta_over_f range and 41x41 resolution are inferred defaults",
    "fig4b": "delta_over_f range and 41x41 resolution are inferred defaults",
    "fig4c": "delta_over_f range and 41x41 resolution are inferred defaults",
    "fig5a": "Gamma/f in [0, 0.05] and gamma/f in [0, 0.3] are inferred ranges",
    "fig5b": "Gamma/f in [0, 0.05] and kappa/f in [0, 0.3] are inferred ranges",
    "feasibility": "Delta = nu = 10 f is assumed; the detuning of the experimental estimate is not given",
}


def scenario_settings(cfg: ScenarioConfig) -> dict:
    return {**SCENARIO_DEFAULTS[cfg.name], **cfg.overrides}


def _split(settings: dict) -> tuple[list[Axis], dict]:
    axes, fixed = [], {}
    for name in AXIS_NAMES:
        value = settings.get(name)
        if isinstance(value, dict):
            axes.append(Axis(name, float(value["min"]), float(value["max"]), value["points"]))
        elif value is not None:
            fixed[name] = float(value)
    return axes, fixed


def scenario_sweep_spec(cfg: ScenarioConfig) -> SweepSpec:
    s = scenario_settings(cfg)
    axes, fixed = _split(s)
    return SweepSpec(
        axes=tuple(axes),
        fixed=fixed,
        n_atoms=int(s.get("n_atoms", 4)),
        model=s.get("model", "lindblad"),
        k=int(s.get("k", 0)),
        f_absolute_mhz=s.get("f_absolute_mhz"),
        max_points=int(s.get("max_points", DEFAULT_MAX_POINTS)),
    )


def integrator_config(settings: dict, max_samples: int = 2000) -> IntegratorConfig:
    dt = settings.get("dt")
    return IntegratorConfig(dt=dt, max_samples=max_samples)


def run_trajectory(p: SystemParams, model: str, t_end: float, cfg: IntegratorConfig, frame: str = "static") -> RunResult:
    """Evolve from atom 1 excited with the chosen model."""
    first = np.eye(p.n_atoms)[0]
    if model == "full":
        return evolve_full(p, atomic_state(first), t_end, cfg, frame=frame)
    if model == "effective":
        return evolve_effective(p, first, t_end, cfg)
    if model == "lindblad":
        return evolve_lindblad(p, density(atomic_state(first)), t_end, cfg)
    raise ConfigError(f"model: must be one of {', '.join(MODELS)}, got {model!r}")


def first_peak(result: RunResult) -> tuple[float, float]:
    """Time (in 1/f) and value of the fidelity maximum over the first slow period, tau in (0, 2 pi)."""
    mask = (result.tau > 0) & (result.tau < 2 * math.pi)
    i = int(np.argmax(np.where(mask, result.fidelity, -np.inf)))
    return float(result.t_f[i]), float(result.fidelity[i])


def run_fig2(settings: dict) -> tuple[dict[int, RunResult], dict]:
    runs, summary = {}, {}
    for n in settings["n_list"]:
        p = resolve_params(settings, int(n))
        t1 = analytic.first_generation_time(p)
        # resolve the fast atom-field oscillation with >= 20 samples per period
        fast = 2 * math.pi / p.rate_scale()
        span = 2 * settings.get("periods", 2.0) * t1
        cfg = IntegratorConfig(dt=settings.get("dt"), max_samples=max(2000, int(20 * span / fast)))
        res = run_trajectory(p, settings.get("model", "full"), span, cfg, settings.get("frame", "static"))
        t_peak, f_peak = first_peak(res)
        at = {}
        point_cfg = IntegratorConfig(dt=settings.get("dt"), max_samples=1)
        for k in range(int(settings.get("periods", 2.0))):
            tk = (2 * k + 1) * t1
            at[f"fidelity_at_tau_{2 * k + 1}pi"] = fidelity_at(p, tk, settings.get("model", "full"), point_cfg)
        runs[int(n)] = res
        summary[str(n)] = {
            "eta": analytic.effective_couplings(p).eta,
            "generation_time_f": t1,
            "first_peak_t_f": t_peak,
            "first_peak_fidelity": f_peak,
            **at,
        }
    return runs, summary


def _write(text: str, out_dir: Path, name: str) -> Path:
    path = out_dir / name
    path.write_text(text)
    return path


def run_scenario(cfg: ScenarioConfig) -> dict:
    """Run a named scenario, write its files and return the summary document."""
    settings = scenario_settings(cfg)
    out_dir = Path(cfg.out) if cfg.out else None
    if out_dir is not None:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"out: cannot create {out_dir}: {exc}") from exc
    summary = {"scenario": cfg.name, "settings": settings, "files": []}
    if cfg.name in SCENARIO_NOTES:
        summary["note"] = SCENARIO_NOTES[cfg.name]

    if cfg.name in ("fig2a", "fig2b"):
        runs, curves = run_fig2(settings)
        summary["axis"] = "tau" if cfg.name == "fig2a" else "t_f"
        summary["curves"] = curves
        if out_dir is not None:
            for n, res in runs.items():
                name = f"{cfg.name}_N{n}.{cfg.fmt}"
                text = res.to_csv() if cfg.fmt == "csv" else res.to_json()
                summary["files"].append(str(_write(text, out_dir, name)))
    elif cfg.name in ("feasibility", "custom") and not _split(settings)[0]:
        p = resolve_params(settings, int(settings.get("n_atoms", 4)), settings.get("f_absolute_mhz"))
        report = validate_params(p)
        t_gen = analytic.first_generation_time(p)
        t_end = settings.get("t_end") or t_gen
        res = run_trajectory(p, settings.get("model", "lindblad"), t_end, integrator_config(settings), settings.get("frame", "static"))
        res.metadata.update(scenario=cfg.name, warnings=report.warnings)
        summary.update(res.summary())
        summary["generation_time_f"] = t_gen
        if t_end == t_gen:
            summary["fidelity_at_generation_time"] = float(res.fidelity[-1])
        else:
            summary["fidelity_at_generation_time"] = fidelity_at(
                p, t_gen, settings.get("model", "lindblad"), integrator_config(settings, max_samples=1)
            )
        if p.f_absolute_mhz is not None:
            summary["generation_time_ns"] = t_gen / p.f_absolute_mhz * 1e3
        if out_dir is not None:
            text = res.to_csv() if cfg.fmt == "csv" else res.to_json()
            summary["files"].append(str(_write(text, out_dir, f"{cfg.name}.{cfg.fmt}")))
    else:
        spec = scenario_sweep_spec(cfg)
        result = run_sweep(spec, workers=cfg.workers, cfg=integrator_config(settings, max_samples=1))
        summary["sweep"] = result.summary()
        if cfg.name.startswith("fig4"):
            summary["sweep"]["band_means"] = band_means(result)
        if out_dir is not None:
            text = result.to_csv() if cfg.fmt == "csv" else result.to_json()
            summary["files"].append(str(_write(text, out_dir, f"{cfg.name}.{cfg.fmt}")))
    if out_dir is not None:
        path = out_dir / f"{cfg.name}_summary.json"
        summary["files"].append(str(path))
        path.write_text(json.dumps(summary, indent=1, default=_jsonable))
    return summary


def band_means(result: SweepResult, bands=((0.8, 1.2), (1.8, 2.0))) -> dict:
    """Mean fidelity over delta_over_nu bands, ignoring singular points."""
    ratio = result.column("delta_over_nu")
    fid = result.fidelity
    out = {}
    for lo, hi in bands:
        sel = (ratio >= lo - 1e-12) & (ratio <= hi + 1e-12) & ~np.isnan(fid)
        out[f"{lo:g}-{hi:g}"] = float(fid[sel].mean()) if sel.any() else None
    return out


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj))


# --- config parsing -------------------------------------------------------

SCALAR_KEYS = {
    "scenario", "n_atoms", "n_list", "model", "frame", "k", "t_end", "dt", "periods",
    "f_absolute_mhz", "out", "format", "workers", "max_points",
}
AXIS_KEYS = {"min", "max", "points"}


def _number(key, value, *, positive=False, integer=False, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite")
    if integer and int(value) != value:
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(f"{key}: must be > 0, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}, got {value!r}")
    return int(value) if integer else float(value)


def _check_document(doc: dict) -> dict:
    clean = {}
    for key, value in doc.items():
        if key in AXIS_NAMES:
            if isinstance(value, dict):
                extra = set(value) - AXIS_KEYS
                if extra or set(value) != AXIS_KEYS:
                    raise ConfigError(f"{key}: axis needs exactly min, max, points (got {sorted(value)})")
                ax = {
                    "min": _number(f"{key}.min", value["min"], minimum=0),
                    "max": _number(f"{key}.max", value["max"], minimum=0),
                    "points": _number(f"{key}.points", value["points"], integer=True, minimum=2),
                }
                Axis(key, ax["min"], ax["max"], ax["points"])
                clean[key] = ax
            else:
                clean[key] = _number(key, value, minimum=0)
                if key in ("nu_over_f", "delta_over_nu") and clean[key] <= 0:
                    raise ConfigError(f"{key}: must be > 0, got {value!r}")
        elif key in SCALAR_KEYS:
            clean[key] = value
        else:
            raise ConfigError(f"{key}: unknown key")
    if "scenario" in clean and clean["scenario"] not in SCENARIOS:
        raise ConfigError(f"scenario: unknown {clean['scenario']!r}; valid scenarios: {', '.join(SCENARIOS)}")
    if "n_atoms" in clean:
        clean["n_atoms"] = _number("n_atoms", clean["n_atoms"], integer=True, minimum=3)
    if "n_list" in clean:
        if not isinstance(clean["n_list"], list) or not clean["n_list"]:
            raise ConfigError("n_list: expected a non-empty list of integers")
        clean["n_list"] = [_number("n_list", n, integer=True, minimum=3) for n in clean["n_list"]]
    if "model" in clean and clean["model"] not in MODELS:
        raise ConfigError(f"model: must be one of {', '.join(MODELS)}, got {clean['model']!r}")
    if "frame" in clean and clean["frame"] not in ("static", "interaction"):
        raise ConfigError(f"frame: must be static or interaction, got {clean['frame']!r}")
    if "format" in clean and clean["format"] not in ("csv", "json"):
        raise ConfigError(f"format: must be csv or json, got {clean['format']!r}")
    for key, kw in (
        ("k", {"integer": True, "minimum": 0}),
        ("t_end", {"positive": True}),
        ("dt", {"positive": True}),
        ("periods", {"positive": True}),
        ("f_absolute_mhz", {"positive": True}),
        ("workers", {"integer": True, "minimum": 1}),
        ("max_points", {"integer": True, "minimum": 1}),
    ):
        if key in clean:
            clean[key] = _number(key, clean[key], **kw)
    ratio_keys = [k for k in ("delta_over_f", "nu_over_f", "delta_over_nu") if k in clean]
    if len(ratio_keys) == 3:
        raise ConfigError("delta_over_nu: overdetermined together with delta_over_f and nu_over_f")
    return clean


def parse_config(path) -> ScenarioConfig | SweepSpec:
    """Strict JSON config reader.

    A document with a "scenario" key yields a ScenarioConfig whose remaining
    keys override that scenario's defaults; otherwise the document must
    define at least one axis and yields a SweepSpec.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    return parse_config_text(text)


def parse_config_text(text: str) -> ScenarioConfig | SweepSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: malformed JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a JSON object")
    clean = _check_document(doc)
    if "scenario" in clean:
        name = clean.pop("scenario")
        out = clean.pop("out", None)
        fmt_ = clean.pop("format", "csv")
        workers = clean.pop("workers", 1)
        defaults = SCENARIO_DEFAULTS[name]
        merged = {**defaults, **clean}
        if sum(merged.get(k) is not None for k in ("delta_over_f", "nu_over_f", "delta_over_nu")) == 3:
            # an explicit override of one ratio displaces the default it conflicts with
            for k in ("nu_over_f", "delta_over_f"):
                if k in defaults and k not in clean:
                    clean[k] = None
                    break
        return ScenarioConfig(name, clean, out, fmt_, workers)
    axes, fixed = _split(clean)
    if not axes:
        raise ConfigError("config: a sweep document needs at least one axis ({min, max, points}) or a scenario key")
    leftover = set(clean) - set(AXIS_NAMES) - {"n_atoms", "model", "k", "f_absolute_mhz", "max_points"}
    if leftover:
        raise ConfigError(f"{sorted(leftover)[0]}: not valid in a sweep document")
    return SweepSpec(
        axes=tuple(axes),
        fixed=fixed,
        n_atoms=clean.get("n_atoms", 4),
        model=clean.get("model", "lindblad"),
        k=clean.get("k", 0),
        f_absolute_mhz=clean.get("f_absolute_mhz"),
        max_points=clean.get("max_points", DEFAULT_MAX_POINTS),
    )
