"""Command-line entry point: ``wcavity <subcommand> ...``.

Exit codes: 0 success, 2 validation error, 3 integrator abort.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import analytic
from .dynamics import IntegratorConfig, evolve_fock, fmt
from .experiments import (
    SCENARIOS,
    ConfigError,
    ScenarioConfig,
    SweepSpec,
    parse_config,
    run_scenario,
    run_sweep,
    run_trajectory,
)
from .model import IntegratorError, ParameterError, SingularityError, SystemParams, validate_params
from .normal_modes import build_transform, dump_transform_csv

EXIT_OK, EXIT_VALIDATION, EXIT_INTEGRATOR = 0, 2, 3


def _physics_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("physics (all rates as ratios to f)")
    g.add_argument("--n", type=int, default=4, help="number of atoms N (>= 3)")
    g.add_argument("--delta", type=float, default=10.0)
    g.add_argument("--nu", type=float, default=10.0)
    g.add_argument("--Gamma", type=float, default=0.0, help="atomic spontaneous emission")
    g.add_argument("--gamma", type=float, default=0.0, help="cavity decay")
    g.add_argument("--kappa", type=float, default=0.0, help="fiber decay")
    g.add_argument("--f-mhz", type=float, default=None, help="absolute f in rad/us, adds a t_ns column")


def _output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output file (or directory for figures); stdout if omitted")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _params(args) -> SystemParams:
    return SystemParams(
        n_atoms=args.n,
        nu=args.nu,
        delta=args.delta,
        gamma_atom=args.Gamma,
        gamma_cavity=args.gamma,
        kappa=args.kappa,
        f_absolute_mhz=args.f_mhz,
    )


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_analytic(args) -> int:
    p = _params(args)
    t_gen = analytic.first_generation_time(p)
    t_end = args.t_end if args.t_end is not None else 4 * t_gen
    times = np.linspace(0.0, t_end, args.points)
    c = analytic.coefficients_series(p, times)
    fid = analytic.analytic_fidelity(p, times)
    eta = analytic.effective_couplings(p).eta
    cols = ["t_f", "tau", "pop_c1", "pop_cn", "fidelity"]
    rows = [[t, p.n_atoms * eta * t, abs(a[0]) ** 2, abs(a[1]) ** 2, F] for t, a, F in zip(times, c, fid)]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerows([[fmt(x) for x in r] for r in rows])
        text = buf.getvalue()
    else:
        k = analytic.effective_couplings(p)
        text = json.dumps(
            {"params": p.as_dict(), "xi": k.xi, "eta": k.eta, "generation_time_f": t_gen, "columns": cols, "data": rows},
            indent=1,
        )
    _emit(text, args.out)
    return EXIT_OK


def cmd_evolve(args) -> int:
    p = _params(args)
    for w in validate_params(p).warnings:
        print(f"warning: {w}", file=sys.stderr)
    t_end = args.t_end if args.t_end is not None else analytic.first_generation_time(p)
    cfg = IntegratorConfig(dt=args.dt)
    if args.nmax is not None:
        if p.has_dissipation:
            raise ConfigError("nmax: the truncated-Fock check is unitary; drop --Gamma/--gamma/--kappa")
        res = evolve_fock(p, args.nmax, t_end, cfg)
    else:
        res = run_trajectory(p, args.model, t_end, cfg, args.frame)
    _emit(res.to_csv() if args.format == "csv" else res.to_json(), args.out)
    print(json.dumps({k: v for k, v in res.summary().items() if k != "integrator"}), file=sys.stderr)
    return EXIT_OK


def _scenario_from(args, name: str) -> ScenarioConfig:
    overrides = {}
    if args.config:
        parsed = parse_config(args.config)
        if not isinstance(parsed, ScenarioConfig) or parsed.name != name:
            raise ConfigError(f"config: expected a document with scenario {name!r}")
        overrides = parsed.overrides
    return ScenarioConfig(name, overrides, args.out, args.format, args.workers)


def cmd_figure(args) -> int:
    summary = run_scenario(_scenario_from(args, args.name))
    print(json.dumps(summary, indent=1, default=str))
    return EXIT_OK


def cmd_feasibility(args) -> int:
    summary = run_scenario(_scenario_from(args, "feasibility"))
    print(json.dumps(summary, indent=1, default=str))
    return EXIT_OK


def cmd_sweep(args) -> int:
    parsed = parse_config(args.config)
    if isinstance(parsed, ScenarioConfig):
        summary = run_scenario(ScenarioConfig(parsed.name, parsed.overrides, args.out or parsed.out, args.format, args.workers))
        print(json.dumps(summary, indent=1, default=str))
        return EXIT_OK
    assert isinstance(parsed, SweepSpec)
    result = run_sweep(parsed, workers=args.workers)
    text = result.to_csv(timing=args.timing) if args.format == "csv" else result.to_json()
    _emit(text, args.out)
    print(json.dumps(result.summary(), default=str), file=sys.stderr)
    return EXIT_OK


def cmd_transform(args) -> int:
    _emit(dump_transform_csv(build_transform(args.n)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wcavity", description="W-class state generation in fiber-coupled cavities")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="closed-form dispersive dynamics as a time series")
    _physics_flags(p)
    _output_flags(p)
    p.add_argument("--t-end", type=float, default=None, help="in 1/f; default four generation times")
    p.add_argument("--points", type=int, default=2001)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("evolve", help="numerical time evolution from atom 1 excited")
    _physics_flags(p)
    _output_flags(p)
    p.add_argument("--model", choices=("full", "effective", "lindblad"), default="full")
    p.add_argument("--frame", choices=("static", "interaction"), default="static")
    p.add_argument("--t-end", type=float, default=None, help="in 1/f; default first generation time")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--nmax", type=int, default=None, help="evolve in the truncated Fock space instead")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("sweep", help="grid sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="add a wall-time column (breaks byte reproducibility)")
    _output_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="reproduce one figure's data")
    p.add_argument("name", choices=[s for s in SCENARIOS if s not in ("feasibility", "custom")])
    p.add_argument("--config", default=None)
    p.add_argument("--workers", type=int, default=1)
    _output_flags(p)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("feasibility", help="fidelity for the quoted experimental parameters")
    p.add_argument("--config", default=None)
    p.add_argument("--workers", type=int, default=1)
    _output_flags(p)
    p.set_defaults(func=cmd_feasibility)

    p = sub.add_parser("transform", help="dump the normal-mode matrix as CSV")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_transform)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IntegratorError as exc:
        print(f"integrator abort: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR
    except (ConfigError, ParameterError, SingularityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
