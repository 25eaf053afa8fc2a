"""Command-line interface.

Subcommands: simulate (trajectory CSV per method), rates (rate matrix dump and
optional closed-form comparison), sweep (steady-state scans), fit (1-F ~ a/C).
Every report CSV gets a rendered PNG next to it unless --no-plot is given.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 weak-field
violation (under --strict, or unsatisfiable detuning collisions), 4 numerical
failure (degenerate parameters, step-size rejection, conservation breakage).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .analysis import SweepSpec, fit_scaling, run_sweep
from .config import ConfigError, RunConfig, initial_state, load_config
from .dynamics import (
    DEFAULT_MASTER_DT,
    DEFAULT_RATE_DT,
    NonUniqueSteadyStateError,
    NumericalFailureError,
    StepSizeError,
    Trajectory,
    ground_density,
    integrate_master,
    build_composite_hamiltonian,
    run_full_independent,
    run_rate_method,
)
from .effective import assemble_rate_matrix, compare_rates
from .model import (
    DegenerateParameterError,
    build_lindblad_set,
    check_weak_field,
    ground_basis,
)
from . import reporting

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_WEAK_FIELD = 3
EXIT_NUMERICAL = 4


class WeakFieldViolation(RuntimeError):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsteady",
        description="Dissipative three-atom W-state preparation simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a trajectory and write it as CSV")
    sim.add_argument("--config", type=Path, default=None, help="key=value config file")
    sim.add_argument("--method", choices=("rate", "full_time_dependent", "full_independent", "both"),
                     default=None, help="override the configured method")
    sim.add_argument("--output", type=Path, required=True, help="trajectory CSV path")
    sim.add_argument("--strict", action="store_true",
                     help="fail (exit 3) when the weak-field condition is violated")
    sim.add_argument("--no-plot", action="store_true", help="skip PNG rendering")

    rates = sub.add_parser("rates", help="dump the 8x8 effective rate matrix")
    rates.add_argument("--config", type=Path, default=None)
    rates.add_argument("--output", type=Path, required=True)
    rates.add_argument("--compare-closed-form", action="store_true",
                       help="also write the closed-form comparison CSV")
    rates.add_argument("--no-plot", action="store_true")

    sweep = sub.add_parser("sweep", help="steady-state scan along one axis")
    sweep.add_argument("--axis", choices=("cooperativity", "gamma_over_kappa", "omega_over_g"),
                       required=True)
    sweep.add_argument("--from", dest="start", type=float, required=True)
    sweep.add_argument("--to", dest="stop", type=float, required=True)
    sweep.add_argument("--points", type=int, required=True)
    sweep.add_argument("--config", type=Path, default=None)
    sweep.add_argument("--output", type=Path, required=True)
    sweep.add_argument("--no-plot", action="store_true")

    fit = sub.add_parser("fit", help="fit 1-F = a/C to a cooperativity sweep CSV")
    fit.add_argument("--input", type=Path, required=True)
    return parser


def _surface_weak_field(config: RunConfig, strict: bool) -> None:
    try:
        report = check_weak_field(config.params)
    except ValueError as exc:  # equal detunings on active drives: unsatisfiable
        raise WeakFieldViolation(str(exc)) from None
    flagged = [pair for pair in report if pair.flagged]
    for pair in flagged:
        print(f"warning: weak-field ratio for drives ({pair.k},{pair.l}) is "
              f"{pair.ratio:.3f} (> 0.1)", file=sys.stderr)
    if flagged and strict:
        raise WeakFieldViolation(
            f"{len(flagged)} drive pair(s) violate the weak-field condition"
        )


def _run_method(config: RunConfig, method: str) -> Trajectory:
    populations, amplitudes = initial_state(config)
    if method == "rate":
        dt = config.dt if config.dt is not None else DEFAULT_RATE_DT
        return run_rate_method(config.params, populations, config.t_end, dt=dt)
    if method == "full_independent":
        dt = config.dt if config.dt is not None else DEFAULT_RATE_DT
        return run_full_independent(config.params, populations, config.t_end, dt=dt)
    if method == "full_time_dependent":
        space = config.params.space
        if amplitudes is None:
            rho0 = ground_density(space, populations)
        else:
            vec = ground_basis(space) @ amplitudes
            rho0 = vec[:, None] * vec.conj()[None, :]
        dt = config.dt if config.dt is not None else DEFAULT_MASTER_DT
        ham = build_composite_hamiltonian(space, config.params)
        lindblads = build_lindblad_set(space, config.params)
        return integrate_master(space, rho0, ham, lindblads, config.t_end, dt=dt)
    raise ConfigError(f"unknown method {method!r}")


def _suffixed(path: Path, tag: str) -> Path:
    return path.with_name(f"{path.stem}.{tag}{path.suffix}")


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    _surface_weak_field(config, args.strict)
    method = args.method or config.method
    methods = ("rate", "full_time_dependent") if method == "both" else (method,)
    trajectories = [_run_method(config, m) for m in methods]
    for m, traj in zip(methods, trajectories):
        out = args.output if len(methods) == 1 else _suffixed(args.output, m)
        reporting.write_trajectory_csv(out, traj)
        final = traj.final_metrics
        print(f"method={m} t_end={config.t_end:g} "
              f"final_fidelity={final.fidelity:.6f} final_purity={final.purity:.6f} "
              f"csv={out}")
    if not args.no_plot:
        png = reporting.plot_trajectories(reporting.figure_path(args.output), trajectories)
        print(f"figure={png}")
    return EXIT_OK


def _cmd_rates(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    mu = assemble_rate_matrix(config.params)
    reporting.write_rate_matrix_csv(args.output, mu)
    print(f"rate_matrix={args.output} max_rate={mu.max():.6g}")
    if args.compare_closed_form:
        rows = compare_rates(config.params)
        out = _suffixed(args.output, "compare")
        reporting.write_comparison_csv(out, rows)
        flagged = sum(r.note != "ok" for r in rows)
        print(f"comparison={out} pairs={len(rows)} flagged={flagged}")
    if not args.no_plot:
        png = reporting.plot_rate_matrix(reporting.figure_path(args.output), mu)
        print(f"figure={png}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    try:
        spec = SweepSpec(axis=args.axis, start=args.start, stop=args.stop,
                         points=args.points, base=config.params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    workers = int(os.environ.get("WSTEADY_WORKERS", "1"))
    rows = run_sweep(spec, workers=workers)
    reporting.write_sweep_csv(args.output, rows)
    good = [r for r in rows if not r.reason]
    print(f"sweep axis={args.axis} points={len(rows)} failed={len(rows) - len(good)} "
          f"csv={args.output}")
    if good:
        best = max(good, key=lambda r: r.fidelity)
        print(f"best value={best.value:.6g} fidelity={best.fidelity:.6f}")
    if not args.no_plot:
        png = reporting.plot_sweep(reporting.figure_path(args.output), rows)
        print(f"figure={png}")
    return EXIT_OK


def _cmd_fit(args: argparse.Namespace) -> int:
    try:
        points = reporting.read_fit_points(args.input)
        result = fit_scaling(points)
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from None
    print(f"a={result.a:.9g} rms_residual={result.residual:.9g} points={result.points_used}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "rates": _cmd_rates,
    "sweep": _cmd_sweep,
    "fit": _cmd_fit,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WeakFieldViolation as exc:
        print(f"error: weak-field condition: {exc}", file=sys.stderr)
        return EXIT_WEAK_FIELD
    except (DegenerateParameterError, StepSizeError, NumericalFailureError,
            NonUniqueSteadyStateError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
