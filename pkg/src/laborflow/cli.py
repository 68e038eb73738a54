"""Command-line front end.

Subcommands: build-net, run, steady, beveridge, calibrate, scenario export.
Exit codes: 0 success, 1 runtime model error, 2 usage or config error,
3 steady-state non-convergence.  All randomness enters through --seed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from ._version import __version__
from .abm import run_simulation
from .calibrate import fit_beveridge
from .config import RunConfig, load_config
from .errors import ConfigError, LaborFlowError, NoConvergenceError
from .fileio import (
    file_sha256,
    params_metadata,
    read_series_csv,
    write_calibration_csv,
    write_metadata,
    write_series_csv,
    write_steady_csv,
)
from .meanfield import run_meanfield, solve_steady_state, steady_mean_state
from .metrics import BeveridgeCurve, curve_overlap, cycle_direction, read_curve, signed_area
from .network import build_network, read_network, read_transition_counts, write_network
from .scenario import write_demand_csv
from .state import discretize_state

EXIT_OK = 0
EXIT_MODEL = 1
EXIT_USAGE = 2
EXIT_NO_CONVERGENCE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laborflow",
        description="Labor reallocation on an occupational mobility network",
    )
    parser.add_argument("--version", action="version", version=f"laborflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-net", help="build a mobility network from transition counts")
    p.add_argument("--transitions", required=True, help="CSV with source,target,count")
    p.add_argument("--self-loop", type=float, required=True,
                   help="probability of applying within the current occupation")
    p.add_argument("--out", required=True, help="output network CSV")

    p = sub.add_parser("run", help="simulate a scenario with either engine")
    p.add_argument("--config", required=True, help="INI run configuration")
    p.add_argument("--engine", choices=["abm", "meanfield"])
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--per-occupation", action="store_true", default=None)
    p.add_argument("--ensemble", type=int, default=None,
                   help="run N seeded stochastic replicas (seed, seed+1, ...)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for --ensemble")
    p.add_argument("--trace", default=None,
                   help="also write the per-step event trace CSV (.gz compresses)")

    p = sub.add_parser("steady", help="solve the steady state under constant demand")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=10**6)

    p = sub.add_parser("beveridge", help="geometry of a Beveridge curve from a series CSV")
    p.add_argument("--series", required=True, help="series CSV (from `run`) or curve CSV")
    p.add_argument("--reference", help="reference curve CSV for overlap scoring")
    p.add_argument("--grid-resolution", type=int, default=2048)
    p.add_argument("--out", help="write the extracted curve CSV here")

    p = sub.add_parser("calibrate", help="grid-search parameters against a reference curve")
    p.add_argument("--config", required=True, help="INI with [grid] plus fixed sections")
    p.add_argument("--reference", required=True, help="reference Beveridge curve CSV")
    p.add_argument("--out", required=True, help="score table CSV")
    p.add_argument("--grid-resolution", type=int, default=512)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("scenario", help="scenario utilities")
    scen_sub = p.add_subparsers(dest="scenario_command", required=True)
    pe = scen_sub.add_parser("export", help="materialize the target demand path to CSV")
    pe.add_argument("--config", required=True)
    pe.add_argument("--steps", type=int)
    pe.add_argument("--out", required=True)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return _dispatch(args)
    except NoConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LaborFlowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


def _dispatch(args) -> int:
    if args.command == "build-net":
        return cmd_build_net(args)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "steady":
        return cmd_steady(args)
    if args.command == "beveridge":
        return cmd_beveridge(args)
    if args.command == "calibrate":
        return cmd_calibrate(args)
    if args.command == "scenario" and args.scenario_command == "export":
        return cmd_scenario_export(args)
    raise ConfigError(f"unknown command {args.command!r}")


def _load(args) -> RunConfig:
    overrides = {
        key: getattr(args, key, None)
        for key in ("engine", "steps", "seed", "out", "per_occupation")
    }
    return load_config(args.config, overrides)


def _base_meta(args, cfg: RunConfig | None = None) -> dict:
    meta = {"command": " ".join(getattr(args, "argv", [])) or args.command}
    if cfg is not None:
        for name, path in sorted(cfg.inputs.items()):
            meta[f"input_{name}_sha256"] = file_sha256(path)
        meta.update({f"param_{k}": v for k, v in params_metadata(cfg.params).items()})
        meta["scenario"] = cfg.path.meta.get("scenario", "constant")
    return meta


def cmd_build_net(args) -> int:
    counts = read_transition_counts(args.transitions)
    net = build_network(counts, args.self_loop)
    write_network(net, args.out)
    print(f"wrote {net.n}-occupation network to {args.out}")
    return EXIT_OK


def _initial_states(cfg: RunConfig):
    """Both engines start from the steady state under the initial demand."""
    steady = solve_steady_state(cfg.network, cfg.d0, cfg.params)
    mean0 = steady_mean_state(steady, cfg.network, cfg.params)
    return mean0, steady


def cmd_run(args) -> int:
    cfg = _load(args)
    if cfg.out is None:
        raise ConfigError("no output path: set [run] out or pass --out")
    if cfg.engine == "meanfield" and getattr(args, "trace", None):
        raise ConfigError("--trace records stochastic events; it needs engine=abm")
    mean0, _ = _initial_states(cfg)
    meta = _base_meta(args, cfg)
    meta["steps"] = cfg.steps
    if cfg.engine == "meanfield":
        series = run_meanfield(mean0, cfg.path, cfg.network, cfg.params, cfg.steps)
        write_series_csv(series, cfg.out, cfg.per_occupation, meta)
        print(f"wrote meanfield series ({cfg.steps} steps) to {cfg.out}")
        return EXIT_OK

    initial = discretize_state(mean0, cfg.params.labor_force)
    ensemble = getattr(args, "ensemble", None)
    if not ensemble:
        trace_path = getattr(args, "trace", None)
        series = run_simulation(
            initial, cfg.path, cfg.network, cfg.params, cfg.steps, cfg.seed,
            trace=trace_path is not None,
        )
        write_series_csv(series, cfg.out, cfg.per_occupation, meta)
        if trace_path is not None:
            from .fileio import write_trace_csv

            write_trace_csv(series.meta["records"], cfg.network.labels, trace_path, meta)
        print(f"wrote stochastic series (seed {cfg.seed}) to {cfg.out}")
        return EXIT_OK
    return _run_ensemble(cfg, meta, ensemble, args.jobs, initial)


def _replica(initial, cfg, seed):
    return run_simulation(initial, cfg.path, cfg.network, cfg.params, cfg.steps, seed)


def _run_ensemble(cfg, meta, ensemble: int, jobs: int, initial) -> int:
    from joblib import Parallel, delayed

    seeds = [cfg.seed + k for k in range(ensemble)]
    if jobs == 1:
        runs = [_replica(initial, cfg, s) for s in seeds]
    else:
        runs = Parallel(n_jobs=jobs)(delayed(_replica)(initial, cfg, s) for s in seeds)
    stem, dot, suffix = cfg.out.rpartition(".")
    stem = stem if dot else cfg.out
    suffix = f".{suffix}" if dot else ".csv"
    for seed, series in zip(seeds, runs):
        write_series_csv(series, f"{stem}_seed{seed}{suffix}", cfg.per_occupation,
                         {**meta, "seed": seed})
    mean = runs[0]
    stacked = {
        "employed": np.mean([r.employed for r in runs], axis=0),
        "unemployed": np.mean([r.unemployed for r in runs], axis=0),
        "vacancies": np.mean([r.vacancies for r in runs], axis=0),
        "u_lt": np.mean([r.u_lt for r in runs], axis=0),
    }
    from .state import SimulationSeries

    aggregate = SimulationSeries(
        employed=stacked["employed"],
        unemployed=stacked["unemployed"],
        vacancies=stacked["vacancies"],
        u_lt=stacked["u_lt"],
        labels=mean.labels,
        engine="abm-ensemble",
        params=cfg.params,
        seed=cfg.seed,
        meta={"replicas": ensemble},
    )
    write_series_csv(aggregate, cfg.out, cfg.per_occupation,
                     {**meta, "replicas": ensemble, "base_seed": cfg.seed})
    print(f"wrote {ensemble} replicas plus ensemble mean to {cfg.out}")
    return EXIT_OK


def cmd_steady(args) -> int:
    cfg = _load(args)
    out = args.out or cfg.out
    if out is None:
        raise ConfigError("no output path: set [run] out or pass --out")
    steady = solve_steady_state(
        cfg.network, cfg.d0, cfg.params, tol=args.tol, max_iter=args.max_iter
    )
    meta = _base_meta(args, cfg)
    meta["residual"] = f"{steady.residual:.3e}"
    meta["iterations"] = steady.iterations
    meta["unemployment_rate"] = f"{steady.unemployment_rate:.10f}"
    write_steady_csv(steady, cfg.network.labels, out, meta)
    print(
        f"steady state: u-rate {steady.unemployment_rate:.4%}, "
        f"v-rate {steady.vacancy_rate:.4%} ({steady.iterations} iterations)"
    )
    return EXIT_OK


def _curve_from_file(path) -> BeveridgeCurve:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                continue
            header = line.strip().lower()
            break
        else:
            raise ValueError(f"{path}: empty file")
    if header.startswith("t,u_rate"):
        return read_curve(path)
    data = read_series_csv(path)
    for column in ("U", "V", "E"):
        if column not in data:
            raise ValueError(f"{path}: expected a curve CSV or a series CSV with U,V,E")
    u = data["U"] / (data["U"] + data["E"])
    v = data["V"] / (data["V"] + data["E"])
    return BeveridgeCurve(points=np.column_stack([u, v]))


def cmd_beveridge(args) -> int:
    curve = _curve_from_file(args.series)
    area = signed_area(curve)
    print(f"points: {curve.m}")
    print(f"signed_area: {area:.6e}")
    print(f"direction: {cycle_direction(curve)}")
    if args.reference:
        reference = _curve_from_file(args.reference)
        iou = curve_overlap(curve, reference, args.grid_resolution)
        print(f"overlap_iou: {iou:.6f}")
    if args.out:
        from .metrics import write_curve

        write_curve(curve, args.out)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _load(args)
    if cfg.grid is None:
        raise ConfigError("calibrate needs a [grid] section in the config")
    reference = _curve_from_file(args.reference)
    result = fit_beveridge(
        cfg.grid,
        reference,
        cfg.cycle_years,
        cfg.network,
        cfg.d0,
        gamma=cfg.params.gamma_u,
        grid_resolution=args.grid_resolution,
        n_jobs=args.jobs,
    )
    meta = _base_meta(args, cfg)
    meta["input_reference_sha256"] = file_sha256(args.reference)
    meta["best_iou"] = f"{result.best_score:.6f}"
    for key, value in result.best_params.items():
        meta[f"best_{key}"] = value
    write_calibration_csv(result.table, args.out, meta)
    best = ", ".join(f"{k}={v:.6g}" for k, v in result.best_params.items())
    print(f"best cell: {best} (IoU {result.best_score:.4f})")
    print(f"wrote {len(result.table)}-cell score table to {args.out}")
    return EXIT_OK


def cmd_scenario_export(args) -> int:
    cfg = _load(args)
    steps = args.steps if args.steps is not None else cfg.steps
    write_demand_csv(cfg.path, steps, cfg.network.labels, args.out)
    print(f"wrote target demand table ({steps + 1} steps) to {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
