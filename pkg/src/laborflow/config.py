"""Run configuration: an INI file with sections mirroring the module names.

Sections: [network] (file or complete-network size), [params], [scenario],
[run], and [grid] for calibration.  CLI flags override config values, which
override defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .calibrate import GridSpec
from .errors import ConfigError
from .network import (
    Network,
    ScoreVector,
    map_scores,
    read_crosswalk,
    read_mapped_scores,
    read_network,
    read_raw_scores,
)
from .network import complete_network as make_complete_network
from .params import ModelParams
from .scenario import (
    ConstantPath,
    DemandPath,
    ShockSpec,
    automation_shock_path,
    read_demand_vector,
    scale_aggregate,
    sine_path,
)


@dataclass
class RunConfig:
    network: Network
    params: ModelParams
    path: DemandPath
    d0: np.ndarray
    engine: str = "meanfield"
    steps: int = 100
    seed: int | None = None
    out: str | None = None
    per_occupation: bool = False
    scores: ScoreVector | None = None
    inputs: dict = field(default_factory=dict)  # referenced files, for hashing
    grid: GridSpec | None = None
    cycle_years: float = 14.6


def _get(section, key, cast, default=None, required=False):
    if section is None or key not in section:
        if required:
            name = section.name if section is not None else "?"
            raise ConfigError(f"missing required option '{key}' in section [{name}]")
        return default
    raw = section[key]
    try:
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except ValueError:
        raise ConfigError(f"option '{key}' has invalid value {raw!r}") from None


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Parse the INI file into a ready-to-run configuration.

    ``overrides`` (typically CLI flags) replace individual [run] options.
    """
    ini_path = Path(path)
    if not ini_path.exists():
        raise ConfigError(f"config file {path} does not exist")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read(ini_path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None

    base = ini_path.parent
    inputs: dict[str, str] = {"config": str(ini_path)}

    def resolve(raw_path: str) -> str:
        p = Path(raw_path)
        if not p.is_absolute():
            p = base / p
        if not p.exists():
            raise ConfigError(f"referenced file {raw_path} does not exist")
        return str(p)

    net_sec = parser["network"] if parser.has_section("network") else None
    if net_sec is None:
        raise ConfigError("missing [network] section")
    if "path" in net_sec:
        net_file = resolve(net_sec["path"])
        inputs["network"] = net_file
        network = read_network(net_file)
    elif "complete" in net_sec:
        network = make_complete_network(_get(net_sec, "complete", int, required=True))
    else:
        raise ConfigError("[network] needs either 'path' or 'complete'")

    par_sec = parser["params"] if parser.has_section("params") else None
    if par_sec is None:
        raise ConfigError("missing [params] section")
    gamma = _get(par_sec, "gamma", float)
    params = ModelParams(
        delta_u=_get(par_sec, "delta_u", float, required=True),
        delta_v=_get(par_sec, "delta_v", float, required=True),
        gamma_u=_get(par_sec, "gamma_u", float, gamma if gamma is not None else 0.16),
        gamma_v=_get(par_sec, "gamma_v", float, gamma if gamma is not None else 0.16),
        dt_weeks=_get(par_sec, "dt_weeks", float, 6.75),
        labor_force=_get(par_sec, "labor_force", int, required=True),
        tau_steps=_get(par_sec, "tau_steps", int, 0),
    )

    scn_sec = parser["scenario"] if parser.has_section("scenario") else None
    if scn_sec is None:
        raise ConfigError("missing [scenario] section")
    d0 = _initial_demand(scn_sec, network, params, resolve, inputs)
    scores = _load_scores(scn_sec, network, resolve, inputs)
    path_obj = _build_path(scn_sec, network, params, d0, scores)

    run_sec = parser["run"] if parser.has_section("run") else None
    cfg = RunConfig(
        network=network,
        params=params,
        path=path_obj,
        d0=d0,
        engine=_get(run_sec, "engine", str, "meanfield"),
        steps=_get(run_sec, "steps", int, 100),
        seed=_get(run_sec, "seed", int),
        out=_get(run_sec, "out", str),
        per_occupation=_get(run_sec, "per_occupation", bool, False),
        scores=scores,
        inputs=inputs,
        cycle_years=_get(scn_sec, "period_years", float, 14.6),
    )
    if parser.has_section("grid"):
        cfg.grid = _parse_grid(parser["grid"])

    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, key, value)

    if cfg.engine not in ("abm", "meanfield"):
        raise ConfigError(f"engine must be 'abm' or 'meanfield', got {cfg.engine!r}")
    if cfg.engine == "abm" and cfg.seed is None:
        raise ConfigError("engine=abm requires a seed ([run] seed or --seed)")
    return cfg


def _initial_demand(scn_sec, network, params, resolve, inputs) -> np.ndarray:
    source = _get(scn_sec, "initial_demand", str, "uniform")
    if source == "uniform":
        return np.full(network.n, params.labor_force / network.n)
    demand_file = resolve(source)
    inputs["initial_demand"] = demand_file
    return read_demand_vector(demand_file, network.labels)


def _load_scores(scn_sec, network, resolve, inputs) -> ScoreVector | None:
    if "scores" in scn_sec:
        score_file = resolve(scn_sec["scores"])
        inputs["scores"] = score_file
        return read_mapped_scores(score_file, network.labels)
    if "scores_raw" in scn_sec:
        if "crosswalk" not in scn_sec:
            raise ConfigError("scores_raw requires a crosswalk file")
        raw_file = resolve(scn_sec["scores_raw"])
        walk_file = resolve(scn_sec["crosswalk"])
        inputs["scores_raw"] = raw_file
        inputs["crosswalk"] = walk_file
        return map_scores(read_raw_scores(raw_file), read_crosswalk(walk_file), network.labels)
    return None


def _build_path(scn_sec, network, params, d0, scores) -> DemandPath:
    kind = _get(scn_sec, "type", str, "constant")
    if kind == "constant":
        return ConstantPath(d0=d0)
    if kind == "sine":
        return sine_path(
            d0,
            _get(scn_sec, "amplitude", float, required=True),
            _get(scn_sec, "period_years", float, required=True),
            params.steps_per_year,
            phase_years=_get(scn_sec, "phase_years", float, 0.0),
        )
    if kind == "sigmoid":
        if scores is None:
            raise ConfigError("sigmoid scenario needs 'scores' (or scores_raw + crosswalk)")
        start_year = _get(scn_sec, "start_year", float, 0.0)
        midpoint_after = _get(scn_sec, "midpoint_years_after_start", float, 15.0)
        spec = ShockSpec(
            start_step=start_year * params.steps_per_year,
            midpoint_step=(start_year + midpoint_after) * params.steps_per_year,
            steepness_per_year=_get(scn_sec, "steepness_per_year", float, 0.79),
            steps_per_year=params.steps_per_year,
            aggregate_scale=_get(scn_sec, "aggregate_scale", float, 1.0),
            scores=scores,
        )
        path = automation_shock_path(d0, scores, params.labor_force, spec)
        extra = _get(scn_sec, "scale_aggregate", float)
        if extra is not None:
            path = scale_aggregate(path, extra)
        return path
    raise ConfigError(f"unknown scenario type {kind!r}")


def _parse_grid(grid_sec) -> GridSpec:
    def axis(key):
        raw = _get(grid_sec, key, str, required=True)
        parts = [p.strip() for p in raw.split(",")]
        if len(parts) != 3:
            raise ConfigError(f"grid axis '{key}' must be 'min,max,count'")
        try:
            return (float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError:
            raise ConfigError(f"grid axis '{key}' has invalid value {raw!r}") from None

    return GridSpec(a=axis("a"), delta_u=axis("delta_u"),
                    delta_v=axis("delta_v"), dt_weeks=axis("dt_weeks"))
