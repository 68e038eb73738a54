"""CSV emission with provenance headers.

Every output file starts with `#`-prefixed metadata lines carrying enough
information (parameters, seed, input-file hashes, package version) to re-run
the command that produced it.
"""

from __future__ import annotations

import csv
import hashlib
from typing import Mapping, Sequence

import numpy as np

from ._version import __version__
from .meanfield import SteadyState
from .params import ModelParams
from .state import SimulationSeries


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()[:16]


def params_metadata(params: ModelParams) -> dict:
    return {
        "delta_u": params.delta_u,
        "delta_v": params.delta_v,
        "gamma_u": params.gamma_u,
        "gamma_v": params.gamma_v,
        "dt_weeks": params.dt_weeks,
        "tau_steps": params.tau_steps,
        "labor_force": params.labor_force,
    }


def write_metadata(fh, meta: Mapping) -> None:
    fh.write(f"# laborflow {__version__}\n")
    for key, value in meta.items():
        fh.write(f"# {key}={value}\n")


def write_series_csv(
    series: SimulationSeries, path, per_occupation: bool = False, meta: Mapping | None = None
) -> None:
    """Aggregate time series `t,U,V,E,U_lt`, optionally per-occupation columns."""
    merged = dict(meta or {})
    merged.setdefault("engine", series.engine)
    if series.seed is not None:
        merged.setdefault("seed", series.seed)
    merged.update({f"param_{k}": v for k, v in params_metadata(series.params).items()})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_metadata(fh, merged)
        writer = csv.writer(fh)
        header = ["t", "U", "V", "E", "U_lt"]
        if per_occupation:
            for lab in series.labels:
                header += [f"e_{lab}", f"u_{lab}", f"v_{lab}"]
        writer.writerow(header)
        U, V, E, U_lt = series.U, series.V, series.E, series.U_lt
        for t in range(series.steps + 1):
            row = [t, _fmt(U[t]), _fmt(V[t]), _fmt(E[t]), _fmt(U_lt[t])]
            if per_occupation:
                for j in range(series.n):
                    row += [
                        _fmt(series.employed[t, j]),
                        _fmt(series.unemployed[t, j]),
                        _fmt(series.vacancies[t, j]),
                    ]
            writer.writerow(row)


def write_steady_csv(
    steady: SteadyState, labels: Sequence[str], path, meta: Mapping | None = None
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_metadata(fh, dict(meta or {}))
        writer = csv.writer(fh)
        writer.writerow(["occupation", "e", "u", "v", "d_star"])
        d_star = steady.d_star
        for j, lab in enumerate(labels):
            writer.writerow([
                lab,
                _fmt(steady.e_star[j]),
                _fmt(steady.u_star[j]),
                _fmt(steady.v_star[j]),
                _fmt(d_star[j]),
            ])


def write_calibration_csv(table, path, meta: Mapping | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_metadata(fh, dict(meta or {}))
        writer = csv.writer(fh)
        writer.writerow(["a", "delta_u", "delta_v", "dt_weeks", "iou"])
        for a, du, dv, dt, iou in table:
            writer.writerow([_fmt(a), _fmt(du), _fmt(dv), _fmt(dt), _fmt(iou)])


def write_trace_csv(records, labels: Sequence[str], path, meta: Mapping | None = None) -> None:
    """Per-step event trace for debugging: nonzero counts only.

    Schema: t,kind,origin,destination,count with kind one of separation,
    opening, application, hire (origin-only kinds leave destination blank).
    Gzip-compressed when the path ends in .gz.
    """
    import gzip

    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wt", newline="", encoding="utf-8") as fh:
        write_metadata(fh, dict(meta or {}))
        writer = csv.writer(fh)
        writer.writerow(["t", "kind", "origin", "destination", "count"])
        for t, rec in enumerate(records, start=1):
            for kind, vector in (("separation", rec.separations), ("opening", rec.openings)):
                for i in np.flatnonzero(vector):
                    writer.writerow([t, kind, labels[i], "", int(vector[i])])
            for kind, matrix in (("application", rec.applications), ("hire", rec.hires)):
                for i, j in zip(*np.nonzero(matrix)):
                    writer.writerow([t, kind, labels[i], labels[j], int(matrix[i, j])])


def read_series_csv(path) -> dict:
    """Read an aggregate series file back into arrays (metadata included)."""
    meta: dict[str, str] = {}
    rows = []
    header = None
    with open(path, newline="", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    meta[key.strip()] = value.strip()
                continue
            if header is None:
                header = next(csv.reader([line]))
                continue
            rows.append(next(csv.reader([line])))
    if header is None:
        raise ValueError(f"{path}: no header row")
    data = {name: np.array([float(row[k]) for row in rows]) for k, name in enumerate(header)}
    data["_meta"] = meta
    return data


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"
