"""Occupational mobility network: construction, validation, score mapping, I/O.

The network is a row-stochastic adjacency over n occupations.  Off-diagonal
weights are empirical transition probabilities scaled by (1 - r); every
diagonal entry is the uniform self-loop weight r, the probability that a
worker changing jobs applies within her current occupation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    IsolatedOccupationError,
    ScoreOutOfRangeError,
    UnmappedOccupationError,
)

ROW_SUM_TOL = 1e-12


def _check_labels(labels: Sequence[str], n: int) -> tuple[str, ...]:
    labels = tuple(str(x) for x in labels)
    if len(labels) != n:
        raise DimensionMismatchError(f"{len(labels)} labels for {n} occupations")
    if len(set(labels)) != n:
        raise DimensionMismatchError("occupation labels must be unique")
    return labels


@dataclass(frozen=True)
class TransitionCounts:
    """Observed worker moves: counts[i, j] workers seen transitioning i -> j."""

    counts: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise DimensionMismatchError(f"counts must be square, got {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("transition counts must be non-negative")
        object.__setattr__(self, "counts", counts.astype(np.int64, copy=True))
        object.__setattr__(self, "labels", _check_labels(self.labels, counts.shape[0]))
        self.counts.setflags(write=False)

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    def isolated_rows(self) -> list[int]:
        """Indices whose off-diagonal total is zero (no observed way out)."""
        off = self.counts.copy()
        np.fill_diagonal(off, 0)
        return list(np.flatnonzero(off.sum(axis=1) == 0))


@dataclass(frozen=True)
class Network:
    """Row-stochastic adjacency with a uniform self-loop weight."""

    adjacency: np.ndarray
    self_loop: float
    labels: tuple[str, ...]

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatchError(f"adjacency must be square, got {a.shape}")
        n = a.shape[0]
        object.__setattr__(self, "adjacency", a.copy())
        object.__setattr__(self, "labels", _check_labels(self.labels, n))
        if not 0.0 <= self.self_loop <= 1.0:
            raise ValueError(f"self-loop weight {self.self_loop} outside [0, 1]")
        if np.any(self.adjacency < -1e-15) or np.any(self.adjacency > 1 + 1e-12):
            raise ValueError("adjacency entries must be probabilities")
        if not np.allclose(np.diag(self.adjacency), self.self_loop, rtol=0, atol=1e-12):
            raise ValueError("diagonal entries must all equal the self-loop weight")
        rows = self.adjacency.sum(axis=1)
        bad = np.flatnonzero(np.abs(rows - 1.0) > ROW_SUM_TOL)
        if bad.size:
            raise ValueError(f"rows {bad.tolist()} do not sum to 1 (max err {np.abs(rows - 1).max():.2e})")
        self.adjacency.setflags(write=False)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown occupation label {label!r}") from None


@dataclass(frozen=True)
class ScoreVector:
    """Automation levels in [0, 1], aligned to network labels."""

    values: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).copy()
        if values.ndim != 1:
            raise DimensionMismatchError("scores must be a flat vector")
        if np.any(values < 0) or np.any(values > 1):
            raise ScoreOutOfRangeError("scores must lie in [0, 1]")
        object.__setattr__(self, "values", values)
        if self.labels:
            object.__setattr__(self, "labels", _check_labels(self.labels, values.size))
        values.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.size


def build_network(t: TransitionCounts, self_loop: float) -> Network:
    """Row-normalize off-diagonal counts, then rescale by (1 - r) and set A_ii = r.

    Diagonal counts are ignored: within-occupation persistence is replaced
    wholesale by the constant self-loop weight.  Rows without any positive
    off-diagonal count are a hard error, since silently absorbing them would
    distort flows invisibly.
    """
    if not 0.0 <= self_loop <= 1.0:
        raise ValueError(f"self-loop weight {self_loop} outside [0, 1]")
    isolated = t.isolated_rows()
    if isolated:
        raise IsolatedOccupationError(isolated, [t.labels[i] for i in isolated])
    off = t.counts.astype(np.float64)
    np.fill_diagonal(off, 0.0)
    p = off / off.sum(axis=1, keepdims=True)
    a = (1.0 - self_loop) * p
    np.fill_diagonal(a, self_loop)
    return Network(adjacency=a, self_loop=self_loop, labels=t.labels)


def complete_network(n: int, labels: Sequence[str] | None = None) -> Network:
    """Frictionless benchmark: every entry (diagonal included) equals 1/n."""
    if n < 1:
        raise ValueError("need at least one occupation")
    if labels is None:
        labels = default_labels(n)
    return Network(adjacency=np.full((n, n), 1.0 / n), self_loop=1.0 / n, labels=labels)


def default_labels(n: int) -> tuple[str, ...]:
    width = max(3, len(str(n - 1)))
    return tuple(f"occ{i:0{width}d}" for i in range(n))


def map_scores(
    raw: Iterable[tuple],
    crosswalk: Iterable[tuple[str, str]],
    labels: Sequence[str],
) -> ScoreVector:
    """Aggregate source-classification scores onto network occupations.

    ``raw`` holds (source_label, score) or (source_label, score, weight)
    records; ``crosswalk`` maps source labels to network labels.  Each
    occupation receives the weight-weighted mean of all source scores mapped
    to it (unweighted mean when weights are omitted).  Occupations that end
    up with no mapped source are reported as an error.
    """
    labels = tuple(str(x) for x in labels)
    label_set = set(labels)
    scores: dict[str, tuple[float, float]] = {}
    for record in raw:
        if len(record) == 2:
            src, score = record
            weight = 1.0
        else:
            src, score, weight = record
        score = float(score)
        weight = float(weight)
        if not 0.0 <= score <= 1.0:
            raise ScoreOutOfRangeError(f"score {score} for source {src!r} outside [0, 1]")
        if weight < 0:
            raise ValueError(f"negative weight {weight} for source {src!r}")
        scores[str(src)] = (score, weight)

    num = {lab: 0.0 for lab in labels}
    den = {lab: 0.0 for lab in labels}
    for src, target in crosswalk:
        src, target = str(src), str(target)
        if target not in label_set:
            raise KeyError(f"crosswalk target {target!r} is not a network occupation")
        if src not in scores:
            continue
        score, weight = scores[src]
        num[target] += weight * score
        den[target] += weight

    missing = [lab for lab in labels if den[lab] == 0.0]
    if missing:
        raise UnmappedOccupationError(missing)
    values = np.array([num[lab] / den[lab] for lab in labels])
    return ScoreVector(values=values, labels=labels)


# --- CSV interfaces -------------------------------------------------------

def read_transition_counts(path) -> TransitionCounts:
    """Load a `source,target,count` CSV; labels in order of first appearance."""
    order: list[str] = []
    seen: dict[str, int] = {}
    rows: list[tuple[str, str, int]] = []

    def intern(label: str) -> int:
        if label not in seen:
            seen[label] = len(order)
            order.append(label)
        return seen[label]

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:3]] != ["source", "target", "count"]:
            raise ValueError(f"{path}: expected header 'source,target,count'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 3:
                raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                count = int(row[2])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: count {row[2]!r} is not an integer") from None
            if count < 0:
                raise ValueError(f"{path}:{lineno}: negative count {count}")
            rows.append((row[0].strip(), row[1].strip(), count))

    for src, dst, _ in rows:
        intern(src)
        intern(dst)
    n = len(order)
    counts = np.zeros((n, n), dtype=np.int64)
    for src, dst, count in rows:
        counts[seen[src], seen[dst]] += count
    return TransitionCounts(counts=counts, labels=tuple(order))


def write_network(net: Network, path) -> None:
    """Edge-list CSV with the self-loop weight as a metadata record.

    Weights are written with 17 significant digits so a load reproduces the
    adjacency bit-exactly.  Diagonal entries are written for every node so
    node order survives the round trip even for nodes without out-edges.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# laborflow-network self_loop={net.self_loop:.17g} n={net.n}\n")
        writer = csv.writer(fh)
        writer.writerow(["source", "target", "weight"])
        a = net.adjacency
        for i, src in enumerate(net.labels):
            writer.writerow([src, src, f"{a[i, i]:.17g}"])
            for j in np.flatnonzero(a[i]):
                if j != i:
                    writer.writerow([src, net.labels[j], f"{a[i, j]:.17g}"])


def read_network(path) -> Network:
    with open(path, newline="", encoding="utf-8") as fh:
        meta = fh.readline()
        if not meta.startswith("# laborflow-network"):
            raise ValueError(f"{path}: missing network metadata record")
        fields = dict(part.split("=", 1) for part in meta[1:].split() if "=" in part)
        try:
            self_loop = float(fields["self_loop"])
            n = int(fields["n"])
        except (KeyError, ValueError):
            raise ValueError(f"{path}: malformed metadata record {meta!r}") from None
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:3]] != ["source", "target", "weight"]:
            raise ValueError(f"{path}: expected header 'source,target,weight'")
        order: list[str] = []
        index: dict[str, int] = {}
        edges: list[tuple[str, str, float]] = []
        for lineno, row in enumerate(reader, start=3):
            if not row:
                continue
            if len(row) < 3:
                raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            src, dst, w = row[0], row[1], float(row[2])
            if src == dst and src not in index:
                index[src] = len(order)
                order.append(src)
            edges.append((src, dst, w))
    if len(order) != n:
        raise ValueError(f"{path}: metadata says n={n} but found {len(order)} diagonal records")
    a = np.zeros((n, n))
    for src, dst, w in edges:
        try:
            a[index[src], index[dst]] = w
        except KeyError as exc:
            raise ValueError(f"{path}: edge references unknown node {exc}") from None
    return Network(adjacency=a, self_loop=self_loop, labels=tuple(order))


def read_raw_scores(path) -> list[tuple[str, float, float]]:
    """Load `source_label,score[,weight]` records (weight defaults to 1)."""
    out: list[tuple[str, float, float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0].strip().lower() != "source_label":
            raise ValueError(f"{path}: expected header starting with 'source_label'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                weight = float(row[2]) if len(row) > 2 and row[2].strip() else 1.0
                out.append((row[0].strip(), float(row[1]), weight))
            except (IndexError, ValueError):
                raise ValueError(f"{path}:{lineno}: malformed score record {row}") from None
    return out


def read_crosswalk(path) -> list[tuple[str, str]]:
    """Load `source_label,target_label` records."""
    out: list[tuple[str, str]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0].strip().lower() != "source_label":
            raise ValueError(f"{path}: expected header starting with 'source_label'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected 2 fields")
            out.append((row[0].strip(), row[1].strip()))
    return out


def read_mapped_scores(path, labels: Sequence[str]) -> ScoreVector:
    """Load already-aligned `occupation,score` records for the given labels."""
    values: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0].strip().lower() not in ("occupation", "label"):
            raise ValueError(f"{path}: expected header 'occupation,score'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                values[row[0].strip()] = float(row[1])
            except (IndexError, ValueError):
                raise ValueError(f"{path}:{lineno}: malformed score record {row}") from None
    missing = [lab for lab in labels if lab not in values]
    if missing:
        raise UnmappedOccupationError(missing)
    return ScoreVector(values=np.array([values[lab] for lab in labels]), labels=tuple(labels))
