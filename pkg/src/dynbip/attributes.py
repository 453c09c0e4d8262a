"""Edge attributes: split a reference table by class, fit a synthesizer, map rows to edges.

The synthesizer pairs empirical marginals with a Gaussian copula over the
numeric columns. Any object with the same ``fit``/``sample`` signature can
stand in for it (see :class:`Synthesizer`).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from scipy.special import ndtr
from scipy.stats import rankdata

from . import _random
from .graph import NO_ATTR, DynamicBipartiteGraph, Snapshot

log = logging.getLogger(__name__)

QUANTILE_KNOTS = 1000
EIGEN_FLOOR = 1e-9

ANOMALOUS_NAMES = {"1", "true", "anomalous", "anomaly", "abnormal", "attack", "fraud", "malicious"}
NORMAL_NAMES = {"0", "false", "normal", "benign", "legit", "legitimate"}


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # "numeric" | "categorical"


@dataclass
class TabularDataset:
    columns: list
    data: dict
    label_column: str | None = None

    def __post_init__(self):
        lengths = {len(self.data[c.name]) for c in self.columns}
        if len(lengths) > 1:
            raise ValueError("columns have different lengths")
        for c in self.columns:
            if c.kind == "numeric":
                col = np.asarray(self.data[c.name], dtype=float)
                if not np.all(np.isfinite(col)):
                    raise ValueError(f"numeric column {c.name!r} has non-finite values")
                self.data[c.name] = col
            elif c.kind == "categorical":
                self.data[c.name] = np.asarray(self.data[c.name], dtype=object)
            else:
                raise ValueError(f"unknown column kind {c.kind!r}")

    @property
    def n_rows(self):
        return len(self.data[self.columns[0].name]) if self.columns else 0

    def __len__(self):
        return self.n_rows

    @property
    def schema(self):
        return tuple(self.columns)

    @property
    def rows(self):
        cols = [self.data[c.name] for c in self.columns]
        return [tuple(c[i] for c in cols) for i in range(self.n_rows)]

    def take(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return TabularDataset(list(self.columns),
                              {c.name: self.data[c.name][idx] for c in self.columns},
                              self.label_column)

    def drop(self, name):
        cols = [c for c in self.columns if c.name != name]
        return TabularDataset(cols, {c.name: self.data[c.name] for c in cols})

    @classmethod
    def concat(cls, parts):
        first = parts[0]
        for p in parts[1:]:
            if p.schema != first.schema:
                raise ValueError("cannot concatenate tables with different schemas")
        return cls(list(first.columns),
                   {c.name: np.concatenate([p.data[c.name] for p in parts])
                    for c in first.columns})


def _is_number(text):
    try:
        return math.isfinite(float(text))
    except ValueError:
        return False


def read_table(path, label_column=None) -> TabularDataset:
    """Read a headed CSV; a column is numeric iff every non-empty cell is a finite number.

    Rows with empty cells are dropped with a warning.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            rows.append([cell.strip() for cell in row])
    if label_column is not None and label_column not in header:
        raise ValueError(f"{path}: label column {label_column!r} not in header")
    complete = [r for r in rows if all(r)]
    if len(complete) < len(rows):
        log.warning("%s: dropped %d incomplete rows", path, len(rows) - len(complete))
    columns, data = [], {}
    for j, name in enumerate(header):
        cells = [r[j] for r in complete]
        numeric = name != label_column and all(_is_number(c) for c in cells)
        columns.append(Column(name, "numeric" if numeric else "categorical"))
        data[name] = [float(c) for c in cells] if numeric else cells
    return TabularDataset(columns, data, label_column)


def write_table(data: TabularDataset, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([c.name for c in data.columns])
        for row in data.rows:
            w.writerow([format_value(x) for x in row])


def format_value(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


# -- class split -----------------------------------------------------------

def kmeans2(x, seed, iters=300):
    """Lloyd's algorithm with k=2 and k-means++ seeding. Returns labels in {0, 1}."""
    gen = _random.rng(seed, _random.KMEANS)
    n = len(x)
    first = x[gen.integers(n)]
    d2 = ((x - first) ** 2).sum(axis=1)
    if d2.sum() == 0:
        raise ValueError("all rows identical; cannot split into two clusters")
    second = x[gen.choice(n, p=d2 / d2.sum())]
    centres = np.stack([first, second])
    labels = np.full(n, -1)
    for _ in range(iters):
        dist = ((x[:, None, :] - centres[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(dist, axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
        for k in range(2):
            if np.any(labels == k):
                centres[k] = x[labels == k].mean(axis=0)
    return labels


def split_by_label(data: TabularDataset, seed=0):
    """Split into ``(normal, anomalous)``.

    With a label column of two values, recognised names such as
    ``anomalous``/``normal`` or ``1``/``0`` decide the classes, otherwise the
    minority class is anomalous. Without a label column the rows are
    clustered with 2-means on standardised numeric columns and the smaller
    cluster is anomalous. The label column is dropped from both parts.
    """
    if data.n_rows < 4:
        raise ValueError("need at least 4 rows to split")
    if data.label_column is not None:
        labels = np.asarray(data.data[data.label_column]).astype(str)
        values = sorted(set(labels.tolist()))
        if len(values) != 2:
            raise ValueError(f"label column must have exactly 2 values, found {len(values)}")
        low = [v.lower() for v in values]
        if low[0] in ANOMALOUS_NAMES and low[1] in NORMAL_NAMES:
            anomalous_value = values[0]
        elif low[1] in ANOMALOUS_NAMES and low[0] in NORMAL_NAMES:
            anomalous_value = values[1]
        else:
            counts = [np.count_nonzero(labels == v) for v in values]
            anomalous_value = values[1] if counts[1] <= counts[0] else values[0]
        mask = labels == anomalous_value
        rest = data.drop(data.label_column)
    else:
        num = [c.name for c in data.columns if c.kind == "numeric"]
        if not num:
            raise ValueError("no numeric columns to cluster on")
        x = np.column_stack([data.data[n] for n in num])
        if np.all(x == x[0]):
            raise ValueError("all rows identical; cannot split into two clusters")
        sd = x.std(axis=0)
        x = (x - x.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
        labels = kmeans2(x, seed)
        sizes = np.bincount(labels, minlength=2)
        minority = 1 if sizes[1] <= sizes[0] else 0
        mask = labels == minority
        rest = data
    return rest.take(np.flatnonzero(~mask)), rest.take(np.flatnonzero(mask))


# -- synthesizer -----------------------------------------------------------

class Synthesizer(Protocol):
    """Fit/sample interface shared by attribute models."""

    def sample(self, n: int, seed: int) -> TabularDataset: ...


@dataclass
class AttributeModel:
    columns: list
    quantiles: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    categories: dict = field(default_factory=dict)
    copula_columns: list = field(default_factory=list)
    correlation: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    n_rows: int = 0

    @property
    def schema(self):
        return tuple(self.columns)

    def sample(self, n, seed):
        return sample(self, n, seed)


def _nearest_correlation(r):
    r = (r + r.T) / 2
    vals, vecs = np.linalg.eigh(r)
    vals = np.clip(vals, EIGEN_FLOOR, None)
    r = (vecs * vals) @ vecs.T
    d = np.sqrt(np.diag(r))
    r = r / np.outer(d, d)
    r = (r + r.T) / 2
    np.fill_diagonal(r, 1.0)
    return r


def fit(data: TabularDataset, seed=0) -> AttributeModel:
    """Fit marginals and a Spearman-based Gaussian copula.

    Constant numeric columns are stored as constants and kept out of the copula.
    """
    del seed  # the fit is deterministic
    if data.n_rows < 4:
        raise ValueError("need at least 4 rows to fit")
    model = AttributeModel(list(data.columns), n_rows=data.n_rows)
    probs = np.linspace(0.0, 1.0, QUANTILE_KNOTS)
    for c in data.columns:
        col = data.data[c.name]
        if c.kind == "numeric":
            if np.all(col == col[0]):
                model.constants[c.name] = float(col[0])
            else:
                model.quantiles[c.name] = np.quantile(col, probs)
                model.copula_columns.append(c.name)
        else:
            cats, counts = np.unique(col.astype(str), return_counts=True)
            model.categories[c.name] = (list(cats), counts / counts.sum())
    k = len(model.copula_columns)
    if k == 1:
        model.correlation = np.eye(1)
    elif k > 1:
        ranks = np.column_stack([rankdata(data.data[n]) for n in model.copula_columns])
        rho_s = np.corrcoef(ranks, rowvar=False)
        model.correlation = _nearest_correlation(2.0 * np.sin(np.pi * rho_s / 6.0))
    return model


def sample(model: AttributeModel, n, seed) -> TabularDataset:
    """Draw ``n`` rows: copula normals, then uniforms, then inverse empirical quantiles."""
    n = int(n)
    if n < 0:
        raise ValueError("n must be non-negative")
    gen = _random.rng(seed, _random.ATTRS)
    out = {}
    k = len(model.copula_columns)
    if k:
        vals, vecs = np.linalg.eigh(model.correlation)
        root = vecs * np.sqrt(np.clip(vals, 0, None))
        u = ndtr(gen.standard_normal((n, k)) @ root.T)
        probs = np.linspace(0.0, 1.0, QUANTILE_KNOTS)
        for j, name in enumerate(model.copula_columns):
            out[name] = np.interp(u[:, j], probs, model.quantiles[name])
    for name, value in model.constants.items():
        out[name] = np.full(n, value)
    for c in model.columns:
        if c.kind != "numeric":
            cats, p = model.categories[c.name]
            idx = gen.choice(len(cats), size=n, p=p)
            out[c.name] = np.asarray(cats, dtype=object)[idx]
    return TabularDataset(list(model.columns), out)


# -- mapping ---------------------------------------------------------------

@dataclass
class MappedAttributes:
    graph: DynamicBipartiteGraph
    table: TabularDataset
    # per table row: True when drawn from the anomalous model
    from_anomalous: np.ndarray


def map_attributes(graph, ledger, model_normal, model_anomalous, seed) -> MappedAttributes:
    """Give every edge its own freshly sampled attribute row.

    Normal edges take rows from ``model_normal`` and anomalous edges from
    ``model_anomalous``, in (snapshot, position) order. Normal rows come first
    in the returned table. ``ledger=None`` uses the graph's labels.
    """
    if model_normal.schema != model_anomalous.schema:
        raise ValueError("normal and anomalous models have different schemas")
    if ledger is None:
        masks = [s.anomalous.copy() for s in graph.snapshots]
    else:
        masks = [np.zeros(len(s), bool) for s in graph.snapshots]
        for t, i in ledger.anomalous_edges:
            masks[t][i] = True
    flat = np.concatenate(masks) if masks else np.zeros(0, bool)
    n_anom = int(flat.sum())
    n_norm = len(flat) - n_anom
    normal = model_normal.sample(n_norm, seed)
    anomalous = model_anomalous.sample(n_anom, _random.rng(seed, 1).integers(2**63))
    table = TabularDataset.concat([normal, anomalous])
    rows = np.empty(len(flat), dtype=np.int64)
    rows[~flat] = np.arange(n_norm)
    rows[flat] = n_norm + np.arange(n_anom)
    bounds = np.cumsum([0] + [len(s) for s in graph.snapshots])
    snaps = tuple(Snapshot.build(s.t, s.u, s.v, s.anomalous, rows[bounds[k]:bounds[k + 1]])
                  for k, s in enumerate(graph.snapshots))
    mapped = DynamicBipartiteGraph(graph.T, graph.size_u, graph.size_v, snaps)
    provenance = np.r_[np.zeros(n_norm, bool), np.ones(n_anom, bool)]
    return MappedAttributes(mapped, table, provenance)


def edge_attributes(graph, table: TabularDataset) -> TabularDataset:
    """Attribute rows in edge order; every edge must carry a row."""
    rows = graph.columns()[4]
    if np.any(rows == NO_ATTR):
        raise ValueError("some edges have no attribute row")
    return table.take(rows)
