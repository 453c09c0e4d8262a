"""Graph statistics and MMD scores between a generated and a reference graph."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import _random, kernels
from .graph import DynamicBipartiteGraph, Side, Snapshot, anomaly_subgraph, degrees

MEDIAN_POINTS = 3000
ATTRIBUTE_BINS = 100


@dataclass(frozen=True)
class ScalarSample:
    values: np.ndarray
    descriptor: str
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise ValueError(f"{self.descriptor}: sample values must be finite")
        object.__setattr__(self, "values", v)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float).reshape(-1)
            if w.shape != v.shape or np.any(w < 0):
                raise ValueError("weights must be non-negative, one per value")
            object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.values)

    def distribution(self):
        """``(support, probability)`` of the empirical law."""
        support, inv = np.unique(self.values, return_inverse=True)
        w = np.ones(len(self.values)) if self.weights is None else self.weights
        mass = np.bincount(inv, weights=w, minlength=len(support))
        return support, mass / mass.sum()


def _as_sample(x, name="sample"):
    return x if isinstance(x, ScalarSample) else ScalarSample(x, name)


# -- graph statistics ------------------------------------------------------

def degree_distribution(graph: DynamicBipartiteGraph, side) -> ScalarSample:
    """Aggregate degree of every declared node on ``side``, isolated ones included."""
    side = Side(side)
    return ScalarSample(degrees(graph, side).astype(float), f"degree_{side.value.lower()}")


def time_distributions(graph: DynamicBipartiteGraph):
    """Edge-time sample plus U and V node-time samples.

    The edge sample holds each edge's snapshot index. Node samples hold one
    value per (active node, snapshot) pair.
    """
    ts = np.arange(graph.T, dtype=float)
    edge = np.repeat(ts, graph.edge_counts())
    n_u = [len(s.active_u) for s in graph.snapshots]
    n_v = [len(s.active_v) for s in graph.snapshots]
    return (ScalarSample(edge, "edge_time"),
            ScalarSample(np.repeat(ts, n_u), "node_time_u"),
            ScalarSample(np.repeat(ts, n_v), "node_time_v"))


def time_histogram(sample: ScalarSample, T):
    counts = np.bincount(sample.values.astype(np.int64), minlength=T).astype(float)
    total = counts.sum()
    return counts / total if total else counts


def _csr(graph):
    """Deduplicated, time-collapsed adjacency as CSR arrays for both sides."""
    _, u, v, _, _ = graph.columns()
    key = np.unique(u * graph.size_v + v)
    u, v = key // graph.size_v, key % graph.size_v
    ptr_u = np.zeros(graph.size_u + 1, dtype=np.int64)
    np.cumsum(np.bincount(u, minlength=graph.size_u), out=ptr_u[1:])
    order = np.lexsort((u, v))
    ptr_v = np.zeros(graph.size_v + 1, dtype=np.int64)
    np.cumsum(np.bincount(v, minlength=graph.size_v), out=ptr_v[1:])
    return (ptr_u, np.ascontiguousarray(v, dtype=np.int64),
            ptr_v, np.ascontiguousarray(u[order], dtype=np.int64))


def bcc(graph: DynamicBipartiteGraph, side, backend=None) -> ScalarSample:
    """Bipartite clustering coefficient of every non-isolated node on ``side``.

    ``c_u`` is the mean Jaccard similarity between ``N(u)`` and ``N(w)`` over
    second-order neighbours ``w``; 0 when there are none.
    """
    side = Side(side)
    ptr_u, idx_u, ptr_v, idx_v = _csr(graph)
    k = kernels.get(backend)
    if side is Side.U:
        vals, ptr = k.bcc_values(ptr_u, idx_u, ptr_v, idx_v), ptr_u
    else:
        vals, ptr = k.bcc_values(ptr_v, idx_v, ptr_u, idx_u), ptr_v
    return ScalarSample(vals[np.diff(ptr) > 0], f"bcc_{side.value.lower()}")


def average_bcc(graph, side, backend=None):
    """Mean BCC over non-isolated nodes, correctly rounded; 0 when there are none."""
    s = bcc(graph, side, backend)
    return math.fsum(s.values) / len(s) if len(s) else 0.0


# -- MMD -------------------------------------------------------------------

def _compress(sample):
    support, p = sample.distribution()
    return support, p


def _weighted_median(values, weights):
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    return float(values[order][np.searchsorted(cum, cum[-1] / 2.0)])


def median_bandwidth(*samples):
    """Median pairwise distance between distinct points of the pooled sample.

    Pairs at distance zero are ignored; 1.0 is returned when every pooled
    value is identical.
    """
    pooled = [(_as_sample(s).values,
               np.ones(len(s)) if _as_sample(s).weights is None else _as_sample(s).weights)
              for s in samples]
    x = np.concatenate([p[0] for p in pooled])
    w = np.concatenate([p[1] for p in pooled])
    support, inv = np.unique(x, return_inverse=True)
    mass = np.bincount(inv, weights=w, minlength=len(support))
    if len(support) > MEDIAN_POINTS:
        cdf = np.cumsum(mass) / mass.sum()
        q = (np.arange(MEDIAN_POINTS) + 0.5) / MEDIAN_POINTS
        support = support[np.searchsorted(cdf, q)]
        support, mass = np.unique(support, return_counts=True)
        mass = mass.astype(float)
    if len(support) < 2:
        return 1.0
    i, j = np.triu_indices(len(support), k=1)
    return _weighted_median(support[j] - support[i], mass[i] * mass[j])


def _mmd2(xa, pa, xb, pb, bandwidth, backend=None):
    # scale first: squaring a tiny bandwidth can underflow to zero
    xa, xb = xa / bandwidth, xb / bandwidth
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(xb))):
        raise ValueError("bandwidth too small for the sample range")
    k = kernels.get(backend).rbf_sum
    return k(xa, pa, xa, pa, 0.5) + k(xb, pb, xb, pb, 0.5) - 2.0 * k(xa, pa, xb, pb, 0.5)


def mmd(a, b, bandwidth=None, backend=None) -> float:
    """Biased squared MMD with a Gaussian RBF kernel, clamped at zero.

    Samples are reduced to their distinct values and probabilities first,
    which leaves the estimator unchanged. ``bandwidth`` defaults to the
    median heuristic over the pooled sample.
    """
    a, b = _as_sample(a, "a"), _as_sample(b, "b")
    if not len(a) or not len(b):
        raise ValueError("mmd needs two non-empty samples")
    if bandwidth is None:
        bandwidth = median_bandwidth(a, b)
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    xa, pa = _compress(a)
    xb, pb = _compress(b)
    # fixed argument order makes mmd(a, b) and mmd(b, a) bit-identical
    if (len(xb), xb.tobytes(), pb.tobytes()) < (len(xa), xa.tobytes(), pa.tobytes()):
        xa, pa, xb, pb = xb, pb, xa, pa
    return max(_mmd2(xa, pa, xb, pb, float(bandwidth), backend), 0.0)


def _scored(a, b, bandwidth):
    bw = median_bandwidth(a, b) if bandwidth is None else bandwidth
    return mmd(a, b, bw), bw


# -- anomaly and attribute similarity --------------------------------------

def _pooled_bcc(graph):
    u, v = bcc(graph, Side.U), bcc(graph, Side.V)
    return ScalarSample(np.concatenate([u.values, v.values]), "bcc_anomaly")


def anomaly_similarity(graph_a, ledger_a, graph_b, ledger_b, bandwidth=None,
                       return_bandwidth=False):
    """MMD between the pooled BCC samples of the two anomaly subgraphs.

    A ``None`` ledger means the graph's own edge labels define the subgraph.
    """
    samples = []
    for g, led in ((graph_a, ledger_a), (graph_b, ledger_b)):
        sub = anomaly_subgraph(g, led)
        if not len(sub):
            raise ValueError("anomaly subgraph is empty")
        samples.append(_pooled_bcc(sub))
    score, bw = _scored(samples[0], samples[1], bandwidth)
    return (score, bw) if return_bandwidth else score


def _binned(col, lo, hi, bins):
    if hi > lo:
        idx = np.floor((col - lo) / (hi - lo) * bins).astype(np.int64)
    else:
        idx = np.zeros(len(col), dtype=np.int64)
    idx = np.clip(idx, 0, bins - 1)
    return np.bincount(idx, minlength=bins).astype(float)


@dataclass
class AttributeScores:
    columns: dict
    mean: Optional[float]
    categorical_tv: dict = field(default_factory=dict)
    bandwidths: dict = field(default_factory=dict)


def attribute_similarity(attrs_a, attrs_b, bins=ATTRIBUTE_BINS, bandwidth=None):
    """Per-column MMD between binned attribute histograms.

    Numeric columns are scaled to [0, 1] with the pooled min and max, bucketed
    into ``bins`` equal bins, and compared as bin centres weighted by
    frequency. Categorical columns get a total-variation distance instead.
    """
    if attrs_a.schema != attrs_b.schema:
        raise ValueError("attribute tables have different schemas")
    if not attrs_a.n_rows or not attrs_b.n_rows:
        raise ValueError("attribute tables must be non-empty")
    centres = (np.arange(bins) + 0.5) / bins
    cols, tv, bws = {}, {}, {}
    for col in attrs_a.columns:
        a, b = attrs_a.data[col.name], attrs_b.data[col.name]
        if col.kind == "numeric":
            lo = min(a.min(), b.min())
            hi = max(a.max(), b.max())
            ha, hb = _binned(a, lo, hi, bins), _binned(b, lo, hi, bins)
            sa = ScalarSample(centres, col.name, ha)
            sb = ScalarSample(centres, col.name, hb)
            cols[col.name], bws[col.name] = _scored(sa, sb, bandwidth)
        else:
            cats = sorted(set(a.tolist()) | set(b.tolist()))
            pa = np.array([np.count_nonzero(a == c) for c in cats]) / len(a)
            pb = np.array([np.count_nonzero(b == c) for c in cats]) / len(b)
            tv[col.name] = float(0.5 * np.abs(pa - pb).sum())
    mean = float(np.mean(list(cols.values()))) if cols else None
    return AttributeScores(cols, mean, tv, bws)


# -- baseline --------------------------------------------------------------

def er_baseline(size_u, size_v, total_edges, T, seed) -> DynamicBipartiteGraph:
    """Uniform bipartite multigraph: endpoints and timestamps drawn uniformly."""
    if size_u < 1 or size_v < 1 or T < 1:
        raise ValueError("sizes and T must be >= 1")
    gen = _random.rng(seed, _random.BASELINE)
    u = gen.integers(0, size_u, total_edges)
    v = gen.integers(0, size_v, total_edges)
    t = gen.integers(0, T, total_edges)
    order = np.argsort(t, kind="stable")
    u, v, t = u[order], v[order], t[order]
    bounds = np.searchsorted(t, np.arange(T + 1))
    snaps = tuple(Snapshot.build(k, u[bounds[k]:bounds[k + 1]], v[bounds[k]:bounds[k + 1]])
                  for k in range(T))
    return DynamicBipartiteGraph(T, size_u, size_v, snaps)


# -- report ----------------------------------------------------------------

@dataclass
class EvalReport:
    degree_mmd: float
    degree_mmd_u: float
    degree_mmd_v: float
    bcc_mmd: float
    bcc_mmd_u: float
    bcc_mmd_v: float
    time_mmd: dict
    anomaly_mmd: Optional[float] = None
    attribute_mmd: Optional[dict] = None
    bandwidths: dict = field(default_factory=dict)

    def scores(self):
        """Flat ``name -> score`` view of every reported number."""
        out = {k: getattr(self, k) for k in ("degree_mmd", "degree_mmd_u", "degree_mmd_v",
                                              "bcc_mmd", "bcc_mmd_u", "bcc_mmd_v")}
        out.update({f"time_mmd.{k}": v for k, v in self.time_mmd.items()})
        if self.anomaly_mmd is not None:
            out["anomaly_mmd"] = self.anomaly_mmd
        if self.attribute_mmd:
            out.update({f"attribute_mmd.{k}": v for k, v in self.attribute_mmd["columns"].items()})
            if self.attribute_mmd["mean"] is not None:
                out["attribute_mmd.mean"] = self.attribute_mmd["mean"]
        return out

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def evaluate(graph_a, ledger_a, attrs_a, graph_b, ledger_b, attrs_b, bandwidth=None):
    """Score ``graph_b`` against ``graph_a`` on every available statistic.

    Anomaly similarity is skipped (``None``) when either graph has no
    anomalous edges; attribute similarity when either table is ``None``.
    """
    bws = {}

    def score(name, a, b):
        s, bws[name] = _scored(a, b, bandwidth)
        return s

    du = score("degree_u", degree_distribution(graph_a, Side.U), degree_distribution(graph_b, Side.U))
    dv = score("degree_v", degree_distribution(graph_a, Side.V), degree_distribution(graph_b, Side.V))
    bu = score("bcc_u", bcc(graph_a, Side.U), bcc(graph_b, Side.U))
    bv = score("bcc_v", bcc(graph_a, Side.V), bcc(graph_b, Side.V))
    ta, tb = time_distributions(graph_a), time_distributions(graph_b)
    time = {name: score(f"time_{name}", x, y)
            for name, x, y in zip(("edge", "node_u", "node_v"), ta, tb)}
    time["mean"] = float(np.mean(list(time.values())))

    anomaly = None
    has_a = len(anomaly_subgraph(graph_a, ledger_a)) > 0
    has_b = len(anomaly_subgraph(graph_b, ledger_b)) > 0
    if has_a and has_b:
        anomaly, bws["anomaly"] = anomaly_similarity(graph_a, ledger_a, graph_b, ledger_b,
                                                     bandwidth, return_bandwidth=True)
    attrs = None
    if attrs_a is not None and attrs_b is not None:
        sc = attribute_similarity(attrs_a, attrs_b, bandwidth=bandwidth)
        attrs = {"columns": sc.columns, "mean": sc.mean, "categorical_tv": sc.categorical_tv}
        bws.update({f"attribute_{k}": v for k, v in sc.bandwidths.items()})

    return EvalReport(
        degree_mmd=(du + dv) / 2, degree_mmd_u=du, degree_mmd_v=dv,
        bcc_mmd=(bu + bv) / 2, bcc_mmd_u=bu, bcc_mmd_v=bv,
        time_mmd=time, anomaly_mmd=anomaly, attribute_mmd=attrs, bandwidths=bws)
