"""Dynamic bipartite multigraph stored as per-snapshot edge arrays.

Edges inside a snapshot are identified by ``(t, position)``. Positions are
stable: appending edges never moves existing ones.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

NO_ATTR = -1


class Side(str, enum.Enum):
    U = "U"
    V = "V"


class Label(str, enum.Enum):
    NORMAL = "normal"
    ANOMALOUS = "anomalous"


class NodeRef(NamedTuple):
    side: Side
    index: int

    def __str__(self):
        return f"{Side(self.side).value}{self.index}"

    @classmethod
    def parse(cls, text):
        text = text.strip()
        if len(text) < 2 or text[0] not in "UV" or not text[1:].isdigit():
            raise ValueError(f"bad node identifier {text!r}")
        return cls(Side(text[0]), int(text[1:]))


class TimedEdge(NamedTuple):
    u: int
    v: int
    t: int
    label: Label = Label.NORMAL
    attr_row: Optional[int] = None


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True).reshape(-1)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Snapshot:
    t: int
    u: np.ndarray
    v: np.ndarray
    anomalous: np.ndarray
    attr_row: np.ndarray

    @classmethod
    def build(cls, t, u=(), v=(), anomalous=None, attr_row=None):
        u = _frozen(u, np.int64)
        v = _frozen(v, np.int64)
        if len(u) != len(v):
            raise ValueError("u and v must have equal length")
        n = len(u)
        anomalous = _frozen(np.zeros(n, bool) if anomalous is None else anomalous, bool)
        attr_row = _frozen(np.full(n, NO_ATTR) if attr_row is None else attr_row, np.int64)
        if len(anomalous) != n or len(attr_row) != n:
            raise ValueError("edge column lengths differ")
        return cls(int(t), u, v, anomalous, attr_row)

    def __len__(self):
        return len(self.u)

    @property
    def active_u(self):
        return np.unique(self.u)

    @property
    def active_v(self):
        return np.unique(self.v)

    def edges(self):
        for i in range(len(self.u)):
            row = int(self.attr_row[i])
            yield TimedEdge(int(self.u[i]), int(self.v[i]), self.t,
                            Label.ANOMALOUS if self.anomalous[i] else Label.NORMAL,
                            None if row == NO_ATTR else row)

    def canonical(self):
        """Edge records sorted by (u, v, anomalous, attr_row) for multiset comparison."""
        order = np.lexsort((self.attr_row, self.anomalous, self.v, self.u))
        return (self.u[order], self.v[order], self.anomalous[order],
                self.attr_row[order])


@dataclass(frozen=True, eq=False)
class DynamicBipartiteGraph:
    T: int
    size_u: int
    size_v: int
    snapshots: tuple = field(default=())

    def __post_init__(self):
        if self.T < 1 or self.size_u < 1 or self.size_v < 1:
            raise ValueError("T, size_u and size_v must be positive")
        snaps = tuple(self.snapshots) or tuple(Snapshot.build(t) for t in range(self.T))
        if len(snaps) != self.T:
            raise ValueError(f"expected {self.T} snapshots, got {len(snaps)}")
        for k, s in enumerate(snaps):
            if s.t != k:
                raise ValueError(f"snapshot {k} carries t={s.t}")
            if len(s) and (s.u.min() < 0 or s.u.max() >= self.size_u
                           or s.v.min() < 0 or s.v.max() >= self.size_v):
                raise ValueError(f"snapshot {k} has a node index out of range")
        object.__setattr__(self, "snapshots", snaps)

    @classmethod
    def from_edges(cls, T, size_u, size_v, edges):
        """Build from an iterable of :class:`TimedEdge`."""
        cols = [([], [], [], []) for _ in range(T)]
        for e in edges:
            if not 0 <= e.t < T:
                raise ValueError(f"edge timestamp {e.t} outside [0, {T})")
            c = cols[e.t]
            c[0].append(e.u)
            c[1].append(e.v)
            c[2].append(Label(e.label) is Label.ANOMALOUS)
            c[3].append(NO_ATTR if e.attr_row is None else e.attr_row)
        return cls(T, size_u, size_v,
                   tuple(Snapshot.build(t, *c) for t, c in enumerate(cols)))

    def __len__(self):
        return sum(len(s) for s in self.snapshots)

    @property
    def num_edges(self):
        return len(self)

    def edge_counts(self):
        return np.array([len(s) for s in self.snapshots], dtype=np.int64)

    def edges(self):
        for s in self.snapshots:
            yield from s.edges()

    def columns(self):
        """Concatenated ``(t, u, v, anomalous, attr_row)`` arrays in edge order."""
        snaps = self.snapshots
        t = np.repeat(np.arange(self.T, dtype=np.int64), self.edge_counts())
        cat = np.concatenate
        return (t, cat([s.u for s in snaps]), cat([s.v for s in snaps]),
                cat([s.anomalous for s in snaps]), cat([s.attr_row for s in snaps]))

    def side_size(self, side):
        return self.size_u if Side(side) is Side.U else self.size_v

    def replace_snapshot(self, snap):
        snaps = list(self.snapshots)
        snaps[snap.t] = snap
        return DynamicBipartiteGraph(self.T, self.size_u, self.size_v, tuple(snaps))

    def __eq__(self, other):
        if not isinstance(other, DynamicBipartiteGraph):
            return NotImplemented
        if (self.T, self.size_u, self.size_v) != (other.T, other.size_u, other.size_v):
            return False
        for a, b in zip(self.snapshots, other.snapshots):
            if len(a) != len(b):
                return False
            # attr_row is a reference into a table, not edge content
            if not all(np.array_equal(x, y) for x, y in zip(a.canonical()[:3], b.canonical()[:3])):
                return False
        return True

    __hash__ = None

    def __repr__(self):
        return (f"DynamicBipartiteGraph(T={self.T}, size_u={self.size_u}, "
                f"size_v={self.size_v}, edges={len(self)})")


def _check_t(graph, t):
    if not 0 <= t < graph.T:
        raise IndexError(f"snapshot {t} outside [0, {graph.T})")


def degrees(graph, side, t=None):
    """Degree of every declared node on ``side``; parallel edges count."""
    side = Side(side)
    n = graph.side_size(side)
    if t is not None:
        _check_t(graph, t)
        snaps = [graph.snapshots[t]]
    else:
        snaps = graph.snapshots
    out = np.zeros(n, dtype=np.int64)
    for s in snaps:
        out += np.bincount(s.u if side is Side.U else s.v, minlength=n)
    return out


def degree(graph, node: NodeRef, t=None):
    """Degree of one node in snapshot ``t``, or aggregated when ``t`` is None."""
    side = Side(node.side)
    if not 0 <= node.index < graph.side_size(side):
        raise IndexError(f"{node} outside the {side.value} pool")
    if t is not None:
        _check_t(graph, t)
        snaps = [graph.snapshots[t]]
    else:
        snaps = graph.snapshots
    return int(sum(np.count_nonzero((s.u if side is Side.U else s.v) == node.index)
                   for s in snaps))


def append_edges(graph, t, u, v, anomalous=None, attr_row=None):
    """Array form of :func:`merge_snapshot_edges`."""
    _check_t(graph, t)
    s = graph.snapshots[t]
    u = np.asarray(u, dtype=np.int64).reshape(-1)
    if not len(u):
        return graph
    v = np.asarray(v, dtype=np.int64).reshape(-1)
    n = len(u)
    anomalous = np.zeros(n, bool) if anomalous is None else np.broadcast_to(anomalous, n)
    attr_row = np.full(n, NO_ATTR) if attr_row is None else np.broadcast_to(attr_row, n)
    snap = Snapshot.build(t, np.concatenate([s.u, u]), np.concatenate([s.v, v]),
                          np.concatenate([s.anomalous, anomalous]),
                          np.concatenate([s.attr_row, attr_row]))
    return graph.replace_snapshot(snap)


def merge_snapshot_edges(graph, t, edges):
    """Return a new graph with ``edges`` appended to snapshot ``t`` as a multiset."""
    edges = list(edges)
    for e in edges:
        if e.t != t:
            raise ValueError(f"edge {e} carries t={e.t}, expected {t}")
    if not edges:
        _check_t(graph, t)
        return graph
    return append_edges(
        graph, t, [e.u for e in edges], [e.v for e in edges],
        [Label(e.label) is Label.ANOMALOUS for e in edges],
        [NO_ATTR if e.attr_row is None else e.attr_row for e in edges])


def anomaly_subgraph(graph, ledger=None):
    """Subgraph made of the anomalous edges only, timestamps preserved.

    With ``ledger`` the edge identities come from ``ledger.anomalous_edges``;
    otherwise the graph's own labels are used.
    """
    if ledger is None:
        keep = [np.flatnonzero(s.anomalous) for s in graph.snapshots]
    else:
        keep = [[] for _ in range(graph.T)]
        for t, i in ledger.anomalous_edges:
            if not 0 <= t < graph.T or not 0 <= i < len(graph.snapshots[t]):
                raise KeyError(f"ledger references unknown edge ({t}, {i})")
            keep[t].append(i)
        keep = [np.array(sorted(k), dtype=np.int64) for k in keep]
    snaps = tuple(Snapshot.build(s.t, s.u[k], s.v[k], s.anomalous[k], s.attr_row[k])
                  for s, k in zip(graph.snapshots, keep))
    return DynamicBipartiteGraph(graph.T, graph.size_u, graph.size_v, snaps)
