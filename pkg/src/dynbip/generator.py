"""Snapshot-by-snapshot dynamic bipartite graph generation.

Per snapshot: sample participating nodes with inverse-density weights, turn
the snapshot's edge budget into a pair of degree sequences, then wire the
stubs with the bipartite configuration model (BiCM).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _random
from .distributions import (CauchyParams, GammaParams, apportion,
                            cyclic_count_series, degree_probability_table)
from .graph import DynamicBipartiteGraph, Snapshot

log = logging.getLogger(__name__)


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GeneratorConfig:
    T: int
    cycle_length: int
    size_u: int
    size_v: int
    total_edges: int
    cauchy_u: CauchyParams
    cauchy_v: CauchyParams
    cauchy_e: CauchyParams
    gamma_u: GammaParams
    gamma_v: GammaParams
    seed: int = 0
    # snapshots with edges get at least this many nodes per side; 0 = strict
    min_nodes_per_snapshot: int = 0

    def __post_init__(self):
        for name in ("T", "cycle_length", "size_u", "size_v", "total_edges"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValueError(f"{name} must be an integer")
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        if self.cycle_length > self.T:
            raise ValueError("cycle_length must not exceed T")
        if self.T % self.cycle_length:
            raise ValueError(f"T={self.T} is not a multiple of cycle_length="
                             f"{self.cycle_length}")
        if self.min_nodes_per_snapshot < 0:
            raise ValueError("min_nodes_per_snapshot must be >= 0")

    @staticmethod
    def padded_T(T, cycle_length):
        return -(-T // cycle_length) * cycle_length


@dataclass(frozen=True)
class DegreeSequencePair:
    seq_u: np.ndarray
    seq_v: np.ndarray
    nodes_u: np.ndarray = field(default=None)
    nodes_v: np.ndarray = field(default=None)

    def __post_init__(self):
        for name, seq in (("nodes_u", self.seq_u), ("nodes_v", self.seq_v)):
            if getattr(self, name) is None:
                object.__setattr__(self, name, np.arange(len(seq)))

    @property
    def edge_count(self):
        return int(np.sum(self.seq_u))


def sample_nodes(pool_size, count, weights, seed):
    """Weighted sampling without replacement, returned as sorted indices.

    Uses exponential keys (``E_i / w_i``, keep the ``count`` smallest), which
    has the same law as drawing one node at a time proportionally to weight
    and removing it from the pool.
    """
    pool_size, count = int(pool_size), int(count)
    if count < 0:
        raise ValueError("count must be non-negative")
    if count > pool_size:
        raise ValueError(f"cannot draw {count} distinct nodes from {pool_size}")
    if count == pool_size:
        return np.arange(pool_size, dtype=np.int64)
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    w = np.asarray(weights, dtype=float)
    if w.shape != (pool_size,):
        raise ValueError("weights must have one entry per pool member")
    gen = seed if isinstance(seed, np.random.Generator) else _random.rng(seed)
    keys = gen.standard_exponential(pool_size) / w
    chosen = np.argpartition(keys, count - 1)[:count]
    return np.sort(chosen).astype(np.int64)


def _side_sequence(nodes, edge_count, gen, params):
    raw = params.location + params.scale * gen.gamma(params.shape, 1.0, len(nodes))
    if len(raw) and raw.min() <= 0:
        # negative locations can yield non-positive draws; only proportions matter
        raw = raw - raw.min() + 1e-12
    if edge_count < len(nodes):
        # keep the edge_count strongest draws; ties resolved by position
        keep = np.sort(np.argsort(-raw, kind="stable")[:edge_count])
        return nodes[keep], np.ones(edge_count, dtype=np.int64)
    seq = 1 + apportion(raw, edge_count - len(nodes))
    return nodes, seq


def sample_degree_sequence(nodes_u, nodes_v, edge_count, gamma_u: GammaParams,
                           gamma_v: GammaParams, seed) -> DegreeSequencePair:
    """Degree sequences for one snapshot, both summing to ``edge_count``.

    Each node gets one unit, and the remaining budget is split in proportion
    to a fresh gamma draw. When the budget is smaller than the node set, only
    the ``edge_count`` strongest draws are kept, each with degree 1.
    """
    nodes_u = np.asarray(sorted(nodes_u), dtype=np.int64)
    nodes_v = np.asarray(sorted(nodes_v), dtype=np.int64)
    edge_count = int(edge_count)
    empty = np.zeros(0, dtype=np.int64)
    if edge_count < 1:
        return DegreeSequencePair(empty, empty, empty, empty)
    if not len(nodes_u) or not len(nodes_v):
        raise ValueError("both node sets must be non-empty when edges are requested")
    gen = seed if isinstance(seed, np.random.Generator) else _random.rng(seed)
    nu, su = _side_sequence(nodes_u, edge_count, gen, gamma_u)
    nv, sv = _side_sequence(nodes_v, edge_count, gen, gamma_v)
    return DegreeSequencePair(su, sv, nu, nv)


def bicm(seqs: DegreeSequencePair, seed):
    """Stub matching: pair U stubs with a uniform permutation of V stubs.

    Returns an ``(m, 2)`` array of positions into ``seq_u`` / ``seq_v``.
    Parallel edges are kept, so realized degrees equal the prescribed ones.
    """
    seq_u = np.asarray(seqs.seq_u, dtype=np.int64)
    seq_v = np.asarray(seqs.seq_v, dtype=np.int64)
    if np.any(seq_u < 0) or np.any(seq_v < 0):
        raise ValueError("degrees must be non-negative")
    if seq_u.sum() != seq_v.sum():
        raise ValueError(f"degree sums differ: {seq_u.sum()} != {seq_v.sum()}")
    gen = seed if isinstance(seed, np.random.Generator) else _random.rng(seed)
    u_stubs = np.repeat(np.arange(len(seq_u), dtype=np.int64), seq_u)
    v_stubs = np.repeat(np.arange(len(seq_v), dtype=np.int64), seq_v)
    gen.shuffle(v_stubs)
    return np.column_stack([u_stubs, v_stubs])


@dataclass(frozen=True)
class GenerationPlan:
    """Everything computed before the per-snapshot loop."""
    u_count: np.ndarray
    v_count: np.ndarray
    e_count: np.ndarray
    table_u: object
    table_v: object


def plan(config: GeneratorConfig) -> GenerationPlan:
    c = config
    u_count = cyclic_count_series(c.size_u, c.T, c.cycle_length, c.cauchy_u).counts
    v_count = cyclic_count_series(c.size_v, c.T, c.cycle_length, c.cauchy_v).counts
    e_count = cyclic_count_series(c.total_edges, c.T, c.cycle_length, c.cauchy_e).counts
    if c.min_nodes_per_snapshot:
        busy = e_count > 0
        floor_u = min(c.min_nodes_per_snapshot, c.size_u)
        floor_v = min(c.min_nodes_per_snapshot, c.size_v)
        u_count = np.where(busy, np.maximum(u_count, floor_u), u_count)
        v_count = np.where(busy, np.maximum(v_count, floor_v), v_count)
    table_u = degree_probability_table(c.size_u, c.gamma_u, _random.rng(c.seed, _random.TABLE_U))
    table_v = degree_probability_table(c.size_v, c.gamma_v, _random.rng(c.seed, _random.TABLE_V))
    return GenerationPlan(u_count, v_count, e_count, table_u, table_v)


def build_snapshot(config: GeneratorConfig, p: GenerationPlan, t: int):
    """Generate snapshot ``t``; returns ``(Snapshot, DegreeSequencePair)``."""
    gen = _random.rng(config.seed, _random.SNAPSHOT, t)
    m = int(p.e_count[t])
    nodes_u = sample_nodes(config.size_u, p.u_count[t], p.table_u.weights, gen)
    nodes_v = sample_nodes(config.size_v, p.v_count[t], p.table_v.weights, gen)
    if m > 0 and (not len(nodes_u) or not len(nodes_v)):
        raise GenerationError(
            f"snapshot {t}: {m} edges requested but sampled |U|={len(nodes_u)}, "
            f"|V|={len(nodes_v)}; raise the node totals or min_nodes_per_snapshot")
    seqs = sample_degree_sequence(nodes_u, nodes_v, m, config.gamma_u, config.gamma_v, gen)
    pairs = bicm(seqs, gen)
    snap = Snapshot.build(t, seqs.nodes_u[pairs[:, 0]], seqs.nodes_v[pairs[:, 1]])
    return snap, seqs


def generate(config: GeneratorConfig, threads=1, return_sequences=False):
    """Generate a graph. Output does not depend on ``threads``."""
    p = plan(config)
    ts = range(config.T)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda t: build_snapshot(config, p, t), ts))
    else:
        results = [build_snapshot(config, p, t) for t in ts]
    graph = DynamicBipartiteGraph(config.T, config.size_u, config.size_v,
                                  tuple(r[0] for r in results))
    log.debug("generated %d edges over %d snapshots", len(graph), config.T)
    if return_sequences:
        return graph, [r[1] for r in results]
    return graph
