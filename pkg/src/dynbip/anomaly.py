"""Anomaly injection with burstiness and propagation, plus its ground truth.

Attackers and victims are drawn once. Every snapshot in the window then
receives ``floor(|E_t| * ap)`` extra edges between attackers and victims. With
propagation on, a share of the victims is promoted to attackers after each
snapshot.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _random
from .graph import DynamicBipartiteGraph, NodeRef, Side, append_edges

# guards floor() against products like 100 * 0.29 == 28.999999999999996
_FLOOR_SLACK = 1e-9


def floor_share(n, fraction):
    return int(math.floor(n * fraction + _FLOOR_SLACK))


class SideMode(str, enum.Enum):
    U_ONLY = "u"
    V_ONLY = "v"
    BOTH = "both"


@dataclass(frozen=True)
class AnomalyConfig:
    initial_attackers_u: int = 1
    initial_attackers_v: int = 1
    anomaly_percentage: float = 0.01
    burstiness: int = 1
    propagation_ratio: float = 0.0
    propagation_enabled: bool = False
    window: Optional[tuple] = None
    side_mode: SideMode = SideMode.BOTH

    def __post_init__(self):
        object.__setattr__(self, "side_mode", SideMode(self.side_mode))
        if self.window is not None:
            object.__setattr__(self, "window", tuple(int(x) for x in self.window))
            if len(self.window) != 2:
                raise ValueError("window must be a (start, end) pair")
        cu, cv = self.initial_attackers_u, self.initial_attackers_v
        if cu < 0 or cv < 0:
            raise ValueError("initial attacker counts must be non-negative")
        if not 0 < self.anomaly_percentage <= 1:
            raise ValueError("anomaly_percentage must be in (0, 1]")
        if isinstance(self.burstiness, bool) or int(self.burstiness) != self.burstiness \
                or self.burstiness < 1:
            raise ValueError("burstiness must be an integer >= 1")
        if not 0 <= self.propagation_ratio <= 1:
            raise ValueError("propagation_ratio must be in [0, 1]")
        mode = self.side_mode
        if self.propagation_enabled and mode is not SideMode.BOTH:
            raise ValueError("propagation requires side_mode 'both'")
        if mode is SideMode.BOTH and (cu < 1 or cv < 1):
            raise ValueError("side_mode 'both' needs attackers on both sides")
        if mode is SideMode.U_ONLY and (cu < 1 or cv):
            raise ValueError("side_mode 'u' needs initial_attackers_u >= 1 and "
                             "initial_attackers_v == 0")
        if mode is SideMode.V_ONLY and (cv < 1 or cu):
            raise ValueError("side_mode 'v' needs initial_attackers_v >= 1 and "
                             "initial_attackers_u == 0")

    def resolve_window(self, T):
        start, end = self.window if self.window is not None else (0, T)
        if not 0 <= start < end <= T:
            raise ValueError(f"anomaly window {(start, end)} is empty or outside [0, {T})")
        return start, end


@dataclass(frozen=True)
class AnomalyLedger:
    """Ground truth of one injection run.

    Per-snapshot lists have length ``T`` and are empty outside the window.
    ``infected[t]`` holds the victims promoted after snapshot ``t``.
    """
    T: int
    window: tuple
    attackers_u: tuple
    attackers_v: tuple
    victims_u: tuple
    victims_v: tuple
    infected: tuple
    anomalous_edges: frozenset

    @property
    def initial_attackers_u(self):
        return self.attackers_u[self.window[0]]

    @property
    def initial_attackers_v(self):
        return self.attackers_v[self.window[0]]

    @property
    def initial_victims_u(self):
        return self.victims_u[self.window[0]]

    @property
    def initial_victims_v(self):
        return self.victims_v[self.window[0]]

    def anomalous_count(self, t=None):
        if t is None:
            return len(self.anomalous_edges)
        return sum(1 for s, _ in self.anomalous_edges if s == t)


def _draw(gen, pool, k, exclude=()):
    """Uniform sample of ``k`` distinct members of ``range(pool)`` minus ``exclude``."""
    if k == 0:
        return np.zeros(0, dtype=np.int64)
    candidates = np.setdiff1d(np.arange(pool, dtype=np.int64),
                              np.fromiter(exclude, dtype=np.int64), assume_unique=True)
    if k > len(candidates):
        raise ValueError(f"need {k} distinct nodes but only {len(candidates)} are available")
    return np.sort(gen.choice(candidates, size=k, replace=False))


def inject(graph: DynamicBipartiteGraph, config: AnomalyConfig, seed):
    """Inject anomalous edges; returns ``(graph, ledger)``.

    Snapshot budgets use the pre-injection edge count. In 'both' mode the
    first ``floor(c_e / 2)`` edges go from U attackers to V victims and the
    rest from U victims to V attackers.
    """
    start, end = config.resolve_window(graph.T)
    mode = config.side_mode
    b = int(config.burstiness)
    gen = _random.rng(seed, _random.ANOMALY)

    try:
        att_u = _draw(gen, graph.size_u, config.initial_attackers_u)
        att_v = _draw(gen, graph.size_v, config.initial_attackers_v)
        if mode is SideMode.BOTH:
            vic_u = _draw(gen, graph.size_u, len(att_u) * b, att_u)
            vic_v = _draw(gen, graph.size_v, len(att_v) * b, att_v)
        elif mode is SideMode.U_ONLY:
            vic_u = np.zeros(0, dtype=np.int64)
            vic_v = _draw(gen, graph.size_v, len(att_u) * b)
        else:
            vic_u = _draw(gen, graph.size_u, len(att_v) * b)
            vic_v = np.zeros(0, dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"victim demand exceeds the node pool: {exc}") from None

    empty = frozenset()
    per_t = {k: [empty] * graph.T for k in
             ("attackers_u", "attackers_v", "victims_u", "victims_v", "infected")}
    anomalous = []
    fresh_u = list(vic_u)
    fresh_v = list(vic_v)

    for t in range(start, end):
        n_t = len(graph.snapshots[t])
        c_e = floor_share(n_t, config.anomaly_percentage)
        if mode is SideMode.BOTH:
            k_u = c_e // 2
            k_v = c_e - k_u
        elif mode is SideMode.U_ONLY:
            k_u, k_v = c_e, 0
        else:
            k_u, k_v = 0, c_e
        us, vs = [], []
        if k_u:
            us.append(gen.choice(att_u, size=k_u))
            vs.append(gen.choice(vic_v, size=k_u))
        if k_v:
            us.append(gen.choice(vic_u, size=k_v))
            vs.append(gen.choice(att_v, size=k_v))
        if c_e:
            graph = append_edges(graph, t, np.concatenate(us), np.concatenate(vs),
                                 anomalous=True)
            anomalous.extend((t, i) for i in range(n_t, n_t + c_e))

        per_t["attackers_u"][t] = frozenset(int(x) for x in att_u)
        per_t["attackers_v"][t] = frozenset(int(x) for x in att_v)
        per_t["victims_u"][t] = frozenset(int(x) for x in vic_u)
        per_t["victims_v"][t] = frozenset(int(x) for x in vic_v)

        if config.propagation_enabled and config.propagation_ratio > 0:
            promoted = []
            for side, fresh, victims in ((Side.U, fresh_u, vic_u), (Side.V, fresh_v, vic_v)):
                k = max(1, floor_share(len(victims), config.propagation_ratio))
                k = min(k, len(fresh))
                if not k:
                    continue
                pick = np.sort(gen.choice(len(fresh), size=k, replace=False))
                chosen = [fresh[i] for i in pick]
                for i in pick[::-1]:
                    del fresh[i]
                promoted.extend(NodeRef(side, int(x)) for x in chosen)
                if side is Side.U:
                    att_u = np.union1d(att_u, chosen)
                else:
                    att_v = np.union1d(att_v, chosen)
            per_t["infected"][t] = frozenset(promoted)

    ledger = AnomalyLedger(graph.T, (start, end),
                           *(tuple(per_t[k]) for k in ("attackers_u", "attackers_v",
                                                       "victims_u", "victims_v", "infected")),
                           frozenset(anomalous))
    return graph, ledger


def measured_burstiness(ledger: AnomalyLedger) -> float:
    """Attacker-to-victim ratio of the initial sets."""
    victims = len(ledger.initial_victims_u) + len(ledger.initial_victims_v)
    if not victims:
        raise ValueError("ledger has no victims")
    return (len(ledger.initial_attackers_u) + len(ledger.initial_attackers_v)) / victims


def verify_propagation(ledger: AnomalyLedger) -> bool:
    """True iff some node is a victim at ``t1`` and an attacker at a later ``t2``."""
    first_victim = {}
    for t in range(ledger.T):
        for side, vics in ((Side.U, ledger.victims_u[t]), (Side.V, ledger.victims_v[t])):
            for x in vics:
                first_victim.setdefault((side, x), t)
    for t in range(ledger.T):
        for side, atts in ((Side.U, ledger.attackers_u[t]), (Side.V, ledger.attackers_v[t])):
            for x in atts:
                t1 = first_victim.get((side, x))
                if t1 is not None and t1 < t:
                    return True
    return False


def ledger_from_labels(graph: DynamicBipartiteGraph) -> AnomalyLedger:
    """Edge-only ledger rebuilt from the graph's labels (no node membership)."""
    edges = frozenset((s.t, int(i)) for s in graph.snapshots
                      for i in np.flatnonzero(s.anomalous))
    empty = (frozenset(),) * graph.T
    return AnomalyLedger(graph.T, (0, graph.T), empty, empty, empty, empty, empty, edges)
