from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynbip.anomaly import (AnomalyConfig, SideMode, floor_share, inject, ledger_from_labels,
                            measured_burstiness, verify_propagation)
from dynbip.generator import generate
from dynbip.graph import NodeRef, Side, Snapshot, DynamicBipartiteGraph

from conftest import make_config


def uniform_graph(counts, size_u=200, size_v=200, seed=0):
    """One edge list per snapshot with ``counts[t]`` random edges."""
    gen = np.random.default_rng(seed)
    snaps = tuple(Snapshot.build(t, gen.integers(0, size_u, n), gen.integers(0, size_v, n))
                  for t, n in enumerate(counts))
    return DynamicBipartiteGraph(len(counts), size_u, size_v, snaps)


def normal_multiset(g):
    return [Counter(zip(s.u[~s.anomalous].tolist(), s.v[~s.anomalous].tolist()))
            for s in g.snapshots]


@pytest.mark.parametrize("n,ap", [(100, 0.29), (100, 0.07), (12345, 0.013), (7, 0.5),
                                  (1000, 0.001), (3, 0.1)])
def test_floor_share_exact(n, ap):
    # decimal fraction taken as written, not as the nearest double
    exact = Fraction(n) * Fraction(str(ap))
    assert floor_share(n, ap) == exact.numerator // exact.denominator


def test_zero_budget_leaves_graph_unchanged():
    g = uniform_graph([10, 20, 5])
    g2, ledger = inject(g, AnomalyConfig(anomaly_percentage=0.01), seed=1)
    assert g2 == g and not ledger.anomalous_edges


def test_victim_sizing():
    g = uniform_graph([50] * 4)
    _, ledger = inject(g, AnomalyConfig(2, 1, 0.1, burstiness=3), seed=0)
    assert len(ledger.initial_victims_u) == 6 and len(ledger.initial_victims_v) == 3
    assert not ledger.initial_victims_u & ledger.initial_attackers_u


def test_both_mode_split():
    g = uniform_graph([100])
    g2, ledger = inject(g, AnomalyConfig(2, 2, 0.05, burstiness=1), seed=4)
    s = g2.snapshots[0]
    new_u, new_v = s.u[100:], s.v[100:]
    assert len(new_u) == 5 and s.anomalous[100:].all() and not s.anomalous[:100].any()
    au, av = ledger.attackers_u[0], ledger.attackers_v[0]
    vu, vv = ledger.victims_u[0], ledger.victims_v[0]
    from_u = [(a, b) for a, b in zip(new_u, new_v) if a in au and b in vv]
    from_v = [(a, b) for a, b in zip(new_u, new_v) if a in vu and b in av]
    assert len(from_u) == 2 and len(from_v) == 3


@pytest.mark.parametrize("mode,cu,cv", [(SideMode.U_ONLY, 2, 0), (SideMode.V_ONLY, 0, 2)])
def test_single_side_modes(mode, cu, cv):
    g = uniform_graph([100, 100])
    g2, ledger = inject(g, AnomalyConfig(cu, cv, 0.05, burstiness=2, side_mode=mode), seed=3)
    for t, s in enumerate(g2.snapshots):
        u, v = s.u[s.anomalous], s.v[s.anomalous]
        assert len(u) == 5
        if mode is SideMode.U_ONLY:
            assert set(u) <= ledger.attackers_u[t] and set(v) <= ledger.victims_v[t]
        else:
            assert set(u) <= ledger.victims_u[t] and set(v) <= ledger.attackers_v[t]


def test_promotion_count():
    g = uniform_graph([40] * 3)
    cfg = AnomalyConfig(2, 2, 0.1, burstiness=3, propagation_ratio=0.5,
                        propagation_enabled=True)
    _, ledger = inject(g, cfg, seed=8)
    promoted_u = [n for n in ledger.infected[0] if n.side is Side.U]
    assert len(promoted_u) == 3
    grown = ledger.attackers_u[1] - ledger.attackers_u[0]
    assert grown == {n.index for n in promoted_u}


def test_ledger_membership_outside_window_empty():
    g = uniform_graph([100] * 5)
    _, ledger = inject(g, AnomalyConfig(1, 1, 0.1, window=(1, 3)), seed=0)
    assert not ledger.attackers_u[0] and not ledger.attackers_u[4]
    assert ledger.attackers_u[1] and ledger.attackers_u[2]
    assert {t for t, _ in ledger.anomalous_edges} == {1, 2}


def test_errors():
    g = uniform_graph([10], size_u=5, size_v=5)
    with pytest.raises(ValueError, match="victim"):
        inject(g, AnomalyConfig(2, 1, 0.5, burstiness=3), seed=0)
    with pytest.raises(ValueError, match="window"):
        inject(g, AnomalyConfig(1, 1, 0.5, window=(1, 1)), seed=0)
    with pytest.raises(ValueError):
        AnomalyConfig(1, 1, 0.1, propagation_enabled=True, side_mode="u")
    with pytest.raises(ValueError):
        AnomalyConfig(1, 0, 0.1)
    with pytest.raises(ValueError):
        AnomalyConfig(1, 1, 0.0)


@pytest.mark.parametrize("cu,cv,b,mode,expected", [
    (2, 0, 1, SideMode.U_ONLY, 1.0),
    (2, 0, 3, SideMode.U_ONLY, 1 / 3),
    (1, 1, 4, SideMode.BOTH, 0.25),
])
def test_measured_burstiness(cu, cv, b, mode, expected):
    g = uniform_graph([50] * 2)
    _, ledger = inject(g, AnomalyConfig(cu, cv, 0.1, burstiness=b, side_mode=mode), seed=2)
    assert measured_burstiness(ledger) == pytest.approx(expected, abs=1e-12)


def test_burstiness_needs_victims():
    g = uniform_graph([10])
    _, ledger = inject(g, AnomalyConfig(1, 1, 0.5), seed=0)
    with pytest.raises(ValueError):
        measured_burstiness(ledger_from_labels(g))
    assert measured_burstiness(ledger) == 1.0


@pytest.mark.parametrize("kw,expected", [
    (dict(), False),
    (dict(propagation_enabled=True, propagation_ratio=0.0), False),
    (dict(propagation_enabled=True, propagation_ratio=1.0), True),
])
def test_verify_propagation(kw, expected):
    g = uniform_graph([50] * 3)
    _, ledger = inject(g, AnomalyConfig(1, 1, 0.1, burstiness=1, **kw), seed=5)
    assert verify_propagation(ledger) is expected


def test_deterministic(small_config):
    g = generate(small_config)
    cfg = AnomalyConfig(1, 1, 0.05)
    a, la = inject(g, cfg, seed=3)
    b, lb = inject(g, cfg, seed=3)
    assert a == b and la == lb


def test_ledger_from_labels_matches():
    g = uniform_graph([100, 60])
    g2, ledger = inject(g, AnomalyConfig(1, 1, 0.1), seed=0)
    assert ledger_from_labels(g2).anomalous_edges == ledger.anomalous_edges


@settings(max_examples=40, deadline=None)
@given(counts=st.lists(st.integers(0, 300), min_size=1, max_size=8),
       ap=st.floats(0.001, 0.5), b=st.integers(1, 4), p=st.floats(0, 1),
       seed=st.integers(0, 2**32 - 1))
def test_injection_properties(counts, ap, b, p, seed):
    g = uniform_graph(counts, size_u=60, size_v=60, seed=seed % 1000)
    cfg = AnomalyConfig(2, 2, ap, burstiness=b, propagation_ratio=p,
                        propagation_enabled=p > 0)
    g2, ledger = inject(g, cfg, seed=seed)
    assert len(ledger.anomalous_edges) == sum(floor_share(n, ap) for n in counts)
    assert normal_multiset(g2) == normal_multiset(g)
    for t in range(len(counts)):
        assert ledger.anomalous_count(t) == floor_share(counts[t], ap)
    for t in range(1, len(counts)):
        before = len(ledger.attackers_u[t - 1]) + len(ledger.attackers_v[t - 1])
        after = len(ledger.attackers_u[t]) + len(ledger.attackers_v[t])
        assert after >= before
        left = len(ledger.initial_victims_u) + len(ledger.initial_victims_v) - (before - 4)
        if cfg.propagation_enabled and left:
            assert after > before
    assert measured_burstiness(ledger) == pytest.approx(1 / b)


def test_node_refs_in_infected_are_victims():
    g = uniform_graph([80] * 4)
    cfg = AnomalyConfig(2, 2, 0.1, burstiness=2, propagation_ratio=0.3,
                        propagation_enabled=True)
    _, ledger = inject(g, cfg, seed=1)
    for t in range(4):
        for n in ledger.infected[t]:
            assert isinstance(n, NodeRef)
            vic = ledger.victims_u[t] if n.side is Side.U else ledger.victims_v[t]
            assert n.index in vic
