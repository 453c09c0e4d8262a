import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynbip.attributes import Column, TabularDataset
from dynbip.evaluation import (EvalReport, ScalarSample, attribute_similarity, anomaly_similarity,
                               average_bcc, bcc, degree_distribution, er_baseline, evaluate,
                               median_bandwidth, mmd, time_distributions, time_histogram)
from dynbip.generator import generate
from dynbip.graph import DynamicBipartiteGraph, degrees

from conftest import graph_from_pairs, make_config


def test_degree_distribution_star(star):
    support, p = degree_distribution(star, "U").distribution()
    assert support.tolist() == [3] and p.tolist() == [1.0]
    g = graph_from_pairs([(0, 0), (0, 1), (0, 2)], size_v=4)
    support, p = degree_distribution(g, "V").distribution()
    assert support.tolist() == [0, 1] and p.tolist() == [0.25, 0.75]


def test_degree_distribution_empty():
    s = degree_distribution(DynamicBipartiteGraph(2, 3, 2), "U")
    assert s.values.tolist() == [0, 0, 0]


@pytest.mark.parametrize("times,T,expected", [
    ([0] * 10, 2, [1.0, 0.0]),
    ([0, 1, 2, 3] * 2, 4, [0.25] * 4),
    ([0, 0, 0, 1], 2, [0.75, 0.25]),
])
def test_time_histogram(times, T, expected):
    g = graph_from_pairs([(0, 0, t) for t in times], T=T)
    edge, nu, nv = time_distributions(g)
    assert time_histogram(edge, T).tolist() == expected
    assert time_histogram(nu, T).sum() == 1.0


def test_node_time_counts_distinct_nodes():
    g = graph_from_pairs([(0, 0, 0), (0, 1, 0), (1, 1, 1)], T=2)
    _, nu, nv = time_distributions(g)
    assert nu.values.tolist() == [0, 1] and nv.values.tolist() == [0, 0, 1]


class TestBcc:
    def test_star(self, star):
        assert bcc(star, "V").values.tolist() == [1.0, 1.0, 1.0]
        assert bcc(star, "U").values.tolist() == [0.0]

    def test_path(self):
        g = graph_from_pairs([(0, 0), (1, 0), (1, 1)])
        vals = bcc(g, "V").values
        assert vals[0] == 0.5 and vals[1] == 0.5

    def test_single_edge(self):
        g = graph_from_pairs([(0, 0)])
        assert bcc(g, "U").values.tolist() == [0.0] and average_bcc(g, "V") == 0.0

    @pytest.mark.parametrize("m,n", [(1, 1), (2, 3), (5, 4)])
    def test_complete_bipartite(self, m, n):
        g = graph_from_pairs([(i, j) for i in range(m) for j in range(n)])
        for side in "UV":
            vals = bcc(g, side).values
            others = n if side == "U" else m
            # a lone node on a side has no second-order neighbours
            expected = 1.0 if (m if side == "U" else n) > 1 else 0.0
            assert np.all(vals == expected) and len(vals) == (m if side == "U" else n)
            assert others >= 1

    def test_isolated_excluded_and_parallel_collapsed(self):
        g = graph_from_pairs([(0, 0), (0, 0, 1), (1, 0)], size_u=4, T=2)
        assert len(bcc(g, "U")) == 2
        assert bcc(g, "U").values.tolist() == [1.0, 1.0]

    def test_range(self, small_config):
        g = generate(small_config)
        for side in "UV":
            v = bcc(g, side).values
            assert np.all((v >= 0) & (v <= 1))


class TestMmd:
    @pytest.mark.parametrize("d,sigma", [(0.5, 1.0), (2.0, 1.0), (3.0, 0.7), (1e-3, 2.0)])
    def test_singleton_closed_form(self, d, sigma):
        expected = 2 - 2 * math.exp(-d * d / (2 * sigma * sigma))
        assert mmd([0.0], [d], bandwidth=sigma) == pytest.approx(expected, abs=1e-10)

    def test_two_point_closed_form(self):
        # a = {0, 1}, b = {0}: (1 + k)/2 + 1 - (1 + k) with k = exp(-1/2)
        k = math.exp(-0.5)
        assert mmd([0, 1], [0], bandwidth=1.0) == pytest.approx((1 - k) / 2, abs=1e-12)

    def test_compression_matches_naive(self, rng):
        a = rng.integers(0, 5, 40).astype(float)
        b = rng.integers(0, 7, 25).astype(float)
        s = 1.3
        k = lambda x, y: np.exp(-(x[:, None] - y[None, :]) ** 2 / (2 * s * s)).mean()
        naive = k(a, a) + k(b, b) - 2 * k(a, b)
        assert mmd(a, b, bandwidth=s) == pytest.approx(naive, abs=1e-12)

    def test_identity_and_symmetry(self, rng):
        a = rng.normal(size=300)
        b = rng.normal(0.3, 1, size=200)
        assert mmd(a, a) <= 1e-12
        assert mmd(a, b) == mmd(b, a)
        assert mmd(a, b) > 0

    def test_permutation_invariance(self, rng):
        a, b = rng.normal(size=100), rng.exponential(size=80)
        pa, pb = rng.permutation(a), rng.permutation(b)
        assert mmd(a, b) == mmd(pa, pb)

    def test_errors(self):
        with pytest.raises(ValueError):
            mmd([], [1.0])
        with pytest.raises(ValueError):
            mmd([1.0], [2.0], bandwidth=0)
        with pytest.raises(ValueError):
            ScalarSample([np.nan], "x")

    def test_median_bandwidth(self):
        # pairwise distances of {0, 1, 3}: 1, 2, 3
        assert median_bandwidth([0.0, 1.0], [3.0]) == 2.0
        assert median_bandwidth([5.0, 5.0], [5.0]) == 1.0

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=30),
           st.lists(st.floats(-100, 100), min_size=1, max_size=30))
    def test_axioms(self, a, b):
        v = mmd(a, b)
        assert v >= 0 and v == mmd(b, a)
        assert mmd(a, list(a)) <= 1e-12


class TestAnomalySimilarity:
    def anomalous(self, pairs, size_u=10, size_v=10):
        g = graph_from_pairs(pairs, size_u=size_u, size_v=size_v)
        snap = g.snapshots[0]
        from dynbip.graph import Snapshot
        snap = Snapshot.build(0, snap.u, snap.v, np.ones(len(snap), bool))
        return g.replace_snapshot(snap)

    def test_relabel_invariant(self):
        a = self.anomalous([(0, 0), (0, 1), (1, 1)])
        b = self.anomalous([(7, 4), (7, 2), (3, 2)])
        assert anomaly_similarity(a, None, b, None) <= 1e-12

    def test_clique_vs_star(self):
        clique = self.anomalous([(i, j) for i in range(3) for j in range(3)])
        star = self.anomalous([(0, j) for j in range(5)])
        assert anomaly_similarity(clique, None, star, None) > 0

    def test_empty_rejected(self, star):
        with pytest.raises(ValueError):
            anomaly_similarity(star, None, star, None)


def table(**cols):
    columns = [Column(k, "numeric" if np.asarray(v).dtype.kind == "f" else "categorical")
               for k, v in cols.items()]
    return TabularDataset(columns, dict(cols))


class TestAttributeSimilarity:
    def test_identical(self, rng):
        t = table(x=rng.random(500), c=np.array(list("ab") * 250))
        s = attribute_similarity(t, t)
        assert s.columns["x"] <= 1e-12 and s.categorical_tv["c"] == 0

    def test_constant(self):
        t = table(x=np.full(10, 3.0))
        assert attribute_similarity(t, t).columns["x"] == 0

    def test_separation(self):
        gen = np.random.default_rng(0)
        a, a2 = table(x=gen.random(10000)), table(x=gen.random(10000))
        b = table(x=gen.random(10000) + 0.5)
        shifted = attribute_similarity(a, b).columns["x"]
        same = attribute_similarity(a, a2).columns["x"]
        assert shifted > 0 and shifted >= 10 * same

    def test_schema_mismatch(self, rng):
        with pytest.raises(ValueError):
            attribute_similarity(table(x=rng.random(5)), table(y=rng.random(5)))


class TestBaseline:
    def test_empty(self):
        assert len(er_baseline(3, 3, 0, 2, 0)) == 0

    def test_uniform_degrees(self):
        n_u, m = 50, 100000
        d = degrees(er_baseline(n_u, 20, m, 4, seed=3), "U")
        p = 1 / n_u
        se = math.sqrt(m * p * (1 - p) / n_u)
        assert abs(d.mean() - m / n_u) <= 3 * se
        # per-node counts are binomial(m, p)
        assert abs(d.std() - math.sqrt(m * p * (1 - p))) < 0.3 * math.sqrt(m * p * (1 - p))

    def test_deterministic(self):
        assert er_baseline(5, 5, 100, 3, 1) == er_baseline(5, 5, 100, 3, 1)


class TestEvaluate:
    def test_self_is_zero(self, small_config):
        from dynbip.anomaly import AnomalyConfig, inject
        g, ledger = inject(generate(small_config), AnomalyConfig(1, 1, 0.1), seed=0)
        rep = evaluate(g, ledger, None, g, ledger, None)
        assert all(v <= 1e-12 for v in rep.scores().values())
        assert rep.anomaly_mmd is not None

    def test_report_round_trip(self, small_config):
        g = generate(small_config)
        rep = evaluate(g, None, None, er_baseline(50, 20, 1000, 24, 0), None, None)
        back = EvalReport.from_json(rep.to_json())
        assert back == rep
        doc = json.loads(rep.to_json())
        assert set(doc["time_mmd"]) == {"edge", "node_u", "node_v", "mean"}
        assert "degree_u" in doc["bandwidths"]

    def test_generated_closer_than_baseline(self):
        cfg = make_config(T=48, size_u=400, size_v=150, total_edges=8000,
                          min_nodes_per_snapshot=0)
        from dataclasses import replace
        a, b = generate(cfg), generate(replace(cfg, seed=cfg.seed + 1))
        er = er_baseline(cfg.size_u, cfg.size_v, cfg.total_edges, cfg.T, 0)
        assert evaluate(a, None, None, b, None, None).degree_mmd < \
            evaluate(a, None, None, er, None, None).degree_mmd
