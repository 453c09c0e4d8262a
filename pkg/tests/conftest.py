import numpy as np
import pytest

from dynbip.distributions import CauchyParams, GammaParams
from dynbip.generator import GeneratorConfig
from dynbip.graph import DynamicBipartiteGraph, TimedEdge

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(ACCEPTANCE):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {name}: {detail}")


def make_config(**kw):
    base = dict(T=24, cycle_length=24, size_u=50, size_v=20, total_edges=1000,
                cauchy_u=CauchyParams(12, 12), cauchy_v=CauchyParams(12, 12),
                cauchy_e=CauchyParams(12, 6), gamma_u=GammaParams(0.8, 1, 5),
                gamma_v=GammaParams(0.8, 1, 5), seed=42,
                min_nodes_per_snapshot=1)
    base.update(kw)
    return GeneratorConfig(**base)


def graph_from_pairs(pairs, size_u=None, size_v=None, T=1):
    """Graph from ``(u, v)`` or ``(u, v, t)`` tuples."""
    edges = [TimedEdge(p[0], p[1], p[2] if len(p) > 2 else 0) for p in pairs]
    size_u = size_u or max([e.u for e in edges], default=0) + 1
    size_v = size_v or max([e.v for e in edges], default=0) + 1
    return DynamicBipartiteGraph.from_edges(T, size_u, size_v, edges)


@pytest.fixture
def small_config():
    return make_config()


@pytest.fixture
def star():
    # u0 - {v0, v1, v2}
    return graph_from_pairs([(0, 0), (0, 1), (0, 2)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
