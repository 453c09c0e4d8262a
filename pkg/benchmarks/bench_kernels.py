"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]

Reports best-of-N wall time for BCC on a generated graph, the weighted RBF
sum behind MMD, and generator throughput (which does not use the kernels,
listed for scale). Both backends are also checked to agree.
"""

import argparse
import time

import numpy as np

from dynbip import config, kernels
from dynbip.evaluation import _csr, bcc
from dynbip.generator import generate


def best(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0, help="multiplies graph and sample sizes")
    args = ap.parse_args()

    gen_cfg = config.parse_pipeline(config.preset("pcore-desk")).generator
    gen_cfg = type(gen_cfg)(**{**gen_cfg.__dict__,
                               "total_edges": int(gen_cfg.total_edges * args.scale)})
    t_gen, graph = best(lambda: generate(gen_cfg), args.repeat)
    print(f"generate: {len(graph)} edges in {t_gen * 1e3:.1f} ms "
          f"({len(graph) / t_gen / 1e6:.2f} M edges/s)")

    backends = sorted(kernels.BACKENDS)
    if len(backends) < 2:
        print("compiled extension not built; only the python backend is available")
    ptr_u, idx_u, ptr_v, idx_v = _csr(graph)
    rng = np.random.default_rng(0)
    n = int(4000 * args.scale)
    x, y = rng.normal(size=n), rng.normal(0.2, 1.1, size=n)
    wx, wy = np.full(n, 1 / n), np.full(n, 1 / n)

    rows, results = [], {}
    for name in backends:
        k = kernels.get(name)
        t_u, vals_u = best(lambda: k.bcc_values(ptr_u, idx_u, ptr_v, idx_v), args.repeat)
        t_v, vals_v = best(lambda: k.bcc_values(ptr_v, idx_v, ptr_u, idx_u), args.repeat)
        t_r, rbf = best(lambda: k.rbf_sum(x, wx, y, wy, 0.5), args.repeat)
        results[name] = (vals_u, vals_v, rbf)
        rows.append((name, t_u, t_v, t_r))

    print(f"\n{'backend':8s} {'bcc U (ms)':>11s} {'bcc V (ms)':>11s} {'rbf {0}x{0} (ms)'.format(n):>18s}")
    for name, t_u, t_v, t_r in rows:
        print(f"{name:8s} {t_u * 1e3:11.1f} {t_v * 1e3:11.1f} {t_r * 1e3:18.1f}")
    if len(rows) == 2:
        (_, pu, pv, pr), (_, cu, cv, cr) = sorted(rows, key=lambda r: r[0] != "python")
        print(f"speed-up  {pu / cu:10.1f}x {pv / cv:10.1f}x {pr / cr:17.1f}x")
        a, b = results["python"], results["cython"]
        same = np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        print(f"\nbcc identical across backends: {same}; "
              f"rbf relative difference: {abs(a[2] - b[2]) / abs(b[2]):.1e}")
    print(f"(bcc sample sizes: {len(bcc(graph, 'U'))} U nodes, {len(bcc(graph, 'V'))} V nodes)")


if __name__ == "__main__":
    main()
