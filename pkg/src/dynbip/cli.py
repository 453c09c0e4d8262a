"""Command-line entry points.

Exit codes: 0 success, 1 runtime error, 2 invalid configuration or input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from . import attributes as attrs_mod
from . import config as cfg
from .anomaly import inject, measured_burstiness, verify_propagation
from .distributions import fit_cauchy, fit_gamma
from .evaluation import evaluate
from .generator import GeneratorConfig, generate
from .graph import DynamicBipartiteGraph, Side, degrees
from .io import (FormatError, dump_json, read_edge_list, read_ground_truth,
                 write_edge_list, write_ground_truth)

log = logging.getLogger("dynbip")

EDGES = "edges.csv"
TRUTH = "ground_truth.json"
REPORT = "report.json"
MIN_FIT_EDGES = 100


def truncate(graph, T):
    if T >= graph.T:
        return graph
    return DynamicBipartiteGraph(T, graph.size_u, graph.size_v, graph.snapshots[:T])


def generate_graph(pc: cfg.PipelineConfig, threads=1):
    """Run the generator on the padded horizon and cut back to the requested one."""
    return truncate(generate(pc.generator, threads=threads), pc.T)


def attach_attributes(graph, ledger, reference, label_column, seed):
    table = attrs_mod.read_table(reference, label_column)
    normal, anomalous = attrs_mod.split_by_label(table, seed)
    if not normal.n_rows or not anomalous.n_rows:
        raise ValueError("reference dataset split produced an empty class")
    return attrs_mod.map_attributes(graph, ledger, attrs_mod.fit(normal, seed),
                                    attrs_mod.fit(anomalous, seed), seed)


def run_pipeline(pc: cfg.PipelineConfig, out_dir, threads=1):
    """generate -> inject -> attributes -> export. Returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    graph = generate_graph(pc, threads)
    ledger = None
    meta = {"config": pc.to_dict(), "seeds": {"generator": pc.generator.seed}}
    if pc.anomaly is not None:
        graph, ledger = inject(graph, pc.anomaly, pc.anomaly_seed)
        meta["seeds"]["anomaly"] = pc.anomaly_seed
    table = None
    if pc.reference_dataset_path is not None:
        mapped = attach_attributes(graph, ledger, pc.reference_dataset_path,
                                   pc.label_column, pc.attributes_seed)
        graph, table = mapped.graph, mapped.table
        meta["seeds"]["attributes"] = pc.attributes_seed
    paths = {"edges": os.path.join(out_dir, EDGES)}
    write_edge_list(graph, paths["edges"], table, meta)
    if ledger is not None:
        paths["ground_truth"] = os.path.join(out_dir, TRUTH)
        write_ground_truth(ledger, paths["ground_truth"], {"seed": pc.anomaly_seed})
    return paths


def fit_generator_config(graph, cycle_length=24, seed=0) -> GeneratorConfig:
    """Estimate generator parameters from an observed graph.

    Cauchy parameters come from within-cycle positions of edge and node
    timestamps. Gamma parameters come from the aggregate degrees of
    non-isolated nodes.
    """
    n = len(graph)
    if n < MIN_FIT_EDGES:
        raise ValueError(f"need at least {MIN_FIT_EDGES} edges to fit, found {n}")
    ts = np.arange(graph.T)
    phase = ts % cycle_length + 0.5
    edge_t = np.repeat(phase, graph.edge_counts())
    node_u = np.repeat(phase, [len(s.active_u) for s in graph.snapshots])
    node_v = np.repeat(phase, [len(s.active_v) for s in graph.snapshots])
    du, dv = degrees(graph, Side.U), degrees(graph, Side.V)
    return GeneratorConfig(
        T=GeneratorConfig.padded_T(graph.T, cycle_length), cycle_length=cycle_length,
        size_u=graph.size_u, size_v=graph.size_v, total_edges=n,
        cauchy_u=fit_cauchy(node_u), cauchy_v=fit_cauchy(node_v), cauchy_e=fit_cauchy(edge_t),
        gamma_u=fit_gamma(du[du > 0]), gamma_v=fit_gamma(dv[dv > 0]), seed=seed)


# -- commands --------------------------------------------------------------

def _pipeline_from_args(args):
    if args.config and args.preset:
        raise cfg.ConfigError("preset", "give either --config or --preset, not both")
    if args.preset:
        doc = cfg.preset(args.preset)
    elif args.config:
        with open(args.config, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise cfg.ConfigError("<file>", f"invalid JSON: {exc}") from None
    else:
        raise cfg.ConfigError("config", "one of --config or --preset is required")
    if args.seed is not None:
        gen = doc.get("generator", doc)
        if isinstance(gen, dict):
            gen["seed"] = args.seed
        for key in ("anomaly", "attributes"):
            if isinstance(doc.get(key), dict):
                doc[key]["seed"] = args.seed
    return cfg.parse_pipeline(doc)


def cmd_generate(args):
    pc = _pipeline_from_args(args)
    os.makedirs(args.out, exist_ok=True)
    graph = generate_graph(pc, args.threads)
    path = os.path.join(args.out, EDGES)
    write_edge_list(graph, path, meta={"config": {"generator": cfg.generator_to_dict(pc.generator, pc.T)},
                                       "seeds": {"generator": pc.generator.seed}})
    print(path)


def cmd_run(args):
    pc = _pipeline_from_args(args)
    paths = run_pipeline(pc, args.out or pc.output_directory, args.threads)
    for p in paths.values():
        print(p)


def _anomaly_from_args(args):
    doc = {}
    if args.anomaly_config:
        with open(args.anomaly_config, encoding="utf-8") as fh:
            doc = json.load(fh)
        doc = doc.get("anomaly", doc)
    flags = {"initial_attackers_u": args.attackers_u, "initial_attackers_v": args.attackers_v,
             "anomaly_percentage": args.ap, "burstiness": args.burstiness,
             "propagation_ratio": args.propagation, "side_mode": args.side,
             "window": list(args.window) if args.window else None}
    doc.update({k: v for k, v in flags.items() if v is not None})
    if args.propagation is not None:
        doc["propagation_enabled"] = args.propagation > 0
    seed = args.seed if args.seed is not None else doc.get("seed", 0)
    return cfg.parse_anomaly(doc), seed


def cmd_inject(args):
    acfg, seed = _anomaly_from_args(args)
    graph, table, meta = read_edge_list(args.edges)
    if table is not None:
        log.warning("dropping attribute columns; run 'attrs' after 'inject'")
        table = None
        meta.pop("attributes", None)
    graph, ledger = inject(graph, acfg, seed)
    os.makedirs(args.out, exist_ok=True)
    meta = dict(meta, anomaly=dict(cfg.anomaly_to_dict(acfg), seed=seed))
    meta.setdefault("seeds", {})["anomaly"] = seed
    out = os.path.join(args.out, EDGES)
    write_edge_list(graph, out, table, _sidecar_extra(meta))
    truth = os.path.join(args.out, TRUTH)
    extra = {"seed": seed, "propagation_observed": verify_propagation(ledger)}
    if any(ledger.initial_victims_u) or any(ledger.initial_victims_v):
        extra["measured_burstiness"] = measured_burstiness(ledger)
    write_ground_truth(ledger, truth, extra)
    print(out)
    print(truth)


def _sidecar_extra(meta):
    keep = ("config", "seeds", "anomaly", "attributes")
    return {k: meta[k] for k in keep if k in meta}


def cmd_attrs(args):
    graph, _, meta = read_edge_list(args.edges)
    seed = args.seed if args.seed is not None else 0
    mapped = attach_attributes(graph, None, args.reference, args.label_column, seed)
    os.makedirs(args.out, exist_ok=True)
    meta = dict(meta, attributes={"reference_dataset_path": args.reference,
                                  "label_column": args.label_column, "seed": seed})
    meta.setdefault("seeds", {})["attributes"] = seed
    out = os.path.join(args.out, EDGES)
    write_edge_list(mapped.graph, out, mapped.table, _sidecar_extra(meta))
    print(out)


def _load_for_eval(path, truth):
    graph, table, _ = read_edge_list(path)
    ledger = read_ground_truth(truth, graph) if truth else None
    edge_attrs = attrs_mod.edge_attributes(graph, table) if table is not None else None
    return graph, ledger, edge_attrs


def cmd_eval(args):
    ga, la, aa = _load_for_eval(args.a, args.truth_a)
    gb, lb, ab = _load_for_eval(args.b, args.truth_b)
    report = evaluate(ga, la, aa, gb, lb, ab, bandwidth=args.bandwidth)
    text = report.to_json()
    if args.out:
        os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def cmd_fit(args):
    graph, _, meta = read_edge_list(args.edges)
    cycle = args.cycle_length or meta.get("config", {}).get("generator", {}).get("cycle_length", 24)
    fitted = fit_generator_config(graph, cycle, args.seed or 0)
    doc = {"generator": cfg.generator_to_dict(fitted, graph.T)}
    cfg.parse_pipeline(json.loads(json.dumps(doc)))  # must re-validate
    if args.out:
        dump_json(doc, args.out)
    print(json.dumps(doc, indent=2, sort_keys=True))


def cmd_presets(args):
    for name in sorted(cfg.PRESETS):
        g = cfg.PRESETS[name]["generator"]
        print(f"{name:16s} |U|={g['size_u']:<7d} |V|={g['size_v']:<6d} "
              f"|E|={g['total_edges']:<7d} T={g['T']}")


def build_parser():
    p = argparse.ArgumentParser(prog="dynbip", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"dynbip {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def source(sp):
        sp.add_argument("--config", help="pipeline or generator JSON")
        sp.add_argument("--preset", help="named preset (see 'dynbip presets')")
        sp.add_argument("--seed", type=int, help="override every seed in the config")
        sp.add_argument("--threads", type=int, default=1)

    g = sub.add_parser("generate", help="generate a dynamic bipartite graph")
    source(g)
    g.add_argument("--out", default="out")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="generate, inject, attach attributes and export")
    source(r)
    r.add_argument("--out", help="output directory (default: output.directory)")
    r.set_defaults(func=cmd_run)

    i = sub.add_parser("inject", help="inject anomalies into an edge list")
    i.add_argument("edges")
    i.add_argument("--anomaly-config", help="JSON with an 'anomaly' object")
    i.add_argument("--ap", type=float, help="anomaly percentage in (0, 1]")
    i.add_argument("--burstiness", type=int)
    i.add_argument("--propagation", type=float, help="propagation ratio; > 0 enables propagation")
    i.add_argument("--attackers-u", type=int)
    i.add_argument("--attackers-v", type=int)
    i.add_argument("--side", choices=["u", "v", "both"])
    i.add_argument("--window", type=int, nargs=2, metavar=("START", "END"))
    i.add_argument("--seed", type=int)
    i.add_argument("--out", default="out")
    i.set_defaults(func=cmd_inject)

    a = sub.add_parser("attrs", help="attach synthetic edge attributes")
    a.add_argument("edges")
    a.add_argument("--reference", required=True, help="reference tabular CSV")
    a.add_argument("--label-column")
    a.add_argument("--seed", type=int)
    a.add_argument("--out", default="out")
    a.set_defaults(func=cmd_attrs)

    e = sub.add_parser("eval", help="MMD report comparing two edge lists")
    e.add_argument("a", help="reference edge list")
    e.add_argument("b", help="candidate edge list")
    e.add_argument("--truth-a")
    e.add_argument("--truth-b")
    e.add_argument("--bandwidth", type=float)
    e.add_argument("--out", help="write the report JSON here as well")
    e.set_defaults(func=cmd_eval)

    f = sub.add_parser("fit", help="suggest a generator config from an edge list")
    f.add_argument("edges")
    f.add_argument("--cycle-length", type=int)
    f.add_argument("--seed", type=int)
    f.add_argument("--out")
    f.set_defaults(func=cmd_fit)

    ps = sub.add_parser("presets", help="list presets")
    ps.set_defaults(func=cmd_presets)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (cfg.ConfigError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
