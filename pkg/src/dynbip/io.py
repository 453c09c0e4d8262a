"""On-disk formats: CSV edge lists, JSON metadata sidecars and ground-truth files."""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from . import __version__
from .anomaly import AnomalyLedger
from .attributes import Column, TabularDataset, _is_number, format_value
from .graph import DynamicBipartiteGraph, NodeRef, Side, Snapshot

LABELS = ("normal", "anomalous")


class FormatError(ValueError):
    pass


def meta_path(edges_path):
    root, _ = os.path.splitext(edges_path)
    return root + ".meta.json"


def dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_edge_list(graph, path, attrs=None, meta=None):
    """Write ``t,u,v,label[,attr_0..attr_k]`` rows sorted by (t, u, v).

    ``attrs`` is the attribute table that each edge's ``attr_row`` points into.
    A ``.meta.json`` sidecar is written next to the file.
    """
    t, u, v, anomalous, rows = graph.columns()
    order = np.lexsort((v, u, t))
    header = ["t", "u", "v", "label"]
    cols = []
    if attrs is not None:
        if np.any(rows < 0):
            raise ValueError("attributes given but some edges have no attribute row")
        header += [f"attr_{k}" for k in range(len(attrs.columns))]
        cols = [attrs.data[c.name][rows] for c in attrs.columns]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in order:
            rec = [int(t[i]), f"U{u[i]}", f"V{v[i]}", LABELS[int(anomalous[i])]]
            rec += [format_value(c[i]) for c in cols]
            w.writerow(rec)
    info = {"tool": "dynbip", "version": __version__, "T": graph.T,
            "size_u": graph.size_u, "size_v": graph.size_v,
            "edges": len(graph), "anomalous_edges": int(anomalous.sum())}
    if attrs is not None:
        info["attribute_columns"] = [{"name": c.name, "kind": c.kind} for c in attrs.columns]
    info.update(meta or {})
    dump_json(info, meta_path(path))


def read_meta(edges_path):
    p = meta_path(edges_path)
    if not os.path.exists(p):
        return {}
    with open(p, encoding="utf-8") as fh:
        return json.load(fh)


def read_edge_list(path, T=None, size_u=None, size_v=None):
    """Parse an edge list; returns ``(graph, attrs_or_None, meta)``.

    Sizes and horizon come from the arguments, then the sidecar, then the
    largest index seen. Edge ``k`` of the file gets attribute row ``k``.
    """
    meta = read_meta(path)
    ts, us, vs, labs, raw = [], [], [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if header[:4] != ["t", "u", "v", "label"]:
            raise FormatError(f"{path}:1: header must start with t,u,v,label")
        attr_names = header[4:]
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                t = int(row[0])
                a, b = NodeRef.parse(row[1]), NodeRef.parse(row[2])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            if t < 0 or a.side is not Side.U or b.side is not Side.V:
                raise FormatError(f"{path}:{lineno}: expected t >= 0, a U node and a V node")
            label = row[3].strip()
            if label not in LABELS:
                raise FormatError(f"{path}:{lineno}: label must be normal or anomalous")
            ts.append(t)
            us.append(a.index)
            vs.append(b.index)
            labs.append(label == "anomalous")
            raw.append(row[4:])
    t = np.array(ts, dtype=np.int64)
    u = np.array(us, dtype=np.int64)
    v = np.array(vs, dtype=np.int64)
    lab = np.array(labs, dtype=bool)

    def pick(arg, key, seen):
        val = arg if arg is not None else meta.get(key)
        val = int(val) if val is not None else seen
        if val < seen:
            raise FormatError(f"{path}: {key}={val} but data needs at least {seen}")
        return max(val, 1)

    T = pick(T, "T", int(t.max()) + 1 if len(t) else 1)
    size_u = pick(size_u, "size_u", int(u.max()) + 1 if len(u) else 1)
    size_v = pick(size_v, "size_v", int(v.max()) + 1 if len(v) else 1)

    attrs = None
    row_ids = np.arange(len(t), dtype=np.int64)
    if attr_names:
        kinds = {c["name"]: c["kind"] for c in meta.get("attribute_columns", [])}
        names = [c["name"] for c in meta.get("attribute_columns", [])]
        if len(names) != len(attr_names):
            names = attr_names
        columns, data = [], {}
        for j, name in enumerate(names):
            cells = [r[j].strip() for r in raw]
            kind = kinds.get(name) or ("numeric" if all(_is_number(c) for c in cells)
                                       else "categorical")
            columns.append(Column(name, kind))
            data[name] = [float(c) for c in cells] if kind == "numeric" else cells
        attrs = TabularDataset(columns, data)
    else:
        row_ids[:] = -1

    order = np.argsort(t, kind="stable")
    bounds = np.searchsorted(t[order], np.arange(T + 1))
    snaps = []
    for k in range(T):
        idx = order[bounds[k]:bounds[k + 1]]
        snaps.append(Snapshot.build(k, u[idx], v[idx], lab[idx], row_ids[idx]))
    return DynamicBipartiteGraph(T, size_u, size_v, tuple(snaps)), attrs, meta


def ledger_to_json(ledger: AnomalyLedger, extra=None):
    def ints(sets):
        return [sorted(int(x) for x in s) for s in sets]

    doc = {"T": ledger.T, "window": list(ledger.window),
           "attackers_u": ints(ledger.attackers_u), "attackers_v": ints(ledger.attackers_v),
           "victims_u": ints(ledger.victims_u), "victims_v": ints(ledger.victims_v),
           "infected": [sorted(str(n) for n in s) for s in ledger.infected],
           "anomalous_edges_per_snapshot": [0] * ledger.T}
    for t, _ in ledger.anomalous_edges:
        doc["anomalous_edges_per_snapshot"][t] += 1
    doc.update(extra or {})
    return doc


def write_ground_truth(ledger, path, extra=None):
    dump_json(ledger_to_json(ledger, extra), path)


def read_ground_truth(path, graph=None):
    """Load a ledger. Edge identities are rebuilt from ``graph``'s labels when given."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        T = int(doc["T"])
        sets = {k: tuple(frozenset(int(x) for x in s) for s in doc[k])
                for k in ("attackers_u", "attackers_v", "victims_u", "victims_v")}
        infected = tuple(frozenset(NodeRef.parse(x) for x in s) for s in doc["infected"])
        window = tuple(doc["window"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed ground truth ({exc})") from None
    edges = frozenset()
    if graph is not None:
        edges = frozenset((s.t, int(i)) for s in graph.snapshots
                          for i in np.flatnonzero(s.anomalous))
    return AnomalyLedger(T, window, sets["attackers_u"], sets["attackers_v"],
                         sets["victims_u"], sets["victims_v"], infected, edges)
