import csv
import json

import numpy as np
import pytest

from dynbip import config as cfg
from dynbip.cli import fit_generator_config, main
from dynbip.generator import generate
from dynbip.io import read_edge_list, read_ground_truth, write_edge_list

from conftest import make_config

GEN = {"T": 24, "cycle_length": 24, "size_u": 50, "size_v": 20, "total_edges": 1000,
       "seed": 7, "min_nodes_per_snapshot": 1,
       "cauchy": {"location": 12, "scale": 6},
       "gamma": {"shape": 0.8, "location": 1, "scale": 5}}


def write_reference(path, n=400, seed=0):
    gen = np.random.default_rng(seed)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["amount", "hour", "kind", "label"])
        for i in range(n):
            anomalous = i % 10 == 0
            w.writerow([round(gen.normal(50 if anomalous else 5, 1), 4),
                        int(gen.integers(0, 24)), "ab"[int(gen.integers(0, 2))],
                        "1" if anomalous else "0"])
    return path


def write_config(path, **extra):
    doc = {"generator": dict(GEN)}
    doc.update(extra)
    path.write_text(json.dumps(doc))
    return path


def test_generate_writes_sorted_rows(tmp_path, capsys):
    assert main(["generate", "--config", str(write_config(tmp_path / "c.json")),
                 "--out", str(tmp_path / "o")]) == 0
    rows = list(csv.reader((tmp_path / "o" / "edges.csv").read_text().splitlines()))
    assert rows[0] == ["t", "u", "v", "label"] and len(rows) == 1001
    keys = [(int(r[0]), int(r[1][1:]), int(r[2][1:])) for r in rows[1:]]
    assert keys == sorted(keys)
    meta = json.loads((tmp_path / "o" / "edges.meta.json").read_text())
    assert meta["seeds"]["generator"] == 7 and meta["version"]


def test_missing_field_exit_2(tmp_path, capsys):
    doc = {"generator": dict(GEN, gamma={"shape": 0.8, "location": 1})}
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    assert main(["generate", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert "generator.gamma.scale" in capsys.readouterr().err


def test_bad_json_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{")
    assert main(["generate", "--config", str(p)]) == 2


def test_padding_truncates_back(tmp_path):
    doc = {"generator": dict(GEN, T=30)}
    pc = cfg.parse_pipeline(doc)
    assert pc.generator.T == 48 and pc.T == 30


def test_inject_conservation(tmp_path, capsys):
    assert main(["generate", "--config", str(write_config(tmp_path / "c.json")),
                 "--out", str(tmp_path / "g")]) == 0
    src = tmp_path / "g" / "edges.csv"
    graph, _, _ = read_edge_list(src)
    assert main(["inject", str(src), "--ap", "0.05", "--attackers-u", "1",
                 "--attackers-v", "1", "--burstiness", "2", "--seed", "3",
                 "--out", str(tmp_path / "i")]) == 0
    labels = [r[3] for r in csv.reader((tmp_path / "i" / "edges.csv").read_text().splitlines())][1:]
    expected = sum(int(np.floor(n * 0.05 + 1e-9)) for n in graph.edge_counts())
    assert labels.count("anomalous") == expected
    g2, _, _ = read_edge_list(tmp_path / "i" / "edges.csv")
    truth = read_ground_truth(tmp_path / "i" / "ground_truth.json", g2)
    assert len(truth.anomalous_edges) == expected
    assert json.loads((tmp_path / "i" / "ground_truth.json").read_text())["measured_burstiness"] == 0.5


def test_attrs_adds_columns(tmp_path, capsys):
    main(["generate", "--config", str(write_config(tmp_path / "c.json")),
          "--out", str(tmp_path / "g")])
    ref = write_reference(tmp_path / "ref.csv")
    assert main(["attrs", str(tmp_path / "g" / "edges.csv"), "--reference", str(ref),
                 "--label-column", "label", "--out", str(tmp_path / "a")]) == 0
    header = next(csv.reader((tmp_path / "a" / "edges.csv").read_text().splitlines()))
    assert header == ["t", "u", "v", "label", "attr_0", "attr_1", "attr_2"]
    _, table, _ = read_edge_list(tmp_path / "a" / "edges.csv")
    assert [c.name for c in table.columns] == ["amount", "hour", "kind"]


def test_eval_self_zero(tmp_path, capsys):
    main(["generate", "--config", str(write_config(tmp_path / "c.json")),
          "--out", str(tmp_path / "g")])
    capsys.readouterr()
    e = str(tmp_path / "g" / "edges.csv")
    assert main(["eval", e, e, "--out", str(tmp_path / "r.json")]) == 0
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["degree_mmd"] == 0 and report["time_mmd"]["mean"] == 0


def test_malformed_row_line_number(tmp_path, capsys):
    p = tmp_path / "e.csv"
    p.write_text("t,u,v,label\n0,U1,V2,normal\n0,V1,U2,normal\n")
    assert main(["eval", str(p), str(p)]) == 2
    assert "e.csv:3" in capsys.readouterr().err


def test_fit_round_trip(tmp_path, capsys):
    main(["generate", "--config", str(write_config(tmp_path / "c.json")),
          "--out", str(tmp_path / "g")])
    out = tmp_path / "fit.json"
    assert main(["fit", str(tmp_path / "g" / "edges.csv"), "--out", str(out)]) == 0
    pc = cfg.load(out)
    assert pc.generator.total_edges == 1000 and pc.generator.size_u == 50


def test_fit_errors(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["fit", str(empty)]) == 2
    few = tmp_path / "few.csv"
    few.write_text("t,u,v,label\n0,U0,V0,normal\n")
    assert main(["fit", str(few)]) == 1
    assert "at least 100" in capsys.readouterr().err


def test_fit_recovers_shape():
    g = generate(make_config(T=48, total_edges=20000, size_u=500, size_v=200))
    fitted = fit_generator_config(g, 24)
    assert abs(fitted.cauchy_e.location - 12) < 1.5
    assert fitted.total_edges == 20000


def test_edge_list_round_trip(tmp_path, small_config):
    g = generate(small_config)
    write_edge_list(g, tmp_path / "e.csv")
    back, attrs, meta = read_edge_list(tmp_path / "e.csv")
    assert back == g and attrs is None and meta["edges"] == 1000


def test_presets(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "pcore-desk" in out and "|E|=50000" in out
    for name in cfg.PRESETS:
        cfg.parse_pipeline(cfg.preset(name))
    with pytest.raises(cfg.ConfigError):
        cfg.preset("nope")


def test_pcore_desk_row_count(tmp_path, capsys):
    assert main(["generate", "--preset", "pcore-desk", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "edges.csv") as fh:
        assert sum(1 for _ in fh) == 50001
