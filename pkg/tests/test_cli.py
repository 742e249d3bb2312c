import json
import math

import pytest

from pprviz.cli import main, run_bench
from pprviz.service import Workspace, visualize

from conftest import two_triangles_edges, write_edges


@pytest.fixture()
def triangle_el(tmp_path):
    el = tmp_path / "tri.el"
    write_edges(el, two_triangles_edges(bridge=True))
    return el


@pytest.fixture()
def triangle_ws_dir(triangle_el, tmp_path):
    ws_dir = tmp_path / "ws"
    rc = main(["preprocess", "-i", str(triangle_el), "-o", str(ws_dir),
               "-k", "5", "--symmetrize"])
    assert rc == 0
    return ws_dir


def test_preprocess_ok(triangle_ws_dir, capsys):
    assert (triangle_ws_dir / "manifest.json").is_file()


def test_preprocess_bad_k(triangle_el, tmp_path):
    rc = main(["preprocess", "-i", str(triangle_el),
               "-o", str(tmp_path / "ws2"), "-k", "1"])
    assert rc == 1


def test_preprocess_missing_input(tmp_path):
    rc = main(["preprocess", "-i", str(tmp_path / "none.el"),
               "-o", str(tmp_path / "ws")])
    assert rc == 1


def test_preprocess_rerun_up_to_date(triangle_el, triangle_ws_dir, capsys):
    rc = main(["preprocess", "-i", str(triangle_el), "-o",
               str(triangle_ws_dir), "-k", "5", "--symmetrize"])
    assert rc == 0
    assert "up-to-date" in capsys.readouterr().out


def test_layout_json_matches_library(triangle_ws_dir, tmp_path):
    out = tmp_path / "layout.json"
    rc = main(["layout", "-w", str(triangle_ws_dir), "--node", "root",
               "--seed", "5", "--emit", "json", "-o", str(out)])
    assert rc == 0
    ws = Workspace.load(triangle_ws_dir)
    expected = visualize(ws, ws.hierarchy.root_id, seed=5).to_bytes()
    assert out.read_bytes() == expected


def test_layout_svg(triangle_ws_dir, tmp_path):
    out = tmp_path / "layout.svg"
    rc = main(["layout", "-w", str(triangle_ws_dir), "--node", "root",
               "--emit", "svg", "-o", str(out)])
    assert rc == 0
    svg = out.read_text()
    assert svg.count("<circle") == 2


def test_layout_csv(triangle_ws_dir, tmp_path, capsys):
    rc = main(["layout", "-w", str(triangle_ws_dir), "--node", "root",
               "--emit", "csv"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "id,x,y"
    assert len(lines) == 3
    for line in lines[1:]:
        _, x, y = line.split(",")
        float(x), float(y)  # plain decimal floats, no repr wrappers


def test_layout_unknown_node(triangle_ws_dir):
    rc = main(["layout", "-w", str(triangle_ws_dir), "--node", "424242"])
    assert rc == 1


def test_layout_no_workspace(tmp_path, monkeypatch):
    monkeypatch.delenv("PPRVIZ_WORKSPACE", raising=False)
    rc = main(["layout", "--node", "root"])
    assert rc == 1


def test_layout_workspace_env(triangle_ws_dir, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PPRVIZ_WORKSPACE", str(triangle_ws_dir))
    rc = main(["layout", "--node", "root", "--emit", "csv"])
    assert rc == 0


def test_layout_single_level_json(tmp_path, capsys):
    el = tmp_path / "tiny.el"
    el.write_text("0 1\n1 0\n")
    rc = main(["layout", "-i", str(el), "--single-level", "--emit", "json",
               "--seed", "3"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["children"]) == 2
    assert len(doc["coords"]) == 2


def test_layout_single_level_default_seed(tmp_path, capsys):
    el = tmp_path / "tiny.el"
    el.write_text("0 1\n1 0\n")
    rc = main(["layout", "-i", str(el), "--single-level", "--emit", "json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["seed"] == 42


def test_bench_csv_rows(triangle_ws_dir, tmp_path, capsys):
    rc = main(["bench", "-w", str(triangle_ws_dir), "--paths", "3",
               "--seed", "7", "--engines", "taupush,pi-oracle"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "level,engine,paths,mean_ms,median_ms,pdist_ms,layout_ms"
    body = [ln.split(",") for ln in lines[1:]]
    engines = {row[1] for row in body}
    assert engines == {"taupush", "pi-oracle"}
    levels = {row[0] for row in body}
    assert len(levels) >= 1


def test_bench_zero_paths(triangle_ws_dir):
    rc = main(["bench", "-w", str(triangle_ws_dir), "--paths", "0"])
    assert rc == 1


def test_bench_unknown_engine(triangle_ws_dir):
    rc = main(["bench", "-w", str(triangle_ws_dir), "--engines", "warp"])
    assert rc == 1


def test_bench_records_structure(triangle_ws_dir):
    ws = Workspace.load(triangle_ws_dir)
    records, rows = run_bench(ws, paths=2, seed=1, engines=["taupush"])
    assert all(r["engine"] == "taupush" for r in records)
    assert {"level", "engine", "paths", "mean_ms", "median_ms", "pdist_ms",
            "layout_ms"} == set(rows[0])


def test_metrics_equilateral_layout_file(tmp_path, capsys):
    layout = {"ids": [0, 1, 2],
              "xy": [[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]],
              "edges": [[0, 1], [1, 2], [2, 0]]}
    p = tmp_path / "layout.json"
    p.write_text(json.dumps(layout))
    rc = main(["metrics", "--layout-file", str(p)])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["nd"] == pytest.approx(3.0)
    assert doc["ulcv"] == pytest.approx(0.0, abs=1e-12)


def test_metrics_coincident_inf(tmp_path, capsys):
    layout = {"ids": [0, 1], "xy": [[0, 0], [0, 0]]}
    p = tmp_path / "layout.json"
    p.write_text(json.dumps(layout))
    rc = main(["metrics", "--layout-file", str(p)])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["nd"] == "inf"


def test_metrics_missing_file(tmp_path):
    rc = main(["metrics", "--layout-file", str(tmp_path / "none.json")])
    assert rc == 1


def test_metrics_live_workspace(triangle_ws_dir, capsys):
    rc = main(["metrics", "-w", str(triangle_ws_dir), "--node", "root"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert "within_bounds" in doc
