from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from qubetree import count_leaves, leaves
from qubetree.cli import main
from qubetree.serialize import loads

RECORDS = "class=od,date=20200101/20200102,param=t/z/u\n"


@pytest.fixture
def rec(tmp_path):
    p = tmp_path / "records.txt"
    p.write_text(RECORDS)
    return p


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_build_count_stats_axes_ls(capsys, rec, tmp_path):
    q = tmp_path / "q.json"
    assert run(capsys, "build", "--records", rec, "-o", q)[0] == 0
    assert count_leaves(loads(q.read_text())) == 6
    assert run(capsys, "count", q)[1] == "6\n"
    assert run(capsys, "stats", q)[1] == "leaves=6 nodes=4 distinct=4 depth=3\n"
    assert run(capsys, "axes", q)[1] == "class=od\ndate=20200101/20200102\nparam=t/u/z\n"
    assert run(capsys, "ls", q)[1] == "root\n  class=od\n    date=20200101/20200102\n      param=t/u/z\n"


def test_build_options_agree(capsys, rec, tmp_path):
    outs = []
    for extra in ([], ["--strategy", "pairwise", "--batch", "1"], ["--no-early-compress"]):
        code, out, _ = run(capsys, "build", "--records", rec, *extra)
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]


def test_select_reads_stdin(capsys, rec, monkeypatch):
    _, built, _ = run(capsys, "build", "--records", rec)
    code, out, _ = run(capsys, "select", "-", "--constraint", "param=t", stdin=built, monkeypatch=monkeypatch)
    assert code == 0 and count_leaves(loads(out)) == 2


def test_setops_and_compress(capsys, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    a.write_text("root\n  p=1\n  p=2\n")
    b.write_text("root\n  p=2/3\n")
    assert run(capsys, "compress", a)[1] == run(capsys, "union", a, a)[1]
    assert {t for t in leaves(loads(run(capsys, "union", a, b)[1]))} == {(("p", i),) for i in (1, 2, 3)}
    assert set(leaves(loads(run(capsys, "intersect", a, b)[1]))) == {(("p", 2),)}
    assert set(leaves(loads(run(capsys, "diff", a, b)[1]))) == {(("p", 1),)}


def test_exit_codes(capsys, tmp_path, rec):
    bad = tmp_path / "bad.txt"
    bad.write_text("root\n\tp=1\n")
    code, _, err = run(capsys, "count", bad)
    assert code == 2 and "tab" in err
    assert run(capsys, "count", tmp_path / "missing.json")[0] == 2
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "select", rec)[0] == 1
    assert run(capsys, "mockstore", "--from", rec, "--grid", "3by4", "-o", tmp_path)[0] == 1
    assert run(capsys, "--help")[0] == 0
    conflict = tmp_path / "c.txt"
    conflict.write_text("a=1\na=1,b=2\n")
    assert run(capsys, "build", "--records", conflict)[0] == 2


def test_mockstore_and_plan(capsys, tmp_path):
    recs = tmp_path / "r.txt"
    recs.write_text("step=" + "/".join(map(str, range(96))) + ",param=t\n")
    q, store = tmp_path / "q.json", tmp_path / "store"
    run(capsys, "build", "--records", recs, "-o", q)
    code, out, _ = run(capsys, "mockstore", "--from", q, "--grid", "32x32", "-o", store)
    assert code == 0 and out == f"fields=96 cells=1024 bytes={96 * (16 + 8 * 1024)}\n"
    code, out, _ = run(capsys, "plan", q, "--constraint", "param=t", "--feature", "point:0,0", "--store", store,
                       "--execute")
    assert out == "ranges=96 bytes=768 fields=96 read=768 header_read=1536 values=96\n"
    assert run(capsys, "plan", q, "--constraint", "param=t", "--feature", "point:x", "--store", store)[0] == 1
    assert run(capsys, "plan", q, "--constraint", "param=t", "--feature", "point:99,0", "--store", store)[0] == 2


def test_bench_writes_csv_and_png(capsys, tmp_path):
    out = tmp_path / "c.csv"
    code, text, _ = run(capsys, "bench", "construction", "--shapes", "flat", "--sizes", "20", "40", "--reps", "1",
                        "-o", out)
    assert code == 0 and text.startswith("construction/flat r2=")
    assert len(list(csv.reader(out.open()))) == 3
    assert out.with_suffix(".png").stat().st_size > 0


def test_module_entry_point_pipeline(tmp_path, rec):
    """build | select | count through real processes."""
    py = [sys.executable, "-m", "qubetree"]
    built = subprocess.run(py + ["build", "--records", str(rec)], capture_output=True, text=True, check=True).stdout
    json.loads(built)
    sel = subprocess.run(py + ["select", "-", "--constraint", "date=20200102"], input=built, capture_output=True,
                         text=True, check=True).stdout
    n = subprocess.run(py + ["count", "-"], input=sel, capture_output=True, text=True, check=True).stdout
    assert n == "3\n"
