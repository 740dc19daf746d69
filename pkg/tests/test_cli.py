import csv
import io
import json
import subprocess
import sys

import pytest

from ffslice import cli, linsub, projspace
from ffslice.errors import ConsistencyError

from conftest import CONIC, NODAL_CUBIC, QUADRIC


@pytest.fixture(autouse=True)
def restore_budgets():
    saved = projspace.POINT_BUDGET, linsub.SUBSPACE_BUDGET
    yield
    projspace.POINT_BUDGET, linsub.SUBSPACE_BUDGET = saved


def run(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_formula(capsys):
    code, out, _ = run(capsys, "formula", "--d", "3")
    assert code == 0
    lim = json.loads(out)["limit"]
    assert [(lim[k]["num"], lim[k]["den"]) for k in "0123"] == [("1", "3"), ("1", "2"), ("0", "1"), ("1", "6")]


def test_exact(capsys, write_spec):
    path = write_spec("conic3.var", 3, 2, 1, 2, CONIC)
    code, out, _ = run(capsys, "exact", "--spec", path, "--N", "1")
    assert code == 0
    (lvl,) = json.loads(out)["levels"]
    assert lvl["counts"] == {"0": "3", "1": "4", "2": "6"} and lvl["total"] == "13"


def test_exit_codes(capsys, write_spec, tmp_path, monkeypatch):
    assert run(capsys, "exact", "--spec", str(tmp_path / "missing.var"))[0] == 2
    bad = tmp_path / "bad.var"
    bad.write_text('p=3\nn=2\nm=1\nd=2\npoly="x0 +* x1"\n')
    code, _, err = run(capsys, "exact", "--spec", str(bad))
    assert code == 2 and "position" in err
    assert run(capsys, "formula")[0] == 2
    assert run(capsys, "formula", "--d", "0")[0] == 2
    path = write_spec("c.var", 3, 2, 1, 2, CONIC)
    assert run(capsys, "exact", "--spec", path, "--N", "2", "--strategy-x")[0] == 2
    assert run(capsys, "exact", "--spec", path, "--N", "3", "--max-points", "100")[0] == 3
    assert run(capsys, "mc", "--spec", path, "--samples", "0")[0] == 2

    def boom(*a, **k):
        raise ConsistencyError("forced")
    monkeypatch.setattr(cli, "convergence_report", boom)
    assert run(capsys, "exact", "--spec", path)[0] == 4


def test_subspace_budget(capsys, write_spec):
    path = write_spec("q.var", 3, 3, 2, 2, QUADRIC)
    assert run(capsys, "mu", "--spec", path, "--N", "1", "--max-subspaces", "10")[0] == 3


def test_csv_matches_json(capsys, write_spec):
    path = write_spec("cubic.var", 3, 2, 1, 3, NODAL_CUBIC)
    _, js, _ = run(capsys, "converge", "--spec", path, "--N-list", "1,2")
    _, cs, _ = run(capsys, "converge", "--spec", path, "--N-list", "1,2", "--format", "csv")
    report = json.loads(js)
    rows = list(csv.DictReader(io.StringIO(cs)))
    assert rows
    for row in rows:
        lvl = report["levels"][int(row["N"]) - 1]
        assert lvl["p"][row["k"]]["num"] == row["p_num"]
        assert lvl["p"][row["k"]]["den"] == row["p_den"]
        assert report["limit"][row["k"]]["num"] == row["limit_num"]


def test_converge_plot_file(capsys, write_spec, tmp_path):
    path = write_spec("c.var", 3, 2, 1, 2, CONIC)
    out = tmp_path / "r.json"
    assert run(capsys, "converge", "--spec", path, "--N-list", "1,2,3", "--out", str(out))[0] == 0
    plot = (tmp_path / "r.json.plot.tsv").read_text().splitlines()
    assert plot[0] == "q_N\tdeviation" and [r.split("\t")[0] for r in plot[1:]] == ["3", "9", "27"]
    explicit = tmp_path / "dev.tsv"
    run(capsys, "converge", "--spec", path, "--N-list", "1", "--plot", str(explicit))
    assert explicit.read_text().startswith("q_N\tdeviation\n3\t")


def test_tangency_and_mu(capsys, write_spec):
    path = write_spec("cubic.var", 3, 2, 1, 3, NODAL_CUBIC)
    code, out, _ = run(capsys, "tangency", "--spec", path)
    rep = json.loads(out)["simple_tangency"]
    assert code == 0 and rep["found"] and rep["pattern"] == [2, 1]
    q = write_spec("q.var", 3, 3, 2, 2, QUADRIC)
    code, out, _ = run(capsys, "tangency", "--spec", q, "--trials", "5")
    assert json.loads(out)["simple_tangency"]["found"]
    code, out, _ = run(capsys, "mu", "--spec", q, "--N", "1")
    data = json.loads(out)
    assert (data["irreducible_slices"], data["planes"]) == ("24", "40")
    assert (data["mu"]["num"], data["mu"]["den"]) == ("3", "5")


def test_probe_and_sanity(capsys, write_spec):
    path = write_spec("line.var", 3, 2, 1, 1, "x0")
    code, out, _ = run(capsys, "probe-conjecture", "--spec", path, "--N", "1", "--samples", "300")
    rep = json.loads(out)
    assert code == 0 and sum(int(v) for v in rep["counts"].values()) == 300
    code, out, _ = run(capsys, "sanity", "--spec", path)
    assert code == 0 and json.loads(out)["degree_sanity"]["max_count"] == 1


def test_threads_byte_identical(write_spec):
    path = write_spec("c.var", 3, 2, 1, 2, CONIC)
    outs = []
    for threads in ("1", "4", "1"):
        res = subprocess.run([sys.executable, "-m", "ffslice.cli", "mc", "--spec", path, "--N", "2",
                              "--samples", "2000", "--seed", "0x2a", "--threads", threads],
                             capture_output=True, check=True)
        outs.append(res.stdout)
    assert outs[0] == outs[1] == outs[2]
