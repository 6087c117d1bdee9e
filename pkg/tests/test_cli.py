import csv
import io
import json

import pytest

from sixvertex.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_compute_r_csv(capsys):
    code, out = run(capsys, "compute-r", "--I", "1", "--J", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["i", "j", "i_out", "j_out", "numerator", "denominator"]
    assert len(rows) == 16
    assert sum(r["numerator"] != "0" for r in rows) == 6


def test_compute_r_q_and_p_agree(capsys):
    _, a = run(capsys, "compute-r", "--I", "2", "--J", "1", "--q", "1/9")
    _, b = run(capsys, "compute-r", "--I", "2", "--J", "1", "--p", "1/3")
    assert a == b


def test_compute_r_rejects_non_square_q(capsys):
    assert main(["compute-r", "--I", "1", "--J", "1", "--q", "1/2"]) == 1


def test_compute_r_routes_agree(capsys):
    outs = {run(capsys, "compute-r", "--I", "2", "--J", "2", "--route", r)[1] for r in ("single", "double", "pole")}
    assert len(outs) == 1


def test_rational_arguments_reject_decimals():
    with pytest.raises(SystemExit):
        main(["compute-r", "--I", "1", "--J", "1", "--lambda", "0.5"])


def test_verify_ybe(capsys):
    code, out = run(capsys, "verify-ybe", "--I1", "1", "--I2", "2", "--I3", "1")
    assert code == 0
    assert json.loads(out)["residual_kind"] == "ExactZero"


def test_verify_ybe_generic(capsys):
    code, out = run(capsys, "verify-ybe", "--I1", "1", "--I2", "g:2/5", "--I3", "g:3/7", "--max-total", "3")
    assert code == 0


def test_verify_tetra(capsys):
    code, out = run(capsys, "verify-tetra", "--random", "3", "--max-index", "2")
    assert code == 0
    assert json.loads(out)["residual_kind"] == "ExactZero"


def test_verify_symmetries_and_recurrences(capsys):
    assert run(capsys, "verify-symmetries", "--I", "1", "--J", "2")[0] == 0
    assert run(capsys, "verify-recurrences", "--I", "2", "--J", "1")[0] == 0


def test_build_q_and_transfer(capsys):
    code, out = run(capsys, "build-q", "--sign", "plus", "--I", "1", "--M", "2", "--sector", "1")
    assert code == 0 and len(out.strip().splitlines()) == 5
    code, out = run(capsys, "build-transfer", "--J", "1", "--I", "1", "--M", "2", "--sector", "1", "--kind", "finite")
    assert code == 0 and out.startswith("row,col,numerator,denominator")


def test_build_q_strict_failure(capsys):
    assert main(["build-q", "--sign", "minus", "--I", "1", "--M", "1", "--sector", "0", "--phi", "3/2", "--strict"]) == 1


def test_verify_funcrel(capsys, tmp_path):
    path = tmp_path / "report.json"
    code = main(["verify-funcrel", "--suite", "tq", "--grid", "small", "--json", str(path)])
    assert code == 0
    records = json.loads(path.read_text())
    assert isinstance(records, list) and records
    assert all(r["residual_kind"] == "ExactZero" and r["max_abs"] == "0" for r in records)
    assert set(records[0]) == {"name", "params", "residual_kind", "max_abs", "seconds"}


def test_verify_funcrel_deterministic_across_workers(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify-funcrel", "--suite", "all", "--no-timing", "--json", str(a)]) == 0
    assert main(["verify-funcrel", "--suite", "all", "--no-timing", "--threads", "3", "--json", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_bethe(capsys):
    code, out = run(capsys, "bethe", "--sector", "1")
    assert code == 0
    sets = json.loads(out)["sets"]
    assert {s["sign"] for s in sets} == {"+", "-"}
    assert all(s["pass"] for s in sets)
