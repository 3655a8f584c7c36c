import io
import json
import math

import pytest

from tilecohom.cli import INCONCLUSIVE, INPUT_ERROR, COMPUTE_ERROR, OK, main, parse_doubling, parse_grid
from tilecohom.cochain import PECochain
from tilecohom.delone import LabeledDeloneSet, lattice_sample
from tilecohom.substitution import DATA_DIR


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, out, err = run(*argv)
    return code, json.loads(out)


def test_supertile():
    code, out, _ = run("supertile", "--rule", "fibonacci.json", "--type", "a", "--n", "3")
    assert code == OK and out.strip() == "abaab"


def test_window_listing():
    code, out, _ = run("window", "--seed", "a|a", "--n", "2")
    assert code == OK
    assert out.splitlines()[0].startswith("6 tiles")
    code, out, _ = run("window", "--seed", "a|a", "--n", "1")
    assert out.splitlines()[0].startswith("4 tiles")


def test_invalid_rule(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"alphabet": ["a"], "substitution": {"a": "a"}, "lengths": {"a": 1}}))
    code, _, err = run("supertile", "--rule", str(bad), "--type", "a", "--n", "2")
    assert code == INPUT_ERROR and "expanding" in err
    code, _, err = run("supertile", "--rule", str(tmp_path / "none.json"), "--type", "a", "--n", "2")
    assert code == INPUT_ERROR and "not found" in err
    (tmp_path / "junk.json").write_text("{")
    assert run("supertile", "--rule", str(tmp_path / "junk.json"), "--type", "a", "--n", "2")[0] == INPUT_ERROR
    assert run("supertile", "--type", "c", "--n", "2")[0] == INPUT_ERROR


def test_bad_arguments():
    assert run("supertile", "--type", "a", "--n", "-1")[0] == INPUT_ERROR
    assert run("nope")[0] == INPUT_ERROR
    assert run("weakdemo", "--x", "3/2")[0] == INPUT_ERROR
    assert run("weakdemo", "--x", "7/10", "--levels", "5:99")[0] == INPUT_ERROR
    assert run("smooth", "--cochain", "a1_b2.json", "--eps", "2")[0] == INPUT_ERROR
    assert run("delone-check", "--points", "x.json", "--r", "0", "--R", "1")[0] == INPUT_ERROR


def test_class_and_conjugacy():
    code, d = run_json("conjugacy", "--deformation", "equal_length_deformation.json")
    assert code == OK and d["verdict"] == "ConjugateToOriginal"
    assert d["certificate"]["kind"] == "BoundedExact"
    code, d = run_json("conjugacy", "--deformation", "a1_b2_deformation.json")
    assert code == OK and d["verdict"] == "NotConjugate" and d["growth"] == "phi"
    code, d = run_json("class", "--deformation", "identity_deformation.json")
    assert code == OK and d["equals_fundamental_class"] is True
    assert d["class"] == d["fundamental_class"]
    code, d = run_json("class", "--deformation", "a1_b2_deformation.json")
    assert d["equals_fundamental_class"] is False
    assert d["class_text"] == "(1)*iota(0,a) + (2)*iota(0,b)"


def test_inconclusive_exit(tmp_path):
    # period doubling has eigenvalue -1; this class differs from the
    # fundamental class only along it, so the answer is evidence-only
    rule = {"alphabet": ["a", "b"], "substitution": {"a": "ab", "b": "aa"},
            "lengths": {"a": {"a": "1", "b": "0", "D": 0}, "b": {"a": "1", "b": "0", "D": 0}}}
    new = {"terms": [{"level": 0, "type": "a", "coeff": {"a": "5/4", "b": "0", "D": 0}},
                     {"level": 0, "type": "b", "coeff": {"a": "1/2", "b": "0", "D": 0}}]}
    p = tmp_path / "pd.json"
    p.write_text(json.dumps({"rule": rule, "new_lengths": new}))
    code, d = run_json("conjugacy", "--deformation", str(p))
    assert code == INCONCLUSIVE and d["verdict"] == "Inconclusive"
    assert run("class", "--deformation", str(p))[0] == INCONCLUSIVE


def test_rs_table(tmp_path):
    code, d = run_json("rs", "--cochain", "deltax.json", "--rsweep", "10:160", "--level", "16",
                       "--out", str(tmp_path))
    assert code == OK
    assert d["exact"]["float"] == 1.0
    assert [row["r"] for row in d["sweep"]] == ["10", "20", "40", "80", "160"]
    rows = (tmp_path / "rs.csv").read_text().splitlines()
    assert rows[0] == "r,center,average,deviation"
    assert all(line.split(",")[2] == "1.0" for line in rows[1:])
    assert (tmp_path / "rs.svg").read_text().startswith("<svg")


def test_weakdemo(tmp_path):
    code, d = run_json("weakdemo", "--x", "7/10", "--levels", "5:25", "--defect-max", "3", "--out", str(tmp_path))
    assert code == OK
    assert abs(d["fitted_exponent"] - math.log(0.7 * (1 + 5 ** 0.5) / 2)) < 0.02 * d["predicted_exponent"]
    assert d["is_coboundary"]["bounded"] is False
    assert all(not row["bounded"] for row in d["strongly_pe_defect"]["rows"])
    assert (tmp_path / "weakdemo.csv").exists()


def test_smooth(tmp_path):
    code, d = run_json("smooth", "--rule", "fibonacci_rational", "--cochain", "a1_b2.json", "--eps", "0.2",
                       "--level", "16", "--out", str(tmp_path))
    assert code == OK
    lo, hi = d["chosen"]["slope_range"]
    assert d["chosen"]["monotone"] and 0 < lo <= hi
    code, d = run_json("smooth", "--cochain", "zero_average.json")
    assert code == COMPUTE_ERROR and d["certificate"]["sign"] == 0


def test_delone_commands(tmp_path):
    s = lattice_sample(5)
    p = tmp_path / "z2.json"
    p.write_text(json.dumps(s.to_json()))
    code, d = run_json("delone-check", "--points", str(p), "--r", "1", "--R", "3/4")
    assert code == OK and d["passed"]
    code, d = run_json("voronoi", "--points", str(p), "--r", "1", "--R", "3/4", "--out", str(tmp_path))
    assert code == OK and all(c["area"] == "1" for c in d["cells"])
    assert (tmp_path / "voronoi.svg").exists()
    big = lattice_sample(22)
    q = tmp_path / "big.json"
    q.write_text(json.dumps(big.to_json()))
    code, d = run_json("delone-dist", "--points", str(q), "--other", str(q), "--eps-grid", "1/20:1/10:1/40")
    assert code == OK and d["distance"] == "1/20"
    code, _, err = run("delone-dist", "--points", str(q), "--other", str(q), "--eps-grid", "1/40")
    assert code == INPUT_ERROR and "window" in err


def test_determinism(tmp_path):
    for k in (1, 2):
        out = tmp_path / f"run{k}"
        assert run("conjugacy", "--deformation", "equal_length_deformation.json", "--seed", "3", "--out", str(out))[0] == OK
        assert run("rs", "--cochain", "deltax.json", "--rsweep", "10:40", "--level", "14", "--out", str(out))[0] == OK
        assert run("weakdemo", "--x", "3/4", "--defect-max", "2", "--out", str(out))[0] == OK
    for name in ("conjugacy.json", "rs.json", "rs.csv", "weakdemo.json", "weakdemo.csv"):
        assert (tmp_path / "run1" / name).read_bytes() == (tmp_path / "run2" / name).read_bytes()


def test_input_files_roundtrip():
    for name in ("deltax.json", "a1_b2.json", "zero_average.json"):
        obj = json.loads((DATA_DIR / name).read_text())
        assert PECochain.from_json(obj).to_json() == obj
    for name in ("equal_length_deformation.json", "a1_b2_deformation.json", "identity_deformation.json"):
        obj = json.loads((DATA_DIR / name).read_text())
        assert PECochain.from_json(obj["new_lengths"]).to_json() == obj["new_lengths"]
    s = lattice_sample(3, perturb=0.1)
    assert LabeledDeloneSet.from_json(s.to_json()).to_json() == s.to_json()


def test_parsers():
    assert parse_doubling("10:160") == (10, 20, 40, 80, 160)
    assert parse_doubling("3,5") == (3, 5)
    assert parse_grid("1/10:3/10:1/10") == tuple(map(__import__("fractions").Fraction, ("1/10", "1/5", "3/10")))
