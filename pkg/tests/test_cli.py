import io
import json
import shutil
import subprocess

import pytest

from dualize.catalog import THREE, export_fixture, load_fixture, three_ops
from dualize.cli import run
from dualize.fileformat import dump_structure, load_ego, load_partial, load_relation


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def r5_file(tmp_path):
    p = tmp_path / "r5.rel"
    p.write_text("relation r5 5\n00000\n0010a\n011a1\n11111\n", encoding="utf-8")
    return str(p)


def test_homs_prints_six(r5_file):
    code, out, _ = call("homs", "--algebra", "three", "--relation", r5_file)
    assert code == 0
    assert out.splitlines()[0] == "6 homomorphisms from r5 to three"
    assert len(out.splitlines()) == 7


def test_purify_labels():
    code, out, _ = call("purify", "--sentences", "basis_Q1")
    assert code == 0
    assert [line.split("]")[0] + "]" for line in out.splitlines()] == ["[1a]", "[1b]", "[2a]", "[2b]", "[3]"]


def test_purify_output_reparses():
    from dualize.uhlogic import parse_sentences
    code, out, _ = call("purify", "--sentences", "sigma_basis_three")
    assert code == 0
    assert len(parse_sentences(out, load_fixture("three_sigma").payload.signature)) == 18


@pytest.mark.slow
def test_check_full_three_h_exit_0():
    code, out, _ = call("check", "--ego", "three_h", "--full", "--arity-bound", "3")
    assert code == 0, out


def test_check_failure_witness_reparses():
    code, out, _ = call("check", "--ego", "three_empty", "--full", "--json")
    assert code == 1
    data = json.loads(out)
    assert data["verdict"] == "fail" and data["exit"] == 1
    name, r = load_relation(data["checks"][0]["witness"], THREE)
    assert len(r) == 2


def test_op_rich_witness_reparses():
    code, out, _ = call("op-rich", "--ego", "three0", "--relation", "r5", "--json")
    assert code == 1
    _, h = load_partial(json.loads(out)["witness"], THREE)
    assert h.domain == load_fixture("r5").payload


def test_op_rich_true():
    code, _, _ = call("op-rich", "--ego", "three_h", "--relation", "r5")
    assert code == 0


def test_hom_minimal_verdicts(tmp_path):
    p = tmp_path / "sigma.rel"
    p.write_text("relation gs 3\n0 0 0\n0 1 a\n1 1 1\n", encoding="utf-8")
    assert call("hom-minimal", "--algebra", "three", "--relation", str(p))[0] == 0
    code, out, _ = call("hom-minimal", "--algebra", "three", "--relation", "r5")
    assert code == 1 and "partial w 5" in out
    code, out, _ = call("hom-minimal", "--algebra", "three", "--arity-bound", "2", "--json")
    assert code == 0 and json.loads(out)["count"] > 0


def test_cadef_formula_and_failure():
    code, out, _ = call("cadef", "--ego", "three0", "--relation", "r5")
    assert code == 0 and "g(v5)" in out
    code, out, _ = call("cadef", "--ego", "three_empty", "--relation", "r5", "--json")
    assert code == 1 and json.loads(out)["witness"]


def test_clone_listing():
    code, out, _ = call("clone", "--ego", "three0", "--arity", "1", "--json")
    data = json.loads(out)
    assert code == 0 and data["count"] == 3
    assert {m["term"] for m in data["members"]} == {"v1", "f(v1)", "g(v1)"}


def test_reduct():
    assert call("reduct", "--ego", "three0", "--of", "three_h")[0] == 0
    code, out, _ = call("reduct", "--ego", "three_h", "--of", "three0")
    assert code == 1 and "partial w 2" in out
    assert call("reduct", "--ego", "three0", "--of", "three_h", "--equivalent")[0] == 1


def test_m_alpha_compare():
    code, out, _ = call("m-alpha", "--algebra", "three", "--arity-bound", "2", "--compare", "three_h")
    assert code == 1
    assert out.startswith("ego three_alpha2 over three")


def test_new_from_old_json():
    code, out, _ = call("new-from-old", "--algebra", "three", "--ego0", "three0", "--ego1", "three_sigma",
                        "--sentences", "sigma_basis_three", "--minimize", "--json")
    assert code == 0
    data = json.loads(out)
    E = load_ego(data["ego"], lambda n: load_fixture(n).payload)
    assert three_ops()["h"] in E.operations.values()


def test_new_from_old_precondition_failure():
    code, _, err = call("new-from-old", "--algebra", "three", "--ego0", "three_empty", "--ego1", "three_sigma",
                        "--sentences", "sigma_basis_three")
    assert code == 1 and "precondition failed" in err


def test_transfer(tmp_path):
    Q0 = load_fixture("Q0").payload.as_structure()
    p = tmp_path / "x.str"
    p.write_text(dump_structure(Q0), encoding="utf-8")
    code, out, _ = call("transfer", "--structure", str(p), "--from", "Q0", "--to", "Q1", "--json")
    assert code == 0 and json.loads(out)["in_dual_class"]


def test_fixtures_list_and_export():
    code, out, _ = call("fixtures")
    assert code == 0 and "three_h" in out
    code, out, _ = call("fixtures", "three_h")
    assert code == 0 and out.strip() == export_fixture("three_h").strip()


def test_ego_file_resolves_algebra_next_to_it(tmp_path):
    (tmp_path / "three.alg").write_text(export_fixture("three"), encoding="utf-8")
    text = export_fixture("three_h").replace("over three", "over three.alg")
    (tmp_path / "e.ego").write_text(text, encoding="utf-8")
    assert call("op-rich", "--ego", str(tmp_path / "e.ego"), "--relation", "r5")[0] == 0


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["homs", "--algebra", "three"],
    ["homs", "--algebra", "nofile", "--relation", "r5"],
    ["homs", "--algebra", "three0", "--relation", "r5"],
    ["check", "--ego", "three_h", "--arity-bound", "0"],
    ["check", "--ego", "three_h", "--jobs", "0"],
])
def test_usage_errors_exit_2(argv):
    code, out, err = call(*argv)
    assert code == 2 and err.startswith("error:") and out == ""


def test_bad_file_reports_line(tmp_path):
    p = tmp_path / "bad.rel"
    p.write_text("relation r 2\n0 0\n0 z\n", encoding="utf-8")
    code, _, err = call("homs", "--algebra", "three", "--relation", str(p))
    assert code == 2 and "line 3" in err


def test_bad_jobs_environment(monkeypatch):
    monkeypatch.setenv("DUALIZE_JOBS", "many")
    assert call("fixtures")[0] == 2
    monkeypatch.setenv("DUALIZE_JOBS", "2")
    assert call("fixtures")[0] == 0


def test_bound_exceeded_exit_3():
    code, out, err = call("clone", "--ego", "three0", "--arity", "40", "--json")
    assert code == 3 and json.loads(out)["verdict"] == "inconclusive" and "inconclusive" in err


@pytest.mark.skipif(shutil.which("dualize") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["dualize", "homs", "--algebra", "three", "--relation", "r5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("6 homomorphisms")
