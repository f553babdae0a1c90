import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from gptw.cli import _positions, load_schema, main, render_markdown


def _builtin_doc(tmp_path, name):
    out = tmp_path / "theory.json"
    assert main(["builtin", name, "--out", str(out)]) == 0
    return out


def _run(tmp_path, *args):
    out = tmp_path / "report.json"
    code = main([*args, "--out", str(out)])
    return code, json.loads(out.read_text()) if out.exists() else None


def test_builtin_documents(tmp_path):
    doc = json.loads(_builtin_doc(tmp_path, "qubit").read_text())
    assert doc["k"] == 4 and doc["group"]["kind"] == "named"
    doc = json.loads(_builtin_doc(tmp_path, "square_gbit").read_text())
    assert len(doc["geometry"]["vertices"]) == 4
    doc = json.loads(_builtin_doc(tmp_path, "quantum2").read_text())
    assert doc["k"] == 16 and len(doc["group"]["generators"]) == 15
    jsonschema.validate(doc, load_schema("theory"))


def test_unknown_builtin_exit_3(capsys):
    assert main(["builtin", "dodecahedron"]) == 3
    assert "unknown builtin" in capsys.readouterr().err


def test_check_qubit_exit_0(tmp_path):
    code, rep = _run(tmp_path, "check", str(_builtin_doc(tmp_path, "qubit")), "--samples", "2000")
    assert code == 0 and rep["status"] == "pass"
    assert [c["id"] for c in rep["checks"]] == ["cr", "tl", "nse", "all-effects", "interact"]
    jsonschema.validate(rep, load_schema("report"))


def test_check_square_exit_1_with_witness(tmp_path):
    code, rep = _run(tmp_path, "check", str(_builtin_doc(tmp_path, "square_gbit")), "--postulates", "nse")
    assert code == 1
    w = rep["checks"][0]["witness"]
    assert w["E"] == [0.5, 0.5, 0.0] and w["omega_prime"] == [1.0, -1.0, 0.0]


def test_malformed_json_exit_3(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"k": 4,\n  "geometry": }')
    assert main(["check", str(p)]) == 3
    assert "bad.json:2:" in capsys.readouterr().err


def test_schema_violation_reports_line_and_column(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "k": 4,\n  "geometry": {"kind": "cube"},\n  "group": {"kind": "named", "d": 3}\n}')
    assert main(["check", str(p)]) == 3
    err = capsys.readouterr().err
    assert "bad.json:3:24" in err and "geometry/kind" in err


def test_inconsistent_document_exit_3(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"k": 5, "geometry": {"kind": "ball", "d": 3},
                             "group": {"kind": "named", "d": 3}}))
    assert main(["check", str(p)]) == 3


def test_declared_composite_inconclusive_exit_2(tmp_path):
    doc = json.loads(_builtin_doc(tmp_path, "ball(3)").read_text())
    doc["composite"] = {"rule": "declared", "k": 16}
    p = tmp_path / "decl.json"
    p.write_text(json.dumps(doc))
    code, rep = _run(tmp_path, "check", str(p), "--postulates", "tl,interact")
    assert code == 2 and rep["status"] == "inconclusive"


def test_reconstruct_distorted_ball(tmp_path):
    L0 = np.array([[1, 0, 0, 0], [0.2, 2, 0.3, 0], [0, 0, 0.7, 0.1], [0.1, 0, 0, 1.4]])
    doc = {"name": "distorted", "k": 4, "geometry": {"kind": "ball", "d": 3, "frame": L0.tolist()},
           "group": {"kind": "named", "named": "ball", "d": 3, "frame": L0.tolist()}}
    p = tmp_path / "dist.json"
    p.write_text(json.dumps(doc))
    code, rep = _run(tmp_path, "reconstruct", str(p), "--samples", "2000")
    assert code == 0
    assert rep["equivalence"]["condition_number"] == pytest.approx(np.linalg.cond(L0), rel=1e-10)
    jsonschema.validate(rep, load_schema("report"))


@pytest.mark.parametrize("name,stage", [("ball(2)", "dimension"), ("classical(2)", "continuity")])
def test_reconstruct_failures(tmp_path, name, stage):
    code, rep = _run(tmp_path, "reconstruct", str(_builtin_doc(tmp_path, name)), "--samples", "1000")
    assert code == 1 and rep["stopped_at"] == stage


def test_seed_determinism_and_env(tmp_path, monkeypatch):
    doc = _builtin_doc(tmp_path, "ball(3)")
    reports = []
    for env in ("4", None):
        if env:
            monkeypatch.setenv("GPTW_SEED", env)
        else:
            monkeypatch.delenv("GPTW_SEED", raising=False)
        args = ["check", str(doc), "--postulates", "cr,nse", "--samples", "500"]
        if env is None:
            args += ["--seed", "4"]
        _, rep = _run(tmp_path, *args)
        for c in rep["checks"]:
            c.pop("duration")
        reports.append(rep)
    assert reports[0] == reports[1] and reports[0]["settings"]["seed"] == 4


def test_markdown_is_pure_function_of_report(tmp_path, capsys):
    code, rep = _run(tmp_path, "check", str(_builtin_doc(tmp_path, "square_gbit")), "--postulates", "cr,nse")
    md = render_markdown(rep)
    assert md == render_markdown(json.loads(json.dumps(rep)))
    assert "| nse | fail |" in md and "Witness for `nse`" in md


def test_positions_index():
    text = '{"a": [1, {"b": 2}], "c": "x"}'
    pos = _positions(text)
    assert text[pos[("a", 1, "b")]] == "2"
    assert text[pos[("c",)]] == '"'


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "gptw", "builtin", "classical(2)"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["k"] == 2
