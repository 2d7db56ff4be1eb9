import json
import math
import re
import subprocess
import sys

import numpy as np
import pytest

from graphdirac.cli import COMMANDS, main
from graphdirac.errors import DimensionMismatch, SchemaError
from graphdirac.problem import load_problem, preset_document, preset_names, problem_from_dict, resolve_problem

TRIANGLE = {
    "graph": {"vertices": [1, 2, 3], "edges": [{"src": 1, "dst": 2}, {"src": 2, "dst": 3}, {"src": 3, "dst": 1}]},
    "space": {"kind": "standard"},
}


def _write(tmp_path, doc, name="p.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# parsing

def test_parse_triangle_preset():
    pf = resolve_problem("c3_standard")
    assert pf.graph.n_vertices == 3 and pf.space.kind == "standard"
    assert pf.case == "simple"
    np.testing.assert_array_equal(pf.L, np.zeros((3, 3)))


def test_parse_file(tmp_path):
    pf = load_problem(_write(tmp_path, TRIANGLE))
    assert pf.graph.lengths().tolist() == [1.0, 1.0, 1.0]
    assert pf.dims == {1: 1, 2: 1, 3: 1}


def test_projection_of_wrong_size(tmp_path):
    k4 = preset_document("k4_standard")
    k4["space"] = {"kind": "custom", "custom": {"matrices": {str(v): [[1, 0], [0, 1]] for v in [1, 2, 3, 4]}}}
    with pytest.raises(DimensionMismatch):
        load_problem(_write(tmp_path, k4))


def test_magnetic_alpha():
    pf = resolve_problem("c3_magnetic_pi")
    assert pf.space.kind == "magnetic"
    assert list(pf.space.alpha) == pytest.approx([math.pi, 0, 0])
    doc = dict(TRIANGLE, space={"kind": "magnetic", "alpha": {"0": 1.0, "1": 2.0, "2": 0.5}})
    assert list(problem_from_dict(doc).space.alpha) == [1.0, 2.0, 0.5]
    with pytest.raises(SchemaError):
        problem_from_dict(dict(TRIANGLE, space={"kind": "magnetic"}))


def test_complex_entries_and_L_blocks():
    doc = dict(TRIANGLE, L={"1": [[[2, 0]]], "3": [[0.5]]}, case="enlarged0")
    pf = problem_from_dict(doc)
    np.testing.assert_array_equal(np.diag(pf.L), [2, 0, 0.5])
    with pytest.raises(DimensionMismatch):
        problem_from_dict(dict(TRIANGLE, L={"1": [[1, 0], [0, 1]]}))
    pf = problem_from_dict(dict(TRIANGLE, L=3))
    np.testing.assert_array_equal(pf.L, 3 * np.eye(3))


@pytest.mark.parametrize(
    "patch, where",
    [
        ({"space": {"kind": "nonsense"}}, "space.kind"),
        ({"case": "enlarged7"}, "case"),
        ({"graph": {"vertices": [1], "edges": [{"src": 1}]}}, "graph.edges[0]"),
        ({"solver": {"grid_points": 1}}, "solver.grid_points"),
    ],
)
def test_schema_errors_name_the_field(patch, where):
    with pytest.raises(SchemaError, match=re.escape(where)):
        problem_from_dict({**TRIANGLE, **patch})


def test_json_syntax_error_has_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"graph": {\n  "vertices": [1,, 2]}}')
    with pytest.raises(SchemaError, match="line 2"):
        load_problem(path)


def test_unknown_preset():
    with pytest.raises(SchemaError, match="no problem file or preset"):
        resolve_problem("no_such_thing")


def test_every_preset_loads():
    names = preset_names()
    assert len(names) >= 15
    for name in names:
        resolve_problem(name)


# commands

def test_index_on_triangle(capsys):
    code, out, _ = _run(capsys, "index", "c3_standard", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["results"]["index"] == 0
    gb = [c for c in rep["checks"] if c["name"] == "gauss_bonnet"][0]
    assert gb["pass"] and gb["expected"] == gb["got"]


def test_fuzz_k4(capsys, tmp_path):
    doc = preset_document("k4_standard")
    doc["dims"] = {str(v): 1 for v in [1, 2, 3, 4]}
    code, out, _ = _run(capsys, "fuzz", _write(tmp_path, doc), "--trials", "50", "--seed", "7",
                        "--format", "json")
    rep = json.loads(out)
    assert code == 0
    assert rep["results"]["matches"] == 50 and rep["results"]["expected"] == -2
    assert rep["seed"] == 7
    assert [row[1] for row in rep["tables"]["indices"]["rows"]] == [-2] * 50


def test_metric_spectrum_dirichlet(capsys):
    code, out, _ = _run(capsys, "metric-spectrum", "interval_dirichlet", "--format", "json")
    rows = json.loads(out)["tables"]["eigenvalues"]["rows"]
    assert code == 0
    got = [r[0] for r in rows]
    want = [(k * math.pi) ** 2 for k in (1, 2, 3)]
    assert all(abs(a - b) <= 1e-8 * b for a, b in zip(got, want)) and len(got) == 3


@pytest.mark.parametrize("command", COMMANDS)
def test_every_command_succeeds(capsys, command):
    preset = {
        "metric-spectrum": "loop_standard",
        "scatter": "k4_robin",
        "metric-kernel": "c3_enlarged0",
    }.get(command, "k4_standard")
    code, out, err = _run(capsys, command, preset)
    assert code == 0, err
    assert out.rstrip().endswith("PASS")


def test_text_and_json_agree(capsys):
    _, text, _ = _run(capsys, "betti", "c4_standard")
    _, js, _ = _run(capsys, "betti", "c4_standard", "--format", "json")
    rep = json.loads(js)
    assert "b0" in text and rep["results"]["b0"] == 1 and rep["results"]["b1"] == 1


def test_reports_are_byte_identical(capsys):
    for argv in (["spectrum", "k4_standard", "--seed", "3"], ["fuzz", "c3_standard", "--trials", "5"],
                 ["relations", "octahedron_standard", "--format", "json"]):
        first = _run(capsys, *argv)[1]
        second = _run(capsys, *argv)[1]
        assert first == second


def test_timings_only_on_request(capsys):
    rep = json.loads(_run(capsys, "betti", "c3_standard", "--format", "json")[1])
    assert not rep.get("timings")
    rep = json.loads(_run(capsys, "betti", "c3_standard", "--format", "json", "--timings")[1])
    assert rep["timings"]["total"] >= 0


def test_digest_depends_on_inputs(capsys):
    a = json.loads(_run(capsys, "betti", "c3_standard", "--format", "json")[1])["inputs_digest"]
    b = json.loads(_run(capsys, "betti", "c4_standard", "--format", "json")[1])["inputs_digest"]
    c = json.loads(_run(capsys, "betti", "c3_standard", "--format", "json", "--seed", "1")[1])["inputs_digest"]
    assert len({a, b, c}) == 3


def test_failing_check_exits_one(capsys, tmp_path):
    # a matching tolerance far below rounding makes the spectral checks fail
    code, out, _ = _run(capsys, "relations", "k4_standard", "--tol", "1e-30")
    assert code == 1 and out.rstrip().endswith("FAIL")


def test_invalid_input_exits_two(capsys, tmp_path):
    doc = dict(TRIANGLE, case="enlarged7")
    code, out, err = _run(capsys, "betti", _write(tmp_path, doc))
    assert code == 2 and "SchemaError" in err and "case" in err
    code, _, err = _run(capsys, "metric-spectrum", "c3_enlarged0")
    assert code == 2 and "BadProblem" in err


def test_list_presets(capsys):
    code, out, _ = _run(capsys, "--list-presets")
    assert code == 0 and "c3_standard" in out.split()


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "graphdirac.cli", "betti", "c3_standard", "--format", "json"],
                         capture_output=True, text=True, check=True).stdout
    assert json.loads(out)["results"]["b1"] == 1
