import json

import jsonschema
import pytest

from normalform.cli import main
from normalform.errors import SchemaError, UnknownBuiltin
from normalform.problems import builtin_ids, builtin_problem, load_problem, problem_from_dict, schema_path
from normalform.reports import sanitize, zero_points_csv


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_builtin_lookup():
    p = problem_from_dict({"map": {"kind": "builtin", "id": "pitchfork_z2"}})
    assert p.dims == (2, 1) and p.action is not None and p.action.group.order == 2
    assert builtin_problem("pitchfork").name == "pitchfork_z2"
    assert {"pitchfork_z2", "cusp", "constant_rank_demo", "flat_u1_torus", "flat_u1_wedge", "circle_cubic"} <= set(builtin_ids())


def test_expr_problem(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"name": "demo", "map": {"kind": "expr", "outputs": ["y + x^2"], "vars": ["x", "y"]}}))
    p = load_problem(path)
    assert p.dims == (2, 1) and p.action is None
    assert p.settings["grid"] == 201


def test_unknown_builtin_lists_ids():
    with pytest.raises(UnknownBuiltin) as exc:
        problem_from_dict({"map": {"kind": "builtin", "id": "pitchfrok"}})
    assert "pitchfork_z2" in str(exc.value)


@pytest.mark.parametrize(
    "data,pointer",
    [
        ({"map": {"kind": "expr", "outputs": ["x"], "vars": ["x"]}, "settings": {"radius": -1}}, "/settings/radius"),
        ({"map": {"kind": "expr", "outputs": ["x"], "vars": ["x"]}, "base_point": [0, 0]}, "/base_point"),
        ({"map": {"kind": "expr", "outputs": ["x"], "vars": ["x"]}, "dims": [2, 1]}, "/dims"),
        ({"map": {"kind": "expr", "outputs": ["x +"], "vars": ["x"]}}, "/map/outputs"),
        (
            {
                "map": {"kind": "expr", "outputs": ["x"], "vars": ["x"]},
                "group": {"kind": "finite", "domain_generators": [[[1, 0], [0, 1]]], "target_generators": [[[1]]]},
            },
            "/group/domain_generators/0",
        ),
        ({"map": {"kind": "expr", "outputs": ["x"], "vars": ["x"]}, "extra": 1}, ""),
    ],
)
def test_schema_errors_carry_pointer(data, pointer):
    with pytest.raises(SchemaError) as exc:
        problem_from_dict(data)
    assert exc.value.pointer == pointer


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(SchemaError):
        load_problem(path)


def test_classify_pitchfork(capsys):
    code, out, _ = _run(capsys, "classify", "--problem", "pitchfork")
    assert code == 0
    assert json.loads(out)["payload"]["classification"] == "General"


def test_kuranishi_torus(capsys):
    code, out, _ = _run(capsys, "kuranishi", "--problem", "flat_u1_torus", "--grid", "11", "--seed", "0")
    payload = json.loads(out)["payload"]
    assert code == 0
    assert payload["virtual_dimension"] == 0 and payload["homology"] == [1, 2, 1]
    assert payload["H"] == {"kind": "torus", "dim": 1, "order": 1}
    assert payload["strata"][0]["dim_estimate"] == 2


def test_factorize_expr(capsys, tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"map": {"kind": "expr", "outputs": "y + x^2; x", "vars": ["x", "y"]}, "base_point": [1, 0]}))
    code, out, _ = _run(capsys, "factorize", "--problem", str(path))
    nf = json.loads(out)["payload"]["normal_form"]
    assert code == 0 and nf["rank"] == 2 and nf["reconstruction_residual"] < 1e-12


def test_reports_validate_and_are_deterministic(capsys):
    schema = json.loads(schema_path("report.json").read_text())
    for cmd in ("factorize", "index", "normal-form", "reduce", "equivariant", "complex"):
        code, a, _ = _run(capsys, cmd, "--problem", "pitchfork", "--seed", "3")
        _, b, _ = _run(capsys, cmd, "--problem", "pitchfork", "--seed", "3")
        assert code == 0 and a == b
        jsonschema.validate(json.loads(a), schema)
        assert json.loads(a)["timestamp"] == "1970-01-01T00:00:00Z"


def test_csv_and_output_file(capsys, tmp_path):
    out = tmp_path / "z.csv"
    code, _, _ = _run(capsys, "stratify", "--problem", "pitchfork", "--grid", "21", "--format", "csv", "--output", str(out))
    lines = out.read_text().splitlines()
    assert code == 0 and lines[0] == "x1,x2,stratum"
    assert all(len(l.split(",")) == 3 for l in lines[1:])


def test_exit_codes(capsys, tmp_path):
    assert _run(capsys, "classify", "--problem", "nope")[0] == 2
    assert _run(capsys, "factorize", "--problem", "cusp", "--format", "csv")[0] == 2
    assert _run(capsys, "classify", "--problem", "cusp", "--point", "1,2,3")[0] == 2
    assert _run(capsys, "classify", "--problem", str(tmp_path / "missing.json"))[0] == 2
    path = tmp_path / "noneq.json"
    path.write_text(json.dumps({
        "map": {"kind": "expr", "outputs": ["x + y^2"], "vars": ["x", "y"]},
        "group": {"kind": "finite", "domain_generators": [[[-1, 0], [0, 1]]], "target_generators": [[[-1]]]},
    }))
    code, _, err = _run(capsys, "equivariant", "--problem", str(path))
    assert code == 1 and "EquivarianceViolation" in err


def test_sanitize_and_csv():
    warnings = []
    assert sanitize({"a": float("inf"), "b": [1, 2.5]}, warnings) == {"a": None, "b": [1, 2.5]}
    assert warnings and "/a" in warnings[0]
    assert zero_points_csv([[0.5, 1.0]], ["C0"]).splitlines() == ["x1,x2,stratum", "0.5,1.0,C0"]
