"""Problem descriptions: JSON loading, validation and the built-in registry."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .calculus.maps import DifferentiableMap, parse_expression_map
from .errors import DimensionMismatch, ParseError, SchemaError, UnknownBuiltin
from .moduli.gauge import CellComplex, rose_torus, wedge_sphere
from .symmetry.groups import FiniteGroup, TorusGroup
from .symmetry.reps import GroupAction, TorusRep, trivial_rep

DEFAULT_SETTINGS = {"tol": 1e-10, "radius": 0.5, "grid": 201, "samples": 200}


def _expr(name, outputs, vars, base, group=None) -> dict:
    spec = {"name": name, "map": {"kind": "expr", "outputs": outputs, "vars": vars}, "base_point": base}
    if group is not None:
        spec["group"] = group
    return spec


def _u1(weights_domain, weights_target) -> dict:
    return {
        "kind": "torus",
        "rank": 1,
        "domain": {"weights": weights_domain},
        "target": {"weights": weights_target},
    }


def _gauge_group(cx: CellComplex) -> dict:
    return {
        "kind": "torus",
        "rank": cx.n_vertices,
        "domain": {"weights": [], "fixed_dims": len(cx.edges), "shift": cx.d0.astype(int).tolist()},
        "target": {"weights": [], "fixed_dims": len(cx.faces)},
    }


EXPRESSION_BUILTINS = {
    "pitchfork_z2": _expr(
        "pitchfork_z2", ["l*x - x^3"], ["x", "l"], [0.0, 0.0],
        {"kind": "finite", "domain_generators": [[[-1, 0], [0, 1]]], "target_generators": [[[-1]]]},
    ),
    "cusp": _expr("cusp", ["x", "y^3 + x*y"], ["x", "y"], [0.0, 0.0]),
    "constant_rank_demo": _expr("constant_rank_demo", ["x + y", "(x + y)^2"], ["x", "y"], [0.0, 0.0]),
    "circle_cubic": _expr(
        "circle_cubic", ["x*(x^2 + y^2)", "y*(x^2 + y^2)"], ["x", "y"], [0.0, 0.0], _u1([[1]], [[1]])
    ),
    "fold_square": _expr("fold_square", ["x^2"], ["x"], [0.0]),
    "graph_cubic": _expr("graph_cubic", ["y + x^3"], ["x", "y"], [0.0, 0.0]),
    "ls_demo": _expr("ls_demo", ["y - x^2", "y"], ["x", "y"], [0.0, 0.0]),
    "circle_level": _expr("circle_level", ["x^2 + y^2 - 1"], ["x", "y"], [1.0, 0.0]),
}
GAUGE_BUILTINS = {"flat_u1_torus": rose_torus, "flat_u1_wedge": wedge_sphere}
ALIASES = {"pitchfork": "pitchfork_z2"}


def builtin_ids() -> list[str]:
    return sorted(set(EXPRESSION_BUILTINS) | set(GAUGE_BUILTINS) | set(ALIASES))


@dataclass
class ProblemSpec:
    name: str
    dim_in: int
    dim_out: int
    map: DifferentiableMap
    map_desc: dict
    base_point: np.ndarray
    group_desc: dict | None
    action: GroupAction | None
    settings: dict = field(default_factory=lambda: dict(DEFAULT_SETTINGS))
    complex: CellComplex | None = None

    @property
    def dims(self) -> tuple[int, int]:
        return self.dim_in, self.dim_out

    @property
    def is_expression(self) -> bool:
        return self.map_desc.get("kind") == "expr"

    def action_or_trivial(self) -> GroupAction:
        if self.action is not None:
            return self.action
        G = FiniteGroup.cyclic(1)
        return GroupAction(trivial_rep(G, self.dim_in), trivial_rep(G, self.dim_out))

    def describe(self) -> dict:
        return {
            "name": self.name,
            "dims": [self.dim_in, self.dim_out],
            "map": self.map_desc,
            "base_point": self.base_point.tolist(),
            "group": self.group_desc,
            "settings": self.settings,
        }


@lru_cache(maxsize=None)
def _schema(name: str) -> dict:
    return json.loads(resources.files("normalform.schemas").joinpath(name).read_text())


def schema_path(name: str) -> Path:
    return Path(str(resources.files("normalform.schemas").joinpath(name)))


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def validate_schema(data, name: str = "problem.json") -> None:
    validator = jsonschema.Draft202012Validator(_schema(name))
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise SchemaError(err.message, _pointer(err.absolute_path))


def _build_action(desc: dict | None, dim_in: int, dim_out: int) -> GroupAction | None:
    if desc is None or desc["kind"] == "trivial":
        return None
    try:
        if desc["kind"] == "finite":
            gd = [np.asarray(g, dtype=float) for g in desc["domain_generators"]]
            gt = [np.asarray(g, dtype=float) for g in desc["target_generators"]]
            for i, g in enumerate(gd):
                if g.shape != (dim_in, dim_in):
                    raise SchemaError(f"domain generator must be {dim_in}x{dim_in}", f"/group/domain_generators/{i}")
            for i, g in enumerate(gt):
                if g.shape != (dim_out, dim_out):
                    raise SchemaError(f"target generator must be {dim_out}x{dim_out}", f"/group/target_generators/{i}")
            if len(gd) != len(gt):
                raise SchemaError("need as many target generators as domain generators", "/group")
            return GroupAction.finite_from_generators(gd, gt)
        R = int(desc["rank"])
        G = TorusGroup.full(R)
        reps = []
        for side, dim in (("domain", dim_in), ("target", dim_out)):
            d = desc[side]
            W = np.asarray(d.get("weights", []), dtype=np.int64).reshape(-1, R)
            fixed = int(d.get("fixed_dims", 0))
            shift = d.get("shift")
            rep = TorusRep(G, W, fixed, None if shift is None else np.asarray(shift, dtype=np.int64))
            if rep.dim != dim:
                raise SchemaError(f"{side} representation has dimension {rep.dim}, expected {dim}", f"/group/{side}")
            reps.append(rep)
        return GroupAction(*reps)
    except SchemaError:
        raise
    except (ValueError, DimensionMismatch) as exc:
        raise SchemaError(f"invalid group: {exc}", "/group") from exc


def problem_from_dict(data: dict) -> ProblemSpec:
    """Validate a problem description and build the map and group action."""
    validate_schema(data)
    data = copy.deepcopy(data)
    mdesc = data["map"]
    cx = None
    if mdesc["kind"] == "builtin":
        bid = ALIASES.get(mdesc["id"], mdesc["id"])
        if bid not in EXPRESSION_BUILTINS and bid not in GAUGE_BUILTINS:
            raise UnknownBuiltin(mdesc["id"], builtin_ids())
        if mdesc.get("params"):
            raise SchemaError("built-in problems take no parameters", "/map/params")
        if bid in GAUGE_BUILTINS:
            cx = GAUGE_BUILTINS[bid]()
            defaults = {
                "name": bid,
                "base_point": [0.0] * len(cx.edges),
                "group": _gauge_group(cx),
            }
            f = cx.curvature_map()
        else:
            defaults = copy.deepcopy(EXPRESSION_BUILTINS[bid])
            inner = defaults.pop("map")
            f = parse_expression_map(inner["outputs"], inner["vars"], bid)
        for key, val in defaults.items():
            data.setdefault(key, val)
    else:
        outputs = mdesc["outputs"]
        try:
            f = parse_expression_map(outputs, mdesc["vars"], data.get("name", "expr"))
        except ParseError as exc:
            raise SchemaError(f"expression does not parse: {exc}", "/map/outputs") from exc
        if len(set(mdesc["vars"])) != len(mdesc["vars"]):
            raise SchemaError("variable names must be distinct", "/map/vars")

    dims = data.get("dims")
    if dims is not None and tuple(dims) != (f.dim_in, f.dim_out):
        raise SchemaError(f"dims {dims} do not match the map ({f.dim_in}, {f.dim_out})", "/dims")
    base = np.asarray(data.get("base_point", [0.0] * f.dim_in), dtype=float)
    if base.shape != (f.dim_in,):
        raise SchemaError(f"base point must have length {f.dim_in}", "/base_point")
    group = data.get("group")
    action = _build_action(group, f.dim_in, f.dim_out)
    settings = dict(DEFAULT_SETTINGS)
    settings.update(data.get("settings", {}))
    return ProblemSpec(
        name=data.get("name", mdesc.get("id", "problem")),
        dim_in=f.dim_in,
        dim_out=f.dim_out,
        map=f,
        map_desc=mdesc,
        base_point=base,
        group_desc=group,
        action=action,
        settings=settings,
        complex=cx,
    )


def load_problem(path) -> ProblemSpec:
    """Read and validate a problem file; ``OSError`` propagates for unreadable files."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})", "") from exc
    return problem_from_dict(data)


def builtin_problem(name: str) -> ProblemSpec:
    return problem_from_dict({"map": {"kind": "builtin", "id": name}})


def resolve_problem(name_or_path: str) -> ProblemSpec:
    """A built-in id, or the path of a problem file."""
    p = Path(name_or_path)
    if p.suffix == ".json" or p.exists():
        return load_problem(p)
    return builtin_problem(name_or_path)
