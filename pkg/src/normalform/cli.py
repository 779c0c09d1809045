"""Command-line entry point: ``normalform <command> --problem <id|file.json>``."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .calculus.maps import DifferentiableMap
from .errors import (
    DimensionMismatch,
    DomainError,
    NonFinite,
    NormalFormError,
    ParseError,
    SchemaError,
    UnknownBuiltin,
)
from .linear_core import OperatorFamily, certify_uniform_regularity, factorize_regular
from .moduli import deformation_complex, explore_zero_set, kuranishi_chart, stratify
from .normal_form import NormalFormSettings, classify_point, lyapunov_schmidt, normal_form_at
from .problems import ProblemSpec, resolve_problem
from .reports import make_report, to_json, zero_points_csv
from .sampling import ball_points
from .symmetry import equivariant_normal_form

COMMANDS = ("factorize", "index", "classify", "normal-form", "reduce", "equivariant", "kuranishi", "stratify", "complex")
CSV_COMMANDS = ("kuranishi", "stratify")
INDEX_SAMPLES = 21
INPUT_ERRORS = (SchemaError, UnknownBuiltin, ParseError, DimensionMismatch, DomainError, NonFinite, OSError)


class InputError(Exception):
    pass


def _settings(spec: ProblemSpec, seed: int) -> NormalFormSettings:
    s = spec.settings
    return NormalFormSettings(radius=s["radius"], samples=s["samples"], rank_tol=s["tol"], seed=seed)


def _action(spec: ProblemSpec, warnings: list):
    if spec.action is None:
        warnings.append("problem has no group; the trivial group is used")
    return spec.action_or_trivial()


def _factorize(spec, m, settings, warnings):
    nf = factorize_regular(spec.map.jacobian(m), settings.rank_tol)
    return {"point": m, "normal_form": nf.to_dict()}


def _index(spec, m, settings, warnings):
    f: DifferentiableMap = spec.map
    nf = factorize_regular(f.jacobian(m), settings.rank_tol)
    fam = OperatorFamily(f.dim_in, lambda p: f.jacobian(m + p), settings.rank_tol)
    samples = np.vstack([np.zeros(f.dim_in), ball_points(INDEX_SAMPLES - 1, f.dim_in, settings.radius, settings.seed)])
    cert = certify_uniform_regularity(fam, samples, settings.rank_tol)
    indices = [factorize_regular(fam.sample(p), settings.rank_tol).index for p in samples]
    if not cert.certified:
        warnings.append("Jacobian family is not certified uniformly regular on the samples")
    return {
        "point": m,
        "rank": nf.rank,
        "kernel_dim": nf.kernel.dim,
        "cokernel_dim": nf.cokernel.dim,
        "index": nf.index,
        "index_constant": len(set(indices)) == 1,
        "certificate": cert.to_dict(),
    }


def _classify(spec, m, settings, warnings):
    c = classify_point(spec.map, m, tol=settings.rank_tol, radius=settings.radius, seed=settings.seed)
    return {"point": m, "classification": str(c), "kind": c.kind, "rank": c.rank}


def _normal_form(spec, m, settings, warnings):
    return {"point": m, **normal_form_at(spec.map, m, settings).to_report()}


def _reduce(spec, m, settings, warnings):
    return {"point": m, **lyapunov_schmidt(spec.map, m, settings).to_report()}


def _equivariant(spec, m, settings, warnings):
    res = equivariant_normal_form(spec.map, m, _action(spec, warnings), settings)
    return {"point": m, **res.to_report()}


def _moduli(spec, m, settings, warnings):
    action = _action(spec, warnings)
    chart = kuranishi_chart(spec.map, m, action, settings)
    dc = deformation_complex(spec.map, m, action, settings.rank_tol)
    zs = explore_zero_set(chart.s, chart.radius, spec.settings["grid"])
    strat = stratify(zs.points, chart.rep_E, zs.spacing)
    labels = [strat.strata[j].type_id for j in strat.labels]
    if not strat.frontier_passed:
        warnings.append("frontier condition fails for at least one pair of strata")
    if strat.unwitnessed:
        warnings.append(f"orbit types without samples (no verdict): {', '.join(strat.unwitnessed)}")
    return chart, dc, zs, strat, labels


def _kuranishi(spec, m, settings, warnings):
    chart, dc, zs, strat, labels = _moduli(spec, m, settings, warnings)
    out = chart.to_dict()
    out.update({
        "homology": dc.homology,
        "euler_characteristic": dc.euler_characteristic,
        "zero_points": zs.points,
        "zero_labels": labels,
        "zero_set": {k: v for k, v in zs.to_dict().items() if k != "points"},
        "strata": [s.to_dict() for s in strat.strata],
        "frontier": strat.frontier,
        "approximation": strat.approximation,
        "unwitnessed": strat.unwitnessed,
    })
    return out, (zs.points, labels)


def _stratify(spec, m, settings, warnings):
    chart, dc, zs, strat, labels = _moduli(spec, m, settings, warnings)
    out = strat.to_dict()
    out.update({"zero_points": zs.points, "zero_labels": labels, "H": chart.to_dict()["H"]})
    return out, (zs.points, labels)


def _complex(spec, m, settings, warnings):
    action = _action(spec, warnings)
    dc = deformation_complex(spec.map, m, action, settings.rank_tol)
    chart = kuranishi_chart(spec.map, m, action, settings)
    vdim = chart.virtual_dimension
    return {
        "point": m,
        **dc.to_dict(),
        "virtual_dimension": vdim,
        "identity_holds": dc.euler_characteristic == -vdim,
        "cell_complex": None if spec.complex is None else {
            "vertices": spec.complex.n_vertices,
            "edges": len(spec.complex.edges),
            "faces": len(spec.complex.faces),
            "euler_characteristic": spec.complex.euler_characteristic,
        },
    }


HANDLERS = {
    "factorize": _factorize,
    "index": _index,
    "classify": _classify,
    "normal-form": _normal_form,
    "reduce": _reduce,
    "equivariant": _equivariant,
    "kuranishi": _kuranishi,
    "stratify": _stratify,
    "complex": _complex,
}


def _parse_point(text: str | None, spec: ProblemSpec) -> np.ndarray:
    if text is None:
        return spec.base_point.copy()
    try:
        vals = [float(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError as exc:
        raise InputError(f"--point must be comma-separated numbers: {exc}") from exc
    if len(vals) != spec.dim_in:
        raise InputError(f"--point needs {spec.dim_in} coordinates, got {len(vals)}")
    return np.array(vals)


def dispatch(command: str, spec: ProblemSpec, flags: argparse.Namespace):
    """Run ``command`` and return ``(report, csv_rows)``; ``csv_rows`` is ``None``
    for commands without a zero set."""
    if command not in HANDLERS:
        raise InputError(f"unknown command {command!r}")
    if flags.tol is not None:
        spec.settings["tol"] = flags.tol
    if flags.radius is not None:
        spec.settings["radius"] = flags.radius
    if flags.grid is not None:
        if flags.grid < 2:
            raise InputError("--grid must be at least 2")
        spec.settings["grid"] = flags.grid
    seed = 0 if flags.seed is None else flags.seed
    m = _parse_point(flags.point, spec)
    warnings: list = []
    out = HANDLERS[command](spec, m, _settings(spec, seed), warnings)
    payload, rows = out if isinstance(out, tuple) else (out, None)
    return make_report(command, spec.name, payload, warnings, flags.seed), rows


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="normalform", description="Local normal forms and Kuranishi charts.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--problem", required=True, help="built-in id or path to a problem JSON file")
    p.add_argument("--point", help="comma-separated base point (default: the problem's base point)")
    p.add_argument("--tol", type=float, help="rank tolerance")
    p.add_argument("--radius", type=float, help="chart radius")
    p.add_argument("--grid", type=int, help="grid nodes per axis for zero-set exploration")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, help="seed for quasi-random samples; also fixes the timestamp")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.format == "csv" and args.command not in CSV_COMMANDS:
            raise InputError(f"csv output is only available for {', '.join(CSV_COMMANDS)}")
        spec = resolve_problem(args.problem)
        report, rows = dispatch(args.command, spec, args)
        text = zero_points_csv(*rows) if args.format == "csv" else to_json(report)
    except (InputError, *INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NormalFormError as exc:
        print(f"verification failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
