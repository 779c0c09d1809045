import math

import numpy as np
import pytest

from normalform.calculus import DifferentiableMap, jacobian_fd, parse_expression_map
from normalform.errors import DomainError
from normalform.normal_form import (
    NormalFormSettings,
    Splitting,
    classify_point,
    level_set_points,
    lyapunov_schmidt,
    normal_form_at,
    relative_normal_form,
)
from normalform.problems import builtin_problem
from normalform.sampling import ball_points


def _expr(src, vars):
    return parse_expression_map(src, vars)


@pytest.mark.parametrize(
    "src,vars,m,expected",
    [
        ("x^2", ["x"], [0.0], "General"),
        ("x^2", ["x"], [1.0], "Submersion"),
        ("y + x^3", ["x", "y"], [0.0, 0.0], "Submersion"),
        ("x; y^3 + x*y", ["x", "y"], [0.0, 0.0], "General"),
        ("x + y; (x + y)^2", ["x", "y"], [0.0, 0.0], "Subimmersion(1)"),
        ("cos(t); sin(t)", ["t"], [0.0], "Immersion"),
        ("x; y", ["x", "y"], [0.3, 0.1], "Submersion"),
    ],
)
def test_classification(src, vars, m, expected):
    assert str(classify_point(_expr(src, vars), m)) == expected


@pytest.mark.parametrize("bid", ["fold_square", "graph_cubic", "pitchfork_z2", "cusp", "constant_rank_demo", "ls_demo"])
def test_normal_form_properties(bid):
    p = builtin_problem(bid)
    nf = normal_form_at(p.map, p.base_point)
    k, r, c = nf.splitting.k, nf.splitting.r, nf.splitting.c
    pts = ball_points(40, p.dim_in, nf.radius, 7)
    assert max(nf.conjugacy_residual(u) for u in pts) <= 1e-8
    for v in ball_points(20, r, nf.radius, 3) if r else []:
        assert np.linalg.norm(nf.singular_part(np.concatenate([np.zeros(k), v]))) <= 1e-9
    if c:
        assert np.linalg.norm(jacobian_fd(nf.singular_part, np.zeros(k + r))) <= 1e-6
    # charts fix the base point and are inverse to each other
    assert np.allclose(nf.charts.kappa(p.base_point), 0.0, atol=1e-14)
    for u in pts[:10]:
        assert np.allclose(nf.charts.kappa(nf.kappa_inverse(u)), u, atol=1e-10)


def test_fold_singular_part_is_square():
    nf = normal_form_at(_expr("x^2", ["x"]), [0.0])
    for x in (0.1, -0.3, 0.45):
        assert math.isclose(abs(nf.singular_part([x])[0]), x * x, rel_tol=1e-12)


def test_lyapunov_schmidt_hand_value():
    ls = lyapunov_schmidt(_expr("y - x^2; y", ["x", "y"]), [0.0, 0.0])
    for x in (0.1, 0.2, 0.5):
        assert math.isclose(ls.reduced_map([x])[0], -x * x / math.sqrt(2), rel_tol=1e-10)
    assert ls.agreement_residual <= 1e-8


def _bisect(fn, lo, hi):
    flo = fn(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (fn(mid) > 0) == (flo > 0):
            lo, flo = mid, fn(mid)
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_lyapunov_schmidt_against_implicit_solution():
    # image equation y + y^3 + x^2 = 0 solved by bisection; reduced map x * y(x)
    ls = lyapunov_schmidt(_expr("y + y^3 + x^2; x*y", ["x", "y"]), [0.0, 0.0])
    for x in (-0.3, 0.05, 0.25):
        y = _bisect(lambda t: t + t**3 + x * x, -1.0, 1.0)
        assert math.isclose(ls.x2([x])[0], y, rel_tol=1e-9, abs_tol=1e-13)
        assert math.isclose(ls.reduced_map([x])[0], x * y, rel_tol=1e-9, abs_tol=1e-13)


def test_explicit_splitting_is_respected():
    f = _expr("y - x^2; y", ["x", "y"])
    s = 1 / math.sqrt(2)
    split = Splitting(np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]]),
                      np.array([[s], [-s]]), np.array([[s], [s]]))
    nf = normal_form_at(f, [0.0, 0.0], splitting=split)
    assert np.allclose(nf.splitting.W, split.W)


def test_settings_radius_shrinks_when_needed():
    nf = normal_form_at(_expr("x^2 + sin(5*y)", ["x", "y"]), [0.0, 0.0], NormalFormSettings(radius=4.0))
    assert nf.radius <= 4.0
    assert nf.verification["max_conjugacy_residual"] <= 1e-8


def test_relative_normal_form_preimage():
    f = _expr("x^2; x^3", ["x"])
    rel = relative_normal_form(f, [0.0], Z=[1])
    assert rel.preimage_residual <= 1e-8
    with pytest.raises(DomainError):
        relative_normal_form(_expr("x^2 + 1; x", ["x"]), [0.0], Z=[1])


def test_level_set_points_land_on_circle():
    g = _expr("x^2 + y^2 - 1", ["x", "y"])
    pts = level_set_points(g, ball_points(20, 2, 2.0, 1) + np.array([0.1, 0.0]))
    assert pts
    for p in pts:
        assert abs(np.linalg.norm(p) - 1) <= 1e-10


def test_report_shape():
    nf = normal_form_at(_expr("x; y^3 + x*y", ["x", "y"]), [0.0, 0.0])
    rep = nf.to_report()
    assert rep["classification"] == "General"
    assert rep["dims"] == {"ker": 1, "coimg": 1, "img": 1, "coker": 1}
    assert len(rep["fs_samples"]) == nf.settings.report_samples
