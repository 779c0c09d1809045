import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from normalform.calculus import (
    DifferentiableMap,
    Dual,
    LocalDiffeo,
    jacobian_dual,
    jacobian_fd,
    mixed_close,
    mixed_error,
    newton_invert,
    newton_solve,
    parametrized_newton,
    parse,
    parse_expression_map,
    tokenize,
)
from normalform.calculus.expression import compile_node, node_to_str
from normalform.errors import (
    DimensionMismatch,
    DomainError,
    NoConvergence,
    NonFinite,
    ParseError,
    SingularJacobian,
    UndeclaredVariable,
)

finite = st.floats(-3, 3, allow_nan=False)


# --- dual numbers -----------------------------------------------------------


def test_dual_arithmetic_matches_hand_derivatives():
    x = Dual.variable(0.7, 0, 2)
    y = Dual.variable(-1.3, 1, 2)
    z = x * y + x / y - 3 * x**3
    assert math.isclose(z.val, 0.7 * -1.3 + 0.7 / -1.3 - 3 * 0.7**3)
    # d/dx = y + 1/y - 9 x^2, d/dy = x - x / y^2
    assert np.allclose(z.grad, [-1.3 + 1 / -1.3 - 9 * 0.49, 0.7 - 0.7 / 1.69])


def test_dual_transcendental():
    x = Dual.variable(0.4, 0, 1)
    for f, df in ((Dual.sin, math.cos), (Dual.cos, lambda t: -math.sin(t)), (Dual.exp, math.exp)):
        assert math.isclose(f(x).grad[0], df(0.4), rel_tol=1e-14)


def test_dual_division_by_zero():
    with pytest.raises(DomainError):
        Dual.variable(1.0, 0, 1) / Dual(0.0, np.zeros(1))


@given(finite, finite)
def test_jacobian_dual_vs_fd(a, b):
    def fn(v):
        x, y = v
        return [x * x * y - (x + 1) ** 2, x - y]

    val, J = jacobian_dual(fn, np.array([a, b]))
    f = DifferentiableMap(2, 2, lambda v: np.array(fn(v)))
    assert mixed_close(J, jacobian_fd(f, np.array([a, b])), 1e-6)


# --- expressions ------------------------------------------------------------


def test_tokenize_and_parse_errors():
    assert [t.kind for t in tokenize("x^2 + 1.5e-3")] == ["name", "op", "num", "op", "num", "end"]
    with pytest.raises(ParseError) as exc:
        parse("x +* y", ["x", "y"])
    assert exc.value.position == 3
    with pytest.raises(UndeclaredVariable) as exc:
        parse("x + z", ["x"])
    assert exc.value.name == "z" and exc.value.position == 4
    with pytest.raises(ParseError):
        parse("x^y", ["x", "y"])
    with pytest.raises(ParseError):
        parse("x ? 1", ["x"])


def test_precedence_and_unary_minus():
    f = parse_expression_map("-x^2 + 2*y/4 - (x - y)", ["x", "y"])
    x, y = 1.5, -0.5
    assert math.isclose(f([x, y])[0], -(x**2) + 2 * y / 4 - (x - y))
    g = parse_expression_map("2^-1 * x", ["x"])
    assert math.isclose(g([3.0])[0], 1.5)


def test_string_with_semicolons_and_list_agree():
    a = parse_expression_map("x; y^3 + x*y", ["x", "y"])
    b = parse_expression_map(["x", "y^3 + x*y"], ["x", "y"])
    p = np.array([0.3, -0.8])
    assert np.array_equal(a(p), b(p))
    assert np.array_equal(a.jacobian(p), [[1.0, 0.0], [p[1], 3 * p[1] ** 2 + p[0]]])


def test_batch_matches_pointwise(rng):
    f = parse_expression_map("sin(x)*y; exp(x - y) + 1/(2 + y^2)", ["x", "y"])
    X = rng.uniform(-1, 1, (50, 2))
    assert np.allclose(f.evaluate_batch(X), np.array([f(x) for x in X]), rtol=1e-14)


def test_domain_errors():
    f = parse_expression_map("1/x", ["x"])
    with pytest.raises((DomainError, NonFinite)):
        f([0.0])
    g = parse_expression_map("x^-1", ["x"])
    with pytest.raises((DomainError, NonFinite)):
        g([0.0])


@given(finite, finite)
def test_printed_tree_reparses_to_same_values(a, b):
    src = "x*(x^2 + y^2) - cos(y)/(2 + x^2)"
    node = parse(src, ["x", "y"])
    again = parse(node_to_str(node), ["x", "y"])
    env = [a, b]
    assert math.isclose(compile_node(node)(env), compile_node(again)(env), rel_tol=1e-12, abs_tol=1e-12)


# --- maps -------------------------------------------------------------------


def test_differentiable_map_checks():
    f = DifferentiableMap(2, 1, lambda x: np.array([x.sum()]), lower=np.zeros(2), upper=np.ones(2))
    with pytest.raises(DomainError):
        f([2.0, 0.0])
    with pytest.raises(DimensionMismatch):
        f([0.5])
    with pytest.raises(NonFinite):
        f([np.nan, 0.0])
    assert np.allclose(f.jacobian([0.5, 0.5]), [[1.0, 1.0]], atol=1e-9)


def test_translated_and_linear():
    A = np.array([[1.0, 2.0], [0.0, 3.0]])
    f = DifferentiableMap.linear(A, [1.0, 1.0])
    g = f.translated([1.0, 1.0])
    assert np.allclose(g([0.0, 0.0]), 0.0)
    assert np.allclose(g([1.0, 0.0]), A[:, 0])


def test_mixed_error():
    assert mixed_error(np.array([1.0]), np.array([1.0])) == 0.0
    assert mixed_close(1e6 + 1.0, 1e6, 1e-5)
    assert not mixed_close(1.0, 0.0, 1e-5)


# --- Newton -----------------------------------------------------------------


@given(st.floats(0.0, 10.0))
def test_newton_invert_quadratic_formula(y):
    f = parse_expression_map("x^2 + x", ["x"])
    x = newton_invert(f, [y], [1.0])[0]
    assert math.isclose(x, (-1 + math.sqrt(1 + 4 * y)) / 2, rel_tol=1e-10, abs_tol=1e-12)


def test_newton_singular_and_failure():
    f = parse_expression_map("x^2", ["x"])
    with pytest.raises(SingularJacobian):
        newton_invert(f, [1.0], [0.0])
    g = parse_expression_map("x^2 + 1", ["x"])
    with pytest.raises((NoConvergence, SingularJacobian)):
        newton_invert(g, [0.0], [0.3])


def test_newton_history_decreases():
    f = parse_expression_map("exp(x) - 2", ["x"])
    res = newton_solve(f, f.jacobian, [0.0], [3.0])
    assert math.isclose(res.x[0], math.log(2), rel_tol=1e-12)
    assert all(b < a for a, b in zip(res.residuals, res.residuals[1:]))


def test_parametrized_newton():
    f = parse_expression_map("p*x + x^3", ["p", "x"], "param")
    x = parametrized_newton(f, [1.0], [2.0], [0.5])
    assert math.isclose(x[0], 1.0, rel_tol=1e-12)
    boxed = DifferentiableMap(2, 1, f.func, f.jac, lower=np.array([-1.0, -5.0]), upper=np.array([1.0, 5.0]))
    with pytest.raises(DomainError):
        parametrized_newton(boxed, [2.0], [0.0], [0.0])


def _bisect(fn, y, lo, hi):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if fn(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_local_diffeo_against_bisection():
    f = parse_expression_map("x + x^3", ["x"])
    phi = LocalDiffeo(f, radius=1.0)
    for y in (-1.5, -0.2, 0.0, 0.7, 1.9):
        exact = _bisect(lambda t: t + t**3, y, -2.0, 2.0)
        assert math.isclose(phi.inverse([y])[0], exact, rel_tol=1e-10, abs_tol=1e-12)
    assert phi.verify_round_trip(50) <= 1e-10


def test_local_diffeo_singular_base():
    with pytest.raises(SingularJacobian):
        LocalDiffeo(parse_expression_map("x^3", ["x"]))
