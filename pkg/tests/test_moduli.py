import numpy as np
import pytest

from normalform.calculus import DifferentiableMap, parse_expression_map
from normalform.errors import DimensionMismatch, NotAComplex
from normalform.moduli import (
    CellComplex,
    deformation_complex,
    explore_zero_set,
    kuranishi_chart,
    local_dimensions,
    rose_torus,
    stratify,
    virtual_dimension,
    wedge_sphere,
)
from normalform.problems import builtin_problem
from normalform.sampling import ball_points
from normalform.symmetry import FiniteGroup, FiniteRep, GroupAction, trivial_rep


def _hodge_oracle(cx: CellComplex):
    d0, d1 = cx.d0, cx.d1
    r0 = np.linalg.matrix_rank(d0) if d0.size else 0
    r1 = np.linalg.matrix_rank(d1) if d1.size else 0
    return [cx.n_vertices - r0, len(cx.edges) - r0 - r1, len(cx.faces) - r1]


def _trivial(n_in, n_out):
    G = FiniteGroup.cyclic(1)
    return GroupAction(trivial_rep(G, n_in), trivial_rep(G, n_out))


@pytest.mark.parametrize("make,expected", [(rose_torus, [1, 2, 1]), (wedge_sphere, [1, 0, 1])])
def test_cell_complexes(make, expected):
    cx = make()
    assert not np.any(cx.d1 @ cx.d0)
    assert _hodge_oracle(cx) == expected
    assert cx.euler_characteristic == expected[0] - expected[1] + expected[2]


def test_bad_cell_complex():
    cx = CellComplex(2, ((0, 1),), (((0, 1),),))
    with pytest.raises(NotAComplex):
        cx.check()


def test_curvature_jacobian_matches_fd():
    cx = wedge_sphere()
    f = cx.curvature_map()
    A = np.array([0.3, -0.2])
    from normalform.calculus import jacobian_fd

    assert np.allclose(f.jacobian(A), jacobian_fd(f, A), atol=1e-8)
    assert np.allclose(f.evaluate_batch(A[None]), f(A)[None])


def test_fold_chart():
    f = parse_expression_map("x^2", ["x"])
    ch = kuranishi_chart(f, [0.0], _trivial(1, 1))
    assert (ch.E.dim, ch.F.dim, ch.H.lie_dim) == (1, 1, 0)
    assert virtual_dimension(ch) == 0
    for x in (0.1, -0.2):
        assert abs(abs(ch.s([x])[0]) - x * x) <= 1e-12
    dc = deformation_complex(f, [0.0], _trivial(1, 1))
    assert dc.homology == [0, 1, 1]
    assert dc.euler_characteristic == -virtual_dimension(ch)


def test_pitchfork_chart_obstruction_is_the_cubic():
    p = builtin_problem("pitchfork_z2")
    ch = kuranishi_chart(p.map, p.base_point, p.action)
    assert (ch.E.dim, ch.F.dim, ch.virtual_dimension) == (2, 1, 1)
    assert ch.H.order == 2
    for x, lam in ball_points(20, 2, 0.4, 2):
        assert abs(abs(ch.s([x, lam])[0]) - abs(lam * x - x**3)) <= 1e-12
    assert ch.correspondence_samples > 0 and ch.correspondence_residual <= 1e-8


def test_torus_builtin():
    p = builtin_problem("flat_u1_torus")
    ch = kuranishi_chart(p.map, p.base_point, p.action)
    assert (ch.E.dim, ch.F.dim, ch.H.lie_dim, ch.virtual_dimension) == (2, 1, 1, 0)
    assert max(abs(ch.s(u)[0]) for u in ball_points(50, 2, ch.radius, 0)) <= 1e-10
    dc = deformation_complex(p.map, p.base_point, p.action)
    assert dc.homology == _hodge_oracle(p.complex) == [1, 2, 1]


def test_wedge_builtin_is_rigid():
    p = builtin_problem("flat_u1_wedge")
    dc = deformation_complex(p.map, p.base_point, p.action)
    assert dc.homology == [1, 0, 1]
    ch = kuranishi_chart(p.map, p.base_point, p.action)
    assert ch.virtual_dimension == -dc.euler_characteristic == -2


def test_submersion_complex_has_no_h2():
    p = builtin_problem("circle_level")
    dc = deformation_complex(p.map, p.base_point, p.action_or_trivial())
    assert dc.homology[2] == 0


# --- zero sets ----------------------------------------------------------------


def test_zero_set_single_point():
    s = parse_expression_map("x^2", ["x"])
    zs = explore_zero_set(s, 1.0, 101)
    assert len(zs) == 1 and abs(zs.points[0, 0]) < zs.spacing


def test_zero_set_empty():
    s = DifferentiableMap(1, 1, lambda x: np.ones(1), lambda x: np.zeros((1, 1)))
    assert len(explore_zero_set(s, 1.0, 51)) == 0


def test_zero_set_dimension_cap():
    s = DifferentiableMap(5, 1, lambda x: x[:1])
    with pytest.raises(DimensionMismatch):
        explore_zero_set(s, 1.0, 3)


def test_pitchfork_zero_set_covers_both_curves():
    s = parse_expression_map("l*x - x^3", ["x", "l"])
    zs = explore_zero_set(s, 1.0, 101)
    h = zs.spacing
    t = np.linspace(-1, 1, 401)
    line = np.stack([np.zeros_like(t), t], axis=1)
    parab = np.stack([t, t**2], axis=1)
    oracle = np.vstack([line, parab])
    from scipy.spatial import cKDTree

    assert cKDTree(zs.points).query(oracle)[0].max() <= h
    # and nothing spurious: every returned point lies on one of the curves
    on_line = np.abs(zs.points[:, 0])
    on_parab = np.abs(zs.points[:, 1] - zs.points[:, 0] ** 2)
    assert np.minimum(on_line, on_parab).max() <= 1e-8
    # thinned at half the spacing
    d, _ = cKDTree(zs.points).query(zs.points, 2)
    assert d[:, 1].min() > h / 2


# --- stratification -----------------------------------------------------------------


def test_local_dimensions():
    g = np.linspace(-1, 1, 15)
    plane = np.array([[a, b, 0.0] for a in g for b in g])
    line = np.stack([g, 2 * g, -g], axis=1)
    assert np.all(local_dimensions(plane) == 2)
    assert np.all(local_dimensions(line) == 1)


def _z2_rep():
    G, mats = FiniteGroup.from_matrices([np.diag([-1.0, 1.0])])
    return FiniteRep(G, mats)


def test_pitchfork_stratification():
    p = builtin_problem("pitchfork_z2")
    ch = kuranishi_chart(p.map, p.base_point, p.action)
    zs = explore_zero_set(ch.s, 0.5, 101)
    rep = stratify(zs.points, ch.rep_E, zs.spacing)
    assert sorted(rep.dims) == [1, 1]
    assert rep.frontier_passed and rep.frontier[0][1] == "pass"
    assert rep.approximation_passed
    assert sum(s.size for s in rep.strata) == len(zs)
    assert rep.unwitnessed == []


def test_single_free_type():
    pts = np.array([[0.5 + 0.01 * i, 0.2] for i in range(30)])
    rep = stratify(pts, _z2_rep(), 0.01)
    assert len(rep.strata) == 1 and rep.frontier == [["-"]]
    assert rep.unwitnessed == ["C1"]


def test_empty_report():
    rep = stratify(np.zeros((0, 2)), _z2_rep(), 0.01)
    assert rep.strata == [] and rep.frontier == []


def test_frontier_fails_when_free_stratum_hugs_fixed_one():
    g = np.linspace(-0.5, 0.5, 51)
    fixed = np.stack([np.zeros_like(g), g], axis=1)
    hugging = np.stack([np.full_like(g, 0.005), g], axis=1)
    rep = stratify(np.vstack([fixed, hugging]), _z2_rep(), 0.01)
    assert rep.frontier[0][1] == "fail"


def test_frontier_none_without_contact():
    g = np.linspace(-0.5, 0.5, 51)
    fixed = np.stack([np.zeros_like(g), g], axis=1)
    far = np.stack([np.full_like(g, 0.4), g], axis=1)
    rep = stratify(np.vstack([fixed, far]), _z2_rep(), 0.01)
    assert rep.frontier[0][1] == "none"
