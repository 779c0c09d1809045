import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from normalform.calculus import parse_expression_map
from normalform.errors import DimensionMismatch, NotInvariantInput
from normalform.linear_core import Subspace
from normalform.normal_form import NormalFormSettings
from normalform.symmetry import (
    FiniteGroup,
    FiniteRep,
    GroupAction,
    SubRep,
    TorusGroup,
    TorusRep,
    commutation_residual,
    equivariant_normal_form,
    equivariant_normal_form_fixed_point,
    haar_average_matrix,
    hermite_normal_form,
    invariance_residual,
    invariant_complement,
    lattice_contains,
    linear_slice,
    orbit_type_leq,
    smith_normal_form,
    stabilizer_of,
    trivial_rep,
    tube_inverse,
)
from normalform.symmetry.reps import wrap_angles

int_matrix = st.integers(1, 3).flatmap(
    lambda m: st.integers(1, 3).flatmap(
        lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


# --- lattices ---------------------------------------------------------------


def test_smith_classic_example():
    M = np.array([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    D, U, V = smith_normal_form(M)
    assert [int(D[i, i]) for i in range(3)] == [2, 6, 12]
    assert np.array_equal(np.asarray(U) @ M @ np.asarray(V), np.asarray(D))


@given(int_matrix)
def test_smith_properties(rows):
    M = np.array(rows, dtype=np.int64)
    D, U, V = (np.asarray(a, dtype=np.int64) for a in smith_normal_form(M))
    assert np.array_equal(U @ M @ V, D)
    assert abs(round(np.linalg.det(U))) == 1 and abs(round(np.linalg.det(V))) == 1
    d = [int(D[i, i]) for i in range(min(D.shape))]
    off = D - np.diag(np.diag(D)) if D.shape[0] == D.shape[1] else D.copy()
    if D.shape[0] != D.shape[1]:
        for i in range(min(D.shape)):
            off[i, i] = 0
    assert not off.any()
    nz = [x for x in d if x]
    assert all(x > 0 for x in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))


@given(int_matrix)
def test_hermite_generates_same_lattice(rows):
    M = np.array(rows, dtype=np.int64)
    H = hermite_normal_form(M, M.shape[1])
    for r in M:
        assert lattice_contains(H, r)
    for r in H:
        assert lattice_contains(M, r) if M.any() else not r.any()


def test_hermite_example():
    H = hermite_normal_form(np.array([[2, 0], [0, 2], [1, 1]]), 2)
    assert H.tolist() == [[1, 1], [0, 2]]


# --- groups -----------------------------------------------------------------


def test_symmetric_group_subgroups():
    G, mats = FiniteGroup.symmetric(3)
    assert G.order == 6 and G.check_axioms()
    assert len(G.subgroups) == 6
    assert [len(c) for c in G.subgroup_classes] == [1, 3, 1, 1]
    for a in G.elements:
        for b in G.elements:
            assert np.allclose(mats[G.mul(a, b)], mats[a] @ mats[b])


def test_from_matrices_dihedral():
    c, s = math.cos(math.pi / 2), math.sin(math.pi / 2)
    G, mats = FiniteGroup.from_matrices([np.array([[c, -s], [s, c]]), np.diag([1.0, -1.0])])
    assert G.order == 8 and G.check_axioms()


def test_torus_subgroup_structure():
    H = TorusGroup(1, np.array([[2]]))
    assert H.lie_dim == 0 and H.component_count == 2
    assert H.contains([math.pi]) and not H.contains([math.pi / 2])
    full = TorusGroup.full(2)
    diag = TorusGroup(2, np.array([[1, -1]]))
    assert diag.lie_dim == 1 and diag.is_subgroup_of(full) and not full.is_subgroup_of(diag)
    assert diag.contains([0.3, 0.3]) and not diag.contains([0.3, 0.0])
    assert TorusGroup.trivial(2).is_subgroup_of(diag)


@given(st.floats(-50, 50))
def test_wrap_angles_range(a):
    w = wrap_angles(np.array([a]))[0]
    assert -math.pi - 1e-12 <= w <= math.pi + 1e-12
    assert abs(math.sin(w) - math.sin(a)) < 1e-9 and abs(math.cos(w) - math.cos(a)) < 1e-9


# --- averaging and complements ---------------------------------------------


def test_haar_average_rotation():
    G = TorusGroup.full(1)
    rep = TorusRep(G, [[1]])
    A = haar_average_matrix((rep, rep), np.diag([1.0, 0.0]))
    assert np.allclose(A, 0.5 * np.eye(2), atol=1e-14)
    assert commutation_residual((rep, rep), A) < 1e-14


def test_invariant_complement_weights():
    G = TorusGroup.full(1)
    rep = TorusRep(G, [[1], [2]])
    V = Subspace(4, np.eye(4)[:, :2])
    W = invariant_complement(V, rep)
    assert W.same_as(Subspace(4, np.eye(4)[:, 2:]))
    assert invariance_residual(W.basis, rep) < 1e-12


def test_invariant_complement_non_orthogonal_action():
    # Z2 acting by a non-orthogonal involution; complement is the -1 eigenspace
    T = np.array([[1.0, 1.0], [0.0, -1.0]])
    G, mats = FiniteGroup.from_matrices([T])
    rep = FiniteRep(G, mats)
    V = Subspace.span(np.array([[1.0], [0.0]]))
    W = invariant_complement(V, rep)
    w = W.basis[:, 0]
    assert np.allclose(T @ w, -w)
    with pytest.raises(NotInvariantInput):
        invariant_complement(Subspace.span(np.array([[0.0], [1.0]])), rep)


# --- stabilizers and slices ---------------------------------------------------


def test_stabilizers_s3():
    G, mats = FiniteGroup.symmetric(3)
    rep = FiniteRep(G, mats)
    assert stabilizer_of(rep, [1, 2, 3]).order == 1
    assert stabilizer_of(rep, [1, 1, 0]).order == 2
    assert stabilizer_of(rep, [0, 0, 0]).order == 6
    a, b = stabilizer_of(rep, [1, 1, 0]), stabilizer_of(rep, [0, 1, 1])
    assert a.class_id == b.class_id
    assert orbit_type_leq(G, stabilizer_of(rep, [1, 2, 3]), a)


def test_torus_stabilizer_weight_two():
    rep = TorusRep(TorusGroup.full(1), [[1], [2]])
    st_ = stabilizer_of(rep, [0, 0, 1, 0])
    assert st_.lie_dim == 0 and st_.order == 2
    assert stabilizer_of(rep, [0, 0, 0, 0]).is_full()


def test_slice_for_rotation():
    rep = TorusRep(TorusGroup.full(1), [[1]])
    sl = linear_slice(rep, [1.0, 0.0])
    assert sl.normal.dim == 1
    assert np.allclose(sl.normal.basis[:, 0], [1.0, 0.0])
    assert sl.to_dict()["stabilizer"]["dim"] == 0


def test_tube_inverse_recovers_angle():
    rep = TorusRep(TorusGroup.full(1), [[1]])
    sl = linear_slice(rep, [1.0, 0.0])
    for theta, t in ((0.4, 0.1), (-2.0, -0.2)):
        x = rep.act([theta], [1.0 + t, 0.0])
        tp = tube_inverse(rep, sl, x)
        assert math.isclose(wrap_angles(tp.element - theta)[0], 0.0, abs_tol=1e-10)
        assert math.isclose(tp.slice_coords[0], t, abs_tol=1e-10)


def test_action_group_mismatch():
    with pytest.raises(DimensionMismatch):
        GroupAction(trivial_rep(FiniteGroup.cyclic(2), 1), trivial_rep(FiniteGroup.cyclic(3), 1))


def test_subrep_restriction():
    rep = TorusRep(TorusGroup.full(1), [[1], [3]])
    sub = SubRep(rep, np.eye(4)[:, 2:])
    assert np.allclose(sub.matrix([0.5]), rep.matrix([0.5])[2:, 2:])
    assert stabilizer_of(sub, [1.0, 0.0]).order == 3


# --- equivariant normal forms ---------------------------------------------------


def _pitchfork():
    f = parse_expression_map("l*x - x^3", ["x", "l"])
    act = GroupAction.finite_from_generators([np.diag([-1.0, 1.0])], [np.array([[-1.0]])])
    return f, act


def test_pitchfork_fixed_point():
    f, act = _pitchfork()
    data = equivariant_normal_form_fixed_point(f, [0.0, 0.0], act)
    assert data.fs_equivariance_residual <= 1e-8
    assert all(v <= 1e-10 for v in data.subspace_residuals.values())
    assert str(data.normal_form.classification) == "General"


def test_circle_cubic_at_origin_and_off():
    f = parse_expression_map("x*(x^2 + y^2); y*(x^2 + y^2)", ["x", "y"])
    G = TorusGroup.full(1)
    act = GroupAction(TorusRep(G, [[1]]), TorusRep(G, [[1]]))
    res = equivariant_normal_form(f, [0.0, 0.0], act)
    assert res.fixed_point.fs_equivariance_residual <= 1e-8
    off = equivariant_normal_form(f, [1.0, 0.0], act, NormalFormSettings(radius=0.25))
    assert off.target_stabilizer.order == 1 and off.target_stabilizer.lie_dim == 0
    assert off.tube_residual <= 1e-8


def test_trivial_group_reproduces_plain_normal_form():
    from normalform.normal_form import normal_form_at

    f = parse_expression_map("x; y^3 + x*y", ["x", "y"])
    G = FiniteGroup.cyclic(1)
    act = GroupAction(trivial_rep(G, 2), trivial_rep(G, 2))
    eq = equivariant_normal_form_fixed_point(f, [0.0, 0.0], act)
    plain = normal_form_at(f, [0.0, 0.0])
    assert np.allclose(eq.normal_form.splitting.K, plain.splitting.K)
    assert np.allclose(eq.normal_form.splitting.W, plain.splitting.W)
