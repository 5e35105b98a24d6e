"""Lattice fans, matrix actions, and geometric kernels."""

from fractions import Fraction

import pytest

from klspoly.equivariant import (GroupTooLarge, NotAutomorphism,
                                 classpoly_json, equiv_kernel_validate,
                                 equiv_local_invariants, equiv_rev,
                                 equiv_multiply, equiv_solve_f, equiv_solve_g,
                                 equiv_z_function, ev_w)
from klspoly.fans import (EquivFanAction, FanError, LatticeFan,
                          cone_contains, conv_contains, fan_kernel,
                          fixed_fan, polytope_cone_triple, primitive_vector,
                          relint_contains)
from klspoly.linalg import charpoly, fixed_space_dim
from klspoly.polynomial import Poly, poly_rev
from klspoly.schemas import load_document
from klspoly.verify import fixture_path


def load_fan_fixture(name):
    _, payload = load_document(fixture_path(name), "fan")
    fan = LatticeFan.from_json(payload["fan"] if "fan" in payload else payload)
    matrices = payload.get("action", {}).get("matrices")
    return fan, matrices


def test_vector_predicates():
    assert primitive_vector((4, -6)) == (2, -3)
    assert primitive_vector((0, 0, 5)) == (0, 0, 1)
    assert cone_contains([(1, 0), (0, 1)], (3, 2))
    assert not cone_contains([(1, 0), (0, 1)], (-1, 2))
    assert conv_contains([(0, 0), (2, 0), (0, 2)], (1, 1))
    assert not conv_contains([(0, 0), (2, 0), (0, 2)], (2, 2))
    assert relint_contains([(0, 0), (2, 0), (0, 2)], (1, Fraction(1, 2)))
    assert not relint_contains([(0, 0), (2, 0), (0, 2)], (1, 1))
    assert relint_contains([(0, 0)], (0, 0))


def test_fan_validation():
    with pytest.raises(FanError, match="duplicate rays"):
        LatticeFan(2, [(1, 0), (1, 0)], [frozenset()])
    with pytest.raises(FanError, match="zero vector"):
        LatticeFan(2, [(0, 0)], [frozenset()])
    with pytest.raises(FanError, match="missing ray"):
        LatticeFan(2, [(1, 0)], [frozenset(), frozenset({3})])
    with pytest.raises(FanError, match="lower Eulerian"):
        # rank jumps from 0 to 2 with nothing in between
        LatticeFan(2, [(1, 0), (0, 1)], [frozenset(), frozenset({0, 1})])


def test_square_fan_dihedral_kernel_and_z():
    fan, _ = load_fan_fixture("square_fan_z4.json")
    fa = EquivFanAction(fan, [[[0, -1], [1, 0]], [[1, 0], [0, -1]]], 10_000)
    act = fa.action
    assert len(act.elements) == 8
    assert len(act.conjugacy_classes()) == 5
    kappa = fan_kernel(fan, fa)
    assert equiv_kernel_validate(kappa)
    g = equiv_solve_g(kappa)
    z = equiv_z_function(kappa, g=g)
    p = act.poset
    b = p.bottom()
    quadrant = next(i for i in range(p.n) if p.up[i] == 1 << i)
    # the quadrant's stabilizer is generated by the diagonal swap
    assert classpoly_json(act, kappa.value(b, quadrant)) == {
        "on": [0, 2],
        "values": [[0, ["1", "-2", "1"]], [2, ["-1", "0", "1"]]]}
    assert classpoly_json(act, z.value(b, quadrant)) == {
        "on": [0, 2],
        "values": [[0, ["1", "2", "1"]], [2, ["1", "0", "1"]]]}
    assert classpoly_json(act, g.value(b, quadrant)) == {
        "on": [0, 2], "values": [[0, ["1"]], [2, ["1"]]]}


def test_fixed_fans_of_square_symmetries():
    fan, _ = load_fan_fixture("square_fan_z4.json")
    fa = EquivFanAction(fan, [[[0, -1], [1, 0]], [[1, 0], [0, -1]]], 10_000)
    act = fa.action
    by_matrix = {tuple(tuple(int(x) for x in row) for row in fa.matrix_of(w)): w
                 for w in act.elements}
    diag = by_matrix[((0, 1), (1, 0))]
    ff, _ = fixed_fan(fan, fa, diag)
    assert ff.rays == ((1, 1), (-1, -1))
    assert ff.cones == (frozenset(), frozenset({0}), frozenset({1}))
    xaxis = by_matrix[((1, 0), (0, -1))]
    ff, _ = fixed_fan(fan, fa, xaxis)
    assert ff.rays == ((1, 0), (-1, 0))
    r90 = by_matrix[((0, -1), (1, 0))]
    ff, _ = fixed_fan(fan, fa, r90)
    assert ff.rays == () and ff.cones == (frozenset(),)
    r180 = by_matrix[((-1, 0), (0, -1))]
    ff, _ = fixed_fan(fan, fa, r180)
    assert ff.rays == ()


def test_cone_over_square_quarter_turn_g():
    fan, matrices = load_fan_fixture("cone_square_z4.json")
    fa = EquivFanAction(fan, matrices, 10_000)
    act = fa.action
    assert len(act.elements) == 4
    kappa = fan_kernel(fan, fa)
    g = equiv_solve_g(kappa)
    f = equiv_solve_f(kappa)
    z = equiv_z_function(kappa, g=g, f=f)
    p = act.poset
    b, t = p.bottom(), p.top()
    assert classpoly_json(act, g.value(b, t)) == {
        "on": [0, 1, 2, 3],
        "values": [[0, ["1", "1"]], [1, ["1", "-1"]],
                   [2, ["1", "1"]], [3, ["1", "-1"]]]}
    assert classpoly_json(act, f.value(b, t)) == classpoly_json(
        act, g.value(b, t))
    assert classpoly_json(act, z.value(b, t)) == {
        "on": [0, 1, 2, 3],
        "values": [[0, ["1", "5", "5", "1"]], [1, ["1", "-1", "-1", "1"]],
                   [2, ["1", "1", "1", "1"]], [3, ["1", "-1", "-1", "1"]]]}
    # per-element reduction agrees with direct equivariant multiplication
    assert equiv_rev(g).vals == equiv_multiply(g, kappa).vals


def test_simplicial_cone_splits_into_ray_orbit_factors():
    # cone spanned by e1, e2, e3; the action cycles e1 -> e2 -> e1, e3 fixed
    rays = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    cones = [frozenset(s) for s in
             ([], [0], [1], [2], [0, 1], [0, 2], [1, 2], [0, 1, 2])]
    fan = LatticeFan(3, rays, cones)
    swap = [[0, 1, 0], [1, 0, 0], [0, 0, 1]]
    fa = EquivFanAction(fan, [swap], 10_000)
    act = fa.action
    kappa = fan_kernel(fan, fa)
    g = equiv_solve_g(kappa)
    z = equiv_z_function(kappa, g=g)
    p = act.poset
    b, t = p.bottom(), p.top()
    w = next(w for w in act.elements if w != act.identity)
    # ray orbits of the swap have sizes 2 and 1
    assert ev_w(kappa, w).value(*_full(ev_w(kappa, w))) == \
        Poly([-1, 0, 1]) * Poly([-1, 1])
    assert ev_w(g, w).value(*_full(ev_w(g, w))) == Poly([1])
    assert ev_w(z, w).value(*_full(ev_w(z, w))) == \
        Poly([1, 0, 1]) * Poly([1, 1])
    assert kappa.value(b, t).ev(act.identity) == Poly([-1, 1]) ** 3


def _full(element):
    p = element.poset
    return p.bottom(), p.top()


def test_finite_order_charpoly_mirror_identity():
    # det(M) det(tI - M) = (-1)^d det(I - t M) for finite-order matrices
    mats = [
        ((0, -1), (1, 0)),
        ((0, 1), (1, 0)),
        ((-1, 0), (0, -1)),
        ((0, 1, 0), (0, 0, 1), (1, 0, 0)),
        ((0, 1, 0), (1, 0, 0), (0, 0, -1)),
        ((1, 0), (0, 1)),
    ]
    for m in mats:
        d = len(m)
        cp = charpoly(m)
        det = cp.coeff(0) * (-1) ** d
        assert cp * Poly([det]) == poly_rev(cp, d) * Poly([(-1) ** d])
        # the determinant is the parity of the moved dimensions
        assert det == (-1) ** (d - fixed_space_dim(m))


def test_polytope_triple_at_the_full_face():
    verts = [(1, 1), (-1, 1), (-1, -1), (1, -1)]
    faces = [[], [0], [1], [2], [3], [0, 1], [1, 2], [2, 3], [3, 0],
             [0, 1, 2, 3]]
    covers = [(0, k) for k in (1, 2, 3, 4)]
    covers += [(1, 5), (2, 5), (2, 6), (3, 6), (3, 7), (4, 7), (4, 8), (1, 8)]
    covers += [(k, 9) for k in (5, 6, 7, 8)]
    triple, geom = polytope_cone_triple(verts, faces, covers, 9)
    action, by_perm = geom.action([[[0, -1], [1, 0]], [[1, 0], [0, -1]]])
    assert len(action.elements) == 8
    kappa = geom.kernel(action, by_perm)
    assert equiv_kernel_validate(kappa)
    li = equiv_local_invariants(triple, kappa.weak_rank, action, kappa)
    p = action.poset
    b, t = p.bottom(), p.top()
    assert classpoly_json(action, li.delta_ell.value(b, t)) == {
        "on": list(range(8)),
        "values": [[0, ["1", "1"]], [1, ["1", "1"]], [2, ["1", "-1"]],
                   [3, ["1", "-1"]], [5, ["1", "1"]]]}
    assert classpoly_json(action, li.h_sigma.value(b, t)) == {
        "on": list(range(8)),
        "values": [[0, ["1", "2", "1"]], [1, ["1", "2", "1"]],
                   [2, ["1", "0", "1"]], [3, ["1", "0", "1"]],
                   [5, ["1", "2", "1"]]]}


def test_polytope_triple_at_a_vertex():
    verts = [(0, 0), (2, 0), (0, 2), (2, 2)]
    faces = [[], [0], [1], [2], [3], [0, 1], [0, 2], [1, 3], [2, 3],
             [0, 1, 2, 3]]
    covers = [(0, k) for k in (1, 2, 3, 4)]
    covers += [(1, 5), (2, 5), (1, 6), (3, 6), (2, 7), (4, 7), (3, 8), (4, 8)]
    covers += [(k, 9) for k in (5, 6, 7, 8)]
    triple, geom = polytope_cone_triple(verts, faces, covers, 1)
    action, by_perm = geom.action([[[0, 1], [1, 0]]])
    kappa = geom.kernel(action, by_perm)
    li = equiv_local_invariants(triple, kappa.weak_rank, action, kappa)
    p = action.poset
    b, t = p.bottom(), p.top()
    assert classpoly_json(action, li.delta_ell.value(b, t)) == {
        "on": [0, 1], "values": [[0, ["0", "1"]], [1, ["0", "1"]]]}
    # origin must sit in the designated face's relative interior
    with pytest.raises(FanError, match="relative interior"):
        polytope_cone_triple(verts, faces, covers, 2)


def test_matrix_action_rejections():
    fan, _ = load_fan_fixture("square_fan_z4.json")
    with pytest.raises(NotAutomorphism):
        EquivFanAction(fan, [[[2, 0], [0, 2]]], 10_000)
    with pytest.raises(GroupTooLarge):
        EquivFanAction(fan, [[[0, -1], [1, 0]]], 2)


def test_fan_json_roundtrip():
    fan, _ = load_fan_fixture("cone_square_z4.json")
    again = LatticeFan.from_json(fan.to_json())
    assert again.rays == fan.rays and again.cones == fan.cones
