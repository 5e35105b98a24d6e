"""Strong formal subdivisions, mapping cylinders, and local invariants."""

import pytest
from hypothesis import given, settings, strategies as st

from klspoly.incidence import eulerian_kernel
from klspoly.polynomial import Poly
from klspoly.poset import (boolean_algebra, cube_face_lattice, from_covers,
                           polygon, segment_subdivision)
from klspoly.subdivision import (StrongFormalSubdivision, SubdivisionError,
                                 SubdivisionTriple, check_composition,
                                 check_corollary_f, check_corollary_z,
                                 check_product_identities, check_theorem_g,
                                 id_sfs, local_invariants, mapping_cylinder,
                                 product_sfs, relative_g,
                                 segment_refinement_sfs,
                                 segment_subdivision_sfs, triple_to_sfs)


def test_segment_subdivision_sfs_validates():
    for s in range(0, 5):
        assert segment_subdivision_sfs(s).validate()


def test_validation_witnesses_name_the_broken_condition():
    good = segment_subdivision_sfs(2)
    # send an interior vertex to a coarse vertex: breaks the signed fiber
    # count over the edge above it
    sigma = list(good.sigma)
    sigma[2] = 1
    res = StrongFormalSubdivision(good.X, good.Y, sigma).validate()
    assert not res
    assert res.reason in ("signed-count", "strongly-surjective",
                          "order-preserving")
    # collapse everything to the empty face: ranks go down
    res = StrongFormalSubdivision(good.X, good.Y, [0] * good.X.n).validate()
    assert not res and res.reason == "rank-increasing"
    # rank-respecting map that never hits the right vertex
    one = segment_subdivision_sfs(1)
    sigma = [0, 1, 1, 1, 3, 3]
    res = StrongFormalSubdivision(one.X, one.Y, sigma).validate()
    assert not res and res.reason == "strongly-surjective"
    # sigma reversing the order
    flip = list(good.sigma)
    flip[0], flip[-1] = flip[-1], 0
    res = StrongFormalSubdivision(good.X, good.Y, flip).validate()
    assert not res and res.reason == "order-preserving"


def test_sigma_range_checked_at_construction():
    good = segment_subdivision_sfs(1)
    with pytest.raises(SubdivisionError):
        StrongFormalSubdivision(good.X, good.Y, [99] * good.X.n)
    with pytest.raises(SubdivisionError):
        StrongFormalSubdivision(good.X, good.Y, good.sigma[:-1])


def test_mapping_cylinder_shape_and_roundtrip():
    sfs = segment_subdivision_sfs(2)
    triple = mapping_cylinder(sfs)
    assert triple.q == sfs.X.n + sfs.Y.bottom()
    assert triple.gamma.is_lower_eulerian()
    back = triple_to_sfs(triple)
    assert back.X.n == sfs.X.n and back.Y.n == sfs.Y.n
    assert list(back.sigma) == list(sfs.sigma)
    assert back.validate()


def test_triple_requires_join_admissible_q():
    # two segments glued along both endpoints: atoms have two joins
    bowtie = from_covers(5, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 3), (2, 4)],
                         rank=[0, 1, 1, 2, 2])
    with pytest.raises(SubdivisionError, match="join"):
        SubdivisionTriple(bowtie, 1)
    b2 = boolean_algebra(2)
    with pytest.raises(SubdivisionError, match="minimum"):
        SubdivisionTriple(b2, b2.bottom())


def test_polygon_triple_local_invariants():
    # polygon with s + 3 vertices, q = one vertex: the local invariants at
    # the full interval are h = 1 + s t, ell = Delta ell = s t
    for s in range(0, 7):
        p = polygon(s + 3)
        triple = SubdivisionTriple(p, 1)
        kappa = eulerian_kernel(p)
        li = local_invariants(triple, kappa.weak_rank, kappa)
        b, t = p.bottom(), p.top()
        assert li.h_sigma.value(b, t) == Poly([1, s])
        assert li.ell_sigma.value(b, t) == Poly([0, s])
        assert li.delta_ell.value(b, t) == Poly([0, s])


def test_relative_g_cube_faces():
    c = cube_face_lattice(3)
    expected = {1: Poly([0, 1]), 2: Poly([0, 2]), 3: Poly([0, 3]),
                4: Poly([1, 4])}
    for z in range(c.n):
        r = c.rank[z]
        if r == 0:
            with pytest.raises(SubdivisionError, match="nonempty"):
                relative_g(c, z)
        else:
            assert relative_g(c, z) == expected[r]


def test_relative_g_square():
    sq = cube_face_lattice(2)
    vertex = next(z for z in range(sq.n) if sq.rank[z] == 1)
    assert relative_g(sq, vertex) == Poly([0, 1])
    assert relative_g(sq, sq.top()) == Poly([1, 1])


def test_theorem_and_corollaries_on_triples():
    for s in (1, 2, 3):
        triple = mapping_cylinder(segment_subdivision_sfs(s))
        kappa = eulerian_kernel(triple.gamma)
        assert check_theorem_g(triple, kappa)
        assert check_corollary_f(triple, kappa)
        assert check_corollary_z(triple, kappa)
    for k in (4, 6):
        triple = SubdivisionTriple(polygon(k), 1)
        kappa = eulerian_kernel(triple.gamma)
        assert check_theorem_g(triple, kappa)
        assert check_corollary_f(triple, kappa)
        assert check_corollary_z(triple, kappa)


def test_composition_of_refinements():
    fine = segment_refinement_sfs(3, (2,))
    coarse = segment_subdivision_sfs(1)
    assert fine.validate() and coarse.validate()
    assert check_composition(fine, coarse)


def test_identity_subdivision_laws():
    p = segment_subdivision(2)
    ident = id_sfs(p)
    assert ident.validate()
    assert check_composition(ident, ident)
    sub = segment_subdivision_sfs(2)
    # id before and after a subdivision composes cleanly
    assert check_composition(id_sfs(sub.X), sub)
    assert check_composition(sub, id_sfs(sub.Y))


def test_product_identities():
    s1 = segment_subdivision_sfs(2)
    s2 = segment_subdivision_sfs(1)
    prod = product_sfs(s1, s2)
    assert prod.validate()
    assert check_product_identities(s1, s2)


@given(st.integers(min_value=1, max_value=5), st.data())
@settings(max_examples=12, deadline=None)
def test_random_segment_refinements_satisfy_theorem_g(fine, data):
    kept = data.draw(st.sets(st.integers(min_value=1, max_value=fine)))
    sfs = segment_refinement_sfs(fine, kept)
    assert sfs.validate()
    triple = mapping_cylinder(sfs)
    kappa = eulerian_kernel(triple.gamma)
    assert check_theorem_g(triple, kappa)
