"""Acceptance suite: one test per shipped guarantee.

Every comparison below is exact (integer and Fraction arithmetic); there
are no numeric tolerances anywhere.  Each test prints a single
``criterion NN: pass`` line on success, and pytest's own PASSED/FAILED
column gives the per-criterion verdict.
"""

import itertools

import pytest

from klspoly.ehrhart import (ComplexCylinder, HStarData,
                             hstar_from_subdivision, hstar_via_localh,
                             localhstar_via_localh)
from klspoly.equivariant import (ev_w, equiv_local_invariants, equiv_multiply,
                                 is_eulerian_action)
from klspoly.fans import EquivFanAction, LatticeFan, fan_kernel
from klspoly.incidence import (MirrorConstraintViolated, convolve,
                               eulerian_kernel, h_polynomial, rev, solve_f,
                               solve_g, toric_h_boundary, validate_kernel,
                               z_function)
from klspoly.equivariant import (equiv_solve_f, equiv_solve_g,
                                 equiv_z_function)
from klspoly.polynomial import Poly, delta_invert, delta_truncate, poly_rev
from klspoly.poset import boolean_algebra, cube_face_lattice, direct_product, polygon
from klspoly.schemas import load_kernel_file
from klspoly.subdivision import (SubdivisionTriple, check_product_identities,
                                 local_invariants, relative_g,
                                 segment_subdivision_sfs)
from klspoly.verify import (COMPLEX_FIXTURES, builder_corpus, fixture_path,
                            hexagon_dihedral_setup, load_complex_fixture,
                            run_suite, solver_crosscheck, square_fan_setup)

from conftest import (dihedral_polygon_action, natural_weak_rank,
                      random_equiv_element, seeded_rng)

ONE = Poly([1])
T = Poly([0, 1])


def _passed(n, text):
    print(f"criterion {n:02d}: pass - {text}")


def test_criterion_01_boolean_solvers_are_exactly_trivial():
    for n in range(1, 6):
        b = boolean_algebra(n)
        kappa = eulerian_kernel(b)
        g, f = solve_g(kappa), solve_f(kappa)
        for pair in b.intervals():
            assert g.value(*pair) == ONE
            assert f.value(*pair) == ONE
        z = z_function(kappa, g=g, f=f)
        assert z.value(b.bottom(), b.top()) == Poly([1, 1]) ** n
        assert h_polynomial(b) == ONE
        assert toric_h_boundary(b) == Poly([1] * n)
    _passed(1, "boolean algebras: f = g = 1, z = (1+t)^n, h = 1")


def test_criterion_02_polygon_triples_carry_h_one_plus_st():
    for s in range(0, 7):
        p = polygon(s + 3)
        triple = SubdivisionTriple(p, 1)
        kappa = eulerian_kernel(p)
        li = local_invariants(triple, kappa.weak_rank, kappa)
        b, t = p.bottom(), p.top()
        assert li.h_sigma.value(b, t) == Poly([1, s])
        assert li.ell_sigma.value(b, t) == Poly([0, s])
        assert li.delta_ell.value(b, t) == Poly([0, s])
    _passed(2, "polygon vertex triples: h = 1 + st, ell = st for s = 0..6")


def test_criterion_03_cube_relative_g_matches_the_local_route():
    c = cube_face_lattice(3)
    kappa = eulerian_kernel(c)
    g = solve_g(kappa)
    b, top = c.bottom(), c.top()
    expected = {1: Poly([0, 1]), 2: Poly([0, 2]), 3: Poly([0, 3]),
                4: Poly([1, 4])}
    for face in range(c.n):
        r = c.rank[face]
        if r == 0:
            continue
        rel = relative_g(c, face, g=g)
        assert rel == expected[r]
        if face != top:
            # independent route: delta ell of the triple at (bottom, top)
            triple = SubdivisionTriple(c, face)
            li = local_invariants(triple, kappa.weak_rank, kappa)
            assert li.delta_ell.value(b, top) == rel
        if r == 3:  # facets: recursion collapses to g(Q) - g([0, F])
            assert rel == g.value(b, top) - g.value(b, face)
    _passed(3, "3-cube: relative g agrees with delta ell on every face")


@pytest.mark.parametrize("suite", ["theorem-g", "corollary-f", "corollary-z"])
def test_criterion_04_subdivision_identities_hold_on_the_corpus(suite):
    results = run_suite(suite)
    failures = [(name, res.describe()) for name, res in results if not res]
    assert failures == []
    assert len(results) > 200
    _passed(4, f"{suite}: {len(results)} corpus checks")


def test_criterion_05_mirror_violations_are_named_not_ignored():
    # every corpus kernel passes; one corrupted value is caught and located
    for name, poset in builder_corpus():
        assert validate_kernel(eulerian_kernel(poset)), name
    b3 = boolean_algebra(3)
    bad = load_kernel_file(fixture_path("corrupted_kernel_b3.json"), b3)
    res = validate_kernel(bad)
    assert not res
    assert res.reason == "inverse-reversal"
    assert res.witness == (0, 3)
    with pytest.raises(MirrorConstraintViolated) as err:
        solve_g(bad)
    assert err.value.interval == (0, 3)
    _passed(5, "corrupted kernel rejected, witness interval (0, 3)")


def test_criterion_06_delta_ell_determines_ell_and_vice_versa():
    seen = 0
    cases = [SubdivisionTriple(polygon(k), 1) for k in (3, 5, 7)]
    cases += [SubdivisionTriple(cube_face_lattice(3), q)
              for q in (1, 14, 26)]
    for triple in cases:
        kappa = eulerian_kernel(triple.gamma)
        li = local_invariants(triple, kappa.weak_rank, kappa)
        wr = kappa.weak_rank
        for (z, zp) in triple.xy_pairs():
            r = wr.value(z, zp)
            ell = li.ell_sigma.value(z, zp)
            dl = li.delta_ell.value(z, zp)
            assert dl == delta_truncate(ell, r)
            assert delta_invert(dl, r) == ell
            assert dl - poly_rev(dl, r) == ell * Poly([1, -1])
            seen += 1
    assert seen > 100
    _passed(6, f"ell <-> delta ell roundtrip on {seen} intervals")


def test_criterion_07_evaluation_is_a_ring_homomorphism():
    rng = seeded_rng(20260825)
    fan, faction, _ = square_fan_setup()
    actions = [dihedral_polygon_action(6), faction.action]
    checked = 0
    for action in actions:
        wr = natural_weak_rank(action)
        for _ in range(50):
            p = random_equiv_element(action, wr, rng)
            q = random_equiv_element(action, wr, rng)
            prod = equiv_multiply(p, q)
            for w in action.elements:
                assert ev_w(prod, w).vals == \
                    convolve(ev_w(p, w), ev_w(q, w)).vals
            checked += 1
    assert checked == 100
    _passed(7, "ev_w(p*q) = ev_w(p)*ev_w(q) on 100 random pairs")


def test_criterion_08_equivariant_solvers_satisfy_direct_identities():
    _fan, _faction, kappa = square_fan_setup()
    assert solver_crosscheck(kappa)
    _triple, _action, hexkappa = hexagon_dihedral_setup()
    assert solver_crosscheck(hexkappa)
    _passed(8, "per-element solving matches direct products (Z/4 fan, D6)")


def _partitions(n, smallest=1):
    if n == 0:
        yield ()
        return
    for first in range(smallest, n + 1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def test_criterion_09_simplicial_cones_factor_through_ray_orbits():
    count = 0
    for n in range(1, 6):
        rays = [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
        cones = [frozenset(s) for k in range(n + 1)
                 for s in itertools.combinations(range(n), k)]
        fan = LatticeFan(n, rays, cones)
        for parts in _partitions(n):
            # permutation matrix with one cycle per part
            perm = []
            start = 0
            for m in parts:
                perm.extend([start + (i + 1) % m for i in range(m)])
                start += m
            matrix = [[1 if perm[c] == r else 0 for c in range(n)]
                      for r in range(n)]
            faction = EquivFanAction(fan, [matrix], 1000)
            action = faction.action
            w = next(v for v in action.elements
                     if _same_matrix(faction.matrix_of(v), matrix))
            kappa = fan_kernel(fan, faction)
            g = equiv_solve_g(kappa)
            f = equiv_solve_f(kappa)
            z = equiv_z_function(kappa, g=g, f=f)
            expect_k, expect_z = ONE, ONE
            for m in parts:
                expect_k = expect_k * (T ** m - ONE)
                expect_z = expect_z * (T ** m + ONE)
            kw, gw, fw, zw = (ev_w(e, w) for e in (kappa, g, f, z))
            sub = kw.poset
            full = (sub.bottom(), sub.top())
            assert kw.value(*full) == expect_k, parts
            assert gw.value(*full) == ONE, parts
            assert fw.value(*full) == ONE, parts
            assert zw.value(*full) == expect_z, parts
            count += 1
    assert count == 18  # partitions of 1..5
    _passed(9, "18 cyclic actions on simplicial cones factor by orbit sizes")


def _same_matrix(a, b):
    return all(a[i][j] == b[i][j]
               for i in range(len(b)) for j in range(len(b)))


def test_criterion_10_non_eulerian_fixed_posets_are_refused():
    from klspoly.schemas import build_group, build_poset, load_document
    _, payload = load_document(fixture_path("glued_semisuspension.json"),
                               "poset")
    poset = build_poset(payload)
    assert poset.is_eulerian()  # the ambient poset itself is fine
    _, gpayload = load_document(fixture_path("glued_swap.json"), "group")
    action = build_group(gpayload, poset, None)
    res = is_eulerian_action(action)
    assert not res
    swap = (0, 1, 2, 3, 4, 5, 6, 8, 7, 9)
    assert tuple(res.witness["w"]) == swap
    sub, _, _ = action.fixed_poset(swap)
    assert not sub.is_lower_eulerian()
    _passed(10, "glued semisuspension swap refused, witness named")


def test_criterion_11_counting_matches_series_and_reciprocity():
    results = run_suite("ehrhart-reciprocity")
    failures = [(name, res.describe()) for name, res in results if not res]
    assert failures == []
    assert len(results) >= 7
    _passed(11, f"series/assembled/reciprocity: {len(results)} checks")


def test_criterion_12_unimodular_counts_collapse_to_local_invariants():
    for name in COMPLEX_FIXTURES:
        cx = load_complex_fixture(name)
        cyl = ComplexCylinder(cx)
        inv = equiv_local_invariants(cyl.triple, cyl.weak_rank, cyl.action,
                                     cyl.kappa)
        # route one: box points and ambient characteristic polynomials
        direct = hstar_from_subdivision(cx)
        # route two: the cylinder's local h for the same subdivision
        bottom, top = cyl.triple.gamma.bottom(), cyl.top()
        h_sigma = inv.h_sigma.value(bottom, top)
        ell_sigma = inv.ell_sigma.value(bottom, top)
        local = localhstar_via_localh(cx, cylinder=cyl, invariants=inv)
        via = hstar_via_localh(cx, cylinder=cyl, invariants=inv)
        for wc in cyl.action.elements:
            w = cyl.fine_of(wc)
            assert h_sigma.ev(wc) == direct.ev(w), name
            assert via.ev(w) == direct.ev(w), name
            assert ell_sigma.ev(wc) == local.ev(w), name
    _passed(12, "h* = h_sigma and l* = ell_sigma on all unimodular fixtures")


def test_criterion_13_subdivision_products_multiply():
    s1 = segment_subdivision_sfs(2)
    s2 = segment_subdivision_sfs(1)
    assert check_product_identities(s1, s2)
    assert check_product_identities(s2, s2)
    pairs = [(boolean_algebra(2), boolean_algebra(3)),
             (polygon(4), boolean_algebra(2)),
             (polygon(3), polygon(5))]
    for a, b in pairs:
        prod = direct_product(a, b)
        assert h_polynomial(prod) == h_polynomial(a) * h_polynomial(b)
        za = z_function(eulerian_kernel(a))
        zb = z_function(eulerian_kernel(b))
        zp = z_function(eulerian_kernel(prod))
        assert zp.value(prod.bottom(), prod.top()) == \
            za.value(a.bottom(), a.top()) * zb.value(b.bottom(), b.top())
    _passed(13, "local invariants and h/z multiply over direct products")


def test_observed_nonnegativity_of_delta_ell_at_identity():
    # empirical regression, not a proved guarantee: on every geometric
    # fixture the identity evaluation of delta ell has nonnegative
    # coefficients; a failure here is information, not necessarily a bug
    for name in COMPLEX_FIXTURES:
        cx = load_complex_fixture(name)
        cyl = ComplexCylinder(cx)
        inv = equiv_local_invariants(cyl.triple, cyl.weak_rank, cyl.action,
                                     cyl.kappa)
        ident = cyl.action.identity
        for (z, zp) in cyl.triple.xy_pairs():
            poly = inv.delta_ell.value(z, zp).ev(ident)
            assert all(c >= 0 for c in poly.coeffs), (name, z, zp)
