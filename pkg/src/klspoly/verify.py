"""Named verification suites over builder posets and bundled fixtures.

Each suite runs a family of exact identity checks and returns a list of
``(label, CheckResult)`` pairs, one per check.  The command line
(``klspoly verify --suite NAME``) and the acceptance tests both consume
these, so a green suite here and a green test run certify the same facts.

Suites:

``theorem-g``
    The mixed block of g equals ``delta_ell * g`` on every admissible
    (builder poset, q) pair, via both the global product and the
    Y-restricted one; plus the guard that a corrupted kernel is rejected
    with the offending interval named.
``corollary-f`` / ``corollary-z``
    The analogous identities for f and for Z on the same corpus.
``composition``
    Local invariants of composite subdivisions convolve.
``products``
    Product subdivisions: ell multiplies, the mixed g-block convolves,
    identity-factor laws hold, and h of a product of Eulerian posets is
    the product of the h's.
``equivariant``
    Kernel validation and the two independent solver routes (per-element
    reduction vs. direct product identities) on the square fan with the
    quarter-turn action and on a hexagon with its full dihedral symmetry;
    plus the guard that a non-Eulerian action is refused with the group
    element named.
``ehrhart-reciprocity``
    For every bundled lattice complex and every group element: the lattice
    point series of the interior agrees with the reciprocal h*-series up
    to order 6, and the h*-polynomial assembled from interior faces
    matches the counting series per element.
``all``
    Everything above.
"""

import json
from importlib import resources

from .ehrhart import (LatticeSimplexComplex, polynomial_action_check,
                      reciprocity_check)
from .equivariant import (equiv_kernel_validate, equiv_multiply, equiv_rev,
                          equiv_solve_f, equiv_solve_g, equiv_z_function,
                          is_eulerian_action)
from .fans import fan_kernel, polytope_cone_triple
from .incidence import (MirrorConstraintViolated, eulerian_kernel,
                        h_polynomial, solve_g)
from .poset import (boolean_algebra, cross_polytope_face_lattice,
                    cube_face_lattice, direct_product, polygon, pyramid,
                    segment_subdivision)
from .schemas import build_fan, build_group, build_poset, load_kernel_file, parse_document
from .status import CheckResult
from .subdivision import (SubdivisionError, SubdivisionTriple,
                          check_composition, check_corollary_f,
                          check_corollary_z, check_product_identities,
                          check_theorem_g, segment_refinement_sfs,
                          segment_subdivision_sfs)

SUITES = ("theorem-g", "corollary-f", "corollary-z", "composition",
          "products", "equivariant", "ehrhart-reciprocity", "all")

COMPLEX_FIXTURES = ("seg1_flip.json", "seg2_flip.json", "seg3_flip.json",
                    "seg4_flip.json", "unit_square.json", "unit_cube.json",
                    "crosscut_d4.json")


def fixture_path(name):
    """Filesystem path of a bundled fixture."""
    return str(resources.files(__package__).joinpath("fixtures", name))


def load_fixture(name, expect=None):
    """Load a bundled fixture document; return (tag, payload)."""
    text = resources.files(__package__).joinpath("fixtures", name).read_text()
    return parse_document(json.loads(text), expect=expect)


def load_complex_fixture(name, max_group=None):
    _tag, payload = load_fixture(name, expect="complex")
    return LatticeSimplexComplex.from_json(payload, max_group=max_group)


def builder_corpus():
    """Ranked lower Eulerian posets the theorem suites sweep over."""
    out = []
    for n in range(1, 6):
        out.append((f"boolean-{n}", boolean_algebra(n)))
    for k in range(3, 9):
        out.append((f"polygon-{k}", polygon(k)))
    for d in (2, 3):
        out.append((f"cube-{d}", cube_face_lattice(d)))
        out.append((f"cross-{d}", cross_polytope_face_lattice(d)))
    out.append(("pyramid-square", pyramid(polygon(4))))
    for s in (1, 2, 3):
        out.append((f"segment-{s}", segment_subdivision(s)))
    out.append(("prism-triangle", direct_product(polygon(3), boolean_algebra(1))))
    return [(name, p if p.rank is not None else p.with_rank(p.natural_rank()))
            for name, p in out if p.n <= 200]


def admissible_triples(poset):
    """All (q, triple) pairs for which (poset, q) is a subdivision triple."""
    bot = poset.bottom()
    for q in range(poset.n):
        if q == bot:
            continue
        try:
            yield q, SubdivisionTriple(poset, q)
        except SubdivisionError:
            continue


def _corpus_suite(check):
    out = []
    for name, poset in builder_corpus():
        kappa = eulerian_kernel(poset)
        for q, triple in admissible_triples(poset):
            out.append((f"{name} q={poset.labels[q]}", check(triple, kappa)))
    return out


def _corrupted_kernel_guard():
    """The bundled corrupted kernel must be rejected, naming its interval."""
    _tag, payload = load_fixture("boolean3.json", expect="poset")
    poset = build_poset(payload)
    kappa = load_kernel_file(fixture_path("corrupted_kernel_b3.json"), poset)
    try:
        solve_g(kappa)
    except MirrorConstraintViolated as exc:
        msg = str(exc)
        if "(" in msg and "," in msg:
            return CheckResult.passed()
        return CheckResult.failed("mirror-violation-lacks-interval",
                                  detail=msg)
    return CheckResult.failed("corrupted-kernel-accepted")


def suite_theorem_g():
    out = _corpus_suite(check_theorem_g)
    out.append(("guard corrupted-kernel", _corrupted_kernel_guard()))
    return out


def suite_corollary_f():
    return _corpus_suite(check_corollary_f)


def suite_corollary_z():
    return _corpus_suite(check_corollary_z)


def composition_pairs():
    """Composable subdivision pairs: refinement chains of a segment.

    The first map keeps a subset of the interior points, the second
    collapses the rest onto the plain segment; they share the middle poset.
    """
    pairs = []
    for fine, mid in ((3, (2,)), (3, (1, 3)), (2, (2,)), (4, (2, 4))):
        s1 = segment_refinement_sfs(fine, mid)
        s2 = segment_subdivision_sfs(len(mid))
        pairs.append((f"segment fine={fine} mid={list(mid)}", s1, s2))
    return pairs


def suite_composition():
    return [(name, check_composition(s1, s2))
            for name, s1, s2 in composition_pairs()]


def product_pairs():
    s_seg2 = segment_subdivision_sfs(2)
    s_seg1 = segment_subdivision_sfs(1)
    s_ref = segment_refinement_sfs(3, (2,))
    return [("seg2 x seg1", s_seg2, s_seg1),
            ("seg1 x seg1", s_seg1, s_seg1),
            ("ref31 x seg2", s_ref, s_seg2)]


def _h_product_check():
    cases = [(boolean_algebra(2), boolean_algebra(3)),
             (polygon(4), boolean_algebra(2)),
             (polygon(3), polygon(5))]
    for a, b in cases:
        ha, hb = h_polynomial(a), h_polynomial(b)
        hp = h_polynomial(direct_product(a, b))
        if hp != ha * hb:
            return CheckResult.failed(
                "h-of-product", detail=f"{hp!r} != {ha!r} * {hb!r}")
    return CheckResult.passed()


def suite_products():
    out = [(name, check_product_identities(s1, s2))
           for name, s1, s2 in product_pairs()]
    out.append(("h of direct products", _h_product_check()))
    return out


def hexagon_polytope():
    """A lattice hexagon with full dihedral symmetry (order 12).

    Vertices on the hexagonal lattice; the rotation by one step is the
    integer matrix ((1, -1), (1, 0)) and the reflection swaps coordinates.
    """
    verts = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)]
    faces = [frozenset()] + [frozenset([i]) for i in range(6)] \
        + [frozenset([i, (i + 1) % 6]) for i in range(6)] \
        + [frozenset(range(6))]
    covers = [(0, 1 + i) for i in range(6)]
    for e in range(6):
        covers.append((1 + e, 7 + e))
        covers.append((1 + (e + 1) % 6, 7 + e))
        covers.append((7 + e, 13))
    return verts, faces, covers


def hexagon_dihedral_setup():
    verts, faces, covers = hexagon_polytope()
    triple, geom = polytope_cone_triple(verts, faces, covers, 13)
    rot = ((1, -1), (1, 0))
    ref = ((0, 1), (1, 0))
    action, by_perm = geom.action([rot, ref])
    kappa = geom.kernel(action, by_perm, validate=False)
    return triple, action, kappa


def square_fan_setup(max_group=None):
    _tag, payload = load_fixture("square_fan_z4.json", expect="fan")
    fan, faction = build_fan(payload, max_group=max_group)
    kappa = fan_kernel(fan, faction, validate=False)
    return fan, faction, kappa


def solver_crosscheck(kappa):
    """g and f from per-element reduction against the direct identities.

    ``equiv_solve_g``/``equiv_solve_f`` work one group element at a time on
    fixed posets; the defining equations ``rev(g) = g * kappa`` and
    ``rev(f) = kappa * f`` are then re-verified with the
    induction/restriction product, which never looks at fixed posets.
    Finally Z = g * kappa * f must be symmetric under rev.
    """
    g = equiv_solve_g(kappa)
    if equiv_rev(g) != equiv_multiply(g, kappa):
        return CheckResult.failed("g-direct-identity")
    f = equiv_solve_f(kappa)
    if equiv_rev(f) != equiv_multiply(kappa, f):
        return CheckResult.failed("f-direct-identity")
    z = equiv_z_function(kappa, g=g, f=f)
    if equiv_rev(z) != z:
        return CheckResult.failed("z-not-symmetric")
    return CheckResult.passed()


def _refusal_guard():
    """The glued double-semisuspension swap must be refused, naming w."""
    _tag, payload = load_fixture("glued_semisuspension.json", expect="poset")
    poset = build_poset(payload)
    _tag, gpayload = load_fixture("glued_swap.json", expect="group")
    action = build_group(gpayload, poset)
    res = is_eulerian_action(action)
    if res:
        return CheckResult.failed("non-eulerian-action-accepted")
    if not (res.witness and "w" in res.witness):
        return CheckResult.failed("refusal-lacks-witness",
                                  detail=res.describe())
    w = tuple(res.witness["w"])
    if w == action.identity:
        return CheckResult.failed("refusal-blames-identity")
    return CheckResult.passed()


def suite_equivariant():
    out = []
    _fan, _faction, kappa = square_fan_setup()
    out.append(("square-fan quarter-turn kernel",
                equiv_kernel_validate(kappa)))
    out.append(("square-fan quarter-turn solvers", solver_crosscheck(kappa)))

    triple, action, hkappa = hexagon_dihedral_setup()
    out.append(("hexagon dihedral kernel", equiv_kernel_validate(hkappa)))
    out.append(("hexagon dihedral solvers", solver_crosscheck(hkappa)))
    from .equivariant import check_equivariant_theorem
    out.append(("hexagon dihedral subdivision identities",
                check_equivariant_theorem(triple, hkappa.weak_rank, action,
                                          hkappa)))
    out.append(("guard non-eulerian action", _refusal_guard()))
    return out


def suite_ehrhart_reciprocity():
    out = []
    for name in COMPLEX_FIXTURES:
        cx = load_complex_fixture(name)
        out.append((f"{name} counting vs assembled h*",
                    polynomial_action_check(cx, order=2 * (cx.dim + 1))))
        for w in sorted(cx.action.elements):
            out.append((f"{name} reciprocity w={list(w)}",
                        reciprocity_check(cx, w, order=6)))
    return out


def run_suite(name):
    """Run one named suite (or 'all'); returns [(label, CheckResult)]."""
    table = {
        "theorem-g": suite_theorem_g,
        "corollary-f": suite_corollary_f,
        "corollary-z": suite_corollary_z,
        "composition": suite_composition,
        "products": suite_products,
        "equivariant": suite_equivariant,
        "ehrhart-reciprocity": suite_ehrhart_reciprocity,
    }
    if name == "all":
        out = []
        for key in table:
            out.extend((f"{key}: {label}", res)
                       for label, res in table[key]())
        return out
    if name not in table:
        raise ValueError(f"unknown suite {name!r}; choose from "
                         f"{', '.join(SUITES)}")
    return table[name]()
