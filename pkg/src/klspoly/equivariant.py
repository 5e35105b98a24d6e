"""Group actions on posets and the equivariant incidence algebra.

A finite group W acting by automorphisms on a poset B upgrades the
incidence algebra: the value of an element on an interval [z,z'] becomes a
polynomial whose coefficients are rational class functions on the interval
stabilizer W_{z,z'}.  Multiplication convolves with induction/restriction
between stabilizers.  Evaluating every class function at a fixed group
element w collapses an equivariant element to an ordinary incidence element
on the fixed poset B^w, and this evaluation is an algebra homomorphism.

That homomorphism is also the computational workhorse here: kernels are
validated and the f/g/Z solvers run on each fixed poset B^w separately,
and the per-w answers are reassembled into class-function form.  Assembly
is then validated against the conjugation-compatibility condition that
defines the equivariant algebra, and one interval of each solve is
re-verified through the induction/restriction product so that the two
computation paths stay honest against each other.
"""

import os
from fractions import Fraction

from .polynomial import ONE, T, ZERO, Poly, delta_truncate, poly_rev
from .poset import PosetError
from .incidence import (
    IncidenceElement,
    WeakRank,
    delta_op,
    invert,
    solve_f,
    solve_g,
    validate_kernel,
    z_function,
)
from .status import CheckResult

DEFAULT_MAX_GROUP = 10_000


class GroupTooLarge(ValueError):
    """Generated group exceeded the configured size bound."""


class NotAutomorphism(ValueError):
    """A generator fails to be an order/rank-preserving bijection."""


class AssemblyInconsistent(ValueError):
    """Per-element values do not glue into an equivariant element.

    Raised when values computed on the fixed posets B^w fail class
    constancy or conjugation compatibility, or when an assembled solution
    fails its product cross-check.  For the solvers this signals that the
    input was not actually an equivariant kernel.
    """


def perm_mul(a, b):
    """Compose permutations: (a * b)(z) = a(b(z))."""
    return tuple(a[z] for z in b)


def perm_inv(a):
    inv = [0] * len(a)
    for z, w in enumerate(a):
        inv[w] = z
    return tuple(inv)


def _group_bound(max_group):
    if max_group is not None:
        return max_group
    env = os.environ.get("KLS_MAX_GROUP")
    return int(env) if env else DEFAULT_MAX_GROUP


class PermAction:
    """A finite group of poset automorphisms, given by generators.

    Generators are permutations of the element indices.  Each one must
    preserve the order relation in both directions, preserve the rank
    function when the poset has one, and preserve ``weak_rank`` when one is
    supplied.  The full group is generated eagerly (breadth-first) so that
    stabilizers, orbits and conjugacy classes are plain set operations; a
    size bound (argument, else the KLS_MAX_GROUP environment variable,
    else 10^4) keeps that from exploding.
    """

    def __init__(self, poset, generators, weak_rank=None, max_group=None):
        self.poset = poset
        self.weak_rank = weak_rank
        gens = []
        for gen in generators:
            g = tuple(gen)
            self._check_automorphism(g)
            if g not in gens:
                gens.append(g)
        self.generators = tuple(sorted(gens))
        bound = _group_bound(max_group)
        ident = tuple(range(poset.n))
        seen = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for a in frontier:
                for g in self.generators:
                    b = perm_mul(g, a)
                    if b not in seen:
                        if len(seen) >= bound:
                            raise GroupTooLarge(
                                f"group closure exceeds bound {bound}")
                        seen.add(b)
                        nxt.append(b)
            frontier = nxt
        self.elements = tuple(sorted(seen))
        self.identity = ident
        self._index = {w: k for k, w in enumerate(self.elements)}
        self._stab_cache = {}
        self._fixed_cache = {}
        self._class_cache = {}

    def _check_automorphism(self, g):
        poset = self.poset
        n = poset.n
        if sorted(g) != list(range(n)):
            raise NotAutomorphism(f"not a permutation of 0..{n - 1}: {g}")
        for i in range(n):
            image = 0
            for j in range(n):
                if (poset.up[i] >> j) & 1:
                    image |= 1 << g[j]
            if image != poset.up[g[i]]:
                raise NotAutomorphism(
                    f"permutation does not preserve the order at element {i}")
        if poset.rank is not None:
            for i in range(n):
                if poset.rank[g[i]] != poset.rank[i]:
                    raise NotAutomorphism(
                        f"permutation does not preserve rank at element {i}")
        if self.weak_rank is not None:
            for (i, j) in poset.intervals():
                if self.weak_rank.value(g[i], g[j]) != self.weak_rank.value(i, j):
                    raise NotAutomorphism(
                        "permutation does not preserve the weak rank "
                        f"on interval ({i}, {j})")

    def __len__(self):
        return len(self.elements)

    def element_id(self, w):
        return self._index[tuple(w)]

    def orbit(self, z):
        return frozenset(w[z] for w in self.elements)

    def orbits(self):
        seen = set()
        out = []
        for z in range(self.poset.n):
            if z in seen:
                continue
            orb = self.orbit(z)
            seen |= orb
            out.append(orb)
        return out

    def stabilizer(self, *points):
        """Subgroup fixing every listed element pointwise."""
        key = tuple(points)
        cached = self._stab_cache.get(key)
        if cached is None:
            cached = frozenset(
                w for w in self.elements if all(w[z] == z for z in points))
            self._stab_cache[key] = cached
        return cached

    def conjugacy_classes(self, subgroup=None):
        """Conjugacy classes of a subgroup, each as a frozenset.

        Classes of the whole group by default; sorted by their smallest
        member so that representatives are deterministic.
        """
        group = frozenset(self.elements) if subgroup is None else frozenset(subgroup)
        cached = self._class_cache.get(group)
        if cached is not None:
            return cached
        remaining = set(group)
        classes = []
        while remaining:
            w = min(remaining)
            cls = frozenset(perm_mul(perm_mul(x, w), perm_inv(x)) for x in group)
            remaining -= cls
            classes.append(cls)
        classes.sort(key=min)
        self._class_cache[group] = classes
        return classes

    def orbit_reps(self, candidates, subgroup=None):
        """Smallest-index representatives of the subgroup orbits on a set."""
        group = self.elements if subgroup is None else subgroup
        todo = set(candidates)
        reps = []
        while todo:
            z = min(todo)
            todo -= {w[z] for w in group}
            reps.append(z)
        return reps

    def fixed_poset(self, w):
        """Fixed subposet of w with its embedding and derived data.

        Returns (poset, embedding, position) where position maps an
        ambient index to its index in the fixed poset.
        """
        w = tuple(w)
        cached = self._fixed_cache.get(w)
        if cached is None:
            sub, emb = self.poset.fixed_subposet(w)
            pos = {z: k for k, z in enumerate(emb)}
            self._fixed_cache[w] = (sub, emb, pos)
            cached = self._fixed_cache[w]
        return cached

    def __repr__(self):
        return (f"PermAction(|W|={len(self.elements)}, "
                f"generators={len(self.generators)}, n={self.poset.n})")


def validate_action(action, poset=None, rank=None, q=None):
    """Re-check an action against a poset, a rank function and a fixed point.

    Construction already rejects non-automorphisms; this is the reporting
    variant used by file validation, and it adds the two conditions that
    depend on context: invariance of an explicit rank function and
    pointwise fixing of a designated element q.
    """
    if poset is not None and not action.poset.same_order(poset):
        return CheckResult.failed("action-poset-mismatch",
                                  detail="action was built on a different poset")
    ranks = rank if rank is not None else action.poset.rank
    if ranks is not None:
        for w in action.generators:
            for z in range(action.poset.n):
                if ranks[w[z]] != ranks[z]:
                    return CheckResult.failed(
                        "rank-not-invariant", witness={"w": list(w), "z": z})
    if q is not None:
        for w in action.generators:
            if w[q] != q:
                return CheckResult.failed(
                    "q-not-fixed", witness={"w": list(w), "q": q})
    return CheckResult.passed()


class ClassPoly:
    """Polynomial with rational class-function coefficients.

    The carrier is a concrete subgroup (frozenset of permutations) and the
    value is one ordinary polynomial per carrier element, constant on the
    carrier's conjugacy classes.  Addition and multiplication are pointwise
    (multiplication of characters is the character of the tensor product);
    ``res``/``induce`` move between carriers.
    """

    __slots__ = ("group", "values")

    def __init__(self, group, values, validate=True):
        self.group = frozenset(group)
        vals = {}
        for w in self.group:
            v = values.get(w)
            if v is None:
                raise ValueError(f"missing value on carrier element {w}")
            vals[w] = v if isinstance(v, Poly) else Poly(v)
        self.values = vals
        if len(vals) != len(values):
            raise ValueError("value keys outside the carrier subgroup")
        if validate:
            self._check_class_constant()

    def _check_class_constant(self):
        for x in self.group:
            xi = perm_inv(x)
            for w in self.group:
                if self.values[perm_mul(perm_mul(x, w), xi)] != self.values[w]:
                    raise ValueError(
                        "values are not constant on conjugacy classes")

    @classmethod
    def constant(cls, group, poly):
        poly = poly if isinstance(poly, Poly) else Poly(poly)
        return cls(group, {w: poly for w in group}, validate=False)

    def ev(self, w):
        return self.values[tuple(w)]

    @property
    def is_zero(self):
        return all(not v.coeffs for v in self.values.values())

    @property
    def degree(self):
        return max(v.degree for v in self.values.values())

    def _same_carrier(self, other):
        if self.group != other.group:
            raise ValueError("class polynomials live on different carriers")

    def __eq__(self, other):
        if not isinstance(other, ClassPoly):
            return NotImplemented
        return self.group == other.group and self.values == other.values

    def __add__(self, other):
        self._same_carrier(other)
        return ClassPoly(self.group,
                         {w: self.values[w] + other.values[w] for w in self.group},
                         validate=False)

    def __sub__(self, other):
        self._same_carrier(other)
        return ClassPoly(self.group,
                         {w: self.values[w] - other.values[w] for w in self.group},
                         validate=False)

    def __neg__(self):
        return ClassPoly(self.group, {w: -v for w, v in self.values.items()},
                         validate=False)

    def __mul__(self, other):
        self._same_carrier(other)
        return ClassPoly(self.group,
                         {w: self.values[w] * other.values[w] for w in self.group},
                         validate=False)

    def scale(self, c):
        c = c if isinstance(c, Poly) else Poly(c)
        return ClassPoly(self.group, {w: v * c for w, v in self.values.items()},
                         validate=False)

    def twist(self, signs):
        """Multiply the value at each carrier element by its own scalar."""
        return ClassPoly(self.group,
                         {w: v * signs[w] for w, v in self.values.items()},
                         validate=False)

    def rev(self, r):
        return ClassPoly(self.group,
                         {w: poly_rev(v, r) for w, v in self.values.items()},
                         validate=False)

    def delta(self, r):
        return ClassPoly(self.group,
                         {w: delta_truncate(v, r) for w, v in self.values.items()},
                         validate=False)

    def res(self, subgroup):
        subgroup = frozenset(subgroup)
        if not subgroup <= self.group:
            raise ValueError("restriction target is not a subgroup of the carrier")
        return ClassPoly(subgroup, {w: self.values[w] for w in subgroup},
                         validate=False)

    def induce(self, group):
        """Induce to a bigger carrier by the averaged-conjugation formula.

        The value at g is (1/|H|) * sum of the values at x^{-1} g x over
        all x in the big group for which the conjugate lands in the old
        carrier H.
        """
        group = frozenset(group)
        if not self.group <= group:
            raise ValueError("induction target does not contain the carrier")
        unit = Fraction(1, len(self.group))
        values = {}
        for g in group:
            total = ZERO
            for x in group:
                conj = perm_mul(perm_mul(perm_inv(x), g), x)
                if conj in self.group:
                    total = total + self.values[conj]
            values[g] = total * unit
        return ClassPoly(group, values, validate=False)

    def nonintegral_values(self):
        """Coefficient values that fail integrality, as (w, i, value)."""
        bad = []
        for w in sorted(self.values):
            for i, c in enumerate(self.values[w].coeffs):
                if c.denominator != 1:
                    bad.append((w, i, c))
        return bad

    def __repr__(self):
        return f"ClassPoly(|carrier|={len(self.group)})"


class EquivIncidenceElement:
    """Incidence element whose interval values are class polynomials.

    ``vals`` maps a comparable pair (i, j) to a ClassPoly whose carrier is
    the stabilizer of the pair.  Two conditions make such data equivariant:
    each value is a class function on its stabilizer (checked by ClassPoly),
    and values on intervals in the same orbit determine each other by
    conjugation; ``validate_definition`` checks both and constructors used
    on untrusted data run it.
    """

    __slots__ = ("action", "weak_rank", "vals")

    def __init__(self, action, weak_rank, vals=None, validate=True):
        self.action = action
        self.weak_rank = weak_rank
        self.vals = {}
        for (i, j), cp in (vals or {}).items():
            if not action.poset.leq(i, j):
                raise ValueError(f"({i}, {j}) is not an interval")
            if cp.group != action.stabilizer(i, j):
                raise ValueError(
                    f"value on ({i}, {j}) does not live on the stabilizer")
            if not cp.is_zero:
                self.vals[(i, j)] = cp
        if validate:
            result = self.validate_definition()
            if not result:
                raise AssemblyInconsistent(result.describe())

    def validate_definition(self):
        """Check conjugation compatibility across interval orbits.

        The value on (i, j) evaluated at u must equal the value on
        (w i, w j) evaluated at w u w^{-1}.  Checking generators suffices:
        the condition for a product of generators follows step by step,
        provided the checked pairs cover whole interval orbits.
        """
        action = self.action
        pairs = set(self.vals)
        for (i, j) in list(pairs):
            for w in action.elements:
                pairs.add((w[i], w[j]))
        for (i, j) in sorted(pairs):
            cp = self.value(i, j)
            for w in action.generators:
                other = self.value(w[i], w[j])
                winv = perm_inv(w)
                for u in cp.group:
                    conj = perm_mul(perm_mul(w, u), winv)
                    if cp.values[u] != other.values[conj]:
                        return CheckResult.failed(
                            "conjugation-compatibility",
                            witness={"interval": [i, j], "w": list(w),
                                     "u": list(u)})
        return CheckResult.passed()

    def value(self, i, j):
        cp = self.vals.get((i, j))
        if cp is None:
            return ClassPoly.constant(self.action.stabilizer(i, j), ZERO)
        return cp

    @property
    def support(self):
        return sorted(self.vals)

    def _same_carrier(self, other):
        if self.action is not other.action or self.weak_rank != other.weak_rank:
            raise ValueError("elements live on different carriers")

    def __eq__(self, other):
        if not isinstance(other, EquivIncidenceElement):
            return NotImplemented
        self._same_carrier(other)
        return self.vals == other.vals

    def __add__(self, other):
        self._same_carrier(other)
        out = dict(self.vals)
        for key, cp in other.vals.items():
            cur = out.get(key)
            out[key] = cp if cur is None else cur + cp
        return EquivIncidenceElement(self.action, self.weak_rank, out,
                                     validate=False)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return EquivIncidenceElement(
            self.action, self.weak_rank,
            {key: -cp for key, cp in self.vals.items()}, validate=False)

    def __mul__(self, other):
        return equiv_multiply(self, other)

    def mask(self, pred):
        return EquivIncidenceElement(
            self.action, self.weak_rank,
            {(i, j): cp for (i, j), cp in self.vals.items() if pred(i, j)},
            validate=False)

    def scale(self, c):
        """Multiply every value by a fixed polynomial or scalar."""
        return EquivIncidenceElement(
            self.action, self.weak_rank,
            {key: cp.scale(c) for key, cp in self.vals.items()},
            validate=False)

    def __repr__(self):
        return (f"EquivIncidenceElement(n={self.action.poset.n}, "
                f"support={len(self.vals)})")


def equiv_delta(action, weak_rank):
    """Identity of the equivariant incidence algebra."""
    vals = {(z, z): ClassPoly.constant(action.stabilizer(z, z), ONE)
            for z in range(action.poset.n)}
    return EquivIncidenceElement(action, weak_rank, vals, validate=False)


def equiv_constant(action, p):
    """Embed an invariant ordinary incidence element as constants.

    The value on every interval becomes the constant class polynomial, so
    the input must take equal values on intervals in the same orbit; a
    CarrierMismatch-style ValueError is raised otherwise.
    """
    if p.poset is not action.poset and not p.poset.same_order(action.poset):
        raise ValueError("element lives on a different poset than the action")
    vals = {}
    for (i, j), poly in p.vals.items():
        for w in action.generators:
            if p.value(w[i], w[j]) != poly:
                raise ValueError(
                    f"values on the orbit of ({i}, {j}) differ; "
                    "element is not invariant")
        vals[(i, j)] = ClassPoly.constant(action.stabilizer(i, j), poly)
    return EquivIncidenceElement(action, p.weak_rank, vals, validate=False)


def ev_w(p, w):
    """Evaluate at a group element, landing on the fixed poset.

    All class functions are evaluated at w and the result is an ordinary
    incidence element on B^w carrying the restricted weak rank.
    """
    w = tuple(w)
    action = p.action
    sub, emb, pos = action.fixed_poset(w)
    wr = p.weak_rank.restrict(sub, emb)
    vals = {}
    for (i, j), cp in p.vals.items():
        if w[i] == i and w[j] == j:
            poly = cp.ev(w)
            if poly.coeffs:
                vals[(pos[i], pos[j])] = poly
    return IncidenceElement(sub, wr, vals)


def equiv_multiply(p, q):
    """Convolution with induction/restriction between stabilizers.

    On an interval [i, j] the product sums, over representatives z of the
    stabilizer orbits on [i, j], the induction to W_{i,j} of the product of
    the two restrictions to the three-point stabilizer W_{i,z,j}.  Grouping
    an orbit into one induced term is what keeps all coefficients rational
    without dividing by orbit sizes.
    """
    p._same_carrier(q)
    action = p.action
    poset = action.poset
    out = {}
    by_first = {}
    for (i, z) in p.vals:
        by_first.setdefault(i, []).append(z)
    for i in range(poset.n):
        firsts = by_first.get(i)
        if not firsts:
            continue
        for j in range(poset.n):
            if not poset.leq(i, j):
                continue
            stab = action.stabilizer(i, j)
            candidates = [z for z in firsts if poset.leq(z, j)]
            if not candidates:
                continue
            total = None
            for z in action.orbit_reps(candidates, subgroup=stab):
                a = p.value(i, z)
                b = q.value(z, j)
                if a.is_zero or b.is_zero:
                    continue
                small = frozenset(w for w in stab if w[z] == z)
                term = (a.res(small) * b.res(small)).induce(stab)
                total = term if total is None else total + term
            if total is not None and not total.is_zero:
                out[(i, j)] = total
    return EquivIncidenceElement(action, p.weak_rank, out, validate=False)


def equiv_rev(p):
    """Reverse each value at the weak rank of its interval."""
    vals = {(i, j): cp.rev(p.weak_rank.value(i, j))
            for (i, j), cp in p.vals.items()}
    return EquivIncidenceElement(p.action, p.weak_rank, vals, validate=False)


def equiv_delta_op(p):
    """Apply the half-degree difference operator valuewise."""
    vals = {}
    for (i, j), cp in p.vals.items():
        if i == j:
            continue
        vals[(i, j)] = cp.delta(p.weak_rank.value(i, j))
    return EquivIncidenceElement(p.action, p.weak_rank, vals, validate=False)


def _fixed_natural_rank(action, w):
    sub, emb, _pos = action.fixed_poset(w)
    return sub.natural_rank()


def equiv_hat(p):
    """Sign twist by the natural rank of each fixed poset.

    The value at w on interval (i, j) picks up (-1) to the rank difference
    of i and j inside B^w.  This is the involution matching hat on every
    fixed poset; it requires each B^w to be graded (an Eulerian action).
    """
    action = p.action
    rank_of = {}
    for w in action.elements:
        try:
            rank_of[w] = _fixed_natural_rank(action, w)
        except PosetError as exc:
            raise ValueError(
                f"fixed poset of {w} is not graded; hat is undefined: {exc}"
            ) from exc
    vals = {}
    for (i, j), cp in p.vals.items():
        signs = {}
        for w in cp.group:
            _sub, _emb, pos = action.fixed_poset(w)
            ranks = rank_of[w]
            signs[w] = -1 if (ranks[pos[j]] - ranks[pos[i]]) % 2 else 1
        vals[(i, j)] = cp.twist(signs)
    return EquivIncidenceElement(p.action, p.weak_rank, vals, validate=False)


def pullback(p, subaction):
    """Restrict an equivariant element to a subgroup's action.

    The subgroup is given as its own action on the same poset and must be
    contained in the original group; values restrict carrier by carrier.
    Restricting to the trivial group recovers the ordinary element (up to
    the constant embedding).
    """
    if subaction.poset is not p.action.poset and \
            not subaction.poset.same_order(p.action.poset):
        raise ValueError("pullback target acts on a different poset")
    big = set(p.action.elements)
    if any(w not in big for w in subaction.elements):
        raise ValueError("pullback target is not a subgroup of the source")
    vals = {}
    for (i, j), cp in p.vals.items():
        small = subaction.stabilizer(i, j)
        vals[(i, j)] = cp.res(small)
    return EquivIncidenceElement(subaction, p.weak_rank, vals, validate=False)


def is_eulerian_action(action):
    """Check that every fixed poset is lower Eulerian.

    One representative per conjugacy class suffices (fixed posets of
    conjugate elements are isomorphic); the witness names the offending
    group element.
    """
    for cls in action.conjugacy_classes():
        w = min(cls)
        sub, _emb, _pos = action.fixed_poset(w)
        try:
            result = sub.is_lower_eulerian()
        except PosetError as exc:
            return CheckResult.failed(
                "fixed-poset-not-graded", witness={"w": list(w)},
                detail=str(exc))
        if not result:
            return CheckResult.failed(
                "fixed-poset-not-lower-eulerian", witness={"w": list(w)},
                detail=result.describe())
    return CheckResult.passed()


def equiv_kernel_validate(kappa):
    """Validate an equivariant kernel by reduction to fixed posets.

    Checks the defining conditions of the equivariant algebra on the
    element itself, then validates the evaluation at every group element
    as an ordinary kernel on its fixed poset.
    """
    defn = kappa.validate_definition()
    if not defn:
        return defn
    action = kappa.action
    for z in range(action.poset.n):
        if kappa.value(z, z) != ClassPoly.constant(action.stabilizer(z, z),
                                                   ONE):
            return CheckResult.failed("diagonal-not-one", witness={"z": z})
    for w in action.elements:
        result = validate_kernel(ev_w(kappa, w))
        if not result:
            return CheckResult.failed(
                "fixed-poset-kernel", witness={"w": list(w)},
                detail=result.describe())
    return CheckResult.passed()


def _assemble(action, weak_rank, per_w):
    """Glue per-fixed-poset incidence elements into class-function form.

    ``per_w`` maps each group element to an incidence element on its fixed
    poset.  The value on (i, j) collects, for every w stabilizing the pair,
    the per-w value at the corresponding fixed-poset interval.  Class
    constancy and conjugation compatibility of the collected data are
    exactly what makes the input consistent, so both are validated and
    failures raise AssemblyInconsistent.
    """
    vals = {}
    for (i, j) in action.poset.intervals():
        stab = action.stabilizer(i, j)
        values = {}
        for w in stab:
            _sub, _emb, pos = action.fixed_poset(w)
            values[w] = per_w[w].value(pos[i], pos[j])
        try:
            cp = ClassPoly(stab, values)
        except ValueError as exc:
            raise AssemblyInconsistent(
                f"interval ({i}, {j}): {exc}") from exc
        if not cp.is_zero:
            vals[(i, j)] = cp
    try:
        return EquivIncidenceElement(action, weak_rank, vals, validate=True)
    except AssemblyInconsistent:
        raise
    except ValueError as exc:
        raise AssemblyInconsistent(str(exc)) from exc


def _crosscheck_interval(p):
    """Deterministic interval for solver cross-checks.

    The interval of maximal weak rank, ties broken by smallest index pair:
    the deepest interval exercises the longest recursion, and determinism
    keeps failures reproducible.
    """
    best = None
    for (i, j) in p.action.poset.intervals():
        key = (p.weak_rank.value(i, j), (-i, -j))
        if best is None or key > best[0]:
            best = (key, (i, j))
    return best[1]


def _multiply_at(p, q, i, j):
    """One interval of equiv_multiply, for cheap cross-checks."""
    action = p.action
    poset = action.poset
    stab = action.stabilizer(i, j)
    total = ClassPoly.constant(stab, ZERO)
    for z in action.orbit_reps(poset.elements_between(i, j), subgroup=stab):
        a = p.value(i, z)
        b = q.value(z, j)
        if a.is_zero or b.is_zero:
            continue
        small = frozenset(w for w in stab if w[z] == z)
        total = total + (a.res(small) * b.res(small)).induce(stab)
    return total


def _solve_per_w(kappa, solver):
    action = kappa.action
    per_w = {}
    for w in action.elements:
        per_w[w] = solver(ev_w(kappa, w))
    return per_w


def equiv_solve_g(kappa):
    """Equivariant left solution: rev(g) = g * kappa, g below half degree.

    Solved on every fixed poset separately, reassembled, and cross-checked
    on one deterministic interval through the induction/restriction
    product.
    """
    g = _assemble(kappa.action, kappa.weak_rank, _solve_per_w(kappa, solve_g))
    i, j = _crosscheck_interval(kappa)
    lhs = equiv_rev(g).value(i, j)
    rhs = _multiply_at(g, kappa, i, j)
    if lhs != rhs:
        raise AssemblyInconsistent(
            f"solved g fails rev(g) = g*kernel on interval ({i}, {j})")
    return g


def equiv_solve_f(kappa):
    """Equivariant right solution: rev(f) = kappa * f."""
    f = _assemble(kappa.action, kappa.weak_rank, _solve_per_w(kappa, solve_f))
    i, j = _crosscheck_interval(kappa)
    lhs = equiv_rev(f).value(i, j)
    rhs = _multiply_at(kappa, f, i, j)
    if lhs != rhs:
        raise AssemblyInconsistent(
            f"solved f fails rev(f) = kernel*f on interval ({i}, {j})")
    return f


def equiv_z_function(kappa, g=None, f=None):
    """Equivariant Z = g * kappa * f, assembled from the fixed posets."""
    action = kappa.action
    per_g = ({w: ev_w(g, w) for w in action.elements} if g is not None
             else _solve_per_w(kappa, solve_g))
    per_f = ({w: ev_w(f, w) for w in action.elements} if f is not None
             else _solve_per_w(kappa, solve_f))
    per_z = {w: z_function(ev_w(kappa, w), g=per_g[w], f=per_f[w])
             for w in action.elements}
    z = _assemble(action, kappa.weak_rank, per_z)
    if z != equiv_rev(z):
        raise AssemblyInconsistent("assembled Z is not symmetric")
    i, j = _crosscheck_interval(kappa)
    g_elem = g if g is not None else _assemble(action, kappa.weak_rank, per_g)
    f_elem = f if f is not None else _assemble(action, kappa.weak_rank, per_f)
    if _multiply_at(equiv_rev(g_elem), f_elem, i, j) != z.value(i, j):
        raise AssemblyInconsistent(
            f"assembled Z disagrees with rev(g)*f on interval ({i}, {j})")
    return z


def equiv_invert(p):
    """Inverse, computed on every fixed poset and reassembled."""
    action = p.action
    per_w = {w: invert(ev_w(p, w)) for w in action.elements}
    return _assemble(action, p.weak_rank, per_w)


def nonintegral_report(p):
    """Class-function values failing integrality, with their intervals.

    Virtual characters take integer values; rationals appearing anywhere in
    a solved element indicate either a genuinely non-integral input or a
    bug, so callers report these rather than failing silently.
    """
    bad = []
    for (i, j) in sorted(p.vals):
        for (w, k, value) in p.vals[(i, j)].nonintegral_values():
            bad.append({"interval": [i, j], "w": list(w), "coefficient": k,
                        "value": str(value)})
    return bad


def classpoly_json(action, cp):
    """Serialize one class polynomial against an action's element ids.

    Carrier elements are listed by id (position in the sorted element
    list); one coefficient vector is given per conjugacy class of the
    carrier, keyed by the class's smallest element id.
    """
    on = sorted(action.element_id(w) for w in cp.group)
    values = []
    for cls in action.conjugacy_classes(cp.group):
        rep = min(cls)
        values.append([action.element_id(rep), cp.values[rep].to_json()])
    values.sort(key=lambda kv: kv[0])
    return {"on": on, "values": values}


class EquivLocalInvariants:
    """Equivariant local invariants of a subdivision, on the cylinder."""

    __slots__ = ("triple", "action", "kappa", "g", "h_sigma", "ell_sigma",
                 "delta_ell")

    def __init__(self, triple, action, kappa, g, h_sigma, ell_sigma,
                 delta_ell):
        self.triple = triple
        self.action = action
        self.kappa = kappa
        self.g = g
        self.h_sigma = h_sigma
        self.ell_sigma = ell_sigma
        self.delta_ell = delta_ell

    def __repr__(self):
        return f"EquivLocalInvariants({self.triple!r}, |W|={len(self.action)})"


def equiv_local_invariants(triple, weak_rank, action, kappa):
    """Equivariant h, local-h and half-degree data of a subdivision.

    The action must fix q, preserve the cylinder rank, and have lower
    Eulerian fixed posets.  On each fixed poset the element q cuts out the
    fixed subdivision, whose ordinary local invariants are computed with
    the restricted weak rank and evaluated kernel; the per-element answers
    are assembled into class-function form.  Two defining identities are
    then re-verified through the equivariant product itself:
    (t - 1) h = g * (kernel masked to carrier pairs) and ell * g = h.
    """
    from .subdivision import SubdivisionTriple, local_invariants

    result = validate_action(action, triple.gamma, q=triple.q)
    if not result:
        raise ValueError(f"action incompatible with the triple: "
                         f"{result.describe()}")
    eul = is_eulerian_action(action)
    if not eul:
        raise ValueError(f"action is not Eulerian: {eul.describe()}")

    per = {}
    for w in action.elements:
        sub, emb, pos = action.fixed_poset(w)
        graded = sub.with_rank(sub.natural_rank())
        triple_w = SubdivisionTriple(graded, pos[triple.q])
        wr_w = weak_rank.restrict(graded, emb)
        kw = ev_w(kappa, w)
        kw = IncidenceElement(graded, wr_w, kw.vals)
        per[w] = local_invariants(triple_w, wr_w, kw)
    g = _assemble(action, weak_rank, {w: per[w].g for w in per})
    h_sigma = _assemble(action, weak_rank, {w: per[w].h_sigma for w in per})
    ell_sigma = _assemble(action, weak_rank,
                          {w: per[w].ell_sigma for w in per})
    delta_ell = _assemble(action, weak_rank,
                          {w: per[w].delta_ell for w in per})

    is_interior = {(i, j) for (i, j) in triple.gamma.intervals()
                   if triple.in_x(i) and triple.in_y(j)
                   and triple.sigma_of(i) == j}
    masked = kappa.mask(lambda i, j: (i, j) in is_interior)
    lhs = EquivIncidenceElement(
        action, weak_rank,
        {key: cp.scale(T - ONE) for key, cp in h_sigma.vals.items()},
        validate=False)
    if lhs != equiv_multiply(g, masked):
        raise AssemblyInconsistent(
            "(t-1)h does not match g * masked kernel equivariantly")
    if equiv_multiply(ell_sigma, g) != h_sigma:
        raise AssemblyInconsistent("ell * g does not match h equivariantly")
    return EquivLocalInvariants(triple, action, kappa, g, h_sigma, ell_sigma,
                                delta_ell)


def _equiv_agree(tag, *elems):
    first = elems[0]
    for other in elems[1:]:
        keys = sorted(set(first.vals) | set(other.vals))
        for (i, j) in keys:
            a = first.value(i, j)
            b = other.value(i, j)
            if a != b:
                labels = first.action.poset.labels
                return CheckResult.failed(
                    tag,
                    witness={"interval": [i, j],
                             "labels": [labels[i], labels[j]]})
    return CheckResult.passed()


def check_equivariant_theorem(triple, weak_rank, action, kappa,
                              invariants=None):
    """Verify the subdivision identities in the equivariant algebra.

    Both routes are exercised: the local invariants are assembled from the
    fixed posets (where each carries its own ordinary proof obligations),
    and the three identities relating g, f and Z across the carrier split
    are then checked with the induction/restriction product:

        g on mixed pairs   =  delta_ell * g          =  delta_ell * g|Y
        f on mixed pairs   = -f * hat(delta_ell)     = -f|X * hat(delta_ell)
        Z on mixed pairs   = -Z|X * hat(delta_ell) + rev(delta_ell) * Z|Y

    together with delta_ell = (g on mixed pairs) * g^{-1}.
    """
    li = invariants if invariants is not None else equiv_local_invariants(
        triple, weak_rank, action, kappa)
    g = li.g
    dl = li.delta_ell
    in_x, in_y = triple.in_x, triple.in_y

    def xy(p):
        return p.mask(lambda i, j: in_x(i) and in_y(j))

    def xx(p):
        return p.mask(lambda i, j: in_x(i) and in_x(j))

    def yy(p):
        return p.mask(lambda i, j: in_y(i) and in_y(j))

    result = _equiv_agree("theorem-g", xy(g), equiv_multiply(dl, g),
                          equiv_multiply(dl, yy(g)))
    if not result:
        return result

    result = _equiv_agree("delta-ell-from-g",
                          dl, equiv_multiply(xy(g), equiv_invert(g)))
    if not result:
        return result

    f = equiv_solve_f(kappa)
    dl_hat = equiv_hat(dl)
    result = _equiv_agree("corollary-f", xy(f),
                          -equiv_multiply(f, dl_hat),
                          -equiv_multiply(xx(f), dl_hat))
    if not result:
        return result

    z = equiv_z_function(kappa, g=g, f=f)
    result = _equiv_agree(
        "corollary-z", xy(z),
        -equiv_multiply(xx(z), dl_hat) + equiv_multiply(equiv_rev(dl), yy(z)))
    if not result:
        return result
    return CheckResult.passed()
