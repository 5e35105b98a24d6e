"""Incidence algebra of a finite poset and Kazhdan-Lusztig-Stanley solvers.

An incidence element assigns a polynomial to every interval of a carrier
poset.  A weak rank function bounds degrees interval by interval; it is a
first-class object and is never silently assumed to be the natural rank.

The central objects are kernels: elements kappa with unit diagonal,
deg kappa(z,z') <= r(z,z'), whose inverse equals their degree-r reversal.
For each kernel there are unique "half-degree" elements f and g with

    rev(g) = g * kappa        rev(f) = kappa * f

computed here by truncation: the low coefficients are forced, and the high
coefficients must satisfy mirror constraints which are asserted on every
interval (their failure is exactly a failure of the kernel property, and
raises MirrorConstraintViolated naming the interval).
"""

from __future__ import annotations

from functools import lru_cache

from .polynomial import (
    ONE,
    ZERO,
    Poly,
    delta_truncate,
    poly_div_t_minus_1,
    poly_rev,
)
from .poset import Poset, bits
from .status import CheckResult


class CarrierMismatch(ValueError):
    """Two incidence elements live on different posets or weak ranks."""


class NotInvertible(ValueError):
    """An incidence element has a diagonal value other than 1 or -1."""


class MirrorConstraintViolated(ValueError):
    """The forced low-degree solution cannot be completed symmetrically.

    Raised by the f/g solvers; equivalent to the kernel failing the
    inverse-equals-reversal property on the reported interval.
    """

    def __init__(self, message, interval):
        super().__init__(message)
        self.interval = interval


class WeakRank:
    """An integer on every interval: nonnegative, zero exactly on the
    diagonal, and additive along chains."""

    __slots__ = ("poset", "_values")

    def __init__(self, poset, values):
        self.poset = poset
        idx = poset.intervals()
        vals = {}
        for pair in idx:
            if pair not in values:
                raise ValueError(f"weak rank missing on interval {pair}")
            vals[pair] = int(values[pair])
        self._values = vals
        res = self.validate()
        if not res:
            raise ValueError(f"invalid weak rank: {res.describe()}")

    def value(self, i, j):
        try:
            return self._values[(i, j)]
        except KeyError:
            raise ValueError(f"({i}, {j}) is not an interval") from None

    def validate(self):
        p = self.poset
        for (i, j), r in self._values.items():
            if i == j:
                if r != 0:
                    return CheckResult.failed("diagonal", witness=(i, j))
            elif r <= 0:
                return CheckResult.failed("not-positive", witness=(i, j),
                                          detail=f"value {r} on strict interval")
        for (i, j), r in self._values.items():
            for z in p.elements_between(i, j):
                if self._values[(i, z)] + self._values[(z, j)] != r:
                    return CheckResult.failed(
                        "not-additive", witness=(i, z, j),
                        detail=f"{self._values[(i, z)]} + {self._values[(z, j)]} != {r}")
        return CheckResult.passed()

    @classmethod
    def natural(cls, poset):
        """Differences of the rank vector (computed if not attached)."""
        rho = poset.rank if poset.rank is not None else poset.natural_rank()
        vals = {(i, j): rho[j] - rho[i] for (i, j) in poset.intervals()}
        return cls(poset, vals)

    @classmethod
    def from_values(cls, poset, values):
        return cls(poset, values)

    def restrict(self, subposet, embedding):
        """Weak rank induced on a subposet via its embedding."""
        vals = {}
        for (a, b) in subposet.intervals():
            vals[(a, b)] = self._values[(embedding[a], embedding[b])]
        return WeakRank(subposet, vals)

    def __eq__(self, other):
        if not isinstance(other, WeakRank):
            return NotImplemented
        return self.poset == other.poset and self._values == other._values

    def __hash__(self):
        return hash((self.poset, tuple(sorted(self._values.items()))))

    def __repr__(self):
        return f"WeakRank(on {self.poset!r})"


def product_weak_rank(r1, r2, product_poset):
    """Weak rank on a direct product: the sum of the factor values.

    The product poset must be direct_product(r1.poset, r2.poset).
    """
    n2 = r2.poset.n
    vals = {}
    for (i, j) in product_poset.intervals():
        i1, i2 = divmod(i, n2)
        j1, j2 = divmod(j, n2)
        vals[(i, j)] = r1.value(i1, j1) + r2.value(i2, j2)
    return WeakRank(product_poset, vals)


class IncidenceElement:
    """A polynomial for every interval of a poset, with a weak rank handle.

    Only nonzero values are stored.  All binary operations require both
    operands to share the identical carrier (poset and weak rank); mixing
    carriers raises CarrierMismatch rather than guessing.
    """

    __slots__ = ("poset", "weak_rank", "vals")

    def __init__(self, poset, weak_rank, values=None):
        if weak_rank.poset != poset:
            raise CarrierMismatch("weak rank lives on a different poset")
        self.poset = poset
        self.weak_rank = weak_rank
        idx = poset.intervals()
        vals = {}
        if values:
            for pair, poly in values.items():
                if not idx.contains(*pair):
                    raise ValueError(f"{pair} is not an interval of the carrier")
                if not isinstance(poly, Poly):
                    poly = Poly(poly)
                if poly:
                    vals[pair] = poly
        self.vals = vals

    def value(self, i, j):
        if not self.poset.intervals().contains(i, j):
            raise ValueError(f"({i}, {j}) is not an interval")
        return self.vals.get((i, j), ZERO)

    def support(self):
        return sorted(self.vals)

    def _same_carrier(self, other):
        if self.poset != other.poset or self.weak_rank != other.weak_rank:
            raise CarrierMismatch("incidence elements live on different carriers")

    def __eq__(self, other):
        if not isinstance(other, IncidenceElement):
            return NotImplemented
        return (self.poset == other.poset and self.weak_rank == other.weak_rank
                and self.vals == other.vals)

    def __add__(self, other):
        self._same_carrier(other)
        out = dict(self.vals)
        for pair, poly in other.vals.items():
            out[pair] = out.get(pair, ZERO) + poly
        return IncidenceElement(self.poset, self.weak_rank, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return IncidenceElement(self.poset, self.weak_rank,
                                {p: -v for p, v in self.vals.items()})

    def __mul__(self, other):
        if isinstance(other, IncidenceElement):
            return convolve(self, other)
        return NotImplemented

    def scale(self, c):
        c = Poly._lift(c)
        return IncidenceElement(self.poset, self.weak_rank,
                                {p: v * c for p, v in self.vals.items()})

    def mask(self, pred):
        """Keep only the intervals where pred(i, j) is true."""
        return IncidenceElement(self.poset, self.weak_rank,
                                {p: v for p, v in self.vals.items() if pred(*p)})

    def __repr__(self):
        return f"IncidenceElement({len(self.vals)} nonzero intervals on {self.poset!r})"

    # -- serialization ----------------------------------------------------

    def to_json(self):
        return {"intervals": [[i, j, self.value(i, j).to_json()]
                              for (i, j) in self.support()]}

    @classmethod
    def from_json(cls, poset, weak_rank, payload):
        vals = {}
        for item in payload.get("intervals", []):
            i, j, coeffs = item
            vals[(int(i), int(j))] = Poly.from_json(coeffs)
        return cls(poset, weak_rank, vals)


def delta(poset, weak_rank):
    """The identity of the incidence algebra: 1 on the diagonal."""
    return IncidenceElement(poset, weak_rank,
                            {(i, i): ONE for i in range(poset.n)})


def convolve(a, b):
    """Incidence product: (a*b)(z,z') = sum over z <= w <= z' of
    a(z,w) b(w,z')."""
    a._same_carrier(b)
    by_first = {}
    for (w, j), poly in b.vals.items():
        by_first.setdefault(w, []).append((j, poly))
    out = {}
    for (i, w), pa in a.vals.items():
        for j, pb in by_first.get(w, ()):
            if a.poset.leq(i, j):
                key = (i, j)
                prod = pa * pb
                if key in out:
                    out[key] = out[key] + prod
                else:
                    out[key] = prod
    return IncidenceElement(a.poset, a.weak_rank, out)


def rev(p):
    """Intervalwise reversal at the weak rank: t^r p(z,z'; 1/t).

    Requires deg p(z,z') <= r(z,z') everywhere (DegreeExceedsRank
    otherwise).  An involution, and multiplicative across convolution
    because weak ranks add along chains.
    """
    out = {}
    for (i, j), poly in p.vals.items():
        out[(i, j)] = poly_rev(poly, p.weak_rank.value(i, j))
    return IncidenceElement(p.poset, p.weak_rank, out)


def _natural_rho(poset):
    if poset.rank is not None:
        return poset.rank
    return poset.natural_rank()


@lru_cache(maxsize=None)
def _lower_eulerian_cached(poset):
    return poset.is_lower_eulerian()


def hat(p):
    """Sign twist by the natural rank: p(z,z') -> (-1)^{rho(z')-rho(z)} p(z,z').

    The carrier must be lower Eulerian (this is what makes the twist
    interact correctly with reversal for rank-alternating kernels).
    """
    res = _lower_eulerian_cached(p.poset)
    if not res:
        raise ValueError(f"hat needs a lower Eulerian carrier: {res.describe()}")
    rho = _natural_rho(p.poset)
    out = {}
    for (i, j), poly in p.vals.items():
        out[(i, j)] = poly if (rho[j] - rho[i]) % 2 == 0 else -poly
    return IncidenceElement(p.poset, p.weak_rank, out)


def delta_op(p):
    """Intervalwise first-difference truncation to degrees below r/2.

    Zero on the diagonal by convention.
    """
    out = {}
    for (i, j) in p.poset.intervals():
        if i == j:
            continue
        v = delta_truncate(p.value(i, j), p.weak_rank.value(i, j))
        if v:
            out[(i, j)] = v
    return IncidenceElement(p.poset, p.weak_rank, out)


def invert(p):
    """Two-sided inverse; exists iff every diagonal value is 1 or -1."""
    poset = p.poset
    diag = {}
    for i in range(poset.n):
        d = p.value(i, i)
        if d != ONE and d != Poly([-1]):
            raise NotInvertible(f"diagonal value {d!r} at element {i}")
        diag[i] = d
    order = poset.intervals().by_weak_rank(p.weak_rank)
    inv = {}
    for (i, j) in order:
        if i == j:
            inv[(i, j)] = diag[i]
            continue
        acc = ZERO
        for w in poset.elements_between(i, j):
            if w == j:
                continue
            left = inv.get((i, w), ZERO)
            if left:
                right = p.value(w, j)
                if right:
                    acc = acc + left * right
        # q(i,j) p(j,j) = -sum  =>  q(i,j) = -sum * p(j,j)  (p(j,j)^2 = 1)
        q = -(acc * diag[j])
        if q:
            inv[(i, j)] = q
    return IncidenceElement(poset, p.weak_rank, inv)


def is_in_truncated(p):
    """deg p(z,z') <= r(z,z') on every interval."""
    for (i, j), poly in p.vals.items():
        if poly.degree > p.weak_rank.value(i, j):
            return CheckResult.failed("degree", witness=(i, j),
                                      detail=f"degree {poly.degree} > {p.weak_rank.value(i, j)}")
    return CheckResult.passed()


def is_unitriangular(p):
    for i in range(p.poset.n):
        if p.value(i, i) != ONE:
            return CheckResult.failed("diagonal", witness=(i, i),
                                      detail=f"value {p.value(i, i)!r}")
    return CheckResult.passed()


def validate_kernel(kappa):
    """Full kernel check: unit diagonal, degree bounds, and inverse equal
    to reversal.  The returned witness is the first offending interval."""
    res = is_unitriangular(kappa)
    if not res:
        return res
    res = is_in_truncated(kappa)
    if not res:
        return res
    product = convolve(kappa, rev(kappa))
    ident = delta(kappa.poset, kappa.weak_rank)
    for (i, j) in kappa.poset.intervals():
        if product.value(i, j) != ident.value(i, j):
            return CheckResult.failed(
                "inverse-reversal", witness=(i, j),
                detail=f"(kappa * rev kappa)({i},{j}) = {product.value(i, j)!r}")
    return CheckResult.passed()


def is_multiplicative(kappa):
    """kappa(z,z') = kappa(z,w) kappa(w,z') for every chain z <= w <= z'."""
    poset = kappa.poset
    for (i, j) in poset.intervals():
        target = kappa.value(i, j)
        for w in poset.elements_between(i, j):
            if kappa.value(i, w) * kappa.value(w, j) != target:
                return CheckResult.failed("multiplicative", witness=(i, w, j))
    return CheckResult.passed()


def is_rank_alternating(kappa):
    """Reversal equals the natural-rank sign twist."""
    r = rev(kappa)
    h = hat(kappa)
    if r == h:
        return CheckResult.passed()
    for (i, j) in kappa.poset.intervals():
        if r.value(i, j) != h.value(i, j):
            return CheckResult.failed("rank-alternating", witness=(i, j))
    return CheckResult.failed("rank-alternating")


def eulerian_kernel(poset):
    """The kernel (t-1)^(rank difference) with the natural weak rank.

    The carrier must be lower Eulerian; this is the kernel whose g/f theory
    specializes to the classical (toric) g- and h-polynomials.
    """
    res = poset.is_lower_eulerian()
    if not res:
        raise ValueError(f"Eulerian kernel needs a lower Eulerian poset: {res.describe()}")
    rho = _natural_rho(poset)
    wr = WeakRank.natural(poset)
    nmax = max(rho) - min(rho)
    powers = [ONE]
    tm1 = Poly([-1, 1])
    for _ in range(nmax):
        powers.append(powers[-1] * tm1)
    vals = {}
    for (i, j) in poset.intervals():
        vals[(i, j)] = powers[rho[j] - rho[i]]
    return IncidenceElement(poset, wr, vals)


def _check_solver_preconditions(kappa):
    res = is_unitriangular(kappa)
    if not res:
        raise ValueError(f"kernel must have unit diagonal: {res.describe()}")
    res = is_in_truncated(kappa)
    if not res:
        raise ValueError(f"kernel exceeds weak-rank degree bound: {res.describe()}")


def _mirror_check(d_poly, r, interval, labels):
    """Assert D_i = -D_{r-i} for i > r/2 and D_{r/2} = 0 for even r."""
    name = f"[{labels[interval[0]]}, {labels[interval[1]]}]"
    if d_poly and d_poly.degree > r:
        raise MirrorConstraintViolated(
            f"mirror constraint fails on interval {name}: defect has degree "
            f"{d_poly.degree} > weak rank {r}", interval)
    top = d_poly.degree + 1 if d_poly else 0
    for i in range(r // 2 + 1, top):
        if d_poly.coeff(i) != -d_poly.coeff(r - i):
            raise MirrorConstraintViolated(
                f"mirror constraint fails on interval {name} at degree {i}: "
                f"{d_poly.coeff(i)} != -({d_poly.coeff(r - i)})", interval)
    if r % 2 == 0 and d_poly.coeff(r // 2) != 0:
        raise MirrorConstraintViolated(
            f"mirror constraint fails on interval {name} at middle degree "
            f"{r // 2}: {d_poly.coeff(r // 2)} != 0", interval)


def _truncate_below_half(d_poly, r):
    """-(D) restricted to degrees < r/2."""
    return Poly([-d_poly.coeff(i) for i in range((r - 1) // 2 + 1)])


def solve_g(kappa):
    """The unique g with unit diagonal, deg < r/2 off-diagonal and
    rev(g) = g * kappa.

    Low coefficients are forced by the recursion; the remaining mirror
    constraints are asserted interval by interval and raise
    MirrorConstraintViolated when kappa is not actually a kernel.
    """
    _check_solver_preconditions(kappa)
    poset = kappa.poset
    order = poset.intervals().by_weak_rank(kappa.weak_rank)
    g = {}
    for (i, j) in order:
        if i == j:
            g[(i, j)] = ONE
            continue
        r = kappa.weak_rank.value(i, j)
        d = ZERO
        for w in poset.elements_between(i, j):
            if w == j:
                continue
            left = g.get((i, w), ZERO)
            if left:
                right = kappa.value(w, j)
                if right:
                    d = d + left * right
        _mirror_check(d, r, (i, j), poset.labels)
        val = _truncate_below_half(d, r)
        if val:
            g[(i, j)] = val
    return IncidenceElement(poset, kappa.weak_rank, g)


def solve_f(kappa):
    """The unique f with unit diagonal, deg < r/2 off-diagonal and
    rev(f) = kappa * f."""
    _check_solver_preconditions(kappa)
    poset = kappa.poset
    order = poset.intervals().by_weak_rank(kappa.weak_rank)
    f = {}
    for (i, j) in order:
        if i == j:
            f[(i, j)] = ONE
            continue
        r = kappa.weak_rank.value(i, j)
        d = ZERO
        for w in poset.elements_between(i, j):
            if w == i:
                continue
            right = f.get((w, j), ZERO)
            if right:
                left = kappa.value(i, w)
                if left:
                    d = d + left * right
        _mirror_check(d, r, (i, j), poset.labels)
        val = _truncate_below_half(d, r)
        if val:
            f[(i, j)] = val
    return IncidenceElement(poset, kappa.weak_rank, f)


def z_function(kappa, g=None, f=None):
    """Z = g * kappa * f, with its defining identities verified.

    Checks Z = rev(g) * f = g * rev(f) and that Z is symmetric under
    reversal; any discrepancy means kappa was not a kernel.
    """
    if g is None:
        g = solve_g(kappa)
    if f is None:
        f = solve_f(kappa)
    z = convolve(convolve(g, kappa), f)
    alt1 = convolve(rev(g), f)
    alt2 = convolve(g, rev(f))
    if z != alt1 or z != alt2:
        raise ValueError("Z identities failed: kernel data is inconsistent")
    if rev(z) != z:
        raise ValueError("Z is not symmetric: kernel data is inconsistent")
    return z


def h_polynomial(poset, g=None):
    """h-polynomial of a lower Eulerian poset (Eulerian-kernel theory).

    Defined by t^n h(1/t) = sum over z of g([0,z]) (t-1)^(n - rho(z)),
    with n the rank of the poset.  For a simplicial complex's face poset
    this is the classical h-polynomial of the complex.
    """
    res = poset.is_lower_eulerian()
    if not res:
        raise ValueError(f"h-polynomial needs a lower Eulerian poset: {res.describe()}")
    if g is None:
        g = solve_g(eulerian_kernel(poset))
    bot = poset.bottom()
    raw = _natural_rho(poset)
    rho = [r - raw[bot] for r in raw]
    n = max(rho)
    tm1 = Poly([-1, 1])
    powers = [ONE]
    for _ in range(n):
        powers.append(powers[-1] * tm1)
    acc = ZERO
    for z in range(poset.n):
        if poset.leq(bot, z):
            acc = acc + g.value(bot, z) * powers[n - rho[z]]
    return poly_rev(acc, n)


def toric_h_boundary(poset, g_top=None):
    """h-polynomial of the boundary of an Eulerian poset of rank >= 1.

    Computed from the g-polynomial of the full poset:
    (t-1) h(boundary) = rev(g, n) - g.
    """
    res = poset.is_eulerian()
    if not res:
        raise ValueError(f"boundary h needs an Eulerian poset: {res.describe()}")
    rho = _natural_rho(poset)
    n = max(rho) - min(rho)
    if n < 1:
        raise ValueError("boundary h needs rank >= 1")
    if g_top is None:
        g = solve_g(eulerian_kernel(poset))
        g_top = g.value(poset.bottom(), poset.top())
    return poly_div_t_minus_1(poly_rev(g_top, n) - g_top)
