"""Strong formal subdivisions, mapping cylinders, and local invariants.

A strong formal subdivision sigma: X -> Y between lower Eulerian posets is
an order-preserving, rank-increasing, strongly surjective map whose fibers
satisfy a signed-count condition.  Such maps correspond bijectively to
triples (Gamma, rho, q): Gamma a lower Eulerian poset, rho a rank function,
q a join-admissible element above the minimum.  The cylinder direction
glues X below Y along sigma; the inverse direction splits Gamma at q.

Given a kernel kappa on the cylinder, the local h-polynomial h_sigma and
local invariant ell_sigma of the subdivision are defined on mixed
X-to-Y intervals by

    (t - 1) h_sigma = g * (kappa restricted to the pairs (x, sigma(x)))
    ell_sigma = h_sigma * g^{-1}

and Delta ell_sigma recovers the mixed block of g itself; the checkers
here verify that and its f/Z companions by two disjoint code paths.
"""

from __future__ import annotations

from .incidence import (
    IncidenceElement,
    WeakRank,
    convolve,
    delta,
    delta_op,
    eulerian_kernel,
    hat,
    invert,
    is_multiplicative,
    is_rank_alternating,
    rev,
    solve_f,
    solve_g,
    z_function,
)
from .polynomial import ONE, ZERO, Poly, poly_div_t_minus_1, poly_rev
from .poset import Poset, PosetError, bits, boolean_algebra, direct_product, segment_subdivision
from .status import CheckResult


class SubdivisionError(ValueError):
    """A subdivision, triple, or local-invariant contract was violated."""


class StrongFormalSubdivision:
    """A map sigma: X -> Y between ranked lower Eulerian posets.

    X and Y carry their rank vectors (Poset.rank); these need not be
    normalized to zero at the bottom, and the relative shift between them
    is meaningful.  sigma is stored as a tuple indexed by X elements.
    """

    __slots__ = ("X", "Y", "sigma", "x_embedding", "y_embedding")

    def __init__(self, X, Y, sigma, x_embedding=None, y_embedding=None):
        if X.rank is None or Y.rank is None:
            raise SubdivisionError("both posets must carry rank vectors")
        sigma = tuple(int(s) for s in sigma)
        if len(sigma) != X.n:
            raise SubdivisionError("sigma must assign a target to every element of X")
        if any(not 0 <= s < Y.n for s in sigma):
            raise SubdivisionError("sigma values out of range")
        self.X = X
        self.Y = Y
        self.sigma = sigma
        # embeddings into an ambient cylinder, when this object was split
        # off a triple; purely informational
        self.x_embedding = x_embedding
        self.y_embedding = y_embedding

    def __repr__(self):
        return f"StrongFormalSubdivision({self.X!r} -> {self.Y!r})"

    def validate(self):
        """Check the four defining conditions; the failure reason names the
        condition and the witness gives the offending elements."""
        X, Y, sigma = self.X, self.Y, self.sigma
        res = X.is_lower_eulerian()
        if not res:
            return CheckResult.failed("source-not-lower-eulerian", detail=res.describe())
        res = Y.is_lower_eulerian()
        if not res:
            return CheckResult.failed("target-not-lower-eulerian", detail=res.describe())
        for x in range(X.n):
            for x2 in bits(X.up[x]):
                if not Y.leq(sigma[x], sigma[x2]):
                    return CheckResult.failed("order-preserving", witness=(x, x2))
        for x in range(X.n):
            if X.rank[x] > Y.rank[sigma[x]]:
                return CheckResult.failed(
                    "rank-increasing", witness=x,
                    detail=f"rho_X = {X.rank[x]} > rho_Y(sigma) = {Y.rank[sigma[x]]}")
        hit = set(sigma)
        if len(hit) != Y.n:
            missing = next(y for y in range(Y.n) if y not in hit)
            return CheckResult.failed("strongly-surjective", witness=missing,
                                      detail="sigma is not surjective")
        for x in range(X.n):
            for y in bits(Y.up[sigma[x]]):
                found = False
                signed = 0
                for x2 in bits(X.up[x]):
                    if sigma[x2] == y:
                        if X.rank[x2] == Y.rank[y]:
                            found = True
                        signed += 1 if (Y.rank[y] - X.rank[x2]) % 2 == 0 else -1
                if not found:
                    return CheckResult.failed("strongly-surjective", witness=(x, y))
                if signed != 1:
                    return CheckResult.failed("signed-count", witness=(x, y),
                                              detail=f"signed fiber count {signed} != 1")
        return CheckResult.passed()


class SubdivisionTriple:
    """(Gamma, rho, q): a ranked lower Eulerian poset with a distinguished
    non-minimal element whose join with every element exists.

    All invariants are enforced at construction.  The split into
    X = elements not above q and Y = elements above q, with
    sigma(x) = x v q, is available through accessors.
    """

    __slots__ = ("gamma", "q", "_sigma_of")

    def __init__(self, gamma, q, rho=None):
        if rho is not None:
            gamma = gamma.with_rank(rho)
        if gamma.rank is None:
            raise SubdivisionError("triple needs a rank function")
        res = gamma.is_lower_eulerian()
        if not res:
            raise SubdivisionError(f"poset is not lower Eulerian: {res.describe()}")
        q = int(q)
        if not 0 <= q < gamma.n:
            raise SubdivisionError("q out of range")
        if q == gamma.bottom():
            raise SubdivisionError("q must differ from the minimum")
        sigma_of = {}
        for z in range(gamma.n):
            if gamma.leq(q, z):
                continue
            j = gamma.join(z, q)
            if j is None:
                raise SubdivisionError(f"q is not join-admissible: no join of "
                                       f"{gamma.labels[z]} and {gamma.labels[q]}")
            sigma_of[z] = j
        self.gamma = gamma
        self.q = q
        self._sigma_of = sigma_of

    def __repr__(self):
        return f"SubdivisionTriple({self.gamma!r}, q={self.gamma.labels[self.q]})"

    def in_y(self, z):
        return self.gamma.leq(self.q, z)

    def in_x(self, z):
        return not self.gamma.leq(self.q, z)

    def sigma_of(self, x):
        """The join x v q, for x in the X part."""
        return self._sigma_of[x]

    def x_elements(self):
        return [z for z in range(self.gamma.n) if self.in_x(z)]

    def y_elements(self):
        return bits(self.gamma.up[self.q])

    # -- masks over incidence elements -------------------------------------

    def mask_xy(self, p):
        """Restrict to intervals with lower end in X and upper end in Y."""
        return p.mask(lambda i, j: self.in_x(i) and self.in_y(j))

    def mask_xx(self, p):
        return p.mask(lambda i, j: self.in_x(i) and self.in_x(j))

    def mask_yy(self, p):
        return p.mask(lambda i, j: self.in_y(i) and self.in_y(j))

    def mask_interior(self, p):
        """Restrict to the pairs (x, sigma(x))."""
        return p.mask(lambda i, j: self.in_x(i) and self._sigma_of.get(i) == j)

    def xy_pairs(self):
        out = []
        for (i, j) in self.gamma.intervals():
            if self.in_x(i) and self.in_y(j):
                out.append((i, j))
        return out

    def to_json(self):
        return {"poset": self.gamma.to_json(), "q": self.q}

    @classmethod
    def from_json(cls, payload):
        gamma = Poset.from_json(payload["poset"])
        if gamma.rank is None:
            gamma = gamma.with_rank(gamma.natural_rank())
        return cls(gamma, payload["q"])


def triple_to_sfs(triple):
    """Split a triple into the subdivision it encodes.

    X = elements not above q (rank inherited), Y = elements above q (rank
    inherited minus one), sigma(x) = x v q.
    """
    gamma = triple.gamma
    xpos, xemb = gamma.lower_complement(triple.q)
    ypos, yemb = gamma.upper_set(triple.q)
    xpos = xpos.with_rank([gamma.rank[z] for z in xemb])
    ypos = ypos.with_rank([gamma.rank[z] - 1 for z in yemb])
    yindex = {z: k for k, z in enumerate(yemb)}
    sigma = [yindex[triple.sigma_of(z)] for z in xemb]
    return StrongFormalSubdivision(xpos, ypos, sigma,
                                   x_embedding=xemb, y_embedding=yemb)


def mapping_cylinder(sfs):
    """Glue X under Y along sigma and return the resulting triple.

    Elements of X keep their rank; elements of Y are shifted up by one;
    x <= y exactly when sigma(x) <= y.  The result is validated lower
    Eulerian with q = the minimum of Y (loud failure otherwise).
    """
    X, Y, sigma = sfs.X, sfs.Y, sfs.sigma
    nx = X.n
    up = []
    for x in range(nx):
        m = X.up[x]
        ymask = Y.up[sigma[x]]
        up.append(m | (ymask << nx))
    for y in range(Y.n):
        up.append(Y.up[y] << nx)
    labels = [f"X:{l}" for l in X.labels] + [f"Y:{l}" for l in Y.labels]
    rank = list(X.rank) + [r + 1 for r in Y.rank]
    gamma = Poset(up, labels, rank)
    q = nx + Y.bottom()
    return SubdivisionTriple(gamma, q)


def validate_sfs(sfs):
    """Convenience wrapper for StrongFormalSubdivision.validate."""
    return sfs.validate()


class LocalInvariants:
    """h_sigma, ell_sigma and Delta ell_sigma of a subdivision, plus the
    solver output g they were computed from (all on the cylinder)."""

    __slots__ = ("triple", "kappa", "g", "h_sigma", "ell_sigma", "delta_ell")

    def __init__(self, triple, kappa, g, h_sigma, ell_sigma, delta_ell):
        self.triple = triple
        self.kappa = kappa
        self.g = g
        self.h_sigma = h_sigma
        self.ell_sigma = ell_sigma
        self.delta_ell = delta_ell

    def __repr__(self):
        return f"LocalInvariants(on {self.triple!r})"


def local_invariants(triple, weak_rank, kappa, _skip_kernel_checks=False):
    """Compute h_sigma, ell_sigma, Delta ell_sigma on the cylinder.

    kappa must be multiplicative and rank-alternating (checked); the
    division by (t - 1) is exact for such kernels and NotDivisible
    propagates if the input data is inconsistent.

    Structural facts are verified before returning: degrees stay below the
    interval weak rank, ell is symmetric, h and ell agree on the pairs
    (x, sigma(x)), and the lowest coefficients match the kernel's top
    coefficient on the interior pairs.
    """
    gamma = triple.gamma
    if kappa.poset != gamma or kappa.weak_rank != weak_rank:
        raise SubdivisionError("kernel carrier does not match the triple")
    if not _skip_kernel_checks:
        res = is_multiplicative(kappa)
        if not res:
            raise SubdivisionError(f"kernel is not multiplicative: {res.describe()}")
        res = is_rank_alternating(kappa)
        if not res:
            raise SubdivisionError(f"kernel is not rank alternating: {res.describe()}")
    g = solve_g(kappa)
    kappa_interior = triple.mask_interior(kappa)
    h_raw = convolve(g, kappa_interior)
    h_vals = {}
    for pair, poly in h_raw.vals.items():
        h_vals[pair] = poly_div_t_minus_1(poly)
    h_sigma = IncidenceElement(gamma, weak_rank, h_vals)
    ell_sigma = convolve(h_sigma, invert(g))
    delta_ell = delta_op(ell_sigma)

    wr = weak_rank
    for (i, j) in triple.xy_pairs():
        r = wr.value(i, j)
        hv = h_sigma.value(i, j)
        lv = ell_sigma.value(i, j)
        if hv.degree > r - 1 or lv.degree > r - 1:
            raise SubdivisionError(f"local invariant degree exceeds {r - 1} on ({i}, {j})")
        if poly_rev(lv, r - 1) != lv:
            raise SubdivisionError(f"ell is not symmetric on ({i}, {j}): {lv!r}")
        kr = kappa.value(i, j).coeff(r)
        if triple.sigma_of(i) == j:
            if hv != lv:
                raise SubdivisionError(f"h != ell on interior pair ({i}, {j})")
            if lv.coeff(0) != kr:
                raise SubdivisionError(f"ell constant term != kernel top on ({i}, {j})")
        else:
            if lv.coeff(0) != 0:
                raise SubdivisionError(f"ell constant term nonzero on ({i}, {j})")
        if hv.coeff(0) != kr:
            raise SubdivisionError(f"h constant term != kernel top on ({i}, {j})")
    return LocalInvariants(triple, kappa, g, h_sigma, ell_sigma, delta_ell)


def _elements_agree(tag, *elems):
    """CheckResult comparing incidence elements pairwise, with the first
    differing interval as witness."""
    first = elems[0]
    for other in elems[1:]:
        if other.vals != first.vals:
            keys = sorted(set(first.vals) | set(other.vals))
            for pair in keys:
                if first.value(*pair) != other.value(*pair):
                    return CheckResult.failed(
                        tag, witness=pair,
                        detail=f"{first.value(*pair)!r} != {other.value(*pair)!r}")
    return CheckResult.passed()


def check_theorem_g(triple, kappa, invariants=None):
    """The mixed block of g equals Delta ell * g (and Delta ell * g|_Y),
    and Delta ell is recovered as g|_{X/Y} * g^{-1}.

    Left side: solver output, masked.  Right side: convolutions of the
    local invariants.  The code paths share nothing but the solver.
    """
    li = invariants if invariants is not None else local_invariants(
        triple, kappa.weak_rank, kappa)
    g = li.g
    lhs = triple.mask_xy(g)
    rhs_full = convolve(li.delta_ell, g)
    rhs_y = convolve(li.delta_ell, triple.mask_yy(g))
    res = _elements_agree("theorem-g", lhs, rhs_full, rhs_y)
    if not res:
        return res
    alt = convolve(triple.mask_xy(g), invert(g))
    return _elements_agree("delta-ell-from-g", li.delta_ell, alt)


def check_corollary_f(triple, kappa, invariants=None):
    """Mixed block of f equals -f * hat(Delta ell) = -f|_X * hat(Delta ell)."""
    li = invariants if invariants is not None else local_invariants(
        triple, kappa.weak_rank, kappa)
    f = solve_f(kappa)
    ell_hat = hat(li.delta_ell)
    lhs = triple.mask_xy(f)
    rhs_full = -convolve(f, ell_hat)
    rhs_x = -convolve(triple.mask_xx(f), ell_hat)
    return _elements_agree("corollary-f", lhs, rhs_full, rhs_x)


def check_corollary_z(triple, kappa, invariants=None):
    """Mixed block of Z equals -Z|_X * hat(Delta ell) + rev(Delta ell) * Z|_Y."""
    li = invariants if invariants is not None else local_invariants(
        triple, kappa.weak_rank, kappa)
    z = z_function(kappa, g=li.g)
    lhs = triple.mask_xy(z)
    rhs = (-convolve(triple.mask_xx(z), hat(li.delta_ell))
           + convolve(rev(li.delta_ell), triple.mask_yy(z)))
    return _elements_agree("corollary-z", lhs, rhs)


# --------------------------------------------------------------------------
# relative g-polynomials
# --------------------------------------------------------------------------


def relative_g(face_lattice, face, g=None):
    """Relative g-polynomial g(Q, F) of an Eulerian lattice Q at a face F.

    Defined by the recursion sum over E in [F, Q] of g(E, F) g([E, Q])
    equal to g(Q), with g(F, F) = g([0, F]).  The result is checked against
    the independent route Delta ell at the full interval of the triple
    (Q, natural rank, q = F); a mismatch raises SubdivisionError.
    """
    res = face_lattice.is_eulerian()
    if not res:
        raise SubdivisionError(f"relative g needs an Eulerian lattice: {res.describe()}")
    if g is None:
        g = solve_g(eulerian_kernel(face_lattice))
    bot, top = face_lattice.bottom(), face_lattice.top()
    if face == bot:
        raise SubdivisionError("relative g needs a nonempty face")
    rel = {}
    above = bits(face_lattice.up[face])
    rho = face_lattice.rank if face_lattice.rank is not None else face_lattice.natural_rank()
    for e in sorted(above, key=lambda z: rho[z]):
        acc = g.value(bot, e)
        for e2 in face_lattice.elements_between(face, e):
            if e2 == e:
                continue
            acc = acc - rel[e2] * g.value(e2, e)
        rel[e] = acc
    result = rel[top]

    if face != top:
        triple = SubdivisionTriple(face_lattice, face)
        kappa = eulerian_kernel(face_lattice)
        li = local_invariants(triple, kappa.weak_rank, kappa, _skip_kernel_checks=True)
        other = li.delta_ell.value(bot, top)
    else:
        other = g.value(bot, top)
    if result != other:
        raise SubdivisionError(
            f"relative g mismatch: recursion gives {result!r}, "
            f"local invariant gives {other!r}")
    return result


# --------------------------------------------------------------------------
# products and composition
# --------------------------------------------------------------------------


def id_sfs(poset):
    """The identity map as a subdivision of a ranked lower Eulerian poset."""
    if poset.rank is None:
        poset = poset.with_rank(poset.natural_rank())
    return StrongFormalSubdivision(poset, poset, tuple(range(poset.n)))


def product_sfs(s1, s2):
    """Componentwise product of two subdivisions."""
    X = direct_product(s1.X, s2.X)
    Y = direct_product(s1.Y, s2.Y)
    sigma = []
    for i1 in range(s1.X.n):
        for i2 in range(s2.X.n):
            sigma.append(s1.sigma[i1] * s2.Y.n + s2.sigma[i2])
    return StrongFormalSubdivision(X, Y, sigma)


def _cylinder_data(sfs):
    triple = mapping_cylinder(sfs)
    kappa = eulerian_kernel(triple.gamma)
    li = local_invariants(triple, kappa.weak_rank, kappa, _skip_kernel_checks=True)
    return triple, kappa, li


def check_product_identities(s1, s2):
    """Product laws for local invariants.

    Verifies, all on Eulerian-kernel cylinders with natural weak ranks:
    the product map is a subdivision; ell of the product is the product of
    the factor ells; the mixed block of g on the product cylinder is the
    double convolution of Delta ell with the factor target g's; and the
    identity-factor laws h_{id x sigma} = g x h_sigma,
    ell_{id x sigma} = delta x ell_sigma.
    """
    sp = product_sfs(s1, s2)
    res = sp.validate()
    if not res:
        return CheckResult.failed("product-not-sfs", witness=res.witness,
                                  detail=res.describe())
    t1, _, li1 = _cylinder_data(s1)
    t2, _, li2 = _cylinder_data(s2)
    tp, _, lip = _cylinder_data(sp)

    nx1, ny1 = s1.X.n, s1.Y.n
    nx2, ny2 = s2.X.n, s2.Y.n
    nxp = sp.X.n

    def cyl1(z, is_y):
        return nx1 + z if is_y else z

    def cyl2(z, is_y):
        return nx2 + z if is_y else z

    # ell of product = product of ells, on every mixed pair
    for (i, j) in tp.xy_pairs():
        x1, x2 = divmod(i, nx2)
        y1, y2 = divmod(j - nxp, ny2)
        lhs = lip.ell_sigma.value(i, j)
        rhs = (li1.ell_sigma.value(cyl1(x1, False), cyl1(y1, True))
               * li2.ell_sigma.value(cyl2(x2, False), cyl2(y2, True)))
        if lhs != rhs:
            return CheckResult.failed("product-ell", witness=(i, j),
                                      detail=f"{lhs!r} != {rhs!r}")

    # mixed block of g via Delta ell against the *target* g's
    gy1 = solve_g(eulerian_kernel(s1.Y))
    gy2 = solve_g(eulerian_kernel(s2.Y))
    for (i, j) in tp.xy_pairs():
        x1, x2 = divmod(i, nx2)
        y1, y2 = divmod(j - nxp, ny2)
        sb1, sb2 = s1.sigma[x1], s2.sigma[x2]
        acc = ZERO
        for yt1 in s1.Y.elements_between(sb1, y1):
            for yt2 in s2.Y.elements_between(sb2, y2):
                d = lip.delta_ell.value(i, nxp + yt1 * ny2 + yt2)
                if d:
                    acc = acc + d * gy1.value(yt1, y1) * gy2.value(yt2, y2)
        if acc != lip.g.value(i, j):
            return CheckResult.failed("product-g-cylinder", witness=(i, j),
                                      detail=f"{lip.g.value(i, j)!r} != {acc!r}")

    # identity-factor laws, with the first factor replaced by an identity map
    base = s1.Y
    idf = id_sfs(base)
    sid = product_sfs(idf, s2)
    tid, _, liid = _cylinder_data(sid)
    gb = solve_g(eulerian_kernel(base))
    nxi = sid.X.n
    for (i, j) in tid.xy_pairs():
        b1, x2 = divmod(i, nx2)
        b2, y2 = divmod(j - nxi, ny2)
        h_lhs = liid.h_sigma.value(i, j)
        h_rhs = gb.value(b1, b2) * li2.h_sigma.value(cyl2(x2, False), cyl2(y2, True))
        if h_lhs != h_rhs:
            return CheckResult.failed("id-factor-h", witness=(i, j),
                                      detail=f"{h_lhs!r} != {h_rhs!r}")
        l_lhs = liid.ell_sigma.value(i, j)
        l_rhs = (li2.ell_sigma.value(cyl2(x2, False), cyl2(y2, True))
                 if b1 == b2 else ZERO)
        if l_lhs != l_rhs:
            return CheckResult.failed("id-factor-ell", witness=(i, j),
                                      detail=f"{l_lhs!r} != {l_rhs!r}")
    return CheckResult.passed()


def check_composition(s1, s2):
    """ell of a composite subdivision is the convolution of the factor ells.

    s1: X -> Y and s2: Y -> Z must share the middle poset.  All three
    cylinders carry natural weak ranks and Eulerian kernels.
    """
    if s1.Y != s2.X:
        raise SubdivisionError("middle posets do not match")
    comp = StrongFormalSubdivision(s1.X, s2.Y,
                                   tuple(s2.sigma[s1.sigma[x]] for x in range(s1.X.n)))
    res = comp.validate()
    if not res:
        return CheckResult.failed("composite-not-sfs", witness=res.witness,
                                  detail=res.describe())
    _, _, li1 = _cylinder_data(s1)
    _, _, li2 = _cylinder_data(s2)
    tc, _, lic = _cylinder_data(comp)
    nx1, nx2, nxc = s1.X.n, s2.X.n, comp.X.n
    for (i, j) in tc.xy_pairs():
        x = i
        z = j - nxc
        acc = ZERO
        for y in range(s1.Y.n):
            if s1.Y.leq(s1.sigma[x], y) and s2.Y.leq(s2.sigma[y], z):
                a = li1.ell_sigma.value(x, nx1 + y)
                if a:
                    b = li2.ell_sigma.value(y, nx2 + z)
                    if b:
                        acc = acc + a * b
        if acc != lic.ell_sigma.value(i, j):
            return CheckResult.failed("composition", witness=(i, j),
                                      detail=f"{lic.ell_sigma.value(i, j)!r} != {acc!r}")
    return CheckResult.passed()


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------


def segment_subdivision_sfs(s):
    """The subdivision of a segment by s interior points, onto the
    undivided segment."""
    X = segment_subdivision(s)
    Y = segment_subdivision(0)
    nv = s + 2
    sigma = [0]  # empty face -> empty face
    for i in range(nv):
        if i == 0:
            sigma.append(1)        # left vertex
        elif i == nv - 1:
            sigma.append(2)        # right vertex
        else:
            sigma.append(3)        # interior vertex -> the edge
    sigma.extend([3] * (s + 1))    # every small edge -> the edge
    return StrongFormalSubdivision(X, Y, sigma)


def segment_refinement_sfs(fine, coarse_positions):
    """Refinement between segment subdivisions.

    fine: number of interior points of the finer subdivision.
    coarse_positions: sorted interior positions (subset of 1..fine) kept by
    the coarser one.
    """
    coarse_positions = sorted(set(int(p) for p in coarse_positions))
    if any(not 1 <= p <= fine for p in coarse_positions):
        raise SubdivisionError("coarse positions must be interior to the fine subdivision")
    X = segment_subdivision(fine)
    Y = segment_subdivision(len(coarse_positions))
    cuts = [0] + coarse_positions + [fine + 1]
    vert_of = {p: k for k, p in enumerate(cuts)}
    nvf = fine + 2
    nvc = len(cuts)

    def edge_containing(p):
        for k in range(len(cuts) - 1):
            if cuts[k] <= p < cuts[k + 1]:
                return k
        raise AssertionError

    sigma = [0]
    for p in range(nvf):
        if p in vert_of:
            sigma.append(1 + vert_of[p])
        else:
            sigma.append(1 + nvc + edge_containing(p))
    for e in range(fine + 1):
        sigma.append(1 + nvc + edge_containing(e))
    return StrongFormalSubdivision(X, Y, sigma)
