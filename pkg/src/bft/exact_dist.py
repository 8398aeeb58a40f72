"""Exact distribution engine for the uniform simple butterfly model.

Everything distributional here is computed over arbitrary-precision
rationals: the generating-polynomial recursion, the closed-form pmf and
moments, and Sturm-sequence root isolation with interlacing certificates.
Floating point (mpmath, at a configurable precision) appears only in the
quasi-power constant evaluations and the Gaussian local-limit estimate,
because double precision provably breaks down for the root computations
around degree twenty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import mpmath as mp

DEFAULT_DPS = 50
DEFAULT_ROOT_TOL = Fraction(1, 10**12)


class RationalPolynomial:
    """Dense polynomial with exact rational coefficients, index = power.

    Immutable; trailing zero coefficients are stripped, so the zero
    polynomial has an empty coefficient tuple and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, RationalPolynomial):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        if not isinstance(other, RationalPolynomial):
            other = RationalPolynomial((other,))
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return RationalPolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        if not isinstance(other, RationalPolynomial):
            other = RationalPolynomial((other,))
        return self + (-other)

    def __rsub__(self, other):
        return RationalPolynomial((other,)) + (-self)

    def __mul__(self, other):
        if not isinstance(other, RationalPolynomial):
            q = Fraction(other)
            return RationalPolynomial(tuple(c * q for c in self.coeffs))
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return RationalPolynomial()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(b):
                    out[i + j] += ca * cb
        return RationalPolynomial(out)

    __rmul__ = __mul__

    def __call__(self, x):
        acc = None
        for c in reversed(self.coeffs):
            acc = c if acc is None else acc * x + c
        if acc is None:
            return 0 * x if not isinstance(x, (int, Fraction)) else Fraction(0)
        return acc

    def derivative(self):
        return RationalPolynomial(
            tuple(i * c for i, c in enumerate(self.coeffs) if i)
        )

    def xdx(self):
        """Apply x * d/dx, the moment operator for generating polynomials."""
        return RationalPolynomial(
            (Fraction(0),) + tuple(i * c for i, c in enumerate(self.coeffs) if i)
        )

    def __repr__(self):
        return "RationalPolynomial(%r)" % (self.coeffs,)


_X = RationalPolynomial((0, 1))
_TWO_X = RationalPolynomial((0, 2))


@lru_cache(maxsize=None)
def f_poly(n):
    """The auxiliary polynomial family F_n: F_0 = 0, F_1 = 2, and
    F_{n+1} = 2x F_{n-1} + F_n. Exact rational coefficients."""
    if n == 0:
        return RationalPolynomial()
    if n == 1:
        return RationalPolynomial((2,))
    return _TWO_X * f_poly(n - 2) + f_poly(n - 1)


@lru_cache(maxsize=None)
def g_poly(n):
    """Generating polynomial of HS for the uniform n-bit simple model:
    G_n = 1 + (x-1)/2 * sum_{k<n} 2^{-k} F_k. Degree floor(n/2);
    coefficient of x^k equals pmf(n, k)."""
    acc = RationalPolynomial()
    for k in range(n):
        acc = acc + f_poly(k) * Fraction(1, 2**k)
    return 1 + (_X - 1) * Fraction(1, 2) * acc


def h_poly(n):
    """Integer count polynomial 2^n G_n: coefficient k counts the n-bit
    codes whose tree has HS exactly k."""
    return g_poly(n) * (2**n)


def _comb0(m, j):
    # binomial that is zero outside 0 <= j <= m (m may be negative)
    if j < 0 or m < 0 or j > m:
        return 0
    return comb(m, j)


def pmf(n, k):
    """P(HS = k) for the uniform n-bit simple model, exactly:
    2^(k-n) * [C(n-k, k) + C(n-k-1, k)]; zero outside 0 <= k <= n/2."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if k < 0 or 2 * k > n:
        return Fraction(0)
    return Fraction(_comb0(n - k, k) + _comb0(n - k - 1, k), 2 ** (n - k))


def moment(n, r):
    """r-th raw moment of HS at level n, exact: apply x d/dx to G_n
    r times and evaluate at 1."""
    if r < 1:
        raise ValueError("moment order must be a positive integer")
    p = g_poly(n)
    for _ in range(r):
        p = p.xdx()
    return p(Fraction(1))


def mean_closed(n):
    """Closed-form mean: n/3 - 2/9 + (2/9)(-1/2)^n."""
    return Fraction(n, 3) - Fraction(2, 9) + Fraction(2, 9) * Fraction(-1, 2) ** n


def variance_closed(n):
    """Closed-form variance:
    (2/27)n + 2/81 + [(4/27)n + 2/81](-1/2)^n - (4/81)(1/4)^n."""
    s = Fraction(-1, 2) ** n
    return (
        Fraction(2, 27) * n
        + Fraction(2, 81)
        + (Fraction(4, 27) * n + Fraction(2, 81)) * s
        - Fraction(4, 81) * Fraction(1, 4) ** n
    )


# ---------------------------------------------------------------------------
# Quasi-power constants


@dataclass(frozen=True)
class QuasiPowerConstants:
    """High-precision values of the three functions controlling the
    asymptotics G_n(x) = A(x)^n B(x) (1 + O(|f(x)|^n)), together with the
    roots r_plus/r_minus of the linear recurrence's characteristic
    equation."""

    x: object
    a: object
    b: object
    f: object
    r_plus: object
    r_minus: object


def quasi_power_eval(x, dps=DEFAULT_DPS):
    """Evaluate A, B, f at x with `dps` decimal digits.

    A(x) = (1 + sqrt(1+8x))/4, B(x) = (3 + sqrt(1+8x))/(2 sqrt(1+8x)),
    f(x) = (sqrt(1+8x) - 1)/(sqrt(1+8x) + 1). Requires 1 + 8x > 0 (real
    branch); outside, the square root leaves the real line.
    """
    with mp.workdps(dps):
        xm = mp.mpf(x) if not isinstance(x, Fraction) else mp.mpf(x.numerator) / x.denominator
        disc = 1 + 8 * xm
        if disc <= 0:
            raise ValueError("branch cut: need 1 + 8x > 0, got x = %s" % x)
        s = mp.sqrt(disc)
        return QuasiPowerConstants(
            x=xm,
            a=(1 + s) / 4,
            b=(3 + s) / (2 * s),
            f=(s - 1) / (s + 1),
            r_plus=(1 + s) / 2,
            r_minus=(1 - s) / 2,
        )


def _u_raw(t):
    # evaluates at the ambient mpmath precision so mp.diff can raise it
    return mp.log((1 + mp.sqrt(1 + 8 * mp.exp(t))) / 4)


def _v_raw(t):
    s = mp.sqrt(1 + 8 * mp.exp(t))
    return mp.log((3 + s) / (2 * s))


def u(t, dps=DEFAULT_DPS):
    """Scaled cumulant generating function u(t) = log A(e^t)."""
    with mp.workdps(dps):
        return _u_raw(mp.mpf(t))


def v(t, dps=DEFAULT_DPS):
    """Correction exponent v(t) = log B(e^t)."""
    with mp.workdps(dps):
        return _v_raw(mp.mpf(t))


def u_derivatives_at_zero(order, dps=DEFAULT_DPS):
    """[u(0), u'(0), ..., u^(order)(0)] by high-precision numerical
    differentiation. The first two derivatives are the mean and variance
    growth rates 1/3 and 2/27; higher orders are computed, not assumed."""
    with mp.workdps(dps):
        return [mp.diff(_u_raw, 0, k) for k in range(order + 1)]


def tau_star(dps=DEFAULT_DPS):
    """Distance from 0 to the nearest complex singularity of u:
    sqrt(log(8)^2 + pi^2), where the discriminant 1 + 8e^t vanishes."""
    with mp.workdps(dps):
        return mp.sqrt(mp.log(8) ** 2 + mp.pi**2)


def local_limit_estimate(n, k, dps=DEFAULT_DPS):
    """Gaussian local-limit approximation to pmf(n, k):
    phi((k - mu_n)/sigma_n) / sigma_n with the closed-form mean/variance."""
    with mp.workdps(dps):
        mu = mp.mpf(mean_closed(n).numerator) / mean_closed(n).denominator
        var = variance_closed(n)
        sigma = mp.sqrt(mp.mpf(var.numerator) / var.denominator)
        return mp.npdf(mp.mpf(k), mu, sigma)


# ---------------------------------------------------------------------------
# Exact real-root isolation (Sturm sequences over the integers)


def _int_primitive(coeffs):
    """Clear denominators and content: positive-leading primitive integer
    coefficient list representing the same roots."""
    fracs = [Fraction(c) for c in coeffs]
    while fracs and fracs[-1] == 0:
        fracs.pop()
    if not fracs:
        return []
    den = math.lcm(*(c.denominator for c in fracs))
    ints = [int(c * den) for c in fracs]
    g = math.gcd(*ints)
    if g:
        ints = [c // g for c in ints]
    if ints[-1] < 0:
        ints = [-c for c in ints]
    return ints


def _positive_primitive(fracs):
    """Scale rational coefficients by a positive constant to primitive
    integers. Unlike _int_primitive this never flips signs, which the
    Sturm sign-variation property depends on."""
    den = math.lcm(*(Fraction(c).denominator for c in fracs))
    ints = [int(Fraction(c) * den) for c in fracs]
    g = math.gcd(*ints)
    if g:
        ints = [c // g for c in ints]
    return ints


def _deriv_int(p):
    return [i * c for i, c in enumerate(p) if i]


def _eval_int_at_fraction(p, num, den):
    """Sign-faithful value p(num/den) * den^deg(p) using integers only
    (den > 0), via Horner with a running power of den."""
    if not p:
        return 0
    acc = p[-1]
    bp = 1
    for c in reversed(p[:-1]):
        bp *= den
        acc = acc * num + c * bp
    return acc


def _sign_at(p, x):
    v = _eval_int_at_fraction(p, x.numerator, x.denominator)
    return (v > 0) - (v < 0)


def _frac_rem(f, g):
    """Remainder of f by g over the rationals (coefficient lists)."""
    f = [Fraction(c) for c in f]
    g = [Fraction(c) for c in g]
    dg = len(g) - 1
    lg = g[-1]
    while len(f) - 1 >= dg and any(f):
        while f and f[-1] == 0:
            f.pop()
        if len(f) - 1 < dg:
            break
        q = f[-1] / lg
        shift = len(f) - 1 - dg
        for i in range(dg + 1):
            f[shift + i] -= q * g[i]
        f.pop()
    while f and f[-1] == 0:
        f.pop()
    return f


def _sturm_chain(p):
    """Sturm chain of a squarefree primitive integer polynomial; each
    remainder is negated and rescaled by a positive rational back to a
    primitive integer list, which preserves the sign-variation property."""
    chain = [p]
    d = _deriv_int(p)
    if d:
        chain.append(_positive_primitive(d))
    while len(chain[-1]) > 1:
        r = _frac_rem(chain[-2], chain[-1])
        if not r:
            raise ArithmeticError("polynomial is not squarefree")
        chain.append(_positive_primitive([-c for c in r]))
    return chain


def _variations(chain, x):
    count = 0
    prev = 0
    for p in chain:
        s = _sign_at(p, x)
        if s != 0:
            if prev != 0 and s != prev:
                count += 1
            prev = s
    return count


def _root_bound(p):
    """Cauchy bound: every real root lies in (-M, M)."""
    lead = abs(p[-1])
    m = max(abs(c) for c in p[:-1]) if len(p) > 1 else 0
    return Fraction(m, lead) + 1


def _isolate_squarefree(p, chain, tol):
    """Disjoint rational intervals, one simple root of p in each.

    Isolation counts roots on half-open intervals (a, b] with the Sturm
    chain; refinement below the tolerance switches to sign bisection on p
    alone. A root hit exactly at a bisection point yields a zero-width
    interval.
    """
    if len(p) <= 1:
        return []
    M = _root_bound(p)
    roots = []
    stack = [(-M, M, _variations(chain, -M) - _variations(chain, M))]
    while stack:
        a, b, cnt = stack.pop()
        if cnt == 0:
            continue
        if cnt == 1:
            roots.append((a, b))
            continue
        mid = (a + b) / 2
        va, vm, vb = _variations(chain, a), _variations(chain, mid), _variations(chain, b)
        stack.append((a, mid, va - vm))
        stack.append((mid, b, vm - vb))
    refined = [_refine_root(p, chain, a, b, tol) for a, b in roots]
    refined.sort(key=lambda iv: iv[0])
    return refined


def _refine_root(p, chain, a, b, tol):
    """Shrink (a, b] around its single simple root until width <= tol."""
    if _sign_at(p, b) == 0:
        return (b, b)
    # move the left endpoint off any alien root before plain bisection
    while _sign_at(p, a) == 0:
        mid = (a + b) / 2
        if _sign_at(p, mid) == 0:
            return (mid, mid)
        if _variations(chain, a) - _variations(chain, mid) == 1:
            b = mid
        else:
            a = mid
    sa = _sign_at(p, a)
    while b - a > tol:
        mid = (a + b) / 2
        sm = _sign_at(p, mid)
        if sm == 0:
            return (mid, mid)
        if sm == sa:
            a = mid
        else:
            b = mid
    return (a, b)


def _poly_gcd_monic(f, g):
    """Monic gcd of two rational coefficient lists (Euclid)."""
    f = [Fraction(c) for c in f]
    g = [Fraction(c) for c in g]
    while any(g):
        f, g = g, _frac_rem(f, g)
    while f and f[-1] == 0:
        f.pop()
    if f:
        lead = f[-1]
        f = [c / lead for c in f]
    return f


def _frac_div_exact(f, g):
    """Exact quotient f/g for rational coefficient lists (remainder 0)."""
    f = [Fraction(c) for c in f]
    g = [Fraction(c) for c in g]
    dg = len(g) - 1
    q = [Fraction(0)] * (len(f) - dg)
    while len(f) - 1 >= dg and any(f):
        while f and f[-1] == 0:
            f.pop()
        if len(f) - 1 < dg:
            break
        c = f[-1] / g[-1]
        shift = len(f) - 1 - dg
        q[shift] = c
        for i in range(dg + 1):
            f[shift + i] -= c * g[i]
        f.pop()
    return q


def squarefree_decomposition(poly):
    """Yun decomposition: list of (squarefree RationalPolynomial, multiplicity)
    whose product with multiplicities recovers poly up to a constant."""
    f = list(poly.coeffs)
    if len(f) <= 1:
        return []
    df = [i * c for i, c in enumerate(f) if i]
    a = _poly_gcd_monic(f, df)
    if len(a) == 1:
        return [(RationalPolynomial(f), 1)]
    b = _frac_div_exact(f, a)
    c = _frac_div_exact(df, a)
    out = []
    i = 1
    while len(b) > 1:
        db = [k * q for k, q in enumerate(b) if k]
        d = [x - y for x, y in zip(c, db + [Fraction(0)] * (len(c) - len(db)))]
        while d and d[-1] == 0:
            d.pop()
        fac = _poly_gcd_monic(b, d)
        if len(fac) > 1:
            out.append((RationalPolynomial(fac), i))
        b = _frac_div_exact(b, fac)
        c = _frac_div_exact(d, fac)
        i += 1
    return out


def _separated(iv1, iv2):
    """Certify root(iv1) < root(iv2).

    Zero-width intervals pin the root exactly; nonzero-width intervals hold
    their root strictly inside (refinement leaves both endpoint signs
    nonzero). Touching endpoints therefore still separate the roots unless
    both intervals are the same exact point.
    """
    if iv1[1] < iv2[0]:
        return True
    if iv1[1] == iv2[0]:
        return not (iv1[0] == iv1[1] and iv2[0] == iv2[1])
    return False


@dataclass(frozen=True)
class RootIsolation:
    """Certified real-root isolation.

    Each interval (lo, hi) holds exactly one distinct real root, strictly
    inside when lo < hi and exactly at lo when lo == hi; roots of
    consecutive intervals are strictly ordered. `all_real` certifies that
    the real roots (with multiplicity) exhaust the degree.
    """

    intervals: tuple
    multiplicities: tuple
    degree: int

    @property
    def all_real(self):
        return sum(self.multiplicities) == self.degree

    def __len__(self):
        return len(self.intervals)


def isolate_real_roots(poly, tol=DEFAULT_ROOT_TOL):
    """Isolate every real root of a nonzero RationalPolynomial into
    disjoint rational intervals of width <= tol (zero-width when a root is
    hit exactly). Sign-variation counting gives the exact real-root count,
    so `all_real` is a certificate, not a float observation."""
    if not poly:
        raise ValueError("cannot isolate roots of the zero polynomial")
    tol = Fraction(tol)
    entries = []  # [interval, multiplicity, int poly, sturm chain]
    for factor, mult in squarefree_decomposition(poly):
        p = _int_primitive(factor.coeffs)
        chain = _sturm_chain(p)
        for iv in _isolate_squarefree(p, chain, tol):
            entries.append([iv, mult, p, chain])
    entries.sort(key=lambda e: e[0][0])
    # roots of one squarefree factor come out separated already, but
    # distinct factors were isolated independently; shrink until the whole
    # collection certifies a strict root ordering
    while True:
        clashes = [
            i
            for i in range(len(entries) - 1)
            if not _separated(entries[i][0], entries[i + 1][0])
        ]
        if not clashes:
            break
        tol /= 2**8
        for i in {j for k in clashes for j in (k, k + 1)}:
            iv, _, p, chain = entries[i]
            if iv[0] != iv[1]:
                entries[i][0] = _refine_root(p, chain, iv[0], iv[1], tol)
        entries.sort(key=lambda e: e[0][0])
    return RootIsolation(
        intervals=tuple(e[0] for e in entries),
        multiplicities=tuple(e[1] for e in entries),
        degree=poly.degree,
    )


# ---------------------------------------------------------------------------
# Interlacing certification


@dataclass(frozen=True)
class InterlacingEntry:
    """Certificate for one level: realness and negativity of the level-n
    roots, and strict interlacing against level n+1."""

    n: int
    all_real: bool
    all_negative: bool
    interlaces: bool
    roots_n: tuple
    roots_next: tuple

    @property
    def ok(self):
        return self.all_real and self.all_negative and self.interlaces


@dataclass(frozen=True)
class InterlacingReport:
    entries: tuple

    @property
    def all_pass(self):
        return all(e.ok for e in self.entries)

    def failures(self):
        return [e for e in self.entries if not e.ok]


def _alternation_ok(iso_a, iso_b):
    """Strict interlacing of the two certified root lists: merged order
    alternates ownership, ends on the higher level, and every consecutive
    pair of intervals certifies strict root separation."""
    merged = sorted(
        [(iv, "a") for iv in iso_a.intervals] + [(iv, "b") for iv in iso_b.intervals],
        key=lambda t: (t[0][0], t[0][1]),
    )
    for (iv1, _), (iv2, _) in zip(merged, merged[1:]):
        if not _separated(iv1, iv2):
            return None  # undecided: intervals too coarse
    owners = "".join(o for _, o in merged)
    if any(x == y for x, y in zip(owners, owners[1:])):
        return False
    if len(iso_b) == len(iso_a):
        return owners.startswith("a") and owners.endswith("b")
    if len(iso_b) == len(iso_a) + 1:
        return owners.startswith("b") and owners.endswith("b")
    return False


def check_interlacing(n_max, tol=DEFAULT_ROOT_TOL, max_retries=8):
    """Certify, for 2 <= n <= n_max, that g_poly(n) has only real, strictly
    negative roots and that they strictly interlace those of g_poly(n+1).

    Entirely in exact rational arithmetic: realness by Sturm counts,
    negativity and interlacing by certified disjoint intervals, refined as
    far as needed (never by floating comparison). Pairs that share a root
    (nonconstant gcd) or stay undecided after `max_retries` refinements are
    reported as failures instead of looping forever.
    """
    if n_max < 3:
        raise ValueError("n_max must be at least 3")
    iso_cache = {}

    def iso(n, at_tol):
        got = iso_cache.get(n)
        if got is None or got[1] > at_tol:
            iso_cache[n] = (isolate_real_roots(g_poly(n), at_tol), at_tol)
        return iso_cache[n][0]

    def negative_ok(isolation):
        # zero-width pins the root; otherwise the root is strictly below hi
        return all(
            iv[0] < 0 if iv[0] == iv[1] else iv[1] <= 0 for iv in isolation.intervals
        )

    entries = []
    for n in range(2, n_max + 1):
        pair_tol = Fraction(tol)
        shares_root = len(_poly_gcd_monic(g_poly(n).coeffs, g_poly(n + 1).coeffs)) > 1
        a = iso(n, pair_tol)
        b = iso(n + 1, pair_tol)
        all_real = a.all_real and len(a) == n // 2
        negative = negative_ok(a)
        if shares_root or not all_real or not b.all_real:
            inter = False
        else:
            inter = _alternation_ok(a, b)
        for _ in range(max_retries):
            if inter is not None and (negative or not all_real):
                break
            pair_tol /= 2**10
            a = iso(n, pair_tol)
            b = iso(n + 1, pair_tol)
            negative = negative_ok(a)
            if inter is None:
                inter = _alternation_ok(a, b)
        entries.append(
            InterlacingEntry(
                n=n,
                all_real=all_real,
                all_negative=negative,
                interlaces=bool(inter),
                roots_n=a.intervals,
                roots_next=b.intervals,
            )
        )
    return InterlacingReport(entries=tuple(entries))
