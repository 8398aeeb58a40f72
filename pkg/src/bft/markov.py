"""The 8-state chain behind biased simple-code HS increments.

State (a, b, c) = (current bit, previous bit, previous increment), stored at
index 4a + 2b + c. One step draws the next bit xi (1 with probability p) and
moves to (xi, a, f(a, b, c)) where f(a, b, c) = xor(a, b) * (1 - c) is the
new increment. The long-run mean and asymptotic variance of the partial sums
of f give the drift mu_p and diffusion constant sigma_p^2 of the HS.

Every analysis function takes an explicit `exact` flag: True computes over
Fractions (identity checks), False over floats (plots, scans). The mode is
never inferred from the argument type.
"""

from __future__ import annotations

import math
from fractions import Fraction

N_STATES = 8


def _field(p, exact):
    if exact:
        return Fraction(p)
    return float(p)


def _check_p(p):
    if not 0 < p < 1:
        raise ValueError("bias p must lie strictly between 0 and 1, got %s" % (p,))


def state_index(a, b, c):
    return 4 * a + 2 * b + c


def increment(a, b, c):
    """The HS increment produced when leaving state (a, b, c)."""
    return (a ^ b) * (1 - c)


def observable_f():
    """f(a, b, c) = xor(a, b)(1 - c) as a vector over the 8 states:
    exactly states (0,1,0) and (1,0,0) contribute."""
    return tuple(
        increment(a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)
    )


def build_chain(p, exact=True):
    """8x8 row-stochastic transition matrix; entries are 0, p or q = 1-p."""
    _check_p(p)
    p = _field(p, exact)
    q = 1 - p
    zero = p - p
    P = [[zero] * N_STATES for _ in range(N_STATES)]
    for a in (0, 1):
        for b in (0, 1):
            for c in (0, 1):
                i = state_index(a, b, c)
                x = increment(a, b, c)
                P[i][state_index(0, a, x)] += q
                P[i][state_index(1, a, x)] += p
    return tuple(tuple(row) for row in P)


def stationary(p, exact=True):
    """Stationary distribution pi = [q^3, p^2 q^2, p^2 q, p q^3, p q^2,
    p^3 q, p^3, p^2 q^2] / (1 - pq). In exact mode the defining equations
    pi^T P = pi^T and sum(pi) = 1 are asserted before returning."""
    _check_p(p)
    p = _field(p, exact)
    q = 1 - p
    z = 1 - p * q
    pi = (
        q**3 / z,
        p**2 * q**2 / z,
        p**2 * q / z,
        p * q**3 / z,
        p * q**2 / z,
        p**3 * q / z,
        p**3 / z,
        p**2 * q**2 / z,
    )
    if exact:
        P = build_chain(p, exact=True)
        assert sum(pi) == 1
        for j in range(N_STATES):
            assert sum(pi[i] * P[i][j] for i in range(N_STATES)) == pi[j]
    return pi


def mu(p, exact=True):
    """Drift mu_p = pq/(1 - pq), the stationary mean of f."""
    _check_p(p)
    p = _field(p, exact)
    r = p * (1 - p)
    return r / (1 - r)


def sigma2(p, exact=True):
    """Asymptotic variance sigma_p^2 = pq(1 - 3pq - 2p^2q^2)/(1 - pq)^3."""
    _check_p(p)
    p = _field(p, exact)
    r = p * (1 - p)
    return r * (1 - 3 * r - 2 * r**2) / (1 - r) ** 3


def poisson_h(p, exact=True):
    """Centered observable h = f - mu_p * 1."""
    m = mu(p, exact)
    return tuple(f - m for f in observable_f())


def poisson_closed_form(p, exact=True):
    """The displayed solution of (I - P) g = h:
    [8p-5, 8p-5, 3, 8p-5, 3, 3-8p, 3-8p, 3-8p] / (8(1 - pq)).

    Note this vector is NOT orthogonal to pi (pi^T g = (2p-1)^2/(2(1-pq)^2)
    times ... is generally nonzero); solve_poisson returns the centered
    representative. Both solve the Poisson equation, and sigma2 is blind to
    the difference."""
    _check_p(p)
    p = _field(p, exact)
    q = 1 - p
    d = 8 * (1 - p * q)
    lo, hi = 8 * p - 5, 3 - 8 * p
    return (lo / d, lo / d, 3 / d, lo / d, 3 / d, hi / d, hi / d, hi / d)


def solve_poisson(p, exact=True):
    """Solve the nonsingular modified system (I - P + 1 pi^T) g = h.

    Left-multiplying by pi^T shows any solution satisfies pi^T g = 0, so
    this returns the pi-orthogonal solution of the Poisson equation."""
    P = build_chain(p, exact)
    pi = stationary(p, exact)
    h = poisson_h(p, exact)
    A = [
        [(1 if i == j else 0) - P[i][j] + pi[j] for j in range(N_STATES)]
        for i in range(N_STATES)
    ]
    return _gauss_solve(A, list(h))


def _gauss_solve(A, rhs):
    n = len(A)
    M = [row[:] + [rhs[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if M[piv][col] == 0:
            raise ArithmeticError("singular system")
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                factor = M[r][col] / inv
                M[r] = [x - factor * y for x, y in zip(M[r], M[col])]
    return tuple(M[i][n] / M[i][i] for i in range(n))


def sigma2_via_poisson(p, exact=True):
    """sigma^2 = E_pi[h (h + 2 P g)] with g any Poisson solution; adding a
    constant to g shifts Pg by that constant, which E_pi[h * const] kills."""
    P = build_chain(p, exact)
    pi = stationary(p, exact)
    h = poisson_h(p, exact)
    g = solve_poisson(p, exact)
    Pg = [sum(P[i][j] * g[j] for j in range(N_STATES)) for i in range(N_STATES)]
    return sum(pi[i] * h[i] * (h[i] + 2 * Pg[i]) for i in range(N_STATES))


def char_poly(p, exact=True):
    """Characteristic polynomial coefficients of P (ascending powers of
    lambda, degree 8), by the Faddeev-LeVerrier recurrence."""
    P = build_chain(p, exact)
    one = _field(1, exact)
    n = N_STATES
    M = [[one * 0] * n for _ in range(n)]
    coeffs = [one * 0] * (n + 1)
    coeffs[n] = one
    c = one
    for k in range(1, n + 1):
        # M <- P M + c I ; c <- -tr(P M)/k
        PM = [
            [sum(P[i][l] * M[l][j] for l in range(n)) for j in range(n)]
            for i in range(n)
        ]
        for i in range(n):
            PM[i][i] += c
        M = PM
        PMP = [
            [sum(P[i][l] * M[l][j] for l in range(n)) for j in range(n)]
            for i in range(n)
        ]
        c = -sum(PMP[i][i] for i in range(n)) / k
        coeffs[n - k] = c
    return tuple(coeffs)


def char_poly_check(p):
    """Exact test of the factorization lambda^5 (lambda - 1)(lambda^2 - pq):
    expanded, lambda^8 - lambda^7 - pq lambda^6 + pq lambda^5."""
    p = Fraction(p)
    _check_p(p)
    r = p * (1 - p)
    expected = (0, 0, 0, 0, 0, r, -r, -1, 1)
    return char_poly(p, exact=True) == tuple(Fraction(c) for c in expected)


def variance_mean_ratio(r):
    """sigma_p^2 / mu_p as a function of r = pq: (1 - 3r - 2r^2)/(1 - r)^2,
    defined on 0 <= r <= 1/4 (the range of pq)."""
    if not 0 <= r <= Fraction(1, 4):
        raise ValueError("r = pq must lie in [0, 1/4], got %s" % (r,))
    return (1 - 3 * r - 2 * r**2) / (1 - r) ** 2


def two_state_uniform_chain():
    """Reduced chain of the increment coordinate at p = 1/2: from c = 0 the
    next increment is Bernoulli(1/2), from c = 1 it is forced back to 0."""
    P = (
        (Fraction(1, 2), Fraction(1, 2)),
        (Fraction(1), Fraction(0)),
    )
    pi = (Fraction(2, 3), Fraction(1, 3))
    return P, pi


def argmax_sigma2(tol=1e-8):
    """Golden-section maximizer of sigma2 over [1/2, 1); the closed-form
    candidate is (1 + sqrt(13))/6."""
    inv_phi = (math.sqrt(5) - 1) / 2
    a, b = 0.5, 1 - 1e-12
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    while b - a > tol:
        if sigma2(c, exact=False) > sigma2(d, exact=False):
            b = d
        else:
            a = c
        c = b - inv_phi * (b - a)
        d = a + inv_phi * (b - a)
    return (a + b) / 2
