"""The 8-state chain driving the HS increments: exact identities throughout."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bft.hs_fast import hs_increments
from bft.markov import (
    N_STATES,
    argmax_sigma2,
    build_chain,
    char_poly,
    char_poly_check,
    increment,
    mu,
    observable_f,
    poisson_closed_form,
    poisson_h,
    sigma2,
    sigma2_via_poisson,
    solve_poisson,
    state_index,
    stationary,
    two_state_uniform_chain,
    variance_mean_ratio,
)
from bft.montecarlo import RngStream

F = Fraction

FIVE_PS = (F(1, 7), F(1, 3), F(1, 2), F(2, 3), F(9, 10))

rational_ps = st.fractions(
    min_value=F(1, 30), max_value=F(29, 30), max_denominator=30
)


def test_state_indexing():
    seen = set()
    for a in (0, 1):
        for b in (0, 1):
            for c in (0, 1):
                seen.add(state_index(a, b, c))
    assert seen == set(range(8))
    assert observable_f() == (0, 0, 1, 0, 1, 0, 0, 0)
    # the increment fires exactly when the bits differ and the previous
    # increment did not
    assert increment(0, 1, 0) == 1
    assert increment(1, 0, 0) == 1
    assert increment(0, 1, 1) == 0
    assert increment(0, 0, 0) == 0


@given(rational_ps)
def test_chain_rows_are_distributions(p):
    P = build_chain(p)
    for row in P:
        assert sum(row) == 1
        assert all(v >= 0 for v in row)
        # exactly two reachable successors per state
        assert sum(1 for v in row if v > 0) <= 2


@given(rational_ps)
def test_stationarity_exact(p):
    P = build_chain(p)
    pi = stationary(p)
    assert sum(pi) == 1
    for j in range(N_STATES):
        assert sum(pi[i] * P[i][j] for i in range(N_STATES)) == pi[j]


def test_stationary_golden_half():
    pi = stationary(F(1, 2))
    assert pi == (
        F(1, 6), F(1, 12), F(1, 6), F(1, 12), F(1, 6), F(1, 12), F(1, 6), F(1, 12),
    )


def test_stationary_symmetric_under_bit_flip():
    # swapping p and q relabels (a, b, c) -> (1-a, 1-b, c)
    for p in FIVE_PS:
        pi_p = stationary(p)
        pi_q = stationary(1 - p)
        for a in (0, 1):
            for b in (0, 1):
                for c in (0, 1):
                    assert (
                        pi_p[state_index(a, b, c)]
                        == pi_q[state_index(1 - a, 1 - b, c)]
                    )


def test_mu_sigma2_goldens():
    assert mu(F(1, 2)) == F(1, 3)
    assert mu(F(1, 3)) == F(2, 7)
    assert sigma2(F(1, 2)) == F(2, 27)
    assert sigma2(F(1, 3)) == F(38, 343)
    assert mu(F(1, 2), exact=False) == pytest.approx(1 / 3)


@given(rational_ps)
def test_mu_is_stationary_mean_of_observable(p):
    pi = stationary(p)
    f = observable_f()
    assert sum(pi[i] * f[i] for i in range(N_STATES)) == mu(p)


def test_char_poly_structure():
    for p in FIVE_PS:
        assert char_poly_check(p)
        coeffs = char_poly(p)
        r = p * (1 - p)
        assert coeffs == (0, 0, 0, 0, 0, r, -r, -1, 1)


@given(rational_ps)
def test_char_poly_structure_random(p):
    assert char_poly_check(p)


def test_char_poly_matches_numpy_eigenvalues():
    p = 0.37
    coeffs = char_poly(p, exact=False)
    # evaluate the characteristic polynomial at the numerically computed
    # eigenvalues; all should be (near) zeros
    P = np.array(build_chain(p, exact=False))
    for lam in np.linalg.eigvals(P):
        val = sum(c * lam**k for k, c in enumerate(coeffs))
        assert abs(val) < 1e-10


@given(rational_ps)
def test_poisson_solutions(p):
    P = build_chain(p)
    pi = stationary(p)
    h = poisson_h(p)
    centered = solve_poisson(p)
    closed = poisson_closed_form(p)
    # both solve (I - P) g = h
    for g in (centered, closed):
        for i in range(N_STATES):
            assert g[i] - sum(P[i][j] * g[j] for j in range(N_STATES)) == h[i]
    # the solver's representative is pi-orthogonal, the closed form is a
    # constant shift of it
    assert sum(pi[i] * centered[i] for i in range(N_STATES)) == 0
    shifts = {closed[i] - centered[i] for i in range(N_STATES)}
    assert len(shifts) == 1


def test_poisson_offset_goldens():
    # pi^T g_closed, the constant separating the two representatives
    want = {
        F(1, 7): F(-5831, 14792),
        F(1, 3): F(-27, 392),
        F(1, 2): F(1, 18),
        F(2, 3): F(-27, 392),
        F(9, 10): F(-7775, 16562),
    }
    for p, offset in want.items():
        pi = stationary(p)
        closed = poisson_closed_form(p)
        assert sum(pi[i] * closed[i] for i in range(N_STATES)) == offset


@given(rational_ps)
def test_sigma2_routes_agree(p):
    assert sigma2(p) == sigma2_via_poisson(p)


def test_variance_mean_ratio():
    assert variance_mean_ratio(F(0)) == 1
    assert variance_mean_ratio(F(1, 4)) == F(2, 9)
    with pytest.raises(ValueError):
        variance_mean_ratio(F(1, 3))
    with pytest.raises(ValueError):
        variance_mean_ratio(F(-1, 10))
    # consistency: ratio at r = pq equals sigma2/mu
    for p in FIVE_PS:
        r = p * (1 - p)
        assert variance_mean_ratio(r) == sigma2(p) / mu(p)


def test_argmax_sigma2_near_algebraic_root():
    root = (1 + math.sqrt(13)) / 6
    assert abs(argmax_sigma2() - root) < 1e-6
    # it is a genuine interior maximum of the asymmetric branch
    star = argmax_sigma2()
    assert sigma2(star, exact=False) > sigma2(star + 1e-4, exact=False)
    assert sigma2(star, exact=False) > sigma2(star - 1e-4, exact=False)


def test_two_state_lumping_matrix():
    T, pi2 = two_state_uniform_chain()
    assert T == ((F(1, 2), F(1, 2)), (F(1), F(0)))
    assert pi2 == (F(2, 3), F(1, 3))
    # stationarity of the lumped chain
    for j in range(2):
        assert sum(pi2[i] * T[i][j] for i in range(2)) == pi2[j]


def test_lumped_chain_empirical_law():
    # at p = 1/2 the increment sequence follows the two-state chain; check
    # the empirical one-frequency and both transition frequencies
    steps = 1_000_000
    gen = RngStream(17).gen
    bits = (gen.random(steps) < 0.5).astype(np.int64)
    X = hs_increments(bits)
    freq1 = X.mean()
    # mean 1/3; fluctuation scale sqrt(sigma2/steps)
    se = math.sqrt((2 / 27) / steps)
    assert abs(freq1 - 1 / 3) < 3 * se
    # never two ones in a row (structural), and from 1 the chain must return
    assert not np.any(X[1:] & X[:-1])
    # from 0 the next increment fires with probability 1/2
    zero_here = X[1:-1] == 0
    fires_next = X[2:] == 1
    n0 = int(zero_here.sum())
    cond = fires_next[zero_here].mean()
    assert abs(cond - 0.5) < 3 * math.sqrt(0.25 / n0)


def test_input_validation():
    with pytest.raises(ValueError):
        build_chain(F(0))
    with pytest.raises(ValueError):
        build_chain(F(3, 2))
    with pytest.raises(ValueError):
        mu(F(-1, 2))
