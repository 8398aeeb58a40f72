"""Butterfly permutations and both code-to-tree constructions."""

import itertools
from bisect import bisect_left, bisect_right

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bft.core_tree import bst_from_permutation, height, hs, shape_string
from bft.hs_fast import code_to_str
from bft.permutations import (
    direct_sum,
    expand_butterfly,
    expand_simple,
    kronecker,
    lis_lds,
    permutation_matrix,
    simple_height_formula,
    skew_sum,
    tree_from_butterfly_code,
    tree_from_simple_code,
)

small_perms = st.integers(1, 6).flatmap(lambda m: st.permutations(range(1, m + 1)))
codes = st.lists(st.integers(0, 1), max_size=8).map(tuple)


def all_codes(n):
    return itertools.product((0, 1), repeat=n)


def preorder_keys(tree):
    return [int(tree.keys[v]) for v in tree.preorder()]


def longest_monotone(seq):
    """(LIS, LDS) lengths by patience sorting."""
    inc, dec = [], []
    for x in seq:
        i = bisect_left(inc, x)
        inc[i : i + 1] = [x]
        j = bisect_right(dec, -x)
        dec[j : j + 1] = [-x]
    return len(inc), len(dec)


def test_sum_goldens():
    assert direct_sum((2, 1), (1, 2)) == (2, 1, 3, 4)
    assert skew_sum((2, 1), (1, 2)) == (4, 3, 1, 2)
    assert kronecker((2, 1), (1, 2)) == (3, 4, 1, 2)
    assert kronecker((1, 2), (2, 1)) == (2, 1, 4, 3)


@given(small_perms, small_perms)
def test_sums_are_permutations(p1, p2):
    m1, m2 = len(p1), len(p2)
    assert sorted(direct_sum(p1, p2)) == list(range(1, m1 + m2 + 1))
    assert sorted(skew_sum(p1, p2)) == list(range(1, m1 + m2 + 1))
    assert sorted(kronecker(p1, p2)) == list(range(1, m1 * m2 + 1))


@given(small_perms, small_perms, small_perms)
def test_direct_sum_associative(p1, p2, p3):
    assert direct_sum(direct_sum(p1, p2), p3) == direct_sum(p1, direct_sum(p2, p3))
    assert skew_sum(skew_sum(p1, p2), p3) == skew_sum(p1, skew_sum(p2, p3))


@given(small_perms, small_perms)
def test_kronecker_matrix_identity(p1, p2):
    K = permutation_matrix(kronecker(p1, p2))
    assert np.array_equal(K, np.kron(permutation_matrix(p1), permutation_matrix(p2)))


def test_expand_simple_goldens():
    assert expand_simple("") == (1,)
    assert expand_simple("1") == (2, 1)
    assert expand_simple("0") == (1, 2)
    assert expand_simple("10") == (2, 1, 4, 3)
    assert expand_simple("01") == (3, 4, 1, 2)


def test_expand_simple_kron_structure():
    # the code bits 0/1 select identity/transposition factors, last bit outermost
    for bits in all_codes(5):
        p = (1,)
        for x in bits:
            p = kronecker((2, 1) if x else (1, 2), p)
        assert expand_simple(bits) == p
        assert len(p) == 32


def test_tree_from_simple_code_matches_bst():
    for n in range(0, 9):
        for bits in all_codes(n):
            t = tree_from_simple_code(bits)
            want = bst_from_permutation(expand_simple(bits))
            assert preorder_keys(t) == preorder_keys(want)
            assert shape_string(t) == shape_string(want)


def test_tree_from_simple_code_shape_only():
    t = tree_from_simple_code("0110", shape_only=True)
    assert t.keys is None
    assert shape_string(t) == shape_string(tree_from_simple_code("0110"))


def test_expand_butterfly_single_level():
    # one bit: 0 is the plane identity pattern, 1 the transposition
    assert expand_butterfly("0") == (1, 2)
    assert expand_butterfly("1") == (2, 1)


def test_expand_butterfly_matches_simple_on_constant_subblocks():
    # a heap code whose level bits are constant reduces to a simple code
    # (all blocks at one level glued the same way)
    for bits in all_codes(3):
        heap = [bits[2]] + [bits[1]] * 2 + [bits[0]] * 4
        assert expand_butterfly(heap) == expand_simple(bits)


def test_tree_from_butterfly_code_matches_bst():
    for n in range(0, 4):
        for bits in all_codes((1 << n) - 1):
            t = tree_from_butterfly_code(bits)
            want = bst_from_permutation(expand_butterfly(bits))
            assert preorder_keys(t) == preorder_keys(want)
            assert shape_string(t) == shape_string(want)


def test_tree_from_butterfly_code_random_level_4():
    gen = np.random.default_rng(5)
    for _ in range(100):
        bits = tuple(int(b) for b in gen.integers(0, 2, size=15))
        t = tree_from_butterfly_code(bits)
        want = bst_from_permutation(expand_butterfly(bits))
        assert preorder_keys(t) == preorder_keys(want)


def test_butterfly_code_length_validated():
    with pytest.raises(ValueError):
        tree_from_butterfly_code("0110")
    with pytest.raises(ValueError):
        expand_butterfly((0, 1))


def test_level_two_hs_one_permutations():
    # exactly four of the eight 4-point butterfly permutations reach HS 1
    got = set()
    for bits in all_codes(3):
        if hs(tree_from_butterfly_code(bits)) == 1:
            got.add(expand_butterfly(bits))
    assert got == {(2, 1, 3, 4), (2, 1, 4, 3), (3, 4, 1, 2), (3, 4, 2, 1)}


def test_simple_height_formula_exhaustive():
    for n in range(0, 9):
        for bits in all_codes(n):
            t = tree_from_simple_code(bits, shape_only=True)
            assert height(t) == simple_height_formula(bits)


def test_lis_lds_exhaustive():
    for n in range(0, 7):
        for bits in all_codes(n):
            got = lis_lds(bits)
            assert got == longest_monotone(expand_simple(bits))


@given(codes)
def test_lis_lds_product_is_size(bits):
    a, b = lis_lds(bits)
    assert a * b == 2 ** len(bits)
    assert code_to_str(bits) == "".join("01"[x] for x in bits)
