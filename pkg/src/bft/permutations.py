"""Butterfly permutations, their compressed codes, and the block operations.

Permutations are one-line notation tuples over 1..m. A simple butterfly code
is an n-bit string, bit j (1-based) choosing the j-th gluing level: 0 extends
the top right edge (direct sum side), 1 the top left edge (skew sum side).
A general butterfly code has 2^n - 1 bits in heap layout: entry 1 is the
outermost merge and entries 2i, 2i+1 encode sub-blocks of entry i.
"""

from __future__ import annotations

import numpy as np

from .core_tree import NIL, BinaryTree, glue_minus, glue_plus
from .hs_fast import parse_code, validate_butterfly_length

TAU = (2, 1)
IDENTITY_2 = (1, 2)


def _check_perm(p):
    m = len(p)
    if sorted(p) != list(range(1, m + 1)):
        raise ValueError("not a permutation of 1..%d: %r" % (m, p))


def direct_sum(p1, p2):
    """p1 followed by p2 shifted up by |p1|."""
    m1 = len(p1)
    return tuple(p1) + tuple(v + m1 for v in p2)


def skew_sum(p1, p2):
    """p1 shifted up by |p2|, followed by p2."""
    m2 = len(p2)
    return tuple(v + m2 for v in p1) + tuple(p2)


def kronecker(p1, p2):
    """Permutation whose matrix is the Kronecker product of the two matrices:
    entry (i-1)*m2 + j maps to (p1[i]-1)*m2 + p2[j]."""
    m2 = len(p2)
    out = []
    for a in p1:
        base = (a - 1) * m2
        for b in p2:
            out.append(base + b)
    return tuple(out)


def permutation_matrix(p):
    """0/1 matrix M with M[p[i]-1, i-1] = 1 (columns indexed by position)."""
    m = len(p)
    M = np.zeros((m, m), dtype=np.int64)
    for i, v in enumerate(p):
        M[v - 1, i] = 1
    return M


def expand_simple(code):
    """The length-2^n permutation of a simple code: a pure Kronecker product
    of copies of tau = (2,1) and the 2-identity, outermost factor = last
    gluing level."""
    bits = parse_code(code)
    p = (1,)
    for x in bits:
        p = kronecker(TAU if x else IDENTITY_2, p)
    return p


def expand_butterfly(code):
    """Recursive block expansion of a heap-layout code: bit 0 takes the
    direct sum of the two sub-block expansions, bit 1 the skew sum."""
    bits = parse_code(code)
    n = validate_butterfly_length(len(bits))
    N = 1 << n

    def expand(i):
        if i >= N:
            return (1,)
        left = expand(2 * i)
        right = expand(2 * i + 1)
        if bits[i - 1] == 0:
            return direct_sum(left, right)
        return skew_sum(left, right)

    return expand(1)


def tree_from_simple_code(code, shape_only=False):
    """The simple butterfly tree: glue an identical copy below the top right
    (bit 0) or top left (bit 1) edge, once per code bit, starting from a
    single node.

    Implemented by arena doubling with O(1) tracked edge ends; structurally
    identical to repeated glue_plus/glue_minus with a copy (tested as such),
    but linear in the final 2^n node count.
    """
    bits = parse_code(code)
    left = np.full(1, NIL, dtype=np.int64)
    right = np.full(1, NIL, dtype=np.int64)
    keys = None if shape_only else np.array([1], dtype=np.int64)
    r_end = 0
    l_end = 0
    size = 1
    for x in bits:
        shifted_left = np.where(left == NIL, NIL, left + size)
        shifted_right = np.where(right == NIL, NIL, right + size)
        left = np.concatenate([left, shifted_left])
        right = np.concatenate([right, shifted_right])
        if x == 0:
            right[r_end] = size  # copy's root
            r_end += size
            if keys is not None:
                keys = np.concatenate([keys, keys + size])
        else:
            left[l_end] = size
            l_end += size
            if keys is not None:
                keys = np.concatenate([keys + size, keys])
        size *= 2
    return BinaryTree(left, right, keys, 0)


def tree_from_butterfly_code(code, shape_only=False):
    """Butterfly tree of a heap-layout code, by actually gluing subtrees
    bottom-up (sibling folding with an explicit stack)."""
    bits = parse_code(code)
    n = validate_butterfly_length(len(bits))
    if n == 0:
        return BinaryTree.single(None if shape_only else 1)
    N = 1 << n
    stack = []
    for leaf in range(N):
        stack.append((N + leaf, BinaryTree.single(None if shape_only else 1)))
        while (
            len(stack) >= 2
            and stack[-1][0] & 1
            and stack[-2][0] == stack[-1][0] - 1
        ):
            er, tr = stack.pop()
            el, tl = stack.pop()
            parent = el >> 1
            if bits[parent - 1] == 0:
                t = glue_plus(tl, tr, shape_only=shape_only)
            else:
                t = glue_minus(tl, tr, shape_only=shape_only)
            stack.append((parent, t))
    return stack[0][1]


def simple_height_formula(code):
    """Height of the simple butterfly tree: 2^w + 2^(n-w) - 2, w = ones count."""
    bits = parse_code(code)
    n = len(bits)
    w = int(bits.sum())
    return (1 << w) + (1 << (n - w)) - 2


def lis_lds(code):
    """(longest increasing, longest decreasing) subsequence lengths of the
    simple butterfly permutation: (2^(n-w), 2^w) with w = ones count."""
    bits = parse_code(code)
    n = len(bits)
    w = int(bits.sum())
    return (1 << (n - w), 1 << w)
