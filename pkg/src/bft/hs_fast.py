"""Horton-Strahler numbers straight from compressed butterfly codes.

For a simple code of n bits the HS is a function of the xor-difference
sequence of the bits, computable in O(n): an exponential speedup over
building the 2^n-node tree. For a general (2^n - 1)-bit code the HS follows
from merging "edge profiles" bottom-up over the code's heap layout, in time
linear in the bitstring length.

Edge profiles
-------------
The profile of one top edge (the leftmost or rightmost root path) lists,
bottom to top, the distinct HS values found along that edge as entries
(value, escape, count): `count` consecutive edge nodes share `value`, and
`escape` tells how the run's bottom node got its value:

* escape True: inherited from its off-edge child (an equally tall subtree
  hangs off the edge there), or, for the edge's last node, from its only
  child;
* escape False: created by a tie between its two children (value is one more
  than the run below), or the edge's last node is a childless leaf (value 0).

That distinction is exactly what future gluings need: when a newly glued
subtree pushes a value w up the edge and meets a run of equal value, an
escape run ties with it and bumps to w+1, while a tie-born run absorbs it
and the cascade dies. The merge rules are implemented in _kernels._cascade
(array form, optionally jitted) and mirrored here in _merge_profiles
(readable tuple form); the two are tested against each other and against the
tree-traversal oracle.
"""

from __future__ import annotations

import numpy as np

from . import _kernels


def parse_code(code):
    """Accept an ASCII 0/1 string (or any 0/1 sequence) as a bit array."""
    if isinstance(code, str):
        if code and set(code) - {"0", "1"}:
            raise ValueError("code must consist of 0/1 characters: %r" % code)
        return np.frombuffer(code.encode("ascii"), dtype=np.uint8) - ord("0")
    arr = np.asarray(code, dtype=np.uint8)
    if arr.ndim != 1 or (arr.size and arr.max() > 1):
        raise ValueError("code bits must be 0 or 1")
    return arr


def code_to_str(bits):
    return "".join("1" if b else "0" for b in bits)


def validate_butterfly_length(length):
    """A general butterfly code has 2^n - 1 bits; return n or raise."""
    N = length + 1
    if N & (N - 1):
        raise ValueError(
            "butterfly code length must be 2^n - 1, got %d bits" % length
        )
    return N.bit_length() - 1


def hs_increments(code):
    """The per-level HS increment sequence X of a simple code.

    X[0] = 0 and X[j] = xor(x[j], x[j-1]) * (1 - X[j-1]); the HS is sum(X).
    Two consecutive increments are never both 1.
    """
    bits = parse_code(code)
    n = len(bits)
    X = np.zeros(n, dtype=np.uint8)
    for j in range(1, n):
        X[j] = (bits[j] ^ bits[j - 1]) & (1 - X[j - 1])
    return X


def hs_simple(code):
    """HS of the simple butterfly tree of a code, in O(n).

    Equals sum(ceil(k/2)) over the lengths k of maximal runs of ones in the
    xor-difference sequence y[j] = xor(x[j+1], x[j]).
    """
    bits = parse_code(code)
    n = len(bits)
    if n >= 4096:
        # same runs formula, vectorized over the run boundaries
        y = np.concatenate(([0], bits[:-1] ^ bits[1:], [0])).astype(np.int8)
        d = np.diff(y)
        lengths = np.flatnonzero(d == -1) - np.flatnonzero(d == 1)
        return int(((lengths + 1) // 2).sum())
    total = 0
    run = 0
    for j in range(n - 1):
        if bits[j] ^ bits[j + 1]:
            run += 1
        else:
            total += (run + 1) // 2
            run = 0
    total += (run + 1) // 2
    return total


def hs_simple_batch(bit_matrix):
    """hs_simple for every row of a (trials, n) 0/1 matrix, vectorized.

    Runs the increment recursion column by column; returns an int64 vector.
    """
    bm = np.ascontiguousarray(bit_matrix, dtype=np.uint8)
    trials, n = bm.shape
    total = np.zeros(trials, dtype=np.int64)
    if n < 2:
        return total
    X = np.zeros(trials, dtype=np.uint8)
    for j in range(1, n):
        X = (bm[:, j] ^ bm[:, j - 1]) & (1 - X)
        total += X
    return total


def hs_support_bound(n):
    """Hard upper bound floor(n/2) for the HS of any 2^n-node butterfly tree."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return n // 2


SINGLE_PROFILE = ((0, False, 1),)


def _merge_profiles(child, parent):
    """Reference (tuple) form of the cascade in _kernels._cascade.

    child/parent are same-side edge profiles; child is glued below the end of
    parent's edge. Returns the composite profile.
    """
    s_v, s_e, s_c = child[-1]
    v1, e1, c1 = parent[0]
    out = []
    if s_v < v1:
        return list(child) + list(parent)
    if s_v == v1 and e1:
        out.extend(child)
        seg = (v1 + 1, False, c1)
    elif s_v == v1:
        out.extend(child[:-1])
        out.append((v1, s_e, s_c + c1))
        out.extend(parent[1:])
        return out
    else:
        out.extend(child[:-1])
        seg = (s_v, s_e, s_c + c1)

    w, fseg, cseg = seg
    j = 1
    while j < len(parent):
        vj, ej, cj = parent[j]
        if w > vj:
            cseg += cj
            j += 1
        elif w == vj:
            if ej:
                out.append((w, fseg, cseg))
                w, fseg, cseg = vj + 1, False, cj
                j += 1
            else:
                out.append((vj, fseg, cseg + cj))
                out.extend(parent[j + 1 :])
                return out
        else:
            out.append((w, fseg, cseg))
            out.extend(parent[j:])
            return out
    out.append((w, fseg, cseg))
    return out


def _far_profile(far, w_root, near_new):
    """Reference form of _kernels._far_update: rewrite the far edge's top."""
    vt, et, ct = far[-1]
    if w_root == vt:
        if ct == 1:
            return list(far[:-1]) + [(vt, near_new == w_root, 1)]
        return list(far)
    nf = near_new == w_root
    if ct >= 2:
        return list(far[:-1]) + [(vt, et, ct - 1), (w_root, nf, 1)]
    return list(far[:-1]) + [(w_root, nf, 1)]


def _second_from_top(profile):
    """Value of the edge node directly below the root, read off the profile."""
    if profile[-1][2] >= 2:
        return profile[-1][0]
    return profile[-2][0]


def merge_profile_pair(left_pair, right_pair, bit):
    """Glue the right-operand tree onto the left-operand tree and return the
    composite (left profile, right profile). bit 0 glues below the right
    edge, bit 1 below the left edge. Reference implementation."""
    Lp_t, Rp_t = left_pair
    Lp_s, Rp_s = right_pair
    if bit == 0:
        Rp = _merge_profiles(Rp_s, Rp_t)
        w_root = Rp[-1][0]
        Lp = _far_profile(Lp_t, w_root, _second_from_top(Rp))
    else:
        Lp = _merge_profiles(Lp_s, Lp_t)
        w_root = Lp[-1][0]
        Rp = _far_profile(Rp_t, w_root, _second_from_top(Lp))
    return Lp, Rp


def hs_nonsimple_reference(code):
    """Tuple-based edge-profile HS for a heap-layout butterfly code.

    Same algorithm as hs_nonsimple, kept in plain data structures; used to
    validate the array kernel.
    """
    bits = parse_code(code)
    n = validate_butterfly_length(len(bits))
    if n == 0:
        return 0
    N = 1 << n
    stack = []  # (entry_id, (left profile, right profile))
    for leaf in range(N):
        stack.append((N + leaf, (list(SINGLE_PROFILE), list(SINGLE_PROFILE))))
        while (
            len(stack) >= 2
            and stack[-1][0] & 1
            and stack[-2][0] == stack[-1][0] - 1
        ):
            er, pair_r = stack.pop()
            el, pair_l = stack.pop()
            parent = el >> 1
            pair = merge_profile_pair(pair_l, pair_r, int(bits[parent - 1]))
            stack.append((parent, pair))
    (entry, (Lp, Rp)) = stack[0]
    assert entry == 1 and len(stack) == 1
    assert Lp[-1][0] == Rp[-1][0]
    return Rp[-1][0]


def hs_nonsimple(code):
    """HS of the butterfly tree of a (2^n - 1)-bit heap-layout code, in time
    linear in the code length."""
    bits = parse_code(code)
    validate_butterfly_length(len(bits))
    return int(_kernels.hs_nonsimple_bits(bits.astype(np.int64)))


def hs_nonsimple_batch(bit_matrix):
    """hs_nonsimple for every row of a (trials, 2^n - 1) 0/1 matrix."""
    bm = np.ascontiguousarray(bit_matrix, dtype=np.int64)
    if bm.shape[1] != 0:
        validate_butterfly_length(bm.shape[1])
    return _kernels.hs_nonsimple_batch(bm)
