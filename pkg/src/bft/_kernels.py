"""Hot loops shared by the tree oracle and the samplers.

Every function here is written in the numba-compatible subset of Python and
gets jitted when numba is importable; otherwise the same bytecode runs as
plain Python. Semantics are identical either way (the test suite compares
the two on random inputs when numba is present).
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without the extra
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


NIL = -1


@njit(cache=True, nogil=True)
def hs_values_arrays(left, right, root):
    """Per-node Horton-Strahler values by one iterative postorder pass."""
    n = left.shape[0]
    order = np.empty(n, np.int64)
    stack = np.empty(n, np.int64)
    top = 0
    stack[0] = root
    top = 1
    pos = 0
    while top > 0:
        top -= 1
        v = stack[top]
        order[pos] = v
        pos += 1
        r = right[v]
        if r != NIL:
            stack[top] = r
            top += 1
        l = left[v]
        if l != NIL:
            stack[top] = l
            top += 1
    hsv = np.zeros(n, np.int64)
    # reversed preorder visits children before parents
    for i in range(n - 1, -1, -1):
        v = order[i]
        l = left[v]
        r = right[v]
        if l == NIL and r == NIL:
            hsv[v] = 0
        elif l == NIL:
            hsv[v] = hsv[r]
        elif r == NIL:
            hsv[v] = hsv[l]
        else:
            a = hsv[l]
            b = hsv[r]
            if a == b:
                hsv[v] = a + 1
            elif a > b:
                hsv[v] = a
            else:
                hsv[v] = b
    return hsv


@njit(cache=True, nogil=True)
def remy_tree(m, choices, sides):
    """Grow a uniform full binary tree with m internal nodes (leaf grafting),
    then strip the leaves. Returns (left, right, root) of the m-node tree.

    choices[k] must be uniform on [0, 2k+1) and sides[k] on {0,1}; the caller
    owns the randomness so the growth itself is deterministic.
    """
    size = 2 * m + 1
    left = np.full(size, NIL, np.int64)
    right = np.full(size, NIL, np.int64)
    parent = np.full(size, NIL, np.int64)
    root = 0
    nid = 1
    for k in range(m):
        v = choices[k]
        u = nid  # new internal node
        w = nid + 1  # new leaf
        nid += 2
        pv = parent[v]
        if sides[k] == 0:
            left[u] = v
            right[u] = w
        else:
            left[u] = w
            right[u] = v
        parent[v] = u
        parent[w] = u
        parent[u] = pv
        if pv == NIL:
            root = u
        elif left[pv] == v:
            left[pv] = u
        else:
            right[pv] = u
    # relabel internal nodes 0..m-1 in id order and drop the leaves
    newid = np.full(size, NIL, np.int64)
    cnt = 0
    for u in range(size):
        if left[u] != NIL:
            newid[u] = cnt
            cnt += 1
    nl = np.full(m, NIL, np.int64)
    nr = np.full(m, NIL, np.int64)
    for u in range(size):
        if left[u] == NIL:
            continue
        i = newid[u]
        lc = left[u]
        rc = right[u]
        if left[lc] != NIL:
            nl[i] = newid[lc]
        if left[rc] != NIL:
            nr[i] = newid[rc]
    return nl, nr, newid[root]


@njit(cache=True, nogil=True)
def _cascade(sv, se, sc, slen, tv, te, tc, tlen, ov, oe, oc):
    """Join a child edge profile S below a parent edge profile T and replay
    the relabeling cascade. Writes the composite profile into (ov, oe, oc)
    and returns its length. Profile entries are (value, escape, count),
    bottom to top, values strictly increasing.
    """
    olen = 0
    s_v = sv[slen - 1]
    s_e = se[slen - 1]
    s_c = sc[slen - 1]
    v1 = tv[0]
    e1 = te[0]
    c1 = tc[0]

    j = 1  # next parent entry to examine once a segment is active
    active = False
    w = 0
    fseg = 0
    cseg = 0

    if s_v < v1:
        # child tucks entirely below: nothing relabels
        for i in range(slen):
            ov[olen] = sv[i]
            oe[olen] = se[i]
            oc[olen] = sc[i]
            olen += 1
        for i in range(tlen):
            ov[olen] = tv[i]
            oe[olen] = te[i]
            oc[olen] = tc[i]
            olen += 1
        return olen
    if s_v == v1 and e1 == 1:
        # tie at the junction: parent's bottom run bumps by one
        for i in range(slen):
            ov[olen] = sv[i]
            oe[olen] = se[i]
            oc[olen] = sc[i]
            olen += 1
        active = True
        w = v1 + 1
        fseg = 0
        cseg = c1
    elif s_v == v1:
        # bottom of the parent edge was a bare leaf run: runs merge, no bump
        for i in range(slen - 1):
            ov[olen] = sv[i]
            oe[olen] = se[i]
            oc[olen] = sc[i]
            olen += 1
        ov[olen] = v1
        oe[olen] = s_e
        oc[olen] = s_c + c1
        olen += 1
        for i in range(1, tlen):
            ov[olen] = tv[i]
            oe[olen] = te[i]
            oc[olen] = tc[i]
            olen += 1
        return olen
    else:
        # child's top value exceeds the parent's bottom run: run is swallowed
        for i in range(slen - 1):
            ov[olen] = sv[i]
            oe[olen] = se[i]
            oc[olen] = sc[i]
            olen += 1
        active = True
        w = s_v
        fseg = s_e
        cseg = s_c + c1

    while active and j < tlen:
        vj = tv[j]
        ej = te[j]
        cj = tc[j]
        if w > vj:
            # run swallowed into the segment
            cseg += cj
            j += 1
        elif w == vj:
            if ej == 1:
                # escape entry ties with the segment: bump and keep climbing
                ov[olen] = w
                oe[olen] = fseg
                oc[olen] = cseg
                olen += 1
                w = vj + 1
                fseg = 0
                cseg = cj
                j += 1
            else:
                # tie-born entry absorbs the segment; nothing above changes
                ov[olen] = vj
                oe[olen] = fseg
                oc[olen] = cseg + cj
                olen += 1
                j += 1
                active = False
        else:
            # segment settles strictly below this entry
            ov[olen] = w
            oe[olen] = fseg
            oc[olen] = cseg
            olen += 1
            active = False

    if active:
        # segment rewrote everything up to and including the old root
        ov[olen] = w
        oe[olen] = fseg
        oc[olen] = cseg
        olen += 1
    else:
        for i in range(j, tlen):
            ov[olen] = tv[i]
            oe[olen] = te[i]
            oc[olen] = tc[i]
            olen += 1
    return olen


@njit(cache=True, nogil=True)
def _far_update(fv, fe, fc, flen, w_root, r_new):
    """Rewrite the top of the opposite edge profile after a glue.

    Only the root is shared between the two edges, so at most the top entry
    changes: the root's value becomes w_root and its escape flag is True
    exactly when the near-side child now carries the same value (r_new).
    Returns the new length (arrays are modified in place).
    """
    vt = fv[flen - 1]
    ct = fc[flen - 1]
    if w_root == vt:
        if ct == 1:
            fe[flen - 1] = 1 if r_new == w_root else 0
        return flen
    nf = 1 if r_new == w_root else 0
    if ct >= 2:
        fc[flen - 1] = ct - 1
        fv[flen] = w_root
        fe[flen] = nf
        fc[flen] = 1
        return flen + 1
    fv[flen - 1] = w_root
    fe[flen - 1] = nf
    fc[flen - 1] = 1
    return flen


@njit(cache=True, nogil=True)
def hs_nonsimple_bits(bits):
    """HS of the butterfly tree encoded by a heap-layout bitstring, computed
    from edge profiles alone in time linear in the bitstring length.

    bits[i-1] is the merge direction of heap entry i (0 glues below the right
    edge, 1 below the left). Entries 2^(n-1)..2^n-1 merge pairs of single
    nodes. Work proceeds over the virtual leaves left to right, folding
    sibling subtrees with an explicit stack of (left profile, right profile).
    """
    ln = bits.shape[0]
    if ln == 0:
        return 0
    N = ln + 1
    n = 0
    while (1 << n) < N:
        n += 1
    maxp = n // 2 + 2
    depth = n + 1
    # stack of profiles, one pair per frame
    ent = np.empty(depth + 1, np.int64)
    Lv = np.empty((depth + 1, maxp), np.int64)
    Le = np.empty((depth + 1, maxp), np.int64)
    Lc = np.empty((depth + 1, maxp), np.int64)
    Ll = np.empty(depth + 1, np.int64)
    Rv = np.empty((depth + 1, maxp), np.int64)
    Re = np.empty((depth + 1, maxp), np.int64)
    Rc = np.empty((depth + 1, maxp), np.int64)
    Rl = np.empty(depth + 1, np.int64)
    tv = np.empty(maxp + 1, np.int64)
    te = np.empty(maxp + 1, np.int64)
    tc = np.empty(maxp + 1, np.int64)
    top = 0
    for leaf in range(N):
        # push a single-node frame
        ent[top] = N + leaf
        Lv[top, 0] = 0
        Le[top, 0] = 0
        Lc[top, 0] = 1
        Ll[top] = 1
        Rv[top, 0] = 0
        Re[top, 0] = 0
        Rc[top, 0] = 1
        Rl[top] = 1
        top += 1
        while top >= 2 and (ent[top - 1] & 1) == 1 and ent[top - 2] == ent[top - 1] - 1:
            pa = top - 2  # left operand: the glue parent
            ch = top - 1  # right operand: the glue child
            parent_entry = ent[pa] >> 1
            b = bits[parent_entry - 1]
            if b == 0:
                # child goes below the parent's right edge
                olen = _cascade(
                    Rv[ch], Re[ch], Rc[ch], Rl[ch],
                    Rv[pa], Re[pa], Rc[pa], Rl[pa],
                    tv, te, tc,
                )
                w_root = tv[olen - 1]
                if tc[olen - 1] >= 2:
                    r_new = tv[olen - 1]
                else:
                    r_new = tv[olen - 2]
                Ll[pa] = _far_update(Lv[pa], Le[pa], Lc[pa], Ll[pa], w_root, r_new)
                for i in range(olen):
                    Rv[pa, i] = tv[i]
                    Re[pa, i] = te[i]
                    Rc[pa, i] = tc[i]
                Rl[pa] = olen
            else:
                olen = _cascade(
                    Lv[ch], Le[ch], Lc[ch], Ll[ch],
                    Lv[pa], Le[pa], Lc[pa], Ll[pa],
                    tv, te, tc,
                )
                w_root = tv[olen - 1]
                if tc[olen - 1] >= 2:
                    l_new = tv[olen - 1]
                else:
                    l_new = tv[olen - 2]
                Rl[pa] = _far_update(Rv[pa], Re[pa], Rc[pa], Rl[pa], w_root, l_new)
                for i in range(olen):
                    Lv[pa, i] = tv[i]
                    Le[pa, i] = te[i]
                    Lc[pa, i] = tc[i]
                Ll[pa] = olen
            ent[pa] = parent_entry
            top -= 1
    return int(Rv[0, Rl[0] - 1])


@njit(cache=True, nogil=True)
def hs_nonsimple_batch(bit_matrix):
    out = np.empty(bit_matrix.shape[0], np.int64)
    for t in range(bit_matrix.shape[0]):
        out[t] = hs_nonsimple_bits(bit_matrix[t])
    return out
