"""Rooted binary trees on an index arena: BST construction, Horton-Strahler
numbers by traversal, heights, and the two gluing operators.

Everything here is the ground-truth layer: plain array walks, no clever
encodings. Trees are stored as parallel arrays (left child index, right child
index, optional keys) so that trees with millions of nodes never touch Python
recursion. All traversals are iterative.
"""

from __future__ import annotations

import csv
import io

import numpy as np

NIL = -1


class BinaryTree:
    """A rooted binary tree held in an index arena.

    left[i] / right[i] give child indices (NIL = absent). keys is either None
    (shape-only tree) or an int64 array satisfying the BST order property.
    """

    __slots__ = ("left", "right", "keys", "root")

    def __init__(self, left, right, keys=None, root=0):
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.keys = None if keys is None else np.asarray(keys, dtype=np.int64)
        self.root = int(root)

    @property
    def size(self):
        return len(self.left)

    @classmethod
    def single(cls, key=None):
        keys = None if key is None else [key]
        return cls([NIL], [NIL], keys, 0)

    def __eq__(self, other):
        if not isinstance(other, BinaryTree):
            return NotImplemented
        if self.size != other.size or self.root != other.root:
            return False
        if (self.keys is None) != (other.keys is None):
            return False
        same = np.array_equal(self.left, other.left) and np.array_equal(
            self.right, other.right
        )
        if same and self.keys is not None:
            same = np.array_equal(self.keys, other.keys)
        return same

    def __repr__(self):
        return "BinaryTree(size=%d, root=%d, keyed=%s)" % (
            self.size,
            self.root,
            self.keys is not None,
        )

    def preorder(self):
        """Node indices in preorder (parent before children), as an array."""
        out = np.empty(self.size, dtype=np.int64)
        stack = [self.root]
        pos = 0
        left, right = self.left, self.right
        while stack:
            v = stack.pop()
            out[pos] = v
            pos += 1
            # push right first so left is processed first
            r = right[v]
            if r != NIL:
                stack.append(r)
            l = left[v]
            if l != NIL:
                stack.append(l)
        if pos != self.size:
            raise ValueError("tree arena contains unreachable nodes")
        return out

    def validate(self):
        """Check the arena is a single well-formed tree (and a BST if keyed)."""
        n = self.size
        if n == 0:
            raise ValueError("empty tree")
        parent_seen = np.zeros(n, dtype=bool)
        for arr in (self.left, self.right):
            for v in arr:
                if v == NIL:
                    continue
                if not (0 <= v < n):
                    raise ValueError("child index out of range: %d" % v)
                if parent_seen[v]:
                    raise ValueError("node %d has two parents" % v)
                parent_seen[v] = True
        if parent_seen[self.root]:
            raise ValueError("root has a parent")
        order = self.preorder()  # raises if not all nodes reachable
        if self.keys is not None:
            # in-order traversal must produce strictly increasing keys
            prev = None
            stack = []
            v = self.root
            while stack or v != NIL:
                while v != NIL:
                    stack.append(v)
                    v = self.left[v]
                v = stack.pop()
                k = int(self.keys[v])
                if prev is not None and k <= prev:
                    raise ValueError("BST key order violated at node %d" % v)
                prev = k
                v = self.right[v]
        return order


def bst_from_permutation(perm):
    """Build the binary search tree obtained by inserting keys left to right.

    perm must be a permutation of 1..m. Runs in O(m) using the classic
    stack construction of the treap with insertion-time priorities (the
    insertion BST is exactly that treap), so long thin trees do not cost
    quadratic time.
    """
    perm = list(perm)
    m = len(perm)
    if m == 0:
        raise ValueError("empty permutation")
    time_of_key = [NIL] * (m + 1)
    for t, k in enumerate(perm):
        if not isinstance(k, (int, np.integer)) or not (1 <= k <= m):
            raise ValueError("not a permutation of 1..%d: %r" % (m, k))
        if time_of_key[k] != NIL:
            raise ValueError("repeated value %d" % k)
        time_of_key[k] = t

    left = np.full(m, NIL, dtype=np.int64)
    right = np.full(m, NIL, dtype=np.int64)
    keys = np.empty(m, dtype=np.int64)
    # nodes indexed by insertion time; walk keys in increasing key order and
    # maintain the rightmost spine as a stack of strictly increasing times
    stack = []
    for k in range(1, m + 1):
        t = time_of_key[k]
        keys[t] = k
        last_popped = NIL
        while stack and stack[-1] > t:
            last_popped = stack.pop()
        if last_popped != NIL:
            left[t] = last_popped
        if stack:
            right[stack[-1]] = t
        stack.append(t)
    root = stack[0]
    return BinaryTree(left, right, keys, root)


def _hs_values(tree):
    """Per-node HS values as an int64 array (postorder dynamic program)."""
    from ._kernels import hs_values_arrays

    return hs_values_arrays(tree.left, tree.right, tree.root)


def hs(tree):
    """Horton-Strahler number of the root.

    Leaf = 0; a node with both children takes max of the two child values,
    plus 1 when they are equal; a node with one child takes the child's value.
    One postorder pass, linear time.
    """
    return int(_hs_values(tree)[tree.root])


def hs_labeling(tree):
    """Per-node HS values aligned with the arena indices."""
    return _hs_values(tree)


def height(tree):
    """Maximal depth of any node, root at depth 0 (single node: 0)."""
    depth = np.zeros(tree.size, dtype=np.int64)
    best = 0
    left, right = tree.left, tree.right
    stack = [tree.root]
    while stack:
        v = stack.pop()
        d = depth[v]
        if d > best:
            best = d
        for c in (left[v], right[v]):
            if c != NIL:
                depth[c] = d + 1
                stack.append(c)
    return int(best)


def _spine_end(tree, side):
    arr = tree.right if side == "R" else tree.left
    v = tree.root
    while arr[v] != NIL:
        v = arr[v]
    return v


def _glue(parent, child, side, shape_only):
    """Concatenate arenas, attach child's root under the parent's spine end."""
    np_, nc = parent.size, child.size
    left = np.concatenate([parent.left, np.where(child.left == NIL, NIL, child.left + np_)])
    right = np.concatenate([parent.right, np.where(child.right == NIL, NIL, child.right + np_)])
    end = _spine_end(parent, side)
    if side == "R":
        right[end] = child.root + np_
    else:
        left[end] = child.root + np_
    keys = None
    if not shape_only and parent.keys is not None and child.keys is not None:
        if side == "R":
            # child occupies the larger key block
            keys = np.concatenate([parent.keys, child.keys + np_])
        else:
            # parent occupies the larger key block
            keys = np.concatenate([parent.keys + nc, child.keys])
    return BinaryTree(left, right, keys, parent.root)


def glue_plus(parent, child, shape_only=False):
    """Attach child's root as the right child of the node ending the parent's
    rightmost root path. With keys, the child block is shifted up by the
    parent's node count so the result stays a BST."""
    return _glue(parent, child, "R", shape_only)


def glue_minus(parent, child, shape_only=False):
    """Mirror of glue_plus: child goes below the leftmost path, and the
    parent's keys are shifted up by the child's node count."""
    return _glue(parent, child, "L", shape_only)


def reflect(tree):
    """Swap left and right children everywhere; keys remap k -> m+1-k."""
    keys = None
    if tree.keys is not None:
        keys = tree.size + 1 - tree.keys
    return BinaryTree(tree.right.copy(), tree.left.copy(), keys, tree.root)


def max_hs_for_size(m):
    """Largest HS any binary tree with m nodes can have.

    A tree with HS k contains a perfect subtree minor of height k, which needs
    at least 2^(k+1) - 1 nodes, and the perfect tree attains it. Hence the
    maximum is floor(log2(m+1)) - 1, one less than the naive level count.
    Validated exhaustively over all shapes for small m in the test suite.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    # floor(log2(m+1)) == (m+1).bit_length() - 1
    return (m + 1).bit_length() - 2


def all_shapes(m):
    """Yield every binary tree shape with m nodes (Catalan many). Test helper
    for exhaustive oracles; do not call with large m."""
    if m == 0:
        yield None
        return
    for i in range(m):
        for ls in all_shapes(i):
            for rs in all_shapes(m - 1 - i):
                yield (ls, rs)


def tree_from_shape(shape):
    """Materialize a nested-tuple shape from all_shapes as a BinaryTree."""
    left, right = [], []

    def new_node():
        left.append(NIL)
        right.append(NIL)
        return len(left) - 1

    root = new_node()
    stack = [(shape, root)]
    while stack:
        (ls, rs), v = stack.pop()
        if ls is not None:
            left[v] = new_node()
            stack.append((ls, left[v]))
        if rs is not None:
            right[v] = new_node()
            stack.append((rs, right[v]))
    return BinaryTree(left, right, None, root)


def shape_string(tree):
    """Parenthesized shape serialization: '(L,R)' per node, '.' for absent.

    Built iteratively so paths with millions of nodes do not overflow the
    interpreter stack.
    """
    out = []
    left, right = tree.left, tree.right
    # emit via an explicit instruction stack
    stack = [("node", tree.root)]
    while stack:
        op, v = stack.pop()
        if op == "lit":
            out.append(v)
        elif v == NIL:
            out.append(".")
        else:
            out.append("(")
            stack.append(("lit", ")"))
            stack.append(("node", right[v]))
            stack.append(("lit", ","))
            stack.append(("node", left[v]))
    return "".join(out)


def edge_csv(tree, hs_labels=None):
    """Edge-list CSV: node_id,parent_id,side,key,hs_label (root row has empty
    parent_id and side). Deterministic row order = preorder."""
    if hs_labels is None:
        hs_labels = hs_labeling(tree)
    parent = np.full(tree.size, NIL, dtype=np.int64)
    side = np.zeros(tree.size, dtype="U1")
    for v in range(tree.size):
        l, r = tree.left[v], tree.right[v]
        if l != NIL:
            parent[l] = v
            side[l] = "L"
        if r != NIL:
            parent[r] = v
            side[r] = "R"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node_id", "parent_id", "side", "key", "hs_label"])
    for v in tree.preorder():
        v = int(v)
        pid = "" if parent[v] == NIL else str(int(parent[v]))
        sd = "" if parent[v] == NIL else str(side[v])
        key = "" if tree.keys is None else str(int(tree.keys[v]))
        w.writerow([str(v), pid, sd, key, str(int(hs_labels[v]))])
    return buf.getvalue()


def tree_from_edge_csv(text):
    """Inverse of edge_csv (hs_label column is ignored, it is derived data)."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if not rows or rows[0][:3] != ["node_id", "parent_id", "side"]:
        raise ValueError("not an edge-list CSV")
    body = rows[1:]
    n = len(body)
    left = np.full(n, NIL, dtype=np.int64)
    right = np.full(n, NIL, dtype=np.int64)
    keys = np.full(n, NIL, dtype=np.int64)
    root = NIL
    keyed = False
    for node_id, parent_id, side, key, _hs in body:
        v = int(node_id)
        if key != "":
            keys[v] = int(key)
            keyed = True
        if parent_id == "":
            root = v
        elif side == "L":
            left[int(parent_id)] = v
        elif side == "R":
            right[int(parent_id)] = v
        else:
            raise ValueError("bad side %r" % side)
    if root == NIL:
        raise ValueError("no root row")
    return BinaryTree(left, right, keys if keyed else None, root)
