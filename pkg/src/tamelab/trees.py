"""Digital trees over emitted words and their construction costs.

Three cost measures on a multiset of n words:

  * trie size R: number of internal nodes of the trie that splits words
    until every leaf holds fewer than two of them
  * trie path length C: sum over words of the depth at which each word
    first sits alone
  * binary-search-tree symbol cost B: words are inserted in arrival order
    into a BST ordered lexicographically; every comparison of two words
    costs one more symbol than their longest common prefix, and B totals
    those symbol costs

Reference builders construct the actual trees; the fast paths compute the
same numbers from longest-common-prefix tables and are validated against
the builders in the test suite.
"""

from __future__ import annotations

import numpy as np

from .errors import IndistinguishableWords

COINCIDENCE_CAP = 1_000_000


def coincidence(u, v, cap: int = COINCIDENCE_CAP) -> int:
    """Length of the longest common prefix of two indexable words."""
    i = 0
    while i < cap:
        try:
            a, b = u[i], v[i]
        except IndexError:
            raise IndistinguishableWords(
                "one word ran out after %d symbols with no mismatch" % i
            ) from None
        if a != b:
            return i
        i += 1
    raise IndistinguishableWords(
        "words agree on the first %d symbols" % cap)


# -- reference builders ------------------------------------------------


class TrieNode:
    __slots__ = ("children", "depth")

    def __init__(self, depth: int):
        self.children: dict[int, "TrieNode"] = {}
        self.depth = depth


def _trie_from(words, depth: int) -> TrieNode | None:
    if len(words) < 2:
        return None
    node = TrieNode(depth)
    groups: dict[int, list] = {}
    for w in words:
        groups.setdefault(w[depth], []).append(w)
    for sym, grp in sorted(groups.items()):
        child = _trie_from(grp, depth + 1)
        if child is not None:
            node.children[sym] = child
    return node


def build_trie(words) -> tuple[TrieNode | None, int, int]:
    """Trie over the words plus its two cost measures.

    Returns (root, R, C) where R counts internal nodes and C sums the
    depth at which each word first sits alone.  The root is None when
    fewer than two words are given (both costs are then zero).
    """
    root = _trie_from(list(words), 0)
    size, path = trie_costs_recursive(words)
    return root, size, path


def trie_costs_recursive(words) -> tuple[int, int]:
    """(R, C) via the explicit trie."""
    n = len(words)
    if n < 2:
        return 0, 0
    size = 0
    path = 0

    def walk(ws, depth):
        nonlocal size, path
        if len(ws) < 2:
            path += depth
            return
        size += 1
        groups: dict[int, list] = {}
        for w in ws:
            groups.setdefault(w[depth], []).append(w)
        for grp in groups.values():
            walk(grp, depth + 1)

    walk(list(words), 0)
    return size, path


class BstNode:
    __slots__ = ("word", "left", "right")

    def __init__(self, word):
        self.word = word
        self.left: "BstNode | None" = None
        self.right: "BstNode | None" = None


def build_bst(words) -> tuple[BstNode | None, int]:
    """Insert words in arrival order into a lexicographic BST.

    Returns (root, B).  Each comparison of two words costs one symbol
    more than their longest common prefix, and B totals those costs.
    """
    total = 0
    root: BstNode | None = None

    def less(u, v):
        nonlocal total
        k = coincidence(u, v)
        total += k + 1
        return u[k] < v[k]

    for w in words:
        if root is None:
            root = BstNode(w)
            continue
        cur = root
        while True:
            if less(w, cur.word):
                if cur.left is None:
                    cur.left = BstNode(w)
                    break
                cur = cur.left
            else:
                if cur.right is None:
                    cur.right = BstNode(w)
                    break
                cur = cur.right
    return root, total


def bst_cost_insert(words) -> int:
    """B via literal insertions; see build_bst."""
    return build_bst(words)[1]


# -- fast paths on symbol matrices ------------------------------------


def _ensure_resolved(batch) -> tuple[np.ndarray, np.ndarray]:
    """Grow the batch until lexicographic neighbors all differ; return the
    (depth, n) matrix and its column sort order.  Needed so sort order
    and LCPs are well defined."""
    depth = max(8, batch.depth)
    while True:
        m = batch.matrix(depth)
        order = np.lexsort(m[::-1])
        sm = m[:, order]
        if batch.n < 2 or np.all((sm[:, 1:] != sm[:, :-1]).any(axis=0)):
            return m, order
        depth *= 2
        if depth > COINCIDENCE_CAP:
            raise IndistinguishableWords(
                "words failed to separate below depth %d" % COINCIDENCE_CAP)


def sorted_neighbor_lcps(m: np.ndarray, order: np.ndarray | None = None
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Lexicographic order of the columns and LCPs of adjacent columns."""
    if order is None:
        order = np.lexsort(m[::-1])
    sm = m[:, order]
    diff = sm[:, 1:] != sm[:, :-1]
    l = np.argmax(diff, axis=0)
    # argmax returns 0 for all-equal columns; caller guarantees resolution
    return order, l


def trie_costs_from_lcps(l: np.ndarray) -> tuple[int, int]:
    """(R, C) from sorted-neighbor LCPs.

    Each sorted word's isolation depth is one past its larger neighbor
    LCP; each neighbor pair contributes the internal nodes on the part of
    its common path not already counted by the previous pair.
    """
    n = len(l) + 1
    if n < 2:
        return 0, 0
    prev = np.concatenate(([0], l[:-1]))
    R = 1 + int(np.sum(l - np.minimum(prev, l)))
    left = np.concatenate(([-1], l))   # lcp with left neighbor, -1 at ends
    right = np.concatenate((l, [-1]))
    C = int(np.sum(1 + np.maximum(left, right)))
    return R, C


def bst_cost_from_lcps(order: np.ndarray, l: np.ndarray) -> int:
    """B from the sort order and adjacent LCPs by the range-minimum rule.

    Of two words, the earlier arrival is an ancestor of the later one
    exactly when nothing sorted strictly between them arrived before it,
    so a pair is compared iff the arrival minimum over their closed
    sorted range sits at one of its endpoints.  The comparison costs
    their LCP + 1, and pair LCPs are range minima of the adjacent ones.
    Dense O(n^2) matrices; the pivot recursion covers large batches.
    """
    n = len(order)
    if n < 2:
        return 0
    t = order.astype(np.float64)  # arrival time of the word at sorted pos
    pos = np.arange(n)
    upper = pos[None, :] >= pos[:, None]
    strict = pos[None, :] > pos[:, None]
    RM = np.minimum.accumulate(np.where(upper, t[None, :], np.inf), axis=1)
    lrow = np.concatenate(([np.inf], l.astype(np.float64)))
    LM = np.minimum.accumulate(np.where(strict, lrow[None, :], np.inf), axis=1)
    endpoint_min = np.minimum(t[:, None], t[None, :])
    anc = strict & (RM == endpoint_min)
    return int((LM[anc] + 1.0).sum())


def bst_cost_pivots(m: np.ndarray) -> int:
    """B from the symbol matrix via pivot recursion.

    Inserting in arrival order compares each word against exactly the
    pivots of the quicksort recursion that always picks the earliest
    arrival; each comparison costs lcp + 1 symbols.
    """
    n = m.shape[1]
    if n < 2:
        return 0
    total = 0
    stack = [np.arange(n)]
    while stack:
        idx = stack.pop()
        if len(idx) < 2:
            continue
        piv = idx[0]
        rest = idx[1:]
        block = m[:, rest] != m[:, [piv]]
        any_diff = block.any(axis=0)
        lcp = np.where(any_diff, np.argmax(block, axis=0), m.shape[0])
        if np.any(~any_diff):
            raise IndistinguishableWords("unresolved words in bst_cost_pivots")
        total += int(np.sum(lcp + 1))
        first_diff = m[lcp, rest] < m[lcp, piv]
        stack.append(rest[first_diff])
        stack.append(rest[~first_diff])
    return total


def batch_costs(batch) -> tuple[int, int, int]:
    """(R, C, B) for one emitted batch, via the fast kernels."""
    if batch.n < 2:
        return 0, 0, 0
    m, order = _ensure_resolved(batch)
    _, l = sorted_neighbor_lcps(m, order)
    R, C = trie_costs_from_lcps(l)
    if batch.n <= 1024:
        B = bst_cost_from_lcps(order, l)
    else:
        B = bst_cost_pivots(m)
    return R, C, B
