import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import tamelab as tl
from tamelab.trees import (
    bst_cost_from_lcps,
    bst_cost_insert,
    bst_cost_pivots,
    build_bst,
    build_trie,
    coincidence,
    sorted_neighbor_lcps,
    trie_costs_from_lcps,
    trie_costs_recursive,
)


def test_coincidence():
    assert coincidence((0, 1, 1), (0, 1, 0)) == 2
    assert coincidence((1, 0), (0, 1)) == 0
    with pytest.raises(tl.IndistinguishableWords):
        coincidence((0, 1), (0, 1))
    with pytest.raises(tl.IndistinguishableWords):
        coincidence((1,), (1, 0))


def test_known_small_trees():
    words = [(0, 0), (0, 1), (1, 0)]
    root, R, C = build_trie(words)
    assert (R, C) == (2, 5)
    assert trie_costs_recursive(words) == (2, 5)
    broot, B = build_bst(words)
    assert B == 4
    assert bst_cost_insert(words) == 4


def test_single_and_empty_batches():
    root, R, C = build_trie([(0, 1)])
    assert (R, C) == (0, 0)
    assert build_bst([])[1] == 0
    assert build_bst([(1, 1)])[1] == 0


def _random_batch(rng, n, depth):
    while True:
        m = rng.integers(0, 2, size=(depth, n))
        cols = {tuple(m[:, j]) for j in range(n)}
        if len(cols) == n:
            return m


def test_cost_kernels_match_reference_builders():
    rng = np.random.default_rng(5)
    for _ in range(60):
        n = int(rng.integers(2, 40))
        m = _random_batch(rng, n, 14)
        words = [tuple(m[:, j]) for j in range(n)]
        _, R_ref, C_ref = build_trie(words)
        B_ref = bst_cost_insert(words)

        order, l = sorted_neighbor_lcps(m)
        R, C = trie_costs_from_lcps(l)
        assert (R, C) == (R_ref, C_ref)
        assert bst_cost_from_lcps(order, l) == B_ref
        assert bst_cost_pivots(m) == B_ref


def test_batch_costs_frozen():
    src = tl.Memoryless([0.3, 0.7])
    assert tl.batch_costs(src.emit(16, 12345)) == (20, 84, 136)


def test_batch_costs_on_dynamical_source():
    g = tl.gauss_source()
    R, C, B = tl.batch_costs(g.emit(12, 3))
    assert R > 0 and C >= R and B > 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(2, 24))
def test_bst_kernel_property(seed, n):
    rng = np.random.default_rng(seed)
    m = _random_batch(rng, n, 12)
    words = [tuple(m[:, j]) for j in range(n)]
    order, l = sorted_neighbor_lcps(m)
    assert bst_cost_from_lcps(order, l) == bst_cost_insert(words)
