"""Shared test utilities: independent oracles and matrix builders."""

from itertools import combinations

import numpy as np

from tourmine.data import TransactionMatrix


def matrix_from_rows(rows, n_items):
    """Build a TransactionMatrix from iterables of item ordinals."""
    bits = []
    for row in rows:
        b = 0
        for j in row:
            b |= 1 << int(j)
        bits.append(b)
    return TransactionMatrix(n_items, bits, list(range(1, len(bits) + 1)))


def oracle_matrix():
    """Transactions {AB, ABC, AC, B} over items A=0, B=1, C=2."""
    return matrix_from_rows([(0, 1), (0, 1, 2), (0, 2), (1,)], 3)


def random_matrix(rng, max_items=12, max_rows=64, density=None):
    n = int(rng.integers(2, max_items + 1))
    m = int(rng.integers(4, max_rows + 1))
    if density is None:
        density = float(rng.uniform(0.2, 0.6))
    dense = rng.random((m, n)) < density
    return matrix_from_rows([np.flatnonzero(r) for r in dense], n)


def brute_force_counts(matrix):
    """Exact transaction count for every non-empty itemset, by enumeration.

    Independent of the level-wise miner: checks X subset-of t per row using
    row bitmasks, for all 2^n - 1 itemsets.
    """
    rows = np.array(matrix.rows, dtype=np.uint64)
    counts = {}
    for size in range(1, matrix.n + 1):
        for items in combinations(range(matrix.n), size):
            sub = np.uint64(sum(1 << j for j in items))
            counts[items] = int(np.count_nonzero((rows & sub) == sub))
    return counts


def brute_force_frequents(matrix, min_count):
    return {
        items: count
        for items, count in brute_force_counts(matrix).items()
        if count >= min_count
    }
