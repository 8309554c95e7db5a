"""Exact level-wise frequent-itemset mining and association-rule derivation.

Supports are kept as integer counts over the transaction total; fractions are
only materialized at the interface, so threshold comparisons never hinge on
floating-point rounding. Itemsets are canonical sorted tuples of item
ordinals.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np
from sklearn.base import BaseEstimator

from .data import TransactionMatrix
from .errors import InvalidThreshold, ItemOutOfRange
from .validation import ceil_fraction, check_threshold

# Deterministic candidate-storage accounting: one encoded item = 8 bytes, so a
# size-k candidate costs 8k bytes. Only join-generated levels (size >= 2) hold
# candidate objects; the size-1 scan reads the matrix columns directly.
BYTES_PER_ITEM = 8

Itemset = tuple[int, ...]


def canon_itemset(items) -> Itemset:
    """Canonical (sorted, duplicate-free) itemset tuple."""
    return tuple(sorted(set(int(i) for i in items)))


@dataclass(frozen=True)
class FrequentSet:
    """A frequent itemset with its exact transaction count."""

    itemset: Itemset
    count: int
    total: int

    @property
    def support(self) -> float:
        return self.count / self.total

    @property
    def support_exact(self) -> Fraction:
        return Fraction(self.count, self.total)


@dataclass(frozen=True)
class AssociationRule:
    """Rule X => Y with exact counts; metrics derive from the counts."""

    antecedent: Itemset
    consequent: Itemset
    count_union: int
    count_antecedent: int
    count_consequent: int
    total: int

    @property
    def support(self) -> float:
        return self.count_union / self.total

    @property
    def confidence(self) -> float:
        return self.count_union / self.count_antecedent

    @property
    def lift(self) -> float:
        return (self.count_union * self.total) / (self.count_antecedent * self.count_consequent)

    @property
    def confidence_exact(self) -> Fraction:
        return Fraction(self.count_union, self.count_antecedent)

    @property
    def lift_exact(self) -> Fraction:
        return Fraction(self.count_union * self.total, self.count_antecedent * self.count_consequent)

    def key(self) -> tuple:
        return (self.antecedent, self.consequent)


@dataclass
class MiningStats:
    """Instrumentation for one mining pass.

    candidates_per_level[i] counts candidates of size i+1 (the size-1 entry is
    the number of columns scanned); candidate_bytes_peak accounts the largest
    join-generated level at BYTES_PER_ITEM bytes per contained item.
    """

    candidates_per_level: list[int] = field(default_factory=list)
    frequent_per_level: list[int] = field(default_factory=list)
    candidate_bytes_peak: int = 0
    wall_time_s: float = 0.0

    def total_candidates(self) -> int:
        return sum(self.candidates_per_level)

    @staticmethod
    def merged(parts: list["MiningStats"]) -> "MiningStats":
        """Combine per-cluster stats: level counts summed, bytes re-peaked."""
        depth = max((len(p.candidates_per_level) for p in parts), default=0)
        cand = [0] * depth
        freq = [0] * depth
        for p in parts:
            for i, c in enumerate(p.candidates_per_level):
                cand[i] += c
            for i, c in enumerate(p.frequent_per_level):
                freq[i] += c
        peak = max(
            (cand[i] * (i + 1) * BYTES_PER_ITEM for i in range(1, depth)), default=0
        )
        return MiningStats(cand, freq, peak, sum(p.wall_time_s for p in parts))

    def as_flat_lines(self, prefix: str = "") -> list[str]:
        tag = f"{prefix}." if prefix else ""
        return [
            f"{tag}candidates_per_level={'|'.join(map(str, self.candidates_per_level))}",
            f"{tag}frequent_per_level={'|'.join(map(str, self.frequent_per_level))}",
            f"{tag}candidate_bytes_peak={self.candidate_bytes_peak}",
            f"{tag}wall_time_s={self.wall_time_s:.6f}",
        ]


def _check_items(items, n: int):
    for j in items:
        if not 0 <= j < n:
            raise ItemOutOfRange(f"item ordinal {j} outside [0, {n})")


def support(itemset, t: TransactionMatrix) -> float:
    """Fraction of transactions containing the itemset (empty set -> 1.0)."""
    items = canon_itemset(itemset)
    _check_items(items, t.n)
    if not items:
        return 1.0
    return support_count(items, t) / t.m


def support_count(items: Itemset, t: TransactionMatrix) -> int:
    """Exact number of transactions containing `items` (empty -> m)."""
    if not items:
        return t.m
    mask = t.column_mask(items[0])
    for j in items[1:]:
        mask &= t.column_mask(j)
        if not mask:
            return 0
    return mask.bit_count()


def mine_levels(
    t: TransactionMatrix,
    min_count: int,
    l1_items,
    stats: MiningStats,
) -> list[FrequentSet]:
    """Shared level-wise core: expand pre-scanned frequent singletons upward.

    `l1_items` are the frequent singleton ordinals (ascending); the caller has
    already recorded its level-1 scan in `stats.candidates_per_level`. Used by
    both the plain miner and the per-cluster hybrid miner so the two differ
    only in which singletons seed the join.
    """
    m = t.m
    col_counts = t.column_counts()
    out: list[FrequentSet] = []
    level: list[tuple[Itemset, int]] = []  # (itemset, transaction mask)
    for j in l1_items:
        j = int(j)
        level.append(((j,), t.column_mask(j)))
        out.append(FrequentSet((j,), int(col_counts[j]), m))
    stats.frequent_per_level.append(len(level))

    size = 2
    while len(level) >= 2:
        frequent_keys = {itemset for itemset, _ in level}
        candidates: list[tuple[Itemset, int, int]] = []  # (itemset, left idx, right idx)
        for a in range(len(level)):
            items_a = level[a][0]
            for b in range(a + 1, len(level)):
                items_b = level[b][0]
                if items_a[:-1] != items_b[:-1]:
                    break  # level is sorted, shared prefixes are contiguous
                cand = items_a + (items_b[-1],)
                if size > 2 and any(
                    sub not in frequent_keys for sub in combinations(cand, size - 1)
                ):
                    continue
                candidates.append((cand, a, b))
        if not candidates:
            break
        stats.candidates_per_level.append(len(candidates))
        stats.candidate_bytes_peak = max(
            stats.candidate_bytes_peak, len(candidates) * size * BYTES_PER_ITEM
        )
        next_level = []
        for cand, a, b in candidates:
            mask = level[a][1] & level[b][1]
            count = mask.bit_count()
            if count >= min_count:
                next_level.append((cand, mask))
                out.append(FrequentSet(cand, count, m))
        stats.frequent_per_level.append(len(next_level))
        level = next_level
        size += 1
    return out


def frequent_itemsets(
    t: TransactionMatrix,
    min_supp,
    items=None,
    stats: MiningStats | None = None,
) -> list[FrequentSet]:
    """Level-wise Apriori over the matrix (optionally restricted to `items`).

    Returns every itemset with support >= min_supp, sorted by (size, items).
    Candidate generation joins frequent k-sets sharing a (k-1)-prefix and
    prunes candidates with any infrequent k-subset. If `stats` is given it is
    populated in place.
    """
    start = time.perf_counter()
    thr = check_threshold(min_supp, "min_supp")
    if stats is None:
        stats = MiningStats()
    min_count = min_support_count(thr, t.m)
    col_counts = t.column_counts()
    if items is None:
        scanned = t.n
        l1 = np.flatnonzero(col_counts >= min_count)
    else:
        arr = np.unique(np.asarray(list(items), dtype=np.int64))
        if arr.size and (arr[0] < 0 or arr[-1] >= t.n):
            raise ItemOutOfRange(f"item ordinals must lie in [0, {t.n})")
        scanned = int(arr.size)
        l1 = arr[col_counts[arr] >= min_count]
    stats.candidates_per_level = [scanned]
    stats.frequent_per_level = []
    stats.candidate_bytes_peak = 0
    out = mine_levels(t, min_count, l1, stats)
    out.sort(key=lambda fs: (len(fs.itemset), fs.itemset))
    stats.wall_time_s = time.perf_counter() - start
    return out


def min_support_count(min_supp, m: int) -> int:
    """Smallest transaction count whose support meets the threshold."""
    return ceil_fraction(check_threshold(min_supp, "min_supp"), m)


def derive_rules(
    frequents: list[FrequentSet],
    t: TransactionMatrix,
    min_conf,
) -> list[AssociationRule]:
    """Single-consequent rules from frequent itemsets, filtered by confidence.

    For each frequent F with |F| >= 2 and each y in F, the rule
    F\\{y} => {y} is emitted iff count(F)/count(F\\{y}) >= min_conf.
    Confidence comparisons are exact (integer cross-multiplication).
    """
    conf_thr = check_threshold(min_conf, "min_conf", allow_zero=True)
    counts = {fs.itemset: fs.count for fs in frequents}
    m = t.m

    def count_of(itemset: Itemset) -> int:
        got = counts.get(itemset)
        if got is None:
            got = support_count(itemset, t)
            counts[itemset] = got
        return got

    rules = []
    for fs in frequents:
        if len(fs.itemset) < 2:
            continue
        for y in fs.itemset:
            antecedent = tuple(j for j in fs.itemset if j != y)
            c_ant = count_of(antecedent)
            # count(F)/c_ant >= min_conf, cross-multiplied to stay exact
            if fs.count * conf_thr.denominator >= conf_thr.numerator * c_ant:
                rules.append(
                    AssociationRule(
                        antecedent=antecedent,
                        consequent=(y,),
                        count_union=fs.count,
                        count_antecedent=c_ant,
                        count_consequent=count_of((y,)),
                        total=m,
                    )
                )
    rules.sort(key=lambda r: (len(r.antecedent), r.antecedent, r.consequent))
    return rules


class AprioriMiner(BaseEstimator):
    """Estimator-style wrapper around the exact miner.

    fit(X) accepts a TransactionMatrix or any binary array-like of shape
    (transactions, items); afterwards `frequent_sets_`, `rules_` and `stats_`
    are available.
    """

    def __init__(self, min_support=0.02, min_confidence=0.5):
        self.min_support = min_support
        self.min_confidence = min_confidence

    def fit(self, X, y=None):
        t = as_transaction_matrix(X)
        self.n_items_ = t.n
        self.stats_ = MiningStats()
        self.frequent_sets_ = frequent_itemsets(t, self.min_support, stats=self.stats_)
        self.rules_ = derive_rules(self.frequent_sets_, t, self.min_confidence)
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).rules_


def as_transaction_matrix(X) -> TransactionMatrix:
    """Coerce array-likes to a TransactionMatrix (rows become visitor 1..m)."""
    if isinstance(X, TransactionMatrix):
        return X
    arr = np.asarray(X)
    if arr.ndim != 2:
        raise InvalidThreshold(f"expected a 2-D binary matrix, got shape {arr.shape}")
    rows = []
    for r in range(arr.shape[0]):
        bits = 0
        for j in range(arr.shape[1]):
            if arr[r, j]:
                bits |= 1 << j
        rows.append(bits)
    return TransactionMatrix(arr.shape[1], rows, list(range(1, arr.shape[0] + 1)))


# ---------------------------------------------------------------------------
# rule export


def rules_to_csv(rules, id_for=None, cluster_of=None) -> str:
    """Render rules as CSV (6-decimal metrics).

    `id_for` maps item ordinals to external place ids (identity when absent);
    `cluster_of` adds a leading cluster_id column when given.
    """
    if id_for is None:
        id_for = lambda j: j
    buf = io.StringIO()
    cols = "antecedent_ids,consequent_id,support,confidence,lift"
    buf.write((f"cluster_id,{cols}\n") if cluster_of else (cols + "\n"))
    for rule in rules:
        ant = "|".join(str(id_for(j)) for j in rule.antecedent)
        row = (
            f"{ant},{id_for(rule.consequent[0])},"
            f"{rule.support:.6f},{rule.confidence:.6f},{rule.lift:.6f}"
        )
        if cluster_of:
            buf.write(f"{cluster_of(rule)},{row}\n")
        else:
            buf.write(row + "\n")
    return buf.getvalue()
