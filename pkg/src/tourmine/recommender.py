"""Hybrid recommendation engine: cluster-partitioned rule mining plus an
affinity blend, with the un-clustered single-pass miner as the baseline.

Hybrid mining restricts candidate generation to each cluster's items while
keeping the global transaction count as the support denominator, so
within-cluster supports equal their global values and the hybrid frequent
sets are exactly the baseline ones whose items share a cluster.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .apriori import (
    BYTES_PER_ITEM,
    AssociationRule,
    FrequentSet,
    MiningStats,
    as_transaction_matrix,
    derive_rules,
    frequent_itemsets,
    min_support_count,
    mine_levels,
)
from .clustering import ClusterModel
from .data import PlaceCatalog, TransactionMatrix
from .errors import DimensionMismatch, TourmineError
from .validation import check_threshold

BASELINE = "baseline"
HYBRID = "hybrid"


class RuleBase:
    """Rules grouped by cluster (a baseline rule base has one pseudo-cluster)."""

    def __init__(self, per_cluster_rules, mining_stats, source, per_cluster_frequents=None):
        self.per_cluster_rules: dict[int, list[AssociationRule]] = per_cluster_rules
        self.mining_stats: MiningStats = mining_stats
        self.source = source
        self.per_cluster_frequents: dict[int, list[FrequentSet]] = per_cluster_frequents or {}
        self._consequent_index = None

    def all_rules(self) -> list[AssociationRule]:
        rules = [r for rs in self.per_cluster_rules.values() for r in rs]
        rules.sort(key=lambda r: (len(r.antecedent), r.antecedent, r.consequent))
        return rules

    def all_frequents(self) -> list[FrequentSet]:
        out = [fs for fss in self.per_cluster_frequents.values() for fs in fss]
        out.sort(key=lambda fs: (len(fs.itemset), fs.itemset))
        return out

    def rule_count(self) -> int:
        return sum(len(rs) for rs in self.per_cluster_rules.values())

    def cluster_of(self, rule: AssociationRule) -> int:
        for c, rs in self.per_cluster_rules.items():
            if rule in rs:
                return c
        raise TourmineError("rule does not belong to this rule base")

    def consequent_index(self):
        """consequent ordinal -> [(antecedent bitmask, rule)], cached."""
        if self._consequent_index is None:
            index: dict[int, list[tuple[int, AssociationRule]]] = {}
            for rule in self.all_rules():
                mask = 0
                for j in rule.antecedent:
                    mask |= 1 << j
                index.setdefault(rule.consequent[0], []).append((mask, rule))
            self._consequent_index = index
        return self._consequent_index


def mine_baseline(t: TransactionMatrix, min_supp, min_conf) -> RuleBase:
    """Plain single-pass mining over all items, wrapped as one pseudo-cluster."""
    start = time.perf_counter()
    stats = MiningStats()
    frequents = frequent_itemsets(t, min_supp, stats=stats)
    rules = derive_rules(frequents, t, min_conf)
    stats.wall_time_s = time.perf_counter() - start
    return RuleBase({0: rules}, stats, BASELINE, {0: frequents})


def mine_hybrid(t: TransactionMatrix, model: ClusterModel, min_supp, min_conf) -> RuleBase:
    """Mine each cluster's items separately and merge the per-cluster output.

    The singleton scan is shared (supports are column properties), after
    which candidate generation never pairs items from different clusters.
    """
    start = time.perf_counter()
    if len(model.assignment) != t.n:
        raise DimensionMismatch(
            f"cluster assignment covers {len(model.assignment)} items, matrix has {t.n}"
        )
    supp_thr = check_threshold(min_supp, "min_supp")
    conf_thr = check_threshold(min_conf, "min_conf", allow_zero=True)
    min_count = min_support_count(supp_thr, t.m)
    m = t.m
    col_counts = t.column_counts()
    frequent_singletons = np.flatnonzero(col_counts >= min_count)

    buckets: list[list[int]] = [[] for _ in range(model.k)]
    for j in frequent_singletons:
        buckets[int(model.assignment[j])].append(int(j))

    # Level-1 scan is shared: every column is looked at exactly once in total.
    cand_levels = [t.n]
    freq_levels = [int(frequent_singletons.size)]
    per_cluster_rules: dict[int, list[AssociationRule]] = {}
    per_cluster_frequents: dict[int, list[FrequentSet]] = {}
    for c in range(model.k):
        bucket = buckets[c]
        if not bucket:
            continue
        if len(bucket) == 1:
            j = bucket[0]
            per_cluster_frequents[c] = [FrequentSet((j,), int(col_counts[j]), m)]
            per_cluster_rules[c] = []
            continue
        stats_c = MiningStats(candidates_per_level=[len(bucket)])
        frequents_c = mine_levels(t, min_count, bucket, stats_c)
        per_cluster_frequents[c] = frequents_c
        per_cluster_rules[c] = derive_rules(frequents_c, t, conf_thr)
        for lvl in range(1, len(stats_c.candidates_per_level)):
            if lvl >= len(cand_levels):
                cand_levels.append(0)
                freq_levels.append(0)
            cand_levels[lvl] += stats_c.candidates_per_level[lvl]
            freq_levels[lvl] += stats_c.frequent_per_level[lvl]
    bytes_peak = max(
        (cand_levels[i] * (i + 1) * BYTES_PER_ITEM for i in range(1, len(cand_levels))),
        default=0,
    )
    stats = MiningStats(cand_levels, freq_levels, bytes_peak, time.perf_counter() - start)
    return RuleBase(per_cluster_rules, stats, HYBRID, per_cluster_frequents)


@dataclass(frozen=True)
class Recommendation:
    place_id: int
    score: float
    rule_evidence: tuple[AssociationRule, ...]
    cluster_affinity: float


class PlaceScorer:
    """Scores candidate places for one visitor history against a rule base.

    score = alpha * rule_score + (1 - alpha) * affinity, where rule_score is
    the best confidence among rules X => place with X inside the history and
    affinity is the fraction of the history lying in the place's cluster.
    """

    def __init__(self, rule_base: RuleBase, model: ClusterModel, history, alpha: float = 0.7):
        if not 0 <= alpha <= 1:
            raise TourmineError(f"alpha must be in [0,1], got {alpha}")
        self.alpha = alpha
        self.model = model
        self.history = sorted(int(j) for j in set(history))
        self.hist_mask = 0
        for j in self.history:
            self.hist_mask |= 1 << j
        self.index = rule_base.consequent_index()
        if self.history:
            self.cluster_counts = np.bincount(
                model.assignment[self.history], minlength=model.k
            )
        else:
            self.cluster_counts = np.zeros(model.k, dtype=int)

    def rule_hits(self, place: int) -> list[AssociationRule]:
        hits = []
        for mask, rule in self.index.get(place, ()):
            if mask & ~self.hist_mask == 0:
                hits.append(rule)
        return hits

    def affinity(self, place: int) -> float:
        if not self.history:
            return 0.0
        return float(self.cluster_counts[int(self.model.assignment[place])]) / len(self.history)

    def details(self, place: int):
        hits = self.rule_hits(place)
        rule_score = max((r.confidence for r in hits), default=0.0)
        affinity = self.affinity(place)
        return self.alpha * rule_score + (1 - self.alpha) * affinity, hits, affinity

    def score(self, place: int) -> float:
        return self.details(place)[0]


def score_place(history, place: int, rule_base: RuleBase, model: ClusterModel, alpha: float = 0.7) -> float:
    """Blend of best matching rule confidence and cluster affinity, in [0,1]."""
    scorer = PlaceScorer(rule_base, model, history, alpha)
    if place in set(scorer.history):
        raise TourmineError(f"place {place} is already in the visitor history")
    return scorer.score(place)


def _history_from_row(visitor_row) -> list[int]:
    if isinstance(visitor_row, int):
        items = []
        row = visitor_row
        while row:
            low = row & -row
            items.append(low.bit_length() - 1)
            row ^= low
        return items
    return sorted(int(j) for j in set(visitor_row))


def recommend(
    visitor_row,
    rule_base: RuleBase,
    model: ClusterModel,
    top_n: int = 10,
    alpha: float = 0.7,
    catalog: PlaceCatalog | None = None,
) -> list[Recommendation]:
    """Top-n unvisited places by score (ties -> lower place id).

    `visitor_row` is a row bitset or an iterable of visited item ordinals.
    Place ids come from `catalog` when given, otherwise they are ordinals.
    """
    if top_n < 1:
        raise TourmineError(f"top_n must be >= 1, got {top_n}")
    history = _history_from_row(visitor_row)
    scorer = PlaceScorer(rule_base, model, history, alpha)
    visited = set(history)
    n = len(model.assignment)
    scored = []
    for j in range(n):
        if j in visited:
            continue
        score, hits, affinity = scorer.details(j)
        scored.append((-score, j, hits, affinity))
    scored.sort(key=lambda row: row[:2])
    id_for = catalog.id_for if catalog is not None else (lambda j: j)
    return [
        Recommendation(id_for(j), -neg_score, tuple(hits), affinity)
        for neg_score, j, hits, affinity in scored[:top_n]
    ]


class HybridRecommender(BaseEstimator):
    """Estimator facade: fit mines the rule base, recommend ranks places.

    With `clusters=None` the recommender is the un-clustered baseline and
    scores on rule evidence alone; with a ClusterModel it mines per cluster
    and blends rule confidence with cluster affinity.
    """

    def __init__(self, min_support=0.02, min_confidence=0.5, alpha=0.7, clusters: ClusterModel | None = None):
        self.min_support = min_support
        self.min_confidence = min_confidence
        self.alpha = alpha
        self.clusters = clusters

    def fit(self, X, y=None):
        t = as_transaction_matrix(X)
        self.matrix_ = t
        if self.clusters is None:
            self.model_ = single_cluster_model(t.n)
            self.rule_base_ = mine_baseline(t, self.min_support, self.min_confidence)
            self.effective_alpha_ = 1.0  # rule evidence only
        else:
            self.model_ = self.clusters
            self.rule_base_ = mine_hybrid(t, self.clusters, self.min_support, self.min_confidence)
            self.effective_alpha_ = self.alpha
        return self

    def recommend(self, visitor_row, top_n: int = 10, catalog: PlaceCatalog | None = None):
        return recommend(
            visitor_row, self.rule_base_, self.model_, top_n, self.effective_alpha_, catalog
        )

    def recommend_row(self, row_index: int, top_n: int = 10, catalog: PlaceCatalog | None = None):
        return self.recommend(self.matrix_.rows[row_index], top_n, catalog)


def single_cluster_model(n_items: int) -> ClusterModel:
    """Degenerate model placing every item in cluster 0 (baseline affinity)."""
    return ClusterModel(
        k=1,
        centroids=np.zeros((1, 1)),
        assignment=np.zeros(n_items, dtype=int),
        inertia=0.0,
        iterations_run=0,
    )


def recommendations_to_csv(recs: list[Recommendation], visitor_id: int) -> str:
    buf = io.StringIO()
    buf.write("visitor_id,rank,place_id,score,rule_count,affinity\n")
    for rank, rec in enumerate(recs, start=1):
        buf.write(
            f"{visitor_id},{rank},{rec.place_id},{rec.score:.6f},"
            f"{len(rec.rule_evidence)},{rec.cluster_affinity:.6f}\n"
        )
    return buf.getvalue()
