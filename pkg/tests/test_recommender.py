import numpy as np
import pytest
from helpers import matrix_from_rows, oracle_matrix, random_matrix
from sklearn.base import clone

from tourmine.clustering import ClusterModel
from tourmine.errors import DimensionMismatch, TourmineError
from tourmine.recommender import (
    HybridRecommender,
    PlaceScorer,
    RuleBase,
    mine_baseline,
    mine_hybrid,
    recommend,
    recommendations_to_csv,
    score_place,
    single_cluster_model,
)

A, B, C = 0, 1, 2


def cluster_model(assignment):
    assignment = np.asarray(assignment, dtype=int)
    k = int(assignment.max()) + 1
    return ClusterModel(
        k=k,
        centroids=np.zeros((k, 1)),
        assignment=assignment,
        inertia=0.0,
        iterations_run=0,
    )


class TestMineBaseline:
    def test_oracle_contains_a_implies_b(self):
        rb = mine_baseline(oracle_matrix(), 0.5, 0.5)
        keys = {(r.antecedent, r.consequent) for r in rb.all_rules()}
        assert ((A,), (B,)) in keys
        assert rb.source == "baseline"
        assert list(rb.per_cluster_rules) == [0]

    def test_sparse_high_threshold_empty(self):
        m = matrix_from_rows([(0,), (1,), (2,)], 3)
        rb = mine_baseline(m, 1.0, 0.5)
        assert rb.all_rules() == []
        assert rb.all_frequents() == []


class TestMineHybrid:
    def test_single_cluster_equals_baseline(self):
        m = oracle_matrix()
        rb_h = mine_hybrid(m, cluster_model([0, 0, 0]), 0.5, 0.5)
        rb_b = mine_baseline(m, 0.5, 0.5)
        assert rb_h.all_rules() == rb_b.all_rules()
        assert rb_h.all_frequents() == rb_b.all_frequents()

    def test_two_clusters_drop_cross_rules(self):
        m = oracle_matrix()
        rb = mine_hybrid(m, cluster_model([0, 0, 1]), 0.5, 0.5)
        keys = {(r.antecedent, r.consequent) for r in rb.all_rules()}
        assert keys == {((A,), (B,)), ((B,), (A,))}
        # cross pair {A, C} is never even a candidate
        assert rb.mining_stats.candidates_per_level == [3, 1]

    def test_singleton_clusters_no_rules(self):
        m = oracle_matrix()
        rb = mine_hybrid(m, cluster_model([0, 1, 2]), 0.25, 0.0)
        assert rb.all_rules() == []
        assert len(rb.all_frequents()) == 3  # singletons survive

    def test_frequents_are_baseline_filtered_to_one_cluster(self):
        rng = np.random.default_rng(31)
        for i in range(8):
            m = random_matrix(rng, max_items=10, max_rows=40)
            assignment = rng.integers(0, 3, m.n)
            model = cluster_model(assignment)
            hybrid = {fs.itemset: fs.count for fs in mine_hybrid(m, model, 0.2, 0.5).all_frequents()}
            base = mine_baseline(m, 0.2, 0.5)
            filtered = {
                fs.itemset: fs.count
                for fs in base.all_frequents()
                if len({assignment[j] for j in fs.itemset}) == 1
            }
            assert hybrid == filtered

    def test_candidate_containment(self):
        rng = np.random.default_rng(32)
        for i in range(8):
            m = random_matrix(rng, max_items=10, max_rows=40)
            model = cluster_model(rng.integers(0, 3, m.n))
            sh = mine_hybrid(m, model, 0.2, 0.5).mining_stats
            sb = mine_baseline(m, 0.2, 0.5).mining_stats
            depth = max(len(sh.candidates_per_level), len(sb.candidates_per_level))
            pad = lambda xs: xs + [0] * (depth - len(xs))
            for h, b in zip(pad(sh.candidates_per_level), pad(sb.candidates_per_level)):
                assert h <= b
            assert sh.candidate_bytes_peak <= sb.candidate_bytes_peak

    def test_assignment_must_cover_items(self):
        with pytest.raises(DimensionMismatch):
            mine_hybrid(oracle_matrix(), cluster_model([0, 0]), 0.5, 0.5)

    def test_hybrid_rules_stay_within_one_cluster(self):
        rng = np.random.default_rng(33)
        m = random_matrix(rng, max_items=10, max_rows=40, density=0.5)
        assignment = rng.integers(0, 3, m.n)
        rb = mine_hybrid(m, cluster_model(assignment), 0.2, 0.2)
        for c, rules in rb.per_cluster_rules.items():
            for r in rules:
                items = set(r.antecedent) | set(r.consequent)
                assert {int(assignment[j]) for j in items} == {c}
                assert rb.cluster_of(r) == c


class TestScorePlace:
    def test_no_evidence_scores_zero(self):
        m = oracle_matrix()
        rb = mine_baseline(m, 0.5, 0.5)
        model = cluster_model([0, 0, 1])
        assert score_place([C], A, RuleBase({0: []}, rb.mining_stats, "baseline"), model, 0.7) == 0.0

    def test_saturated_score_is_one(self):
        m = matrix_from_rows([(0, 1), (0, 1), (0, 1)], 2)
        rb = mine_baseline(m, 0.5, 0.5)  # A=>B with confidence 1.0
        model = cluster_model([0, 0])
        assert score_place([A], B, rb, model, 0.7) == 1.0

    def test_blend_arithmetic(self):
        m = oracle_matrix()
        rb = mine_baseline(m, 0.5, 0.5)
        model = cluster_model([0, 0, 1])  # B shares A's cluster
        got = score_place([A], B, rb, model, 0.7)
        assert got == pytest.approx(0.7 * (2 / 3) + 0.3 * 1.0)
        assert got == pytest.approx(0.766667, abs=5e-7)

    def test_place_in_history_rejected(self):
        m = oracle_matrix()
        rb = mine_baseline(m, 0.5, 0.5)
        with pytest.raises(TourmineError):
            score_place([A], A, rb, cluster_model([0, 0, 0]), 0.7)

    def test_score_bounds_and_monotonicity(self):
        rng = np.random.default_rng(41)
        m = random_matrix(rng, max_items=8, max_rows=40, density=0.5)
        model = cluster_model(rng.integers(0, 3, m.n))
        rb = mine_hybrid(m, model, 0.1, 0.1)
        for r in range(min(10, m.m)):
            history = m.row_items(r)
            for j in range(m.n):
                if j in history:
                    continue
                scorer = PlaceScorer(rb, model, history, 0.7)
                s, hits, aff = scorer.details(j)
                assert 0.0 <= s <= 1.0
                rule_score = max((h.confidence for h in hits), default=0.0)
                assert s == pytest.approx(0.7 * rule_score + 0.3 * aff)

    def test_empty_history_scores_zero(self):
        m = oracle_matrix()
        rb = mine_baseline(m, 0.5, 0.5)
        assert score_place([], A, rb, cluster_model([0, 0, 0]), 0.7) == 0.0


class TestRecommend:
    def test_visited_everything_empty(self):
        m = oracle_matrix()
        rb = mine_baseline(m, 0.5, 0.5)
        assert recommend(0b111, rb, cluster_model([0, 0, 0])) == []

    def test_ties_break_by_lower_place_id(self):
        m = matrix_from_rows([(0,), (1,), (2,)], 3)
        rb = mine_baseline(m, 1.0, 0.5)  # no rules
        recs = recommend([], rb, cluster_model([0, 1, 2]), top_n=3)
        assert [r.place_id for r in recs] == [0, 1, 2]
        assert all(r.score == 0.0 for r in recs)

    def test_oracle_history_a_yields_b(self):
        m = oracle_matrix()
        model = cluster_model([0, 0, 1])
        rb = mine_hybrid(m, model, 0.5, 0.5)
        recs = recommend([A], rb, model, top_n=1, alpha=1.0)
        assert len(recs) == 1 and recs[0].place_id == B
        assert recs[0].score == pytest.approx(2 / 3)
        assert recs[0].rule_evidence

    def test_scores_sorted_non_increasing(self):
        rng = np.random.default_rng(42)
        m = random_matrix(rng, max_items=10, max_rows=40, density=0.5)
        model = cluster_model(rng.integers(0, 3, m.n))
        rb = mine_hybrid(m, model, 0.1, 0.1)
        recs = recommend(m.rows[0], rb, model, top_n=m.n)
        scores = [r.score for r in recs]
        assert scores == sorted(scores, reverse=True)
        visited = set(m.row_items(0))
        assert all(r.place_id not in visited for r in recs)

    def test_catalog_maps_ordinals_to_ids(self, small_catalog, small_dataset):
        _, _, matrix = small_dataset
        model = cluster_model(np.zeros(matrix.n, dtype=int))
        rb = mine_baseline(matrix, 0.05, 0.5)
        recs = recommend(matrix.rows[0], rb, model, top_n=3, catalog=small_catalog)
        assert all(r.place_id in small_catalog.item_index for r in recs)

    def test_top_n_validation(self):
        m = oracle_matrix()
        rb = mine_baseline(m, 0.5, 0.5)
        with pytest.raises(TourmineError):
            recommend([A], rb, cluster_model([0, 0, 0]), top_n=0)

    def test_single_cluster_alpha_one_matches_baseline(self):
        rng = np.random.default_rng(43)
        m = random_matrix(rng, max_items=9, max_rows=40, density=0.5)
        model = single_cluster_model(m.n)
        rb_h = mine_hybrid(m, model, 0.2, 0.3)
        rb_b = mine_baseline(m, 0.2, 0.3)
        for r in range(min(8, m.m)):
            got = recommend(m.rows[r], rb_h, model, top_n=m.n, alpha=1.0)
            want = recommend(m.rows[r], rb_b, model, top_n=m.n, alpha=1.0)
            assert [(g.place_id, g.score) for g in got] == [(w.place_id, w.score) for w in want]


class TestEstimator:
    def test_baseline_mode_scores_rules_only(self):
        m = matrix_from_rows([(0, 1), (0, 1), (0, 1), (2,)], 3)
        est = HybridRecommender(min_support=0.5, min_confidence=0.5).fit(m)
        assert est.rule_base_.source == "baseline"
        recs = est.recommend([A], top_n=2)
        assert recs[0].place_id == B and recs[0].score == 1.0
        assert recs[1].score == 0.0  # no affinity term in baseline mode

    def test_hybrid_mode_uses_clusters(self):
        m = oracle_matrix()
        model = cluster_model([0, 0, 1])
        est = HybridRecommender(min_support=0.5, min_confidence=0.5, alpha=0.7, clusters=model).fit(m)
        assert est.rule_base_.source == "hybrid"
        recs = est.recommend_row(3, top_n=2)  # row 3 visited only B
        assert recs[0].place_id == A
        assert recs[0].cluster_affinity == 1.0

    def test_clone_keeps_params(self):
        est = HybridRecommender(min_support=0.1, min_confidence=0.4, alpha=0.5)
        assert clone(est).get_params() == est.get_params()

    def test_fit_accepts_arrays(self):
        X = oracle_matrix().to_array()
        est = HybridRecommender(min_support=0.5, min_confidence=0.5).fit(X)
        assert est.rule_base_.rule_count() > 0


class TestExport:
    def test_csv_layout(self):
        m = oracle_matrix()
        model = cluster_model([0, 0, 1])
        rb = mine_hybrid(m, model, 0.5, 0.5)
        recs = recommend([A], rb, model, top_n=2, alpha=0.7)
        text = recommendations_to_csv(recs, visitor_id=7)
        lines = text.strip().split("\n")
        assert lines[0] == "visitor_id,rank,place_id,score,rule_count,affinity"
        assert lines[1].startswith("7,1,")
        assert len(lines) == 3
