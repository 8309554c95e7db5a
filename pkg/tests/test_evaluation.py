import numpy as np
import pytest
from helpers import matrix_from_rows, random_matrix

from tourmine.apriori import AssociationRule, MiningStats
from tourmine.clustering import ClusterModel
from tourmine.data import SplitSpec
from tourmine.errors import EmptyRows, LengthMismatch, ZeroBaseline
from tourmine.evaluation import (
    BenchReport,
    BenchRow,
    evaluate_accuracy,
    evaluate_holdout,
    mae,
    mean_reduction,
    reduction_rate,
    rmse,
    run_benchmark,
    sample_negative_cells,
)
from tourmine.recommender import PlaceScorer, RuleBase


def flat_model(n, k=3, seed=0):
    rng = np.random.default_rng(seed)
    return ClusterModel(
        k=k,
        centroids=np.zeros((k, 1)),
        assignment=rng.integers(0, k, n),
        inertia=0.0,
        iterations_run=0,
    )


class TestErrorMetrics:
    def test_perfect_prediction(self):
        assert rmse([1, 0, 1], [1, 0, 1]) == 0.0
        assert mae([1, 0, 1], [1, 0, 1]) == 0.0

    def test_hand_arithmetic(self):
        assert rmse([1, 0], [0, 0]) == pytest.approx(np.sqrt(0.5))
        assert mae([1, 0], [0, 0]) == 0.5

    def test_constant_offset(self):
        actual = np.linspace(0, 1, 7)
        assert rmse(actual + 0.25, actual) == pytest.approx(0.25)
        assert mae(actual - 0.25, actual) == pytest.approx(0.25)

    def test_mae_never_exceeds_rmse(self):
        rng = np.random.default_rng(51)
        for _ in range(50):
            n = int(rng.integers(1, 40))
            p, a = rng.random(n), rng.random(n)
            assert mae(p, a) <= rmse(p, a) + 1e-12

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            rmse([1, 2], [1])
        with pytest.raises(LengthMismatch):
            mae([], [])


class TestReductionRate:
    def test_basic_arithmetic(self):
        assert reduction_rate(15.9812, 11.645) == pytest.approx(27.133, abs=0.01)
        assert reduction_rate(134.983, 102.873) == pytest.approx(23.788, abs=0.01)

    def test_no_change_is_zero(self):
        assert reduction_rate(3.5, 3.5) == 0.0

    def test_zero_baseline(self):
        with pytest.raises(ZeroBaseline):
            reduction_rate(0.0, 1.0)

    def test_regression_is_negative(self):
        assert reduction_rate(1.0, 2.0) == -100.0


class TestMeanReduction:
    def test_mean_of_rates(self):
        assert mean_reduction([10.0, 20.0, 30.0]) == 20.0

    def test_single_row(self):
        assert mean_reduction([42.5]) == 42.5

    def test_empty(self):
        with pytest.raises(EmptyRows):
            mean_reduction([])


class TestNegativeSampling:
    def test_cells_are_zero_and_distinct(self):
        m = matrix_from_rows([(0, 1), (2,), (0, 2)], 4)
        rng = np.random.default_rng(1)
        cells = sample_negative_cells(m, 5, rng)
        assert len(cells) == len(set(cells)) == 5
        for r, j in cells:
            assert not m.rows[r] >> j & 1

    def test_respects_available_limit(self):
        m = matrix_from_rows([(0,), (1,)], 2)  # only 2 zero cells
        cells = sample_negative_cells(m, 10, np.random.default_rng(0))
        assert len(cells) == 2


class TestEvaluateAccuracy:
    def test_deterministic_and_shaped(self, small_dataset):
        _, _, matrix = small_dataset
        model = flat_model(matrix.n)
        spec = SplitSpec(0.7, 5, 13)
        a = evaluate_accuracy(matrix, model, (0.05, 0.10), spec, 0.7, 0.5)
        b = evaluate_accuracy(matrix, model, (0.05, 0.10), spec, 0.7, 0.5)
        assert a == b
        assert [row.min_supp for row in a] == [0.05, 0.10]
        for row in a:
            assert len(row.fold_metrics) == 5
            assert row.mae_baseline <= row.rmse_baseline + 1e-12
            assert row.mae_hybrid <= row.rmse_hybrid + 1e-12
            assert row.rmse_baseline == pytest.approx(np.mean([f[0] for f in row.fold_metrics]))

    def test_requires_thresholds(self, small_dataset):
        _, _, matrix = small_dataset
        with pytest.raises(EmptyRows):
            evaluate_accuracy(matrix, flat_model(matrix.n), (), SplitSpec(0.7, 5, 0))

    def test_holdout_single_fold(self, small_dataset):
        _, _, matrix = small_dataset
        rows = evaluate_holdout(matrix, flat_model(matrix.n), (0.05,), SplitSpec(0.7, 5, 13))
        assert len(rows) == 1 and len(rows[0].fold_metrics) == 1


class TestPerfectPredictorMechanics:
    def test_conf_one_rule_scores_give_zero_error(self):
        # A held-out positive implied by a confidence-1.0 rule plus a
        # rule-less negative: predictions equal actuals, so rmse = mae = 0.
        rule = AssociationRule((0,), (1,), 4, 4, 4, 8)
        rb = RuleBase({0: [rule]}, MiningStats(), "baseline")
        model = flat_model(3, k=1)
        scorer = PlaceScorer(rb, model, [0], alpha=1.0)
        preds = [scorer.score(1), scorer.score(2)]
        actuals = [1.0, 0.0]
        assert rmse(preds, actuals) == 0.0
        assert mae(preds, actuals) == 0.0


class TestRunBenchmark:
    def test_median_selection_with_fake_clock(self, small_dataset):
        _, _, matrix = small_dataset
        ticks = iter([0.0, 1.0, 10.0, 13.0, 20.0, 25.0, 30.0, 31.0, 40.0, 42.0, 50.0, 50.5])
        report = run_benchmark(
            matrix, flat_model(matrix.n), [0.05], runs=3, clock=lambda: next(ticks)
        )
        row = report.rows[0]
        assert row.baseline_time_s == 2.0  # median of 1, 5, 2
        assert row.hybrid_time_s == 1.0  # median of 3, 1, 0.5
        assert row.time_reduction_pct == 50.0

    def test_rows_in_threshold_order(self, small_dataset):
        _, _, matrix = small_dataset
        report = run_benchmark(matrix, flat_model(matrix.n), (0.02, 0.04, 0.06), runs=1)
        assert [r.min_supp for r in report.rows] == [0.02, 0.04, 0.06]
        assert report.environment

    def test_space_columns_deterministic(self, small_dataset):
        _, _, matrix = small_dataset
        model = flat_model(matrix.n)
        a = run_benchmark(matrix, model, (0.02, 0.05), runs=2)
        b = run_benchmark(matrix, model, (0.02, 0.05), runs=2)
        assert [(r.baseline_bytes, r.hybrid_bytes) for r in a.rows] == [
            (r.baseline_bytes, r.hybrid_bytes) for r in b.rows
        ]

    def test_runs_must_be_positive(self, small_dataset):
        _, _, matrix = small_dataset
        with pytest.raises(EmptyRows):
            run_benchmark(matrix, flat_model(matrix.n), (0.05,), runs=0)


class TestBenchReportExports:
    def _report(self):
        rows = [
            BenchRow(0.02, 0.004, 0.002, 50.0, 4000, 1000, 75.0),
            BenchRow(0.04, 0.002, 0.001, 50.0, 2000, 800, 60.0),
        ]
        return BenchReport(rows, 50.0, 67.5, "test-host")

    def test_flat_rows_parse(self):
        text = self._report().to_flat_rows()
        lines = text.strip().split("\n")
        assert lines[0] == "metric,min_supp,system,value"
        assert "time_s,0.02,baseline,0.004000" in lines
        assert "candidate_bytes,0.04,hybrid,800" in lines
        assert "mean_space_reduction_pct,all,hybrid_vs_baseline,67.500" in lines

    def test_table_text_sections(self):
        text = self._report().to_table_text()
        assert "Execution time by minimum support" in text
        assert "Candidate storage by minimum support" in text
        assert "test-host" in text

    def test_series_files(self):
        files = self._report().series_files()
        assert set(files) == {
            "series_time_baseline.csv",
            "series_time_hybrid.csv",
            "series_space_baseline.csv",
            "series_space_hybrid.csv",
        }
        assert files["series_space_hybrid.csv"].splitlines()[1] == "0.02,1000"
