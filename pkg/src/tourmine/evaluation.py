"""Evaluation harness: error metrics, reduction-rate arithmetic, seeded
cross-validated accuracy comparison, and the min-support sweep benchmark.

Wall-clock numbers are host-specific; the space metric is the deterministic
candidate-byte accounting from MiningStats, so benchmark space columns and
all accuracy columns reproduce bit-for-bit under a fixed seed.
"""

from __future__ import annotations

import io
import platform
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .clustering import ClusterModel
from .data import SplitSpec, TransactionMatrix, kfold, split_train_test
from .errors import EmptyRows, LengthMismatch, ZeroBaseline
from .recommender import PlaceScorer, mine_baseline, mine_hybrid
from .seeding import make_rng


def rmse(pred, actual) -> float:
    """Root-mean-square error between equal-length sequences."""
    p, a = _paired(pred, actual)
    return float(np.sqrt(np.mean((p - a) ** 2)))


def mae(pred, actual) -> float:
    """Mean absolute error between equal-length sequences."""
    p, a = _paired(pred, actual)
    return float(np.mean(np.abs(p - a)))


def _paired(pred, actual):
    p = np.asarray(pred, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.ndim != 1:
        raise LengthMismatch(f"prediction/actual shapes differ: {p.shape} vs {a.shape}")
    if p.size == 0:
        raise LengthMismatch("empty prediction/actual sequences")
    return p, a


def reduction_rate(baseline: float, proposed: float) -> float:
    """Percent reduction of `proposed` relative to `baseline` (> 0)."""
    if baseline <= 0:
        raise ZeroBaseline(f"baseline must be positive, got {baseline}")
    return 100.0 * (baseline - proposed) / baseline


def mean_reduction(rates) -> float:
    """Arithmetic mean of per-row reduction percentages."""
    rates = list(rates)
    if not rates:
        raise EmptyRows("no rates to average")
    return float(np.mean(rates))


@dataclass(frozen=True)
class AccuracyRow:
    """Fold-averaged RMSE/MAE for both systems at one support threshold."""

    min_supp: float
    rmse_baseline: float
    rmse_hybrid: float
    mae_baseline: float
    mae_hybrid: float
    # one (rmse_baseline, rmse_hybrid, mae_baseline, mae_hybrid) per fold
    fold_metrics: tuple[tuple[float, float, float, float], ...]


@dataclass(frozen=True)
class BenchRow:
    min_supp: float
    baseline_time_s: float
    hybrid_time_s: float
    time_reduction_pct: float
    baseline_bytes: int
    hybrid_bytes: int
    space_reduction_pct: float


@dataclass
class BenchReport:
    rows: list[BenchRow]
    mean_time_reduction_pct: float
    mean_space_reduction_pct: float
    environment: str
    accuracy: list[AccuracyRow] = field(default_factory=list)

    def to_table_text(self) -> str:
        buf = io.StringIO()
        buf.write("Execution time by minimum support\n")
        buf.write(f"{'min_supp':>9} {'baseline_s':>12} {'hybrid_s':>12} {'reduction_%':>12}\n")
        for r in self.rows:
            buf.write(
                f"{r.min_supp:>9.2f} {r.baseline_time_s:>12.6f} "
                f"{r.hybrid_time_s:>12.6f} {r.time_reduction_pct:>12.3f}\n"
            )
        buf.write(f"mean time reduction: {self.mean_time_reduction_pct:.3f}%\n\n")
        buf.write("Candidate storage by minimum support\n")
        buf.write(f"{'min_supp':>9} {'baseline_B':>12} {'hybrid_B':>12} {'reduction_%':>12}\n")
        for r in self.rows:
            buf.write(
                f"{r.min_supp:>9.2f} {r.baseline_bytes:>12d} "
                f"{r.hybrid_bytes:>12d} {r.space_reduction_pct:>12.3f}\n"
            )
        buf.write(f"mean space reduction: {self.mean_space_reduction_pct:.3f}%\n")
        if self.accuracy:
            buf.write("\nCross-validated accuracy (fold means)\n")
            buf.write(
                f"{'min_supp':>9} {'rmse_base':>10} {'rmse_hyb':>10} "
                f"{'mae_base':>10} {'mae_hyb':>10}\n"
            )
            for a in self.accuracy:
                buf.write(
                    f"{a.min_supp:>9.2f} {a.rmse_baseline:>10.6f} {a.rmse_hybrid:>10.6f} "
                    f"{a.mae_baseline:>10.6f} {a.mae_hybrid:>10.6f}\n"
                )
        buf.write(f"\nenvironment: {self.environment}\n")
        return buf.getvalue()

    def to_flat_rows(self) -> str:
        """Machine-readable rows `metric,min_supp,system,value`."""
        buf = io.StringIO()
        buf.write("metric,min_supp,system,value\n")
        for r in self.rows:
            buf.write(f"time_s,{r.min_supp},baseline,{r.baseline_time_s:.6f}\n")
            buf.write(f"time_s,{r.min_supp},hybrid,{r.hybrid_time_s:.6f}\n")
            buf.write(f"time_reduction_pct,{r.min_supp},hybrid_vs_baseline,{r.time_reduction_pct:.3f}\n")
            buf.write(f"candidate_bytes,{r.min_supp},baseline,{r.baseline_bytes}\n")
            buf.write(f"candidate_bytes,{r.min_supp},hybrid,{r.hybrid_bytes}\n")
            buf.write(f"space_reduction_pct,{r.min_supp},hybrid_vs_baseline,{r.space_reduction_pct:.3f}\n")
        for a in self.accuracy:
            buf.write(f"rmse,{a.min_supp},baseline,{a.rmse_baseline:.6f}\n")
            buf.write(f"rmse,{a.min_supp},hybrid,{a.rmse_hybrid:.6f}\n")
            buf.write(f"mae,{a.min_supp},baseline,{a.mae_baseline:.6f}\n")
            buf.write(f"mae,{a.min_supp},hybrid,{a.mae_hybrid:.6f}\n")
            for f_idx, (rb, rh, mb, mh) in enumerate(a.fold_metrics):
                buf.write(f"rmse_fold{f_idx},{a.min_supp},baseline,{rb:.6f}\n")
                buf.write(f"rmse_fold{f_idx},{a.min_supp},hybrid,{rh:.6f}\n")
                buf.write(f"mae_fold{f_idx},{a.min_supp},baseline,{mb:.6f}\n")
                buf.write(f"mae_fold{f_idx},{a.min_supp},hybrid,{mh:.6f}\n")
        buf.write(f"mean_time_reduction_pct,all,hybrid_vs_baseline,{self.mean_time_reduction_pct:.3f}\n")
        buf.write(f"mean_space_reduction_pct,all,hybrid_vs_baseline,{self.mean_space_reduction_pct:.3f}\n")
        return buf.getvalue()

    def series_files(self) -> dict[str, str]:
        """Plot-ready two-column (min_supp, value) series per metric/system."""
        series = {
            "series_time_baseline.csv": [(r.min_supp, f"{r.baseline_time_s:.6f}") for r in self.rows],
            "series_time_hybrid.csv": [(r.min_supp, f"{r.hybrid_time_s:.6f}") for r in self.rows],
            "series_space_baseline.csv": [(r.min_supp, str(r.baseline_bytes)) for r in self.rows],
            "series_space_hybrid.csv": [(r.min_supp, str(r.hybrid_bytes)) for r in self.rows],
        }
        out = {}
        for name, points in series.items():
            lines = ["min_supp,value"] + [f"{x},{y}" for x, y in points]
            out[name] = "\n".join(lines) + "\n"
        return out


def sample_negative_cells(matrix: TransactionMatrix, count: int, rng) -> list[tuple[int, int]]:
    """Distinct (row, item) cells that are 0 in `matrix`, seeded sampling."""
    chosen: set[tuple[int, int]] = set()
    limit = matrix.m * matrix.n - len(matrix.positives())
    count = min(count, limit)
    while len(chosen) < count:
        r = int(rng.integers(matrix.m))
        j = int(rng.integers(matrix.n))
        if not matrix.rows[r] >> j & 1:
            chosen.add((r, j))
    return sorted(chosen)


def evaluate_accuracy(
    matrix: TransactionMatrix,
    model: ClusterModel,
    thresholds,
    split: SplitSpec,
    alpha: float = 0.7,
    min_conf=0.5,
) -> list[AccuracyRow]:
    """Seeded k-fold comparison of baseline and hybrid prediction error.

    Per fold and threshold both systems are mined on the fold's train matrix;
    predictions are scores over the fold's held-out positives plus an equal
    number of seeded negative cells (actuals 1/0). The baseline system scores
    on rule evidence alone; the hybrid blends rule confidence with cluster
    affinity. Reported values are fold means.
    """
    thresholds = list(thresholds)
    if not thresholds:
        raise EmptyRows("no thresholds to evaluate")
    folds = kfold(matrix, split)
    fold_sets = []
    for f_idx, (train, positives) in enumerate(folds):
        rng = make_rng(split.seed, f"negatives:{f_idx}")
        negatives = sample_negative_cells(matrix, len(positives), rng)
        fold_sets.append((train, positives, negatives))
    return _accuracy_over_folds(fold_sets, model, thresholds, alpha, min_conf)


def evaluate_holdout(
    matrix: TransactionMatrix,
    model: ClusterModel,
    thresholds,
    split: SplitSpec,
    alpha: float = 0.7,
    min_conf=0.5,
) -> list[AccuracyRow]:
    """Single 70/30-style holdout variant of evaluate_accuracy (one 'fold')."""
    thresholds = list(thresholds)
    if not thresholds:
        raise EmptyRows("no thresholds to evaluate")
    train, positives = split_train_test(matrix, split)
    rng = make_rng(split.seed, "negatives:holdout")
    negatives = sample_negative_cells(matrix, len(positives), rng)
    return _accuracy_over_folds([(train, positives, negatives)], model, thresholds, alpha, min_conf)


def _accuracy_over_folds(fold_sets, model, thresholds, alpha, min_conf):
    rows = []
    for thr in thresholds:
        fold_metrics = []
        for train, positives, negatives in fold_sets:
            rb_base = mine_baseline(train, thr, min_conf)
            rb_hyb = mine_hybrid(train, model, thr, min_conf)
            base_scorers: dict[int, PlaceScorer] = {}
            hyb_scorers: dict[int, PlaceScorer] = {}
            preds_base, preds_hyb, actuals = [], [], []
            for cells, truth in ((positives, 1.0), (negatives, 0.0)):
                for r, j in cells:
                    if r not in base_scorers:
                        history = train.row_items(r)
                        # baseline scores on rule evidence alone (alpha=1)
                        base_scorers[r] = PlaceScorer(rb_base, model, history, alpha=1.0)
                        hyb_scorers[r] = PlaceScorer(rb_hyb, model, history, alpha=alpha)
                    preds_base.append(base_scorers[r].score(j))
                    preds_hyb.append(hyb_scorers[r].score(j))
                    actuals.append(truth)
            fold_metrics.append(
                (
                    rmse(preds_base, actuals),
                    rmse(preds_hyb, actuals),
                    mae(preds_base, actuals),
                    mae(preds_hyb, actuals),
                )
            )
        arr = np.array(fold_metrics)
        rows.append(
            AccuracyRow(
                min_supp=float(thr),
                rmse_baseline=float(arr[:, 0].mean()),
                rmse_hybrid=float(arr[:, 1].mean()),
                mae_baseline=float(arr[:, 2].mean()),
                mae_hybrid=float(arr[:, 3].mean()),
                fold_metrics=tuple(tuple(m) for m in fold_metrics),
            )
        )
    return rows


def describe_environment() -> str:
    return (
        f"{platform.platform()}; Python {platform.python_version()}; "
        f"{platform.machine()}; single-threaded timing"
    )


def run_benchmark(
    matrix: TransactionMatrix,
    model: ClusterModel,
    thresholds,
    runs: int = 30,
    min_conf=0.5,
    clock=time.perf_counter,
) -> BenchReport:
    """Time both systems over the support sweep; medians of `runs` repetitions.

    Baseline and hybrid repetitions are interleaved to decorrelate host
    drift; caches are warmed first so neither side pays one-off setup inside
    the timed region. Space columns use the deterministic candidate-byte
    accounting.
    """
    if runs < 1:
        raise EmptyRows(f"runs must be >= 1, got {runs}")
    thresholds = list(thresholds)
    matrix.warm_caches()
    rows = []
    for thr in thresholds:
        times_base, times_hyb = [], []
        rb_base = rb_hyb = None
        for _ in range(runs):
            t0 = clock()
            rb_base = mine_baseline(matrix, thr, min_conf)
            times_base.append(clock() - t0)
            t0 = clock()
            rb_hyb = mine_hybrid(matrix, model, thr, min_conf)
            times_hyb.append(clock() - t0)
        tb = statistics.median(times_base)
        th = statistics.median(times_hyb)
        bytes_base = rb_base.mining_stats.candidate_bytes_peak
        bytes_hyb = rb_hyb.mining_stats.candidate_bytes_peak
        rows.append(
            BenchRow(
                min_supp=float(thr),
                baseline_time_s=tb,
                hybrid_time_s=th,
                time_reduction_pct=reduction_rate(tb, th) if tb > 0 else 0.0,
                baseline_bytes=bytes_base,
                hybrid_bytes=bytes_hyb,
                space_reduction_pct=reduction_rate(bytes_base, bytes_hyb) if bytes_base > 0 else 0.0,
            )
        )
    return BenchReport(
        rows=rows,
        mean_time_reduction_pct=mean_reduction([r.time_reduction_pct for r in rows]),
        mean_space_reduction_pct=mean_reduction([r.space_reduction_pct for r in rows]),
        environment=describe_environment(),
    )
