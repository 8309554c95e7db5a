"""Command-line front door wiring the library into an end-to-end pipeline.

Subcommands: gen, cluster, mine, recommend, plan, eval, bench, pipeline.
One flat config file plus flag overrides (flags win); all randomness flows
from the single --seed through documented per-stage derivation.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import data
from .apriori import rules_to_csv
from .clustering import featurize, kmeans, load_clusters, save_clusters
from .config import RunConfig, load_config
from .errors import TourmineError, UnknownVisitorId
from .evaluation import evaluate_accuracy, evaluate_holdout, run_benchmark
from .evolution import EvoParams, aggregate_runs, evolve_rules, run_stats_to_flat
from .planner import itinerary_to_csv, plan_trip
from .recommender import mine_baseline, mine_hybrid, recommend, recommendations_to_csv


def _write(path: str, text: str):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_effective_config(cfg: RunConfig):
    _write(os.path.join(cfg.out, "effective_config.txt"), cfg.to_text())


def _load_catalog(cfg: RunConfig) -> data.PlaceCatalog:
    return data.load_places(cfg.path("places"))


def _load_inputs(cfg: RunConfig):
    catalog = _load_catalog(cfg)
    matrix = data.load_transactions(cfg.path("transactions"), catalog)
    return catalog, matrix


def _load_model(cfg: RunConfig, catalog):
    return load_clusters(cfg.path("clusters"), catalog)


def _threshold_tag(thr: float) -> str:
    return f"{thr:g}".replace(".", "p")


def cmd_gen(cfg: RunConfig) -> int:
    places_path = cfg.path("places")
    if os.path.exists(places_path):
        catalog = data.load_places(places_path)
    else:
        catalog = data.synth_places(cfg.synth_places, seed=cfg.seed)
        os.makedirs(os.path.dirname(places_path) or ".", exist_ok=True)
        data.save_places(catalog, places_path)
    visitors, events = data.generate_dataset(catalog, cfg.n_visitors, cfg.n_events, cfg.seed)
    matrix = data.build_matrix(catalog, visitors, events)
    os.makedirs(cfg.out, exist_ok=True)
    data.save_visitors(visitors, cfg.path("visitors"))
    data.save_transactions(matrix, catalog, cfg.path("transactions"))
    _write_effective_config(cfg)
    print(
        f"generated {len(visitors)} visitors, {len(events)} visit events "
        f"over {catalog.n} places -> {cfg.out}"
    )
    return 0


def cmd_cluster(cfg: RunConfig) -> int:
    catalog = _load_catalog(cfg)
    model = kmeans(
        featurize(catalog, cfg.category_weight),
        cfg.k,
        seed=cfg.seed,
        tol=cfg.kmeans_tol,
        max_iter=cfg.kmeans_max_iter,
    )
    os.makedirs(cfg.out, exist_ok=True)
    save_clusters(model, catalog, cfg.path("clusters"))
    _write_effective_config(cfg)
    print(f"clustered {catalog.n} places into k={cfg.k} (inertia {model.inertia:.6f})")
    return 0


def cmd_mine(cfg: RunConfig, evolve: bool = False) -> int:
    catalog, matrix = _load_inputs(cfg)
    model = _load_model(cfg, catalog)
    for thr in cfg.min_support:
        tag = _threshold_tag(thr)
        rb_base = mine_baseline(matrix, thr, cfg.min_conf)
        rb_hyb = mine_hybrid(matrix, model, thr, cfg.min_conf)
        _write(
            os.path.join(cfg.out, f"rules_baseline_{tag}.csv"),
            rules_to_csv(rb_base.all_rules(), id_for=catalog.id_for),
        )
        _write(
            os.path.join(cfg.out, f"rules_hybrid_{tag}.csv"),
            rules_to_csv(
                rb_hyb.all_rules(), id_for=catalog.id_for, cluster_of=rb_hyb.cluster_of
            ),
        )
        stats_lines = rb_base.mining_stats.as_flat_lines("baseline") + rb_hyb.mining_stats.as_flat_lines("hybrid")
        _write(os.path.join(cfg.out, f"mining_stats_{tag}.txt"), "\n".join(stats_lines) + "\n")
        print(
            f"min_supp={thr}: baseline {rb_base.rule_count()} rules, "
            f"hybrid {rb_hyb.rule_count()} rules"
        )
    if evolve:
        params = EvoParams(
            population=cfg.evo_population,
            generations=cfg.evo_generations,
            mutation_rate=cfg.evo_mutation_rate,
            crossover_rate=cfg.evo_crossover_rate,
            seed=cfg.seed,
            runs=cfg.runs,
        )
        thr = cfg.min_support[0]
        rules, stats = evolve_rules(matrix, thr, cfg.min_conf, params)
        _write(
            os.path.join(cfg.out, "rules_evolved.csv"),
            rules_to_csv(rules, id_for=catalog.id_for),
        )
        _write(os.path.join(cfg.out, "evolve_stats.txt"), run_stats_to_flat(stats, aggregate_runs(stats)))
        print(f"evolutionary search ({params.runs} runs at min_supp={thr}): {len(rules)} rules")
    _write_effective_config(cfg)
    return 0


def _recommend_for_visitor(cfg: RunConfig, catalog, matrix, model):
    try:
        row_index = matrix.visitor_ids.index(cfg.visitor)
    except ValueError:
        raise UnknownVisitorId(f"visitor {cfg.visitor} not present in {cfg.path('transactions')}") from None
    rb = mine_hybrid(matrix, model, cfg.min_support[0], cfg.min_conf)
    recs = recommend(matrix.rows[row_index], rb, model, cfg.top_n, cfg.alpha, catalog)
    return row_index, recs


def cmd_recommend(cfg: RunConfig) -> int:
    catalog, matrix = _load_inputs(cfg)
    model = _load_model(cfg, catalog)
    _, recs = _recommend_for_visitor(cfg, catalog, matrix, model)
    _write(
        os.path.join(cfg.out, f"recommendations_v{cfg.visitor}.csv"),
        recommendations_to_csv(recs, cfg.visitor),
    )
    _write_effective_config(cfg)
    print(f"top {len(recs)} recommendations for visitor {cfg.visitor}")
    return 0


def cmd_plan(cfg: RunConfig) -> int:
    catalog, matrix = _load_inputs(cfg)
    model = _load_model(cfg, catalog)
    _, recs = _recommend_for_visitor(cfg, catalog, matrix, model)
    start = cfg.start_point()
    if start is None:
        visitors = data.load_visitors(cfg.path("visitors"))
        by_id = {v.id: v for v in visitors}
        if cfg.visitor not in by_id:
            raise UnknownVisitorId(f"visitor {cfg.visitor} not present in {cfg.path('visitors')}")
        start = by_id[cfg.visitor].current_location
    itinerary = plan_trip(recs, catalog, start, cfg.days, cfg.per_day)
    _write(
        os.path.join(cfg.out, f"itinerary_v{cfg.visitor}.csv"),
        itinerary_to_csv(itinerary, catalog),
    )
    _write_effective_config(cfg)
    print(
        f"itinerary for visitor {cfg.visitor}: {len(itinerary.all_places())} stops "
        f"over {len(itinerary.days)} days, {itinerary.total_distance_km:.1f} km"
    )
    return 0


def _split_spec(cfg: RunConfig) -> data.SplitSpec:
    return data.SplitSpec(train_fraction=cfg.train_fraction, folds=cfg.folds, seed=cfg.seed)


def cmd_eval(cfg: RunConfig) -> int:
    catalog, matrix = _load_inputs(cfg)
    model = _load_model(cfg, catalog)
    spec = _split_spec(cfg)
    cv_rows = evaluate_accuracy(matrix, model, cfg.min_support, spec, cfg.alpha, cfg.min_conf)
    holdout_rows = evaluate_holdout(matrix, model, cfg.min_support, spec, cfg.alpha, cfg.min_conf)
    _write(os.path.join(cfg.out, "accuracy_cv.csv"), _accuracy_csv(cv_rows))
    _write(os.path.join(cfg.out, "accuracy_holdout.csv"), _accuracy_csv(holdout_rows))
    _write_effective_config(cfg)
    for row in cv_rows:
        print(
            f"min_supp={row.min_supp}: rmse {row.rmse_baseline:.4f}->{row.rmse_hybrid:.4f}, "
            f"mae {row.mae_baseline:.4f}->{row.mae_hybrid:.4f}"
        )
    return 0


def _accuracy_csv(rows) -> str:
    lines = ["min_supp,fold,system,rmse,mae"]
    for row in rows:
        for f_idx, (rb, rh, mb, mh) in enumerate(row.fold_metrics):
            lines.append(f"{row.min_supp},{f_idx},baseline,{rb:.6f},{mb:.6f}")
            lines.append(f"{row.min_supp},{f_idx},hybrid,{rh:.6f},{mh:.6f}")
        lines.append(f"{row.min_supp},mean,baseline,{row.rmse_baseline:.6f},{row.mae_baseline:.6f}")
        lines.append(f"{row.min_supp},mean,hybrid,{row.rmse_hybrid:.6f},{row.mae_hybrid:.6f}")
    return "\n".join(lines) + "\n"


def cmd_bench(cfg: RunConfig) -> int:
    catalog, matrix = _load_inputs(cfg)
    model = _load_model(cfg, catalog)
    report = run_benchmark(matrix, model, cfg.min_support, cfg.runs, cfg.min_conf)
    _write_bench_outputs(cfg, report)
    _write_effective_config(cfg)
    print(report.to_table_text())
    return 0


def _write_bench_outputs(cfg: RunConfig, report):
    _write(os.path.join(cfg.out, "bench_report.txt"), report.to_table_text())
    _write(os.path.join(cfg.out, "bench_flat.csv"), report.to_flat_rows())
    for name, text in report.series_files().items():
        _write(os.path.join(cfg.out, name), text)


def cmd_pipeline(cfg: RunConfig) -> int:
    catalog, matrix = _load_inputs(cfg)
    model = kmeans(
        featurize(catalog, cfg.category_weight),
        cfg.k,
        seed=cfg.seed,
        tol=cfg.kmeans_tol,
        max_iter=cfg.kmeans_max_iter,
    )
    os.makedirs(cfg.out, exist_ok=True)
    save_clusters(model, catalog, cfg.path("clusters"))
    cmd_mine(cfg)
    spec = _split_spec(cfg)
    cv_rows = evaluate_accuracy(matrix, model, cfg.min_support, spec, cfg.alpha, cfg.min_conf)
    _write(os.path.join(cfg.out, "accuracy_cv.csv"), _accuracy_csv(cv_rows))
    report = run_benchmark(matrix, model, cfg.min_support, cfg.runs, cfg.min_conf)
    report.accuracy = cv_rows
    _write_bench_outputs(cfg, report)
    cmd_recommend(cfg)
    cmd_plan(cfg)
    _write_effective_config(cfg)
    print(f"pipeline complete: reports and exports in {cfg.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--k", type=int)
    common.add_argument(
        "--min-support", action="append", type=float, dest="min_support",
        help="support threshold (repeatable; replaces the default sweep)",
    )
    common.add_argument("--min-conf", type=float, dest="min_conf")
    common.add_argument("--alpha", type=float)
    common.add_argument("--folds", type=int)
    common.add_argument("--train-frac", type=float, dest="train_fraction")
    common.add_argument("--runs", type=int, help="evolutionary runs / benchmark repetitions")
    common.add_argument("--days", type=int)
    common.add_argument("--per-day", type=int, dest="per_day")
    common.add_argument("--visitor", type=int, help="target visitor id")
    common.add_argument("--top-n", type=int, dest="top_n")
    common.add_argument("--places", help="place catalog path")
    common.add_argument("--visitors-file", dest="visitors", help="visitor file path")
    common.add_argument("--transactions-file", dest="transactions", help="transaction file path")

    parser = argparse.ArgumentParser(
        prog="tourmine",
        description="Hybrid tourism recommender: clustered rule mining, trip planning, evaluation bench",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    gen = sub.add_parser("gen", parents=[common], help="generate the synthetic dataset")
    gen.add_argument("--visitors", type=int, dest="n_visitors", help="visitor count")
    gen.add_argument("--events", type=int, dest="n_events", help="positive visit-event count")
    gen.add_argument("--synth-places", type=int, dest="synth_places", help="places to synthesize when no catalog exists")
    sub.add_parser("cluster", parents=[common], help="cluster places")
    mine = sub.add_parser("mine", parents=[common], help="mine rules (baseline + hybrid)")
    mine.add_argument("--evolve", action="store_true", help="also run the multi-run evolutionary search")
    sub.add_parser("recommend", parents=[common], help="recommend places for a visitor")
    sub.add_parser("plan", parents=[common], help="plan a trip for a visitor")
    sub.add_parser("eval", parents=[common], help="cross-validated accuracy comparison")
    sub.add_parser("bench", parents=[common], help="time/space benchmark over the support sweep")
    sub.add_parser("pipeline", parents=[common], help="cluster, mine, evaluate, benchmark, recommend, plan")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = load_config(args.config, cfg)
    for name in (
        "out", "seed", "k", "min_conf", "alpha", "folds", "train_fraction", "runs",
        "days", "per_day", "visitor", "top_n", "places", "visitors", "transactions",
        "n_visitors", "n_events", "synth_places",
    ):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "min_support", None):
        cfg.min_support = tuple(args.min_support)
    return cfg


_COMMANDS = {
    "gen": cmd_gen,
    "cluster": cmd_cluster,
    "recommend": cmd_recommend,
    "plan": cmd_plan,
    "eval": cmd_eval,
    "bench": cmd_bench,
    "pipeline": cmd_pipeline,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "mine":
            return cmd_mine(cfg, evolve=args.evolve)
        return _COMMANDS[args.command](cfg)
    except (TourmineError, OSError) as exc:
        print(f"tourmine: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
