"""tourmine: hybrid tourism recommender combining association-rule mining
over visit transactions with K-means place clustering, plus a trip planner
and a reproducible evaluation bench."""

from .apriori import (
    AprioriMiner,
    AssociationRule,
    FrequentSet,
    MiningStats,
    derive_rules,
    frequent_itemsets,
    support,
)
from .clustering import ClusterModel, PlaceClusterer, assign_point, featurize, kmeans
from .config import RunConfig
from .data import (
    Place,
    PlaceCatalog,
    SplitSpec,
    TransactionMatrix,
    VisitEvent,
    Visitor,
    build_matrix,
    generate_dataset,
    kfold,
    load_places,
    split_train_test,
    synth_places,
)
from .evaluation import (
    AccuracyRow,
    BenchReport,
    BenchRow,
    evaluate_accuracy,
    evaluate_holdout,
    mae,
    mean_reduction,
    reduction_rate,
    rmse,
    run_benchmark,
)
from .evolution import EvoParams, RunStats, aggregate_runs, evolve_rules
from .planner import Itinerary, haversine, plan_trip
from .recommender import (
    HybridRecommender,
    Recommendation,
    RuleBase,
    mine_baseline,
    mine_hybrid,
    recommend,
    score_place,
)

__version__ = "0.1.0"

__all__ = [
    "AprioriMiner",
    "AssociationRule",
    "FrequentSet",
    "MiningStats",
    "derive_rules",
    "frequent_itemsets",
    "support",
    "ClusterModel",
    "PlaceClusterer",
    "assign_point",
    "featurize",
    "kmeans",
    "RunConfig",
    "Place",
    "PlaceCatalog",
    "SplitSpec",
    "TransactionMatrix",
    "VisitEvent",
    "Visitor",
    "build_matrix",
    "generate_dataset",
    "kfold",
    "load_places",
    "split_train_test",
    "synth_places",
    "AccuracyRow",
    "BenchReport",
    "BenchRow",
    "evaluate_accuracy",
    "evaluate_holdout",
    "mae",
    "mean_reduction",
    "reduction_rate",
    "rmse",
    "run_benchmark",
    "EvoParams",
    "RunStats",
    "aggregate_runs",
    "evolve_rules",
    "Itinerary",
    "haversine",
    "plan_trip",
    "HybridRecommender",
    "Recommendation",
    "RuleBase",
    "mine_baseline",
    "mine_hybrid",
    "recommend",
    "score_place",
]
