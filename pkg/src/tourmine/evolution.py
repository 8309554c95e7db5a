"""Seedable genetic search over itemsets with a multi-run protocol.

The searcher is a coverage layer over the exact miner: every itemset it ever
evaluates that clears the support threshold goes into a per-run archive, and
rules are derived from the archive, so its output is always a subset of the
exact rule set. When the population is large enough to cover the whole
itemset lattice (population >= 2**n_items) the first generation is seeded
exhaustively and the output equals the exact miner's.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from .apriori import AssociationRule, FrequentSet, derive_rules, min_support_count, support_count
from .data import TransactionMatrix
from .errors import EmptyRuns, TourmineError
from .seeding import make_rng
from .validation import check_threshold

INFREQUENT_PENALTY = 0.1


@dataclass(frozen=True)
class EvoParams:
    population: int = 40
    generations: int = 50
    mutation_rate: float = 0.02
    crossover_rate: float = 0.8
    seed: int = 0
    runs: int = 30

    def __post_init__(self):
        if self.population < 2:
            raise TourmineError(f"population must be >= 2, got {self.population}")
        if self.generations < 1 or self.runs < 1:
            raise TourmineError("generations and runs must be >= 1")
        for name in ("mutation_rate", "crossover_rate"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise TourmineError(f"{name} must be in [0,1], got {v}")


@dataclass(frozen=True)
class RunStats:
    run_index: int
    seed: int
    evaluations: int
    frequent_found: int
    rules_found: int
    wall_time_s: float


def _mask_to_items(mask: int) -> tuple[int, ...]:
    items = []
    while mask:
        low = mask & -mask
        items.append(low.bit_length() - 1)
        mask ^= low
    return tuple(items)


def _random_mask(n: int, rng) -> int:
    """Sparse random itemset (1-3 items), the useful region of the lattice."""
    size = int(rng.integers(1, 4))
    mask = 0
    for j in rng.choice(n, size=min(size, n), replace=False):
        mask |= 1 << int(j)
    return mask


def _init_population(n: int, params: EvoParams, rng) -> list[int]:
    if n <= 20 and params.population >= (1 << n):
        pop = list(range(1 << n))
        while len(pop) < params.population:
            pop.append(_random_mask(n, rng))
        return pop
    return [_random_mask(n, rng) for _ in range(params.population)]


def _crossover(a: int, b: int, n: int, rng) -> tuple[int, int]:
    mix = int.from_bytes(rng.bytes((n + 7) // 8), "little") & ((1 << n) - 1)
    return (a & mix) | (b & ~mix), (b & mix) | (a & ~mix)


def _mutate(mask: int, n: int, rate: float, rng) -> int:
    if rate <= 0:
        return mask
    flips = rng.binomial(n, rate)
    if flips:
        for j in rng.choice(n, size=flips, replace=False):
            mask ^= 1 << int(j)
    return mask


def evolve_rules(
    t: TransactionMatrix,
    min_supp,
    min_conf,
    params: EvoParams,
    initial_population: list | None = None,
) -> tuple[list[AssociationRule], list[RunStats]]:
    """Run the genetic itemset search `params.runs` times and merge the rules.

    Fitness is the itemset support, damped by a 0.1 penalty below the support
    threshold. Tournament selection (size 2), uniform crossover, per-bit
    mutation. Run r uses seed `params.seed + r`. Returns the deduplicated
    union of per-run rules and one stats record per run.

    `initial_population` (itemset iterables) overrides the seeded
    initialization in every run; meant for tests.
    """
    supp_thr = check_threshold(min_supp, "min_supp")
    conf_thr = check_threshold(min_conf, "min_conf", allow_zero=True)
    n, m = t.n, t.m
    min_count = min_support_count(supp_thr, m)

    merged: dict[tuple, AssociationRule] = {}
    run_stats = []
    count_cache: dict[int, int] = {}

    def count_of(mask: int) -> int:
        got = count_cache.get(mask)
        if got is None:
            got = support_count(_mask_to_items(mask), t)
            count_cache[mask] = got
        return got

    for run in range(params.runs):
        run_seed = params.seed + run
        rng = make_rng(run_seed, "evolve")
        start = time.perf_counter()
        if initial_population is not None:
            population = []
            for itemset in initial_population:
                mask = 0
                for j in itemset:
                    mask |= 1 << int(j)
                population.append(mask)
        else:
            population = _init_population(n, params, rng)

        archive: dict[int, int] = {}  # frequent mask -> count
        evaluations = 0

        def fitness_of(pop):
            nonlocal evaluations
            scores = []
            for mask in pop:
                count = count_of(mask)
                evaluations += 1
                if mask and count >= min_count:
                    archive[mask] = count
                supp = count / m
                scores.append(supp if count >= min_count else supp * INFREQUENT_PENALTY)
            return scores

        scores = fitness_of(population)
        for _ in range(params.generations):
            selected = []
            for _ in range(len(population)):
                i, j = rng.integers(len(population)), rng.integers(len(population))
                if scores[j] > scores[i] or (scores[j] == scores[i] and j < i):
                    i = j
                selected.append(population[int(i)])
            children = []
            for a, b in zip(selected[0::2], selected[1::2]):
                if rng.random() < params.crossover_rate:
                    a, b = _crossover(a, b, n, rng)
                children.extend((a, b))
            if len(selected) % 2:
                children.append(selected[-1])
            population = [_mutate(c, n, params.mutation_rate, rng) for c in children]
            scores = fitness_of(population)

        frequents = [FrequentSet(_mask_to_items(mask), count, m) for mask, count in archive.items()]
        frequents.sort(key=lambda fs: (len(fs.itemset), fs.itemset))
        rules = derive_rules(frequents, t, conf_thr)
        for rule in rules:
            merged.setdefault(rule.key(), rule)
        run_stats.append(
            RunStats(
                run_index=run,
                seed=run_seed,
                evaluations=evaluations,
                frequent_found=len(frequents),
                rules_found=len(rules),
                wall_time_s=time.perf_counter() - start,
            )
        )

    rules = sorted(merged.values(), key=lambda r: (len(r.antecedent), r.antecedent, r.consequent))
    return rules, run_stats


def aggregate_runs(stats) -> dict[str, dict[str, float]]:
    """Mean/stddev/min/max per numeric metric over run records.

    Accepts RunStats objects or plain dicts; stddev is the population value,
    so a single run aggregates to stddev 0.
    """
    records = [asdict(s) if isinstance(s, RunStats) else dict(s) for s in stats]
    if not records:
        raise EmptyRuns("no run records to aggregate")
    summary = {}
    for key, value in records[0].items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            continue
        vals = np.array([float(r[key]) for r in records])
        summary[key] = {
            "mean": float(vals.mean()),
            "stddev": float(vals.std()),
            "min": float(vals.min()),
            "max": float(vals.max()),
        }
    return summary


def run_stats_to_flat(stats: list[RunStats], summary: dict) -> str:
    """Flat key-value report for the per-run records and their aggregate."""
    lines = []
    for s in stats:
        for f in fields(RunStats):
            v = getattr(s, f.name)
            val = f"{v:.6f}" if isinstance(v, float) else str(v)
            lines.append(f"run{s.run_index}.{f.name}={val}")
    for metric, agg in summary.items():
        for k, v in agg.items():
            lines.append(f"summary.{metric}.{k}={v:.6f}")
    return "\n".join(lines) + "\n"
