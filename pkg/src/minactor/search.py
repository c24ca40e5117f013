"""Two-phase minimal-architecture search.

Phase 1 binary-searches the architecture ladder for the smallest
symmetric actor-critic pair that clears the performance threshold.
Phase 2 locks the critic to that size and binary-searches the actor
rungs at or below it. Binary search treats pass/fail as monotone in
rung index; an optional audit mode re-checks the result with an
exhaustive scan since noisy training can break monotonicity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .agents import ArchPair
from .nets import param_count

DEFAULT_LADDER: tuple[tuple[int, ...], ...] = (
    (1, 1), (4, 4), (8, 8), (16, 16), (32, 32),
    (64, 64), (128, 128), (256, 256), (400, 300),
)


@dataclass(frozen=True)
class ThresholdSpec:
    threshold: float
    tolerance_fraction: float = 0.10
    n_seeds: int = 6

    def __post_init__(self):
        if not 0.0 <= self.tolerance_fraction < 1.0:
            raise ValueError("tolerance_fraction must be in [0, 1)")
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be >= 1")


def passes_threshold(mean_reward: float, spec: ThresholdSpec) -> bool:
    """Inclusive at the tolerance-lowered bound."""
    bound = spec.threshold - spec.tolerance_fraction * abs(spec.threshold)
    return mean_reward >= bound


@dataclass
class SeedResult:
    seed: int
    mean: float
    std: float
    diverged: bool = False


@dataclass
class ArchEval:
    """Aggregate outcome of training one architecture over all seeds."""

    arch: ArchPair
    per_seed: list[SeedResult]
    mean: float
    std: float
    passed: bool


def aggregate_arch_eval(arch: ArchPair, per_seed: list[SeedResult],
                        spec: ThresholdSpec) -> ArchEval:
    """Seed means averaged into one pass/fail decision. Diverged runs enter
    with their already-substituted failure value (see run_arch_eval)."""
    means = np.asarray([r.mean for r in per_seed])
    mean = float(means.mean())
    return ArchEval(arch, per_seed, mean, float(means.std()), passes_threshold(mean, spec))


def run_arch_eval(algo: str, env_name: str, arch: ArchPair, spec: ThresholdSpec, *,
                  run_seed_fn: Callable[[str, str, ArchPair, int], SeedResult],
                  seeds: list[int] | None = None) -> ArchEval:
    """Train/evaluate one architecture over n_seeds seeds.

    ``run_seed_fn`` performs one seeded training run and returns its final
    evaluation; diverged runs must come back with a threshold-failing mean
    (the experiment layer substitutes the environment's worst return).
    """
    seeds = list(range(spec.n_seeds)) if seeds is None else list(seeds)
    per_seed = [run_seed_fn(algo, env_name, arch, s) for s in seeds]
    return aggregate_arch_eval(arch, per_seed, spec)


def binary_search_min(n_rungs: int, evaluate: Callable[[int], bool]):
    """Smallest index whose evaluation passes, assuming monotone pass/fail.

    Returns ``(index | None, results)`` where ``results`` caches every
    evaluated index. At most ceil(log2(n)) + 1 distinct evaluations.
    """
    if n_rungs < 1:
        raise ValueError("need at least one rung")
    results: dict[int, bool] = {}

    def ev(i: int) -> bool:
        if i not in results:
            results[i] = bool(evaluate(i))
        return results[i]

    lo, hi = 0, n_rungs - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if ev(mid):
            hi = mid
        else:
            lo = mid + 1
    return (lo if ev(lo) else None), results


def linear_scan_min(n_rungs: int, evaluate: Callable[[int], bool]):
    """Exhaustive reference scan; used by tests and audit mode."""
    for i in range(n_rungs):
        if evaluate(i):
            return i
    return None


@dataclass
class PhaseResult:
    index: int | None
    arch: ArchPair | None
    stats: ArchEval | None
    evaluated: dict = field(default_factory=dict)
    audit_index: int | None = None


def search_symmetric(ladder, evaluate_pair: Callable[[ArchPair], ArchEval],
                     audit: bool = False) -> PhaseResult:
    """Phase 1: smallest rung that passes with actor_hidden == critic_hidden."""
    ladder = list(ladder)
    cache: dict[int, ArchEval] = {}

    def ev(i: int) -> bool:
        if i not in cache:
            cache[i] = evaluate_pair(ArchPair.symmetric(ladder[i]))
        return cache[i].passed

    index, _ = binary_search_min(len(ladder), ev)
    result = PhaseResult(index, ArchPair.symmetric(ladder[index]) if index is not None else None,
                         cache.get(index), evaluated=cache)
    if audit:
        result.audit_index = linear_scan_min(len(ladder), ev)
    return result


def search_asymmetric(ladder, sym_index: int, evaluate_pair: Callable[[ArchPair], ArchEval],
                      audit: bool = False) -> PhaseResult:
    """Phase 2: critic locked at the symmetric rung, actor searched at or
    below it. Falls back to the symmetric rung itself (0% reduction) when
    nothing smaller passes."""
    ladder = list(ladder)
    locked_critic = tuple(ladder[sym_index])
    cache: dict[int, ArchEval] = {}

    def ev(i: int) -> bool:
        if i not in cache:
            cache[i] = evaluate_pair(ArchPair(tuple(ladder[i]), locked_critic))
        return cache[i].passed

    index, _ = binary_search_min(sym_index + 1, ev)
    if index is None:
        # The symmetric point passed phase 1; with a cached evaluator the
        # top rung cannot fail, but guard against injected evaluators.
        index = sym_index
        if index not in cache:
            cache[index] = evaluate_pair(ArchPair(locked_critic, locked_critic))
    result = PhaseResult(index, ArchPair(tuple(ladder[index]), locked_critic),
                         cache.get(index), evaluated=cache)
    if audit:
        result.audit_index = linear_scan_min(sym_index + 1, ev)
    return result


def reduction_percent(sym_actor_params: int, asym_actor_params: int) -> float:
    if sym_actor_params <= 0 or asym_actor_params <= 0:
        raise ValueError("parameter counts must be positive")
    return (1.0 - asym_actor_params / sym_actor_params) * 100.0


@dataclass
class SearchResult:
    """Outcome of baseline + two-phase search for one algorithm."""

    algo: str
    env_name: str
    threshold: ThresholdSpec
    baseline: ArchEval | None
    symmetric: PhaseResult
    asymmetric: PhaseResult
    reduction: float | None
    ledger: list[ArchEval] = field(default_factory=list)

    def actor_counts(self, obs_dim: int, act_dim: int) -> tuple[int, int] | None:
        """Actor weight counts (symmetric, asymmetric) per task dimensions."""
        if self.symmetric.arch is None or self.asymmetric.arch is None:
            return None
        sym = param_count(obs_dim, self.symmetric.arch.actor_hidden, act_dim)
        asym = param_count(obs_dim, self.asymmetric.arch.actor_hidden, act_dim)
        return sym, asym


def run_search(algo: str, env_name: str, ladder, spec: ThresholdSpec,
               evaluate_pair: Callable[[ArchPair], ArchEval], *,
               baseline_arch: ArchPair | None = None,
               obs_dim: int | None = None, act_dim: int | None = None,
               audit: bool = False) -> SearchResult:
    """Baseline (optional) then both search phases, with a shared ledger.

    Evaluations are memoized per ArchPair, so the symmetric point settled
    in phase 1 is not retrained when phase 2 reaches it.
    """
    ledger: list[ArchEval] = []
    memo: dict[ArchPair, ArchEval] = {}

    def logged(pair: ArchPair) -> ArchEval:
        if pair not in memo:
            memo[pair] = evaluate_pair(pair)
            ledger.append(memo[pair])
        return memo[pair]

    baseline = logged(baseline_arch) if baseline_arch is not None else None
    sym = search_symmetric(ladder, logged, audit=audit)
    if sym.index is None:
        asym = PhaseResult(None, None, None)
        reduction = None
    else:
        asym = search_asymmetric(ladder, sym.index, logged, audit=audit)
        if obs_dim is not None and act_dim is not None and asym.arch is not None:
            sym_count = param_count(obs_dim, sym.arch.actor_hidden, act_dim)
            asym_count = param_count(obs_dim, asym.arch.actor_hidden, act_dim)
            reduction = reduction_percent(sym_count, asym_count)
        else:
            reduction = None
    return SearchResult(algo, env_name, spec, baseline, sym, asym, reduction, ledger)
