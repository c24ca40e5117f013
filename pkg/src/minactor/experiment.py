"""Experiment orchestration: baseline, two-phase search, persistence, resume.

Every (architecture, seed) training run is flushed to the per-algo ledger
as soon as it finishes, so an interrupted experiment resumes from the
ledger without retraining completed work. Seed runs inside one rung are
independent and may execute in parallel processes; results are identical
either way because each run is fully seeded.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
from pathlib import Path

from .agents import AgentConfig, ArchPair
from .config import BASELINE_HIDDEN, ExperimentConfig, serialize_config
from .envs import IdealToyPolicy, make_env
from .io import arch_dir_name, load_json, run_dir, save_json_atomic, write_run_record
from .search import (ArchEval, SearchResult, SeedResult, ThresholdSpec,
                     aggregate_arch_eval, run_search)
from .seeding import derive_seed
from .training import EVAL_EPISODES, evaluate_policy, train_run


def ideal_toy_threshold(seeds) -> float:
    """Toy threshold default: the analytic policy's mean return under the
    same evaluation protocol the runs use. With the standard 10% tolerance
    this gates architectures at 90% of the ideal policy's performance."""
    means = [
        evaluate_policy(IdealToyPolicy(), "toy", EVAL_EPISODES, derive_seed(seed, "eval")).mean
        for seed in seeds
    ]
    return float(sum(means) / len(means))


def resolve_threshold(config: ExperimentConfig, algo: str) -> ThresholdSpec:
    spec = config.thresholds.get(algo)
    if spec is not None:
        return spec
    if config.env == "toy":
        return ThresholdSpec(threshold=ideal_toy_threshold(config.seeds),
                             n_seeds=len(config.seeds))
    raise ValueError(f"no threshold configured for algo {algo!r} on env {config.env!r}")


def _seed_task(payload: dict) -> dict:
    """One seeded training run; executed in a worker process."""
    agent_fields = dict(payload["agent_fields"])
    arch = ArchPair(tuple(payload["actor_hidden"]), tuple(payload["critic_hidden"]))
    agent_config = AgentConfig(algo=payload["algo"], arch=arch, **agent_fields)
    record = train_run(payload["env"], agent_config, payload["seed"])
    write_run_record(payload["run_dir"], record)
    if record.diverged or record.final_eval is None:
        worst = make_env(payload["env"]).worst_return()
        return {"seed": payload["seed"], "mean": worst, "std": 0.0, "diverged": True}
    return {"seed": payload["seed"], "mean": record.final_eval.mean,
            "std": record.final_eval.std, "diverged": False}


class LedgerEvaluator:
    """Evaluates one architecture over all seeds, backed by the on-disk ledger."""

    def __init__(self, config: ExperimentConfig, algo: str, spec: ThresholdSpec,
                 trainer=None, progress=None):
        self.config = config
        self.algo = algo
        self.spec = spec
        self.trainer = trainer
        self.progress = progress or (lambda msg: None)
        self.ledger_path = Path(config.out_dir) / config.env / algo / "ledger.json"
        self.ledger = self._load_or_init()

    def _load_or_init(self) -> dict:
        snapshot = serialize_config(self.config)
        if self.ledger_path.exists():
            ledger = load_json(self.ledger_path)
            if ledger.get("experiment") != snapshot:
                raise ValueError(
                    f"output directory {self.ledger_path.parent} holds a ledger for a "
                    "different experiment configuration; use a fresh out_dir")
            return ledger
        return {"experiment": snapshot, "entries": {}}

    def _flush(self):
        save_json_atomic(self.ledger_path, self.ledger)

    def _payload(self, arch: ArchPair, seed: int) -> dict:
        agent_config = self.config.agent_config(self.algo, arch)
        fields = dataclasses.asdict(agent_config)
        fields.pop("algo")
        fields.pop("arch")
        return {
            "env": self.config.env,
            "algo": self.algo,
            "actor_hidden": list(arch.actor_hidden),
            "critic_hidden": list(arch.critic_hidden),
            "agent_fields": fields,
            "seed": seed,
            "run_dir": str(run_dir(self.config.out_dir, self.config.env, self.algo, arch, seed)),
        }

    def _run_missing(self, arch: ArchPair, missing: list[int], seeds_done: dict):
        key = arch_dir_name(arch)
        if self.trainer is not None:
            # Injected trainers run in-process (they may not be picklable).
            for seed in missing:
                agent_config = self.config.agent_config(self.algo, arch)
                result = self.trainer(self.config.env, agent_config, seed)
                seeds_done[str(seed)] = dataclasses.asdict(result)
                self._flush()
                self.progress(f"{self.algo} {key} seed {seed}: mean {result.mean:.2f}")
            return
        payloads = [self._payload(arch, seed) for seed in missing]
        workers = min(self.config.parallelism, len(payloads))
        if workers > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
                for out in pool.map(_seed_task, payloads):
                    seeds_done[str(out["seed"])] = out
                    self._flush()
                    self.progress(f"{self.algo} {key} seed {out['seed']}: mean {out['mean']:.2f}")
        else:
            for payload in payloads:
                out = _seed_task(payload)
                seeds_done[str(out["seed"])] = out
                self._flush()
                self.progress(f"{self.algo} {key} seed {out['seed']}: mean {out['mean']:.2f}")

    def __call__(self, arch: ArchPair) -> ArchEval:
        key = arch_dir_name(arch)
        entry = self.ledger["entries"].setdefault(key, {"seeds": {}})
        seeds_done = entry["seeds"]
        missing = [s for s in self.config.seeds if str(s) not in seeds_done]
        if missing:
            self._run_missing(arch, missing, seeds_done)
        per_seed = [
            SeedResult(seed=s, mean=seeds_done[str(s)]["mean"],
                       std=seeds_done[str(s)]["std"],
                       diverged=seeds_done[str(s)].get("diverged", False))
            for s in self.config.seeds
        ]
        ev = aggregate_arch_eval(arch, per_seed, self.spec)
        entry["aggregate"] = {"mean": ev.mean, "std": ev.std, "passed": ev.passed}
        self._flush()
        self.progress(f"{self.algo} {key}: aggregate {ev.mean:.2f} "
                      f"{'PASS' if ev.passed else 'FAIL'}")
        return ev


def _phase_doc(phase) -> dict | None:
    if phase is None or phase.arch is None:
        return None
    return {
        "index": phase.index,
        "actor_hidden": list(phase.arch.actor_hidden),
        "critic_hidden": list(phase.arch.critic_hidden),
        "mean": phase.stats.mean if phase.stats else None,
        "std": phase.stats.std if phase.stats else None,
        "audit_index": phase.audit_index,
    }


def search_result_doc(result: SearchResult, obs_dim: int, act_dim: int) -> dict:
    counts = result.actor_counts(obs_dim, act_dim)
    return {
        "algo": result.algo,
        "env": result.env_name,
        "threshold": dataclasses.asdict(result.threshold),
        "baseline": None if result.baseline is None else {
            "actor_hidden": list(result.baseline.arch.actor_hidden),
            "critic_hidden": list(result.baseline.arch.critic_hidden),
            "mean": result.baseline.mean,
            "std": result.baseline.std,
            "passed": result.baseline.passed,
        },
        "symmetric": _phase_doc(result.symmetric),
        "asymmetric": _phase_doc(result.asymmetric),
        "reduction_percent": result.reduction,
        "actor_param_counts": None if counts is None else
            {"symmetric": counts[0], "asymmetric": counts[1]},
        "ledger": [
            {
                "actor_hidden": list(ev.arch.actor_hidden),
                "critic_hidden": list(ev.arch.critic_hidden),
                "mean": ev.mean,
                "std": ev.std,
                "passed": ev.passed,
                "seeds": [dataclasses.asdict(r) for r in ev.per_seed],
            }
            for ev in result.ledger
        ],
    }


def run_experiment(config: ExperimentConfig, trainer=None, *, baseline: bool = True,
                   audit: bool = False, progress=None) -> dict[str, SearchResult]:
    """Per algorithm: baseline evaluation, then the two-phase search.

    ``trainer`` (env_name, agent_config, seed) -> SeedResult can be injected
    to bypass real training in tests.
    """
    env = make_env(config.env)
    results: dict[str, SearchResult] = {}
    for algo in config.algos:
        spec = resolve_threshold(config, algo)
        evaluator = LedgerEvaluator(config, algo, spec, trainer=trainer, progress=progress)
        baseline_arch = ArchPair.symmetric(BASELINE_HIDDEN[algo]) if baseline else None
        result = run_search(algo, config.env, config.ladder, spec, evaluator,
                            baseline_arch=baseline_arch,
                            obs_dim=env.obs_dim, act_dim=env.act_dim, audit=audit)
        results[algo] = result
        doc = search_result_doc(result, env.obs_dim, env.act_dim)
        save_json_atomic(Path(config.out_dir) / config.env / algo / "result.json", doc)
    return results
