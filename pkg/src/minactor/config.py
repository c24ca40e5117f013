"""Experiment configuration: JSON document in, validated dataclass out.

Unknown keys are rejected with their full key path so typos surface
immediately instead of silently using defaults.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

from .agents import ALGO_NAMES, AgentConfig, ArchPair
from .envs import ENV_NAMES
from .search import DEFAULT_LADDER, ThresholdSpec


class ConfigError(ValueError):
    pass


# Paper-table defaults; toy thresholds are derived from the analytic
# tracking policy at experiment time (see experiment.resolve_threshold).
DEFAULT_THRESHOLDS = {"pendulum": {"ddpg": -160.0, "td3": -160.0, "sac": -160.0}}

DEFAULT_TOTAL_STEPS = {"toy": 30_000, "pendulum": 50_000}

# Baseline architectures the search is anchored to, per algorithm.
BASELINE_HIDDEN = {"ddpg": (400, 300), "td3": (400, 300), "sac": (256, 256)}

_AGENT_FIELD_NAMES = {f.name for f in dataclasses.fields(AgentConfig)} - {"algo", "arch"}
_THRESHOLD_FIELD_NAMES = {f.name for f in dataclasses.fields(ThresholdSpec)}


@dataclass
class ExperimentConfig:
    env: str
    algos: list[str]
    name: str = "experiment"
    ladder: list[tuple[int, ...]] = field(default_factory=lambda: [tuple(h) for h in DEFAULT_LADDER])
    thresholds: dict[str, ThresholdSpec] = field(default_factory=dict)
    agent_overrides: dict = field(default_factory=dict)
    seeds: list[int] = field(default_factory=lambda: list(range(6)))
    parallelism: int = 1
    out_dir: str = ""

    def agent_config(self, algo: str, arch: ArchPair) -> AgentConfig:
        fields = {"total_steps": DEFAULT_TOTAL_STEPS.get(self.env, 30_000)}
        fields.update(self.agent_overrides)
        return AgentConfig(algo=algo, arch=arch, **fields)


def default_out_dir() -> str:
    return os.environ.get("MINACTOR_OUT", "runs")


def _require(cond: bool, path: str, message: str):
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _check_keys(obj: dict, allowed, path: str):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}{key!r}")


def _parse_hidden(value, path: str) -> tuple[int, ...]:
    _require(isinstance(value, list), path, f"expected a list of layer sizes, got {value!r}")
    for v in value:
        _require(isinstance(v, int) and v >= 1, path, f"layer sizes must be positive integers, got {v!r}")
    return tuple(value)


def _parse_threshold(obj: dict, path: str) -> ThresholdSpec:
    _require(isinstance(obj, dict), path, "expected an object")
    _check_keys(obj, _THRESHOLD_FIELD_NAMES, path + ".")
    _require("threshold" in obj, path, "missing required key 'threshold'")
    try:
        return ThresholdSpec(**obj)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}: {e}") from e


_TOP_KEYS = ("name", "env", "algos", "ladder", "thresholds", "agent",
             "seeds", "parallelism", "out_dir")


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON experiment document, filling defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON: {e}") from e
    _require(isinstance(doc, dict), "$", "top level must be an object")
    _check_keys(doc, _TOP_KEYS, "")

    _require("env" in doc, "env", "missing required key")
    env = doc["env"]
    _require(env in ENV_NAMES, "env", f"unknown environment {env!r}; expected one of {ENV_NAMES}")

    _require("algos" in doc, "algos", "missing required key")
    algos = doc["algos"]
    _require(isinstance(algos, list) and algos, "algos", "expected a non-empty list")
    for a in algos:
        _require(a in ALGO_NAMES, "algos", f"unknown algorithm {a!r}; expected one of {ALGO_NAMES}")

    if "ladder" in doc:
        _require(isinstance(doc["ladder"], list), "ladder", "expected a list of hidden-size lists")
        ladder = [_parse_hidden(h, f"ladder[{i}]") for i, h in enumerate(doc["ladder"])]
    else:
        ladder = [tuple(h) for h in DEFAULT_LADDER]
    _require(bool(ladder), "ladder", "must contain at least one rung")

    thresholds = {}
    for algo, tobj in doc.get("thresholds", {}).items():
        _require(algo in algos, f"thresholds.{algo}", "threshold given for an algo not in 'algos'")
        thresholds[algo] = _parse_threshold(tobj, f"thresholds.{algo}")
    n_seeds = next(iter(thresholds.values())).n_seeds if thresholds else 6
    for algo in algos:
        if algo not in thresholds:
            default = DEFAULT_THRESHOLDS.get(env, {}).get(algo)
            if default is not None:
                thresholds[algo] = ThresholdSpec(threshold=default, n_seeds=n_seeds)

    agent_overrides = doc.get("agent", {})
    _require(isinstance(agent_overrides, dict), "agent", "expected an object")
    _check_keys(agent_overrides, _AGENT_FIELD_NAMES, "agent.")

    seeds = doc.get("seeds", list(range(n_seeds)))
    _require(isinstance(seeds, list) and all(isinstance(s, int) for s in seeds),
             "seeds", "expected a list of integers")

    parallelism = doc.get("parallelism", 1)
    _require(isinstance(parallelism, int) and parallelism >= 1, "parallelism", "expected an integer >= 1")

    config = ExperimentConfig(
        env=env,
        algos=list(algos),
        name=doc.get("name", "experiment"),
        ladder=ladder,
        thresholds=thresholds,
        agent_overrides=dict(agent_overrides),
        seeds=list(seeds),
        parallelism=parallelism,
        out_dir=doc.get("out_dir", "") or default_out_dir(),
    )
    for algo, tspec in config.thresholds.items():
        _require(tspec.n_seeds == len(config.seeds), f"thresholds.{algo}.n_seeds",
                 f"n_seeds {tspec.n_seeds} != len(seeds) {len(config.seeds)}")
    # Validate agent overrides eagerly so errors carry the config key path.
    try:
        config.agent_config(config.algos[0], ArchPair((), ()))
    except ValueError as e:
        raise ConfigError(f"agent: {e}") from e
    return config


def serialize_config(config: ExperimentConfig) -> str:
    doc = {
        "name": config.name,
        "env": config.env,
        "algos": list(config.algos),
        "ladder": [list(h) for h in config.ladder],
        "thresholds": {a: dataclasses.asdict(t) for a, t in config.thresholds.items()},
        "agent": dict(config.agent_overrides),
        "seeds": list(config.seeds),
        "parallelism": config.parallelism,
        "out_dir": config.out_dir,
    }
    return json.dumps(doc, indent=2, sort_keys=True)
