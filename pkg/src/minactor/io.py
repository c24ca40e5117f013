"""Persistence: run CSVs, model snapshots, and the experiment ledger.

Float fields are written with repr (shortest round-trip form), so files
are byte-identical across reruns of the same seeded run.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .agents import ArchPair
from .nets import MlpParams, MlpSpec
from .training import EvalStats, RunRecord

EPISODES_HEADER = "seed,episode,step,ep_return"
UPDATES_HEADER = "seed,step,q_loss,pi_loss,alpha"
EVAL_HEADER = "seed,episode,return"


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return repr(float(x))


def write_episodes_csv(path, seed: int, episodes) -> None:
    lines = [EPISODES_HEADER]
    lines += [f"{seed},{ep},{step},{_fmt(ret)}" for ep, step, ret in episodes]
    Path(path).write_text("\n".join(lines) + "\n")


def write_updates_csv(path, seed: int, updates) -> None:
    lines = [UPDATES_HEADER]
    lines += [f"{seed},{step},{_fmt(q)},{_fmt(pi)},{_fmt(alpha)}"
              for step, q, pi, alpha in updates]
    Path(path).write_text("\n".join(lines) + "\n")


def write_eval_csv(path, seed: int, stats: EvalStats | None) -> None:
    lines = [EVAL_HEADER]
    if stats is not None:
        lines += [f"{seed},{ep},{_fmt(ret)}" for ep, ret in enumerate(stats.per_episode)]
    Path(path).write_text("\n".join(lines) + "\n")


def _params_to_doc(params: MlpParams) -> dict:
    spec = params.spec
    return {
        "in_dim": spec.in_dim,
        "hidden": list(spec.hidden),
        "out_dim": spec.out_dim,
        "hidden_activation": spec.hidden_activation,
        "output_activation": spec.output_activation,
        "output_bound": spec.output_bound,
        "layers": [{"weight": w.ravel().tolist(), "bias": b.tolist()} for w, b in params.layers],
    }


def _params_from_doc(doc: dict) -> MlpParams:
    spec = MlpSpec(doc["in_dim"], tuple(doc["hidden"]), doc["out_dim"],
                   doc["hidden_activation"], doc["output_activation"], doc["output_bound"])
    dims = spec.layer_dims
    layers = []
    for (fi, fo), layer in zip(zip(dims[:-1], dims[1:]), doc["layers"]):
        w = np.asarray(layer["weight"], dtype=np.float64).reshape(fo, fi)
        b = np.asarray(layer["bias"], dtype=np.float64)
        layers.append((w, b))
    return MlpParams(spec, layers)


def save_snapshot(path, record: RunRecord) -> None:
    """Self-describing JSON snapshot: run config plus every network's weights."""
    agent = record.agent
    if agent is None:
        raise ValueError("record has no agent attached")
    doc = {
        "config": record.config_snapshot,
        "algo": agent.algo,
        "action_bound": agent.action_bound,
        "networks": {name: _params_to_doc(p) for name, p in agent.networks().items()},
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True))


class SnapshotPolicy:
    """Deterministic policy rebuilt from a snapshot file, for evaluation."""

    def __init__(self, doc: dict):
        self.doc = doc
        self.algo = doc["algo"]
        self.action_bound = float(doc["action_bound"])
        self.env_name = doc["config"]["env"]
        self.actor = _params_from_doc(doc["networks"]["actor"])
        self._act_dim = (self.actor.spec.out_dim // 2 if self.algo == "sac"
                         else self.actor.spec.out_dim)

    def select_action(self, obs, mode: str = "deterministic", rng=None):
        from .nets import forward
        h = forward(self.actor, np.asarray(obs, dtype=np.float64))
        if self.algo == "sac":
            return self.action_bound * np.tanh(h[..., :self._act_dim])
        return np.clip(h, -self.action_bound, self.action_bound)


def load_snapshot(path) -> SnapshotPolicy:
    return SnapshotPolicy(json.loads(Path(path).read_text()))


def arch_dir_name(arch: ArchPair) -> str:
    fmt = lambda h: "x".join(str(v) for v in h) if h else "lin"
    return f"a{fmt(arch.actor_hidden)}_c{fmt(arch.critic_hidden)}"


def run_dir(out_dir, env_name: str, algo: str, arch: ArchPair, seed: int) -> Path:
    return Path(out_dir) / env_name / algo / arch_dir_name(arch) / f"seed{seed}"


def write_run_record(directory, record: RunRecord, with_snapshot: bool = True) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_episodes_csv(d / "episodes.csv", record.seed, record.episodes)
    write_updates_csv(d / "updates.csv", record.seed, record.updates)
    write_eval_csv(d / "eval.csv", record.seed, record.final_eval)
    meta = {
        "config": record.config_snapshot,
        "diverged": record.diverged,
        "n_updates": record.n_updates,
        "wall_seconds": record.wall_seconds,
        "final_eval": None if record.final_eval is None else
            {"mean": record.final_eval.mean, "std": record.final_eval.std},
        "best_eval": None if record.best_eval is None else
            {"mean": record.best_eval.mean, "std": record.best_eval.std},
    }
    (d / "run.json").write_text(json.dumps(meta, indent=1, sort_keys=True))
    if with_snapshot and record.agent is not None:
        save_snapshot(d / "snapshot.json", record)


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def save_json_atomic(path, doc: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(doc, indent=1, sort_keys=True))
    os.replace(tmp, path)
