"""Single-run training loop, deterministic evaluation, and run records.

A run is fully determined by (env name, agent config, seed): action noise,
update sampling, episode seeds and evaluation seeds all come from streams
derived from the run seed. Divergence (any non-finite loss or parameter)
aborts the run and flags the record instead of raising.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .agents import AgentConfig, make_agent
from .envs import make_env
from .replay import ReplayBuffer
from .seeding import derive_rng, derive_seed

# Per-episode returns on random starts are high-variance (the pendulum's
# swing-up cost depends strongly on the initial angle), so final statistics
# average over enough episodes to keep the standard error well inside the
# threshold tolerance.
EVAL_EPISODES = 30
EVAL_EVERY = 5000


@dataclass
class EvalStats:
    mean: float
    std: float
    per_episode: list[float]


@dataclass
class RunRecord:
    """Everything needed to inspect or replay one training run."""

    config_snapshot: dict
    env_name: str
    seed: int
    episodes: list[tuple[int, int, float]] = field(default_factory=list)   # (episode, step, return)
    updates: list[tuple[int, float, float | None, float | None]] = field(default_factory=list)
    final_eval: EvalStats | None = None
    best_eval: EvalStats | None = None
    diverged: bool = False
    n_updates: int = 0
    wall_seconds: float = 0.0
    agent: object | None = field(default=None, repr=False, compare=False)


def config_snapshot(env_name: str, config: AgentConfig, seed: int,
                    env_overrides: dict | None = None) -> dict:
    snap = asdict(config)
    snap["arch"] = {"actor_hidden": list(config.arch.actor_hidden),
                    "critic_hidden": list(config.arch.critic_hidden)}
    return {"env": env_name, "seed": seed, "agent": snap,
            "env_overrides": dict(env_overrides or {})}


def evaluate_policy(policy, env_or_name, n_episodes: int, seed: int,
                    env_overrides: dict | None = None) -> EvalStats:
    """Deterministic-mode rollouts over derived episode seeds."""
    env = make_env(env_or_name, **(env_overrides or {})) if isinstance(env_or_name, str) else env_or_name
    returns = []
    for ep in range(n_episodes):
        step = env.reset(derive_seed(seed, "eval-episode", ep))
        total = 0.0
        while not step.done:
            a = policy.select_action(step.observation, "deterministic")
            step = env.step(a)
            total += step.reward
        returns.append(total)
    arr = np.asarray(returns)
    return EvalStats(mean=float(arr.mean()), std=float(arr.std()), per_episode=returns)


def _finite(x: float | None) -> bool:
    return x is None or math.isfinite(x)


def train_run(env_name: str, config: AgentConfig, seed: int, *,
              env_overrides: dict | None = None,
              eval_episodes: int = EVAL_EPISODES,
              eval_every: int = EVAL_EVERY) -> RunRecord:
    """Full interaction loop: explore, store, update, evaluate."""
    t0 = time.perf_counter()
    env_overrides = dict(env_overrides or {})
    env = make_env(env_name, **env_overrides)
    agent = make_agent(config, env.obs_dim, env.act_dim, env.action_bound, seed, env_name)
    buffer = ReplayBuffer(min(config.replay_capacity, config.total_steps),
                          env.obs_dim, env.act_dim)
    action_rng = derive_rng(seed, "action")
    update_rng = derive_rng(seed, "update")
    eval_seed = derive_seed(seed, "eval")

    record = RunRecord(config_snapshot(env_name, config, seed, env_overrides), env_name, seed)
    episode = 0
    obs = env.reset(derive_seed(seed, "episode", episode)).observation
    ep_return = 0.0

    def run_eval() -> EvalStats:
        return evaluate_policy(agent, env_name, eval_episodes, eval_seed, env_overrides)

    for step in range(1, config.total_steps + 1):
        agent.env_steps = step - 1
        a = agent.select_action(obs, "explore", action_rng)
        env_step = env.step(a)
        ep_return += env_step.reward
        # Episodes end only by time limit here; store done=False so targets
        # keep bootstrapping through the cut.
        buffer.push(obs, a, env_step.reward, env_step.observation, False)
        obs = env_step.observation
        if env_step.done:
            record.episodes.append((episode, step, ep_return))
            episode += 1
            obs = env.reset(derive_seed(seed, "episode", episode)).observation
            ep_return = 0.0

        if (step >= config.update_after and step % config.update_every == 0
                and len(buffer) >= config.batch_size):
            for _ in range(config.update_every):
                batch = buffer.sample(config.batch_size, update_rng)
                result = agent.update_step(batch, update_rng)
                record.n_updates += 1
                record.updates.append((step, result.q_loss, result.pi_loss, result.alpha))
                if not (_finite(result.q_loss) and _finite(result.pi_loss)):
                    record.diverged = True
                    break
            if not record.diverged and not agent.all_finite():
                record.diverged = True
            if record.diverged:
                break

        if eval_every and step % eval_every == 0 and step < config.total_steps:
            stats = run_eval()
            if record.best_eval is None or stats.mean > record.best_eval.mean:
                record.best_eval = stats

    agent.env_steps = config.total_steps
    if not record.diverged:
        record.final_eval = run_eval()
        if record.best_eval is None or record.final_eval.mean > record.best_eval.mean:
            record.best_eval = record.final_eval
    record.wall_seconds = time.perf_counter() - t0
    record.agent = agent
    return record
