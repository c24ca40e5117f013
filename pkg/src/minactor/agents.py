"""Off-policy actor-critic agents with independent actor and critic sizes.

DDPG, TD3 and SAC implemented directly on the network engine in
``nets``. Actor and critic hidden-layer lists are configured separately
through ``ArchPair``; a symmetric configuration is just the special case
where both lists match. All gradient steps are exact reverse-mode
computations, so agents are bit-deterministic given their construction
seed and the RNG streams passed into each call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .nets import AdamState, MlpParams, MlpSpec, adam_step, backward, forward, init_mlp, soft_update
from .replay import Batch
from .seeding import derive_seed

ALGO_NAMES = ("ddpg", "td3", "sac")

# SAC pre-squash log-std clamp.
LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0


@dataclass(frozen=True)
class ArchPair:
    """Hidden-layer sizes for actor and critic, chosen independently."""

    actor_hidden: tuple[int, ...]
    critic_hidden: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "actor_hidden", tuple(int(h) for h in self.actor_hidden))
        object.__setattr__(self, "critic_hidden", tuple(int(h) for h in self.critic_hidden))
        if any(h < 1 for h in self.actor_hidden + self.critic_hidden):
            raise ValueError("hidden sizes must be positive")

    @classmethod
    def symmetric(cls, hidden) -> "ArchPair":
        hidden = tuple(hidden)
        return cls(hidden, hidden)


@dataclass(frozen=True)
class AgentConfig:
    algo: str = "ddpg"
    arch: ArchPair = field(default_factory=lambda: ArchPair.symmetric((16, 16)))
    gamma: float = 0.99
    tau: float = 0.005
    actor_lr: float = 1e-3
    critic_lr: float = 1e-3
    batch_size: int = 128
    replay_capacity: int = 1_000_000
    start_steps: int = 1000
    update_after: int = 1000
    update_every: int = 50
    exploration_sigma: float = 0.1
    target_noise_sigma: float = 0.2
    target_noise_clip: float = 0.5
    policy_delay: int = 2
    alpha: float | str = 0.2
    total_steps: int = 30_000
    actor_output: str = "auto"

    def __post_init__(self):
        if self.algo not in ALGO_NAMES:
            raise ValueError(f"unknown algo {self.algo!r}; expected one of {ALGO_NAMES}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must be in (0, 1)")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must be in [0, 1]")
        for name in ("actor_lr", "critic_lr", "batch_size", "replay_capacity",
                     "update_every", "policy_delay", "total_steps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if isinstance(self.alpha, str) and self.alpha != "auto":
            raise ValueError("alpha must be a number or 'auto'")


@dataclass
class UpdateResult:
    q_loss: float
    pi_loss: float | None
    alpha: float | None


def _critic_spec(obs_dim: int, act_dim: int, hidden) -> MlpSpec:
    # Critic input is the concatenation [s; a].
    return MlpSpec(in_dim=obs_dim + act_dim, hidden=tuple(hidden), out_dim=1)


def _resolve_actor_output(config: AgentConfig, env_name: str | None) -> str:
    if config.actor_output != "auto":
        return config.actor_output
    if env_name == "toy" and config.arch.actor_hidden == ():
        return "linear"
    return "tanh_scaled"


class ActorCriticAgent:
    """Shared plumbing: construction seeds, exploration gating, target copies."""

    algo = "base"

    def __init__(self, config: AgentConfig, obs_dim: int, act_dim: int,
                 action_bound: float, seed: int, env_name: str | None = None):
        self.config = config
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.action_bound = float(action_bound)
        self.seed = seed
        self.env_steps = 0
        self._critic_updates = 0
        self._actor_updates = 0

    # -- exploration ---------------------------------------------------------

    def _uniform_action(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(-self.action_bound, self.action_bound, size=self.act_dim)

    def _clip(self, a: np.ndarray) -> np.ndarray:
        return np.clip(a, -self.action_bound, self.action_bound)

    def select_action(self, obs, mode: str = "deterministic",
                      rng: np.random.Generator | None = None) -> np.ndarray:
        if mode not in ("explore", "deterministic"):
            raise ValueError(f"unknown action mode {mode!r}")
        if mode == "explore":
            if rng is None:
                raise ValueError("explore mode requires an rng")
            if self.env_steps < self.config.start_steps:
                return self._uniform_action(rng)
            return self._explore_action(obs, rng)
        return self._deterministic_action(obs)

    def _explore_action(self, obs, rng):
        raise NotImplementedError

    def _deterministic_action(self, obs):
        raise NotImplementedError

    # -- updates -------------------------------------------------------------

    def critic_update(self, batch: Batch, rng: np.random.Generator) -> float:
        raise NotImplementedError

    def actor_update(self, batch: Batch, rng: np.random.Generator) -> float:
        raise NotImplementedError

    def update_step(self, batch: Batch, rng: np.random.Generator) -> UpdateResult:
        raise NotImplementedError

    def networks(self) -> dict[str, MlpParams]:
        raise NotImplementedError

    def all_finite(self) -> bool:
        return all(p.all_finite() for p in self.networks().values())

    @property
    def critic_update_count(self) -> int:
        return self._critic_updates

    @property
    def actor_update_count(self) -> int:
        return self._actor_updates

    # -- shared gradient helpers --------------------------------------------

    def _critic_mse_step(self, critic: MlpParams, opt: AdamState,
                         x: np.ndarray, y: np.ndarray) -> float:
        pred = forward(critic, x)[:, 0]
        err = pred - y
        loss = float(np.mean(err ** 2))
        grads, _ = backward(critic, x, (2.0 / len(y)) * err[:, None])
        adam_step(critic, grads, opt)
        return loss


class DDPGAgent(ActorCriticAgent):
    algo = "ddpg"

    def __init__(self, config, obs_dim, act_dim, action_bound, seed, env_name=None):
        super().__init__(config, obs_dim, act_dim, action_bound, seed, env_name)
        out = _resolve_actor_output(config, env_name)
        actor_spec = MlpSpec(obs_dim, config.arch.actor_hidden, act_dim,
                             output_activation=out, output_bound=self.action_bound)
        critic_spec = _critic_spec(obs_dim, act_dim, config.arch.critic_hidden)
        self.actor = init_mlp(actor_spec, derive_seed(seed, "actor"))
        self.critic = init_mlp(critic_spec, derive_seed(seed, "critic", 0))
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        self.actor_opt = AdamState.for_params(self.actor, config.actor_lr)
        self.critic_opt = AdamState.for_params(self.critic, config.critic_lr)

    def networks(self):
        return {"actor": self.actor, "critic": self.critic,
                "actor_target": self.actor_target, "critic_target": self.critic_target}

    def _deterministic_action(self, obs):
        return self._clip(forward(self.actor, np.asarray(obs, dtype=np.float64)))

    def _explore_action(self, obs, rng):
        a = forward(self.actor, np.asarray(obs, dtype=np.float64))
        noise = self.config.exploration_sigma * self.action_bound * rng.standard_normal(self.act_dim)
        return self._clip(a + noise)

    def _target_action(self, s2: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self._clip(forward(self.actor_target, s2))

    def _target_q(self, x2: np.ndarray) -> np.ndarray:
        return forward(self.critic_target, x2)[:, 0]

    def critic_update(self, batch: Batch, rng: np.random.Generator) -> float:
        cfg = self.config
        a2 = self._target_action(batch.s2, rng)
        x2 = np.concatenate([batch.s2, a2], axis=1)
        y = batch.r + cfg.gamma * (1.0 - batch.done) * self._target_q(x2)
        loss = self._critic_mse_step(self.critic, self.critic_opt,
                                     np.concatenate([batch.s, batch.a], axis=1), y)
        self._critic_updates += 1
        return loss

    def _policy_gradient_step(self, batch: Batch, critic: MlpParams) -> float:
        """Ascent on mean Q(s, mu(s)); critic parameters stay frozen."""
        n = len(batch)
        a = forward(self.actor, batch.s)
        x = np.concatenate([batch.s, a], axis=1)
        q = forward(critic, x)[:, 0]
        loss = float(-np.mean(q))
        _, xgrad = backward(critic, x, np.full((n, 1), -1.0 / n))
        dq_da = xgrad[:, self.obs_dim:]
        agrads, _ = backward(self.actor, batch.s, dq_da)
        adam_step(self.actor, agrads, self.actor_opt)
        return loss

    def _soft_update_targets(self):
        tau = self.config.tau
        soft_update(self.actor_target, self.actor, tau)
        soft_update(self.critic_target, self.critic, tau)

    def actor_update(self, batch: Batch, rng: np.random.Generator) -> float:
        loss = self._policy_gradient_step(batch, self.critic)
        self._soft_update_targets()
        self._actor_updates += 1
        return loss

    def update_step(self, batch: Batch, rng: np.random.Generator) -> UpdateResult:
        q_loss = self.critic_update(batch, rng)
        pi_loss = self.actor_update(batch, rng)
        return UpdateResult(q_loss, pi_loss, None)


class TD3Agent(DDPGAgent):
    """Twin critics, target-policy smoothing, delayed actor updates."""

    algo = "td3"

    def __init__(self, config, obs_dim, act_dim, action_bound, seed, env_name=None):
        super().__init__(config, obs_dim, act_dim, action_bound, seed, env_name)
        critic_spec = _critic_spec(obs_dim, act_dim, config.arch.critic_hidden)
        # Twins are initialized from distinct derived seeds.
        self.critic2 = init_mlp(critic_spec, derive_seed(seed, "critic", 1))
        self.critic2_target = self.critic2.copy()
        self.critic2_opt = AdamState.for_params(self.critic2, config.critic_lr)

    def networks(self):
        nets = super().networks()
        nets["critic2"] = self.critic2
        nets["critic2_target"] = self.critic2_target
        return nets

    def _target_action(self, s2, rng):
        cfg = self.config
        a2 = forward(self.actor_target, s2)
        noise = cfg.target_noise_sigma * self.action_bound * rng.standard_normal(a2.shape)
        clip = cfg.target_noise_clip * self.action_bound
        return self._clip(a2 + np.clip(noise, -clip, clip))

    def _target_q(self, x2):
        return np.minimum(forward(self.critic_target, x2)[:, 0],
                          forward(self.critic2_target, x2)[:, 0])

    def critic_update(self, batch: Batch, rng: np.random.Generator) -> float:
        cfg = self.config
        a2 = self._target_action(batch.s2, rng)
        x2 = np.concatenate([batch.s2, a2], axis=1)
        y = batch.r + cfg.gamma * (1.0 - batch.done) * self._target_q(x2)
        x = np.concatenate([batch.s, batch.a], axis=1)
        loss1 = self._critic_mse_step(self.critic, self.critic_opt, x, y)
        loss2 = self._critic_mse_step(self.critic2, self.critic2_opt, x, y)
        self._critic_updates += 1
        return 0.5 * (loss1 + loss2)

    def _soft_update_targets(self):
        super()._soft_update_targets()
        soft_update(self.critic2_target, self.critic2, self.config.tau)

    def update_step(self, batch: Batch, rng: np.random.Generator) -> UpdateResult:
        q_loss = self.critic_update(batch, rng)
        pi_loss = None
        if self._critic_updates % self.config.policy_delay == 0:
            pi_loss = self.actor_update(batch, rng)
        return UpdateResult(q_loss, pi_loss, None)


def _stable_log_one_minus_tanh_sq(u: np.ndarray) -> np.ndarray:
    # log(1 - tanh(u)^2) = 2 * (log 2 - u - softplus(-2u)), stable for large |u|.
    return 2.0 * (math.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))


class SACAgent(ActorCriticAgent):
    """Squashed-Gaussian policy with twin critics and entropy regularization."""

    algo = "sac"

    def __init__(self, config, obs_dim, act_dim, action_bound, seed, env_name=None):
        super().__init__(config, obs_dim, act_dim, action_bound, seed, env_name)
        # Actor emits [mean, raw log-std] per action dimension; squash at sample time.
        actor_spec = MlpSpec(obs_dim, config.arch.actor_hidden, 2 * act_dim)
        critic_spec = _critic_spec(obs_dim, act_dim, config.arch.critic_hidden)
        self.actor = init_mlp(actor_spec, derive_seed(seed, "actor"))
        self.critic = init_mlp(critic_spec, derive_seed(seed, "critic", 0))
        self.critic2 = init_mlp(critic_spec, derive_seed(seed, "critic", 1))
        self.critic_target = self.critic.copy()
        self.critic2_target = self.critic2.copy()
        self.actor_opt = AdamState.for_params(self.actor, config.actor_lr)
        self.critic_opt = AdamState.for_params(self.critic, config.critic_lr)
        self.critic2_opt = AdamState.for_params(self.critic2, config.critic_lr)
        self._auto_alpha = config.alpha == "auto"
        self._log_alpha = math.log(0.2) if self._auto_alpha else math.log(float(config.alpha))
        self._target_entropy = -float(act_dim)
        # Scalar Adam state for the temperature when auto-tuning.
        self._alpha_m = 0.0
        self._alpha_v = 0.0
        self._alpha_t = 0

    @property
    def alpha(self) -> float:
        return math.exp(self._log_alpha)

    def networks(self):
        return {"actor": self.actor, "critic": self.critic, "critic2": self.critic2,
                "critic_target": self.critic_target, "critic2_target": self.critic2_target}

    def _policy_stats(self, s: np.ndarray):
        h = forward(self.actor, s)
        mu = h[..., :self.act_dim]
        raw = h[..., self.act_dim:]
        log_std = np.clip(raw, LOG_STD_MIN, LOG_STD_MAX)
        return mu, log_std, raw

    def _sample(self, s: np.ndarray, rng: np.random.Generator):
        mu, _, _ = self._policy_stats(s)
        return self._sample_with_eps(s, rng.standard_normal(mu.shape))

    def _sample_with_eps(self, s: np.ndarray, eps: np.ndarray):
        """Reparameterized squashed sample with its log-probability."""
        mu, log_std, raw = self._policy_stats(s)
        std = np.exp(log_std)
        u = mu + std * eps
        a = self.action_bound * np.tanh(u)
        logp = (-0.5 * eps ** 2 - log_std - 0.5 * math.log(2.0 * math.pi)
                - math.log(self.action_bound) - _stable_log_one_minus_tanh_sq(u))
        return a, logp.sum(axis=-1), (mu, log_std, raw, std, eps, u)

    def _deterministic_action(self, obs):
        mu, _, _ = self._policy_stats(np.asarray(obs, dtype=np.float64))
        return self.action_bound * np.tanh(mu)

    def _explore_action(self, obs, rng):
        a, _, _ = self._sample(np.asarray(obs, dtype=np.float64)[None, :], rng)
        return a[0]

    def critic_update(self, batch: Batch, rng: np.random.Generator) -> float:
        cfg = self.config
        a2, logp2, _ = self._sample(batch.s2, rng)
        x2 = np.concatenate([batch.s2, a2], axis=1)
        q2 = np.minimum(forward(self.critic_target, x2)[:, 0],
                        forward(self.critic2_target, x2)[:, 0])
        y = batch.r + cfg.gamma * (1.0 - batch.done) * (q2 - self.alpha * logp2)
        x = np.concatenate([batch.s, batch.a], axis=1)
        loss1 = self._critic_mse_step(self.critic, self.critic_opt, x, y)
        loss2 = self._critic_mse_step(self.critic2, self.critic2_opt, x, y)
        self._critic_updates += 1
        return 0.5 * (loss1 + loss2)

    def _actor_loss_and_grad(self, batch: Batch, eps: np.ndarray):
        """Objective mean(alpha * logp - min-twin Q) and its gradient on the
        actor outputs, for a fixed reparameterization draw eps."""
        n = len(batch)
        alpha = self.alpha
        a, logp, (mu, log_std, raw, std, _, u) = self._sample_with_eps(batch.s, eps)
        x = np.concatenate([batch.s, a], axis=1)
        q1 = forward(self.critic, x)[:, 0]
        q2 = forward(self.critic2, x)[:, 0]
        qmin = np.minimum(q1, q2)
        loss = float(np.mean(alpha * logp - qmin))

        # d(-qmin)/da through whichever twin attains the minimum, per sample.
        pick1 = (q1 <= q2)[:, None] * (-1.0 / n)
        pick2 = (q1 > q2)[:, None] * (-1.0 / n)
        _, xg1 = backward(self.critic, x, pick1)
        _, xg2 = backward(self.critic2, x, pick2)
        dneg_q_da = (xg1 + xg2)[:, self.obs_dim:]

        tanh_u = np.tanh(u)
        # Gradient on the pre-squash sample u: entropy term plus the Q path.
        g_u = (alpha / n) * (2.0 * tanh_u) + dneg_q_da * self.action_bound * (1.0 - tanh_u ** 2)
        g_mu = g_u
        clamp_mask = (raw > LOG_STD_MIN) & (raw < LOG_STD_MAX)
        g_raw = (g_u * std * eps - (alpha / n)) * clamp_mask
        return loss, np.concatenate([g_mu, g_raw], axis=1), logp

    def actor_update(self, batch: Batch, rng: np.random.Generator) -> float:
        eps = rng.standard_normal((len(batch), self.act_dim))
        loss, out_grad, logp = self._actor_loss_and_grad(batch, eps)
        agrads, _ = backward(self.actor, batch.s, out_grad)
        adam_step(self.actor, agrads, self.actor_opt)

        if self._auto_alpha:
            self._alpha_adam_step(float(np.mean(logp)))
        soft_update(self.critic_target, self.critic, self.config.tau)
        soft_update(self.critic2_target, self.critic2, self.config.tau)
        self._actor_updates += 1
        return loss

    def _alpha_adam_step(self, mean_logp: float):
        # loss_alpha = -log_alpha * (mean_logp + target_entropy); plain Adam on log_alpha.
        g = -(mean_logp + self._target_entropy)
        self._alpha_t += 1
        b1, b2, eps, lr = 0.9, 0.999, 1e-8, self.config.actor_lr
        self._alpha_m = b1 * self._alpha_m + (1 - b1) * g
        self._alpha_v = b2 * self._alpha_v + (1 - b2) * g * g
        mhat = self._alpha_m / (1 - b1 ** self._alpha_t)
        vhat = self._alpha_v / (1 - b2 ** self._alpha_t)
        self._log_alpha -= lr * mhat / (math.sqrt(vhat) + eps)

    def update_step(self, batch: Batch, rng: np.random.Generator) -> UpdateResult:
        q_loss = self.critic_update(batch, rng)
        pi_loss = self.actor_update(batch, rng)
        return UpdateResult(q_loss, pi_loss, self.alpha)


_AGENT_CLASSES = {"ddpg": DDPGAgent, "td3": TD3Agent, "sac": SACAgent}


def make_agent(config: AgentConfig, obs_dim: int, act_dim: int, action_bound: float,
               seed: int, env_name: str | None = None) -> ActorCriticAgent:
    cls = _AGENT_CLASSES[config.algo]
    return cls(config, obs_dim, act_dim, action_bound, seed, env_name)
