"""Deterministic, seedable environments behind one episodic interface.

Two tasks: a 1-D goal-tracking problem whose goals follow a smooth
procedural noise signal, and an inverted pendulum with the classic
swing-up dynamics and reward. Episodes end only by time limit. Both
environments are bit-deterministic given (config, episode_seed, actions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .noise import field_for_seed
from .seeding import derive_seed


@dataclass
class EnvStep:
    observation: np.ndarray
    reward: float
    done: bool
    t: int


@dataclass(frozen=True)
class ToyConfig:
    episode_length: int = 200
    noise_frequency: float = 0.02
    noise_seed: int = 0
    action_bound: float = 1.0


@dataclass(frozen=True)
class PendulumConfig:
    gravity: float = 10.0
    mass: float = 1.0
    length: float = 1.0
    dt: float = 0.05
    max_torque: float = 2.0
    max_speed: float = 8.0
    episode_length: int = 200

    def __post_init__(self):
        if min(self.gravity, self.mass, self.length, self.dt, self.max_torque, self.max_speed) <= 0:
            raise ValueError("all physical constants must be > 0")


def noise_eval(t: float, config: ToyConfig) -> float:
    """Goal signal at step-time t: a horizontal slice of the seeded 2-D field."""
    field = field_for_seed(config.noise_seed)
    return field.sample_unit(t * config.noise_frequency, 0.0)


def toy_reset(config: ToyConfig, episode_seed: int):
    """Start state uniform in [-1, 1]; observation is goal minus state."""
    s = float(np.random.default_rng(episode_seed).uniform(-1.0, 1.0))
    g0 = noise_eval(0.0, config)
    step = EnvStep(observation=np.array([g0 - s]), reward=0.0, done=False, t=0)
    return s, step


def toy_step(s: float, a: float, t: int, config: ToyConfig):
    """Apply clipped action, move to the next goal, reward the residual error."""
    b = config.action_bound
    a = min(b, max(-b, float(a)))
    s2 = min(1.0, max(-1.0, s + a))
    g_next = noise_eval(float(t + 1), config)
    reward = -abs(g_next - s2)
    done = (t + 1) >= config.episode_length
    step = EnvStep(observation=np.array([g_next - s2]), reward=reward, done=done, t=t + 1)
    return s2, step


def _wrap_angle(theta: float) -> float:
    return ((theta + math.pi) % (2.0 * math.pi)) - math.pi


def pendulum_reset(config: PendulumConfig, episode_seed: int):
    rng = np.random.default_rng(episode_seed)
    theta = float(rng.uniform(-math.pi, math.pi))
    theta_dot = float(rng.uniform(-1.0, 1.0))
    obs = np.array([math.cos(theta), math.sin(theta), theta_dot])
    return (theta, theta_dot), EnvStep(observation=obs, reward=0.0, done=False, t=0)


def pendulum_step(state, u: float, t: int, config: PendulumConfig):
    """Semi-implicit Euler step; cost is charged on the pre-update state."""
    theta, theta_dot = state
    u = min(config.max_torque, max(-config.max_torque, float(u)))
    cost = _wrap_angle(theta) ** 2 + 0.1 * theta_dot ** 2 + 0.001 * u ** 2
    g, m, l = config.gravity, config.mass, config.length
    theta_acc = (3.0 * g / (2.0 * l)) * math.sin(theta) + (3.0 / (m * l * l)) * u
    theta_dot2 = theta_dot + theta_acc * config.dt
    theta_dot2 = min(config.max_speed, max(-config.max_speed, theta_dot2))
    theta2 = theta + theta_dot2 * config.dt
    obs = np.array([math.cos(theta2), math.sin(theta2), theta_dot2])
    done = (t + 1) >= config.episode_length
    return (theta2, theta_dot2), EnvStep(observation=obs, reward=-cost, done=done, t=t + 1)


class ToyTrackEnv:
    """1-D tracking task; the goal trajectory varies per episode via a
    derived noise seed while staying deterministic per (config, seed)."""

    obs_dim = 1
    act_dim = 1

    def __init__(self, config: ToyConfig | None = None):
        self.config = config or ToyConfig()
        self._ep_config = self.config
        self._s = 0.0
        self._t = 0

    @property
    def action_bound(self) -> float:
        return self.config.action_bound

    @property
    def episode_length(self) -> int:
        return self.config.episode_length

    def reset(self, episode_seed: int) -> EnvStep:
        ep_noise = derive_seed(self.config.noise_seed, episode_seed)
        self._ep_config = replace(self.config, noise_seed=ep_noise)
        self._s, step = toy_reset(self._ep_config, episode_seed)
        self._t = 0
        return step

    def step(self, action) -> EnvStep:
        a = float(np.asarray(action).reshape(-1)[0])
        self._s, step = toy_step(self._s, a, self._t, self._ep_config)
        self._t = step.t
        return step

    def goal(self, t: int) -> float:
        """Goal value at step t of the current episode."""
        return noise_eval(float(t), self._ep_config)

    def worst_return(self) -> float:
        return -2.0 * self.config.episode_length


class PendulumEnv:
    """Inverted pendulum swing-up with torque control."""

    obs_dim = 3
    act_dim = 1

    def __init__(self, config: PendulumConfig | None = None):
        self.config = config or PendulumConfig()
        self._state = (0.0, 0.0)
        self._t = 0

    @property
    def action_bound(self) -> float:
        return self.config.max_torque

    @property
    def episode_length(self) -> int:
        return self.config.episode_length

    def reset(self, episode_seed: int) -> EnvStep:
        self._state, step = pendulum_reset(self.config, episode_seed)
        self._t = 0
        return step

    def step(self, action) -> EnvStep:
        u = float(np.asarray(action).reshape(-1)[0])
        self._state, step = pendulum_step(self._state, u, self._t, self.config)
        self._t = step.t
        return step

    def worst_return(self) -> float:
        c = self.config
        per_step = math.pi ** 2 + 0.1 * c.max_speed ** 2 + 0.001 * c.max_torque ** 2
        return -per_step * c.episode_length


ENV_NAMES = ("toy", "pendulum")


def make_env(name: str, **config_overrides):
    """Build an environment by name ("toy" or "pendulum")."""
    if name == "toy":
        return ToyTrackEnv(ToyConfig(**config_overrides))
    if name == "pendulum":
        return PendulumEnv(PendulumConfig(**config_overrides))
    raise ValueError(f"unknown environment {name!r}; expected one of {ENV_NAMES}")


class IdealToyPolicy:
    """Analytic tracking policy: action equals the observed error."""

    def select_action(self, obs, mode: str = "deterministic", rng=None):
        return np.asarray(obs, dtype=np.float64).copy()
