"""Uniform replay buffer over preallocated numpy rings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Transition:
    s: np.ndarray
    a: np.ndarray
    r: float
    s2: np.ndarray
    done: bool


@dataclass
class Batch:
    s: np.ndarray
    a: np.ndarray
    r: np.ndarray
    s2: np.ndarray
    done: np.ndarray

    def __len__(self) -> int:
        return self.s.shape[0]


class ReplayBuffer:
    """Fixed-capacity ring; oldest transitions are overwritten first."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._s = np.zeros((capacity, obs_dim))
        self._a = np.zeros((capacity, act_dim))
        self._r = np.zeros(capacity)
        self._s2 = np.zeros((capacity, obs_dim))
        self._done = np.zeros(capacity)
        self._next = 0
        self._count = 0

    def __len__(self) -> int:
        return self._count

    def push(self, s, a, r: float, s2, done: bool) -> None:
        i = self._next
        self._s[i] = s
        self._a[i] = a
        self._r[i] = r
        self._s2[i] = s2
        self._done[i] = 1.0 if done else 0.0
        self._next = (i + 1) % self.capacity
        self._count = min(self._count + 1, self.capacity)

    def push_transition(self, t: Transition) -> None:
        self.push(t.s, t.a, t.r, t.s2, t.done)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        """Uniform draw without replacement within the batch."""
        if batch_size > self._count:
            raise ValueError(f"cannot sample {batch_size} from buffer of {self._count}")
        idx = rng.choice(self._count, size=batch_size, replace=False)
        return Batch(self._s[idx], self._a[idx], self._r[idx], self._s2[idx], self._done[idx])
