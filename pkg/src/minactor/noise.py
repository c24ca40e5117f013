"""Seeded 2-D simplex gradient noise, sliced to produce smooth 1-D signals.

Classic two-dimensional simplex noise over a permutation table shuffled by
the seed. A horizontal slice through the field gives a continuous signal
used for procedural goal trajectories; values are rescaled and clamped to
[-1, 1].
"""

from __future__ import annotations

import math

import numpy as np

_F2 = 0.5 * (math.sqrt(3.0) - 1.0)
_G2 = (3.0 - math.sqrt(3.0)) / 6.0

# 2-D projections of the standard 12-gradient set.
_GRAD = (
    (1, 1), (-1, 1), (1, -1), (-1, -1),
    (1, 0), (-1, 0), (1, 0), (-1, 0),
    (0, 1), (0, -1), (0, 1), (0, -1),
)

# Raw single-octave values stay within roughly +/-0.88; this gain fills
# [-1, 1] before the clamp.
_GAIN = 1.25


class SimplexField:
    """One seeded 2-D noise field."""

    def __init__(self, seed: int):
        perm = np.random.default_rng(seed).permutation(256)
        self._perm = np.concatenate([perm, perm]).astype(np.int64)

    def raw(self, x: float, y: float) -> float:
        """Single-octave simplex noise at (x, y), roughly in [-0.9, 0.9]."""
        perm = self._perm
        s = (x + y) * _F2
        i = math.floor(x + s)
        j = math.floor(y + s)
        t = (i + j) * _G2
        x0 = x - (i - t)
        y0 = y - (j - t)
        if x0 > y0:
            i1, j1 = 1, 0
        else:
            i1, j1 = 0, 1
        x1 = x0 - i1 + _G2
        y1 = y0 - j1 + _G2
        x2 = x0 - 1.0 + 2.0 * _G2
        y2 = y0 - 1.0 + 2.0 * _G2
        ii = i & 255
        jj = j & 255
        g0 = perm[ii + perm[jj]] % 12
        g1 = perm[ii + i1 + perm[jj + j1]] % 12
        g2 = perm[ii + 1 + perm[jj + 1]] % 12
        total = 0.0
        for (cx, cy), g in (((x0, y0), g0), ((x1, y1), g1), ((x2, y2), g2)):
            f = 0.5 - cx * cx - cy * cy
            if f > 0.0:
                gx, gy = _GRAD[g]
                total += (f * f) * (f * f) * (gx * cx + gy * cy)
        return 70.0 * total

    def sample_unit(self, x: float, y: float = 0.0) -> float:
        """Noise rescaled to fill [-1, 1]; clamped by construction."""
        v = _GAIN * self.raw(x, y)
        return min(1.0, max(-1.0, v))


_FIELD_CACHE: dict[int, SimplexField] = {}


def field_for_seed(seed: int) -> SimplexField:
    f = _FIELD_CACHE.get(seed)
    if f is None:
        f = _FIELD_CACHE[seed] = SimplexField(seed)
    return f
