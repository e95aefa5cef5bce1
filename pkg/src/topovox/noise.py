"""Seeded gradient noise in 2, 3, and 4 dimensions (improved-style variant).

Quintic fade, hashed lattice gradients, values normalized into [-1, 1].
The permutation table is derived from the 64-bit seed with a counter-based
hash stream, so the full seed space yields distinct tables.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import sqrt

import numpy as np

from .grid import UnsupportedDimensionError

_GRADS = {
    2: np.array(
        [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)],
        dtype=np.float64,
    ),
    3: np.array(
        [
            (1, 1, 0), (-1, 1, 0), (1, -1, 0), (-1, -1, 0),
            (1, 0, 1), (-1, 0, 1), (1, 0, -1), (-1, 0, -1),
            (0, 1, 1), (0, -1, 1), (0, 1, -1), (0, -1, -1),
        ],
        dtype=np.float64,
    ),
    4: np.array(
        [
            (s0, s1, s2, 0) for s0 in (1, -1) for s1 in (1, -1) for s2 in (1, -1)
        ]
        + [
            (s0, s1, 0, s2) for s0 in (1, -1) for s1 in (1, -1) for s2 in (1, -1)
        ]
        + [
            (s0, 0, s1, s2) for s0 in (1, -1) for s1 in (1, -1) for s2 in (1, -1)
        ]
        + [
            (0, s0, s1, s2) for s0 in (1, -1) for s1 in (1, -1) for s2 in (1, -1)
        ],
        dtype=np.float64,
    ),
}

# peak amplitude of the raw interpolant per dimension (1.0, 1.0, sqrt(5)/2,
# attained at cell centers with aligned gradients), padded 1% for float slack
_AMPLITUDE = {2: 1.01, 3: 1.01, 4: 1.01 * sqrt(5.0) / 2.0}

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@lru_cache(maxsize=64)
def _perm_table(seed: int) -> np.ndarray:
    """256-entry permutation (doubled for overflow-free chaining)."""
    perm = np.arange(256, dtype=np.int64)
    state = seed & _MASK64
    for i in range(255, 0, -1):
        state = _splitmix64(state)
        k = state % (i + 1)
        perm[i], perm[k] = perm[k], perm[i]
    return np.concatenate([perm, perm])


def _fade(t: np.ndarray) -> np.ndarray:
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def _perlin_array(points: np.ndarray, seed: int) -> np.ndarray:
    """Noise values for an (m, n) array of query points."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = pts.shape[1]
    if n not in _GRADS:
        raise UnsupportedDimensionError(f"noise supports 2-4 dimensions, got {n}")
    perm = _perm_table(seed)
    grads = _GRADS[n]
    base = np.floor(pts).astype(np.int64)
    frac = pts - base
    base &= 255
    w = _fade(frac)

    accum = np.zeros(pts.shape[0], dtype=np.float64)
    for corner in range(1 << n):
        bits = [(corner >> ax) & 1 for ax in range(n)]
        h = perm[base[:, 0] + bits[0]]
        for ax in range(1, n):
            h = perm[h + base[:, ax] + bits[ax]]
        g = grads[h % len(grads)]
        offs = frac - np.asarray(bits, dtype=np.float64)
        dot = np.einsum("ij,ij->i", g, offs)
        weight = np.ones(pts.shape[0], dtype=np.float64)
        for ax in range(n):
            weight *= w[:, ax] if bits[ax] else (1.0 - w[:, ax])
        accum += weight * dot
    return accum / _AMPLITUDE[n]


def perlin_value(p, seed: int) -> float:
    """Noise value at one point; zero at integer lattice points."""
    return float(_perlin_array(np.asarray(p, dtype=np.float64)[None, :], seed)[0])


@dataclass(frozen=True)
class NoiseField:
    """A noise value per voxel of a grid, deterministic in (dims, scale, seed)."""

    dims: tuple[int, ...]
    scale: float
    seed: int
    values: np.ndarray


def noise_field(
    dims,
    scale: float,
    seed: int,
    octaves: int = 1,
    persistence: float = 0.5,
    lacunarity: float = 2.0,
) -> NoiseField:
    """Sample noise at every voxel coordinate divided by ``scale``.

    One octave by default; more octaves add self-similar detail with the
    usual persistence/lacunarity weighting, renormalized back into [-1, 1].
    """
    dims = tuple(int(d) for d in dims)
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    if octaves < 1:
        raise ValueError(f"octaves must be >= 1, got {octaves}")
    coords = np.stack(
        [c.ravel() for c in np.meshgrid(*[np.arange(d) for d in dims], indexing="ij")],
        axis=1,
    ).astype(np.float64)
    total = np.zeros(coords.shape[0], dtype=np.float64)
    amp, freq, norm = 1.0, 1.0 / scale, 0.0
    for _ in range(octaves):
        total += amp * _perlin_array(coords * freq, seed)
        norm += amp
        amp *= persistence
        freq *= lacunarity
    values = (total / norm).reshape(dims)
    return NoiseField(dims, float(scale), int(seed), values)
