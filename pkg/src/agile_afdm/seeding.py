"""Deterministic stream splitting for Monte Carlo runs.

Every random draw in the harness comes from a Philox counter-based
generator keyed by the run seed plus an integer path identifying the work
item (block index, channel index, particle index, ...).  Streams are
independent of execution order and of the worker pool layout, so serial
and parallel runs produce identical results.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the work item identified by ``path`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def gaussian_block(rng: np.random.Generator, n: int, power: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian vector with per-entry power ``power``."""
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return np.sqrt(power / 2.0) * z


def qam_block(rng: np.random.Generator, n: int, order: int = 16, power: float = 1.0) -> np.ndarray:
    """Uniform square-QAM symbols normalized to per-entry power ``power``."""
    m = int(round(np.sqrt(order)))
    if m * m != order:
        raise ValueError(f"QAM order must be a perfect square, got {order}")
    levels = 2 * np.arange(m) - (m - 1)
    re = rng.choice(levels, size=n)
    im = rng.choice(levels, size=n)
    sym = re + 1j * im
    scale = np.sqrt(power / np.mean(levels**2 * 2))
    return sym * scale
