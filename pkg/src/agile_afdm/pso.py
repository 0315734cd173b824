"""Bounded particle swarm minimizer with deterministic per-particle streams.

The velocity rule combines inertia (linearly annealed), a cognitive pull
toward each particle's best position, and a social pull toward the swarm
best.  Every particle owns a seeded random stream, so results do not
depend on evaluation order or worker scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .seeding import stream


@dataclass(frozen=True)
class PsoConfig:
    n_particles: int = 200
    max_iters: int = 100
    inertia_start: float = 0.99
    inertia_final: float = 0.4
    cognitive: float = 1.2
    social: float = 1.8
    eps_con: float = 1e-6
    bound_low: float = 0.0
    bound_high: float = 0.999

    def __post_init__(self):
        if not (0 < self.inertia_final <= self.inertia_start < 1):
            raise ValueError("inertia weights must satisfy 0 < final <= start < 1")
        if self.cognitive <= 0 or self.social <= 0:
            raise ValueError("acceleration coefficients must be positive")
        if self.bound_low >= self.bound_high:
            raise ValueError("invalid position bounds")


@dataclass
class PsoResult:
    c: np.ndarray
    value: float
    iterations: int
    personal_best_history: list = field(default_factory=list)
    global_best_history: list = field(default_factory=list)


def pso_minimize(
    objective,
    cfg: PsoConfig | None = None,
    seed: int = 0,
    init_positions: np.ndarray | None = None,
    record_history: bool = False,
) -> PsoResult:
    """Minimize a batched objective over [bound_low, bound_high]^2.

    ``objective`` receives an (M, 2) array of positions and returns M
    values; non-finite values are treated as +inf (the particle keeps its
    previous personal best).  ``init_positions`` optionally pins the first
    rows of the initial swarm (the rest are drawn uniformly).  Terminates
    at max_iters or when the global-best position moves less than eps_con
    between consecutive iterations.
    """
    if cfg is None:
        cfg = PsoConfig()
    npar = cfg.n_particles
    rngs = [stream(seed, i) for i in range(npar)]
    span = cfg.bound_high - cfg.bound_low
    pos = np.array([cfg.bound_low + span * r.uniform(size=2) for r in rngs])
    if init_positions is not None:
        init_positions = np.atleast_2d(np.asarray(init_positions, dtype=float))
        k = min(init_positions.shape[0], npar)
        pos[:k] = np.clip(init_positions[:k], cfg.bound_low, cfg.bound_high)
    vel = np.zeros((npar, 2))

    values = _evaluate(objective, pos)
    pbest_pos = pos.copy()
    pbest_val = values.copy()
    gbest_idx = int(np.argmin(pbest_val))
    gbest_pos = pbest_pos[gbest_idx].copy()
    gbest_val = float(pbest_val[gbest_idx])

    history_p = [pbest_val.copy()] if record_history else []
    history_g = [gbest_val] if record_history else []

    iters = 0
    for it in range(cfg.max_iters):
        inertia = cfg.inertia_start - (cfg.inertia_start - cfg.inertia_final) * it / cfg.max_iters
        r = np.array([rng.uniform(size=2) for rng in rngs])  # (npar, [r1, r2])
        vel = (
            inertia * vel
            + cfg.cognitive * r[:, 0:1] * (pbest_pos - pos)
            + cfg.social * r[:, 1:2] * (gbest_pos[None, :] - pos)
        )
        pos = np.clip(pos + vel, cfg.bound_low, cfg.bound_high)

        values = _evaluate(objective, pos)
        improved = values < pbest_val
        pbest_val = np.where(improved, values, pbest_val)
        pbest_pos = np.where(improved[:, None], pos, pbest_pos)

        prev_gbest_pos = gbest_pos
        gbest_idx = int(np.argmin(pbest_val))
        gbest_pos = pbest_pos[gbest_idx].copy()
        gbest_val = float(pbest_val[gbest_idx])
        iters = it + 1

        if record_history:
            history_p.append(pbest_val.copy())
            history_g.append(gbest_val)

        if np.linalg.norm(gbest_pos - prev_gbest_pos) < cfg.eps_con:
            break

    return PsoResult(gbest_pos, gbest_val, iters, history_p, history_g)


def _evaluate(objective, pos: np.ndarray) -> np.ndarray:
    values = np.asarray(objective(pos), dtype=float).reshape(-1)
    if values.size != pos.shape[0]:
        raise ValueError("objective must return one value per position")
    return np.where(np.isfinite(values), values, np.inf)
