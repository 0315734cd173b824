"""Comparator PAPR-reduction schemes: plain OFDM, clipping, SLM, PTS.

All schemes are charged per envelope evaluation so comparisons against the
per-block c2 search run under a shared budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .daft import oversampled_envelope, oversampled_envelope_batch
from .papr import papr_db, papr_db_batch


@dataclass(frozen=True)
class BaselineConfig:
    clipping_ratio: float = 2.0
    slm_candidates: int = 128
    pts_subblocks: int = 4
    pts_phase_alphabet: tuple = (1 + 0j, -1 + 0j, 1j, -1j)
    eval_budget: int = 128
    oversample: int = 10

    def __post_init__(self):
        if self.clipping_ratio <= 1:
            raise ValueError("clipping ratio must exceed 1")
        if self.slm_candidates < 1 or self.pts_subblocks < 1:
            raise ValueError("candidate counts must be >= 1")
        if any(abs(abs(complex(p)) - 1.0) > 1e-12 for p in self.pts_phase_alphabet):
            raise ValueError("phase alphabet entries must have unit modulus")


@dataclass
class CandidateResult:
    papr_db: float
    index: int
    block: np.ndarray
    evals: int


def ofdm_papr(x, oversample: int) -> float:
    """PAPR of the plain inverse-DFT waveform (c2 = 0)."""
    return papr_db(x, 0.0, oversample)


def clip(s, clipping_ratio: float) -> np.ndarray:
    """Magnitude-limit samples to CR times the rms level, phase preserved."""
    if clipping_ratio <= 0:
        raise ValueError("clipping ratio must be positive")
    s = np.asarray(s, dtype=np.complex128)
    rms = np.sqrt(np.mean(np.abs(s) ** 2))
    if rms == 0:
        return s.copy()
    limit = clipping_ratio * rms
    mag = np.abs(s)
    over = mag > limit
    out = s.copy()
    out[over] = s[over] * (limit / mag[over])
    return out


def clipped_papr(x, cfg: BaselineConfig) -> float:
    """PAPR measured on the clipped oversampled envelope."""
    env = oversampled_envelope(x, 0.0, cfg.oversample)
    env_c = clip(env, cfg.clipping_ratio)
    power = np.abs(env_c) ** 2
    return float(10.0 * np.log10(power.max() / power.mean()))


def slm(x, cfg: BaselineConfig, rng: np.random.Generator) -> CandidateResult:
    """Selective mapping with seeded QPSK phase masks.

    Mask 0 is the identity, so one candidate reproduces the plain
    waveform; exactly U envelope evaluations are consumed.
    """
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    u = min(cfg.slm_candidates, cfg.eval_budget)
    n = x.size
    masks = np.ones((u, n), dtype=complex)
    if u > 1:
        quads = rng.integers(0, 4, size=(u - 1, n))
        masks[1:] = np.exp(1j * np.pi / 2.0 * quads)
    rows = masks * x[None, :]
    values = papr_db_batch(rows, np.zeros(u), cfg.oversample)
    best = int(np.argmin(values))
    return CandidateResult(float(values[best]), best, rows[best], u)


def pts(x, cfg: BaselineConfig) -> CandidateResult:
    """Partial transmit sequences over the occupied subcarriers.

    The occupied tones (all of them for a dense block) are split into V
    contiguous sub-blocks; phase vectors from the alphabet with the first
    phase pinned to 1 are enumerated in lexicographic order and truncated
    to the evaluation budget.
    """
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    support = np.flatnonzero(np.abs(x) > 0)
    if support.size == 0:
        raise ValueError("zero block has no defined PAPR")
    v = cfg.pts_subblocks
    if support.size % v != 0:
        raise ValueError(f"{v} sub-blocks do not evenly divide {support.size} occupied tones")
    groups = support.reshape(v, support.size // v)

    alphabet = np.array([complex(p) for p in cfg.pts_phase_alphabet])
    combos = product(alphabet, repeat=v - 1)
    rows = []
    phase_sets = []
    for tail in combos:
        if len(rows) >= cfg.eval_budget:
            break
        phases = np.concatenate([[1.0 + 0j], np.asarray(tail)])
        cand = x.copy()
        for g, ph in zip(groups, phases):
            cand[g] = cand[g] * ph
        rows.append(cand)
        phase_sets.append(phases)
    rows = np.asarray(rows)
    values = papr_db_batch(rows, np.zeros(len(rows)), cfg.oversample)
    best = int(np.argmin(values))
    return CandidateResult(float(values[best]), best, rows[best], len(rows))
