"""Doubly-dispersive channels in the chirp transform domain.

Each propagation path (gain h, integer delay l, normalized Doppler nu)
contributes a rank-structured term to the N x N effective channel matrix

    H[p, q] = (1/N) * sum_i h_i exp(j 2 pi / N (N c1 l_i^2 - q l_i
                                     + N c2 (q^2 - p^2))) * F_i(p, q),

where F_i is the geometric alignment sum over time samples.  The matrix is
assembled directly from this closed form; no time-domain matrices are
built.  F depends on (p - q) only modulo N, which the fast paths in
``sir``/``crlb`` exploit via circular convolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .daft import ChirpParams

ALIGNMENT_TOL = 1e-9


@dataclass(frozen=True)
class ChannelPath:
    gain: complex
    delay: int
    doppler: float  # normalized: nu = N * f

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError("path delay must be nonnegative")
        if not np.isfinite(self.gain):
            raise ValueError("path gain must be finite")


@dataclass(frozen=True)
class PathSet:
    paths: tuple[ChannelPath, ...]
    noise_power: float = 0.0

    def __post_init__(self):
        if len(self.paths) < 1:
            raise ValueError("at least one path required")
        if self.noise_power < 0:
            raise ValueError("noise power must be nonnegative")
        object.__setattr__(self, "paths", tuple(self.paths))

    @property
    def gains(self) -> np.ndarray:
        return np.array([p.gain for p in self.paths], dtype=complex)

    @property
    def delays(self) -> np.ndarray:
        return np.array([p.delay for p in self.paths], dtype=float)

    @property
    def dopplers(self) -> np.ndarray:
        return np.array([p.doppler for p in self.paths], dtype=float)


@dataclass(frozen=True)
class SensingTarget:
    """Single monostatic reflector; delay may be fractional (in samples)."""

    reflection: complex
    delay: float
    doppler: float

    def __post_init__(self):
        if self.reflection == 0:
            raise ValueError("zero reflection coefficient is degenerate")
        if self.delay < 0:
            raise ValueError("two-way delay must be nonnegative")


def kernel_alignment(p, q, doppler, delay, c1: float, n: int):
    """Geometric sum F(p, q) = sum_n exp(-j 2 pi psi n / N).

    psi = p - q + nu + 2 N c1 l.  Returns N on the coherent branch
    (psi/N within ALIGNMENT_TOL of an integer), otherwise the ratio
    (e^{-j 2 pi psi} - 1) / (e^{-j 2 pi psi / N} - 1).  Vectorized over
    broadcastable inputs.
    """
    psi = np.asarray(p, dtype=float) - np.asarray(q, dtype=float) + doppler + 2.0 * n * c1 * delay
    return _alignment_from_psi(psi, n)


def _alignment_from_psi(psi: np.ndarray, n: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=float)
    frac = psi / n
    aligned = np.abs(frac - np.round(frac)) < ALIGNMENT_TOL
    num = np.exp(-2j * np.pi * psi) - 1.0
    den = np.exp(-2j * np.pi * psi / n) - 1.0
    safe_den = np.where(aligned, 1.0, den)
    # second guard: fall back to the coherent value if the denominator
    # underflows without tripping the branch tolerance
    tiny = np.abs(safe_den) < 1e-30
    out = np.where(aligned | tiny, complex(n), num / np.where(tiny, 1.0, safe_den))
    return out


def alignment_row(offset, n: int) -> np.ndarray:
    """F evaluated at psi = d + offset for d = 0 .. N-1.

    F has period N in psi, so these N values generate the full (p, q)
    kernel through (p - q) mod N.  ``offset`` may carry leading batch
    dimensions; the row index is appended as the last axis.
    """
    offset = np.asarray(offset, dtype=float)
    d = np.arange(n, dtype=float)
    psi = offset[..., None] + d
    return _alignment_from_psi(psi, n)


def _quadratic_phases(n: int, c1: float, c2: float):
    q = np.arange(n, dtype=float)
    return np.exp(2j * np.pi * c1 * q**2), np.exp(2j * np.pi * c2 * q**2)


def _single_path_matrix(gain: complex, delay: float, doppler: float, c: ChirpParams, n: int) -> np.ndarray:
    p_idx = np.arange(n, dtype=float)
    q_idx = np.arange(n, dtype=float)
    row = alignment_row(doppler + 2.0 * n * c.c1 * delay, n)
    circ = row[(p_idx[:, None].astype(int) - q_idx[None, :].astype(int)) % n]
    phase_q = np.exp(2j * np.pi / n * (-q_idx * delay + n * c.c2 * q_idx**2))
    phase_p = np.exp(-2j * np.pi * c.c2 * p_idx**2)
    scal = gain * np.exp(2j * np.pi * c.c1 * delay**2)
    return (scal / n) * (phase_p[:, None] * circ * phase_q[None, :])


def effective_comm_channel(paths: PathSet, c: ChirpParams, n: int) -> np.ndarray:
    """N x N effective communication channel matrix in the transform domain."""
    h = np.zeros((n, n), dtype=complex)
    for path in paths.paths:
        h += _single_path_matrix(path.gain, float(path.delay), path.doppler, c, n)
    return h


def effective_sens_channel(target: SensingTarget, c: ChirpParams, n: int) -> np.ndarray:
    """Effective monostatic sensing channel; continuous in delay and Doppler."""
    return _single_path_matrix(target.reflection, target.delay, target.doppler, c, n)


def ici_decompose(h: np.ndarray, x: np.ndarray):
    """Split |H x| per subcarrier into diagonal signal and off-diagonal leakage.

    Returns (signal_power, interference_power), both length N:
    P_sig[p] = |H[p,p] x[p]|^2 and P_int[p] = |sum_{q != p} H[p,q] x[q]|^2.
    """
    h = np.asarray(h, dtype=complex)
    x = np.asarray(x, dtype=complex).reshape(-1)
    if h.shape != (x.size, x.size):
        raise ValueError(f"matrix {h.shape} does not match block length {x.size}")
    y = h @ x
    diag_term = np.diag(h) * x
    return np.abs(diag_term) ** 2, np.abs(y - diag_term) ** 2


def awgn(rng: np.random.Generator, n: int, noise_power: float) -> np.ndarray:
    """CN(0, N0) noise vector: per-component variance N0/2."""
    if noise_power < 0:
        raise ValueError("noise power must be nonnegative")
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return np.sqrt(noise_power / 2.0) * z
