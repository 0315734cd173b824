"""Unitary chirp transform pair, chirp-periodic prefix, oversampled envelope.

The modulator maps a block of N transform-domain symbols x to time samples

    s[n] = (1/sqrt(N)) * sum_m x[m] exp(j 2 pi (c1 n^2 + c2 m^2 + n m / N)),

i.e. a quadratic phase in the symbol index (c2), a unitary inverse DFT, and
a quadratic phase in time (c1).  Both directions are implemented as the
diagonal-FFT-diagonal factorization, O(N log N).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChirpParams:
    """The chirp parameter pair, reduced modulo 1 to [0, 1)^2."""

    c1: float
    c2: float

    def __post_init__(self):
        if not (np.isfinite(self.c1) and np.isfinite(self.c2)):
            raise ValueError("chirp parameters must be finite")
        object.__setattr__(self, "c1", float(self.c1) % 1.0)
        object.__setattr__(self, "c2", float(self.c2) % 1.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2])


def _as_block(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    if x.size == 0:
        raise ValueError("empty symbol block")
    if not np.all(np.isfinite(x)):
        raise ValueError("symbol block contains non-finite entries")
    return x


def _time_chirp(n: int, c1: float) -> np.ndarray:
    idx = np.arange(n)
    return np.exp(2j * np.pi * c1 * idx.astype(float) ** 2)


def _symbol_chirp(n: int, c2: float) -> np.ndarray:
    idx = np.arange(n)
    return np.exp(2j * np.pi * c2 * idx.astype(float) ** 2)


def idaft(x, c: ChirpParams) -> np.ndarray:
    """Modulate symbols to N time samples; unitary, so ||s|| = ||x||."""
    x = _as_block(x)
    y = np.fft.ifft(x * _symbol_chirp(x.size, c.c2), norm="ortho")
    return y * _time_chirp(x.size, c.c1)


def daft(r, c: ChirpParams, n: int | None = None) -> np.ndarray:
    """Demodulate N time samples (prefix already removed) back to symbols."""
    r = _as_block(r)
    if n is not None and r.size != n:
        raise ValueError(f"expected {n} samples, got {r.size}")
    y = np.fft.fft(r * np.conj(_time_chirp(r.size, c.c1)), norm="ortho")
    return y * np.conj(_symbol_chirp(r.size, c.c2))


def cpp_phase(n_prefix_offsets: np.ndarray, c1: float, n: int) -> np.ndarray:
    """Prefix phase factor exp(-j 2 pi c1 (N^2 + 2 N n)) for negative offsets n."""
    return np.exp(-2j * np.pi * c1 * (n**2 + 2.0 * n * n_prefix_offsets))


def append_cpp(s, c1: float, l_cpp: int) -> np.ndarray:
    """Prepend the chirp-periodic prefix of length ``l_cpp``.

    The prefix copies the block tail with a c1-dependent phase rotation;
    when 2*N*c1 is an integer and N is even the rotation is unity and the
    prefix reduces to a plain cyclic prefix.
    """
    s = _as_block(s)
    n = s.size
    l_cpp = int(l_cpp)
    if l_cpp < 0:
        raise ValueError("prefix length must be nonnegative")
    if l_cpp >= n:
        raise ValueError(f"prefix length {l_cpp} must be shorter than the block ({n})")
    if l_cpp == 0:
        return s.copy()
    offsets = np.arange(-l_cpp, 0)
    prefix = s[n - l_cpp:] * cpp_phase(offsets, c1, n)
    return np.concatenate([prefix, s])


def oversampled_envelope(x, c2: float, oversample: int) -> np.ndarray:
    """Complex baseband envelope on the grid t = n T_s / L, n = 0 .. N L - 1.

    The time-domain quadratic chirp is unit modulus and dropped, so the
    returned samples depend on (x, c2) only; their magnitudes equal the
    continuous envelope magnitude on the oversampled grid.  At L = 1 the
    magnitudes coincide with |idaft(x, c)|.
    """
    x = _as_block(x)
    l = int(oversample)
    if l < 1:
        raise ValueError("oversampling factor must be >= 1")
    n = x.size
    y = x * _symbol_chirp(n, c2)
    return np.sqrt(n) * l * np.fft.ifft(y, n=n * l)


def oversampled_envelope_batch(x_rows: np.ndarray, c2_values: np.ndarray, oversample: int) -> np.ndarray:
    """Envelope rows for every (x row, c2) pair, x_rows (B, N) and c2 (B,)."""
    x_rows = np.atleast_2d(np.asarray(x_rows, dtype=np.complex128))
    c2_values = np.asarray(c2_values, dtype=float).reshape(-1)
    b, n = x_rows.shape
    if c2_values.size != b:
        raise ValueError("one c2 per row required")
    m2 = np.arange(n).astype(float) ** 2
    y = x_rows * np.exp(2j * np.pi * c2_values[:, None] * m2[None, :])
    return np.sqrt(n) * oversample * np.fft.ifft(y, n=n * int(oversample), axis=1)
