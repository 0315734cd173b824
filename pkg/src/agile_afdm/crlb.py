"""Estimation bounds for monostatic delay/Doppler sensing.

With the reflection coefficient unknown, the information available about
delay and Doppler is the part of the derivative signals u_l, u_nu that
survives projection away from the reference signal u:

    Phi_l  = ||u_l||^2  - |<u_l, u>|^2 / ||u||^2,
    Phi_nu = ||u_nu||^2 - |<u_nu, u>|^2 / ||u||^2,
    Xi     = Re<u_l, u_nu> - Re{<u_l, u><u, u_nu>} / ||u||^2,

and the bounds follow from inverting the 2x2 effective information matrix
2 snr [[Phi_l, Xi], [Xi, Phi_nu]].  Derivative signals come from central
differences of the closed-form channel, which is continuous in both the
(fractional) delay and the Doppler.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import SensingTarget, alignment_row
from .daft import ChirpParams

DEFAULT_FD_STEP_DELAY = 1e-4
DEFAULT_FD_STEP_DOPPLER = 1e-4
SINGULARITY_RTOL = 1e-12


class UnidentifiableError(ValueError):
    """Effective information matrix is (near-)singular for this setup."""


@dataclass(frozen=True)
class FimSummary:
    phi_delay: float
    phi_doppler: float
    coupling: float
    snr: float
    norm_u_l2: float
    norm_u_nu2: float
    re_ul_unu: float
    ip_ul_u: complex
    ip_unu_u: complex
    norm_u2: float

    @property
    def effective_fim(self) -> np.ndarray:
        return 2.0 * self.snr * np.array(
            [[self.phi_delay, self.coupling], [self.coupling, self.phi_doppler]]
        )


def _unit_reference(c_points: np.ndarray, delay, doppler, x: np.ndarray) -> np.ndarray:
    """u = G(l, nu) x for a batch of (c1, c2) and broadcastable (l, nu).

    Same circulant evaluation as the communication path, with unit
    reflection; rows of the output correspond to rows of c_points.
    """
    c_points = np.atleast_2d(np.asarray(c_points, dtype=float))
    n = x.size
    q = np.arange(n, dtype=float)
    c1 = c_points[:, 0]
    c2 = c_points[:, 1]
    delay = np.broadcast_to(np.asarray(delay, dtype=float), c1.shape)
    doppler = np.broadcast_to(np.asarray(doppler, dtype=float), c1.shape)

    offset = doppler + 2.0 * n * c1 * delay
    rows = alignment_row(offset, n)  # (M, N)
    scal = np.exp(2j * np.pi * c1 * delay**2)
    chirp2 = np.exp(2j * np.pi * c2[:, None] * q[None, :] ** 2)
    shift = np.exp(-2j * np.pi * np.outer(delay, q) / n)
    v = x[None, :] * chirp2 * shift
    conv = np.fft.ifft(np.fft.fft(rows, axis=1) * np.fft.fft(v, axis=1), axis=1)
    return (scal[:, None] / n) * np.conj(chirp2) * conv


def reference_signal(
    target: SensingTarget,
    c: ChirpParams,
    x,
    fd_step_delay: float = DEFAULT_FD_STEP_DELAY,
    fd_step_doppler: float = DEFAULT_FD_STEP_DOPPLER,
):
    """(u, u_l, u_nu) with the reflection coefficient factored out."""
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    pts = np.array([[c.c1, c.c2]] * 5)
    delays = np.array(
        [target.delay, target.delay + fd_step_delay, target.delay - fd_step_delay, target.delay, target.delay]
    )
    dopplers = np.array(
        [target.doppler, target.doppler, target.doppler, target.doppler + fd_step_doppler, target.doppler - fd_step_doppler]
    )
    sig = _unit_reference(pts, delays, dopplers, x)
    u = sig[0]
    u_l = (sig[1] - sig[2]) / (2.0 * fd_step_delay)
    u_nu = (sig[3] - sig[4]) / (2.0 * fd_step_doppler)
    return u, u_l, u_nu


def fim_summary(target: SensingTarget, c: ChirpParams, x, snr: float) -> FimSummary:
    """Projection-corrected information terms plus the raw inner products."""
    u, u_l, u_nu = reference_signal(target, c, x)
    return summary_from_signals(u, u_l, u_nu, snr)


def summary_from_signals(u, u_l, u_nu, snr: float) -> FimSummary:
    norm_u2 = float(np.vdot(u, u).real)
    if norm_u2 == 0.0:
        raise ValueError("degenerate setup: reference signal has zero energy")
    norm_ul2 = float(np.vdot(u_l, u_l).real)
    norm_unu2 = float(np.vdot(u_nu, u_nu).real)
    ip_ul_u = complex(np.vdot(u_l, u))
    ip_unu_u = complex(np.vdot(u_nu, u))
    ip_ul_unu = complex(np.vdot(u_l, u_nu))
    phi_l = norm_ul2 - abs(ip_ul_u) ** 2 / norm_u2
    phi_nu = norm_unu2 - abs(ip_unu_u) ** 2 / norm_u2
    xi = ip_ul_unu.real - (ip_ul_u * np.conj(ip_unu_u)).real / norm_u2
    return FimSummary(
        phi_delay=phi_l,
        phi_doppler=phi_nu,
        coupling=xi,
        snr=float(snr),
        norm_u_l2=norm_ul2,
        norm_u_nu2=norm_unu2,
        re_ul_unu=ip_ul_unu.real,
        ip_ul_u=ip_ul_u,
        ip_unu_u=ip_unu_u,
        norm_u2=norm_u2,
    )


def full_fim(target: SensingTarget, c: ChirpParams, x, noise_power: float) -> np.ndarray:
    """Complete 4x4 information matrix over (delay, Doppler, Re alpha, Im alpha)."""
    u, u_l, u_nu = reference_signal(target, c, x)
    alpha = complex(target.reflection)
    d_chi = np.stack([alpha * u_l, alpha * u_nu, u, 1j * u], axis=0)
    j = np.zeros((4, 4))
    for a in range(4):
        for b in range(4):
            j[a, b] = (2.0 / noise_power) * np.vdot(d_chi[a], d_chi[b]).real
    return j


def _invert_2x2(phi_l: float, phi_nu: float, xi: float, snr: float):
    det = phi_l * phi_nu - xi**2
    if det <= SINGULARITY_RTOL * abs(phi_l * phi_nu) or det <= 0.0:
        raise UnidentifiableError(
            f"effective information matrix is singular (det={det:.3e}); "
            "delay and Doppler are not jointly identifiable here"
        )
    scale = 2.0 * snr * det
    return phi_nu / scale, phi_l / scale


def crlb(summary: FimSummary):
    """(bound on delay variance, bound on Doppler variance)."""
    return _invert_2x2(summary.phi_delay, summary.phi_doppler, summary.coupling, summary.snr)


def crlb_ideal(summary: FimSummary):
    """Bounds if the reflection coefficient were known (no projection loss)."""
    return _invert_2x2(summary.norm_u_l2, summary.norm_u_nu2, summary.re_ul_unu, summary.snr)


def crlb_batch(c_points: np.ndarray, target: SensingTarget, x, snr: float):
    """Vectorized bounds over many (c1, c2) points.

    Returns (crlb_delay, crlb_doppler) arrays with NaN at unidentifiable
    points (near-singular effective information matrix).
    """
    c_points = np.atleast_2d(np.asarray(c_points, dtype=float))
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    m = c_points.shape[0]
    base = np.tile(c_points, (5, 1))
    delays = np.concatenate(
        [
            np.full(m, target.delay),
            np.full(m, target.delay + DEFAULT_FD_STEP_DELAY),
            np.full(m, target.delay - DEFAULT_FD_STEP_DELAY),
            np.full(m, target.delay),
            np.full(m, target.delay),
        ]
    )
    dopplers = np.concatenate(
        [
            np.full(m, target.doppler),
            np.full(m, target.doppler),
            np.full(m, target.doppler),
            np.full(m, target.doppler + DEFAULT_FD_STEP_DOPPLER),
            np.full(m, target.doppler - DEFAULT_FD_STEP_DOPPLER),
        ]
    )
    sig = _unit_reference(base, delays, dopplers, x)
    u = sig[:m]
    u_l = (sig[m: 2 * m] - sig[2 * m: 3 * m]) / (2.0 * DEFAULT_FD_STEP_DELAY)
    u_nu = (sig[3 * m: 4 * m] - sig[4 * m:]) / (2.0 * DEFAULT_FD_STEP_DOPPLER)

    norm_u2 = np.sum(np.abs(u) ** 2, axis=1)
    norm_ul2 = np.sum(np.abs(u_l) ** 2, axis=1)
    norm_unu2 = np.sum(np.abs(u_nu) ** 2, axis=1)
    ip_ul_u = np.sum(np.conj(u_l) * u, axis=1)
    ip_unu_u = np.sum(np.conj(u_nu) * u, axis=1)
    ip_ul_unu = np.sum(np.conj(u_l) * u_nu, axis=1)

    phi_l = norm_ul2 - np.abs(ip_ul_u) ** 2 / norm_u2
    phi_nu = norm_unu2 - np.abs(ip_unu_u) ** 2 / norm_u2
    xi = ip_ul_unu.real - (ip_ul_u * np.conj(ip_unu_u)).real / norm_u2

    det = phi_l * phi_nu - xi**2
    bad = (det <= SINGULARITY_RTOL * np.abs(phi_l * phi_nu)) | (det <= 0.0)
    scale = 2.0 * snr * det
    with np.errstate(divide="ignore", invalid="ignore"):
        c_l = np.where(bad, np.nan, phi_nu / scale)
        c_nu = np.where(bad, np.nan, phi_l / scale)
    return c_l, c_nu


def crlb_grid(target: SensingTarget, x, snr: float, resolution: int, chunk: int = 2500):
    """Both bounds on the resolution x resolution parameter grid."""
    grid = np.arange(resolution) / resolution
    pts = np.stack(np.meshgrid(grid, grid, indexing="ij"), axis=-1).reshape(-1, 2)
    out_l = np.empty(pts.shape[0])
    out_nu = np.empty(pts.shape[0])
    for start in range(0, pts.shape[0], chunk):
        sl = slice(start, min(start + chunk, pts.shape[0]))
        out_l[sl], out_nu[sl] = crlb_batch(pts[sl], target, x, snr)
    return out_l.reshape(resolution, resolution), out_nu.reshape(resolution, resolution)


def sensitivity_rv_cv(values) -> tuple[float, float]:
    """Relative variation and coefficient of variation of a bound grid, in %.

    RV = (max - min) / min * 100, CV = population std / mean * 100.
    Requires at least two finite values and a strictly positive minimum.
    """
    values = np.asarray(values, dtype=float).ravel()
    finite = values[np.isfinite(values)]
    if finite.size < 2:
        raise ValueError("need at least two finite values")
    vmin = finite.min()
    if vmin <= 0:
        raise ValueError("bounds must be strictly positive")
    rv = (finite.max() - vmin) / vmin * 100.0
    cv = finite.std() / finite.mean() * 100.0
    return float(rv), float(cv)
