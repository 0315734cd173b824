"""Envelope peak analysis and the per-block c2 search.

The squared envelope of a modulated block is a trigonometric polynomial

    |s(t)|^2 = ||x||^2 / N + (2/N) g(t),
    g(t) = sum_p a_p(c2) cos(2 pi p t / T) + b_p(c2) sin(2 pi p t / T),

whose harmonic coefficients depend on the data only through the pairwise
products x[m+p] x*[m] and on c2 through the phases beta = 2 pi c2 p (2m+p).
PAPR therefore depends on c2 alone, with period 1/2.

The smooth surrogate I(c2) = integral of g^4 over one period has an exact
derivative: products of four harmonics integrate to zero unless their
signed frequencies cancel.  I' = 4 * integral of g^3 dg/dc2 is evaluated
exactly on a uniform grid of 4N phase samples (one period; the integrand
has bandwidth 4(N-1), so the discrete mean is alias-free), which is the
same delta bookkeeping as the term-by-term table assembly kept around as
a cross-check.  The optimizer scans I' for descending-to-ascending sign
changes on a coarse grid, refines each bracket on a fine grid, and only
then spends envelope evaluations on the surviving candidates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .daft import oversampled_envelope, oversampled_envelope_batch

QUARTIC_TABLE = np.array(
    [
        [0, 1, 1, 1, 1, 1, 1, 1],     # cos cos cos cos
        [0, 0, 0, 0, 0, 0, 0, 0],     # cos cos cos sin
        [0, 0, 0, 0, 0, 0, 0, 0],     # cos cos sin cos
        [0, -1, 1, 1, -1, -1, 1, 1],  # cos cos sin sin
        [0, 0, 0, 0, 0, 0, 0, 0],     # cos sin cos cos
        [0, 1, 1, -1, 1, -1, -1, 1],  # cos sin cos sin
        [0, 1, -1, 1, 1, -1, 1, -1],  # cos sin sin cos
        [0, 0, 0, 0, 0, 0, 0, 0],     # cos sin sin sin
        [0, 0, 0, 0, 0, 0, 0, 0],     # sin cos cos cos
        [0, 1, 1, -1, -1, 1, 1, -1],  # sin cos cos sin
        [0, 1, -1, 1, -1, 1, -1, 1],  # sin cos sin cos
        [0, 0, 0, 0, 0, 0, 0, 0],     # sin cos sin sin
        [0, -1, -1, -1, 1, 1, 1, 1],  # sin sin cos cos
        [0, 0, 0, 0, 0, 0, 0, 0],     # sin sin cos sin
        [0, 0, 0, 0, 0, 0, 0, 0],     # sin sin sin cos
        [0, 1, -1, -1, -1, -1, 1, 1], # sin sin sin sin
    ],
    dtype=float,
)


@dataclass(frozen=True)
class PaprSearchConfig:
    coarse_step: float = 1.0 / 80.0
    fine_step: float = 1.0 / 3120.0
    eval_budget: int = 128
    oversample: int = 10

    def __post_init__(self):
        if self.coarse_step <= 0 or self.fine_step <= 0:
            raise ValueError("step sizes must be positive")
        ratio = self.coarse_step / self.fine_step
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("fine step must divide the coarse step evenly")
        if self.eval_budget < 1:
            raise ValueError("evaluation budget must be positive")

    @property
    def refine_factor(self) -> int:
        return int(round(self.coarse_step / self.fine_step))


@dataclass
class EnvelopeCoefficients:
    """Harmonic coefficients of g and of its c2-derivative.

    lam/mu hold Re/Im of x[m+p] x*[m] (row p-1, column m; c2-independent).
    gamma1..4 are the four harmonic sums entering g; rho1..4 the
    corresponding derivative sums (without the 2 pi phase-rate factor).
    """

    lam: np.ndarray
    mu: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    gamma3: np.ndarray
    gamma4: np.ndarray
    rho1: np.ndarray
    rho2: np.ndarray
    rho3: np.ndarray
    rho4: np.ndarray

    @property
    def cos_coeffs(self) -> np.ndarray:
        """a_p: cosine-harmonic coefficients of g, p = 1..N-1."""
        return self.gamma1 + self.gamma2

    @property
    def sin_coeffs(self) -> np.ndarray:
        """b_p: sine-harmonic coefficients of g, p = 1..N-1."""
        return self.gamma3 + self.gamma4

    @property
    def dcos_coeffs(self) -> np.ndarray:
        """Cosine coefficients of dg/dc2 (includes the 2 pi factor)."""
        return 2.0 * np.pi * (self.rho1 + self.rho2)

    @property
    def dsin_coeffs(self) -> np.ndarray:
        """Sine coefficients of dg/dc2 (includes the 2 pi factor)."""
        return 2.0 * np.pi * (self.rho3 + self.rho4)


def papr_db(x, c2: float, oversample: int) -> float:
    """Peak-to-average power ratio of the oversampled envelope, in dB.

    The average power is the exact block mean ||x||^2 / N; the oscillating
    part of |s(t)|^2 integrates to zero over a period.
    """
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    energy = float(np.sum(np.abs(x) ** 2))
    if energy == 0.0:
        raise ValueError("zero block has no defined PAPR")
    env = oversampled_envelope(x, c2, oversample)
    peak = float(np.max(np.abs(env) ** 2))
    return 10.0 * np.log10(peak / (energy / x.size))


def papr_db_batch(x_rows: np.ndarray, c2_values, oversample: int) -> np.ndarray:
    """papr_db for several (block row, c2) pairs at once."""
    x_rows = np.atleast_2d(np.asarray(x_rows, dtype=np.complex128))
    c2_values = np.asarray(c2_values, dtype=float).reshape(-1)
    if x_rows.shape[0] == 1 and c2_values.size > 1:
        x_rows = np.repeat(x_rows, c2_values.size, axis=0)
    energy = np.sum(np.abs(x_rows) ** 2, axis=1)
    if np.any(energy == 0):
        raise ValueError("zero block has no defined PAPR")
    env = oversampled_envelope_batch(x_rows, c2_values, oversample)
    peak = np.max(np.abs(env) ** 2, axis=1)
    return 10.0 * np.log10(peak / (energy / x_rows.shape[1]))


def envelope_coefficients(x, c2: float) -> EnvelopeCoefficients:
    """All harmonic coefficient vectors of g and dg/dc2 at this c2."""
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    n = x.size
    lam = np.zeros((n - 1, n))
    mu = np.zeros((n - 1, n))
    g1 = np.zeros(n - 1)
    g2 = np.zeros(n - 1)
    g3 = np.zeros(n - 1)
    g4 = np.zeros(n - 1)
    r1 = np.zeros(n - 1)
    r2 = np.zeros(n - 1)
    r3 = np.zeros(n - 1)
    r4 = np.zeros(n - 1)
    for p in range(1, n):
        prod = x[p:] * np.conj(x[: n - p])
        lam_p = prod.real
        mu_p = prod.imag
        lam[p - 1, : n - p] = lam_p
        mu[p - 1, : n - p] = mu_p
        m = np.arange(n - p, dtype=float)
        rate = p * (2.0 * m + p)
        beta = 2.0 * np.pi * c2 * rate
        cb = np.cos(beta)
        sb = np.sin(beta)
        g1[p - 1] = np.dot(lam_p, cb)
        g2[p - 1] = -np.dot(mu_p, sb)
        g3[p - 1] = -np.dot(lam_p, sb)
        g4[p - 1] = -np.dot(mu_p, cb)
        r1[p - 1] = -np.dot(rate * lam_p, sb)
        r2[p - 1] = -np.dot(rate * mu_p, cb)
        r3[p - 1] = -np.dot(rate * lam_p, cb)
        r4[p - 1] = np.dot(rate * mu_p, sb)
    return EnvelopeCoefficients(lam, mu, g1, g2, g3, g4, r1, r2, r3, r4)


def quartic_trig_integral(kinds, k: int, l: int, m: int, n: int) -> float:
    """Integral over [0, 2 pi] of w1(kt) w2(lt) w3(mt) w4(nt).

    kinds is a length-4 sequence of "cos"/"sin".  The value is (pi/4)
    times a signed count of the frequency combinations +-k +-l +-m +-n
    that cancel; products with an odd number of sines integrate to zero.
    """
    if len(kinds) != 4 or any(w not in ("cos", "sin") for w in kinds):
        raise ValueError("kinds must be four 'cos'/'sin' flags")
    for idx in (k, l, m, n):
        if int(idx) != idx or idx < 1:
            raise ValueError("harmonic indices must be positive integers")
    row = 8 * (kinds[0] == "sin") + 4 * (kinds[1] == "sin") + 2 * (kinds[2] == "sin") + (kinds[3] == "sin")
    deltas = np.array(
        [
            k + l + m + n,
            k + l - m - n,
            k + l + m - n,
            k + l - m + n,
            k - l + m + n,
            k - l - m - n,
            k - l + m - n,
            k - l - m + n,
        ]
    ) == 0
    return float(np.pi / 4.0 * np.dot(QUARTIC_TABLE[row], deltas))


class BlockHarmonics:
    """Compressed data products of one block, reused across c2 evaluations.

    Zero products (inactive tone pairs) are dropped, which makes sparse
    multi-user blocks cheap; segment boundaries keep per-harmonic sums
    reducible in one pass.
    """

    def __init__(self, x):
        x = np.asarray(x, dtype=np.complex128).reshape(-1)
        self.n = x.size
        lam_parts = []
        mu_parts = []
        rate_parts = []
        p_parts = []
        for p in range(1, self.n):
            prod = x[p:] * np.conj(x[: self.n - p])
            m = np.flatnonzero(np.abs(prod) > 0.0)
            lam_parts.append(prod.real[m])
            mu_parts.append(prod.imag[m])
            rate_parts.append(p * (2.0 * m.astype(float) + p))
            p_parts.append(np.full(m.size, p - 1, dtype=np.intp))
        self.lam = np.concatenate(lam_parts) if lam_parts else np.zeros(0)
        self.mu = np.concatenate(mu_parts) if mu_parts else np.zeros(0)
        self.rate = np.concatenate(rate_parts) if rate_parts else np.zeros(0)
        p_idx = np.concatenate(p_parts) if p_parts else np.zeros(0, dtype=np.intp)
        self.collect = np.zeros((self.lam.size, self.n - 1))
        self.collect[np.arange(self.lam.size), p_idx] = 1.0

    def harmonic_coeffs(self, c2_values: np.ndarray):
        """(a, b, da, db) arrays of shape (len(c2_values), N-1)."""
        c2_values = np.asarray(c2_values, dtype=float).reshape(-1)
        if self.lam.size == 0:
            zeros = np.zeros((c2_values.size, self.n - 1))
            return zeros, zeros.copy(), zeros.copy(), zeros.copy()
        beta = 2.0 * np.pi * np.outer(c2_values, self.rate)
        cb = np.cos(beta)
        sb = np.sin(beta)
        a_el = self.lam * cb - self.mu * sb
        b_el = -self.lam * sb - self.mu * cb
        a = a_el @ self.collect
        b = b_el @ self.collect
        da = 2.0 * np.pi * ((self.rate * b_el) @ self.collect)
        db = -2.0 * np.pi * ((self.rate * a_el) @ self.collect)
        return a, b, da, db


@lru_cache(maxsize=8)
def _phase_tables(n: int):
    """cos/sin of p * tau on the 4N-point alias-free grid, (N-1, 4N)."""
    k = 4 * n
    tau = 2.0 * np.pi * np.arange(k) / k
    p = np.arange(1, n, dtype=float)
    return np.cos(np.outer(p, tau)), np.sin(np.outer(p, tau))


def surrogate_derivative_batch(x, c2_values) -> np.ndarray:
    """Exact I'(c2) for many c2 at once (see surrogate_derivative)."""
    harmonics = x if isinstance(x, BlockHarmonics) else BlockHarmonics(x)
    return _derivative_from_harmonics(harmonics, np.asarray(c2_values, dtype=float).reshape(-1))


def _derivative_from_harmonics(harmonics: BlockHarmonics, c2_values: np.ndarray) -> np.ndarray:
    a, b, da, db = harmonics.harmonic_coeffs(c2_values)
    cos_t, sin_t = _phase_tables(harmonics.n)
    g = a @ cos_t + b @ sin_t
    dg = da @ cos_t + db @ sin_t
    return 4.0 * 2.0 * np.pi * np.mean(g**3 * dg, axis=1)


def surrogate_derivative(x, c2: float) -> float:
    """Exact derivative of I(c2) = integral over [0, 2 pi] of g^4.

    I' = 4 * integral of g^3 dg/dc2.  The integrand has bandwidth
    4(N-1) < 4N, so averaging over 4N uniform phase samples gives the
    integral exactly (all surviving frequency quadruples are the
    +-k +-l +-m +-n = 0 combinations of the product table).  One period
    is rescaled to [0, 2 pi]; the constant scale does not affect sign
    changes or minimizer locations.
    """
    return float(surrogate_derivative_batch(x, [c2])[0])


def surrogate_derivative_via_table(x, c2: float) -> float:
    """I'(c2) assembled term by term through quartic_trig_integral.

    Literal quadruple sum over harmonic indices and cos/sin patterns;
    O(N^4), intended as a cross-check for small N.
    """
    coef = envelope_coefficients(x, c2)
    a, b = coef.cos_coeffs, coef.sin_coeffs
    r, s = coef.dcos_coeffs, coef.dsin_coeffs
    nm1 = a.size
    total = 0.0
    coeff = {"cos": (a, r), "sin": (b, s)}
    for w1 in ("cos", "sin"):
        for w2 in ("cos", "sin"):
            for w3 in ("cos", "sin"):
                for w4 in ("cos", "sin"):
                    c1v = coeff[w1][0]
                    c2v = coeff[w2][0]
                    c3v = coeff[w3][0]
                    c4v = coeff[w4][1]
                    for k in range(1, nm1 + 1):
                        for l in range(1, nm1 + 1):
                            for m in range(1, nm1 + 1):
                                for nn in range(1, nm1 + 1):
                                    integral = quartic_trig_integral((w1, w2, w3, w4), k, l, m, nn)
                                    if integral != 0.0:
                                        total += c1v[k - 1] * c2v[l - 1] * c3v[m - 1] * c4v[nn - 1] * integral
    return 4.0 * total


@dataclass
class PaprOptResult:
    c2: float
    papr_db: float
    papr_evals: int
    candidates: np.ndarray = field(default_factory=lambda: np.array([]))


def optimize_papr_c2(x, cfg: PaprSearchConfig | None = None) -> PaprOptResult:
    """Coarse-to-fine search for the c2 minimizing the block's PAPR.

    Scans I' on the coarse grid over [0, 1/2), brackets descending-to-
    ascending sign changes, refines each bracket at the fine step, keeps
    fine points that still bracket a sign change, and picks the best
    candidate by measured PAPR.  Envelope evaluations are capped by the
    budget; I' evaluations are analytic and not charged against it.
    Falls back to the best coarse-grid point when no candidate survives.
    """
    if cfg is None:
        cfg = PaprSearchConfig()
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    harmonics = BlockHarmonics(x)
    coarse = np.arange(int(np.floor(0.5 / cfg.coarse_step))) * cfg.coarse_step
    d_coarse = surrogate_derivative_batch(harmonics, coarse)
    d_next = np.roll(d_coarse, -1)  # period 1/2: the point after the last is c = 0

    bracket_lo = coarse[(d_coarse <= 0.0) & (d_next >= 0.0)]
    if bracket_lo.size:
        # one extra offset so every fine point has its successor evaluated
        offsets = np.arange(cfg.refine_factor + 2) * cfg.fine_step
        fine_ext = bracket_lo[:, None] + offsets[None, :]
        d_fine = surrogate_derivative_batch(harmonics, fine_ext.ravel()).reshape(fine_ext.shape)
        keep = (d_fine[:, :-1] <= 0.0) & (d_fine[:, 1:] >= 0.0)
        candidates = np.unique(fine_ext[:, :-1][keep] % 0.5)[: cfg.eval_budget]
    else:
        candidates = np.array([])

    if candidates.size == 0:
        candidates = coarse[: cfg.eval_budget]

    values = papr_db_batch(x[None, :], candidates, cfg.oversample)
    best = int(np.argmin(values))
    return PaprOptResult(float(candidates[best]), float(values[best]), int(candidates.size), candidates)
