import itertools

import numpy as np
import pytest

from agile_afdm.daft import oversampled_envelope
from agile_afdm.papr import (
    PaprSearchConfig,
    envelope_coefficients,
    optimize_papr_c2,
    papr_db,
    papr_db_batch,
    quartic_trig_integral,
    surrogate_derivative,
    surrogate_derivative_via_table,
)

from oracles import envelope_dense, envelope_fourth_power_integral, quartic_product_quadrature


def random_block(rng, n):
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)


class TestPaprDb:
    def test_single_tone_is_zero_db(self):
        n = 16
        for m in (0, 3, 15):
            x = np.zeros(n)
            x[m] = 2.0
            assert papr_db(x, 0.3, 10) == pytest.approx(0.0, abs=1e-12)

    def test_all_ones_idft_block(self):
        # 4-point inverse DFT of all ones: impulse, peak 4x the mean
        x = np.ones(4)
        assert papr_db(x, 0.0, 1) == pytest.approx(10 * np.log10(4), abs=1e-12)
        # oversampling cannot lower the sampled peak
        dense = envelope_dense(x, 0.0, 4 * 1000)
        ref = 10 * np.log10(dense.max() ** 2 / (np.sum(np.abs(x) ** 2) / 4))
        assert papr_db(x, 0.0, 10) == pytest.approx(ref, abs=0.05)

    def test_half_period_in_c2(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            x = random_block(rng, 16)
            c2 = rng.uniform(0, 0.5)
            assert papr_db(x, c2, 10) == pytest.approx(papr_db(x, c2 + 0.5, 10), abs=1e-9)

    def test_independent_of_time_chirp(self):
        # the envelope never reads c1; any modulated block has matching moduli
        rng = np.random.default_rng(3)
        x = random_block(rng, 16)
        env = np.abs(oversampled_envelope(x, 0.2, 1))
        from agile_afdm.daft import ChirpParams, idaft

        values = []
        for c1 in (0.0, 0.123, 0.77, 0.999):
            s = idaft(x, ChirpParams(c1, 0.2))
            values.append(10 * np.log10(np.max(np.abs(s) ** 2) / np.mean(np.abs(s) ** 2)))
            np.testing.assert_allclose(np.abs(s), env, atol=1e-12)
        assert max(values) - min(values) <= 1e-12

    def test_zero_block_rejected(self):
        with pytest.raises(ValueError):
            papr_db(np.zeros(8), 0.1, 10)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(4)
        x = random_block(rng, 16)
        c2s = np.array([0.0, 0.1, 0.33])
        batch = papr_db_batch(x[None, :], c2s, 10)
        for v, c2 in zip(batch, c2s):
            assert v == pytest.approx(papr_db(x, c2, 10), abs=1e-12)


class TestEnvelopeCoefficients:
    def test_zero_c2_specializations(self):
        rng = np.random.default_rng(5)
        x = random_block(rng, 8)
        coef = envelope_coefficients(x, 0.0)
        lam_sums = np.array([coef.lam[p - 1, : 8 - p].sum() for p in range(1, 8)])
        np.testing.assert_allclose(coef.gamma1, lam_sums, atol=1e-12)
        np.testing.assert_allclose(coef.gamma3, 0.0, atol=1e-12)
        np.testing.assert_allclose(coef.rho1, 0.0, atol=1e-12)

    def test_real_block_kills_mu_terms(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal(8)
        coef = envelope_coefficients(x, 0.37)
        np.testing.assert_allclose(coef.mu, 0.0, atol=1e-14)
        for arr in (coef.gamma2, coef.gamma4, coef.rho2, coef.rho4):
            np.testing.assert_allclose(arr, 0.0, atol=1e-12)

    def test_reconstructs_envelope_power(self):
        # (|s(t)|^2 - mean) * N/2 equals g(t) built from the coefficients
        rng = np.random.default_rng(7)
        n = 6
        x = random_block(rng, n)
        c2 = 0.13
        coef = envelope_coefficients(x, c2)
        tau = np.linspace(0, 2 * np.pi, 1500, endpoint=False)
        p = np.arange(1, n)
        g = np.cos(np.outer(tau, p)) @ coef.cos_coeffs + np.sin(np.outer(tau, p)) @ coef.sin_coeffs
        env = envelope_dense(x, c2, 1500)
        g_from_env = (env**2 - np.sum(np.abs(x) ** 2) / n) * n / 2
        np.testing.assert_allclose(g, g_from_env, atol=1e-10)


class TestQuarticIntegral:
    def test_worked_all_cos_example(self):
        assert quartic_trig_integral(("cos",) * 4, 2, 4, 1, 5) == pytest.approx(np.pi / 4)

    def test_odd_sine_count_vanishes(self):
        for kinds in (("sin", "cos", "cos", "cos"), ("cos", "sin", "sin", "sin")):
            for idx in itertools.product(range(1, 4), repeat=4):
                assert quartic_trig_integral(kinds, *idx) == 0.0

    def test_exhaustive_against_quadrature_n6(self):
        kinds_all = list(itertools.product(("cos", "sin"), repeat=4))
        t = np.linspace(0, 2 * np.pi, 10_001)
        cache = {("cos", k): np.cos(k * t) for k in range(1, 6)}
        cache.update({("sin", k): np.sin(k * t) for k in range(1, 6)})
        for kinds in kinds_all:
            for k, l, m, n in itertools.product(range(1, 6), repeat=4):
                prod = cache[(kinds[0], k)] * cache[(kinds[1], l)] * cache[(kinds[2], m)] * cache[(kinds[3], n)]
                ref = np.trapezoid(prod, t)
                val = quartic_trig_integral(kinds, k, l, m, n)
                assert abs(val - ref) <= 1e-8, (kinds, k, l, m, n)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            quartic_trig_integral(("cos", "cos", "cos"), 1, 1, 1, 1)
        with pytest.raises(ValueError):
            quartic_trig_integral(("cos",) * 4, 0, 1, 1, 1)


class TestSurrogateDerivative:
    def test_single_tone_flat(self):
        x = np.zeros(8)
        x[3] = 1.0
        for c2 in (0.0, 0.17, 0.44):
            assert surrogate_derivative(x, c2) == pytest.approx(0.0, abs=1e-12)

    def test_matches_table_assembly(self):
        rng = np.random.default_rng(8)
        for n in (4, 6):
            x = random_block(rng, n)
            for c2 in (0.05, 0.21):
                fast = surrogate_derivative(x, c2)
                slow = surrogate_derivative_via_table(x, c2)
                assert fast == pytest.approx(slow, rel=1e-9, abs=1e-9)

    def test_matches_finite_difference_of_quadrature(self):
        rng = np.random.default_rng(9)
        h = 1e-6
        for trial in range(20):
            x = random_block(rng, 8)
            c2 = rng.uniform(0.01, 0.49)
            ana = surrogate_derivative(x, c2)
            num = (
                envelope_fourth_power_integral(x, c2 + h)
                - envelope_fourth_power_integral(x, c2 - h)
            ) / (2 * h)
            assert ana == pytest.approx(num, rel=1e-4, abs=1e-6)

    def test_sign_consistent_with_scanned_surrogate(self):
        rng = np.random.default_rng(10)
        x = random_block(rng, 8)
        grid = np.linspace(0.0, 0.5, 60, endpoint=False)
        ivals = np.array([envelope_fourth_power_integral(x, c, n_points=4000) for c in grid])
        drops = np.flatnonzero((ivals[:-2] > ivals[1:-1]) & (ivals[1:-1] > ivals[2:]))
        assert drops.size > 0
        steepest = drops[np.argmax(ivals[drops] - ivals[drops + 2])]
        assert surrogate_derivative(x, grid[steepest + 1]) < 0


class TestOptimizer:
    def test_single_tone_block(self):
        x = np.zeros(16)
        x[5] = 1.0
        res = optimize_papr_c2(x, PaprSearchConfig(oversample=10))
        assert res.papr_db == pytest.approx(0.0, abs=1e-9)
        assert 0.0 <= res.c2 < 0.5

    def test_matches_budgeted_exhaustive_search(self):
        # oracle: exhaustive scan of [0, 1/2) under the same evaluation
        # budget, i.e. the best of eval_budget evenly spaced fine points
        cfg = PaprSearchConfig(oversample=10)
        blind = np.arange(cfg.eval_budget) / cfg.eval_budget * 0.5
        for seed in (0, 1, 2, 3, 4):
            rng = np.random.default_rng(seed)
            x = random_block(rng, 8)
            res = optimize_papr_c2(x, cfg)
            oracle = papr_db_batch(x[None, :], blind, cfg.oversample).min()
            assert res.papr_db <= oracle + 0.01

    def test_budget_respected(self):
        rng = np.random.default_rng(11)
        x = random_block(rng, 16)
        cfg = PaprSearchConfig(eval_budget=16)
        res = optimize_papr_c2(x, cfg)
        assert res.papr_evals <= 16

    def test_fallback_uses_coarse_grid(self):
        # hunt for a block whose derivative has no qualifying sign change
        # on a deliberately coarse scan, forcing the fallback branch
        cfg = PaprSearchConfig(coarse_step=1.0 / 4.0, fine_step=1.0 / 8.0, eval_budget=8)
        found = False
        for seed in range(200):
            rng = np.random.default_rng(seed)
            x = random_block(rng, 8)
            d0 = surrogate_derivative(x, 0.0)
            d1 = surrogate_derivative(x, 0.25)
            if (d0 > 0 and d1 > 0) or (d0 < 0 and d1 < 0):
                res = optimize_papr_c2(x, cfg)
                assert res.papr_evals == 2
                assert res.c2 in (0.0, 0.25)
                found = True
                break
        assert found

    def test_improves_on_average(self):
        rng = np.random.default_rng(12)
        cfg = PaprSearchConfig(oversample=4)
        gains = []
        for _ in range(30):
            x = random_block(rng, 16)
            res = optimize_papr_c2(x, cfg)
            gains.append(papr_db(x, 0.0, 4) - res.papr_db)
        assert np.mean(gains) > 0.5

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PaprSearchConfig(coarse_step=1 / 80, fine_step=1 / 77)
        with pytest.raises(ValueError):
            PaprSearchConfig(eval_budget=0)
