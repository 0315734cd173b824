import numpy as np
import pytest

from agile_afdm.daft import ChirpParams, idaft, daft, append_cpp, oversampled_envelope

from oracles import idaft_direct, dft_matrix, envelope_dense


def random_block(rng, n):
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)


class TestChirpParams:
    def test_wraps_modulo_one(self):
        c = ChirpParams(1.25, -0.3)
        assert c.c1 == pytest.approx(0.25)
        assert c.c2 == pytest.approx(0.7)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            ChirpParams(np.nan, 0.0)
        with pytest.raises(ValueError):
            ChirpParams(0.0, np.inf)


class TestIdaft:
    def test_impulse_gives_constant_modulus_chirp(self):
        n = 16
        x = np.zeros(n)
        x[0] = 1.0
        c = ChirpParams(0.3, 0.8)
        s = idaft(x, c)
        t = np.arange(n)
        expected = np.exp(2j * np.pi * c.c1 * t.astype(float) ** 2) / np.sqrt(n)
        np.testing.assert_allclose(s, expected, atol=1e-12)
        np.testing.assert_allclose(np.abs(s), 1 / np.sqrt(n), atol=1e-12)

    def test_zero_chirps_reduce_to_inverse_dft(self):
        rng = np.random.default_rng(7)
        n = 32
        x = random_block(rng, n)
        s = idaft(x, ChirpParams(0.0, 0.0))
        expected = dft_matrix(n).conj().T @ x
        np.testing.assert_allclose(s, expected, atol=1e-10)

    def test_matches_direct_summation(self):
        rng = np.random.default_rng(11)
        n = 8
        x = random_block(rng, n)
        c = ChirpParams(0.37, 0.11)
        s = idaft(x, c)
        np.testing.assert_allclose(s, idaft_direct(x, c.c1, c.c2), atol=1e-12)

    def test_rejects_empty_block(self):
        with pytest.raises(ValueError):
            idaft(np.array([]), ChirpParams(0.1, 0.1))


class TestDaft:
    @pytest.mark.parametrize("n", [8, 16, 64])
    def test_round_trip_and_parseval(self, n):
        rng = np.random.default_rng(n)
        for _ in range(100):
            x = random_block(rng, n)
            c = ChirpParams(rng.uniform(), rng.uniform())
            s = idaft(x, c)
            back = daft(s, c)
            assert np.linalg.norm(back - x) / np.linalg.norm(x) <= 1e-10
            # energy conservation in both directions
            assert abs(np.linalg.norm(s) ** 2 - np.linalg.norm(x) ** 2) <= 1e-12 * np.linalg.norm(x) ** 2
            assert abs(np.linalg.norm(daft(s, c)) ** 2 - np.linalg.norm(s) ** 2) <= 1e-12 * np.linalg.norm(s) ** 2

    def test_zero_chirps_reduce_to_forward_dft(self):
        rng = np.random.default_rng(5)
        n = 16
        r = random_block(rng, n)
        y = daft(r, ChirpParams(0.0, 0.0))
        np.testing.assert_allclose(y, dft_matrix(n) @ r, atol=1e-10)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            daft(np.ones(8), ChirpParams(0.1, 0.1), n=16)


class TestCpp:
    def test_zero_length_prefix_is_identity(self):
        rng = np.random.default_rng(3)
        s = random_block(rng, 8)
        np.testing.assert_array_equal(append_cpp(s, 0.3, 0), s)

    def test_prefix_phase_rule(self):
        rng = np.random.default_rng(4)
        n, c1, l_cpp = 8, 0.3, 2
        s = random_block(rng, n)
        out = append_cpp(s, c1, l_cpp)
        assert out.size == n + l_cpp
        # sample at offset -1 sits last in the prefix
        expected = s[7] * np.exp(-2j * np.pi * 0.3 * (64 - 16))
        np.testing.assert_allclose(out[l_cpp - 1], expected, atol=1e-12)
        for j, off in enumerate(range(-l_cpp, 0)):
            ref = s[n + off] * np.exp(-2j * np.pi * c1 * (n**2 + 2 * n * off))
            np.testing.assert_allclose(out[j], ref, atol=1e-12)

    def test_reduces_to_plain_cyclic_prefix(self):
        # 2 N c1 integer and N even: phase factor is exactly 1
        rng = np.random.default_rng(9)
        n, l_cpp = 8, 3
        s = random_block(rng, n)
        for k in (1, 2, 5):
            c1 = k / (2 * n)
            out = append_cpp(s, c1, l_cpp)
            np.testing.assert_allclose(out[:l_cpp], s[n - l_cpp:], atol=1e-12)

    def test_prefix_too_long_rejected(self):
        with pytest.raises(ValueError):
            append_cpp(np.ones(8), 0.1, 8)


class TestOversampledEnvelope:
    def test_no_oversampling_matches_idaft_modulus(self):
        rng = np.random.default_rng(13)
        n = 16
        x = random_block(rng, n)
        env = oversampled_envelope(x, 0.45, 1)
        for c1 in (0.0, 0.2, 0.77):
            s = idaft(x, ChirpParams(c1, 0.45))
            np.testing.assert_allclose(np.abs(env), np.abs(s), atol=1e-12)

    def test_single_tone_constant_modulus(self):
        n = 16
        for m in (0, 5, 15):
            x = np.zeros(n)
            x[m] = 1.0
            env = oversampled_envelope(x, 0.2, 10)
            np.testing.assert_allclose(np.abs(env), 1 / np.sqrt(n), atol=1e-12)

    def test_peak_close_to_dense_grid(self):
        rng = np.random.default_rng(17)
        n, l = 16, 10
        # 16QAM-ish block
        x = (rng.choice([-3, -1, 1, 3], n) + 1j * rng.choice([-3, -1, 1, 3], n)) / np.sqrt(10)
        env = np.abs(oversampled_envelope(x, 0.2, l))
        dense = envelope_dense(x, 0.2, n * 1000)
        gap_db = 20 * np.log10(dense.max() / env.max())
        assert abs(gap_db) < 0.05

    def test_rejects_bad_factor(self):
        with pytest.raises(ValueError):
            oversampled_envelope(np.ones(4), 0.1, 0)
