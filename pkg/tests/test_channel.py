import math

import mpmath
import numpy as np
import pytest

from mmwtrack import (
    ArrayConfig,
    ChannelParams,
    LogDistancePathLoss,
    RayParams,
    assemble_channel,
    dominant_svd,
    noise_variance,
    path_loss_linear,
    sample_channel,
    steering_vector,
)

UNIT_LOSS = LogDistancePathLoss(intercept_db=0.0, exponent=0.0)


def unit_loss_params(**kw):
    defaults = dict(
        n_clusters=1,
        rays_per_cluster=(1,),
        los_probability=0.0,
        path_loss_model=UNIT_LOSS,
        cluster_angle_spread_deg=0.0,
    )
    defaults.update(kw)
    return ChannelParams(**defaults)


class TestSteeringVector:
    def test_broadside(self):
        np.testing.assert_allclose(steering_vector(ArrayConfig(4), 0.0), [0.5, 0.5, 0.5, 0.5])

    def test_single_element(self):
        np.testing.assert_allclose(steering_vector(ArrayConfig(1), 1.2), [1.0])

    def test_endfire(self):
        got = steering_vector(ArrayConfig(4), math.pi / 2)
        np.testing.assert_allclose(got, [0.5, -0.5, 0.5, -0.5], atol=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 7, 64])
    def test_unit_norm(self, n):
        for angle in np.linspace(-math.pi / 2, math.pi / 2, 11):
            assert abs(np.linalg.norm(steering_vector(ArrayConfig(n), angle)) - 1.0) < 1e-12

    def test_invalid_angle(self):
        with pytest.raises(ValueError):
            steering_vector(ArrayConfig(4), 2.0)


class TestPathLoss:
    def test_zero_loss(self):
        assert path_loss_linear(unit_loss_params(), 50.0) == 1.0

    def test_intercept_only(self):
        params = unit_loss_params(path_loss_model=LogDistancePathLoss(70.0, 0.0))
        assert path_loss_linear(params, 1.0) == pytest.approx(1e-7)

    def test_log_distance_against_mpmath(self):
        params = unit_loss_params(path_loss_model=LogDistancePathLoss(70.0, 2.9))
        with mpmath.workdps(50):
            pl_db = mpmath.mpf(70) + 10 * mpmath.mpf("2.9") * mpmath.log10(50)
            expected = float(mpmath.power(10, -pl_db / 10))
        assert path_loss_linear(params, 50.0) == pytest.approx(expected, rel=1e-14)

    def test_nonpositive_distance(self):
        with pytest.raises(ValueError):
            path_loss_linear(unit_loss_params(), 0.0)


class TestSampleChannel:
    def test_single_ray_rank1(self):
        rng = np.random.default_rng(3)
        bs, ms = ArrayConfig(16), ArrayConfig(8)
        ch = sample_channel(unit_loss_params(), bs, ms, rng)
        alpha = ch.rays[0].gain
        assert np.linalg.norm(ch.h) == pytest.approx(math.sqrt(16 * 8) * abs(alpha), rel=1e-12)
        assert ch.sigma[1] < 1e-12 * ch.sigma[0]
        a_ms = steering_vector(ms, ch.rays[0].aoa_ms_rad)
        a_bs = steering_vector(bs, ch.rays[0].aod_bs_rad)
        assert abs(np.vdot(ch.u[:, 0], a_ms)) >= 1 - 1e-10
        assert abs(np.vdot(ch.v[:, 0], a_bs)) >= 1 - 1e-10

    def test_los_only(self):
        bs, ms = ArrayConfig(16), ArrayConfig(8)
        attn = 0.37
        ch = assemble_channel(
            bs,
            ms,
            rays=(),
            gamma=1.0,
            los_present=True,
            los_phase_rad=1.1,
            los_aoa_ms_rad=0.4,
            los_aod_bs_rad=-0.2,
            los_attenuation_linear=attn,
        )
        assert ch.sigma[0] == pytest.approx(math.sqrt(8 * 16 * attn), rel=1e-12)
        assert ch.sigma[1] < 1e-12 * ch.sigma[0]

    def test_gamma_normalization_monte_carlo(self):
        # sample mean of ||H||_F^2 / (N_bs * N_ms) over unit-attenuation draws
        rng = np.random.default_rng(7)
        params = unit_loss_params(
            n_clusters=2, rays_per_cluster=(3, 4), cluster_angle_spread_deg=5.0
        )
        bs, ms = ArrayConfig(8), ArrayConfig(8)
        acc = 0.0
        n_draws = 10_000
        for _ in range(n_draws):
            ch = sample_channel(params, bs, ms, rng)
            acc += np.linalg.norm(ch.h) ** 2
        assert 0.97 <= acc / n_draws / 64.0 <= 1.03

    def test_seed_reproducible(self):
        params = unit_loss_params(n_clusters=2, rays_per_cluster=(2, 3), los_probability=0.5)
        bs, ms = ArrayConfig(12), ArrayConfig(6)
        a = sample_channel(params, bs, ms, np.random.default_rng(11))
        b = sample_channel(params, bs, ms, np.random.default_rng(11))
        assert np.array_equal(a.h, b.h)
        assert a.los_present == b.los_present

    def test_svd_is_exact(self):
        rng = np.random.default_rng(5)
        ch = sample_channel(ChannelParams(), ArrayConfig(20), ArrayConfig(10), rng)
        recon = (ch.u * ch.sigma) @ ch.v.conj().T
        assert np.linalg.norm(ch.h - recon) <= 1e-8 * np.linalg.norm(ch.h)
        r = len(ch.sigma)
        assert np.linalg.norm(ch.u.conj().T @ ch.u - np.eye(r)) < 1e-10
        assert np.linalg.norm(ch.v.conj().T @ ch.v - np.eye(r)) < 1e-10
        assert np.all(np.diff(ch.sigma) <= 0) and np.all(ch.sigma >= 0)


class TestDominantSvd:
    def test_rank1(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        b = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        u, s, v = dominant_svd(np.outer(a, b.conj()), 1)
        assert s[0] == pytest.approx(1.0)
        assert abs(np.vdot(u[:, 0], a)) == pytest.approx(1.0)
        assert abs(np.vdot(v[:, 0], b)) == pytest.approx(1.0)

    def test_identity(self):
        _, s, _ = dominant_svd(np.eye(3), 3)
        np.testing.assert_allclose(s, [1.0, 1.0, 1.0])

    def test_matches_eig_of_gram(self):
        rng = np.random.default_rng(1)
        h = rng.standard_normal((8, 16)) + 1j * rng.standard_normal((8, 16))
        u, s, _ = dominant_svd(h, 2)
        evals, evecs = np.linalg.eigh(h @ h.conj().T)
        order = np.argsort(evals)[::-1]
        np.testing.assert_allclose(s**2, evals[order][:2], rtol=1e-10)
        for k in range(2):
            assert abs(np.vdot(u[:, k], evecs[:, order[k]])) == pytest.approx(1.0, abs=1e-10)

    def test_phase_convention(self):
        rng = np.random.default_rng(2)
        h = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        u, _, _ = dominant_svd(h, 3)
        for k in range(3):
            pivot = u[np.argmax(np.abs(u[:, k])), k]
            assert abs(pivot.imag) < 1e-12 and pivot.real > 0

    def test_m_out_of_range(self):
        with pytest.raises(ValueError):
            dominant_svd(np.eye(3), 4)
        with pytest.raises(ValueError):
            dominant_svd(np.eye(3), 0)


def test_noise_variance_matches_link_budget():
    # -174 dBm/Hz over 500 MHz with a 3 dB noise figure
    expected = 10 ** ((-174 - 30) / 10) * 500e6 * 10 ** 0.3
    assert noise_variance(ChannelParams()) == pytest.approx(expected, rel=1e-12)


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        ArrayConfig(0)
    with pytest.raises(ValueError):
        ChannelParams(n_clusters=2, rays_per_cluster=(3,))
    with pytest.raises(ValueError):
        ChannelParams(los_probability=1.5)
    with pytest.raises(ValueError):
        RayParams(gain=1.0, attenuation_linear=-0.1, aod_bs_rad=0.0, aoa_ms_rad=0.0)
