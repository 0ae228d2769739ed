import math

import numpy as np
import pytest

from bdrisce import (AutocorrelationMatrix, BdRisConfig, CascadedChannel,
                     ChannelRealization, SceneGeometry, TrpVector, cascade, dbm_to_watts,
                     draw_channels, end_to_end_channel, measure_power, path_loss_db,
                     random_reactance, reflection_from_reactance, true_autocorrelation,
                     vectorize_trp, watts_to_dbm)

SCENE_2X2 = SceneGeometry((50.0, -200.0, 20.0), (-2.0, -1.0, 0.0),
                          (0.0, 0.0, 0.0), (10.0, 10.0, 0.0), (2, 2))


def scene_for(n_elements):
    dims = {4: (2, 2), 8: (2, 4), 16: (4, 4)}[n_elements]
    return SceneGeometry((50.0, -200.0, 20.0), (-2.0, -1.0, 0.0),
                         (0.0, 0.0, 0.0), (10.0, 10.0, 0.0), dims)


class TestPathLoss:
    def test_reference_values(self):
        assert path_loss_db("bs_user", 1.0) == pytest.approx(33.0, abs=1e-12)
        assert path_loss_db("bs_ris", 10.0) == pytest.approx(50.0, abs=1e-12)
        assert path_loss_db("ris_user", 1.0) == pytest.approx(30.0, abs=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            path_loss_db("bs_user", 0.0)
        with pytest.raises(ValueError):
            path_loss_db("uplink", 5.0)


class TestUnits:
    def test_dbm_round_trip(self):
        assert dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-12)
        assert watts_to_dbm(dbm_to_watts(-100.0)) == pytest.approx(-100.0, abs=1e-9)
        with pytest.raises(ValueError):
            watts_to_dbm(0.0)


class TestDrawChannels:
    def test_direct_link_power_moment(self):
        # Monte Carlo moment oracle for the Rayleigh direct channel
        cfg = BdRisConfig(4, 2)
        rng = np.random.default_rng(123)
        user = np.array([5.0, 5.0, 0.0])
        d0 = np.linalg.norm(np.array(SCENE_2X2.bs_position) - user)
        expected = 10.0 ** (-path_loss_db("bs_user", d0) / 10.0)
        samples = np.array([
            abs(draw_channels(SCENE_2X2, cfg, "los", rng, user_position=user).h_bu) ** 2
            for _ in range(100_000)])
        assert abs(samples.mean() - expected) < 0.02 * expected

    def test_los_entries_have_link_gain_magnitude(self):
        cfg = BdRisConfig(4, 2)
        ch = draw_channels(SCENE_2X2, cfg, "los", np.random.default_rng(5))
        d1 = np.linalg.norm(np.array(SCENE_2X2.bs_position) - np.array(SCENE_2X2.ris_position))
        expected = 10.0 ** (-path_loss_db("bs_ris", d1) / 20.0)
        assert np.allclose(np.abs(ch.h_br), expected, rtol=1e-12)

    def test_rayleigh_entries_power_moment(self):
        cfg = BdRisConfig(4, 2)
        rng = np.random.default_rng(17)
        user = np.array([5.0, 5.0, 0.0])
        d2 = np.linalg.norm(user - np.array(SCENE_2X2.ris_position))
        expected = 10.0 ** (-path_loss_db("ris_user", d2) / 10.0)
        samples = np.concatenate([
            np.abs(draw_channels(SCENE_2X2, cfg, "rayleigh", rng, user_position=user).h_ru) ** 2
            for _ in range(20_000)])
        assert abs(samples.mean() - expected) < 0.02 * expected

    def test_same_seed_identical(self):
        cfg = BdRisConfig(4, 2)
        a = draw_channels(SCENE_2X2, cfg, "los", np.random.default_rng(9))
        b = draw_channels(SCENE_2X2, cfg, "los", np.random.default_rng(9))
        assert a.h_bu == b.h_bu
        assert np.array_equal(a.h_br, b.h_br)
        assert np.array_equal(a.h_ru, b.h_ru)

    def test_user_position_resampled(self):
        cfg = BdRisConfig(4, 2)
        rng = np.random.default_rng(31)
        a = draw_channels(SCENE_2X2, cfg, "los", rng)
        b = draw_channels(SCENE_2X2, cfg, "los", rng)
        assert not np.array_equal(a.h_ru, b.h_ru)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            draw_channels(SCENE_2X2, BdRisConfig(16, 4), "los", np.random.default_rng(0))

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError):
            draw_channels(SCENE_2X2, BdRisConfig(4, 2), "rician", np.random.default_rng(0))


class TestSceneGeometry:
    def test_degenerate_rectangle_rejected(self):
        with pytest.raises(ValueError):
            SceneGeometry((0, 0, 0), (1, 1, 1), (0, 0, 0), (10, 0, 0), (2, 2))

    def test_inverted_corners_rejected(self):
        with pytest.raises(ValueError):
            SceneGeometry((0, 0, 0), (1, 1, 1), (10, 10, 0), (0, 0, 0), (2, 2))


class TestEndToEndChannel:
    def test_vanishing_reflected_path(self):
        ch = ChannelRealization(0.3 - 0.4j, np.ones(2, complex), np.zeros(2, complex), 4.0)
        theta = reflection_from_reactance(
            random_reactance(BdRisConfig(2, 1), np.random.default_rng(0)), 50.0)
        assert end_to_end_channel(ch, theta) == pytest.approx(2.0 * (0.3 - 0.4j), abs=1e-15)

    def test_minus_identity_blocks(self):
        rng = np.random.default_rng(8)
        h_br = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        h_ru = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        ch = ChannelRealization(0.1 + 0.2j, h_br, h_ru, 1.0)
        from bdrisce import ScatteringMatrix
        theta = ScatteringMatrix(np.stack([-np.eye(2, dtype=complex)] * 2))
        expected = 0.1 + 0.2j - h_ru.conj() @ h_br
        assert end_to_end_channel(ch, theta) == pytest.approx(expected, rel=1e-12)

    def test_dimension_mismatch(self):
        ch = ChannelRealization(0j, np.ones(4, complex), np.ones(4, complex), 1.0)
        theta = reflection_from_reactance(
            random_reactance(BdRisConfig(2, 1), np.random.default_rng(0)), 50.0)
        with pytest.raises(ValueError):
            end_to_end_channel(ch, theta)


class TestCascade:
    def test_hand_expanded_two_element_case(self):
        h_br = np.array([1.0 + 2.0j, -0.5 + 0.25j])
        h_ru = np.array([0.3 - 0.7j, 1.5 + 0.1j])
        ch = ChannelRealization(0.9 - 0.2j, h_br, h_ru, 4.0)
        h = cascade(ch, BdRisConfig(2, 1))
        expected = 2.0 * np.array([0.9 - 0.2j,
                                   np.conj(h_ru[0]) * h_br[0],
                                   np.conj(h_ru[1]) * h_br[1]])
        assert np.allclose(h.entries, expected, rtol=1e-15)

    def test_zero_bs_ris_link(self):
        ch = ChannelRealization(1.0 + 0j, np.zeros(4, complex), np.ones(4, complex), 1.0)
        h = cascade(ch, BdRisConfig(4, 2))
        assert np.array_equal(h.entries[1:], np.zeros(8, complex))
        assert h.entries[0] == 1.0 + 0j

    def test_dimension_for_16_elements(self):
        cfg = BdRisConfig(16, 4)
        ch = draw_channels(scene_for(16), cfg, "los", np.random.default_rng(2))
        assert len(cascade(ch, cfg)) == 65

    def test_kronecker_identity_oracle(self):
        # reflected-path sum via dense algebra matches the vectorized form
        rng = np.random.default_rng(77)
        for n0 in (1, 2, 4):
            cfg = BdRisConfig(8, n0)
            scene = scene_for(8)
            for _ in range(340):
                ch = draw_channels(scene, cfg, "los", rng)
                theta = reflection_from_reactance(random_reactance(cfg, rng), 50.0)
                v = vectorize_trp(theta)
                h = cascade(ch, cfg)
                direct = end_to_end_channel(ch, theta)
                recast = complex(v.entries.conj() @ h.entries)
                assert abs(direct - recast) / abs(direct) < 1e-10


class TestTrueAutocorrelation:
    def test_unit_vector_outer_product(self):
        e1 = np.zeros(5, complex)
        e1[0] = 1.0
        g = true_autocorrelation(CascadedChannel(e1))
        assert np.array_equal(g.entries, np.outer(e1, e1))

    def test_trace_identity(self):
        rng = np.random.default_rng(4)
        h = CascadedChannel(rng.standard_normal(9) + 1j * rng.standard_normal(9))
        g = true_autocorrelation(h)
        assert np.trace(g.entries).real == pytest.approx(np.linalg.norm(h.entries) ** 2,
                                                         rel=1e-12)

    def test_rank_one_psd_eigenstructure(self):
        rng = np.random.default_rng(14)
        h = CascadedChannel(rng.standard_normal(9) + 1j * rng.standard_normal(9))
        g = true_autocorrelation(h)
        eig = np.linalg.eigvalsh(g.entries)
        scale = np.linalg.norm(h.entries) ** 2
        assert eig[-1] == pytest.approx(scale, rel=1e-12)
        assert np.max(np.abs(eig[:-1])) < 1e-12 * scale

    def test_hermitian_guard(self):
        with pytest.raises(ValueError):
            AutocorrelationMatrix(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))


class TestMeasurePower:
    def _setup(self, seed=0):
        cfg = BdRisConfig(4, 2)
        rng = np.random.default_rng(seed)
        ch = draw_channels(SCENE_2X2, cfg, "los", rng)
        h = cascade(ch, cfg)
        theta = reflection_from_reactance(random_reactance(cfg, rng), 50.0)
        return h, vectorize_trp(theta)

    def test_noiseless_is_exact_quadratic(self):
        h, v = self._setup()
        m = measure_power(h, v, 0.0, np.random.default_rng(0))
        g = complex(v.entries.conj() @ h.entries)
        assert m.power == abs(g) ** 2
        assert m.noise_power == 0.0

    def test_pure_noise_moment(self):
        # with a zero channel the measurement is |n|^2, mean sigma^2
        h = CascadedChannel(np.zeros(9, complex))
        v = TrpVector(np.concatenate([[1.0 + 0j], np.zeros(8, complex)]))
        rng = np.random.default_rng(3)
        sigma2 = 2.5e-13
        samples = np.array([measure_power(h, v, sigma2, rng).power
                            for _ in range(100_000)])
        assert abs(samples.mean() - sigma2) < 0.02 * sigma2

    def test_quadratic_form_identity(self):
        h, v = self._setup(2)
        g = true_autocorrelation(h)
        quad = (v.entries.conj() @ g.entries @ v.entries).real
        inner = abs(complex(v.entries.conj() @ h.entries)) ** 2
        assert abs(quad - inner) <= 1e-12 * max(inner, 1e-300)

    def test_global_phase_invariance(self):
        h, v = self._setup(6)
        rotated = CascadedChannel(np.exp(1j * 1.234) * h.entries)
        p0 = measure_power(h, v, 0.0, np.random.default_rng(0)).power
        p1 = measure_power(rotated, v, 0.0, np.random.default_rng(0)).power
        assert abs(p0 - p1) <= 1e-12 * p0

    def test_length_mismatch(self):
        h, _ = self._setup()
        with pytest.raises(ValueError):
            measure_power(h, TrpVector(np.array([1.0 + 0j])), 0.0, np.random.default_rng(0))

    def test_index_carried(self):
        h, v = self._setup()
        assert measure_power(h, v, 0.0, np.random.default_rng(0), trp_index=7).trp_index == 7


def test_tx_power_scaling():
    cfg = BdRisConfig(4, 2)
    a = draw_channels(SCENE_2X2, cfg, "los", np.random.default_rng(1), tx_power_watts=1.0)
    b = ChannelRealization(a.h_bu, a.h_br, a.h_ru, 4.0)
    ha, hb = cascade(a, cfg), cascade(b, cfg)
    assert np.allclose(hb.entries, 2.0 * ha.entries, rtol=1e-15)
    assert math.sqrt(b.tx_power) == 2.0
