import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq
from scipy.stats import norm

from metabackscatter import circuit_model as cm
from metabackscatter import link_model as lm
from metabackscatter.constants import C_LIGHT
from metabackscatter.errors import GeometryError, LinkInfeasibleError

# Hand evaluation of the closed forms (mpmath, 30 digits).
UNIT_LINK_POWER = 0.001007860451037484  # 1 / (32 pi^3)
FLOOR_1MHZ_6DB = 1.5939741740607947e-14
RMAX_DEFAULT_ROW = 37.893130062866805  # 0.1 W, 0.01 m^2, 5.25 GHz, G = 10/10, |Gamma| = 1, 10 dB
SNR_AT_2M = 61.101219394085195


def ideal_tag(position, gamma=1.0, sigma=1.0, psi=50.0):
    return lm.TagInstance(cm.prototype_geometry(), cm.prototype_material(), psi, position,
                          sigma, reflection=gamma)


def scene(tags, gains=1.0, p_tx=1.0, eta=0.0, gamma_env=None, tx=(0, 0, 0), rx=(0, 0, 0)):
    n = len(tags)
    return lm.Scene(tuple(tags), lm.Antenna(tx, (gains,) * n), lm.Antenna(rx, (gains,) * n),
                    p_tx, eta, gamma_env)


class TestTone:
    def test_unit_reflection_identity(self):
        tone = lm.ModulatedTone(2.0, 0.3, 5e9)
        assert lm.backscatter_tone(tone, 1.0) == tone

    def test_absorbing_tag(self):
        assert lm.backscatter_tone(lm.ModulatedTone(2.0, 0.3, 5e9), 0).amplitude == 0

    def test_phase_rotation(self):
        out = lm.backscatter_tone(lm.ModulatedTone(1.0, 0.0, 5e9), 1j)
        assert out.phase == pytest.approx(np.pi / 2)
        assert out.frequency == 5e9


class TestReceivedPower:
    def test_unit_link(self):
        f = C_LIGHT  # lambda = 1 m
        sc = scene([ideal_tag((1, 0, 0))])
        assert lm.received_power(sc, 0, f) == pytest.approx(UNIT_LINK_POWER, rel=1e-14)

    def test_absorbing_tag(self):
        sc = scene([ideal_tag((1, 0, 0), gamma=0)])
        assert lm.received_power(sc, 0, 5e9) == 0

    def test_doubling_tx_distance(self):
        near = scene([ideal_tag((1, 0, 0))], rx=(1, 1, 0))
        far = scene([ideal_tag((1, 0, 0))], tx=(-1, 0, 0), rx=(1, 1, 0))
        ratio = lm.received_power(near, 0, 5e9) / lm.received_power(far, 0, 5e9)
        assert ratio == pytest.approx(4.0, rel=1e-12)

    def test_reciprocity(self):
        a = scene([ideal_tag((1, 0, 0))], tx=(0, 0, 0), rx=(1, 3, 0))
        b = scene([ideal_tag((1, 0, 0))], tx=(1, 3, 0), rx=(0, 0, 0))
        assert lm.received_power(a, 0, 5e9) == pytest.approx(lm.received_power(b, 0, 5e9),
                                                             rel=1e-14)

    def test_collocated_rejected(self):
        with pytest.raises(GeometryError):
            scene([ideal_tag((0, 0, 0))])

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.01, 1.0))
    def test_separable_in_reflectance(self, g):
        f = np.linspace(5e9, 5.5e9, 7)
        base = lm.received_power(scene([ideal_tag((2, 0, 0))]), 0, f)
        scaled = lm.received_power(scene([ideal_tag((2, 0, 0), gamma=g)]), 0, f)
        np.testing.assert_allclose(scaled, g * g * base, rtol=1e-12)

    def test_circuit_tag_uses_scattering_coefficient(self):
        geom, mat = cm.prototype_geometry(), cm.prototype_material()
        tag = lm.TagInstance(geom, mat, 50.0, (2, 0, 0), 0.01)
        f = np.linspace(5e9, 5.5e9, 11)
        gamma = cm.scattering_coefficient(f, cm.derive_circuit(geom, mat, 50.0), geom, mat)
        expected = lm.link_factor(1.0, 0.01, f, 2.0, 2.0) * np.abs(gamma) ** 2
        np.testing.assert_allclose(lm.received_power(scene([tag]), 0, f), expected, rtol=1e-12)


class TestInterference:
    def test_single_tag_no_clutter(self):
        assert lm.interference_power(scene([ideal_tag((1, 0, 0))]), 0, 5e9) == 0

    def test_single_tag_clutter(self):
        sc = scene([ideal_tag((1, 0, 0))], p_tx=0.3, eta=0.02, gamma_env=(0.4,))
        assert lm.interference_power(sc, 0, 5e9) == 0.02 * 0.3 * 0.4

    def test_frequency_dependent_clutter(self):
        sc = scene([ideal_tag((1, 0, 0))], eta=0.1, gamma_env=(lambda f: f / 1e10,))
        f = np.array([5e9, 6e9])
        np.testing.assert_allclose(lm.interference_power(sc, 0, f), 0.1 * f / 1e10)

    def test_symmetric_pair(self):
        sc = scene([ideal_tag((1, 1, 0)), ideal_tag((1, -1, 0))])
        assert lm.interference_power(sc, 0, 5e9) == pytest.approx(
            lm.received_power(sc, 1, 5e9), rel=1e-14)

    def test_additive_over_disjoint_sets(self):
        tags = [ideal_tag((1, k, 0), gamma=0.2 * (k + 1)) for k in range(5)]
        sc = scene(tags, eta=0.05, gamma_env=(0.3,) * 5)
        f = 5e9
        whole = lm.interference_power(sc, 0, f)
        parts = (lm.tag_interference(sc, 0, f, [1, 2]) + lm.tag_interference(sc, 0, f, [3, 4])
                 + lm.clutter_power(sc, 0, f))
        assert whole == pytest.approx(parts, rel=1e-14)


class TestNoiseAndRange:
    def test_floor(self):
        noise = lm.NoiseModel(1e6, 6.0, 290.0)
        assert noise.floor == pytest.approx(FLOOR_1MHZ_6DB, rel=1e-12)

    def test_snr_at_floor_is_zero(self):
        sc = scene([ideal_tag((1, 0, 0))])
        p = lm.received_power(sc, 0, 5e9)
        assert lm.snr(sc, 0, 5e9, lm.NoiseModel.with_floor(p)) == pytest.approx(0.0, abs=1e-12)

    def test_tenfold_power_adds_ten_db(self):
        noise = lm.NoiseModel(1e6)
        lo = lm.snr(scene([ideal_tag((1, 0, 0))], p_tx=0.1), 0, 5e9, noise)
        hi = lm.snr(scene([ideal_tag((1, 0, 0))], p_tx=1.0), 0, 5e9, noise)
        assert hi - lo == pytest.approx(10.0, rel=1e-12)

    def test_snr_regression(self):
        tag = ideal_tag((0, 0, 2), sigma=0.01)
        sc = lm.Scene((tag,), lm.Antenna((0, 0, 0), (10.0,)), lm.Antenna((0, 0, 0), (10.0,)), 0.1)
        value = lm.snr(sc, 0, 5.25e9, lm.NoiseModel(1e6, 6.0))
        assert value == pytest.approx(SNR_AT_2M, rel=1e-12)

    def test_sinr_below_snr(self):
        sc = scene([ideal_tag((1, 1, 0)), ideal_tag((1, -1, 0))])
        noise = lm.NoiseModel(1e6)
        assert lm.sinr(sc, 0, 5e9, noise) < lm.snr(sc, 0, 5e9, noise)

    def test_max_range_regression(self):
        link = lm.LinkBudget(0.1, 0.01, 5.25e9, 1.0, 10.0, 10.0)
        r = lm.max_range(link, 10.0, lm.NoiseModel(1e6, 6.0))
        assert r == pytest.approx(RMAX_DEFAULT_ROW, rel=1e-12)

    def test_max_range_scaling(self):
        noise = lm.NoiseModel(1e6, 6.0)
        link = lm.LinkBudget(0.1, 0.01, 5.25e9, 0.8, 10.0, 10.0)
        r = lm.max_range(link, 10.0, noise)
        r16 = lm.max_range(lm.LinkBudget(1.6, 0.01, 5.25e9, 0.8, 10.0, 10.0), 10.0, noise)
        rhalf = lm.max_range(lm.LinkBudget(0.1, 0.01, 5.25e9, 0.4, 10.0, 10.0), 10.0, noise)
        assert r16 / r == pytest.approx(2.0, rel=1e-12)
        assert rhalf / r == pytest.approx(1 / math.sqrt(2), rel=1e-12)

    def test_max_range_infeasible(self):
        with pytest.raises(LinkInfeasibleError):
            lm.max_range(lm.LinkBudget(0.1, 0.01, 5e9, 0.0), 10.0, lm.NoiseModel(1e6))


class TestSynthMeasurement:
    def test_noiseless_equals_signal(self):
        geom, mat = cm.prototype_geometry(), cm.prototype_material()
        sc = scene([lm.TagInstance(geom, mat, 30.0, (0, 0, 2), 0.01)])
        f = cm.frequency_grid((4.5e9, 6e9), 301)
        m = lm.synth_measurement(sc, 0, f)
        np.testing.assert_array_equal(m.p_total, lm.received_power(sc, 0, f))

    def test_deterministic(self):
        sc = scene([ideal_tag((1, 0, 0), gamma=0.5)])
        f = cm.frequency_grid((4.5e9, 6e9), 1001)
        noise = lm.NoiseModel(1e6)
        a = lm.synth_measurement(sc, 0, f, noise, seed=11)
        b = lm.synth_measurement(sc, 0, f, noise, seed=11)
        c = lm.synth_measurement(sc, 0, f, noise, seed=12)
        np.testing.assert_array_equal(a.p_total, b.p_total)
        assert not np.array_equal(a.p_noise, c.p_noise)

    def test_noise_is_non_negative_and_scaled(self):
        x = lm.noise_samples(20000, 2.0, seed=3, tag=0)
        assert np.all(x >= 0)
        # Clamping at zero lifts the mean to P (Phi(1) + phi(1)).
        assert x.mean() == pytest.approx(2.0 * (norm.cdf(1) + norm.pdf(1)), rel=0.02)

    def test_chunks_are_independent_of_length(self):
        a = lm.noise_samples(300, 1.0, seed=5, tag=1)
        b = lm.noise_samples(600, 1.0, seed=5, tag=1)
        np.testing.assert_array_equal(a, b[:300])

    def test_totals_add_up(self):
        sc = scene([ideal_tag((1, 1, 0), 0.7), ideal_tag((1, -1, 0), 0.4)], eta=0.01,
                   gamma_env=(0.2, 0.2))
        f = cm.frequency_grid((5e9, 5.5e9), 101)
        m = lm.synth_measurement(sc, 0, f, lm.NoiseModel(1e6), seed=1)
        np.testing.assert_allclose(m.p_total, m.p_sig + m.p_inf + m.p_noise, rtol=1e-15)

    def test_high_snr_dip_near_circuit_dip(self):
        geom, mat = cm.prototype_geometry(), cm.prototype_material()
        sc = scene([lm.TagInstance(geom, mat, 50.0, (0, 0, 2), 0.01)])
        f = cm.frequency_grid((4.5e9, 6e9), 1001)
        spec = cm.spectrum(cm.derive_circuit(geom, mat, 50.0), geom, mat, (4.5e9, 6e9), 1001)
        m = lm.synth_measurement(sc, 0, f)
        step = f[1] - f[0]
        assert abs(f[np.argmin(m.p_total)] - spec.dip_frequency()) <= step

    def test_root_find_agrees_with_closed_form(self):
        link = lm.LinkBudget(0.1, 0.01, 5.25e9, 0.6, 4.0, 3.0)
        noise = lm.NoiseModel(2e6, 3.0)
        r = lm.max_range(link, 12.0, noise)
        g = lambda x: 10 * np.log10(link.received_power(x, x) / noise.floor) - 12.0
        assert brentq(g, 1e-3, 1e4, xtol=1e-14, rtol=1e-15) == pytest.approx(r, rel=1e-9)
