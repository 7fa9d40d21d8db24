"""Acceptance suite.

Each test carries a ``criterion`` marker; the terminal summary lists one
PASS/FAIL line per criterion. Run on its own with

    pytest tests/test_acceptance.py -v
"""

import itertools
import math
import os
import time

import numpy as np
import pytest
import yaml
from scipy.optimize import bisect

from metabackscatter import circuit_model as cm
from metabackscatter import cli
from metabackscatter import detection as det
from metabackscatter import experiment as ex
from metabackscatter import link_model as lm
from metabackscatter import tag_design as td
from metabackscatter.constants import C_LIGHT, Z0

JOBS = min(4, os.cpu_count() or 1)


def criterion(number, title):
    return pytest.mark.criterion(number, title)


def strictly(values, sign):
    return bool(np.all(sign * np.diff(values) > 0))


# 1 ---------------------------------------------------------------------------

@criterion(1, "analytic identities")
class TestIdentities:
    def test_matched_impedance_reflects_nothing(self, record_property):
        assert cm.reflection_from_impedance(Z0) == 0
        assert cm.reflection_from_impedance(np.array([Z0 + 0j]))[0] == 0
        record_property("detail", "Gamma(377) = 0 exactly")

    def test_matched_total_resistance(self):
        for L, C in [(1e-7, 1e-14), (3e-8, 2e-13), (1.0, 1.0)]:
            assert cm.CanonicalResonance.from_rlc(Z0, L, C).gamma_min == 0

    def test_resonance_identity(self, record_property):
        geom, mat = cm.prototype_geometry(), cm.prototype_material()
        worst = 0.0
        for psi in np.linspace(0, 100, 11):
            r = cm.canonical_resonance(cm.derive_circuit(geom, mat, psi), geom, mat)
            worst = max(worst, abs(r.f0 * 2 * np.pi * math.sqrt(r.L_total * r.C_total) - 1))
            q = math.sqrt(r.L_total / r.C_total) / r.R_total
            assert r.Q == pytest.approx(q, rel=1e-12)
        record_property("detail", f"max |2 pi f0 sqrt(LC) - 1| = {worst:.1e}")
        assert worst <= 1e-12


# 2 ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def base():
    return cm.prototype_geometry(), cm.prototype_material()


@criterion(2, "component trends")
class TestTrends:
    N = 21

    def test_gap_width(self, base):
        t = ex.sweep_component("d", np.linspace(0.5e-3, 2.0e-3, self.N), *base)
        assert len(t.rows) == self.N
        assert strictly(t.column("f0"), +1) and strictly(t.column("Q"), +1)

    def test_substrate_thickness(self, base):
        t = ex.sweep_component("h", np.linspace(1.2e-3, 3.0e-3, self.N), *base)
        assert len(t.rows) == self.N
        assert strictly(t.column("f0"), -1) and strictly(t.column("Q"), -1)

    def test_ring_width(self, base):
        t = ex.sweep_component("s", np.linspace(0.5e-3, 1.8e-3, self.N), *base)
        assert len(t.rows) == self.N
        assert strictly(t.column("f0"), +1) and strictly(t.column("Q"), -1)

    def test_sensitive_resistance(self, base, record_property):
        geom, mat = base
        values = np.geomspace(1.0, 200.0, self.N)
        t = ex.sweep_component("R_o", values, geom, mat)
        assert strictly(t.column("Q"), -1)
        g = t.column("gamma_min")
        k = int(np.argmin(g))
        assert 0 < k < len(g) - 1
        assert strictly(g[:k + 1], -1) and strictly(g[k:], +1)
        cp = cm.derive_circuit(geom, mat, 50.0)
        r_total = [cm.canonical_resonance(cp.replace(R_o=v), geom, mat).R_total for v in values]
        # The R_total = Z0 crossing lies between the minimum's grid neighbours.
        assert r_total[k - 1] < Z0 < r_total[k + 1]
        record_property("detail", f"gamma_min minimum at R_o = {values[k]:.1f} ohm, "
                                  f"R_total = {r_total[k]:.0f} ohm")


# 3 ---------------------------------------------------------------------------

def random_geometries(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        l = rng.uniform(5e-3, 9e-3)
        s = rng.uniform(0.4e-3, min(1.6e-3, 0.45 * l))
        d = rng.uniform(0.4e-3, 2.0e-3)
        h = rng.uniform(1.2e-3, 3.2e-3)
        w = l + rng.uniform(0.5e-3, 2.0e-3)
        yield cm.SrrGeometry(l=l, d=d, s=s, w=w, t=35e-6, h=h), rng.uniform(0, 100)


@criterion(3, "canonical f0 vs dense |Gamma| argmin")
def test_resonance_consistency(record_property):
    mat = cm.prototype_material()
    band = (1e9, 9e9)
    dense = cm.frequency_grid(band, 160001)
    errors = []
    for geom, psi in random_geometries(100, seed=20240):
        cp = cm.derive_circuit(geom, mat, psi)
        res = cm.canonical_resonance(cp, geom, mat, band)
        f_argmin = dense[np.argmin(np.abs(cm.scattering_coefficient(dense, cp, geom, mat)))]
        errors.append(abs(res.f0 / f_argmin - 1))
    errors = np.array(errors)
    record_property("detail", f"max {errors.max():.3%}, median {np.median(errors):.3%}")
    assert len(errors) == 100
    assert errors.max() < 5e-3


# 4 ---------------------------------------------------------------------------

def one_tag_scene(r_tx=2.0, r_rx=3.0, p_tx=0.1, g_tx=4.0, g_rx=5.0, gamma=0.7, sigma=0.01):
    tag = lm.TagInstance(cm.prototype_geometry(), cm.prototype_material(), 50.0,
                         (0.0, 0.0, 0.0), sigma, reflection=gamma)
    return lm.Scene((tag,), lm.Antenna((r_tx, 0.0, 0.0), (g_tx,)),
                    lm.Antenna((0.0, r_rx, 0.0), (g_rx,)), p_tx)


@criterion(4, "link-budget laws")
class TestLinkLaws:
    f = np.linspace(4.5e9, 6e9, 7)

    @pytest.mark.parametrize("name, factor, expected", [
        ("r_tx", 2.0, 1 / 4), ("r_tx", 3.0, 1 / 9), ("r_rx", 2.0, 1 / 4), ("r_rx", 0.5, 4.0),
        ("p_tx", 7.0, 7.0), ("g_tx", 3.0, 3.0), ("g_rx", 0.25, 0.25),
        ("gamma", 0.5, 0.25), ("sigma", 6.0, 6.0),
    ])
    def test_ratio(self, name, factor, expected):
        kw = dict(r_tx=2.0, r_rx=3.0, p_tx=0.1, g_tx=4.0, g_rx=5.0, gamma=0.7, sigma=0.01)
        base = lm.received_power(one_tag_scene(**kw), 0, self.f)
        kw[name] *= factor
        ratio = lm.received_power(one_tag_scene(**kw), 0, self.f) / base
        np.testing.assert_allclose(ratio, expected, rtol=1e-12)

    def test_sixteen_times_power_doubles_range(self):
        noise = lm.NoiseModel(1e6, 6.0)
        for gamma in (0.1, 0.5, 1.0):
            a = lm.max_range(lm.LinkBudget(0.05, 0.01, 5.25e9, gamma, 3.0, 3.0), 10.0, noise)
            b = lm.max_range(lm.LinkBudget(0.8, 0.01, 5.25e9, gamma, 3.0, 3.0), 10.0, noise)
            assert b / a == pytest.approx(2.0, rel=1e-9)

    def test_closed_form_vs_bisection(self, record_property):
        noise = lm.NoiseModel(1e6, 6.0)
        worst = 0.0
        for p, gamma, thr in [(0.1, 1.0, 10.0), (0.01, 0.3, 3.0), (1.6, 0.05, 20.0)]:
            link = lm.LinkBudget(p, 0.01, 5.25e9, gamma, 10.0, 10.0)
            closed = lm.max_range(link, thr, noise)
            margin = lambda r: 10 * np.log10(link.received_power(r, r) / noise.floor) - thr
            root = bisect(margin, 1e-3, 1e5, xtol=1e-15, rtol=1e-15, maxiter=500)
            worst = max(worst, abs(root / closed - 1))
        record_property("detail", f"max relative gap {worst:.1e}")
        assert worst < 1e-9


# 5 ---------------------------------------------------------------------------

def friis(p_tx, sigma, f, r_tx, r_rx, g_tx, g_rx, gamma_abs):
    lam = C_LIGHT / f
    return (p_tx * sigma * lam ** 2 / (32 * math.pi ** 3 * r_tx ** 2 * r_rx ** 2)
            * gamma_abs ** 2 * g_tx * g_rx)


@criterion(5, "interference model")
class TestInterference:
    def test_clutter_only(self):
        sc = lm.Scene(one_tag_scene().tags, one_tag_scene().tx, one_tag_scene().rx, 0.25,
                      eta=0.013, gamma_env=(0.6,))
        assert lm.interference_power(sc, 0, 5.2e9) == 0.013 * 0.25 * 0.6

    def test_multi_tag_sum(self, record_property):
        rng = np.random.default_rng(5)
        n = 6
        pos = [tuple(rng.uniform(-1, 1, 2)) + (0.0,) for _ in range(n)]
        gam = rng.uniform(0.1, 1.0, n)
        sig = rng.uniform(0.005, 0.02, n)
        gt, gr = rng.uniform(1, 10, n), rng.uniform(1, 10, n)
        tx, rx = (0.3, 0.1, 2.0), (-0.2, 0.0, 1.8)
        geom, mat = cm.prototype_geometry(), cm.prototype_material()
        tags = tuple(lm.TagInstance(geom, mat, 50.0, pos[k], sig[k], reflection=gam[k])
                     for k in range(n))
        sc = lm.Scene(tags, lm.Antenna(tx, tuple(gt)), lm.Antenna(rx, tuple(gr)), 0.2,
                      eta=0.01, gamma_env=tuple(rng.uniform(0, 1, n)))
        f = 5.3e9
        worst = 0.0
        for i in range(n):
            oracle = 0.01 * 0.2 * sc.gamma_env[i]
            for j in range(n):
                if j != i:
                    oracle += friis(0.2, sig[j], f, math.dist(pos[j], tx), math.dist(pos[j], rx),
                                    gt[j], gr[j], gam[j])
            got = lm.interference_power(sc, i, f)
            worst = max(worst, abs(got / oracle - 1))
        record_property("detail", f"max relative error {worst:.1e}")
        assert worst < 1e-12


# 6 ---------------------------------------------------------------------------

def damped(n, dt, poles, amps):
    t = np.arange(n) * dt
    return (np.asarray(amps)[None, :] * np.exp(np.outer(t, poles))).sum(axis=1)


@criterion(6, "matrix pencil oracle")
class TestMatrixPencil:
    dt = 1e-3
    poles = np.array([-3 + 2j * np.pi * 40, -8 + 2j * np.pi * 120])

    def test_single_pole(self):
        s = -5.0 + 2j * np.pi * 37.0
        ps = det.matrix_pencil(damped(200, self.dt, [s], [1.0]), self.dt)
        assert abs(ps.poles[0] - s) / abs(s) < 1e-9

    def test_two_poles(self):
        ps = det.matrix_pencil(damped(200, self.dt, self.poles, [2.0, 1.0]), self.dt)
        for s in self.poles:
            assert np.min(np.abs(ps.poles - s)) / abs(s) < 1e-6

    def test_twenty_db(self, record_property):
        y = damped(200, self.dt, self.poles, [2.0, 1.0])
        sd = math.sqrt(np.mean(np.abs(y) ** 2) / 10 ** 2 / 2)
        errors = []
        for seed in range(100):
            rng = np.random.default_rng(seed)
            noisy = y + sd * (rng.standard_normal(200) + 1j * rng.standard_normal(200))
            top = det.matrix_pencil(noisy, self.dt).poles[:2]
            errors += [np.min(np.abs(top - s)) / abs(s) for s in self.poles]
        med = float(np.median(errors))
        record_property("detail", f"median relative error {med:.1e} over 100 trials")
        assert med < 1e-2


# 7 ---------------------------------------------------------------------------

@criterion(7, "noiseless end-to-end identity")
class TestNoiselessPipeline:
    def test_peak_fit_within_one_step(self, record_property):
        cfg = ex.GridExperimentConfig()
        freq = cm.frequency_grid(cfg.band, cfg.n_points)
        step = freq[1] - freq[0]
        worst = 0.0
        for cell, psi in enumerate(cfg.humidity):
            sc, i = cfg.scene_for(cell), cfg.local_index(cell)
            cal = det.background_subtract(lm.synth_measurement(sc, i, freq),
                                          lm.synth_measurement(sc, i, freq, target_present=False),
                                          flatten_wavelength=True)
            f0_hat, _ = det.peak_fit(cal)
            cp = cm.derive_circuit(cfg.geometry, cfg.material, psi)
            truth = cm.canonical_resonance(cp, cfg.geometry, cfg.material).f_dip
            worst = max(worst, abs(f0_hat - truth) / step)
        record_property("detail", f"max error {worst:.2f} grid steps")
        assert worst <= 1.0

    def test_all_cells_classified(self):
        report = ex.run_grid_experiment(ex.GridExperimentConfig())
        assert report.summaries[0].accuracy_per_trial == (1.0,)
        assert [c for c, _ in report.cell_estimates()] == [
            ex.true_category(h) for h in ex.DEFAULT_HUMIDITY]


# 8 ---------------------------------------------------------------------------

@pytest.mark.slow
@criterion(8, "monotone degradation with SNR")
def test_monotone_degradation(record_property):
    cfg = ex.GridExperimentConfig(snr_db=(40.0, 30.0, 20.0, 10.0), trials=100, seed=8)
    report = ex.run_grid_experiment(cfg, jobs=JOBS)
    medians = [s.median_accuracy for s in report.summaries]
    record_property("detail", "median accuracy " + ", ".join(
        f"{s:g} dB: {m:.3f}" for s, m in zip(cfg.snr_db, medians)))
    assert all(a >= b for a, b in zip(medians, medians[1:]))


# 9 ---------------------------------------------------------------------------

@criterion(9, "Pareto search vs brute force")
def test_pareto_oracle(record_property):
    space = td.DesignSpace(d=td.AxisRange(0.8e-3, 1.6e-3, count=4),
                           s=td.AxisRange(0.8e-3, 1.4e-3, count=3),
                           h=td.AxisRange(1.6e-3, 2.4e-3, count=3),
                           w=td.AxisRange(9.0e-3, 10.09e-3, count=3),
                           l=td.AxisRange(5.5e-3, 6.5e-3, count=3))
    assert space.size <= 500
    front = td.search(space, budget=space.size, seed=0, jobs=JOBS)

    everything = []
    for d, s, h, w, l in itertools.product(*space.axis_values()):
        geom = cm.SrrGeometry(l=float(l), d=float(d), s=float(s), w=float(w), t=space.t,
                              h=float(h))
        m = td.evaluate_design(geom, space.materials[0], space.env_pair, space.band,
                               space.n_points)
        everything.append((geom, m.as_tuple()))
    brute = set()
    for g, a in everything:
        if not any(td.dominates(b, a) for _, b in everything):
            brute.add((g, a))
    found = {(c.geometry, c.metrics.as_tuple()) for c in front}
    record_property("detail", f"{space.size} cells, front of {len(found)}")
    assert found == brute


# 10 --------------------------------------------------------------------------

DETERMINISM_CONFIG = {
    "schema_version": 1,
    "seed": 11,
    "design": {"budget": 24},
    "noise": {"bandwidth": 1.0e6, "noise_figure_db": 6.0},
    "experiment": {"snr_db": [None, 30.0, 10.0], "trials": 2},
}


@criterion(10, "byte-identical reruns")
def test_rerun_determinism(tmp_path, record_property):
    cfg_path = tmp_path / "run.yaml"
    cfg_path.write_text(yaml.safe_dump(DETERMINISM_CONFIG))
    checked = 0
    for sub in cli.SUBCOMMANDS:
        first, again = tmp_path / sub, tmp_path / f"{sub}-rerun"
        argv = [sub, "--config", str(cfg_path), "--out", str(first)]
        if sub == "detect":
            argv += ["--input", str(tmp_path / "simulate")]
        assert cli.main(argv) == 0, sub
        assert cli.main(["rerun", str(first / "manifest.json"), "--out", str(again)]) == 0, sub
        names = sorted(p.name for p in first.iterdir())
        assert names == sorted(p.name for p in again.iterdir())
        for name in names:
            assert (first / name).read_bytes() == (again / name).read_bytes(), f"{sub}/{name}"
            checked += 1
    record_property("detail", f"{checked} files across {len(cli.SUBCOMMANDS)} subcommands")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
