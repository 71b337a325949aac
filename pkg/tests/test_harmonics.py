"""Describing functions per harmonic: element formulas vs the simulation
oracle, open-loop chain composition, CgLp gain/ratio behavior."""

import math

import numpy as np
import pytest

from resetloop.closedloop import LoopConfig
from resetloop.design import make_cglp
from resetloop.errors import ValidationError
from resetloop.harmonics import (
    HarmonicResponse,
    cglp_hosidf,
    harmonic_ratio,
    hosidf_intermediates,
    hosidf_reset,
    odd_harmonics,
    open_loop_harmonic,
    read_harmonics_csv,
)
from resetloop.lti import RationalTf, eval_tf
from resetloop.reset import bls_tf, clegg, gfore, simulate_sinusoid_steady


class TestElementHarmonics:
    def test_identity_gamma_collapses_to_bls(self):
        el = gfore(2.0, 1.0, d_r=0.3)
        bls = bls_tf(el)
        for w in np.geomspace(0.1, 100, 12):
            inter = hosidf_intermediates(el, float(w))
            assert np.allclose(inter.theta_d, 0.0, atol=1e-12)
            h1 = hosidf_reset(el, float(w), 1)
            assert h1 == pytest.approx(eval_tf(bls, float(w)), rel=1e-12)
            assert hosidf_reset(el, float(w), 3) == 0.0

    def test_even_harmonics_exactly_zero(self):
        el = gfore(1.0, 0.0)
        for n in (2, 4, 10):
            assert hosidf_reset(el, 1.0, n) == 0.0 + 0.0j

    def test_clegg_phase_frequency_independent(self):
        expected = -math.atan(math.pi / 4.0)
        for w in np.geomspace(1e-2, 1e2, 5):
            h1 = hosidf_reset(clegg(), float(w), 1)
            assert np.angle(h1) == pytest.approx(expected, abs=1e-12)
        assert math.degrees(expected) == pytest.approx(-38.15, abs=0.01)

    def test_theta_d_high_frequency_limit(self):
        for a_rho in (-0.5, 0.0, 0.5):
            el = gfore(3.0, a_rho)
            limit = 4.0 * (1.0 - a_rho) / (math.pi * (1.0 + a_rho))
            got = hosidf_intermediates(el, 3.0 * 1e6).theta_d[0, 0]
            assert got == pytest.approx(limit, abs=1e-4)

    def test_formula_vs_simulation(self):
        el = gfore(1.0, 0.0)
        rec = simulate_sinusoid_steady(el, 1.0, samples_per_period=1024)
        h1 = hosidf_reset(el, 1.0, 1)
        for n in (1, 3, 5):
            err = abs(hosidf_reset(el, 1.0, n) - rec.harmonic(n)) / abs(h1)
            assert err < 0.02

    def test_proportional_feedthrough_only_in_first_harmonic(self):
        plain = gfore(2.0, 0.0, d_r=0.0)
        prop = gfore(2.0, 0.0, d_r=0.8)
        w = 3.0
        assert hosidf_reset(prop, w, 1) - hosidf_reset(plain, w, 1) == pytest.approx(0.8)
        assert hosidf_reset(prop, w, 3) == hosidf_reset(plain, w, 3)

    def test_harmonic_index_validation(self):
        with pytest.raises(ValidationError):
            hosidf_reset(gfore(1.0, 0.0), 1.0, 0)
        with pytest.raises(ValidationError):
            hosidf_intermediates(gfore(1.0, 0.0), -1.0)


class TestOpenLoopHarmonic:
    def _loop(self, el, plant, c1=None, c2=None):
        return LoopConfig(plant=plant, element=el, c1=c1, c2=c2)

    def test_fundamental_has_no_rotation_factor(self):
        g = RationalTf((1.0,), (1.0, 0.05, 1.0))
        c2 = RationalTf((2.0,), (0.1, 1.0))
        el = gfore(1.0, 0.0)
        loop = self._loop(el, g, c2=c2)
        v, truncated = open_loop_harmonic(loop, 2.0, 1)
        expected = eval_tf(g, 2.0) * eval_tf(c2, 2.0) * hosidf_reset(el, 2.0, 1)
        assert not truncated
        assert v == pytest.approx(expected, rel=1e-12)

    def test_linear_loop_collapses(self):
        g = RationalTf((1.0,), (1.0, 0.4, 1.0))
        el = gfore(2.0, 1.0)
        loop = self._loop(el, g)
        l_bl = eval_tf(g, 1.5) * eval_tf(bls_tf(el), 1.5)
        v, _ = open_loop_harmonic(loop, 1.5, 1)
        assert v == pytest.approx(l_bl, rel=1e-12)
        assert open_loop_harmonic(loop, 1.5, 3)[0] == 0.0

    def test_rotation_factor_uses_phase_of_c1(self):
        g = RationalTf((1.0,), (1.0, 0.05, 1.0))
        c1 = RationalTf((1.0, 0.0), (1.0, 5.0))  # s/(s+5): frequency-dependent phase
        el = gfore(1.0, 0.0)
        loop = self._loop(el, g, c1=c1)
        w = 2.0
        v, _ = open_loop_harmonic(loop, w, 3)
        c1_v = eval_tf(c1, w)
        expected = (eval_tf(g, 3 * w) * hosidf_reset(el, w, 3) * c1_v
                    * np.exp(2j * np.angle(c1_v)))
        assert v == pytest.approx(expected, rel=1e-12)

    def test_third_harmonic_matches_open_chain_simulation(self):
        # stable stand-ins for the integrator blocks keep the open chain
        # periodic: G ~ 1/(s+eps)^2, C2 ~ pseudo-PI; run to periodicity so
        # the slowly decaying DC of the reset transient is gone
        from resetloop.lti import tustin_sos
        from resetloop.reset import discretize_reset, step_discrete

        g = RationalTf((1.0,), (1.0, 1.0, 0.25))            # 1/(s+0.5)^2
        c2 = RationalTf((1.0, 10.0), (1.0, 0.5))            # (s+10)/(s+0.5)
        el = gfore(5.0, 0.0)
        loop = self._loop(el, g, c2=c2)
        w = 3.0
        spp = 2048
        ts = 2 * math.pi / (w * spp)
        r_state = discretize_reset(el, ts)
        c2_step = tustin_sos(c2, ts).stepper()
        g_step = tustin_sos(g, ts).stepper()
        out = np.empty(spp)
        prev = None
        for p in range(300):
            for i in range(spp):
                e = math.sin(2 * math.pi * i / spp)
                u_r, _ = step_discrete(r_state, e)
                out[i] = g_step.step(c2_step.step(u_r))
            if prev is not None:
                resid = np.sqrt(np.mean((out - prev) ** 2)) / np.sqrt(np.mean(prev**2))
                if resid < 1e-9:
                    break
            prev = out.copy()
        assert resid < 1e-9, "open chain did not reach a periodic orbit"
        spectrum = np.fft.fft(out)
        for n in (1, 3):
            sim = 2j * spectrum[n] / spp
            pred, truncated = open_loop_harmonic(loop, w, n)
            assert not truncated
            assert abs(sim - pred) / abs(pred) < 0.05


class TestCglpHarmonics:
    def test_unity_gain_limits(self):
        design = make_cglp(1.0, 10.0, 0.0)
        low = abs(cglp_hosidf(design, 1e-6 * design.omega_l, 1))
        high = abs(cglp_hosidf(design, 1e6 * design.omega_f, 1))
        assert low == pytest.approx(1.0, abs=1e-6)
        assert high == pytest.approx(1.0, abs=1e-6)

    def test_ratio_vanishes_at_high_frequency_with_feedthrough(self):
        # the comparison configuration of the modified-vs-conventional study
        wl, wf = 6.28e2, 2.51e4
        modified = make_cglp(wl, wf, 0.0)
        conventional = make_cglp(wl, wf, 0.0, feedthrough=False)
        grid = np.geomspace(wl / 10, 1e3 * wl, 30)
        r_mod = harmonic_ratio(modified, grid)
        r_conv = harmonic_ratio(conventional, grid)
        high = grid > 10 * wf
        assert np.all(r_mod[high] < r_conv[high])
        # numeric limit at a very large frequency point (percent scale)
        far = harmonic_ratio(modified, [1e6 * wl])[0]
        assert far < 1e-3 * 100
        far_conv = harmonic_ratio(conventional, [1e6 * wl])[0]
        assert far_conv > 1.0  # conventional keeps a nonzero high-frequency ratio

    def test_ratio_zero_for_linear_element(self):
        design = make_cglp(1.0, 10.0, 1.0)  # gamma = 1: linear boundary
        ratios = harmonic_ratio(design, np.geomspace(0.1, 100, 10))
        np.testing.assert_allclose(ratios, 0.0, atol=1e-300)

    def test_detuned_lead_scales_high_corner(self):
        design = make_cglp(2.0, 40.0, 0.0, c_f=1.06)
        lead = design.lead_tf()
        assert abs(eval_tf(lead, 1e9)) == pytest.approx(40.0 / 1.06 / 2.0, rel=1e-9)


class TestHarmonicResponseContainer:
    def test_csv_round_trip(self, tmp_path):
        omega = np.array([1.0, 2.0])
        harms = (1, 3)
        values = np.array([[1 + 1j, 0.1 - 0.2j], [0.5 + 0j, 0.01 + 0.02j]])
        flags = np.array([[False, True], [False, False]])
        resp = HarmonicResponse(omega, harms, values, flags)
        path = tmp_path / "harm.csv"
        resp.write_csv(path)
        back = read_harmonics_csv(path)
        np.testing.assert_allclose(back.values, values)
        np.testing.assert_array_equal(back.truncated, flags)

    def test_even_harmonics_rejected(self):
        with pytest.raises(ValidationError):
            HarmonicResponse(np.array([1.0]), (1, 2),
                             np.zeros((1, 2), dtype=complex), np.zeros((1, 2), bool))

    def test_odd_harmonics_helper(self):
        assert odd_harmonics(7) == (1, 3, 5, 7)
        assert odd_harmonics(8) == (1, 3, 5, 7)

    def test_element_harmonics_builder(self):
        from resetloop.harmonics import element_harmonics

        el = gfore(2.0, 0.0)
        grid = np.geomspace(0.5, 20.0, 6)
        resp = element_harmonics(el, grid, n_max=5)
        assert resp.harmonics == (1, 3, 5)
        for i, w in enumerate(grid):
            assert resp.value(i, 3) == hosidf_reset(el, float(w), 3)
        assert not resp.truncated.any()

    def test_open_loop_harmonics_builder_flags(self):
        from resetloop.closedloop import LoopConfig
        from resetloop.harmonics import open_loop_harmonics
        from resetloop.lti import sample_frf

        g = RationalTf((1.0,), (1.0, 0.4, 1.0))
        table = sample_frf(g, np.geomspace(0.5, 10.0, 50))
        loop = LoopConfig(plant=table, element=gfore(1.0, 0.0), n_max=5)
        resp = open_loop_harmonics(loop, [1.0, 3.0])
        # at omega = 3 the fifth harmonic (15 rad/s) leaves the measured band
        i3 = 1
        assert resp.truncated[i3, resp.harmonics.index(5)]
        assert resp.values[i3, resp.harmonics.index(5)] == 0.0
        assert not resp.truncated[i3, resp.harmonics.index(3)]
        assert not resp.truncated[0, 0]
