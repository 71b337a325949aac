"""Reset element: BLS transfer function, the strict discrete reset surface,
and the steady-state sinusoid oracle."""

import math

import numpy as np
import pytest

from resetloop.design import make_cglp
from resetloop.errors import NonConvergenceError, NonFiniteSignalError, ValidationError
from resetloop.lti import eval_tf
from resetloop.reset import (
    ResetElement,
    bls_tf,
    clegg,
    discretize_reset,
    gfore,
    identity_element,
    reset_surface_hit,
    run_sequence,
    simulate_sinusoid_steady,
    step_discrete,
)


class TestBlsTf:
    def test_gfore_dc_gain(self):
        tf = bls_tf(gfore(1.0, 0.0))
        assert eval_tf(tf, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_proportional_gfore_dc_gain(self):
        # the feedthrough of the (omega_l, omega_f) = (1, 10) design is 1/9
        design = make_cglp(1.0, 10.0, 0.0)
        el = design.reset_element()
        assert el.d_r == pytest.approx(1.0 / 9.0, abs=1e-15)
        assert eval_tf(bls_tf(el), 0.0) == pytest.approx(1.0 + 1.0 / 9.0, abs=1e-12)

    def test_clegg_is_integrator(self):
        tf = bls_tf(clegg())
        for w in (0.1, 1.0, 10.0):
            assert eval_tf(tf, w) == pytest.approx(1.0 / (1j * w), rel=1e-12)

    def test_gamma_bounds(self):
        with pytest.raises(ValidationError):
            gfore(1.0, -1.0)
        with pytest.raises(ValidationError):
            gfore(1.0, 1.5)
        gfore(1.0, 1.0)  # linear boundary allowed


class TestResetSurface:
    def test_strictness_predicate(self):
        assert reset_surface_hit(0.0, 1.0)
        assert reset_surface_hit(-1.0, 1.0)
        assert not reset_surface_hit(1.0, 1.0)
        # previous sample was the exact zero: product is 0, no second reset
        assert not reset_surface_hit(-1.0, 0.0)
        assert not reset_surface_hit(1.0, 0.0)

    @pytest.mark.parametrize("seq,expected", [
        ([1.0, -1.0], 1),
        ([1.0, 0.0, -1.0], 1),
        ([1.0, 0.0, 1.0], 1),
    ])
    def test_crossing_sequences(self, seq, expected):
        state = discretize_reset(gfore(1.0, 0.0), 0.01)
        _, flags = run_sequence(state, seq)
        assert int(np.sum(flags)) == expected

    def test_one_reset_per_crossing_random(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            seq = np.round(rng.standard_normal(400), 3)  # some exact zeros likely
            state = discretize_reset(gfore(2.0, -0.3), 0.01)
            _, flags = run_sequence(state, seq)
            sign_changes = 0
            zeros = 0
            prev = 0.0
            for v in seq:
                if v == 0.0:
                    if prev != 0.0:
                        zeros += 1
                elif v * prev < 0.0:
                    sign_changes += 1
                if not (v == 0.0 and prev == 0.0):
                    prev = v
            # consecutive zeros after the first re-fire the surface (e_k = 0)
            consec = sum(1 for a, b in zip(seq, seq[1:]) if a == 0.0 and b == 0.0)
            first_zero = 1 if seq[0] == 0.0 else 0
            assert int(np.sum(flags)) == sign_changes + zeros + consec + first_zero


class TestStepDiscrete:
    def test_zero_input_zero_output(self):
        state = discretize_reset(gfore(3.0, 0.0, d_r=0.7), 0.01)
        out, _ = run_sequence(state, np.zeros(50))
        np.testing.assert_array_equal(out, np.zeros(50))

    def test_identity_gamma_bit_equals_linear_path(self):
        rng = np.random.default_rng(23)
        seq = rng.standard_normal(500)
        el = gfore(4.0, 1.0, d_r=0.25)
        state = discretize_reset(el, 0.005)
        out, _ = run_sequence(state, seq)
        # reference: same scalar recursion, no surface monitoring
        ref_state = discretize_reset(el, 0.005)
        x = 0.0
        ref = np.empty_like(out)
        for i, e in enumerate(seq):
            ref[i] = ref_state.ct * x + ref_state.dt * e + ref_state.d_r * e
            x = ref_state.at * x + ref_state.bt * e
        np.testing.assert_array_equal(out, ref)

    def test_feedthrough_path_with_idle_state(self):
        # gamma = 0 and zero input keep the state at zero; output is d_r * e
        state = discretize_reset(gfore(1.0, 0.0, d_r=0.5), 0.01)
        u0, _ = step_discrete(state, 0.0)
        assert u0 == 0.0
        assert state.x == 0.0

    def test_non_finite_input_rejected(self):
        state = discretize_reset(gfore(1.0, 0.0), 0.01)
        with pytest.raises(NonFiniteSignalError):
            step_discrete(state, float("nan"))

    def test_two_resets_per_period_steady(self):
        rec = simulate_sinusoid_steady(gfore(1.0, 0.0), 1.0, samples_per_period=1024)
        assert rec.resets_per_period == 2

    def test_order_limit(self):
        el = ResetElement(np.eye(2) * -1.0, np.ones(2), np.ones(2), 0.0, np.zeros(2))
        with pytest.raises(ValidationError):
            discretize_reset(el, 0.01)


class TestDiscretizeReset:
    def test_step_response_matches_continuous(self):
        # never-resetting GFORE follows 1 - exp(-t) within 1% at t = 1
        state = discretize_reset(gfore(1.0, 1.0), 0.01)
        u = 0.0
        for _ in range(100):
            u, _ = step_discrete(state, 1.0)
        expected = 1.0 - math.exp(-1.0)
        assert abs(u - expected) / expected < 0.01


class TestSteadyStateOracle:
    def test_linear_element_matches_bls(self):
        el = gfore(2.0, 1.0)
        rec = simulate_sinusoid_steady(el, 3.0, samples_per_period=1024)
        h1 = rec.harmonic(1)
        ref = eval_tf(bls_tf(el), 3.0)
        assert abs(h1 - ref) / abs(ref) < 0.005

    def test_clegg_first_harmonic_phase(self):
        rec = simulate_sinusoid_steady(clegg(), 1.0, samples_per_period=2048)
        phase_deg = math.degrees(np.angle(rec.harmonic(1)))
        assert phase_deg == pytest.approx(-38.15, abs=0.1)

    def test_gfore_matches_formula_within_2pct(self):
        from resetloop.harmonics import hosidf_reset

        el = gfore(1.0, 0.0)
        rec = simulate_sinusoid_steady(el, 1.0, samples_per_period=1024)
        h1 = hosidf_reset(el, 1.0, 1)
        assert abs(rec.harmonic(1) - h1) / abs(h1) < 0.02

    def test_half_wave_symmetry_even_harmonics_vanish(self):
        for a_rho in (-0.5, 0.0, 0.5):
            rec = simulate_sinusoid_steady(gfore(1.0, a_rho), 1.0, samples_per_period=1024)
            spectrum = np.abs(np.fft.fft(rec.u))
            assert spectrum[2] / spectrum[1] < 0.01
            assert spectrum[4] / spectrum[1] < 0.01

    def test_state_contracts_at_resets(self):
        # the true dissipation property: |x_after| <= |x_before| at every hit
        el = gfore(1.5, 0.4)
        state = discretize_reset(el, 2 * math.pi / (1.0 * 1024))
        for i in range(5 * 1024):
            e = math.sin(2 * math.pi * i / 1024)
            x_before_update = state.gamma * (state.at * state.x + state.bt * e) \
                if reset_surface_hit(e, state.e_prev) else None
            x_linear = state.at * state.x + state.bt * e
            step_discrete(state, e)
            if x_before_update is not None:
                assert abs(state.x) <= abs(x_linear) + 1e-15

    def test_first_harmonic_at_least_bls_gain(self):
        # resets raise the fundamental above the BLS response (regression of
        # the actual behavior; the output does not shrink under resetting)
        from resetloop.harmonics import hosidf_reset

        for a_rho in (0.0, 0.5, -0.5):
            el = gfore(2.0, a_rho)
            bls = bls_tf(el)
            for w in np.geomspace(0.2, 50.0, 8):
                h1 = abs(hosidf_reset(el, float(w), 1))
                assert h1 >= abs(eval_tf(bls, float(w))) - 1e-12

    def test_precondition_validation(self):
        with pytest.raises(ValidationError):
            simulate_sinusoid_steady(gfore(1.0, 0.0), 1.0, samples_per_period=100)
        with pytest.raises(ValidationError):
            simulate_sinusoid_steady(gfore(1.0, 0.0), 1.0, ts=0.33)  # not integer spp

    def test_non_convergence_detection(self):
        with pytest.raises(NonConvergenceError):
            simulate_sinusoid_steady(gfore(0.001, 0.9), 1.0, samples_per_period=256,
                                     n_periods=2, max_periods=2, tol=1e-12)

    def test_trace_csv(self, tmp_path):
        rec = simulate_sinusoid_steady(gfore(1.0, 0.0), 2.0, samples_per_period=256,
                                       n_periods=5, tol=1e-3)
        path = tmp_path / "trace.csv"
        rec.write_csv(path)
        header = open(path).readline().strip()
        assert header == "t,e_r,u_r,reset_flag"
        data = np.genfromtxt(path, delimiter=",", names=True)
        assert data["t"].size == 256


class TestElementJson:
    def test_round_trip(self):
        el = gfore(2.5, -0.3, d_r=0.11)
        back = ResetElement.from_json_dict(el.to_json_dict())
        np.testing.assert_array_equal(back.a_r, el.a_r)
        np.testing.assert_array_equal(back.gamma, el.gamma)
        assert back.d_r == el.d_r

    def test_identity_element_is_transparent(self):
        el = identity_element()
        assert el.is_linear()
        assert eval_tf(bls_tf(el), 17.0) == pytest.approx(1.0 + 0.0j, abs=1e-15)
