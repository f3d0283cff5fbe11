"""Detection-threshold closed forms against an exact-SNR root-finder, the
integration-time optimizers, and the compensation/excess-sensor laws.

The root-finder solves SNR(g) = 1 on the full population model with no
small-signal expansion; it is the arbiter for every closed form here.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ramsey_sensing.sensor import EnsembleConfig, SensorModel, contrast, mean_population, qpn_variance
from ramsey_sensing.sensitivity import (
    VALIDITY_LIMIT,
    SensitivityResult,
    compensation_sensors,
    compensation_threshold,
    continuous_optimal_u,
    exact_snr,
    excess_sensors,
    gmin_constant,
    gmin_continuous_kernel,
    gmin_continuous_two_tone,
    gmin_gaussian_kernel,
    gmin_intermittent,
    gmin_variance,
    mc_gmin_crossing,
    optimal_integration_time,
    root_found_gmin,
    snr_curve,
)
from ramsey_sensing.signals import (
    Constant,
    StochasticAmplitude,
    ToneConvention,
    TwoToneStochastic,
)
from ramsey_sensing.streams import derive_stream

TWO_PI = 2 * math.pi


class TestConstantClosedForm:
    def test_frozen_unit_example(self):
        g = gmin_constant(SensorModel(1.0, 1.0), EnsembleConfig(1000, 1), 1.0).g_min
        assert_allclose(g, 0.05213714442179438, rtol=1e-12)

    def test_matches_slope_inversion_oracle(self):
        # at quadrature bias the exact crossing solves C sin(g t) sqrt(NM) =
        # sqrt(1 - C^2 sin^2(g t)), i.e. sin(g t) = 1/(C sqrt(NM+1)); the
        # closed form is its small-angle, large-NM limit
        sensor = SensorModel(0.8, 10e-3, theta=math.pi / 2)
        ens = EnsembleConfig(2000, 5)
        t_i = 6e-3
        rf = root_found_gmin(Constant(0.0), sensor, ens, t_i).g_min
        c = contrast(sensor, t_i)
        oracle = math.asin(1.0 / (c * math.sqrt(ens.total + 1))) / t_i
        assert_allclose(rf, oracle, rtol=1e-9)
        cf = gmin_constant(sensor, ens, t_i).g_min
        assert abs(cf - rf) / rf < 2e-5

    def test_scaling_in_ensemble_and_contrast(self):
        sensor = SensorModel(0.9, 10e-3)
        t_i = 5e-3
        g1 = gmin_constant(sensor, EnsembleConfig(1000, 1), t_i).g_min
        g4 = gmin_constant(sensor, EnsembleConfig(1000, 4), t_i).g_min
        assert_allclose(g1 / g4, 2.0, rtol=1e-12)
        half = gmin_constant(SensorModel(0.45, 10e-3), EnsembleConfig(1000, 1), t_i).g_min
        assert_allclose(half / g1, 2.0, rtol=1e-12)

    def test_validity_flag_and_time_check(self):
        # tiny ensembles push g_min*t past the small-angle regime
        assert not gmin_constant(SensorModel(0.9, 1.0), EnsembleConfig(4, 1), 1.0).validity
        assert gmin_constant(SensorModel(0.9, 1.0), EnsembleConfig(10**6, 1), 1.0).validity
        with pytest.raises(ValueError):
            gmin_constant(SensorModel(0.9, 1.0), EnsembleConfig(10, 1), 0.0)

    def test_result_rejects_nonpositive_gmin(self):
        with pytest.raises(ValueError):
            SensitivityResult(0.0, "closed_form", True, {})


class TestGaussianKernel:
    def test_solves_the_linearized_quadratic(self):
        # x = kappa g^2 must satisfy NM C^2 x^2 - 2 C^2 x - (1 - C^2) = 0
        kappa = 0.5
        for c in (0.05, 0.3, 0.9, 1.0):
            for nm in (10, 1000, 10**6):
                g = gmin_gaussian_kernel(c, EnsembleConfig(nm, 1), kappa)
                x = kappa * g * g
                residual = nm * c * c * x * x - 2 * c * c * x - (1 - c * c)
                assert abs(residual) < 1e-12 * max(1.0, nm * c * c * x * x)

    def test_perfect_contrast_limit(self):
        for nm in (1000, 10**6):
            g = gmin_gaussian_kernel(1.0, EnsembleConfig(nm, 1), 2.0)
            assert_allclose(g, math.sqrt((2.0 / nm) / 2.0), rtol=1e-12)

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            gmin_gaussian_kernel(0.0, EnsembleConfig(10, 1), 1.0)
        with pytest.raises(ValueError):
            gmin_gaussian_kernel(1.1, EnsembleConfig(10, 1), 1.0)
        with pytest.raises(ValueError):
            gmin_gaussian_kernel(0.5, EnsembleConfig(10, 1), 0.0)


class TestVarianceClosedForm:
    def test_reduces_to_kernel_with_time_squared_curvature(self):
        sensor = SensorModel(0.9, 10e-3)
        ens = EnsembleConfig(1000, 1)
        t_i = 4e-3
        direct = gmin_gaussian_kernel(contrast(sensor, t_i), ens, t_i * t_i / 2.0)
        assert gmin_variance(sensor, ens, t_i).g_min == direct

    def test_root_finder_agreement_in_validity_regime(self):
        sensor = SensorModel(0.9, 10e-3)
        for nm, tol in ((10**4, 0.005), (10**6, 5e-4)):
            ens = EnsembleConfig(nm, 1)
            cf = gmin_variance(sensor, ens, 8e-3)
            rf = root_found_gmin(StochasticAmplitude(0.0), sensor, ens, 8e-3)
            assert cf.validity
            assert abs(cf.g_min - rf.g_min) / rf.g_min < tol


class TestIntermittentClosedForm:
    OMEGA_S = TWO_PI * 2000.0
    SIGMA = TWO_PI * 275.0

    def test_frozen_burst_sensitivity(self):
        sensor = SensorModel(0.9047787237550715, 7.97e-3)
        res = gmin_intermittent(sensor, EnsembleConfig(1000, 1), self.OMEGA_S, self.SIGMA)
        assert_allclose(res.g_min / TWO_PI, 293.5471862857504, rtol=1e-12)
        assert res.validity
        assert res.inputs["t1"] == pytest.approx(0.5e-3, rel=1e-12)

    def test_half_split_convention_doubles_the_threshold(self):
        sensor = SensorModel(0.9, 10e-3)
        ens = EnsembleConfig(1000, 1)
        full = gmin_intermittent(sensor, ens, self.OMEGA_S, self.SIGMA)
        half = gmin_intermittent(
            sensor, ens, self.OMEGA_S, self.SIGMA, ToneConvention.HALF_SPLIT)
        assert_allclose(half.g_min, 2.0 * full.g_min, rtol=1e-12)


class TestRootFinder:
    def test_snr_vanishes_at_zero_signal(self):
        sensor = SensorModel(0.9, 10e-3)
        spec = TwoToneStochastic(TWO_PI * 1000, 0.0, TWO_PI * 500)
        assert exact_snr(spec, sensor, EnsembleConfig(1000, 1), 1e-3) == 0.0

    def test_crossing_really_sits_at_unit_snr(self):
        sensor = SensorModel(0.85, 10e-3)
        ens = EnsembleConfig(5000, 1)
        spec = StochasticAmplitude(0.0)
        res = root_found_gmin(spec, sensor, ens, 6e-3)
        snr = exact_snr(StochasticAmplitude(res.g_min), sensor, ens, 6e-3)
        assert_allclose(snr, 1.0, rtol=1e-10)

    def test_undetectable_signal_raises(self):
        # max population shift C/2 sits below the projection-noise floor
        sensor = SensorModel(0.02, 10e-3)
        with pytest.raises(ValueError):
            root_found_gmin(
                TwoToneStochastic(TWO_PI * 1000, 0.0, TWO_PI * 500), sensor,
                EnsembleConfig(1000, 1), 1e-3)

    def test_mc_crossing_concordance(self):
        sensor = SensorModel(0.9, 10e-3, theta=math.pi / 2)
        ens = EnsembleConfig(50, 8)
        cf = gmin_constant(sensor, ens, 7e-3).g_min
        mc = mc_gmin_crossing(
            Constant(0.0), sensor, ens, 7e-3, derive_stream(11, 0),
            bracket_center=cf, n_shots=30_000, n_avg=2)
        assert mc.method == "monte_carlo"
        assert abs(mc.g_min - cf) / cf < 0.05


class TestSnrCurve:
    SENSOR = SensorModel(1.0, 10e-3)
    ENS = EnsembleConfig(1000, 1)
    SPEC = TwoToneStochastic(TWO_PI * 1000, TWO_PI * 10, TWO_PI * 500)

    def test_analytic_curve_matches_exact_snr(self):
        t_grid = [0.5e-3, 1e-3, 2e-3]
        curve = snr_curve(self.SPEC, self.SENSOR, self.ENS, TWO_PI * 10, t_grid)
        for (t_i, snr) in curve:
            spec = TwoToneStochastic(self.SPEC.omega_s, TWO_PI * 10, self.SPEC.sigma)
            assert_allclose(snr, exact_snr(spec, self.SENSOR, self.ENS, t_i), rtol=1e-12)

    def test_rephasing_times_beat_the_midpoints(self):
        period = TWO_PI / self.SPEC.omega_s
        curve = dict(snr_curve(self.SPEC, self.SENSOR, self.ENS, TWO_PI * 10,
                               [period, 1.5 * period, 2 * period]))
        assert curve[period] > curve[1.5 * period]
        assert curve[2 * period] > curve[1.5 * period]

    def test_mc_variant_is_deterministic_and_concordant(self):
        t_grid = [1e-3, 2e-3, 3e-3]
        factory = lambda idx: derive_stream(11, 1, idx)
        a = snr_curve(self.SPEC, self.SENSOR, self.ENS, TWO_PI * 10, t_grid,
                      stream_factory=factory, shots_per_point=50_000)
        b = snr_curve(self.SPEC, self.SENSOR, self.ENS, TWO_PI * 10, t_grid,
                      stream_factory=factory, shots_per_point=50_000)
        assert a == b
        analytic = snr_curve(self.SPEC, self.SENSOR, self.ENS, TWO_PI * 10, t_grid)
        sigma = math.sqrt(self.ENS.total / 50_000)
        for (_, mc), (_, exact) in zip(a, analytic):
            assert abs(mc - exact) < 4 * sigma


class TestOptimalIntegrationTime:
    def test_constant_optimum_is_the_coherence_time(self):
        sensor = SensorModel(0.8, 10e-3)
        ot = optimal_integration_time("constant", sensor, EnsembleConfig(1000, 1))
        assert abs(ot.t_opt / sensor.t2 - 1.0) < 1e-3
        assert not ot.at_bracket_edge

    def test_variance_optimum_frozen_values(self):
        sensor = SensorModel(1.0, 10e-3)
        ratios = {
            10**3: 1.279022665070217,
            10**6: 1.2629299473563174,
        }
        for nm, expected in ratios.items():
            ot = optimal_integration_time("variance", sensor, EnsembleConfig(nm, 1))
            assert_allclose(ot.t_opt / sensor.t2, expected, rtol=2e-4)

    def test_continuous_two_tone_needs_a_spec(self):
        sensor = SensorModel(1.0, 10e-3)
        with pytest.raises(ValueError):
            optimal_integration_time("continuous_two_tone", sensor, EnsembleConfig(1000, 1))

    def test_continuous_two_tone_sits_near_a_period_multiple(self):
        sensor = SensorModel(1.0, 10e-3)
        spec = TwoToneStochastic(TWO_PI * 1000, TWO_PI * 10, TWO_PI * 500)
        ot = optimal_integration_time(
            "continuous_two_tone", sensor, EnsembleConfig(1000, 1), spec)
        period = TWO_PI / spec.omega_s
        assert abs(ot.t_opt / period - round(ot.t_opt / period)) < 0.05
        assert 1.0e-3 < ot.t_opt < 50e-3

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ValueError):
            optimal_integration_time("ramp", SensorModel(1.0, 1.0), EnsembleConfig(10, 1))


class TestContinuousTwoTone:
    OMEGA_S = TWO_PI * 1000.0
    SIGMA = TWO_PI * 500.0

    def test_kernel_and_root_finder_agree_at_high_fidelity(self):
        sensor = SensorModel(0.95, 10e-3)
        ens = EnsembleConfig(10**6, 1)
        ck = gmin_continuous_kernel(sensor, ens, self.OMEGA_S, self.SIGMA)
        cr = gmin_continuous_two_tone(sensor, ens, self.OMEGA_S, self.SIGMA)
        assert ck.validity
        assert abs(ck.g_min - cr.g_min) / cr.g_min < 0.01

    def test_kernel_optimum_is_an_integer_period_multiple(self):
        sensor = SensorModel(0.95, 10e-3)
        res = gmin_continuous_kernel(sensor, EnsembleConfig(1000, 1), self.OMEGA_S, self.SIGMA)
        period = TWO_PI / self.OMEGA_S
        n = res.inputs["n_periods"]
        assert isinstance(n, int) and n >= 1
        assert_allclose(res.inputs["t_opt"], n * period, rtol=1e-12)

    def test_kernel_extends_below_the_saturation_point_with_validity_flag(self):
        # the root-finder cannot cross SNR=1 here; the linearized kernel
        # still returns a number but flags the regime
        sensor = SensorModel(0.02, 10e-3)
        ens = EnsembleConfig(1000, 1)
        res = gmin_continuous_kernel(sensor, ens, self.OMEGA_S, self.SIGMA)
        assert res.g_min > 0 and not res.validity
        with pytest.raises(ValueError):
            gmin_continuous_two_tone(sensor, ens, self.OMEGA_S, self.SIGMA)


class TestCompensation:
    def test_constant_counts_are_inverse_square_fidelity(self):
        # F = 0.5 lands exactly on the 1/F^2 = 4 boundary and must not
        # round up to 5
        for f in [round(0.1 * k, 1) for k in range(1, 10)]:
            m = compensation_sensors("constant", f, n_shots=1000, t2=10e-3)
            assert m == math.ceil(1.0 / f**2)

    def test_constant_threshold_is_exact(self):
        assert compensation_threshold("constant", 0.25, n_shots=1000, t2=10e-3) == 16.0

    def test_variance_counts_are_the_threshold_ceiling(self):
        for f in (0.1, 0.3, 0.5, 0.7, 0.9):
            m = compensation_sensors("variance", f, n_shots=1000, t2=10e-3)
            th = compensation_threshold("variance", f, n_shots=1000, t2=10e-3)
            assert m == math.ceil(th)

    def test_variance_threshold_band(self):
        # the kernel costs a little more than the constant signal's 1/F^2
        for f in [round(0.1 * k, 1) for k in range(1, 10)]:
            th = compensation_threshold("variance", f, n_shots=1000, t2=10e-3)
            assert 1.03 < th * f * f < 1.16

    def test_intermittent_counts_are_the_threshold_ceiling(self):
        kwargs = dict(n_shots=1000, t2=7.97e-3, omega_s=TWO_PI * 2000, sigma=TWO_PI * 275)
        m = compensation_sensors("intermittent", 0.5, **kwargs)
        th = compensation_threshold("intermittent", 0.5, **kwargs)
        assert m == math.ceil(th)

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            compensation_sensors("constant", 0.0, n_shots=10, t2=1.0)
        with pytest.raises(ValueError):
            compensation_sensors("ramp", 0.5, n_shots=10, t2=1.0)
        with pytest.raises(ValueError):
            compensation_threshold("ramp", 0.5, n_shots=10, t2=1.0)


class TestContinuousOptimum:
    def test_unit_fidelity_fixed_point(self):
        assert_allclose(continuous_optimal_u(1.0), 1.5936242600400405, rtol=1e-12)

    def test_low_fidelity_limit(self):
        assert_allclose(continuous_optimal_u(1e-9), 2.0, rtol=1e-12)

    def test_self_consistency(self):
        for f in (0.05, 0.3, 0.7, 1.0):
            u = continuous_optimal_u(f)
            assert_allclose(u, 2.0 * (1.0 - f * f * math.exp(-u)), rtol=1e-12)


class TestExcessSensors:
    def test_unit_fidelity_is_exactly_flat(self):
        for t1 in (1e-3, 0.03, 0.4, 2.0):
            assert excess_sensors(1.0, t1) == 1.0

    def test_short_burst_inverse_square_law(self):
        f = 0.2
        products = [excess_sensors(f, t1) * t1**2
                    for t1 in np.logspace(-3, -2, 10)]
        assert max(products) / min(products) - 1 < 1e-3

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            excess_sensors(0.0, 1e-3)
        with pytest.raises(ValueError):
            excess_sensors(0.5, 6.0)


class TestQpnVarianceConsistency:
    def test_snr_uses_population_level_noise(self):
        # one hand-checked value ties exact_snr to its two ingredients
        sensor = SensorModel(0.9, 10e-3)
        ens = EnsembleConfig(1000, 1)
        spec = StochasticAmplitude(80.0)
        t_i = 5e-3
        p_g = mean_population(spec, sensor, t_i)
        p_0 = mean_population(StochasticAmplitude(0.0), sensor, t_i)
        expected = abs(p_g - p_0) / math.sqrt(qpn_variance(p_g, ens))
        assert_allclose(exact_snr(spec, sensor, ens, t_i), expected, rtol=1e-15)
