import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rdcsim.errors import CounterOverflowError, ValidationError
from rdcsim.noise import JitterModel
from rdcsim.profiles import builtin_profile, with_overrides
from rdcsim.resolution import (
    REPORTED_TRANSIENT,
    ReadoutTrace,
    analytic_bits,
    analytic_bits_asymptote,
    log_checkpoints,
    max_bits_from_count,
    monte_carlo,
    resolution_curve,
    sqej,
    supply_noise_sweep,
    transient_jitter_model,
    vt_sensitivity_sweep,
)

T_D1 = 1.0 / 83.2e6


class TestSqej:
    def test_pure_quantization(self):
        t_meas = 1024 * T_D1
        assert sqej(T_D1, 0.0, t_meas) == pytest.approx(1.0 / 1024, rel=1e-12)

    def test_long_time_asymptote_is_k(self):
        assert sqej(T_D1, 1.88e-6, 1e6) == pytest.approx(1.88e-6, rel=1e-6)

    def test_design1_operating_point(self):
        got = sqej(T_D1, 1.88e-6, 10e-3)
        assert got == pytest.approx(3.0819230769230765e-06, rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            sqej(0.0, 0.0, 1e-3)
        with pytest.raises(ValueError):
            sqej(T_D1, -1e-9, 1e-3)
        with pytest.raises(ValueError):
            sqej(T_D1, 0.0, 0.0)


class TestAnalyticBits:
    def test_design1_at_10ms(self):
        assert analytic_bits(T_D1, 1.88e-6, 10e-3) == pytest.approx(18.3077, abs=1e-3)

    def test_asymptote_is_log2_inverse_k(self):
        assert analytic_bits_asymptote(1.88e-6) == math.log2(1.0 / 1.88e-6)
        assert analytic_bits_asymptote(1.88e-6) == pytest.approx(19.020835907, abs=1e-8)
        assert analytic_bits_asymptote(3.67e-7) == pytest.approx(21.3777, abs=1e-3)

    def test_zero_jitter_one_bit_per_doubling(self):
        for t in (1e-4, 1e-3, 1e-2):
            gained = analytic_bits(T_D1, 0.0, 2 * t) - analytic_bits(T_D1, 0.0, t)
            assert gained == pytest.approx(1.0, abs=1e-12)

    def test_halving_k_adds_exactly_one_bit_to_asymptote(self):
        k = 1.88e-6
        assert analytic_bits_asymptote(k / 2) - analytic_bits_asymptote(k) == (
            pytest.approx(1.0, abs=1e-12)
        )

    def test_halving_period_adds_one_bit_in_quantization_regime(self):
        # k*t well under T: jitter contributes nothing yet
        k, t = 1e-9, 1e-4
        gained = analytic_bits(T_D1 / 2, k, t) - analytic_bits(T_D1, k, t)
        assert gained == pytest.approx(1.0, abs=1e-3)

    @given(t=st.floats(1e-5, 1.0), factor=st.floats(1.1, 50.0))
    def test_increasing_and_bounded(self, t, factor):
        k = 3.67e-7
        b1 = analytic_bits(T_D1, k, t)
        b2 = analytic_bits(T_D1, k, t * factor)
        assert b2 > b1
        assert b2 < analytic_bits_asymptote(k)


class TestMaxBitsFromCount:
    @pytest.mark.parametrize(
        "count,expected",
        [(765_959, 19.546907644550828),
         (2_101_999, 21.003330552280126),
         (3_126_546, 21.57613831269946),
         (1, 0.0)],
    )
    def test_goldens(self, count, expected):
        assert max_bits_from_count(count) == pytest.approx(expected, abs=1e-12)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            max_bits_from_count(0)


class TestMonteCarlo:
    def test_zero_jitter_all_seeds_identical(self, d1):
        cps = log_checkpoints(1e-5, 50e-3, 25)
        trace = monte_carlo(d1, JitterModel(0.0, 0.0), range(10), cps)
        assert np.all(trace.sigma == 0.0)
        assert np.all(trace.counts == trace.counts[0])

    def test_deterministic_given_seed_list(self, d2):
        cps = log_checkpoints(1e-5, 50e-3, 20)
        jm = transient_jitter_model(d2)
        a = monte_carlo(d2, jm, range(10), cps)
        b = monte_carlo(d2, jm, range(10), cps)
        assert np.array_equal(a.counts, b.counts)

    def test_rows_nondecreasing(self, d1):
        cps = log_checkpoints(1e-5, 80e-3, 40)
        jm = JitterModel(a=1e-9, k=2e-6)
        trace = monte_carlo(d1, jm, range(12), cps)
        assert np.all(np.diff(trace.counts, axis=1) >= 0)

    def test_counts_scale_with_checkpoint_times(self, d1):
        cps = np.array([1e-3, 2e-3, 4e-3])
        trace = monte_carlo(d1, JitterModel(0.0, 0.0), range(2), cps)
        assert trace.counts[0, 1] == pytest.approx(2 * trace.counts[0, 0], abs=1)
        assert trace.counts[0, 2] == pytest.approx(4 * trace.counts[0, 0], abs=1)

    def test_overflow_propagates(self, d1):
        small = with_overrides(d1, counter_bits=16)
        cps = np.array([1e-3, 5e-3])
        with pytest.raises(CounterOverflowError):
            monte_carlo(small, JitterModel(0.0, 0.0), range(2), cps)

    def test_sigma_tracks_linear_jitter_law(self, d1):
        # large-seed sample sigma of counts approaches f_o * k * t
        jm = transient_jitter_model(d1)
        cps = np.array([20e-3, 50e-3, 80e-3])
        trace = monte_carlo(d1, jm, range(4000), cps)
        for i, t in enumerate(cps):
            theory = d1.nominal_frequency * jm.k * t
            assert abs(trace.sigma[i] - theory) / theory < 0.05

    def test_needs_two_seeds(self, d1):
        with pytest.raises(ValueError):
            monte_carlo(d1, JitterModel(), [1], [1e-3, 2e-3])

    def test_divergence_pattern_for_d1(self, d1):
        # sigma silent early, then growing past the divergence point
        jm = transient_jitter_model(d1)
        cps = log_checkpoints(1e-6, 150e-3, 120)
        trace = monte_carlo(d1, jm, range(10), cps)
        early = trace.checkpoints < 2e-3
        assert np.all(trace.sigma[early] == 0.0)
        assert trace.sigma[-1] > 1.0


class TestResolutionCurve:
    def test_quiet_trace_reduces_to_count_log(self, d1):
        cps = log_checkpoints(1e-5, 5e-3, 12)
        trace = monte_carlo(d1, JitterModel(0.0, 0.0), range(5), cps)
        curve = resolution_curve(trace)
        assert curve.saturation_time is None
        expected = np.log2(trace.mean)
        assert curve.bits == pytest.approx(expected, rel=1e-12)

    def test_synthetic_sigma_ratio(self):
        # sigma = mean / 2^m gives exactly m bits
        m = 7
        mean = 2.0**20
        counts = np.array([
            [int(mean - mean / 2**m)] * 3,
            [int(mean + mean / 2**m)] * 3,
        ])
        counts = np.cumsum(np.abs(counts), axis=1)  # make rows nondecreasing
        trace = ReadoutTrace.from_counts([1.0, 2.0, 3.0], counts)
        got = np.log2(trace.mean / trace.sigma)
        curve = resolution_curve(trace)
        assert curve.bits == pytest.approx(got, rel=1e-12)

    def test_zero_jitter_matches_analytic_within_one_count(self, d1):
        cps = log_checkpoints(1e-5, 5e-3, 15)
        trace = monte_carlo(d1, JitterModel(0.0, 0.0), range(3), cps)
        curve = resolution_curve(trace)
        for t, bits in zip(curve.times, curve.bits):
            analytic = analytic_bits(T_D1, 0.0, t)
            assert abs(2**bits - 2**analytic) <= 1.0

    def test_max_bits_bounded_by_jitter_ceiling(self):
        # max_bits <= log2(1/k) + 0.5 for the canonical reference runs
        cps = log_checkpoints(1e-6, 150e-3, 120)
        for name in ("d1", "d2", "d3"):
            p = builtin_profile(name)
            jm = transient_jitter_model(p)
            curve = resolution_curve(monte_carlo(p, jm, range(10), cps))
            assert curve.max_bits <= math.log2(1.0 / jm.k) + 0.5

    def test_saturation_detection_threshold(self, d1):
        jm = transient_jitter_model(d1)
        cps = log_checkpoints(1e-6, 150e-3, 120)
        trace = monte_carlo(d1, jm, range(10), cps)
        curve = resolution_curve(trace)
        assert curve.saturation_time is not None
        idx = np.nonzero(trace.checkpoints == curve.saturation_time)[0][0]
        assert trace.sigma[idx] >= 1.0
        assert np.all(trace.sigma[:idx] < 1.0)


class TestTransientModel:
    @pytest.mark.parametrize("name", ["d1", "d2", "d3"])
    def test_slope_reciprocal_of_saturation_count(self, name):
        p = builtin_profile(name)
        jm = transient_jitter_model(p)
        ref = REPORTED_TRANSIENT[name]
        assert jm.k == pytest.approx(
            1.0 / (p.nominal_frequency * ref.saturation_time), rel=1e-12
        )

    def test_unknown_profile_falls_back_to_own_slope(self, d1):
        custom = with_overrides(d1, name="custom")
        jm = transient_jitter_model(custom)
        assert jm.k == custom.jitter_slope


class TestSupplyNoiseSweep:
    def test_zero_amplitude_equals_plain_run(self, d2):
        jm = transient_jitter_model(d2)
        cps = log_checkpoints(1e-5, 60e-3, 30)
        pairs = supply_noise_sweep(d2, jm, [0.0], range(10), cps)
        plain = resolution_curve(monte_carlo(d2, jm, range(10), cps))
        assert pairs[0] == (0.0, plain.max_bits)

    def test_bits_nonincreasing_with_amplitude(self, d2):
        jm = transient_jitter_model(d2)
        pairs = supply_noise_sweep(
            d2, jm, [0.0, 2e-3, 5e-3, 10e-3, 20e-3], range(100)
        )
        bits = [b for _, b in pairs]
        assert all(b2 <= b1 for b1, b2 in zip(bits, bits[1:]))

    def test_negative_amplitude_rejected(self, d2):
        with pytest.raises(ValueError):
            supply_noise_sweep(d2, JitterModel(), [-1e-3], range(2))


class TestVtSweep:
    def test_zero_coefficients_collapse_to_nominal(self, d1):
        jm = transient_jitter_model(d1)
        cps = log_checkpoints(1e-5, 60e-3, 30)
        worst, best = vt_sensitivity_sweep(
            d1, jm, (1.5, 2.0), (-25.0, 100.0), (3, 3), range(8), cps,
            k_volt_coeff=0.0, k_temp_coeff=0.0,
        )
        flat = with_overrides(d1, supply_pushing=0.0, temp_coeff=0.0)
        worst0, best0 = vt_sensitivity_sweep(
            flat, jm, (1.5, 2.0), (-25.0, 100.0), (2, 2), range(8), cps,
            k_volt_coeff=0.0, k_temp_coeff=0.0,
        )
        nominal = resolution_curve(monte_carlo(d1, jm, range(8), cps)).max_bits
        assert worst0 == best0 == nominal
        assert abs(worst - nominal) < 0.3  # frequency shift alone barely moves bits
        assert abs(best - nominal) < 0.3

    def test_single_point_grid(self, d1):
        jm = transient_jitter_model(d1)
        cps = log_checkpoints(1e-5, 60e-3, 30)
        worst, best = vt_sensitivity_sweep(
            d1, jm, (d1.supply_voltage, d1.supply_voltage), (25.0, 25.0),
            (1, 1), range(8), cps,
        )
        nominal = resolution_curve(monte_carlo(d1, jm, range(8), cps)).max_bits
        assert worst == best == nominal

    def test_default_coefficients_give_reference_spread(self, d1):
        # corner study sized to span roughly two bits on the first design
        jm = transient_jitter_model(d1)
        worst, best = vt_sensitivity_sweep(
            d1, jm, (1.5, 2.0), (-25.0, 100.0), (3, 3), range(10)
        )
        assert worst < best
        assert 1.3 < best - worst < 2.9


class TestReadoutTraceValidation:
    def test_rejects_decreasing_rows(self):
        with pytest.raises(ValidationError):
            ReadoutTrace.from_counts([1.0, 2.0], np.array([[5, 4], [1, 2]]))

    def test_rejects_negative(self):
        with pytest.raises(ValidationError):
            ReadoutTrace.from_counts([1.0, 2.0], np.array([[-1, 4], [1, 2]]))
