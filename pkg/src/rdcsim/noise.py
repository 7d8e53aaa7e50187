"""Phase-noise and jitter engine.

Three layers, from spectrum to time domain:

1.  Single-sideband phase noise of the ring oscillator.  The white
    (thermal) part follows

        L(df) = (8 / (3*eta)) * N * (kT / P)
                * (V_DD / V_char + V_DD / (R_L * I_tail))
                * (f_o / df)^2

    which falls 20 dB per decade of offset and 3 dB per doubling of
    power.  Low-offset flicker noise adds a 1/df^3 term.

2.  RMS jitter from integrated phase noise.  With A the integrated
    phase-noise power over a band (in dB),

        J_rms = sqrt(2 * 10^(A/10)) / (2 * pi * f_o)

    Accumulated jitter over a measurement time T integrates offsets from
    1/T upward: a 1/df^2 spectrum gives J ~ sqrt(T), a 1/df^3 spectrum
    gives J ~ T, so flicker-dominated oscillators accumulate RMS jitter
    linearly with measurement time.

3.  A two-parameter time-domain model: rms(t) = sqrt((a*sqrt(t))^2 +
    (k*t)^2), with ``a`` the white coefficient and ``k`` the linear
    slope.  Sampling draws one frequency-drift rate per seed (rms k)
    plus a Wiener path scaled by ``a``, which reproduces exactly that
    RMS accumulation across seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import ValidationError
from .oscillator import N_STAGES, fit_stage_capacitance
from .profiles import DeviceProfile, PhysicalConstants, WidlarParams

__all__ = [
    "PhaseNoiseSpec",
    "JitterModel",
    "phase_noise_db",
    "fitted_widlar_params",
    "integrated_jitter",
    "accumulated_jitter",
    "accumulated_jitter_curve",
    "design_phase_noise",
    "jitter_slope",
    "sample_timing_error",
    "timing_error_path",
    "DEFAULT_BAND_LOW_HZ",
    "DEFAULT_SLOPE_POINTS",
]

# Band defaults for one-shot RMS integration; the accumulation curve
# instead opens the band at 1/T for each measurement time T.
DEFAULT_BAND_LOW_HZ = 1e3

# Secant endpoints for slope extraction.
DEFAULT_SLOPE_POINTS = (0.1e-3, 10e-3)


@dataclass(frozen=True)
class PhaseNoiseSpec:
    """Evaluable SSB phase-noise profile over an integration band.

    Either a power-law sum (``terms`` maps offset exponent n to the
    linear coefficient c_n in c_n / df^n) or an arbitrary callable
    returning dBc/Hz.  Power-law specs integrate in closed form.
    """

    f_o: float
    band: tuple[float, float]
    terms: dict[int, float] | None = None
    l_dbc_fn: Callable[[float], float] | None = None

    def __post_init__(self):
        f_low, f_high = self.band
        if f_low <= 0:
            raise ValidationError("band", "f_low must be > 0 (integral diverges)")
        if f_high <= f_low:
            raise ValidationError("band", "f_high must exceed f_low")
        if self.f_o <= 0:
            raise ValidationError("f_o", "must be > 0")
        if (self.terms is None) == (self.l_dbc_fn is None):
            raise ValidationError("spec", "provide exactly one of terms / l_dbc_fn")
        if self.terms is not None and any(c < 0 for c in self.terms.values()):
            raise ValidationError("terms", "coefficients must be >= 0")

    def l_linear(self, delta_f: float) -> float:
        if self.terms is not None:
            return sum(c / delta_f**n for n, c in self.terms.items())
        return 10.0 ** (self.l_dbc_fn(delta_f) / 10.0)

    def l_dbc(self, delta_f: float) -> float:
        return 10.0 * math.log10(self.l_linear(delta_f))


def phase_noise_db(
    delta_f: float,
    n_stages: int,
    consts: PhysicalConstants,
    w: WidlarParams,
    profile: DeviceProfile,
) -> float:
    """White SSB phase noise of the ring oscillator in dBc/Hz."""
    if delta_f <= 0:
        raise ValueError(f"offset must be > 0, got {delta_f}")
    if n_stages < N_STAGES:
        raise ValueError(f"need at least {N_STAGES} stages, got {n_stages}")
    if profile.active_power <= 0:
        raise ValueError("active power must be > 0")
    if w.v_char <= 0 or w.r_l_i_tail <= 0:
        raise ValueError("characteristic voltage and output swing must be > 0")
    linear = _white_linear(delta_f, n_stages, consts, w, profile)
    return 10.0 * math.log10(linear)


def _white_linear(delta_f, n_stages, consts, w, profile):
    kt_over_p = consts.boltzmann * consts.temperature_k / profile.active_power
    swing = (profile.supply_voltage / w.v_char
             + profile.supply_voltage / w.r_l_i_tail)
    ratio = profile.nominal_frequency / delta_f
    return (8.0 / (3.0 * w.eta_delay)) * n_stages * kt_over_p * swing * ratio * ratio


def fitted_widlar_params(
    profile: DeviceProfile,
    consts: PhysicalConstants | None = None,
    w: WidlarParams | None = None,
    n_stages: int = N_STAGES,
) -> WidlarParams:
    """Behavioral parameter fit for one profile.

    Pins C_eff to the nominal oscillation frequency, then splits the
    swing bracket (V_DD/V_char + V_DD/(R_L I_tail)) evenly so the white
    phase-noise model passes exactly through the profile's reference
    point.  The resulting values are fits, not extracted device data.
    """
    consts = consts or PhysicalConstants()
    base = fit_stage_capacitance(profile, w)
    offset, level_dbc = profile.phase_noise_ref
    target = 10.0 ** (level_dbc / 10.0)
    kt_over_p = consts.boltzmann * consts.temperature_k / profile.active_power
    prefactor = (8.0 / (3.0 * base.eta_delay)) * n_stages * kt_over_p
    ratio = profile.nominal_frequency / offset
    bracket = target / (prefactor * ratio * ratio)
    if bracket <= 0:
        raise ValidationError("phase_noise_ref", "anchor is unreachably low")
    # V_DD/v + V_DD/v = bracket  =>  v = 2 V_DD / bracket
    v = 2.0 * profile.supply_voltage / bracket
    return replace(base, v_char=v, r_l_i_tail=v)


def integrated_jitter(spec: PhaseNoiseSpec) -> float:
    """RMS jitter from the phase noise integrated over the spec's band.

    Power-law profiles integrate in closed form:
    int c/f^n df = c * (f1^(1-n) - f2^(1-n)) / (n - 1) for n > 1.
    Arbitrary profiles fall back to adaptive quadrature.
    """
    f_low, f_high = spec.band
    if spec.terms is not None:
        power = _power_law_integral(spec.terms, f_low, f_high)
    else:
        power, _err = quad(spec.l_linear, f_low, f_high, limit=200)
    return math.sqrt(2.0 * power) / (2.0 * math.pi * spec.f_o)


def _power_law_integral(terms: dict[int, float], f1: float, f2: float) -> float:
    total = 0.0
    for n, c in terms.items():
        if c == 0.0:
            continue
        if n == 1:
            total += c * math.log(f2 / f1)
        elif n == 0:
            total += c * (f2 - f1)
        else:
            total += c * (f1 ** (1 - n) - f2 ** (1 - n)) / (n - 1)
    return total


def accumulated_jitter_curve(
    spec: PhaseNoiseSpec, times: Sequence[float]
) -> np.ndarray:
    """RMS jitter accumulated over each measurement time.

    For a measurement of length T the oscillator integrates spectral
    content from 1/T up to the spec's upper band edge; shorter
    measurements are blind to low-offset noise.
    """
    _f_low, f_high = spec.band
    out = np.empty(len(times), dtype=float)
    for i, t in enumerate(times):
        if t <= 0:
            raise ValueError(f"measurement time must be > 0, got {t}")
        lo = 1.0 / t
        if lo >= f_high:
            raise ValueError(
                f"measurement time {t:g} s too short for band top {f_high:g} Hz"
            )
        sub = PhaseNoiseSpec(f_o=spec.f_o, band=(lo, f_high),
                             terms=spec.terms, l_dbc_fn=spec.l_dbc_fn)
        out[i] = integrated_jitter(sub)
    return out


def design_phase_noise(
    profile: DeviceProfile,
    consts: PhysicalConstants | None = None,
    f_high: float | None = None,
    slope_points: tuple[float, float] = DEFAULT_SLOPE_POINTS,
) -> PhaseNoiseSpec:
    """Composite white + flicker spectrum calibrated to a profile.

    The 1/df^2 coefficient comes from the fitted white model; the 1/df^3
    coefficient is solved so the two-point secant slope of the
    accumulated-jitter curve equals the profile's jitter slope.
    """
    consts = consts or PhysicalConstants()
    w = fitted_widlar_params(profile, consts)
    f_o = profile.nominal_frequency
    f_high = f_high if f_high is not None else f_o / 2.0
    c2 = _white_linear(1.0, N_STAGES, consts, w, profile)  # c2 = L_lin(df) * df^2

    t1, t2 = slope_points
    k_target = profile.jitter_slope

    def secant_for(c3: float) -> float:
        spec = PhaseNoiseSpec(f_o=f_o, band=(DEFAULT_BAND_LOW_HZ, f_high),
                              terms={2: c2, 3: c3})
        j = accumulated_jitter_curve(spec, [t1, t2])
        return (j[1] - j[0]) / (t2 - t1)

    if k_target <= 0:
        return PhaseNoiseSpec(f_o=f_o, band=(DEFAULT_BAND_LOW_HZ, f_high),
                              terms={2: c2, 3: 0.0})
    guess = (k_target * 2.0 * math.pi * f_o) ** 2
    lo, hi = 0.0, guess
    while secant_for(hi) < k_target:
        hi *= 4.0
        if hi > guess * 1e6:
            raise ValidationError("jitter_slope", "flicker fit did not converge")
    c3 = brentq(lambda c: secant_for(c) - k_target, lo, hi, rtol=1e-14)
    return PhaseNoiseSpec(f_o=f_o, band=(DEFAULT_BAND_LOW_HZ, f_high),
                          terms={2: c2, 3: c3})


@dataclass(frozen=True)
class JitterModel:
    """White + linearly accumulating jitter: rms(t) = sqrt(a^2 t + k^2 t^2)."""

    a: float = 0.0
    k: float = 0.0

    def __post_init__(self):
        if self.a < 0:
            raise ValidationError("a", "must be >= 0")
        if self.k < 0:
            raise ValidationError("k", "must be >= 0")

    @classmethod
    def from_profile(cls, profile: DeviceProfile) -> "JitterModel":
        return cls(a=profile.white_jitter_coeff, k=profile.jitter_slope)


def accumulated_jitter(model: JitterModel, t: float) -> float:
    """Total RMS timing error accumulated after t seconds."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    white = model.a * math.sqrt(t)
    flicker = model.k * t
    return math.hypot(white, flicker)


def jitter_slope(model_or_curve, t1: float = DEFAULT_SLOPE_POINTS[0],
                 t2: float = DEFAULT_SLOPE_POINTS[1]) -> float:
    """Two-point secant slope of an accumulated-jitter curve.

    Accepts a JitterModel, a callable J(t), or a sampled curve as a
    (times, jitters) pair.  A pure linear model returns exactly k.
    """
    if not 0 < t1 < t2:
        raise ValueError(f"need 0 < t1 < t2, got ({t1}, {t2})")
    if isinstance(model_or_curve, JitterModel):
        j1 = accumulated_jitter(model_or_curve, t1)
        j2 = accumulated_jitter(model_or_curve, t2)
    elif callable(model_or_curve):
        j1 = float(model_or_curve(t1))
        j2 = float(model_or_curve(t2))
    else:
        times, jitters = model_or_curve
        j1, j2 = np.interp([t1, t2], np.asarray(times), np.asarray(jitters))
    return (j2 - j1) / (t2 - t1)


def timing_error_path(
    model: JitterModel, checkpoints: Sequence[float], seed: int
) -> np.ndarray:
    """One seed's timing-error path sampled at the given checkpoints.

    Per seed, a single frequency-drift rate c ~ Normal(0, k) is drawn
    (the oscillator runs consistently fast or slow for that noise
    realization) plus an independent Wiener path scaled by ``a``.  The
    path is fully deterministic given (model, seed, checkpoints), and
    the cross-seed RMS at time t converges to accumulated_jitter(t).
    """
    t = np.asarray(checkpoints, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("checkpoints must be a non-empty 1-D sequence")
    if np.any(t < 0):
        raise ValueError("checkpoints must be >= 0")
    if np.any(np.diff(t) <= 0):
        raise ValueError("checkpoints must be strictly increasing")
    rng = np.random.default_rng(seed)
    drift_rate = rng.normal(0.0, model.k) if model.k > 0 else 0.0
    eps = drift_rate * t
    if model.a > 0:
        gaps = np.diff(np.concatenate(([0.0], t)))
        wiener = np.cumsum(np.sqrt(gaps) * rng.standard_normal(t.size))
        eps = eps + model.a * wiener
    return eps


def sample_timing_error(model: JitterModel, t: float, seed: int) -> float:
    """Timing error at a single time; equals the one-point path value."""
    if t == 0:
        return 0.0
    return float(timing_error_path(model, [t], seed)[0])
