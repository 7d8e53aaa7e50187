"""Transfer-curve calibration and readout-error evaluation.

The resistance to frequency transfer is nonlinear, so readout applies
the inverse of a fitted curve.  Three strategies are modeled:

1. per-device offline: fit the device's own curve from n measured
   points, invert it during readout;
2. per-batch offline + online: fit one representative device of a
   batch, then correct the curve on-line with 3 fresh points;
3. reduced per-device offline + online: few offline points on the
   actual device, plus the same 3-point online update.

The online update is an affine frequency correction (scale + offset),
the most three points can support, and absorbs drift of the operating
point between calibration and measurement.  The evaluation harness
draws disjoint calibration and test resistances, inverts measured
frequencies, and reports RMS relative resistance error in percent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import CalibrationError, RangeError, ValidationError
from .oscillator import (
    DEFAULT_SATURATION_OHM,
    TransferCurve,
    oscillation_frequency,
)
from .profiles import DeviceProfile, WidlarParams

__all__ = [
    "CalibrationSet",
    "FittedInverse",
    "DriftModel",
    "fit_offline",
    "online_update",
    "invert",
    "rms_error_experiment",
]

# Readout calibration happens in the upper part of the sensor range.
DEFAULT_DRAW_RANGE = (2e3, 20e3)


@dataclass(frozen=True)
class CalibrationSet:
    """Measured (resistance, frequency) pairs for fitting or updating."""

    points: tuple[tuple[float, float], ...]
    kind: str = "offline"

    def __post_init__(self):
        if self.kind not in ("offline", "online"):
            raise ValidationError("kind", "must be 'offline' or 'online'")
        minimum = 2 if self.kind == "offline" else 3
        if len(self.points) < minimum:
            raise ValidationError(
                "points", f"{self.kind} calibration needs >= {minimum} points"
            )
        resistances = [r for r, _ in self.points]
        if len(set(resistances)) != len(resistances):
            raise ValidationError("points", "resistances must be distinct")

    def sorted_points(self) -> tuple[np.ndarray, np.ndarray]:
        pts = sorted(self.points)
        r = np.array([p[0] for p in pts])
        f = np.array([p[1] for p in pts])
        return r, f


@dataclass(frozen=True)
class FittedInverse:
    """Fitted base curve plus an affine online frequency correction.

    corrected(r) = scale * base(r) + offset; scale stays positive so the
    corrected curve keeps the base curve's monotonicity.
    """

    base_curve: TransferCurve
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ValidationError("scale", "must be > 0 to preserve monotonicity")

    def corrected(self, r) -> float:
        return self.scale * self.base_curve.frequency_at(r) + self.offset

    def frequency_range(self) -> tuple[float, float]:
        lo = self.scale * float(self.base_curve.frequencies[-1]) + self.offset
        hi = self.scale * float(self.base_curve.frequencies[0]) + self.offset
        return lo, hi


def fit_offline(cal: CalibrationSet) -> FittedInverse:
    """Shape-preserving monotone fit through offline calibration points.

    The interpolant passes through every knot exactly; two points give
    the linear interpolant.  Data whose frequencies are not strictly
    decreasing in resistance cannot describe this transfer and are
    rejected.
    """
    if cal.kind != "offline":
        raise CalibrationError("fit_offline requires an offline calibration set")
    r, f = cal.sorted_points()
    if not np.all(np.diff(f) < 0):
        raise CalibrationError(
            "calibration points are not monotone (frequency must fall with R)"
        )
    return FittedInverse(base_curve=TransferCurve.from_points(r, f))


def online_update(fit: FittedInverse, online: CalibrationSet) -> FittedInverse:
    """Least-squares affine update of the curve from 3 fresh points.

    Solves min over (scale, offset) of sum (scale * base(r_i) + offset
    - f_i)^2.  Points that already sit on the base curve return the
    identity correction to machine precision.  A non-positive scale
    would flip the curve and is rejected with a diagnostic.
    """
    if online.kind != "online":
        raise CalibrationError("online_update requires an online calibration set")
    if len(online.points) != 3:
        raise CalibrationError(
            f"online update takes exactly 3 points, got {len(online.points)}"
        )
    r, f_meas = online.sorted_points()
    base = np.array([fit.base_curve.frequency_at(x) for x in r])
    design = np.column_stack([base, np.ones_like(base)])
    (scale, offset), *_ = np.linalg.lstsq(design, f_meas, rcond=None)
    if scale <= 0:
        raise CalibrationError(
            f"online update rejected: fitted scale {scale:g} <= 0 would break "
            "monotonicity (measured points likely inconsistent)"
        )
    return replace(fit, scale=float(scale), offset=float(offset))


def invert(fit: FittedInverse, f: float) -> float:
    """Resistance whose corrected frequency equals ``f``.

    Bracketed root finding on the monotone corrected curve; knot
    frequencies return their knot resistance exactly.  Frequencies
    outside the corrected range raise RangeError.
    """
    lo, hi = fit.frequency_range()
    if not lo <= f <= hi:
        raise RangeError(f"frequency {f:g} outside corrected range [{lo:g}, {hi:g}]")
    knot_freqs = fit.scale * fit.base_curve.frequencies + fit.offset
    exact = np.nonzero(knot_freqs == f)[0]
    if exact.size:
        return float(fit.base_curve.resistances[exact[0]])
    r_lo = fit.base_curve.r_min
    r_hi = fit.base_curve.r_max
    return float(
        brentq(lambda r: fit.corrected(r) - f, r_lo, r_hi,
               rtol=4 * np.finfo(float).eps, xtol=1e-30)
    )


@dataclass(frozen=True)
class DriftModel:
    """Affine frequency drift between calibration and measurement."""

    scale: float = 1.0
    offset_hz: float = 0.0

    def apply(self, f: float) -> float:
        return self.scale * f + self.offset_hz


def _invert_clamped(fit: FittedInverse, f: float) -> float:
    """Inversion with out-of-range frequencies pinned to the nearest end.

    Drifted devices can push measured frequencies past the fitted range;
    a real readout saturates at the range edge rather than failing.
    """
    lo, hi = fit.frequency_range()
    if f <= lo:
        return fit.base_curve.r_max
    if f >= hi:
        return fit.base_curve.r_min
    return invert(fit, f)


def _draw_distinct(rng, low, high, n, taken=()):
    """Log-uniform draws in [low, high], distinct from ``taken``."""
    out = []
    taken = set(taken)
    while len(out) < n:
        r = float(np.exp(rng.uniform(math.log(low), math.log(high))))
        if r not in taken:
            taken.add(r)
            out.append(r)
    return out


def rms_error_experiment(
    profile: DeviceProfile,
    strategy: int,
    n_offline: int,
    drift: DriftModel | None = None,
    trials: int = 100,
    seed: int = 0,
    w: WidlarParams | None = None,
    saturation_ohm: float = DEFAULT_SATURATION_OHM,
    draw_range: tuple[float, float] | None = None,
    batch_spread: float = 0.05,
    n_test: int = 5,
) -> float:
    """Mean RMS relative resistance error of one strategy, in percent.

    Per trial: draw ``n_offline`` calibration resistances (range ends
    plus log-uniform interior points) and ``n_test`` disjoint test
    resistances; fit per the strategy; measure the drifted device at the
    test points; invert; accumulate RMS of |R_hat - R| / R.  Strategy 2
    fits a batch-representative device whose current-source parameters
    carry ``batch_spread`` relative process spread.  Trial RNG streams
    derive from (seed, trial), so results do not depend on scheduling.
    """
    if strategy not in (1, 2, 3):
        raise ValueError(f"strategy must be 1, 2, or 3, got {strategy}")
    min_offline = 2
    if n_offline < min_offline:
        raise ValueError(f"n_offline must be >= {min_offline}, got {n_offline}")
    drift = drift or DriftModel()
    if w is None:
        from .noise import fitted_widlar_params

        w = fitted_widlar_params(profile)
    if draw_range is None:
        r_min, r_max = profile.sensor_range
        draw_range = (max(DEFAULT_DRAW_RANGE[0], r_min),
                      min(DEFAULT_DRAW_RANGE[1], r_max))
    low, high = draw_range

    def true_freq(r, params):
        return oscillation_frequency(r, profile, params, saturation_ohm)

    rms_values = np.empty(trials)
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        interior = _draw_distinct(rng, low, high, max(0, n_offline - 2))
        cal_r = sorted([low, high] + interior)[:n_offline]

        if strategy == 2:
            rep_params = replace(
                w,
                c_eff=w.c_eff * (1.0 + batch_spread * rng.standard_normal()),
                beta_m2=w.beta_m2 * (1.0 + batch_spread * rng.standard_normal()),
            )
        else:
            rep_params = w
        cal_points = tuple((r, true_freq(r, rep_params)) for r in cal_r)
        fit = fit_offline(CalibrationSet(points=cal_points, kind="offline"))

        if strategy in (2, 3):
            online_r = _draw_distinct(rng, low, high, 3, taken=cal_r)
            online_points = tuple(
                (r, drift.apply(true_freq(r, w))) for r in online_r
            )
            fit = online_update(fit, CalibrationSet(points=online_points, kind="online"))

        test_r = _draw_distinct(rng, low, high, n_test, taken=cal_r)
        errors = np.empty(n_test)
        for i, r in enumerate(test_r):
            f_meas = drift.apply(true_freq(r, w))
            r_hat = _invert_clamped(fit, f_meas)
            errors[i] = (r_hat - r) / r
        rms_values[trial] = math.sqrt(float(np.mean(errors**2)))
    return float(np.mean(rms_values)) * 100.0
