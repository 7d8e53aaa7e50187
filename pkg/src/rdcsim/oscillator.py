"""Resistance to frequency chain of the current-starved ring oscillator.

The sensing chain is::

    R_sensor -> effective degeneration -> tail current -> stage delay -> f

A resistor-degenerated current mirror sets the tail current

    I_SS = ( (sqrt(2/beta + 4*R*(V_SG - |V_Tp|)) - sqrt(2/beta)) / (2*R) )^2

which falls monotonically as the sensor resistance starves the stages.
Each of the three differential stages contributes a delay
t_p = eta * C_eff * V_DD / I_SS, and the oscillator runs at

    f_osc = 1 / (2 * (t_p1 + t_p2 + t_p3))

so the frequency depends only on the *sum* (equivalently the average) of
the per-stage delays.  A finite load resistance across the sensor caps
the effective degeneration, which is what flattens the measured transfer
beyond the specified input range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ValidationError
from .profiles import DeviceProfile, WidlarParams

__all__ = [
    "StageDelays",
    "TransferCurve",
    "widlar_current",
    "stage_delay",
    "dro_frequency",
    "characteristic_voltage",
    "effective_resistance",
    "oscillation_frequency",
    "transfer_curve",
    "fit_stage_capacitance",
    "saturation_resistance",
    "N_STAGES",
    "DEFAULT_SATURATION_OHM",
    "NOMINAL_SENSOR_OHM",
]

N_STAGES = 3

# Load resistance seen across the sensor; beyond ~40x this value the
# frequency changes by well under 1% per decade of R.
DEFAULT_SATURATION_OHM = 500.0

# Operating point used to pin C_eff so a profile oscillates at its
# nominal frequency.
NOMINAL_SENSOR_OHM = 1e3


@dataclass(frozen=True)
class StageDelays:
    """Per-stage propagation delays of the three ring stages."""

    t_p: tuple[float, float, float]

    def __post_init__(self):
        if len(self.t_p) != N_STAGES:
            raise ValidationError("t_p", f"expected {N_STAGES} delays")
        if any(t <= 0 for t in self.t_p):
            raise ValidationError("t_p", "all delays must be > 0")


def widlar_current(r_sensor: float, w: WidlarParams) -> float:
    """Tail current of the degenerated mirror for a given sensor resistance.

    Uses the rationalized form 4*dv^2 / (sqrt(2/b + 4*R*dv) + sqrt(2/b))^2,
    algebraically identical to the quotient form but free of cancellation
    as R -> 0, where the current approaches the square-law limit
    (beta/2) * dv^2.  For large R the product I_SS * R approaches dv.
    """
    if r_sensor <= 0:
        raise ValueError(f"sensor resistance must be > 0, got {r_sensor}")
    dv = w.gate_overdrive
    root = math.sqrt(2.0 / w.beta_m2 + 4.0 * r_sensor * dv) + math.sqrt(2.0 / w.beta_m2)
    return 4.0 * dv * dv / (root * root)


def stage_delay(i_ss: float, w: WidlarParams, vdd: float) -> float:
    """Propagation delay of one starved stage, eta * C_eff * V_DD / I_SS."""
    if i_ss <= 0:
        raise ValueError(f"stage current must be > 0, got {i_ss}")
    return w.eta_delay * w.c_eff * vdd / i_ss


def dro_frequency(delays: StageDelays | Sequence[float]) -> float:
    """Oscillation frequency 1 / (2 * sum of stage delays).

    Permutation invariant: only the delay sum matters, so mismatched
    stages average out and equal delays reduce to 1 / (2 * N * t_p).
    """
    t_p = delays.t_p if isinstance(delays, StageDelays) else tuple(delays)
    if len(t_p) != N_STAGES:
        raise ValueError(f"expected {N_STAGES} stage delays, got {len(t_p)}")
    if any(t <= 0 for t in t_p):
        raise ValueError("stage delays must all be > 0")
    return 1.0 / (2.0 * sum(t_p))


def characteristic_voltage(w: WidlarParams, regime: str = "long") -> float:
    """Characteristic voltage of a stage device.

    Long-channel devices give dv / gamma; short-channel (velocity
    saturated) devices give E_c * L / gamma.
    """
    if regime == "long":
        return w.delta_v / w.gamma
    if regime == "short":
        return w.e_c * w.channel_length / w.gamma
    raise ValueError(f"regime must be 'long' or 'short', got {regime!r}")


def effective_resistance(r_sensor: float, saturation_ohm: float = DEFAULT_SATURATION_OHM):
    """Degeneration actually seen by the mirror: R in parallel with the load.

    Strictly increasing in R and bounded by ``saturation_ohm``, which is
    what saturates the transfer at large sensor resistance.  Accepts
    scalars or arrays.
    """
    return r_sensor * saturation_ohm / (r_sensor + saturation_ohm)


def oscillation_frequency(
    r_sensor: float,
    profile: DeviceProfile,
    w: WidlarParams,
    saturation_ohm: float = DEFAULT_SATURATION_OHM,
) -> float:
    """Forward model: sensor resistance to oscillation frequency.

    Composes the full chain with three matched stages.  This is the
    canonical truth function used by curve construction and by the
    calibration experiments.
    """
    r_eff = effective_resistance(r_sensor, saturation_ohm)
    i_ss = widlar_current(r_eff, w)
    t_p = stage_delay(i_ss, w, profile.supply_voltage)
    return dro_frequency((t_p, t_p, t_p))


def fit_stage_capacitance(
    profile: DeviceProfile,
    w: WidlarParams | None = None,
    r_nominal: float = NOMINAL_SENSOR_OHM,
    saturation_ohm: float = DEFAULT_SATURATION_OHM,
) -> WidlarParams:
    """Pin C_eff so the profile oscillates at its nominal frequency.

    One calibration constant per profile: with the bias defaults fixed,
    C_eff is solved so that R = ``r_nominal`` yields exactly
    ``profile.nominal_frequency``.  Returns a copy of ``w`` with C_eff
    (and the channel length) set for this profile.
    """
    from dataclasses import replace

    base = w if w is not None else WidlarParams()
    r_eff = effective_resistance(r_nominal, saturation_ohm)
    i_ss = widlar_current(r_eff, base)
    t_p_target = 1.0 / (2.0 * N_STAGES * profile.nominal_frequency)
    c_eff = t_p_target * i_ss / (base.eta_delay * profile.supply_voltage)
    return replace(base, c_eff=c_eff, channel_length=profile.technology_node)


@dataclass(frozen=True)
class TransferCurve:
    """Monotone resistance to frequency mapping with an exact interpolant.

    ``resistances`` are strictly increasing, ``frequencies`` strictly
    decreasing; the shape-preserving piecewise-cubic interpolant passes
    through every sample and stays monotone between them.
    """

    resistances: np.ndarray
    frequencies: np.ndarray
    _interp: PchipInterpolator

    @classmethod
    def from_points(cls, resistances, frequencies) -> "TransferCurve":
        r = np.asarray(resistances, dtype=float)
        f = np.asarray(frequencies, dtype=float)
        if r.ndim != 1 or r.size < 2 or r.shape != f.shape:
            raise ValidationError("samples", "need >= 2 matching (r, f) samples")
        if not np.all(np.diff(r) > 0):
            raise ValidationError("resistances", "must be strictly increasing")
        if not np.all(np.diff(f) < 0):
            raise ValidationError("frequencies", "must be strictly decreasing")
        interp = PchipInterpolator(r, f, extrapolate=False)
        return cls(resistances=r, frequencies=f, _interp=interp)

    def frequency_at(self, r) -> np.ndarray | float:
        """Interpolated frequency; raises RangeError outside the knots."""
        from .errors import RangeError

        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < self.resistances[0]) or np.any(r_arr > self.resistances[-1]):
            raise RangeError(
                f"resistance outside curve range "
                f"[{self.resistances[0]:g}, {self.resistances[-1]:g}]"
            )
        out = self._interp(r_arr)
        return float(out) if np.isscalar(r) or r_arr.ndim == 0 else out

    @property
    def r_min(self) -> float:
        return float(self.resistances[0])

    @property
    def r_max(self) -> float:
        return float(self.resistances[-1])


def transfer_curve(
    profile: DeviceProfile,
    w: WidlarParams,
    n_points: int = 200,
    saturation_ohm: float = DEFAULT_SATURATION_OHM,
) -> TransferCurve:
    """Sample the forward model log-uniformly over the sensor range.

    Log spacing concentrates samples at low R where the curvature lives.
    """
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    r_min, r_max = profile.sensor_range
    r = np.geomspace(r_min, r_max, n_points)
    # Vectorized chain, identical arithmetic to the scalar composition.
    r_eff = effective_resistance(r, saturation_ohm)
    dv = w.gate_overdrive
    root = np.sqrt(2.0 / w.beta_m2 + 4.0 * r_eff * dv) + math.sqrt(2.0 / w.beta_m2)
    i_ss = 4.0 * dv * dv / (root * root)
    t_p = w.eta_delay * w.c_eff * profile.supply_voltage / i_ss
    f = 1.0 / (2.0 * N_STAGES * t_p)
    return TransferCurve.from_points(r, f)


def saturation_resistance(
    profile: DeviceProfile,
    w: WidlarParams,
    saturation_ohm: float = DEFAULT_SATURATION_OHM,
    rel_threshold: float = 0.01,
    r_scan_max: float = 1e7,
    n_scan: int = 4000,
) -> float:
    """Smallest R beyond which the transfer is effectively flat.

    Reported as the first resistance past the sensitivity peak where
    |df/dlogR| drops below ``rel_threshold`` of its peak value.
    """
    r = np.geomspace(profile.sensor_range[0], r_scan_max, n_scan)
    f = np.array([oscillation_frequency(x, profile, w, saturation_ohm) for x in r])
    log_r = np.log(r)
    slope = np.abs(np.gradient(f, log_r))
    peak_idx = int(np.argmax(slope))
    below = np.nonzero(slope[peak_idx:] < rel_threshold * slope[peak_idx])[0]
    if below.size == 0:
        return float("inf")
    return float(r[peak_idx + below[0]])
