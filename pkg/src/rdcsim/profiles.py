"""Device profiles, physical constants, and configuration handling.

A profile is the full parameter set of one converter design: supply,
oscillator frequency, phase-noise anchor, jitter slopes, readout timing,
counter width, sensor range, and sensitivity coefficients.  Three reference
designs ship as built-ins:

    d1  0.35 um converter tuned for low energy per conversion step
    d2  0.35 um converter with speed-up latches for lower phase noise
    d3  0.18 um converter with speed-up latches and scaled supply power

Profiles are immutable after construction and safe to share across
parallel workers.  The config format is flat ``section.key = value`` text
with SI base units; dB quantities carry a ``_dbc``/``_db`` suffix.

Note: for d2 the duty-cycled average power implied by the stored active
power (19.2 uW at 10 ms / 1 s) differs slightly from the 19.1 uW quoted
elsewhere for that design; the stored value is the measured one.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError, ValidationError

__all__ = [
    "PhysicalConstants",
    "DeviceProfile",
    "WidlarParams",
    "load_profile",
    "load_profile_file",
    "serialize_profile",
    "builtin_profiles",
    "builtin_profile",
    "resolve_profile",
    "BUILTIN_NAMES",
]

# Sensor input range is specified below 20 kohm; the transfer flattens out
# beyond that, so wider ranges are rejected at load time.
MAX_SENSOR_OHM = 20e3


@dataclass(frozen=True)
class PhysicalConstants:
    """Boltzmann constant and operating temperature for noise formulas."""

    boltzmann: float = 1.380649e-23
    temperature_k: float = 300.0

    def __post_init__(self):
        if self.temperature_k <= 0:
            raise ValidationError("temperature_k", "must be > 0")
        if self.boltzmann <= 0:
            raise ValidationError("boltzmann", "must be > 0")


@dataclass(frozen=True)
class DeviceProfile:
    """Complete parameter set for one converter design.

    Units are SI base throughout: hertz, seconds, watts, volts, ohms,
    meters.  ``phase_noise_ref`` anchors the single-sideband phase noise
    as ``(offset_hz, dbc_per_hz)``.  ``jitter_slope`` is the dimensionless
    rate at which RMS timing error accumulates per second of measurement
    time; ``white_jitter_coeff`` scales the sqrt(t) white component and is
    zero for the flicker-dominated built-ins.
    """

    name: str
    technology_node: float
    supply_voltage: float
    nominal_frequency: float
    active_power: float
    phase_noise_ref: tuple[float, float]
    jitter_slope: float
    white_jitter_coeff: float
    readout_time: float
    readout_period: float
    counter_bits: int
    sensor_range: tuple[float, float]
    supply_pushing: float
    temp_coeff: float

    def __post_init__(self):
        if not self.name:
            raise ValidationError("name", "must be non-empty")
        for field_name in ("technology_node", "supply_voltage",
                           "nominal_frequency", "active_power"):
            if getattr(self, field_name) <= 0:
                raise ValidationError(field_name, "must be > 0")
        if self.jitter_slope < 0:
            raise ValidationError("jitter_slope", "must be >= 0")
        if self.white_jitter_coeff < 0:
            raise ValidationError("white_jitter_coeff", "must be >= 0")
        if self.readout_time <= 0:
            raise ValidationError("readout_time", "must be > 0")
        if self.readout_time > self.readout_period:
            raise ValidationError(
                "readout_time",
                f"must be <= readout_period ({self.readout_time} > "
                f"{self.readout_period})",
            )
        if self.counter_bits < 1:
            raise ValidationError("counter_bits", "must be >= 1")
        offset, _level = self.phase_noise_ref
        if offset <= 0:
            raise ValidationError("phase_noise_ref", "offset must be > 0")
        r_min, r_max = self.sensor_range
        if not (0 < r_min < r_max):
            raise ValidationError("sensor_range", "requires 0 < r_min < r_max")
        if r_max > MAX_SENSOR_OHM:
            raise ValidationError(
                "sensor_range", f"r_max must be <= {MAX_SENSOR_OHM:g} ohm"
            )
        if self.supply_pushing < 0:
            raise ValidationError("supply_pushing", "must be >= 0")


@dataclass(frozen=True)
class WidlarParams:
    """Bias-point and noise parameters of the current source and stages.

    ``beta_m2`` is the transconductance parameter of the mirror device,
    ``v_sg_m1 - v_tp_m1_abs`` its gate overdrive.  ``c_eff`` is the single
    fitted stage capacitance that pins the nominal oscillation frequency;
    ``v_char`` and ``r_l_i_tail`` (output swing) enter the phase-noise
    model.  ``gamma`` is the channel noise coefficient, ``delta_v`` the
    stage overdrive, ``e_c`` the velocity-saturation critical field.

    The bias values are behavioral fits, not extracted device data.
    """

    beta_m2: float = 1e-3
    v_sg_m1: float = 1.0
    v_tp_m1_abs: float = 0.4
    eta_delay: float = 1.0
    c_eff: float = 100e-15
    v_char: float = 1.2
    r_l_i_tail: float = 1.2
    gamma: float = 2.0 / 3.0
    delta_v: float = 0.4
    e_c: float = 4e6
    channel_length: float = 0.35e-6

    def __post_init__(self):
        if self.beta_m2 <= 0:
            raise ValidationError("beta_m2", "must be > 0")
        if self.v_sg_m1 <= self.v_tp_m1_abs:
            raise ValidationError("v_sg_m1", "must exceed |v_tp_m1|")
        if self.c_eff <= 0:
            raise ValidationError("c_eff", "must be > 0")
        if self.gamma <= 0:
            raise ValidationError("gamma", "must be > 0")
        if self.eta_delay <= 0:
            raise ValidationError("eta_delay", "must be > 0")

    @property
    def gate_overdrive(self) -> float:
        return self.v_sg_m1 - self.v_tp_m1_abs


# Config keys, in serialization order.  Each maps to a profile attribute
# and a converter; tuples are assembled after parsing.
_SCHEMA = [
    ("profile.name", "name", str),
    ("profile.technology_m", "technology_node", float),
    ("oscillator.f_o_hz", "nominal_frequency", float),
    ("oscillator.supply_v", "supply_voltage", float),
    ("power.active_w", "active_power", float),
    ("noise.phase_noise_offset_hz", "_pn_offset", float),
    ("noise.phase_noise_dbc", "_pn_level", float),
    ("noise.jitter_slope", "jitter_slope", float),
    ("noise.white_jitter_coeff", "white_jitter_coeff", float),
    ("readout.t_meas_s", "readout_time", float),
    ("readout.period_s", "readout_period", float),
    ("counter.bits", "counter_bits", int),
    ("sensor.r_min_ohm", "_r_min", float),
    ("sensor.r_max_ohm", "_r_max", float),
    ("sensitivity.supply_pushing_hz_per_v", "supply_pushing", float),
    ("sensitivity.temp_coeff_hz_per_k", "temp_coeff", float),
]

_OPTIONAL = {
    "noise.white_jitter_coeff": 0.0,
    "counter.bits": 24,
    "sensitivity.supply_pushing_hz_per_v": 0.0,
    "sensitivity.temp_coeff_hz_per_k": 0.0,
}


def load_profile(source: str) -> DeviceProfile:
    """Parse flat ``section.key = value`` config text into a profile.

    Blank lines and ``#`` comments are ignored.  Unknown keys, duplicate
    keys, and malformed lines raise ConfigError with the line number;
    invariant violations raise ValidationError naming the field.
    """
    raw: dict[str, str] = {}
    for line_no, line in enumerate(io.StringIO(source), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", line_no)
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not value:
            raise ConfigError(f"empty value for key {key!r}", line_no)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", line_no)
        if key not in {k for k, _, _ in _SCHEMA}:
            raise ConfigError(f"unknown key {key!r}", line_no)
        raw[key] = value

    values: dict[str, object] = {}
    for key, attr, conv in _SCHEMA:
        if key not in raw:
            if key in _OPTIONAL:
                values[attr] = _OPTIONAL[key]
                continue
            raise ValidationError(attr.lstrip("_"), f"missing required key {key!r}")
        try:
            values[attr] = conv(raw[key])
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc

    return DeviceProfile(
        name=values["name"],
        technology_node=values["technology_node"],
        supply_voltage=values["supply_voltage"],
        nominal_frequency=values["nominal_frequency"],
        active_power=values["active_power"],
        phase_noise_ref=(values["_pn_offset"], values["_pn_level"]),
        jitter_slope=values["jitter_slope"],
        white_jitter_coeff=values["white_jitter_coeff"],
        readout_time=values["readout_time"],
        readout_period=values["readout_period"],
        counter_bits=values["counter_bits"],
        sensor_range=(values["_r_min"], values["_r_max"]),
        supply_pushing=values["supply_pushing"],
        temp_coeff=values["temp_coeff"],
    )


def load_profile_file(path: str | Path) -> DeviceProfile:
    return load_profile(Path(path).read_text())


def serialize_profile(profile: DeviceProfile) -> str:
    """Render a profile as config text that parses back to an equal profile."""
    flat = {
        "profile.name": profile.name,
        "profile.technology_m": repr(profile.technology_node),
        "oscillator.f_o_hz": repr(profile.nominal_frequency),
        "oscillator.supply_v": repr(profile.supply_voltage),
        "power.active_w": repr(profile.active_power),
        "noise.phase_noise_offset_hz": repr(profile.phase_noise_ref[0]),
        "noise.phase_noise_dbc": repr(profile.phase_noise_ref[1]),
        "noise.jitter_slope": repr(profile.jitter_slope),
        "noise.white_jitter_coeff": repr(profile.white_jitter_coeff),
        "readout.t_meas_s": repr(profile.readout_time),
        "readout.period_s": repr(profile.readout_period),
        "counter.bits": str(profile.counter_bits),
        "sensor.r_min_ohm": repr(profile.sensor_range[0]),
        "sensor.r_max_ohm": repr(profile.sensor_range[1]),
        "sensitivity.supply_pushing_hz_per_v": repr(profile.supply_pushing),
        "sensitivity.temp_coeff_hz_per_k": repr(profile.temp_coeff),
    }
    lines = [f"{key} = {flat[key]}" for key, _, _ in _SCHEMA]
    return "\n".join(lines) + "\n"


_BUILTINS = {
    "d1": DeviceProfile(
        name="d1",
        technology_node=0.35e-6,
        supply_voltage=1.75,
        nominal_frequency=83.2e6,
        active_power=86.1e-6,
        phase_noise_ref=(100e3, -92.5),
        jitter_slope=1.88e-6,
        white_jitter_coeff=0.0,
        readout_time=10e-3,
        readout_period=1.0,
        counter_bits=24,
        sensor_range=(100.0, 20e3),
        supply_pushing=100e3,
        temp_coeff=-20e3,
    ),
    "d2": DeviceProfile(
        name="d2",
        technology_node=0.35e-6,
        supply_voltage=2.0,
        nominal_frequency=83.2e6,
        active_power=1.92e-3,
        phase_noise_ref=(1e6, -124.5),
        jitter_slope=3.67e-7,
        white_jitter_coeff=0.0,
        readout_time=10e-3,
        readout_period=1.0,
        counter_bits=24,
        sensor_range=(100.0, 20e3),
        supply_pushing=50e3,
        temp_coeff=-20e3,
    ),
    "d3": DeviceProfile(
        name="d3",
        technology_node=0.18e-6,
        supply_voltage=2.0,
        nominal_frequency=61.3e6,
        active_power=1.76e-3,
        phase_noise_ref=(1e6, -130.5),
        jitter_slope=1.55e-7,
        white_jitter_coeff=0.0,
        readout_time=30e-3,
        readout_period=1.0,
        counter_bits=24,
        sensor_range=(100.0, 20e3),
        supply_pushing=50e3,
        temp_coeff=-20e3,
    ),
}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_profiles() -> list[DeviceProfile]:
    """The three bundled reference designs, in order d1, d2, d3."""
    return [_BUILTINS[name] for name in BUILTIN_NAMES]


def builtin_profile(name: str) -> DeviceProfile:
    try:
        return _BUILTINS[name]
    except KeyError:
        raise ValidationError(
            "profile", f"unknown builtin {name!r}; expected one of {BUILTIN_NAMES}"
        ) from None


def resolve_profile(spec: str) -> DeviceProfile:
    """Accept a builtin name (d1|d2|d3) or a config file path."""
    if spec in _BUILTINS:
        return _BUILTINS[spec]
    path = Path(spec)
    if path.exists():
        return load_profile_file(path)
    raise ValidationError(
        "profile", f"{spec!r} is neither a builtin name nor an existing file"
    )


def with_overrides(profile: DeviceProfile, **changes) -> DeviceProfile:
    """Return a copy of ``profile`` with the given fields replaced."""
    valid = {f.name for f in fields(DeviceProfile)}
    unknown = set(changes) - valid
    if unknown:
        raise ValidationError("override", f"unknown fields {sorted(unknown)}")
    return replace(profile, **changes)
