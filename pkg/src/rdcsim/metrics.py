"""Energy, duty-cycled power, energy-per-conversion-step, dynamic range."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .profiles import DeviceProfile

__all__ = [
    "FomReport",
    "energy_per_readout",
    "avg_power",
    "fom_energy_per_cs",
    "dynamic_range_db",
    "table_report",
    "reference_deltas",
    "REFERENCE_TABLE",
]


def energy_per_readout(p_active: float, t_meas: float) -> float:
    """Energy of one readout: active power times gate time."""
    if p_active <= 0:
        raise ValueError(f"active power must be > 0, got {p_active}")
    if t_meas < 0:
        raise ValueError(f"readout time must be >= 0, got {t_meas}")
    return p_active * t_meas


def avg_power(p_active: float, t_meas: float, period: float) -> float:
    """Duty-cycled average power for one readout per period."""
    if not 0 < t_meas <= period:
        raise ValueError(
            f"need 0 < t_meas <= period, got t_meas={t_meas}, period={period}"
        )
    if p_active <= 0:
        raise ValueError(f"active power must be > 0, got {p_active}")
    return p_active * t_meas / period


def fom_energy_per_cs(energy: float, bits: float) -> float:
    """Energy per conversion step, energy / 2^bits."""
    if energy < 0:
        raise ValueError(f"energy must be >= 0, got {energy}")
    return energy / 2.0**bits


def dynamic_range_db(count_span: float, count_error_rms: float) -> float:
    """20*log10 of the usable count span over the RMS count error."""
    if count_span <= 0:
        raise ValueError(f"count span must be > 0, got {count_span}")
    if count_error_rms <= 0:
        raise ValueError(f"count error must be > 0, got {count_error_rms}")
    return 20.0 * math.log10(count_span / count_error_rms)


@dataclass(frozen=True)
class _ReferenceRow:
    power_w: float
    resolution_bits: int
    readout_time_s: float
    energy_j: float
    fom_j_per_cs: float
    dynamic_range_db: float
    supply_v: float


# Measured summary of the three reference designs.  The dynamic-range
# entries are reference constants; how they were derived from the raw
# measurements is not reconstructible from the stored data.
REFERENCE_TABLE: dict[str, _ReferenceRow] = {
    "d1": _ReferenceRow(86.1e-6, 18, 10e-3, 861e-9, 3.29e-12, 103.7, 1.75),
    "d2": _ReferenceRow(1.92e-3, 20, 10e-3, 19.2e-6, 18.3e-12, 113.5, 2.0),
    "d3": _ReferenceRow(1.76e-3, 21, 30e-3, 52.8e-6, 25.1e-12, 121.1, 2.0),
}


@dataclass(frozen=True)
class FomReport:
    """Derived figure-of-merit columns for one profile."""

    profile: str
    active_power: float
    avg_power: float
    energy_per_readout: float
    bits: float
    fom: float
    dynamic_range: float | None = None


def _effective_bits(profile: DeviceProfile) -> float:
    ref = REFERENCE_TABLE.get(profile.name)
    if ref is not None:
        return float(ref.resolution_bits)
    from .resolution import analytic_bits

    return analytic_bits(
        1.0 / profile.nominal_frequency, profile.jitter_slope, profile.readout_time
    )


def table_report(profiles: list[DeviceProfile]) -> list[FomReport]:
    """Recompute the derived performance columns from primitive inputs."""
    reports = []
    for p in profiles:
        energy = energy_per_readout(p.active_power, p.readout_time)
        bits = _effective_bits(p)
        ref = REFERENCE_TABLE.get(p.name)
        reports.append(
            FomReport(
                profile=p.name,
                active_power=p.active_power,
                avg_power=avg_power(p.active_power, p.readout_time, p.readout_period),
                energy_per_readout=energy,
                bits=bits,
                fom=fom_energy_per_cs(energy, bits),
                dynamic_range=ref.dynamic_range_db if ref else None,
            )
        )
    return reports


def reference_deltas(report: FomReport) -> dict[str, float]:
    """Relative deltas of a report's derived columns vs the stored summary.

    Empty for profiles without a reference row.  Callers flag any delta
    above their tolerance (the shipped designs stay within 1%).
    """
    ref = REFERENCE_TABLE.get(report.profile)
    if ref is None:
        return {}
    return {
        "energy": abs(report.energy_per_readout - ref.energy_j) / ref.energy_j,
        "fom": abs(report.fom - ref.fom_j_per_cs) / ref.fom_j_per_cs,
        "power": abs(report.active_power - ref.power_w) / ref.power_w,
    }
