"""Design-space exploration over transistor-sizing grids.

Simulated power / frequency / phase-noise surfaces over (latch W/L,
ring W/L) axes are scored with

    cost = log10( (10^(PN/10) / F) * P )

so lower is better: good phase noise at high frequency for little power.
Real surfaces come in as CSV; a parametric generator provides synthetic
surfaces with the qualitative shapes seen in sizing sweeps (power rising
with device size, frequency peaking, phase noise improving with power
but saturating).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

__all__ = [
    "DesignGrid",
    "GridModel",
    "cost",
    "cost_matrix",
    "argmin_cost",
    "grid_from_model",
    "grid_from_csv",
    "grid_to_rows",
    "GRID_CSV_COLUMNS",
]

GRID_CSV_COLUMNS = ["latch_wl", "dro_wl", "power_w", "freq_hz", "pn_dbc"]


@dataclass(frozen=True)
class DesignGrid:
    """Power / frequency / phase-noise surfaces over two sizing axes."""

    latch_wl: np.ndarray
    dro_wl: np.ndarray
    power: np.ndarray   # watts, shape (n_latch, n_dro)
    freq: np.ndarray    # hertz
    pn_dbc: np.ndarray  # dBc/Hz at a fixed offset

    def __post_init__(self):
        shape = (len(self.latch_wl), len(self.dro_wl))
        if shape[0] == 0 or shape[1] == 0:
            raise ValidationError("grid", "axes must be non-empty")
        for name in ("power", "freq", "pn_dbc"):
            m = getattr(self, name)
            if m.shape != shape:
                raise ValidationError(name, f"expected shape {shape}, got {m.shape}")
        if np.any(self.power <= 0):
            raise ValidationError("power", "must be > 0 everywhere")
        if np.any(self.freq <= 0):
            raise ValidationError("freq", "must be > 0 everywhere")


def cost(pn_dbc: float, f: float, p: float) -> float:
    """Sizing cost log10((10^(pn/10) / f) * p); lower is better."""
    if f <= 0:
        raise ValueError(f"frequency must be > 0, got {f}")
    if p <= 0:
        raise ValueError(f"power must be > 0, got {p}")
    return math.log10(10.0 ** (pn_dbc / 10.0) / f * p)


def cost_matrix(grid: DesignGrid) -> np.ndarray:
    return np.log10(10.0 ** (grid.pn_dbc / 10.0) / grid.freq * grid.power)


def argmin_cost(grid: DesignGrid) -> tuple[float, float, float]:
    """Grid cell with minimal cost as (latch_wl, dro_wl, cost).

    Exact cost ties break toward lower power, then lower latch ratio,
    then lower ring ratio.
    """
    costs = cost_matrix(grid)
    n_latch, n_dro = costs.shape
    latch_idx, dro_idx = np.meshgrid(np.arange(n_latch), np.arange(n_dro),
                                     indexing="ij")
    order = np.lexsort((
        dro_idx.ravel(),
        latch_idx.ravel(),
        grid.power.ravel(),
        costs.ravel(),
    ))
    best = order[0]
    i, j = divmod(int(best), n_dro)
    return float(grid.latch_wl[i]), float(grid.dro_wl[j]), float(costs[i, j])


@dataclass(frozen=True)
class GridModel:
    """Parametric surface generator for synthetic sizing sweeps."""

    power_base_w: float = 0.5e-3
    power_latch_coeff: float = 0.25
    power_dro_coeff: float = 0.05
    freq_base_hz: float = 90e6
    freq_peak_dro_wl: float = 25.0
    freq_latch_gain: float = 0.3
    pn_start_dbc: float = -108.0
    pn_floor_dbc: float = -132.0
    pn_power_scale_w: float = 1.5e-3


def grid_from_model(latch_wl, dro_wl, model: GridModel | None = None) -> DesignGrid:
    """Deterministic synthetic surfaces over the given axes.

    Shapes: power rises linearly along both axes; frequency peaks at a
    preferred ring sizing and improves (saturating) with latch size;
    phase noise tracks power with an exponentially saturating
    improvement toward a floor.
    """
    m = model or GridModel()
    latch = np.asarray(latch_wl, dtype=float)
    dro = np.asarray(dro_wl, dtype=float)
    if latch.size == 0 or dro.size == 0:
        raise ValidationError("axes", "must be non-empty")
    l2, d2 = np.meshgrid(latch, dro, indexing="ij")
    power = m.power_base_w * (1.0 + m.power_latch_coeff * l2 + m.power_dro_coeff * d2)
    shape = (d2 / m.freq_peak_dro_wl) * np.exp(1.0 - d2 / m.freq_peak_dro_wl)
    freq = m.freq_base_hz * shape * (1.0 + m.freq_latch_gain * l2 / (1.0 + l2))
    pn = m.pn_floor_dbc + (m.pn_start_dbc - m.pn_floor_dbc) * np.exp(
        -(power - power.min()) / m.pn_power_scale_w
    )
    return DesignGrid(latch_wl=latch, dro_wl=dro, power=power, freq=freq, pn_dbc=pn)


def grid_from_csv(path: str | Path) -> DesignGrid:
    """Load a long-format grid CSV with columns latch_wl,dro_wl,power_w,freq_hz,pn_dbc."""
    cells: dict[tuple[float, float], tuple[float, float, float]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(GRID_CSV_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise ValidationError("grid_csv", f"missing columns {sorted(missing)}")
        for row in reader:
            key = (float(row["latch_wl"]), float(row["dro_wl"]))
            if key in cells:
                raise ValidationError("grid_csv", f"duplicate cell {key}")
            cells[key] = (float(row["power_w"]), float(row["freq_hz"]),
                          float(row["pn_dbc"]))
    if not cells:
        raise ValidationError("grid_csv", "no rows")
    latch = np.array(sorted({k[0] for k in cells}))
    dro = np.array(sorted({k[1] for k in cells}))
    if len(cells) != latch.size * dro.size:
        raise ValidationError("grid_csv", "rows do not form a full grid")
    power = np.empty((latch.size, dro.size))
    freq = np.empty_like(power)
    pn = np.empty_like(power)
    for i, lv in enumerate(latch):
        for j, dv in enumerate(dro):
            power[i, j], freq[i, j], pn[i, j] = cells[(lv, dv)]
    return DesignGrid(latch_wl=latch, dro_wl=dro, power=power, freq=freq, pn_dbc=pn)


def grid_to_rows(grid: DesignGrid) -> list[tuple[float, float, float, float, float]]:
    """Flatten a grid to long-format rows in the CSV column order."""
    rows = []
    for i, lv in enumerate(grid.latch_wl):
        for j, dv in enumerate(grid.dro_wl):
            rows.append((float(lv), float(dv), float(grid.power[i, j]),
                         float(grid.freq[i, j]), float(grid.pn_dbc[i, j])))
    return rows
