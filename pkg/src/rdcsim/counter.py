"""Edge-counting quantizer: gated counting, cascade width, clock limit."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CounterOverflowError, ValidationError

__all__ = ["CounterConfig", "gated_count", "max_clock", "width_check"]


@dataclass(frozen=True)
class CounterConfig:
    """Cascade of synchronous 4-bit binary counter stages."""

    n_stages: int = 6
    t_phl: float = 4e-9
    t_su: float = 2e-9

    def __post_init__(self):
        if self.n_stages < 1:
            raise ValidationError("n_stages", "must be >= 1")
        if self.t_phl <= 0:
            raise ValidationError("t_phl", "must be > 0")
        if self.t_su <= 0:
            raise ValidationError("t_su", "must be > 0")

    @property
    def width_bits(self) -> int:
        return 4 * self.n_stages


def gated_count(f: float, t_meas: float, phase0: float = 0.0,
                width_bits: int | None = None) -> int:
    """Rising edges counted in a gate window of ``t_meas`` seconds.

    ``phase0`` is the oscillator phase at gate opening, in cycles within
    [0, 1).  The count is floor(f * t_meas + phase0).  If ``width_bits``
    is given, counts that do not fit raise CounterOverflowError naming
    the width actually required.
    """
    if f <= 0:
        raise ValueError(f"frequency must be > 0, got {f}")
    if t_meas < 0:
        raise ValueError(f"gate time must be >= 0, got {t_meas}")
    if not 0.0 <= phase0 < 1.0:
        raise ValueError(f"phase0 must be in [0, 1), got {phase0}")
    count = math.floor(f * t_meas + phase0)
    if width_bits is not None and count >= (1 << width_bits):
        raise CounterOverflowError(count, width_bits, count.bit_length())
    return count


def max_clock(cfg: CounterConfig) -> float:
    """Maximum clock rate of the cascade, 1 / (t_phl + t_su).

    The look-ahead carry structure keeps this independent of the number
    of stages.
    """
    return 1.0 / (cfg.t_phl + cfg.t_su)


def width_check(cfg: CounterConfig, max_count: int) -> bool:
    """True iff ``max_count`` fits in the cascade without overflow."""
    return max_count < (1 << cfg.width_bits)
