"""Min-max normalization of the two raw objectives and their scalarization.

Position error (minimize) and intensity (maximize) are scaled to [0, 1]
against fixed, empirically chosen bounds, then combined into the single
minimization target f = E_scaled - I_scaled, whose optimum is -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidBounds, InvalidInput


@dataclass(frozen=True)
class NormalizationBounds:
    """Fixed scaling bounds; measurements outside them clamp to [0, 1]."""

    e_min: float
    e_max: float
    i_min: float
    i_max: float

    def __post_init__(self):
        if not self.e_max > self.e_min:
            raise InvalidBounds(f"e_max ({self.e_max}) must exceed e_min ({self.e_min})")
        if not self.i_max > self.i_min:
            raise InvalidBounds(f"i_max ({self.i_max}) must exceed i_min ({self.i_min})")


def scale_error(e_um: float, bounds: NormalizationBounds) -> tuple[float, bool]:
    """Scale a position error to [0, 1]; returns (value, clamped flag)."""
    raw = (e_um - bounds.e_min) / (bounds.e_max - bounds.e_min)
    return min(max(raw, 0.0), 1.0), (raw < 0.0 or raw > 1.0)


def scale_intensity(i_au: float, bounds: NormalizationBounds) -> tuple[float, bool]:
    """Scale an intensity to [0, 1]; returns (value, clamped flag)."""
    raw = (i_au - bounds.i_min) / (bounds.i_max - bounds.i_min)
    return min(max(raw, 0.0), 1.0), (raw < 0.0 or raw > 1.0)


def scalarize(e_scaled: float, i_scaled: float) -> float:
    """Equally weighted difference of the scaled objectives, in [-1, 1]."""
    if not 0.0 <= e_scaled <= 1.0:
        raise InvalidInput(f"e_scaled must lie in [0, 1], got {e_scaled}")
    if not 0.0 <= i_scaled <= 1.0:
        raise InvalidInput(f"i_scaled must lie in [0, 1], got {i_scaled}")
    return e_scaled - i_scaled


class ScalarizedObjective:
    """Stateful wrapper combining scaling and scalarization for one trial.

    Counts clamping events so a run summary can report how often the
    configured bounds were exceeded (drift noise can push measurements
    slightly past them).
    """

    def __init__(self, bounds: NormalizationBounds):
        self.bounds = bounds
        self.error_clamps = 0
        self.intensity_clamps = 0

    def __call__(self, e_um: float, i_au: float) -> float:
        if not (math.isfinite(e_um) and math.isfinite(i_au)):
            raise InvalidInput(f"non-finite measurement: E={e_um}, I={i_au}")
        e_scaled, e_clamped = scale_error(e_um, self.bounds)
        i_scaled, i_clamped = scale_intensity(i_au, self.bounds)
        self.error_clamps += int(e_clamped)
        self.intensity_clamps += int(i_clamped)
        return scalarize(e_scaled, i_scaled)

    @property
    def clamp_events(self) -> int:
        return self.error_clamps + self.intensity_clamps
