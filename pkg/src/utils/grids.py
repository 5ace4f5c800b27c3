"""Parameter grids given as start:step:stop strings."""

import math
from dataclasses import dataclass, field

import numpy as np
from loguru import logger

from src.errors import ParameterDomainError

# Grid points this close to a singular value snap onto it
_SNAP = 1e-9


@dataclass
class BetaGrid:
    """Beta values ready for evaluation, with removed singular points."""

    betas: list[float]
    removed: list[float] = field(default_factory=list)

    @property
    def has_entropy_slot(self) -> bool:
        return 0.0 in self.betas


def parse_grid(text: str, parameter: str = "grid") -> list[float]:
    """Parse "start:step:stop" (inclusive) or a comma separated list.

    Args:
        text: Grid specification.
        parameter: Name reported in errors.

    Returns:
        Grid values in the given order.
    """
    text = text.strip()
    if not text:
        raise ParameterDomainError(parameter, "empty grid")
    try:
        if ":" not in text:
            values = [float(item) for item in text.split(",") if item.strip()]
            if not values:
                raise ParameterDomainError(parameter, "empty grid")
            return values

        parts = [float(item) for item in text.split(":")]
    except ValueError as e:
        raise ParameterDomainError(parameter, f"cannot parse '{text}': {e}") from e

    if len(parts) != 3:
        raise ParameterDomainError(parameter, f"expected start:step:stop, got '{text}'")
    start, step, stop = parts
    if not all(math.isfinite(p) for p in parts):
        raise ParameterDomainError(parameter, "grid bounds must be finite")
    if step == 0 or (stop - start) * step < 0:
        raise ParameterDomainError(parameter, f"step {step} does not move from {start} to {stop}")

    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    values = start + step * np.arange(count)
    snapped = [0.0 if abs(v) < _SNAP else 1.0 if abs(v - 1) < _SNAP else float(v) for v in values]
    return snapped


def prepare_beta_grid(values: list[float]) -> BetaGrid:
    """Drop beta = 1 with a notice; beta = 0 stays as the entropy slot."""
    kept: list[float] = []
    removed: list[float] = []
    for value in values:
        if value == 1.0:
            removed.append(value)
            continue
        kept.append(value)
    if removed:
        logger.warning("[GRID] beta = 1 is discontinuous and was removed from the grid")
    if 0.0 in kept:
        logger.info("[GRID] beta = 0 evaluated with the entropy limit")
    if not kept:
        raise ParameterDomainError("beta_grid", "no evaluable beta left after removing singular points")
    return BetaGrid(kept, removed)
