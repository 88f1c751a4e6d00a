"""Primer-pair and tube capacity in whole bytes."""

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

DEFAULT_PARALLEL_FACTOR = 1_550_000
DEFAULT_PAYLOAD_LEN = 200


@dataclass(frozen=True)
class CapacityParams:
    """Inputs of the capacity formula. All integer or rational, never float."""

    payload_len: int = DEFAULT_PAYLOAD_LEN
    density: Fraction = Fraction(19, 12)
    parallel_factor: int = DEFAULT_PARALLEL_FACTOR
    library_size: int = 28_000

    def __post_init__(self):
        density = self.density
        if not isinstance(density, Fraction):
            # accept "8/5", 1, Fraction-compatible strings; floats go through str
            density = Fraction(str(density)) if isinstance(density, float) else Fraction(density)
            object.__setattr__(self, "density", density)
        for name in ("payload_len", "parallel_factor", "library_size"):
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not 0 < density <= 2:
            raise ValueError(f"density must be in (0, 2] bits/base, got {density}")


def strand_bytes(params: CapacityParams) -> int:
    """Whole data bytes carried by one payload."""
    d = params.density
    return (params.payload_len * d.numerator) // (8 * d.denominator)


def pair_capacity_bytes(params: CapacityParams) -> int:
    """floor(payload_len * density / 8) * parallel_factor."""
    return strand_bytes(params) * params.parallel_factor


def tube_capacity_bytes(usable_primers: int, params: CapacityParams) -> int:
    """
    Bytes a tube can hold with the given number of usable primers.

    Args:
        usable_primers: Primers free of collisions in the tube
        params: Capacity parameters

    Returns:
        floor(usable_primers / 2) * pair_capacity_bytes(params)
    """
    if not 0 <= usable_primers <= params.library_size:
        raise ValueError(
            f"usable_primers must be in [0, {params.library_size}], got {usable_primers}"
        )
    return (usable_primers // 2) * pair_capacity_bytes(params)


def tube_capacity_array(usable_primers: Union[np.ndarray, int], params: CapacityParams) -> np.ndarray:
    """Vectorised tube_capacity_bytes; negative counts clamp to zero capacity."""
    usable = np.maximum(np.asarray(usable_primers, dtype=np.int64), 0)
    return (usable // 2) * np.int64(pair_capacity_bytes(params))


def fits(total_bytes: int, collided_primers: int, params: CapacityParams) -> bool:
    """Feasibility of holding total_bytes in a tube with this many collided primers."""
    usable = params.library_size - collided_primers
    return usable >= 0 and total_bytes <= tube_capacity_bytes(usable, params)
