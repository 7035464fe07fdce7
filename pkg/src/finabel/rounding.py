"""Nearest-integer calculus: distance to the integers and pointwise rounding.

The rounded function is only defined while the distance stays strictly
below 1/2; a configurable safety margin (default 1e-6) guards float
ambiguity near the boundary.  A tie at exactly 1/2 is an error, not a
choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotRealValued, TooCloseToHalf
from .fourier import GroupFunction, a_norm

IMAG_TOL = 1e-12


def _real_values(f: GroupFunction) -> np.ndarray:
    imag_sup = float(np.abs(f.values.imag).max(initial=0.0))
    if imag_sup > IMAG_TOL:
        raise NotRealValued(
            f"imaginary part has sup {imag_sup}, exceeds {IMAG_TOL}")
    return f.values.real


def dist_to_int(f: GroupFunction) -> float:
    """sup over x of the distance from f(x) to the nearest integer."""
    vals = _real_values(f)
    return float(np.abs(vals - np.rint(vals)).max(initial=0.0))


@dataclass(frozen=True)
class RoundingResult:
    distance: float
    rounded: GroupFunction        # integer-valued
    support: tuple[int, ...]      # indices with nonzero rounded value

    def integer_values(self) -> np.ndarray:
        return np.rint(self.rounded.values.real).astype(np.int64)


def round_int(f: GroupFunction, margin: float = 1e-6) -> RoundingResult:
    """Pointwise nearest-integer rounding, defined when the distance
    stays below 1/2 - margin."""
    vals = _real_values(f)
    nearest = np.rint(vals)
    distance = float(np.abs(vals - nearest).max(initial=0.0))
    if distance >= 0.5 - margin:
        raise TooCloseToHalf(
            f"distance {distance} within margin {margin} of 1/2")
    rounded = GroupFunction(f.group, nearest.astype(np.complex128), f.side)
    support = tuple(int(i) for i in np.nonzero(nearest)[0])
    return RoundingResult(distance, rounded, support)


def integer_values(f: GroupFunction, tol: float = IMAG_TOL) -> np.ndarray:
    """Values of an (exactly) integer-valued function as int64."""
    vals = _real_values(f)
    nearest = np.rint(vals)
    err = float(np.abs(vals - nearest).max(initial=0.0))
    if err > tol:
        raise NotRealValued(f"function is not integer-valued (err {err})")
    return nearest.astype(np.int64)


@dataclass(frozen=True)
class RealReduction:
    real: GroupFunction
    imag_sup: float
    a_norm_real: float
    a_norm_original: float


def real_reduce(f: GroupFunction) -> RealReduction:
    """Pointwise real part, with the sup of the discarded imaginary part.

    The real part never increases the a-norm; this is checked on every
    call rather than assumed.
    """
    real = f.with_values(f.values.real.astype(np.complex128))
    imag_sup = float(np.abs(f.values.imag).max(initial=0.0))
    an_real = a_norm(real)
    an_orig = a_norm(f)
    if an_real > an_orig + 1e-10:
        raise NotRealValued(
            f"a-norm grew under real part: {an_real} > {an_orig}")
    return RealReduction(real, imag_sup, an_real, an_orig)
