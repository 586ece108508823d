"""Unit-power PSK/QAM constellations and their fourth-moment statistics.

Only constellations with zero mean, zero pseudo-variance and unit average
power are constructible. BPSK and 8-QAM fail the pseudo-variance test and
are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math
import re

import numpy as np

_TOL = 1e-12


class ConstellationError(ValueError):
    pass


@dataclass(frozen=True)
class Constellation:
    """Finite symbol alphabet with its kurtosis ``mu4 = E|s|^4``."""

    name: str
    points: np.ndarray = field(repr=False)
    mu4: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if abs(pts.mean()) > _TOL:
            raise ConstellationError(f"{self.name}: nonzero mean")
        if abs((pts**2).mean()) > _TOL:
            raise ConstellationError(f"{self.name}: nonzero pseudo-variance")
        if abs((np.abs(pts) ** 2).mean() - 1.0) > _TOL:
            raise ConstellationError(f"{self.name}: average power is not 1")

    @property
    def order(self) -> int:
        return self.points.size


def _fourth_moment(points: np.ndarray) -> float:
    return float(np.mean(np.abs(points) ** 4))


def make_psk(order: int) -> Constellation:
    """``order`` equally spaced unit-modulus points (order >= 4, power of 2)."""
    if order == 2:
        raise ConstellationError(
            "BPSK has nonzero pseudo-variance E[s^2] = 1 and is not supported"
        )
    if order < 4 or order & (order - 1):
        raise ConstellationError(f"PSK order must be a power of two >= 4, got {order}")
    points = np.exp(2j * np.pi * np.arange(order) / order)
    # mean |s|^4 of unit-modulus points is 1 up to rounding
    return Constellation(f"{order}psk", points, _fourth_moment(points))


def make_qam(order: int) -> Constellation:
    """Square QAM on an odd-integer grid, normalized to unit average power.

    Points are stored in row-major grid order (imaginary part outer).
    """
    if order == 8:
        raise ConstellationError(
            "8-QAM is not a square constellation and violates zero pseudo-variance"
        )
    side = math.isqrt(order)
    if side * side != order or side < 2 or side % 2:
        raise ConstellationError(f"QAM order must be an even perfect square, got {order}")
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    grid = levels[None, :] + 1j * levels[::-1, None]
    points = grid.ravel()
    points = points / np.sqrt(np.mean(np.abs(points) ** 2))
    return Constellation(f"{order}qam", points, _fourth_moment(points))


_TAG = re.compile(r"^(\d*)(psk|qam)$")


def from_tag(tag: str) -> Constellation:
    """Parse tags like ``"qpsk"``, ``"16psk"``, ``"64qam"``."""
    t = tag.strip().lower().replace("-", "")
    if t == "qpsk":
        return make_psk(4)
    if t == "bpsk":
        return make_psk(2)
    m = _TAG.match(t)
    if not m or not m.group(1):
        raise ConstellationError(f"unknown constellation tag {tag!r}")
    order = int(m.group(1))
    return make_psk(order) if m.group(2) == "psk" else make_qam(order)


def sample_symbols(c: Constellation, n: int, seed) -> np.ndarray:
    """Draw ``n`` i.i.d. uniform symbols from ``c``.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`,
    including an existing ``Generator``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    return c.points[rng.integers(0, c.order, size=n)]
