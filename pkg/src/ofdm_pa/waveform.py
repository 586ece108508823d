"""Power allocation vectors and OFDM frame synthesis.

DFT convention: unitary scaling (``norm="ortho"``) in both directions, so
``x = ifft(sqrt(p) * s, norm="ortho")`` and ``||x||^2 = sum(p * |s|^2)``.
Every correlation formula in this package assumes this scaling.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_SUM_RTOL = 1e-9


class PowerAllocationError(ValueError):
    pass


@dataclass(frozen=True)
class PowerAllocation:
    """Per-subcarrier powers on the simplex ``{p >= 0, sum(p) = N}``."""

    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=float).ravel()
        if p.size == 0:
            raise PowerAllocationError("empty power allocation")
        if not np.all(np.isfinite(p)):
            raise PowerAllocationError("power allocation has non-finite entries")
        if np.any(p < 0):
            raise PowerAllocationError(f"negative power {p.min():.3g}")
        n = p.size
        if abs(p.sum() - n) > _SUM_RTOL * n:
            raise PowerAllocationError(f"powers sum to {p.sum():.12g}, expected {n}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.p.size

    def sum_sq(self) -> float:
        return float(self.p @ self.p)

    def __len__(self):
        return self.n


def uniform_pa(n: int) -> PowerAllocation:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return PowerAllocation(np.ones(n))


def random_pa(n: int, seed) -> PowerAllocation:
    """Uniform draw from the simplex: Dirichlet(1, ..., 1) scaled by ``n``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(n))
    return PowerAllocation(n * w / w.sum())


def save_pa_csv(pa: PowerAllocation, path) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        fh.write("P\n")
        for v in pa.p:
            fh.write(f"{float(v)!r}\n")
    return path


def load_pa_csv(path) -> PowerAllocation:
    lines = Path(path).read_text().split()
    if not lines or lines[0].strip() != "P":
        raise PowerAllocationError(f"{path}: expected header 'P'")
    p = np.array([float(v) for v in lines[1:]])
    # absorb decimal rounding in hand-written files, nothing larger
    if p.size and np.all(p >= 0) and abs(p.sum() - p.size) <= 1e-6 * p.size:
        p = p * (p.size / p.sum())
    return PowerAllocation(p)


@dataclass(frozen=True)
class SignalFrame:
    symbols: np.ndarray
    weighted: np.ndarray
    time_domain: np.ndarray

    @property
    def n(self) -> int:
        return self.symbols.size


def modulate(symbols, pa: PowerAllocation) -> SignalFrame:
    """``c = sqrt(p) * s`` and ``x = unitary IDFT(c)``."""
    s = np.asarray(symbols, dtype=complex).ravel()
    if s.size != pa.n:
        raise ValueError(f"{s.size} symbols but power allocation has length {pa.n}")
    c = np.sqrt(pa.p) * s
    x = np.fft.ifft(c, norm="ortho")
    return SignalFrame(s, c, x)
