"""Empirical autocorrelation of a single OFDM realization.

Three correlators are provided:

* periodic (P-ACF), the matched-filter output with a cyclic prefix,
  ``r[k] = sum_n |c_n|^2 exp(+j 2 pi k n / N)``;
* aperiodic (A-ACF), without a cyclic prefix,
  ``r[k] = sum_{i < N-k} conj(x_i) x_{i+k}`` for ``k = 0..N-1``;
* zero-padded P-ACF on an ``L``-times finer delay grid,
  ``r[k] = sum_n |c_n|^2 exp(+j 2 pi k n / (N L))`` for ``k = 0..NL-1``.

Each one has a transform-domain fast path and a direct shift-and-sum
reference (``*_direct``) used to cross-check it.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .waveform import SignalFrame

PERIODIC = "periodic"
APERIODIC = "aperiodic"
ZERO_PADDED = "zero-padded"
KINDS = (PERIODIC, APERIODIC, ZERO_PADDED)

DB_FLOOR = -150.0


class DegenerateProfileError(ValueError):
    pass


@dataclass(frozen=True)
class AcfProfile:
    kind: str
    values: np.ndarray
    n: int
    pad_factor: int = 1

    @property
    def mainlobe(self) -> float:
        return float(self.values[0].real)

    @property
    def mag_sq(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def sidelobe_lags(self) -> np.ndarray:
        return sidelobe_lags(self.kind, self.n, self.pad_factor)

    def sidelobes(self) -> np.ndarray:
        return self.values[self.sidelobe_lags()]


def sidelobe_lags(kind: str, n: int, pad_factor: int = 1) -> np.ndarray:
    """Lag indices summed by the ISL of each correlator.

    For the zero-padded grid the lags ``|k| < L`` are sub-resolution and
    count as mainlobe; conjugate symmetry halves the remaining range, so
    the region is ``L .. NL/2 - 1``.
    """
    if kind == ZERO_PADDED:
        return np.arange(pad_factor, n * pad_factor // 2)
    if kind in (PERIODIC, APERIODIC):
        return np.arange(1, n)
    raise ValueError(f"unknown ACF kind {kind!r}")


def pacf(frame: SignalFrame) -> AcfProfile:
    power = np.abs(frame.weighted) ** 2
    n = power.size
    values = n * np.fft.ifft(power)
    # values[0] is the frame energy; drop the rounding-level imaginary part
    values[0] = power.sum()
    return AcfProfile(PERIODIC, values, n, 1)


def pacf_direct(x) -> np.ndarray:
    """``x^H J_k x`` with the periodic shift realized by index arithmetic."""
    x = np.asarray(x, dtype=complex)
    n = x.size
    idx = np.arange(n)
    return np.array([np.vdot(x, x[(idx + k) % n]) for k in range(n)])


def aacf(frame: SignalFrame) -> AcfProfile:
    x = frame.time_domain
    n = x.size
    spec = np.fft.fft(x, 2 * n)
    full = np.fft.ifft(np.abs(spec) ** 2)
    values = full[:n].copy()
    values[0] = np.vdot(x, x).real
    return AcfProfile(APERIODIC, values, n, 1)


def aacf_direct(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    n = x.size
    return np.array([np.vdot(x[: n - k], x[k:]) for k in range(n)])


def zp_pacf(frame: SignalFrame, pad_factor: int) -> AcfProfile:
    """P-ACF of the power spectrum zero-padded to ``N * pad_factor`` bins."""
    if pad_factor < 1:
        raise ValueError(f"pad_factor must be >= 1, got {pad_factor}")
    if pad_factor == 1:
        prof = pacf(frame)
        return AcfProfile(ZERO_PADDED, prof.values, prof.n, 1)
    power = np.abs(frame.weighted) ** 2
    n = power.size
    m = n * pad_factor
    values = m * np.fft.ifft(power, m)
    values[0] = power.sum()
    return AcfProfile(ZERO_PADDED, values, n, pad_factor)


def zp_pacf_direct(weighted, pad_factor: int) -> np.ndarray:
    power = np.abs(np.asarray(weighted)) ** 2
    n = power.size
    m = n * pad_factor
    k = np.arange(m)[:, None]
    return np.exp(2j * np.pi * k * np.arange(n)[None, :] / m) @ power


def _check(profile: AcfProfile):
    if profile.values.size == 0 or not np.any(profile.values):
        raise DegenerateProfileError("all-zero correlation profile")


def isl(profile: AcfProfile) -> float:
    """Integrated sidelobe level over :func:`sidelobe_lags`."""
    _check(profile)
    return float(np.sum(np.abs(profile.sidelobes()) ** 2))


def psl_db(profile: AcfProfile) -> float:
    """Peak sidelobe power relative to the mainlobe power, in dB."""
    _check(profile)
    peak = np.max(np.abs(profile.sidelobes()) ** 2, initial=0.0)
    return float(to_db(np.array([peak]), abs(profile.values[0]) ** 2)[0])


def width_3db(mag_sq, rtol: float = 1e-9) -> int:
    """Twice the first lag at which ``mag_sq`` falls to half its lag-0 value.

    Measured on the integer lag grid, no interpolation. A lag sitting on
    the threshold to within ``rtol`` counts as below it, so a constraint
    held active by an optimizer is not lost to rounding.
    """
    mag_sq = np.asarray(mag_sq, dtype=float)
    if mag_sq.size == 0 or mag_sq[0] <= 0:
        raise DegenerateProfileError("mainlobe power must be positive")
    below = np.nonzero(mag_sq[1:] <= 0.5 * mag_sq[0] * (1 + rtol))[0]
    if below.size == 0:
        raise DegenerateProfileError("profile never drops 3 dB below the mainlobe")
    return 2 * int(below[0] + 1)


def mainlobe_width_3db(profile: AcfProfile) -> int:
    _check(profile)
    return width_3db(profile.mag_sq)


def to_db(mag_sq, ref) -> np.ndarray:
    """``10 log10(mag_sq / ref)`` with ratios below 1e-15 clamped to -150 dB."""
    ratio = np.asarray(mag_sq, dtype=float) / float(ref)
    out = np.full(ratio.shape, DB_FLOOR)
    ok = ratio > 10 ** (DB_FLOOR / 10)
    out[ok] = 10 * np.log10(ratio[ok])
    return out


def profile_rows(profile: AcfProfile) -> list[dict]:
    mag = profile.mag_sq
    db = to_db(mag, mag[0]) if mag[0] > 0 else np.full(mag.shape, DB_FLOOR)
    return [
        {
            "lag": k,
            "re": float(v.real),
            "im": float(v.imag),
            "mag_sq": float(m),
            "mag_db_normalized": float(d),
        }
        for k, (v, m, d) in enumerate(zip(profile.values, mag, db))
    ]


def save_profile_csv(profile: AcfProfile, path) -> Path:
    from .io import write_rows

    return write_rows(path, profile_rows(profile), fmt="csv")
