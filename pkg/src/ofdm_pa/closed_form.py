"""Closed-form expectations of the squared autocorrelation over random symbols.

All functions take the constellation only through its kurtosis ``mu4``,
so hypothetical values can be swept. Power vectors may be passed either as
:class:`~ofdm_pa.waveform.PowerAllocation` or as plain arrays; the zero-padded
objective and gradient accept any nonnegative vector so they can be
evaluated off the simplex during line searches.

With ``S2 = sum(p**2)`` and ``A_M(k) = |sum_n p_n exp(j 2 pi k n / M)|^2``:

* periodic, per lag:     ``E|r_k|^2 = (mu4 - 1) S2 + A_N(k)``
* zero-padded, per lag:  ``E|r_k|^2 = (mu4 - 1) S2 + A_NL(k)``
* mainlobe (all three):  ``(mu4 - 1) S2 + N^2``
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .waveform import PowerAllocation


def _as_p(pa) -> np.ndarray:
    if isinstance(pa, PowerAllocation):
        return pa.p
    return np.asarray(pa, dtype=float)


def mainlobe(pa, mu4: float) -> float:
    """Expected squared mainlobe, identical for P-ACF, A-ACF and zero-padded P-ACF."""
    p = _as_p(pa)
    n = p.size
    return float((mu4 - 1) * (p @ p) + n * n)


# -- periodic -----------------------------------------------------------------

def _array_factor_sq(p: np.ndarray, m: int) -> np.ndarray:
    """``|sum_n p_n exp(j 2 pi k n / m)|^2`` for ``k = 0..m-1``."""
    return np.abs(m * np.fft.ifft(p, m)) ** 2


def pacf_expected_profile(pa, mu4: float) -> np.ndarray:
    p = _as_p(pa)
    out = (mu4 - 1) * (p @ p) + _array_factor_sq(p, p.size)
    out[0] = mainlobe(p, mu4)
    return out


def pacf_expected_sq(pa, mu4: float, k):
    """Expected ``|r_k|^2`` of the P-ACF; ``k`` may be an int or an array."""
    p = _as_p(pa)
    n = p.size
    k_arr = np.asarray(k)
    if np.any((k_arr < 0) | (k_arr >= n)):
        raise ValueError(f"lag out of range 0..{n - 1}")
    phase = np.exp(2j * np.pi * np.outer(np.atleast_1d(k_arr), np.arange(1, n + 1)) / n)
    val = (mu4 - 1) * (p @ p) + np.abs(phase @ p) ** 2
    return float(val[0]) if k_arr.ndim == 0 else val


def pacf_eisl(pa, mu4: float) -> float:
    """Sum of expected squared P-ACF sidelobes over ``k = 1..N-1``."""
    p = _as_p(pa)
    n = p.size
    return float(((n - 1) * mu4 + 1) * (p @ p) - n * n)


def pacf_normalized_eisl(pa, mu4: float) -> float:
    p = _as_p(pa)
    n = p.size
    s2 = p @ p
    return float(n * mu4 * s2 / ((mu4 - 1) * s2 + n * n) - 1)


def pacf_normalized_eisl_batch(p_rows, mu4: float) -> np.ndarray:
    p_rows = np.atleast_2d(np.asarray(p_rows, dtype=float))
    n = p_rows.shape[1]
    s2 = np.einsum("ij,ij->i", p_rows, p_rows)
    return n * mu4 * s2 / ((mu4 - 1) * s2 + n * n) - 1


def pacf_normalized_sidelobes_batch(p_rows, mu4: float) -> np.ndarray:
    """Expected ``|r_k|^2 / |r_0|^2`` for ``k = 1..N-1``, one row per power vector."""
    p_rows = np.atleast_2d(np.asarray(p_rows, dtype=float))
    n = p_rows.shape[1]
    s2 = np.einsum("ij,ij->i", p_rows, p_rows)
    af = np.abs(n * np.fft.ifft(p_rows, axis=1)) ** 2
    main = (mu4 - 1) * s2 + n * n
    return ((mu4 - 1) * s2[:, None] + af[:, 1:]) / main[:, None]


def pacf_eisl_half_range(pa, mu4: float) -> float:
    """P-ACF EISL restricted to ``k = 1..ceil(N/2)-1``.

    Conjugate symmetry pairs lag ``k`` with ``N-k``; for even ``N`` the
    unpaired lag ``N/2`` is removed before halving. This is the range the
    zero-padded EISL sums when ``L = 1``.
    """
    p = _as_p(pa)
    n = p.size
    full = pacf_eisl(p, mu4)
    if n % 2 == 0:
        full -= pacf_expected_sq(p, mu4, n // 2)
    return full / 2


# -- aperiodic ----------------------------------------------------------------

@lru_cache(maxsize=32)
def _w_matrix(n: int) -> np.ndarray:
    f_n = np.fft.fft(np.eye(n), norm="ortho")
    f_2n_first = np.fft.fft(np.eye(2 * n), norm="ortho")[:, :n]
    w = f_n @ f_2n_first.conj().T
    w.setflags(write=False)
    return w


def dft_product_matrix(n: int) -> np.ndarray:
    """``W = F_N Ft_2N^H`` (N x 2N), ``Ft_2N`` the first N columns of ``F_2N``.

    Odd columns (1-based) form ``I / sqrt(2)``; even columns form a
    circulant matrix with all singular values ``1 / sqrt(2)``.
    """
    return _w_matrix(n)


@dataclass(frozen=True)
class AacfGeometry:
    n: int
    v_columns: np.ndarray
    entry_norm4: float
    col_norm2_4_sum: float


def aacf_geometry(pa) -> AacfGeometry:
    """Geometry of ``V = B^H W`` with ``B = diag(sqrt(p))``."""
    p = _as_p(pa)
    v = np.sqrt(p)[:, None] * dft_product_matrix(p.size)
    a = np.abs(v) ** 2
    return AacfGeometry(p.size, v, float(np.sum(a * a)), float(np.sum(a.sum(axis=0) ** 2)))


def aacf_mainlobe(pa, mu4: float) -> float:
    return mainlobe(pa, mu4)


def aacf_eisl(pa, mu4: float, geometry: AacfGeometry | None = None) -> float:
    """Expected A-ACF ISL, ``(1/2) sum_{k=1}^{2N-1} E|r_k|^2`` on the 2N-periodic grid."""
    p = _as_p(pa)
    g = geometry if geometry is not None else aacf_geometry(p)
    n = p.size
    return float(
        n * (mu4 - 2) * g.entry_norm4 + 2 * n * g.col_norm2_4_sum - 0.5 * mainlobe(p, mu4)
    )


def aacf_normalized_eisl(pa, mu4: float, geometry: AacfGeometry | None = None) -> float:
    return aacf_eisl(pa, mu4, geometry) / aacf_mainlobe(pa, mu4)


def aacf_normalized_eisl_batch(p_rows, mu4: float) -> np.ndarray:
    """Vectorized :func:`aacf_normalized_eisl` over rows of power vectors."""
    p_rows = np.atleast_2d(np.asarray(p_rows, dtype=float))
    n = p_rows.shape[1]
    a = np.abs(dft_product_matrix(n)) ** 2
    entry4 = (p_rows**2) @ np.sum(a * a, axis=1)
    col4 = np.sum((p_rows @ a) ** 2, axis=1)
    main = (mu4 - 1) * np.einsum("ij,ij->i", p_rows, p_rows) + n * n
    return (n * (mu4 - 2) * entry4 + 2 * n * col4) / main - 0.5


def aacf_uniform_normalized_eisl(n: int, mu4: float) -> float:
    """Uniform-power A-ACF normalized EISL written with ``||W||_4^4``."""
    w4 = float(np.sum(np.abs(dft_product_matrix(n)) ** 4))
    return (n * (mu4 - 2) * w4 + n * n) / ((mu4 - 1) * n + n * n) - 0.5


# -- zero-padded ----------------------------------------------------------------

class ZpGeometry:
    """Steering matrix ``G = [g_L, ..., g_{NL/2-1}]`` for the zero-padded EISL.

    ``g_k[n] = exp(-j 2 pi n k / (N L))`` for ``n = 1..N``. ``Re(G G^H)`` is
    precomputed because it is the only part the objective and gradient need.
    """

    def __init__(self, n: int, pad_factor: int):
        if n < 1 or pad_factor < 1:
            raise ValueError("n and pad_factor must be >= 1")
        if (n * pad_factor) % 2:
            raise ValueError(f"N*L must be even, got N={n}, L={pad_factor}")
        self.n = n
        self.pad_factor = pad_factor
        self.lags = np.arange(pad_factor, n * pad_factor // 2)
        m = n * pad_factor
        self.G = np.exp(-2j * np.pi * np.outer(np.arange(1, n + 1), self.lags) / m)
        self.re_ggh = (self.G @ self.G.conj().T).real
        self.G.setflags(write=False)
        self.re_ggh.setflags(write=False)

    @property
    def n_sidelobes(self) -> int:
        return self.lags.size

    def steering(self, k: int) -> np.ndarray:
        m = self.n * self.pad_factor
        return np.exp(-2j * np.pi * np.arange(1, self.n + 1) * k / m)


@lru_cache(maxsize=64)
def zp_geometry(n: int, pad_factor: int) -> ZpGeometry:
    return ZpGeometry(n, pad_factor)


def zp_expected_profile(pa, mu4: float, pad_factor: int) -> np.ndarray:
    p = _as_p(pa)
    out = (mu4 - 1) * (p @ p) + _array_factor_sq(p, p.size * pad_factor)
    out[0] = mainlobe(p, mu4)
    return out


def zp_expected_sq(pa, mu4: float, k, pad_factor: int):
    p = _as_p(pa)
    n = p.size
    m = n * pad_factor
    k_arr = np.asarray(k)
    if np.any((k_arr < 0) | (k_arr >= m)):
        raise ValueError(f"lag out of range 0..{m - 1}")
    phase = np.exp(2j * np.pi * np.outer(np.atleast_1d(k_arr), np.arange(1, n + 1)) / m)
    val = (mu4 - 1) * (p @ p) + np.abs(phase @ p) ** 2
    return float(val[0]) if k_arr.ndim == 0 else val


def zp_eisl(pa, mu4: float, pad_factor: int) -> float:
    p = _as_p(pa)
    geo = zp_geometry(p.size, pad_factor)
    return float(geo.n_sidelobes * (mu4 - 1) * (p @ p) + p @ geo.re_ggh @ p)


def zp_objective(pa, mu4: float, pad_factor: int) -> float:
    """Zero-padded EISL normalized by the expected mainlobe."""
    p = _as_p(pa)
    return zp_eisl(p, mu4, pad_factor) / mainlobe(p, mu4)


def zp_gradient(pa, mu4: float, pad_factor: int) -> np.ndarray:
    """Real gradient of :func:`zp_objective` by the quotient rule."""
    p = _as_p(pa)
    geo = zp_geometry(p.size, pad_factor)
    num = geo.n_sidelobes * (mu4 - 1) * (p @ p) + p @ geo.re_ggh @ p
    den = mainlobe(p, mu4)
    d_num = 2 * geo.n_sidelobes * (mu4 - 1) * p + 2 * (geo.re_ggh @ p)
    d_den = 2 * (mu4 - 1) * p
    return (d_num * den - num * d_den) / den**2


def theory_rows(expected: np.ndarray) -> list[dict]:
    from .acf import to_db

    db = to_db(expected, expected[0])
    return [
        {"lag": k, "expected_mag_sq": float(e), "expected_mag_db_normalized": float(d)}
        for k, (e, d) in enumerate(zip(expected, db))
    ]
