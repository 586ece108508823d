"""Power allocation for the zero-padded P-ACF.

Two solvers minimize the normalized zero-padded EISL ``f(p)`` over
``{p >= 0, sum(p) = N}``:

* :func:`pgd`: projected gradient descent with Armijo backtracking;
* :func:`sca`: successive convex approximation for the variant with a
  mainlobe-width constraint ``E|r_q|^2 <= E|r_0|^2 / 2`` at one lag ``q``.
  The surrogate is the first-order Taylor expansion of ``f`` plus a
  proximal term, so each subproblem is a strongly convex QP over a convex
  set; the step length comes from an exact line search along the segment
  to the subproblem solution.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
import logging
import math

import numpy as np
from scipy import optimize

from . import closed_form as cf
from .constellation import from_tag
from .waveform import PowerAllocation, uniform_pa

log = logging.getLogger(__name__)

TOLERANCE = "tolerance"
MAX_ITER = "max_iter"
STALLED = "stalled"


class InfeasibleConstraintError(ValueError):
    pass


# -- configs ----------------------------------------------------------------

def _resolve_mu4(d: dict) -> dict:
    d = dict(d)
    tag = d.pop("constellation", None)
    if tag is not None and "mu4" not in d:
        d["mu4"] = from_tag(tag).mu4
    return d


def _validate_p0(p0, n):
    if p0 is None:
        return None
    pa = p0 if isinstance(p0, PowerAllocation) else PowerAllocation(np.asarray(p0, float))
    if pa.n != n:
        raise ValueError(f"p0 has length {pa.n}, expected {n}")
    return pa


@dataclass
class PgdConfig:
    n: int
    pad_factor: int
    mu4: float
    p0: PowerAllocation | None = None
    r_max: int = 5000
    eps: float = 1e-8
    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4

    def __post_init__(self):
        if self.r_max < 1:
            raise ValueError("r_max must be >= 1")
        if self.eps <= 0:
            raise ValueError("eps must be > 0")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if self.mu4 < 1:
            raise ValueError(f"mu4 must be >= 1, got {self.mu4}")
        self.p0 = _validate_p0(self.p0, self.n)

    @classmethod
    def from_dict(cls, d: dict) -> "PgdConfig":
        """Build from a JSON-style mapping; ``constellation`` may stand in for ``mu4``."""
        d = _resolve_mu4(d)
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown PGD config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class ScaConfig:
    n: int
    pad_factor: int
    mu4: float
    q: int
    p0: PowerAllocation | None = None
    r_max: int = 500
    eps: float = 1e-8
    proximal: float | None = None
    subproblem_rtol: float = 1e-12

    def __post_init__(self):
        if self.r_max < 1:
            raise ValueError("r_max must be >= 1")
        if self.eps <= 0:
            raise ValueError("eps must be > 0")
        if self.mu4 < 1:
            raise ValueError(f"mu4 must be >= 1, got {self.mu4}")
        if self.proximal is not None and self.proximal <= 0:
            raise ValueError("proximal weight must be > 0")
        # q = L/2 is used in practice, so only 1 <= q < NL/2 is enforced
        if not 1 <= self.q < self.n * self.pad_factor // 2:
            raise ValueError(
                f"q must satisfy 1 <= q < N*L/2 = {self.n * self.pad_factor // 2}, got {self.q}"
            )
        self.p0 = _validate_p0(self.p0, self.n)

    @classmethod
    def from_dict(cls, d: dict) -> "ScaConfig":
        d = _resolve_mu4(d)
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown SCA config keys: {sorted(unknown)}")
        return cls(**d)


def config_to_dict(cfg) -> dict:
    d = asdict(cfg)
    if cfg.p0 is not None:
        d["p0"] = cfg.p0.p.tolist()
    return d


@dataclass
class OptimizerTrace:
    iterates: list = field(default_factory=list)
    objectives: list = field(default_factory=list)
    stop_reason: str = MAX_ITER

    @property
    def final_p(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def final_pa(self) -> PowerAllocation:
        p = np.maximum(self.iterates[-1], 0.0)
        return PowerAllocation(p * (p.size / p.sum()))

    @property
    def final_objective(self) -> float:
        return self.objectives[-1]

    @property
    def n_iter(self) -> int:
        return len(self.objectives) - 1

    def rows(self) -> list[dict]:
        return [{"iter": i, "objective": float(f)} for i, f in enumerate(self.objectives)]


# -- projection and PGD -----------------------------------------------------

def project_simplex(v) -> PowerAllocation:
    """Clamp negatives to zero, then scale radially so the entries sum to N.

    For nonnegative input this is exactly ``N / (1^T v) * v``.
    """
    v = np.asarray(v, dtype=float)
    clamped = np.maximum(v, 0.0)
    total = clamped.sum()
    if not total > 0:
        raise ValueError("cannot project a vector with no positive entry onto the simplex")
    return PowerAllocation(clamped * (v.size / total))


def pgd(config: PgdConfig) -> OptimizerTrace:
    """Projected gradient descent on the normalized zero-padded EISL.

    Stops when the objective decrease falls below ``eps * f`` (``tolerance``),
    after ``r_max`` iterations (``max_iter``), or when backtracking cannot
    find a decreasing step (``stalled``).
    """
    mu4, L = config.mu4, config.pad_factor
    p = (config.p0 or uniform_pa(config.n)).p.copy()
    f = cf.zp_objective(p, mu4, L)
    trace = OptimizerTrace([p.copy()], [f])
    for _ in range(config.r_max):
        g = cf.zp_gradient(p, mu4, L)
        # the component along 1 is undone by the rescaling and only distorts the step
        g -= g.mean()
        eta = config.initial_step
        while True:
            cand = np.maximum(p - eta * g, 0.0)
            if cand.sum() > 0:
                cand *= p.size / cand.sum()
                f_cand = cf.zp_objective(cand, mu4, L)
                if f_cand <= f + config.sufficient_decrease * (g @ (cand - p)):
                    break
            eta *= config.shrink
            if eta < 1e-16 * config.initial_step:
                trace.stop_reason = STALLED
                return trace
        decrease = f - f_cand
        p, f = cand, f_cand
        trace.iterates.append(p.copy())
        trace.objectives.append(f)
        if decrease < config.eps * abs(f):
            trace.stop_reason = TOLERANCE
            return trace
    trace.stop_reason = MAX_ITER
    return trace


# -- width constraint -------------------------------------------------------

def width_constraint(pa, mu4: float, pad_factor: int, q: int) -> float:
    """Slack ``E|r_0|^2 / 2 - E|r_q|^2``; nonnegative iff the -3 dB condition holds."""
    return 0.5 * cf.mainlobe(pa, mu4) - cf.zp_expected_sq(pa, mu4, q, pad_factor)


def _constraint_parts(n: int, pad_factor: int, mu4: float, q: int):
    """Split ``-slack`` on the simplex as ``a ||p||^2 + (u.p)^2 + (w.p)^2 - N^2/2``."""
    g = cf.zp_geometry(n, pad_factor).steering(q)
    return 0.5 * (mu4 - 1), g.real.copy(), g.imag.copy(), 0.5 * n * n


def _quad(p, a, u, w):
    return a * (p @ p) + (u @ p) ** 2 + (w @ p) ** 2


def euclidean_simplex_projection(v, total: float) -> np.ndarray:
    """Nearest point (2-norm) of ``{x >= 0, sum(x) = total}`` by sorting."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def _dual_newton(b, beta, lam, m, total, t0, max_iter=100):
    """Minimize ``b.p + beta |p|^2 + lam |M^T p|^2`` over the simplex (``beta > 0``).

    Writing ``|y|^2 = max_t (2 t.y - |t|^2)`` turns the rank-two term into a
    concave maximization over ``t`` in R^2 whose inner minimizer is a
    Euclidean simplex projection. The stationarity condition
    ``M^T p(t) = t`` is piecewise linear and solved by semismooth Newton with
    backtracking on the dual value. Returns ``(p, t)``.
    """

    def primal(t):
        z = b + 2 * lam * (m @ t)
        return euclidean_simplex_projection(-z / (2 * beta), total), z

    def dual_value(t):
        p, z = primal(t)
        return -lam * (t @ t) + z @ p + beta * (p @ p)

    if lam == 0:
        return primal(t0)[0], t0
    t = t0.copy()
    p, _ = primal(t)
    psi = dual_value(t)
    scale = total * max(1.0, float(np.abs(m).max()))
    for _ in range(max_iter):
        resid = m.T @ p - t
        if np.max(np.abs(resid)) <= 1e-14 * scale:
            break
        support = p > 0
        ms = m[support]
        centered = ms - ms.mean(axis=0)
        jac = -(lam / beta) * (centered.T @ centered) - np.eye(2)
        step = -np.linalg.solve(jac, resid)
        eta = 1.0
        while True:
            t_new = t + eta * step
            psi_new = dual_value(t_new)
            if psi_new >= psi - 1e-15 * abs(psi) or eta < 1e-12:
                break
            eta *= 0.5
        if np.array_equal(t_new, t):
            break
        t, psi = t_new, psi_new
        p, _ = primal(t)
    return p, t


def solve_subproblem(b, beta, a, u, w, radius_sq, total, fallback=None, rtol=1e-12):
    """Minimize ``b.p + beta |p|^2`` over ``{p >= 0, sum(p) = total,
    a |p|^2 + (u.p)^2 + (w.p)^2 <= radius_sq}`` for ``beta > 0``.

    The multiplier ``lam`` of the quadratic constraint is found by Brent's
    method on the constraint value of the penalized minimizer, which is
    continuous and nonincreasing in ``lam``. ``fallback`` is a known feasible
    point; if rounding leaves the answer marginally infeasible it is pulled
    back along the segment towards ``fallback``.
    """
    b = np.asarray(b, dtype=float)
    m = np.column_stack([u, w])
    t = np.zeros(2)

    # aim slightly inside so that rounding at the root cannot leave the set
    target = radius_sq * (1 - 1e-11)

    def h(p):
        return _quad(p, a, u, w) - target

    def solve(lam):
        nonlocal t
        p, t = _dual_newton(b, beta + lam * a, lam, m, total, t)
        return p

    p = solve(0.0)
    if h(p) <= 0:
        return p
    lo, hi = 0.0, beta / (total * (a + float(np.sum(u * u) + np.sum(w * w))))
    p_hi = solve(hi)
    while h(p_hi) > 0:
        lo, hi = hi, 4 * hi
        p_hi = solve(hi)
        if hi > 1e300:
            raise InfeasibleConstraintError("width constraint cannot be met on the simplex")
    lam = optimize.brentq(lambda x: h(solve(x)), lo, hi, xtol=1e-300, rtol=rtol, maxiter=500)
    p = solve(lam)
    if _quad(p, a, u, w) > radius_sq:
        p = _pull_back(p, fallback if fallback is not None else p_hi, a, u, w, radius_sq)
    return p


def _pull_back(p, feasible, a, u, w, radius_sq):
    """Point on ``[feasible, p]`` closest to ``p`` that satisfies the constraint."""
    d = p - feasible
    qa = _quad(d, a, u, w)
    qb = 2 * (a * (feasible @ d) + (u @ feasible) * (u @ d) + (w @ feasible) * (w @ d))
    qc = _quad(feasible, a, u, w) - radius_sq
    if qa <= 0:
        return feasible
    theta = (-qb + math.sqrt(max(qb * qb - 4 * qa * qc, 0.0))) / (2 * qa)
    theta = min(max(theta, 0.0), 1.0)
    cand = feasible + theta * d
    while theta > 0 and _quad(cand, a, u, w) > radius_sq:
        theta *= 1 - 1e-9
        cand = feasible + theta * d
    return cand


def exact_line_search(p, d, mu4: float, pad_factor: int) -> float:
    """Exact minimizer over ``alpha in [0, 1]`` of ``f(p + alpha d)``.

    Along a segment ``f`` is a ratio of two quadratics in ``alpha``; the
    cubic terms of its derivative's numerator cancel, so the stationary
    points are the roots of a quadratic.
    """
    geo = cf.zp_geometry(p.size, pad_factor)
    k = geo.n_sidelobes * (mu4 - 1)

    def coeffs(x, y):
        # x^T M y pieces of numerator and denominator
        num = k * (x @ y) + x @ geo.re_ggh @ y
        den = (mu4 - 1) * (x @ y)
        return num, den

    npp, dpp = coeffs(p, p)
    npd, dpd = coeffs(p, d)
    ndd, ddd = coeffs(d, d)
    n2 = float(p.size) ** 2
    a0, a1, a2 = npp, 2 * npd, ndd
    b0, b1, b2 = dpp + n2, 2 * dpd, ddd
    # (a1 + 2 a2 t)(b0 + b1 t + b2 t^2) - (a0 + a1 t + a2 t^2)(b1 + 2 b2 t)
    quad = [a2 * b1 - a1 * b2, 2 * (a2 * b0 - a0 * b2), a1 * b0 - a0 * b1]
    cands = [0.0, 1.0]
    if any(abs(x) > 0 for x in quad):
        for r in np.roots(quad):
            if abs(r.imag) < 1e-12 and 0 < r.real < 1:
                cands.append(float(r.real))

    def f_alpha(t):
        return (a0 + a1 * t + a2 * t * t) / (b0 + b1 * t + b2 * t * t)

    return min(cands, key=f_alpha)


def surrogate(p, p_ref, f_ref: float, grad_ref, proximal: float = 0.0) -> float:
    """``f(p_ref) + grad_ref.(p - p_ref) + proximal/2 |p - p_ref|^2``.

    Value and gradient match ``f`` at ``p_ref`` for any ``proximal``.
    """
    d = np.asarray(p) - np.asarray(p_ref)
    return float(f_ref + np.asarray(grad_ref) @ d + 0.5 * proximal * (d @ d))


def _initial_curvature(p, mu4, pad_factor):
    geo = cf.zp_geometry(p.size, pad_factor)
    top = np.linalg.eigvalsh(geo.re_ggh)[-1] + geo.n_sidelobes * (mu4 - 1)
    return 2 * top / cf.mainlobe(p, mu4)


def sca(config: ScaConfig) -> OptimizerTrace:
    """SCA for the width-constrained problem; every iterate stays feasible.

    Each iteration minimizes the surrogate over the feasible set, then moves
    from ``p`` towards that minimizer with the step from
    :func:`exact_line_search`. The proximal weight follows a
    Barzilai-Borwein curvature estimate unless fixed in the config.
    """
    mu4, L, n, q = config.mu4, config.pad_factor, config.n, config.q
    p = (config.p0 or uniform_pa(n)).p.copy()
    slack = width_constraint(p, mu4, L, q)
    if slack < 0:
        raise InfeasibleConstraintError(
            f"starting point violates the -3 dB constraint at q={q} (slack {slack:.4g})"
        )
    a, u, w, radius_sq = _constraint_parts(n, L, mu4, q)
    f = cf.zp_objective(p, mu4, L)
    g = cf.zp_gradient(p, mu4, L)
    tau = config.proximal if config.proximal is not None else _initial_curvature(p, mu4, L)
    trace = OptimizerTrace([p.copy()], [f])
    for r in range(config.r_max):
        p_hat = solve_subproblem(g - tau * p, 0.5 * tau, a, u, w, radius_sq, float(n),
                                 fallback=p, rtol=config.subproblem_rtol)
        d = p_hat - p
        if np.max(np.abs(d)) <= 1e-12 * n or g @ d >= 0:
            trace.stop_reason = STALLED
            return trace
        alpha = exact_line_search(p, d, mu4, L)
        p_new = p + alpha * d
        f_new = cf.zp_objective(p_new, mu4, L)
        if alpha == 0.0 or f_new > f:
            trace.stop_reason = STALLED
            return trace
        g_new = cf.zp_gradient(p_new, mu4, L)
        if config.proximal is None:
            dp, dg = p_new - p, g_new - g
            curv = abs(dg @ dp) / (dp @ dp)
            if np.isfinite(curv) and curv > 0:
                tau = curv
        decrease = f - f_new
        p, f, g = p_new, f_new, g_new
        trace.iterates.append(p.copy())
        trace.objectives.append(f)
        log.debug("sca iter %d f=%.12g alpha=%.3g tau=%.3g", r, f, alpha, tau)
        if decrease < config.eps * abs(f):
            trace.stop_reason = TOLERANCE
            return trace
    trace.stop_reason = MAX_ITER
    return trace
