"""Seeded Monte Carlo runs with closed-form overlays, and figure reproduction.

Trial ``t`` of a scenario draws its symbols from ``default_rng(base_seed + t)``,
so any subset of trials can be regenerated on its own and serial and parallel
runs agree exactly. Outputs are data only (CSV or JSON plus a JSON manifest);
plotting is left to external tools.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
import json
import logging
import os
from pathlib import Path

import numpy as np

from . import __version__
from . import acf as acf_mod
from . import closed_form as cf
from .constellation import from_tag, sample_symbols
from .io import write_rows
from .optimizer import PgdConfig, ScaConfig, pgd, sca
from .waveform import PowerAllocation, load_pa_csv, random_pa, uniform_pa

log = logging.getLogger(__name__)

PA_SCHEMES = ("uniform", "random", "file", "pgd", "sca")
FIGURES = tuple(f"fig{i}" for i in range(1, 10))
OUT_ENV = "OFDM_PA_OUT"

# second entropy word for the pinned random-PA draw, keeps it off the symbol streams
_PA_STREAM = 0x5041


class ScenarioError(ValueError):
    pass


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, "out"))


@dataclass
class Scenario:
    constellation: str = "16qam"
    n: int = 64
    pa_scheme: str = "uniform"
    pad_factor: int = 1
    trials: int = 1000
    base_seed: int = 0
    acf_kind: str = acf_mod.PERIODIC
    pa_seed: int | None = None
    pa_file: str | None = None
    q: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ScenarioError("trials must be >= 1")
        if self.n < 1:
            raise ScenarioError("n must be >= 1")
        if self.pa_scheme not in PA_SCHEMES:
            raise ScenarioError(f"unknown PA scheme {self.pa_scheme!r}")
        if self.acf_kind not in acf_mod.KINDS:
            raise ScenarioError(f"unknown ACF kind {self.acf_kind!r}")
        if self.pad_factor < 1:
            raise ScenarioError("pad_factor must be >= 1")
        if self.acf_kind != acf_mod.ZERO_PADDED and self.pad_factor != 1:
            raise ScenarioError("pad_factor > 1 needs acf_kind='zero-padded'")
        if self.pa_scheme == "file" and not self.pa_file:
            raise ScenarioError("pa_scheme 'file' needs pa_file")
        if self.pa_scheme == "sca" and self.q is None:
            raise ScenarioError("pa_scheme 'sca' needs q")

    @property
    def label(self) -> str:
        parts = [self.constellation, f"n{self.n}", self.pa_scheme]
        if self.pa_scheme == "sca":
            parts.append(f"q{self.q}")
        if self.acf_kind == acf_mod.ZERO_PADDED:
            parts.append(f"L{self.pad_factor}")
        parts.append(self.acf_kind.replace("-", ""))
        return "_".join(parts)


def resolve_pa(s: Scenario) -> PowerAllocation:
    """Power allocation named by the scenario; optimizer runs start from uniform."""
    mu4 = from_tag(s.constellation).mu4
    if s.pa_scheme == "uniform":
        return uniform_pa(s.n)
    if s.pa_scheme == "random":
        seed = s.pa_seed if s.pa_seed is not None else [s.base_seed, _PA_STREAM]
        return random_pa(s.n, seed)
    if s.pa_scheme == "file":
        pa = load_pa_csv(s.pa_file)
        if pa.n != s.n:
            raise ScenarioError(f"{s.pa_file} has {pa.n} entries, scenario has n={s.n}")
        return pa
    if s.pa_scheme == "pgd":
        return pgd(PgdConfig(s.n, s.pad_factor, mu4)).final_pa
    return sca(ScaConfig(s.n, s.pad_factor, mu4, s.q)).final_pa


@dataclass
class ExperimentResult:
    scenario: Scenario
    pa: PowerAllocation
    mu4: float
    lags: np.ndarray
    empirical: np.ndarray
    stderr: np.ndarray
    theory: np.ndarray
    summary: list = field(default_factory=list)

    def summary_value(self, metric: str, column: str = "empirical") -> float:
        for row in self.summary:
            if row["metric"] == metric:
                return row[column]
        raise KeyError(metric)

    def empirical_rows(self) -> list[dict]:
        db = acf_mod.to_db(self.empirical, self.empirical[0])
        return [
            {"lag": int(k), "mag_sq": float(m), "stderr": float(e), "mag_db_normalized": float(d)}
            for k, m, e, d in zip(self.lags, self.empirical, self.stderr, db)
        ]

    def theory_rows(self) -> list[dict]:
        return cf.theory_rows(self.theory)


def _ratio_stderr(num: np.ndarray, den: np.ndarray) -> float:
    """Delta-method standard error of ``mean(num) / mean(den)``."""
    t = num.size
    if t < 2:
        return 0.0
    ratio = num.mean() / den.mean()
    return float(np.std(num - ratio * den, ddof=1) / (np.sqrt(t) * den.mean()))


def _theory_profile(kind, pa, mu4, pad_factor, n_lags):
    if kind == acf_mod.PERIODIC:
        return cf.pacf_expected_profile(pa, mu4)
    if kind == acf_mod.ZERO_PADDED:
        return cf.zp_expected_profile(pa, mu4, pad_factor)
    # only the mainlobe has a simplified per-lag closed form for the A-ACF
    out = np.full(n_lags, np.nan)
    out[0] = cf.aacf_mainlobe(pa, mu4)
    return out


def _theory_eisl(kind, pa, mu4, pad_factor):
    if kind == acf_mod.PERIODIC:
        return cf.pacf_eisl(pa, mu4)
    if kind == acf_mod.ZERO_PADDED:
        return cf.zp_eisl(pa, mu4, pad_factor)
    return cf.aacf_eisl(pa, mu4)


def _correlate_batch(kind, weighted: np.ndarray, pad_factor: int) -> np.ndarray:
    """Complex correlation profiles for a (trials, N) batch of weighted symbols."""
    n = weighted.shape[1]
    power = np.abs(weighted) ** 2
    if kind == acf_mod.PERIODIC:
        return n * np.fft.ifft(power, axis=1)
    if kind == acf_mod.ZERO_PADDED:
        m = n * pad_factor
        return m * np.fft.ifft(power, m, axis=1)
    x = np.fft.ifft(weighted, axis=1, norm="ortho")
    spec = np.fft.fft(x, 2 * n, axis=1)
    return np.fft.ifft(np.abs(spec) ** 2, axis=1)[:, :n]


def draw_symbols(s: Scenario, constellation=None) -> np.ndarray:
    c = constellation or from_tag(s.constellation)
    return np.stack(
        [sample_symbols(c, s.n, s.base_seed + t) for t in range(s.trials)]
    )


def run_scenario(s: Scenario, pa: PowerAllocation | None = None) -> ExperimentResult:
    """Average squared correlation per lag over ``s.trials`` seeded realizations."""
    try:
        c = from_tag(s.constellation)
        pa = pa if pa is not None else resolve_pa(s)
        if pa.n != s.n:
            raise ScenarioError(f"power allocation has length {pa.n}, scenario n={s.n}")
        symbols = draw_symbols(s, c)
    except ValueError as exc:
        raise ScenarioError(f"scenario {s.label}: {exc}") from exc
    weighted = np.sqrt(pa.p)[None, :] * symbols
    values = _correlate_batch(s.acf_kind, weighted, s.pad_factor)
    mag_sq = np.abs(values) ** 2
    mean = mag_sq.mean(axis=0)
    stderr = (
        mag_sq.std(axis=0, ddof=1) / np.sqrt(s.trials) if s.trials > 1 else np.zeros_like(mean)
    )
    lags = np.arange(mean.size)
    theory = _theory_profile(s.acf_kind, pa, c.mu4, s.pad_factor, mean.size)

    side = acf_mod.sidelobe_lags(s.acf_kind, s.n, s.pad_factor)
    isl = mag_sq[:, side].sum(axis=1)
    main = mag_sq[:, 0]
    eisl_theory = _theory_eisl(s.acf_kind, pa, c.mu4, s.pad_factor)
    main_theory = cf.mainlobe(pa, c.mu4)
    isl_stderr = float(isl.std(ddof=1) / np.sqrt(s.trials)) if s.trials > 1 else 0.0
    main_stderr = float(main.std(ddof=1) / np.sqrt(s.trials)) if s.trials > 1 else 0.0

    def psl(curve):
        return float(acf_mod.to_db([np.max(curve[side], initial=0.0)], curve[0])[0])

    def width(curve):
        try:
            return float(acf_mod.width_3db(curve))
        except acf_mod.DegenerateProfileError:
            return float("nan")

    has_curve = s.acf_kind != acf_mod.APERIODIC
    summary = [
        {"metric": "mainlobe", "empirical": float(main.mean()), "theory": main_theory,
         "stderr": main_stderr},
        {"metric": "eisl", "empirical": float(isl.mean()), "theory": eisl_theory,
         "stderr": isl_stderr},
        {"metric": "normalized_eisl", "empirical": float(isl.mean() / main.mean()),
         "theory": eisl_theory / main_theory, "stderr": _ratio_stderr(isl, main)},
        {"metric": "psl_db", "empirical": psl(mean),
         "theory": psl(theory) if has_curve else float("nan"), "stderr": float("nan")},
        {"metric": "width_3db", "empirical": width(mean),
         "theory": width(theory) if has_curve else float("nan"), "stderr": float("nan")},
    ]
    return ExperimentResult(s, pa, c.mu4, lags, mean, stderr, theory, summary)


def write_result(result: ExperimentResult, out_dir, fmt: str = "csv", stem: str | None = None):
    """Write empirical, theory and summary tables; return ``{role: path}``."""
    out_dir = Path(out_dir)
    stem = stem or result.scenario.label
    return {
        "empirical": write_rows(out_dir / f"{stem}_empirical", result.empirical_rows(), fmt),
        "theory": write_rows(out_dir / f"{stem}_theory", result.theory_rows(), fmt),
        "summary": write_rows(out_dir / f"{stem}_summary", result.summary, fmt,
                              columns=["metric", "empirical", "theory", "stderr"]),
    }


# -- figure reproduction ------------------------------------------------------

class _Manifest:
    def __init__(self, figure, out_dir: Path, fmt: str, params: dict):
        self.out_dir = out_dir
        self.fmt = fmt
        self.data = {"figure": figure, "version": f"v{__version__}", "parameters": params,
                     "files": [], "summary": []}

    def add(self, path: Path, **params):
        self.data["files"].append(
            {"path": path.relative_to(self.out_dir).as_posix(), "parameters": params}
        )
        return path

    def rows(self, stem: str, rows: list[dict], columns=None, **params):
        return self.add(write_rows(self.out_dir / stem, rows, self.fmt, columns), **params)

    def result(self, res: ExperimentResult, stem: str | None = None, **extra):
        params = {**asdict(res.scenario), **extra}
        for role, path in write_result(res, self.out_dir, self.fmt, stem).items():
            self.add(path, role=role, **params)
        self.data["summary"].append(
            {"label": stem or res.scenario.label,
             **{row["metric"]: row["empirical"] for row in res.summary},
             **{row["metric"] + "_theory": row["theory"] for row in res.summary}}
        )

    def write(self) -> Path:
        path = self.out_dir / f"{self.data['figure']}_manifest.json"
        with path.open("w") as fh:
            json.dump(_jsonable(self.data), fh, indent=1, sort_keys=True)
            fh.write("\n")
        return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


FIGURE_DEFAULTS = {
    "fig1": {"n_values": [64, 128]},
    "fig2": {"n_values": [64, 256]},
    "fig3": {"n_values": [8, 16, 32, 64, 128]},
    "fig4": {"n_values": [16, 32, 64, 128], "pad_factor": 10},
    "fig5": {"n_values": [32, 64], "pad_factor": 10},
    "fig6": {"n_values": [32, 64], "pad_factor": 10},
    "fig7": {"n_values": [64], "pad_factor": 10},
    "fig8": {"n_values": [64], "pad_factor": 10},
    "fig9": {"n_values": [64], "pad_factor": 10},
}


def reproduce(figure_id: str, out_dir=None, trials: int = 1000, base_seed: int = 0,
              fmt: str = "csv", n_values=None, pad_factor: int | None = None) -> list[Path]:
    """Regenerate the data behind one figure; returns every written path, manifest last."""
    if figure_id not in FIGURES:
        raise ScenarioError(f"unknown figure {figure_id!r}; choose from {', '.join(FIGURES)}")
    defaults = FIGURE_DEFAULTS[figure_id]
    n_values = list(n_values or defaults["n_values"])
    L = pad_factor or defaults.get("pad_factor", 1)
    out_dir = Path(out_dir) if out_dir is not None else default_out_dir()
    out_dir = out_dir / figure_id
    out_dir.mkdir(parents=True, exist_ok=True)
    params = {"trials": trials, "base_seed": base_seed, "n_values": n_values}
    if "pad_factor" in defaults:
        params["pad_factor"] = L
    man = _Manifest(figure_id, out_dir, fmt, params)
    base = Scenario(trials=trials, base_seed=base_seed)

    if figure_id in ("fig1", "fig2"):
        if figure_id == "fig1":
            combos = [(c, "uniform") for c in ("16qam", "64qam")]
        else:
            combos = [("64qam", pa) for pa in ("uniform", "random")]
        for const, scheme in combos:
            for n in n_values:
                man.result(run_scenario(replace(base, constellation=const, n=n, pa_scheme=scheme)))
    elif figure_id in ("fig3", "fig4"):
        kind = acf_mod.APERIODIC if figure_id == "fig3" else acf_mod.ZERO_PADDED
        schemes = ("uniform", "random") if figure_id == "fig3" else ("uniform", "random", "pgd")
        rows = []
        for const in ("16qam", "16psk"):
            for scheme in schemes:
                for n in n_values:
                    s = replace(base, constellation=const, n=n, pa_scheme=scheme, acf_kind=kind,
                                pad_factor=L if kind == acf_mod.ZERO_PADDED else 1)
                    res = run_scenario(s)
                    rows.append({
                        "constellation": const, "pa": scheme, "n": n,
                        "empirical": res.summary_value("normalized_eisl"),
                        "theory": res.summary_value("normalized_eisl", "theory"),
                        "stderr": res.summary_value("normalized_eisl", "stderr"),
                    })
        man.rows(f"{figure_id}_normalized_eisl", rows, role="sweep", acf_kind=kind,
                 pad_factor=L if kind == acf_mod.ZERO_PADDED else 1,
                 constellations=["16qam", "16psk"], pa_schemes=list(schemes),
                 n_values=n_values, trials=trials, base_seed=base_seed)
        man.data["summary"] = rows
    elif figure_id in ("fig5", "fig6"):
        const = "16qam" if figure_id == "fig5" else "16psk"
        for n in n_values:
            for scheme in ("uniform", "random", "pgd"):
                man.result(run_scenario(replace(base, constellation=const, n=n, pa_scheme=scheme,
                                                acf_kind=acf_mod.ZERO_PADDED, pad_factor=L)))
    elif figure_id == "fig7":
        _reproduce_fig7(man, n_values, L)
    else:
        const = "16qam" if figure_id == "fig8" else "16psk"
        mu4 = from_tag(const).mu4
        for n in n_values:
            zp = replace(base, constellation=const, n=n, acf_kind=acf_mod.ZERO_PADDED, pad_factor=L)
            man.result(run_scenario(replace(zp, pa_scheme="uniform")))
            man.result(run_scenario(replace(zp, pa_scheme="pgd")))
            for q in sca_lags(L):
                s = replace(zp, pa_scheme="sca", q=q)
                pa = sca(ScaConfig(n, L, mu4, q)).final_pa
                man.result(run_scenario(s, pa))
    paths = [out_dir / f["path"] for f in man.data["files"]]
    paths.append(man.write())
    return paths


def sca_lags(pad_factor: int) -> list[int]:
    """Width-constraint lags ``L/2, L/2 + 2, L/2 + 4``."""
    half = max(1, pad_factor // 2)
    return [half, half + 2, half + 4]


def _reproduce_fig7(man: _Manifest, n_values, L):
    rows = []
    for const in ("16qam", "16psk"):
        mu4 = from_tag(const).mu4
        for n in n_values:
            uni = uniform_pa(n)
            ref_pgd = pgd(PgdConfig(n, L, mu4))
            man.rows(f"{const}_n{n}_pgd_trace", ref_pgd.rows(), role="trace", solver="pgd",
                     constellation=const, n=n, pad_factor=L)
            entries = [("uniform", None, uni.p, cf.zp_objective(uni, mu4, L), "n/a", 0),
                       ("pgd", None, ref_pgd.final_p, ref_pgd.final_objective,
                        ref_pgd.stop_reason, ref_pgd.n_iter)]
            for q in sca_lags(L):
                tr = sca(ScaConfig(n, L, mu4, q))
                man.rows(f"{const}_n{n}_sca_q{q}_trace", tr.rows(), role="trace", solver="sca",
                         constellation=const, n=n, pad_factor=L, q=q)
                entries.append((f"sca_q{q}", q, tr.final_p, tr.final_objective,
                                tr.stop_reason, tr.n_iter))
            for name, q, p, fval, reason, iters in entries:
                curve = cf.zp_expected_profile(p, mu4, L)
                rows.append({
                    "constellation": const, "n": n, "scheme": name,
                    "q": q if q is not None else "", "objective": float(fval),
                    "objective_db": float(10 * np.log10(fval)),
                    "width_3db": acf_mod.width_3db(curve), "stop_reason": reason,
                    "iterations": iters,
                })
                man.rows(f"{const}_n{n}_{name}_pa", [{"P": float(v)} for v in p], role="pa",
                         constellation=const, n=n, scheme=name, pad_factor=L)
    man.rows("fig7_summary", rows, role="summary")
    man.data["summary"] = rows
