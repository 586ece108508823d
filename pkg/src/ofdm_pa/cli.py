"""Command-line entry point ``ofdm-pa``.

Every subcommand writes data files into ``--out-dir`` (default ``$OFDM_PA_OUT``
or ``./out``) and prints one line per written file plus a short summary.
Usage errors exit with status 2; any other failure exits with status 1.
"""
from __future__ import annotations

import argparse
import json
import logging
from pathlib import Path
import sys

import numpy as np

from . import __version__
from . import acf as acf_mod
from . import closed_form as cf
from .constellation import from_tag, sample_symbols
from .harness import FIGURES, Scenario, default_out_dir, reproduce, run_scenario, write_result
from .io import FORMATS, write_rows
from .optimizer import PgdConfig, ScaConfig, config_to_dict, pgd, sca, width_constraint
from .waveform import load_pa_csv, modulate, random_pa, save_pa_csv, uniform_pa

log = logging.getLogger("ofdm_pa")


class UsageError(Exception):
    pass


def _pa_from_args(args, n: int):
    if args.pa == "uniform":
        return uniform_pa(n)
    if args.pa == "random":
        return random_pa(n, args.pa_seed if args.pa_seed is not None else args.seed)
    if args.pa_file is None:
        raise UsageError("--pa file needs --pa-file")
    return load_pa_csv(args.pa_file)


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return data


def _report(paths):
    for p in paths:
        print(p)


# -- subcommands ---------------------------------------------------------------

def cmd_acf(args, out: Path):
    c = from_tag(args.constellation)
    pa = _pa_from_args(args, args.n)
    frame = modulate(sample_symbols(c, pa.n, args.seed), pa)
    if args.kind == acf_mod.PERIODIC:
        prof = acf_mod.pacf(frame)
    elif args.kind == acf_mod.APERIODIC:
        prof = acf_mod.aacf(frame)
    else:
        prof = acf_mod.zp_pacf(frame, args.l)
    stem = f"acf_{args.constellation}_n{pa.n}_{args.kind.replace('-', '')}_seed{args.seed}"
    path = write_rows(out / stem, acf_mod.profile_rows(prof), args.format)
    print(f"isl={acf_mod.isl(prof)!r} psl_db={acf_mod.psl_db(prof)!r}")
    _report([path])


def cmd_theory(args, out: Path):
    mu4 = args.mu4 if args.mu4 is not None else from_tag(args.constellation).mu4
    pa = _pa_from_args(args, args.n)
    if args.kind == acf_mod.PERIODIC:
        curve = cf.pacf_expected_profile(pa, mu4)
        eisl = cf.pacf_eisl(pa, mu4)
    elif args.kind == acf_mod.ZERO_PADDED:
        curve = cf.zp_expected_profile(pa, mu4, args.l)
        eisl = cf.zp_eisl(pa, mu4, args.l)
    else:
        raise UsageError("per-lag theory is available for periodic and zero-padded kinds only")
    main = cf.mainlobe(pa, mu4)
    stem = f"theory_n{pa.n}_{args.kind.replace('-', '')}"
    path = write_rows(out / stem, cf.theory_rows(curve), args.format)
    print(f"mainlobe={main!r} eisl={eisl!r} normalized_eisl={eisl / main!r}")
    _report([path])


def cmd_montecarlo(args, out: Path):
    s = Scenario(constellation=args.constellation, n=args.n, pa_scheme=args.pa,
                 pad_factor=args.l if args.kind == acf_mod.ZERO_PADDED else 1,
                 trials=args.trials, base_seed=args.seed, acf_kind=args.kind,
                 pa_seed=args.pa_seed, pa_file=args.pa_file, q=args.q)
    res = run_scenario(s)
    for row in res.summary:
        print(f"{row['metric']}: empirical={row['empirical']!r} theory={row['theory']!r}")
    _report(write_result(res, out, args.format).values())


def _optimizer_config(args, cls, extra: dict):
    d = _load_json(args.config) if args.config else {}
    for key, val in extra.items():
        if val is not None:
            d[key] = val
    if "mu4" not in d and "constellation" not in d:
        d["constellation"] = args.constellation
    if isinstance(d.get("p0"), str):
        d["p0"] = load_pa_csv(d["p0"])
    try:
        return cls.from_dict(d)
    except TypeError as exc:
        raise UsageError(f"incomplete optimizer config: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"invalid optimizer config: {exc}") from exc


def _write_trace(trace, cfg, out: Path, stem: str, fmt: str):
    paths = [write_rows(out / f"{stem}_trace", trace.rows(), fmt),
             save_pa_csv(trace.final_pa, out / f"{stem}_pa.csv")]
    meta = {"config": config_to_dict(cfg), "final_objective": trace.final_objective,
            "iterations": trace.n_iter, "stop_reason": trace.stop_reason}
    meta_path = out / f"{stem}_run.json"
    meta_path.write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    return paths + [meta_path]


def cmd_optimize_pgd(args, out: Path):
    cfg = _optimizer_config(args, PgdConfig,
                            {"n": args.n, "pad_factor": args.l, "r_max": args.r_max, "eps": args.eps})
    trace = pgd(cfg)
    f_uni = cf.zp_objective(uniform_pa(cfg.n), cfg.mu4, cfg.pad_factor)
    print(f"final_objective={trace.final_objective!r} uniform_objective={f_uni!r} "
          f"gain_db={float(10 * np.log10(f_uni / trace.final_objective))!r} "
          f"iterations={trace.n_iter} stop_reason={trace.stop_reason}")
    _report(_write_trace(trace, cfg, out, f"pgd_n{cfg.n}_L{cfg.pad_factor}", args.format))


def cmd_optimize_sca(args, out: Path):
    cfg = _optimizer_config(args, ScaConfig, {"n": args.n, "pad_factor": args.l, "q": args.q,
                                              "r_max": args.r_max, "eps": args.eps})
    trace = sca(cfg)
    slack = width_constraint(trace.final_pa, cfg.mu4, cfg.pad_factor, cfg.q)
    width = acf_mod.width_3db(cf.zp_expected_profile(trace.final_pa, cfg.mu4, cfg.pad_factor))
    print(f"final_objective={trace.final_objective!r} constraint_slack={slack!r} "
          f"width_3db={width} iterations={trace.n_iter} stop_reason={trace.stop_reason}")
    _report(_write_trace(trace, cfg, out, f"sca_n{cfg.n}_L{cfg.pad_factor}_q{cfg.q}", args.format))


def cmd_reproduce(args, out: Path):
    paths = reproduce(args.figure, out, trials=args.trials, base_seed=args.seed, fmt=args.format,
                      n_values=args.n_values, pad_factor=args.l)
    _report(paths)


def cmd_sweep(args, out: Path):
    """Normalized EISL, empirical against closed form, over a grid of N."""
    rows = []
    for n in args.n_values:
        s = Scenario(constellation=args.constellation, n=n, pa_scheme=args.pa,
                     pad_factor=args.l if args.kind == acf_mod.ZERO_PADDED else 1,
                     trials=args.trials, base_seed=args.seed, acf_kind=args.kind,
                     pa_seed=args.pa_seed, q=args.q)
        res = run_scenario(s)
        rows.append({"n": n,
                     "empirical": res.summary_value("normalized_eisl"),
                     "theory": res.summary_value("normalized_eisl", "theory"),
                     "stderr": res.summary_value("normalized_eisl", "stderr")})
        print(f"n={n} empirical={rows[-1]['empirical']!r} theory={rows[-1]['theory']!r}")
    stem = f"sweep_{args.constellation}_{args.pa}_{args.kind.replace('-', '')}"
    _report([write_rows(out / stem, rows, args.format)])


# -- parser ----------------------------------------------------------------------

def _common(sub, trials=False, pa_schemes=("uniform", "random", "file")):
    sub.add_argument("--constellation", default="16qam", help="tag such as qpsk, 16psk, 64qam")
    sub.add_argument("--n", type=int, default=64, help="number of subcarriers N")
    sub.add_argument("--kind", choices=acf_mod.KINDS, default=acf_mod.PERIODIC)
    sub.add_argument("--l", type=int, default=1, help="zero-padding factor L")
    sub.add_argument("--pa", choices=pa_schemes, default="uniform")
    sub.add_argument("--pa-seed", type=int, default=None)
    sub.add_argument("--pa-file", default=None, help="one-column CSV with header P")
    if trials:
        sub.add_argument("--trials", type=int, default=1000)


def _optimizer_args(sub, sca_flags=False):
    sub.add_argument("--config", help="JSON file with optimizer config fields")
    sub.add_argument("--constellation", default="16qam")
    sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--l", type=int, default=None, help="zero-padding factor L")
    sub.add_argument("--r-max", type=int, default=None)
    sub.add_argument("--eps", type=float, default=None)
    if sca_flags:
        sub.add_argument("--q", type=int, default=None, help="width-constraint lag")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ofdm-pa", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=0, help="base seed")
    parser.add_argument("--out-dir", type=Path, default=None)
    parser.add_argument("--format", choices=FORMATS, default="csv")
    parser.add_argument("-v", "--verbose", action="store_true")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("acf", help="correlation profile of one seeded realization")
    _common(p)
    p.set_defaults(func=cmd_acf)

    p = subs.add_parser("theory", help="closed-form expected squared correlation per lag")
    _common(p)
    p.add_argument("--mu4", type=float, default=None, help="override the constellation kurtosis")
    p.set_defaults(func=cmd_theory)

    p = subs.add_parser("montecarlo", help="averaged profile with closed-form overlay")
    _common(p, trials=True, pa_schemes=("uniform", "random", "file", "pgd", "sca"))
    p.add_argument("--q", type=int, default=None, help="width-constraint lag for --pa sca")
    p.set_defaults(func=cmd_montecarlo)

    p = subs.add_parser("optimize-pgd", help="projected gradient descent on the padded EISL")
    _optimizer_args(p)
    p.set_defaults(func=cmd_optimize_pgd)

    p = subs.add_parser("optimize-sca", help="SCA with a mainlobe-width constraint")
    _optimizer_args(p, sca_flags=True)
    p.set_defaults(func=cmd_optimize_sca)

    p = subs.add_parser("reproduce", help="regenerate the data of one figure")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--n-values", type=int, nargs="+", default=None)
    p.add_argument("--l", type=int, default=None, help="zero-padding factor L")
    p.set_defaults(func=cmd_reproduce)

    p = subs.add_parser("sweep", help="normalized EISL against N")
    _common(p, trials=True, pa_schemes=("uniform", "random", "pgd", "sca"))
    p.add_argument("--n-values", type=int, nargs="+", default=[16, 32, 64])
    p.add_argument("--q", type=int, default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = args.out_dir if args.out_dir is not None else default_out_dir()
    try:
        out.mkdir(parents=True, exist_ok=True)
        args.func(args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ofdm-pa: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"ofdm-pa: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
