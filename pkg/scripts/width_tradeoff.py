#!/usr/bin/env python3
"""Print the sidelobe/mainlobe-width tradeoff of the constrained optimizer.

For each constellation the table lists the normalized zero-padded EISL (in
dB) and the -3 dB mainlobe width of the expected profile for uniform power,
SCA at each constraint lag, and unconstrained PGD.
"""
import argparse

import numpy as np

from ofdm_pa import acf, closed_form as cf
from ofdm_pa.constellation import from_tag
from ofdm_pa.harness import sca_lags
from ofdm_pa.optimizer import PgdConfig, ScaConfig, pgd, sca
from ofdm_pa.waveform import uniform_pa


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--l", type=int, default=10)
    ap.add_argument("--constellations", nargs="+", default=["16psk", "16qam"])
    args = ap.parse_args()
    n, L = args.n, args.l
    print(f"{'constellation':>13} {'scheme':>8} {'f [dB]':>9} {'width':>5} {'iters':>5}")
    for tag in args.constellations:
        mu4 = from_tag(tag).mu4
        runs = [("uniform", uniform_pa(n).p, cf.zp_objective(uniform_pa(n), mu4, L), 0)]
        for q in sca_lags(L):
            tr = sca(ScaConfig(n, L, mu4, q))
            runs.append((f"sca q={q}", tr.final_p, tr.final_objective, tr.n_iter))
        tr = pgd(PgdConfig(n, L, mu4))
        runs.append(("pgd", tr.final_p, tr.final_objective, tr.n_iter))
        for name, p, f, iters in runs:
            width = acf.width_3db(cf.zp_expected_profile(p, mu4, L))
            print(f"{tag:>13} {name:>8} {10 * np.log10(f):9.4f} {width:5d} {iters:5d}")


if __name__ == "__main__":
    main()
