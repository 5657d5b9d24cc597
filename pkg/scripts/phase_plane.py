"""Dump orbits of the log-radius system v'' + beta v' + v^p - gamma v = 0 as CSV.

One orbit leaves each point of a small circle around (L, 0); plot with e.g.
``gnuplot -e "plot for [i=0:*] 'phase.csv' index i u 2:3 w l"``.
"""
import argparse
import csv
import sys

import numpy as np

from selfsim.exponents import derived_constants
from selfsim.integrator import IntegrationOptions, integrate
from selfsim.ode_core import EquationKind, Frame, ProfileState


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=float, default=11)
    ap.add_argument("--p", type=float, default=3)
    ap.add_argument("--orbits", type=int, default=12)
    ap.add_argument("--radius", type=float, default=0.05)
    ap.add_argument("--s-span", type=float, default=12.0)
    args = ap.parse_args()

    prm = derived_constants(args.n, args.p)
    opts = IntegrationOptions(r_end=args.s_span, value_ceiling=4 * prm.L, max_steps=20000)
    out = csv.writer(sys.stdout, lineterminator="\n")
    for th in np.linspace(0, 2 * np.pi, args.orbits, endpoint=False):
        v0 = prm.L + args.radius * np.cos(th)
        dv0 = args.radius * np.sin(th)
        start = ProfileState(0.0, v0, dv0, Frame.LOG_PHASE, EquationKind.STEADY, prm)
        t = integrate(EquationKind.STEADY, Frame.LOG_PHASE, prm, start, opts)
        out.writerow([f"# theta={th:.4f} end={t.meta.termination}"])
        out.writerows(zip(t.coord, t.value, t.slope))
        sys.stdout.write("\n\n")


if __name__ == "__main__":
    main()
