"""Perturb U_* along its stable mode and report where each perturbation leaves the band.

Zero survivors is consistent with uniqueness; it does not prove it.
"""
import argparse
import json

import numpy as np

from selfsim.exponents import derived_constants
from selfsim.serialize import dumps
from selfsim.shooting import uniqueness_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=float, default=11)
    ap.add_argument("--p", type=float, default=7)
    ap.add_argument("--decades", type=int, nargs=2, default=(-6, -4))
    ap.add_argument("--json", action="store_true", help="print the full report")
    args = ap.parse_args()

    mags = np.logspace(args.decades[0], args.decades[1], args.decades[1] - args.decades[0] + 1)
    rep = uniqueness_probe(derived_constants(args.n, args.p), [*mags, *-mags])
    if args.json:
        print(dumps(rep.as_dict()))
        return
    for e in rep.entries:
        print(f"{e.delta:+.1e}  in: {e.inward_termination:<14} s={e.inward_exit_s}  "
              f"out: {e.outward_termination}")
    print(f"slope {rep.slope}  expected {rep.expected_slope}")
    print(f"survivors {json.dumps(rep.survivors)}  inconclusive {rep.inconclusive_count}")


if __name__ == "__main__":
    main()
