"""Tag forward shots over a grid of center values and estimate the tail constants.

    python scripts/forward_sweep.py --n 3 --p 5 --lo 0.1 --hi 10 --num 25
"""
import argparse
from pathlib import Path

import numpy as np

from selfsim.exponents import derived_constants
from selfsim.serialize import write_sweep
from selfsim.ode_core import EquationKind
from selfsim.shooting import ShotTag, estimate_L_star, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=float, default=3)
    ap.add_argument("--p", type=float, default=5)
    ap.add_argument("--lo", type=float, default=0.1)
    ap.add_argument("--hi", type=float, default=10.0)
    ap.add_argument("--num", type=int, default=25)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("selfsim-out"))
    args = ap.parse_args()

    prm = derived_constants(args.n, args.p)
    grid = np.geomspace(args.lo, args.hi, args.num)
    res = sweep(EquationKind.FORWARD, prm, grid, workers=args.workers)
    for a, shot in zip(res.grid, res.shots):
        ell = "" if shot.ell is None else f"{shot.ell:.6g}"
        print(f"{a:12.6g}  {shot.tag.value:<18} {ell}")
    for lo, hi, t0, t1 in res.brackets:
        print(f"boundary in [{lo:.6g}, {hi:.6g}]: {t0.value} -> {t1.value}")

    decaying = [a for a, t in zip(res.grid, res.tags) if t is ShotTag.POSITIVE_DECAYING]
    if decaying:
        est = estimate_L_star(prm, decaying)
        ref = f" (L = {prm.L:.6g})" if prm.gamma > 0 else ""
        print(f"L* estimate {est.value:.6g}{ref}")
    args.out.mkdir(parents=True, exist_ok=True)
    path = write_sweep(res, args.out / f"forward_sweep_n{args.n:g}_p{args.p:g}.csv")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
