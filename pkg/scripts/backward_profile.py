"""Locate a nonconstant bounded backward profile by bisecting on a tag boundary.

Defaults reproduce the (n, p) = (11, 2) candidate used by ``selfsim verify dichotomy``.
"""
import argparse
from pathlib import Path

from selfsim.ode_core import residual_of
from selfsim.serialize import write_trajectory
from selfsim.shooting import estwmm_constant
from selfsim.verify import backward_candidate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=float, default=11)
    ap.add_argument("--p", type=float, default=2)
    ap.add_argument("--rel-tol", type=float, default=1e-10)
    ap.add_argument("--out", type=Path, default=Path("selfsim-out"))
    args = ap.parse_args()

    res, cand, _ = backward_candidate(args.n, args.p, args.rel_tol)
    t = cand.trajectory
    prm = t.params
    print(f"kappa      {prm.kappa:.10g}")
    print(f"a*         {res.a_star:.10g}  (bracket width {res.width:.2e})")
    print(f"tags       {res.tag_lo.value} | {res.tag_hi.value}")
    print(f"valid to   r = {cand.r_valid:.6g}")
    print(f"tag        {cand.shot.tag.value}")
    print(f"residual   {residual_of(t):.3e}")
    print(f"C          {estwmm_constant(t):.10g}")
    args.out.mkdir(parents=True, exist_ok=True)
    csv, _ = write_trajectory(t, args.out / f"backward_profile_n{args.n:g}_p{args.p:g}.csv")
    print(f"wrote {csv}")


if __name__ == "__main__":
    main()
