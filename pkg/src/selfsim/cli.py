"""Command-line front end.

    selfsim exponents --n 11
    selfsim shoot --n 3 --p 5 --kind forward --a 1 --r-end 50
    selfsim verify all
    selfsim sweep sweep.ini

Exit codes: 0 success, 1 failed verification, 2 invalid input, 3 undetermined
shot.  Files go to ``--outdir``, else ``$SELFSIM_OUTDIR``, else ``./selfsim-out``.
Every file-producing command writes a ``*.manifest.json`` even when it fails.

Sweep config (INI)::

    [sweep]
    n = 3
    p = 5
    kind = forward          ; forward | backward | steady
    a_grid = 0.5, 1, 2      ; or: geomspace 0.1 10 5 / linspace 1 2 3
    ; delta_grid = -1e-3, 1e-3   (instead of a_grid: perturbations of U_*)
    workers = 1

    [options]               ; any IntegrationOptions field, optional
    r_end = 50
    rel_tol = 1e-10
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import hashlib
import json
import math
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .exponents import derived_constants, exponent_table
from .integrator import IntegrationOptions
from .ode_core import EquationKind, Frame, residual_of
from .serialize import dumps, fmt, gnuplot_script, write_sweep, write_trajectory
from .shooting import (ShotTag, classify_shot, classify_singular, default_options,
                       sweep)
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_UNDETERMINED = 0, 1, 2, 3

KINDS = {"forward": EquationKind.FORWARD, "backward": EquationKind.BACKWARD,
         "steady": EquationKind.STEADY}


class UsageError(ValueError):
    pass


def outdir(arg: str | None) -> Path:
    path = Path(arg or os.environ.get("SELFSIM_OUTDIR") or "selfsim-out")
    path.mkdir(parents=True, exist_ok=True)
    return path


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclasses.dataclass
class RunManifest:
    command: str
    params: dict
    version: str = __version__
    config_digest: str | None = None
    outputs: list = dataclasses.field(default_factory=list)
    wall_clock: float = 0.0
    terminations: dict = dataclasses.field(default_factory=dict)
    error: str | None = None

    def write(self, path: Path) -> Path:
        path.write_text(dumps(dataclasses.asdict(self)))
        return path


def _tok(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else fmt(x)


def _check_n(n: float, allow_real: bool) -> float:
    if not allow_real and n != int(n):
        raise UsageError(f"n must be an integer (got {n}); pass --allow-real-n to override")
    if n <= 0:
        raise UsageError(f"n must be positive (got {fmt(n)})")
    return float(n)


# ---------------------------------------------------------------------------
# exponents

def cmd_exponents(args) -> int:
    n = _check_n(args.n, args.allow_real_n)
    table = exponent_table(n).as_dict()
    for key, val in table.items():
        print(f"{key:>10}  {fmt(val) if val is not None else '-'}", file=sys.stderr)
    sys.stdout.write(dumps(table))
    return EXIT_OK


# ---------------------------------------------------------------------------
# shoot

def _options(args, kind) -> IntegrationOptions:
    base = default_options(kind)
    over = {k: getattr(args, k) for k in ("r_end", "rel_tol", "abs_tol", "max_steps")
            if getattr(args, k) is not None}
    return dataclasses.replace(base, **over)


def cmd_shoot(args) -> int:
    t0 = time.perf_counter()
    out = outdir(args.outdir)
    kind = KINDS[args.kind]
    stem = args.name or f"shoot_{args.kind}_n{_tok(args.n)}_p{_tok(args.p)}"
    man = RunManifest("shoot", {"n": args.n, "p": args.p, "kind": kind.value})
    flags = {k: v for k, v in vars(args).items() if k not in ("func", "outdir")}
    man.config_digest = digest(json.dumps(flags, sort_keys=True).encode())
    code = EXIT_OK
    try:
        prm = derived_constants(_check_n(args.n, args.allow_real_n), args.p)
        opts = _options(args, kind)
        man.params["options"] = opts.as_dict()
        if args.singular is not None:
            if not prm.has_L:
                raise UsageError("--singular needs p > n/(n-2) so that L exists")
            shot = classify_singular(kind, prm, args.singular, opts, eps=args.eps or 1e-2)
            man.params.update(frame=Frame.SCALED_V.value, delta=args.singular)
        else:
            shot = classify_shot(kind, prm, args.a, opts, eps=args.eps or 1e-4)
            man.params.update(frame=Frame.PHYSICAL_W.value, a=args.a)
        summary = {"tag": shot.tag.value, "radius": shot.radius, "note": shot.note,
                   "ell": shot.ell,
                   "ell_estimate": dataclasses.asdict(shot.ell_estimate)
                   if shot.ell_estimate else None}
        if shot.trajectory is not None:
            traj = shot.trajectory
            summary["residual"] = residual_of(traj)
            csv_path, meta_path = write_trajectory(traj, out / f"{stem}.csv")
            man.outputs += [csv_path.name, meta_path.name]
            man.terminations[stem] = traj.meta.termination
            if args.gnuplot:
                gp = out / f"{stem}.gp"
                gp.write_text(gnuplot_script(csv_path))
                man.outputs.append(gp.name)
        sum_path = out / f"{stem}.summary.json"
        sum_path.write_text(dumps(summary))
        man.outputs.append(sum_path.name)
        ell = fmt(shot.ell) if shot.ell is not None else "undefined"
        print(f"{shot.tag.value} ell={ell}")
        if shot.tag is ShotTag.UNDETERMINED:
            code = EXIT_UNDETERMINED
    except (UsageError, ValueError) as exc:
        man.error = str(exc)
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    finally:
        man.wall_clock = time.perf_counter() - t0
        man.write(out / f"{stem}.manifest.json")
    return code


# ---------------------------------------------------------------------------
# verify

def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; choose from {sorted(SUITES)}",
              file=sys.stderr)
        return EXIT_USAGE
    report = run_suite(args.suite)
    for c in report["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['id']:<7} {c['name']}", file=sys.stderr)
    text = dumps(report)
    sys.stdout.write(text)
    if args.outdir or os.environ.get("SELFSIM_OUTDIR"):
        (outdir(args.outdir) / f"verify_{args.suite}.json").write_text(text)
    return EXIT_OK if report["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# sweep

def _line_of(text: str, key: str) -> int | None:
    for i, line in enumerate(text.splitlines(), 1):
        if line.split("=", 1)[0].strip().lower() == key:
            return i
    return None


def _config_error(path, text, key, msg) -> UsageError:
    line = _line_of(text, key)
    where = f"{path}:{line}" if line else str(path)
    return UsageError(f"{where}: key '{key}': {msg}")


def parse_grid(text: str) -> list[float]:
    parts = text.replace(",", " ").split()
    if parts and parts[0] in ("geomspace", "linspace"):
        if len(parts) != 4:
            raise ValueError(f"{parts[0]} needs lo hi num")
        lo, hi, num = float(parts[1]), float(parts[2]), int(parts[3])
        fn = np.geomspace if parts[0] == "geomspace" else np.linspace
        return [float(x) for x in fn(lo, hi, num)]
    return [float(x) for x in parts]


@dataclasses.dataclass(frozen=True)
class SweepConfig:
    n: float
    p: float
    kind: EquationKind
    grid: tuple
    singular: bool
    options: IntegrationOptions
    workers: int = 1


def load_sweep_config(path: Path) -> SweepConfig:
    text = path.read_text()
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise UsageError(str(exc)) from exc
    if not cp.has_section("sweep"):
        raise UsageError(f"{path}: missing [sweep] section")
    sec = cp["sweep"]
    known = {"n", "p", "kind", "a_grid", "delta_grid", "workers"}
    for key in sec:
        if key not in known:
            raise _config_error(path, text, key, "unknown key")

    def get(key, conv):
        if key not in sec:
            raise UsageError(f"{path}: [sweep] missing key '{key}'")
        try:
            return conv(sec[key])
        except ValueError as exc:
            raise _config_error(path, text, key, str(exc)) from exc

    n, p = get("n", float), get("p", float)
    if n <= 0 or n != int(n):
        raise _config_error(path, text, "n", "must be a positive integer")
    kind_name = get("kind", str).strip().lower()
    if kind_name not in KINDS:
        raise _config_error(path, text, "kind", f"expected one of {sorted(KINDS)}")
    kind = KINDS[kind_name]
    if ("a_grid" in sec) == ("delta_grid" in sec):
        raise UsageError(f"{path}: give exactly one of a_grid, delta_grid")
    gkey = "a_grid" if "a_grid" in sec else "delta_grid"
    raw = get(gkey, parse_grid)
    if not raw:
        raise _config_error(path, text, gkey, "empty grid")
    if not all(math.isfinite(x) for x in raw):
        raise _config_error(path, text, gkey, "non-finite grid value")
    grid = sorted(set(raw))
    if len(grid) < len(raw):
        warnings.warn(f"{path}: {gkey} had {len(raw) - len(grid)} duplicate value(s); "
                      "removed", stacklevel=2)
    workers = get("workers", int) if "workers" in sec else 1
    if workers < 1:
        raise _config_error(path, text, "workers", "must be >= 1")

    opts = default_options(kind)
    if cp.has_section("options"):
        fields = {f.name: f.type for f in dataclasses.fields(IntegrationOptions)}
        over = {}
        for key, val in cp["options"].items():
            if key not in fields:
                raise _config_error(path, text, key, "unknown option")
            try:
                over[key] = int(val) if key == "max_steps" else \
                    (None if val.strip().lower() == "none" else float(val))
            except ValueError as exc:
                raise _config_error(path, text, key, str(exc)) from exc
        try:
            opts = dataclasses.replace(opts, **over)
        except ValueError as exc:
            raise UsageError(f"{path}: [options]: {exc}") from exc
    if gkey == "delta_grid" and not derived_constants(n, p).has_L:
        raise _config_error(path, text, "delta_grid", "needs p > n/(n-2) so that L exists")
    return SweepConfig(n, p, kind, tuple(grid), gkey == "delta_grid", opts, workers)


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    out = outdir(args.outdir)
    path = Path(args.config)
    stem = args.name or path.stem
    man = RunManifest("sweep", {"config": str(path)})
    code = EXIT_OK
    try:
        if not path.is_file():
            raise UsageError(f"{path}: no such config file")
        man.config_digest = digest(path.read_bytes())
        cfg = load_sweep_config(path)
        man.params = {"n": cfg.n, "p": cfg.p, "kind": cfg.kind.value,
                      "frame": (Frame.SCALED_V if cfg.singular else Frame.PHYSICAL_W).value,
                      "grid": list(cfg.grid), "options": cfg.options.as_dict(),
                      "workers": cfg.workers}
        prm = derived_constants(cfg.n, cfg.p)
        result = sweep(cfg.kind, prm, cfg.grid, cfg.options, workers=cfg.workers,
                       classify=classify_singular if cfg.singular else classify_shot)
        csv_path = write_sweep(result, out / f"{stem}.csv")
        tags = [t.value for t in result.tags]
        summary = {"grid": list(result.grid), "tags": tags,
                   "counts": {t.value: tags.count(t.value) for t in ShotTag},
                   "brackets": [[lo, hi, a.value, b.value]
                                for lo, hi, a, b in result.brackets]}
        sum_path = out / f"{stem}.summary.json"
        sum_path.write_text(dumps(summary))
        man.outputs += [csv_path.name, sum_path.name]
        man.terminations = {fmt(a): s.note for a, s in zip(result.grid, result.shots)}
        for a, tag in zip(result.grid, tags):
            print(f"{fmt(a)}\t{tag}")
    except (UsageError, ValueError) as exc:
        man.error = str(exc)
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    finally:
        man.wall_clock = time.perf_counter() - t0
        man.write(out / f"{stem}.manifest.json")
    return code


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="selfsim", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("exponents", help="critical exponents for a dimension")
    e.add_argument("--n", type=float, required=True)
    e.add_argument("--allow-real-n", action="store_true")
    e.set_defaults(func=cmd_exponents)

    s = sub.add_parser("shoot", help="integrate and classify one profile")
    s.add_argument("--n", type=float, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--kind", choices=sorted(KINDS), required=True)
    start = s.add_mutually_exclusive_group(required=True)
    start.add_argument("--a", type=float, help="center value w(0)")
    start.add_argument("--singular", type=float, metavar="DELTA",
                       help="perturbation of the singular solution")
    s.add_argument("--eps", type=float, help="start radius")
    s.add_argument("--r-end", type=float)
    s.add_argument("--rel-tol", type=float)
    s.add_argument("--abs-tol", type=float)
    s.add_argument("--max-steps", type=int)
    s.add_argument("--name", help="output file stem")
    s.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    s.add_argument("--outdir")
    s.add_argument("--allow-real-n", action="store_true")
    s.set_defaults(func=cmd_shoot)

    v = sub.add_parser("verify", help="run an acceptance suite")
    v.add_argument("suite")
    v.add_argument("--outdir")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("sweep", help="classify a grid of shots from a config file")
    w.add_argument("config")
    w.add_argument("--name", help="output file stem")
    w.add_argument("--outdir")
    w.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
