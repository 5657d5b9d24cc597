"""Shooting over center values and singular perturbations.

Shots start from the regular series at r = 0 and are tagged by how the
integration ends.  For backward profiles no shot reaches a numerical
blow-up (the w^p term pulls large values back), so the upward departure
along the e^(r^2/4) mode is detected as the slope turning positive below
kappa and reported as ``Blowup`` at that radius.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .exponents import Params, indicial_roots
from .integrator import (IntegrationError, IntegrationOptions, integrate,
                         series_start, singular_start, spiral_start)
from .ode_core import (EquationKind, Frame, ProfileState, Trajectory, _kind,
                       transform_trajectory)


class ShotTag(str, Enum):
    POSITIVE_DECAYING = "PositiveDecaying"
    HITS_ZERO = "HitsZero"
    BLOWUP = "Blowup"
    UNDETERMINED = "Undetermined"


_TAG_OF_TERMINATION = {
    "span_end": ShotTag.POSITIVE_DECAYING,
    "value_floor": ShotTag.HITS_ZERO,
    "value_ceiling": ShotTag.BLOWUP,
    "turn": ShotTag.BLOWUP,
}


@dataclass(frozen=True)
class EllEstimate:
    value: float
    converged: bool
    estimates: tuple[float, float, float]
    radii: tuple[float, float, float]


@dataclass(frozen=True, eq=False)
class ShotClassification:
    tag: ShotTag
    radius: float | None
    terminal: ProfileState | None
    ell_estimate: EllEstimate | None = None
    note: str = ""
    trajectory: Trajectory | None = field(default=None, repr=False)

    @property
    def ell(self) -> float | None:
        e = self.ell_estimate
        return e.value if e is not None and e.converged else None


def default_options(kind) -> IntegrationOptions:
    kind = _kind(kind)
    if kind is EquationKind.BACKWARD:
        return IntegrationOptions(r_end=20.0)
    return IntegrationOptions(r_end=50.0)


def estimate_ell(traj: Trajectory, rtol: float = 1e-4) -> EllEstimate:
    """Limit of r^alpha w(r) as r -> infinity for a forward profile.

    Uses the radii r_end * (1/2, 1/sqrt 2, 1).  The returned value is the
    Aitken extrapolation of the three samples; the estimate counts as
    converged when it agrees with both order-2 Richardson extrapolations
    (tail w = r^-alpha (l + C r^-2 + ...)) to ``rtol``.
    """
    if traj.kind is not EquationKind.FORWARD:
        raise ValueError("ell is defined for forward profiles")
    if traj.frame is not Frame.PHYSICAL_W:
        traj = transform_trajectory(traj, Frame.PHYSICAL_W)
    r_end = float(np.max(traj.radius))
    if r_end < 50:
        raise ValueError(f"estimate_ell needs r_end >= 50, got {r_end}")
    radii = r_end * np.array([0.5, 2 ** -0.5, 1.0])
    w, _ = traj.evaluate(radii)
    v = radii ** traj.params.alpha * w
    v1, v2, v3 = (float(x) for x in v)
    # order-2 Richardson with ratio rho = 2^(1/2) between radii
    rho2 = 2.0
    rich_12 = (rho2 * v2 - v1) / (rho2 - 1.0)
    rich_23 = (rho2 * v3 - v2) / (rho2 - 1.0)
    d1, d2 = v2 - v1, v3 - v2
    if d1 != d2 and d1 * d2 > 0:
        aitken = v3 - d2 * d2 / (d2 - d1)
    else:
        aitken = rich_23
    ests = (rich_12, rich_23, aitken)
    scale = max(abs(aitken), 1e-300)
    converged = max(ests) - min(ests) <= rtol * scale
    return EllEstimate(aitken, bool(converged), ests, tuple(float(x) for x in radii))


def classify_shot(kind, params: Params, a: float,
                  options: IntegrationOptions | None = None,
                  eps: float = 1e-4) -> ShotClassification:
    """Integrate from the regular series start w(0) = a and tag the outcome."""
    kind = _kind(kind)
    opts = options or default_options(kind)
    if kind is EquationKind.BACKWARD and opts.turn_below is None:
        opts = replace(opts, turn_below=params.kappa)
    start = series_start(kind, params, a, eps=eps, rel_tol=opts.rel_tol)
    try:
        traj = integrate(kind, Frame.PHYSICAL_W, params, start, opts)
    except IntegrationError as exc:
        return ShotClassification(ShotTag.UNDETERMINED, None, start, note=str(exc))
    term = traj.meta.termination
    tag = _TAG_OF_TERMINATION.get(term, ShotTag.UNDETERMINED)
    radius = traj.meta.event_coord if tag in (ShotTag.HITS_ZERO, ShotTag.BLOWUP) else None
    terminal = traj.state(len(traj) - 1)
    ell = None
    note = term
    if tag is ShotTag.POSITIVE_DECAYING:
        if np.all(traj.slope == 0) and np.all(traj.value == traj.value[0]):
            note = "constant solution (non-decaying, ell undefined)"
        elif kind is EquationKind.FORWARD and traj.radius[-1] >= 50:
            ell = estimate_ell(traj)
    return ShotClassification(tag, radius, terminal, ell, note, traj)


def classify_singular(kind, params: Params, delta: float,
                      options: IntegrationOptions | None = None,
                      eps: float = 1e-2, root_index: int = 1) -> ShotClassification:
    """Integrate outward from U_* perturbed by ``delta`` (ScaledV frame) and tag it."""
    kind = _kind(kind)
    opts = options or default_options(kind)
    start = singular_start(params, delta, root_index=root_index, eps=eps, kind=kind)
    try:
        traj = integrate(kind, Frame.SCALED_V, params, start, opts)
    except IntegrationError as exc:
        return ShotClassification(ShotTag.UNDETERMINED, None, start, note=str(exc))
    term = traj.meta.termination
    tag = _TAG_OF_TERMINATION.get(term, ShotTag.UNDETERMINED)
    radius = traj.meta.event_coord if tag in (ShotTag.HITS_ZERO, ShotTag.BLOWUP) else None
    ell = None
    note = term
    if delta == 0 and np.all(traj.value == params.L):
        note = "constant v = L (the singular solution)"
    if tag is ShotTag.POSITIVE_DECAYING and kind is EquationKind.FORWARD \
            and traj.radius[-1] >= 50:
        ell = estimate_ell(transform_trajectory(traj, Frame.PHYSICAL_W))
    return ShotClassification(tag, radius, traj.state(len(traj) - 1), ell, note, traj)


# ---------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True, eq=False)
class SweepResult:
    grid: tuple[float, ...]
    shots: tuple[ShotClassification, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("sweep grid must be strictly increasing")

    @property
    def tags(self) -> list[ShotTag]:
        return [s.tag for s in self.shots]

    @property
    def brackets(self) -> list[tuple[float, float, ShotTag, ShotTag]]:
        out = []
        for i in range(len(self.grid) - 1):
            t0, t1 = self.shots[i].tag, self.shots[i + 1].tag
            if t0 is not t1:
                out.append((self.grid[i], self.grid[i + 1], t0, t1))
        return out


def _shot_worker(args):
    classify, kind, params, a, options = args
    shot = classify(kind, params, a, options)
    # trajectories stay in the worker; only the summary crosses processes
    return replace(shot, trajectory=None)


def sweep(kind, params: Params, a_grid: Sequence[float],
          options: IntegrationOptions | None = None, workers: int = 1,
          keep_trajectories: bool = False,
          classify: Callable = classify_shot) -> SweepResult:
    """Classify every grid value; results are ordered by grid regardless of workers.

    ``classify`` is ``classify_shot`` (center values) or ``classify_singular``
    (perturbations of U_*); it must be a module-level function when workers > 1.
    """
    grid = sorted(set(float(a) for a in a_grid))
    if not grid:
        raise ValueError("empty sweep grid")
    jobs = [(classify, _kind(kind), params, a, options) for a in grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            shots = list(ex.map(_shot_worker, jobs))
    else:
        shots = [classify(*job[1:]) for job in jobs]
        if not keep_trajectories:
            shots = [replace(s, trajectory=None) for s in shots]
    return SweepResult(tuple(grid), tuple(shots))


# ---------------------------------------------------------------------------
# bisection between two tags

class BracketError(ValueError):
    pass


@dataclass(frozen=True)
class BoundaryResult:
    a_star: float
    a_lo: float
    a_hi: float
    tag_lo: ShotTag
    tag_hi: ShotTag
    iterations: int
    undetermined: tuple[float, ...] = ()

    @property
    def width(self) -> float:
        return abs(self.a_hi - self.a_lo)


def bisect_boundary(kind, params: Params, a_lo: float, a_hi: float,
                    target: tuple[ShotTag, ShotTag] | None = None,
                    options: IntegrationOptions | None = None,
                    classify: Callable[[float], ShotTag] | None = None,
                    rtol: float = 1e-10, max_iter: int = 200) -> BoundaryResult:
    """Midpoint bisection on the center value until the bracket is below
    rtol * max(1, a*).  ``classify`` replaces the shot classifier (tests)."""
    if classify is None:
        def classify(a):
            return classify_shot(kind, params, a, options).tag
    t_lo, t_hi = ShotTag(classify(a_lo)), ShotTag(classify(a_hi))
    if t_lo is t_hi:
        raise BracketError(f"both ends tagged {t_lo.value}")
    if ShotTag.UNDETERMINED in (t_lo, t_hi):
        raise BracketError("bracket end is Undetermined")
    if target is not None and {t_lo, t_hi} != {ShotTag(t) for t in target}:
        raise BracketError(f"bracket tags {t_lo.value}/{t_hi.value} differ from target")
    lo, hi = float(a_lo), float(a_hi)
    undetermined = []
    it = 0
    while abs(hi - lo) > rtol * max(1.0, abs(0.5 * (lo + hi))):
        if it >= max_iter:
            raise BracketError("bisection did not converge")
        it += 1
        mid = lo + 0.5 * (hi - lo)
        t = ShotTag(classify(mid))
        if t is ShotTag.UNDETERMINED:
            undetermined.append(mid)
            for frac in (0.25, 0.75):
                alt = lo + frac * (hi - lo)
                t = ShotTag(classify(alt))
                if t is not ShotTag.UNDETERMINED:
                    mid = alt
                    break
                undetermined.append(alt)
            else:
                raise BracketError(f"Undetermined shots around a={mid!r}")
        if t is t_lo:
            lo = mid
        elif t is t_hi:
            hi = mid
        else:
            raise BracketError(f"third tag {t.value} at a={mid!r}")
    return BoundaryResult(lo + 0.5 * (hi - lo), lo, hi, t_lo, t_hi, it, tuple(undetermined))


@dataclass(frozen=True, eq=False)
class BoundaryProfile:
    a_star: float
    r_valid: float
    shot: ShotClassification

    @property
    def trajectory(self) -> Trajectory:
        return self.shot.trajectory


def boundary_profile(kind, params: Params, result: BoundaryResult,
                     options: IntegrationOptions | None = None,
                     agree_tol: float = 1e-6, eps: float = 1e-4) -> BoundaryProfile:
    """Profile candidate at the bisected center value.

    The two bracket shots are compared on a common grid; the candidate is
    integrated up to the first radius where they differ by more than
    ``agree_tol`` (beyond it the computed profile is not determined by the
    bracket) and classified over that span.
    """
    kind = _kind(kind)
    opts = options or default_options(kind)
    s_lo = classify_shot(kind, params, result.a_lo, opts, eps)
    s_hi = classify_shot(kind, params, result.a_hi, opts, eps)
    t1, t2 = s_lo.trajectory, s_hi.trajectory
    r_max = min(t1.radius[-1], t2.radius[-1])
    r = t1.radius[t1.radius <= r_max]
    w1 = t1.value[: r.size]
    w2, _ = t2.evaluate(r)
    bad = np.nonzero(np.abs(w1 - w2) > agree_tol * np.maximum(1.0, np.abs(w1)))[0]
    r_valid = float(r[bad[0] - 1]) if bad.size and bad[0] > 0 else float(r_max)
    shot = classify_shot(kind, params, result.a_star, replace(opts, r_end=r_valid), eps)
    return BoundaryProfile(result.a_star, r_valid, shot)


def estwmm_constant(traj: Trajectory) -> float:
    """Smallest C with w <= C (1 + r^-alpha) on the samples."""
    if traj.frame is not Frame.PHYSICAL_W:
        traj = transform_trajectory(traj, Frame.PHYSICAL_W)
    r = traj.radius
    alpha = traj.params.alpha
    ratio = traj.value / (1.0 + r ** (-alpha))
    i = int(np.argmax(ratio))
    best = float(ratio[i])
    if traj.dense is None or i in (0, len(r) - 1):
        return best
    # refine the interior max on the dense output
    def neg(s):
        x = math.exp(s)
        w, _ = traj.dense(np.array([x]))
        return -float(w[0]) / (1.0 + x ** (-alpha))
    opt = minimize_scalar(neg, bounds=(math.log(r[i - 1]), math.log(r[i + 1])),
                          method="bounded", options={"xatol": 1e-12})
    return max(best, -float(opt.fun))


# ---------------------------------------------------------------------------
# L*

@dataclass(frozen=True)
class LStarEstimate:
    """Lower bound for L*: max of the converged ell estimates on the grid."""
    value: float | None
    a_at_max: float | None
    ells: tuple[tuple[float, float | None], ...]
    excluded: tuple[float, ...]


def estimate_L_star(params: Params, a_grid: Sequence[float],
                    options: IntegrationOptions | None = None,
                    workers: int = 1) -> LStarEstimate:
    res = sweep(EquationKind.FORWARD, params, a_grid, options, workers)
    ells, excluded = [], []
    for a, shot in zip(res.grid, res.shots):
        ells.append((a, shot.ell))
        if shot.ell is None:
            excluded.append(a)
    good = [(e, a) for a, e in ells if e is not None]
    if not good:
        return LStarEstimate(None, None, tuple(ells), tuple(excluded))
    best, a_best = max(good)
    return LStarEstimate(best, a_best, tuple(ells), tuple(excluded))


# ---------------------------------------------------------------------------
# uniqueness probe around U_*

@dataclass(frozen=True)
class ProbeEntry:
    delta: float
    inward_termination: str
    inward_exit_s: float | None
    outward_termination: str
    outward_exit_s: float | None

    @property
    def survives_inward(self) -> bool:
        return self.inward_termination == "span_end"

    @property
    def survives_outward(self) -> bool:
        return self.outward_termination == "span_end"

    @property
    def inconclusive(self) -> bool:
        bad = {"max_steps", "step_underflow", "nonfinite", "error"}
        return self.inward_termination in bad or self.outward_termination in bad


@dataclass(frozen=True)
class ProbeReport:
    """Search for a second singular profile near U_*.

    A numerical search can only fail to find a counterexample; an empty
    ``survivors`` list is consistent with uniqueness, not a proof of it.
    """
    n: float
    p: float
    eps: float
    band: float
    entries: tuple[ProbeEntry, ...]
    slope: float | None
    expected_slope: float | None

    @property
    def survivors(self) -> list[float]:
        return [e.delta for e in self.entries
                if e.delta != 0 and not e.inconclusive
                and e.survives_inward and e.survives_outward]

    @property
    def inconclusive_count(self) -> int:
        return sum(e.inconclusive for e in self.entries)

    def as_dict(self) -> dict:
        return {
            "n": self.n, "p": self.p, "eps": self.eps, "band": self.band,
            "entries": [{
                "delta": e.delta,
                "inward": e.inward_termination, "inward_exit_s": e.inward_exit_s,
                "outward": e.outward_termination, "outward_exit_s": e.outward_exit_s,
            } for e in self.entries],
            "survivors": self.survivors,
            "inconclusive": self.inconclusive_count,
            "slope": self.slope, "expected_slope": self.expected_slope,
        }


def _probe_start(params, delta, eps, kind):
    roots = indicial_roots(params.n, params.p)
    if delta == 0 or not isinstance(roots[0], complex):
        return singular_start(params, delta, 1, eps, kind)
    return spiral_start(params, abs(delta), 0.0 if delta > 0 else math.pi, eps, kind)


def uniqueness_probe(params: Params, delta_grid: Sequence[float], eps: float = 1e-2,
                     options: IntegrationOptions | None = None,
                     kind=EquationKind.FORWARD, inner_depth: float = 40.0,
                     r_outer: float = 10.0, band: float = 0.5) -> ProbeReport:
    """Perturb U_* at r = eps along its slowest indicial mode and follow the
    scaled profile both inward and outward while |v - L| < band * L.

    The inward exit distance log(eps / r_exit) should grow like
    |log delta| / |mu_1| for real indicial roots.
    """
    if not (params.n > 2 and params.beta > 0):
        raise ValueError("uniqueness probe needs p > p_S")
    kind = _kind(kind)
    base = options or IntegrationOptions()
    L = params.L
    lo, hi = (1.0 - band) * L, (1.0 + band) * L
    inward = replace(base, r_end=eps * math.exp(-inner_depth), value_floor=lo,
                     value_ceiling=hi, turn_below=None)
    outward = replace(base, r_end=r_outer, value_floor=lo, value_ceiling=hi,
                      turn_below=None)
    entries = []
    for delta in delta_grid:
        start = _probe_start(params, float(delta), eps, kind)
        res = []
        for opts in (inward, outward):
            try:
                tr = integrate(kind, Frame.SCALED_V, params, start, opts)
                ev = tr.meta.event_coord
                res.append((tr.meta.termination, math.log(ev) if ev is not None else None))
            except IntegrationError:
                res.append(("error", None))
        entries.append(ProbeEntry(float(delta), res[0][0], res[0][1], res[1][0], res[1][1]))

    xs, ys = [], []
    for e in entries:
        if e.delta != 0 and e.inward_exit_s is not None:
            xs.append(abs(math.log(abs(e.delta))))
            ys.append(math.log(eps) - e.inward_exit_s)
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(set(xs)) >= 2 else None
    mu1 = indicial_roots(params.n, params.p)[0]
    expected = 1.0 / abs(mu1.real if isinstance(mu1, complex) else mu1)
    return ProbeReport(params.n, params.p, eps, band, tuple(entries), slope, expected)
