"""Trajectory-level checks: sign changes, intersections, monotonicity,
growth bounds near the origin and the limit of r^alpha w as r -> 0."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.interpolate import PchipInterpolator

from .ode_core import (EquationKind, Frame, Trajectory, rhs_array,
                       transform_trajectory)


@dataclass(frozen=True)
class SignChangeReport:
    count: int
    locations: tuple[float, ...]
    clustered: bool
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {"count": self.count, "locations": list(self.locations),
                "clustered": self.clustered, "degenerate": self.degenerate}


def sign_changes(values, coords=None, dead_band: float = 1e-10,
                 scale: float | None = None) -> SignChangeReport:
    """Count strict sign alternations of sampled values.

    Entries with |value| <= dead_band * max(max|value|, scale) count as zero
    (pass ``scale`` when the values are a difference of larger numbers) and are
    merged into the surrounding interval, so a touch does not register as
    two crossings.  Crossing locations are linearly interpolated between
    the last sample of one sign and the first of the other.
    """
    y = np.asarray(values, dtype=float)
    if y.size < 2:
        raise ValueError("need at least two samples")
    x = np.arange(y.size, dtype=float) if coords is None else np.asarray(coords, dtype=float)
    peak = float(np.max(np.abs(y)))
    if peak == 0.0:
        return SignChangeReport(0, (), False, True)
    thr = dead_band * max(peak, scale or 0.0)
    sgn = np.where(np.abs(y) <= thr, 0, np.sign(y)).astype(int)
    nz = np.nonzero(sgn)[0]
    if nz.size == 0:
        return SignChangeReport(0, (), False, True)
    locs = []
    clustered = False
    for i, j in zip(nz[:-1], nz[1:]):
        if j - i > 1:
            clustered = True
        if sgn[i] != sgn[j]:
            x0, x1, y0, y1 = x[i], x[j], y[i], y[j]
            locs.append(float(x0 - y0 * (x1 - x0) / (y1 - y0)))
    return SignChangeReport(len(locs), tuple(locs), clustered, False)


def _log_grid(t1: Trajectory, t2: Trajectory, s_range, points_per_unit: int):
    def span(t):
        s = np.log(t.radius)
        return min(s[0], s[-1]), max(s[0], s[-1])
    a1, b1 = span(t1)
    a2, b2 = span(t2)
    lo, hi = max(a1, a2), min(b1, b2)
    if s_range is not None:
        lo, hi = max(lo, s_range[0]), min(hi, s_range[1])
    if not hi > lo:
        raise ValueError("trajectories do not overlap")
    m = max(3, int(np.ceil((hi - lo) * points_per_unit)) + 1)
    return np.linspace(lo, hi, m)


def _resample(traj: Trajectory, s: np.ndarray) -> np.ndarray:
    ts = np.log(traj.radius)
    v = traj.value
    if ts[0] > ts[-1]:
        ts, v = ts[::-1], v[::-1]
    return PchipInterpolator(ts, v)(s)


def intersection_count(traj1: Trajectory, traj2: Trajectory, s_range=None,
                       points_per_unit: int = 200, dead_band: float = 1e-10) -> SignChangeReport:
    """Sign changes of value1 - value2 over the common log r span.

    Both trajectories are resampled by monotone (PCHIP) interpolation to a
    shared uniform grid in s = log r; locations are reported in s.
    """
    if traj1.frame is not traj2.frame:
        raise ValueError("trajectories must share a frame")
    s = _log_grid(traj1, traj2, s_range, points_per_unit)
    y1, y2 = _resample(traj1, s), _resample(traj2, s)
    scale = float(max(np.max(np.abs(y1)), np.max(np.abs(y2))))
    return sign_changes(y1 - y2, s, dead_band, scale)


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonotonicityReport:
    max_slope: float
    scale: float
    passed: bool


def monotonicity_report(traj: Trajectory, tol: float = 1e-12) -> MonotonicityReport:
    if traj.frame is not Frame.PHYSICAL_W or traj.kind is not EquationKind.FORWARD:
        raise ValueError("monotonicity check needs a forward profile in PhysicalW")
    scale = float(max(np.max(np.abs(traj.value)), np.finfo(float).tiny))
    m = float(np.max(traj.slope))
    return MonotonicityReport(m, scale, m <= tol * scale)


@dataclass(frozen=True)
class GrowthBound:
    r_min: float
    sup: tuple[float, float, float]
    slope_over_r: float

    def as_dict(self) -> dict:
        return {"r_min": self.r_min, "sup": list(self.sup), "slope_over_r": self.slope_over_r}


def growth_bound_report(traj: Trajectory, alpha: float | None = None,
                        r_min: float | None = None) -> GrowthBound:
    """sup over r in [r_min, 1) of r^(alpha+i) |w^(i)| for i = 0, 1, 2.

    w'' is evaluated from the equation itself, which is exact on solutions.
    Also returns sup |w'|/r on the same range.
    """
    if traj.frame is not Frame.PHYSICAL_W:
        traj = transform_trajectory(traj, Frame.PHYSICAL_W)
    a = traj.params.alpha if alpha is None else alpha
    r = traj.radius
    lo = float(np.min(r)) if r_min is None else r_min
    if np.min(r) > lo * (1 + 1e-12) or lo > 1e-3:
        raise ValueError(f"samples must reach r_min <= 1e-3 (have {np.min(r):.3g})")
    mask = (r >= lo * (1 - 1e-12)) & (r < 1.0)
    rr, w, dw = r[mask], traj.value[mask], traj.slope[mask]
    _, d2w = rhs_array(traj.kind, Frame.PHYSICAL_W, traj.params, rr, w, dw)
    sups = tuple(float(np.max(rr ** (a + i) * np.abs(x))) for i, x in enumerate((w, dw, d2w)))
    return GrowthBound(lo, sups, float(np.max(np.abs(dw) / rr)))


class OriginLimit(str, Enum):
    TENDS_TO_ZERO = "tends-to-0"
    TENDS_TO_L = "tends-to-L"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class OriginLimitReport:
    tag: OriginLimit
    r_min: float
    v_last: float
    max_rv: float
    reason: str = ""


def origin_limit_classify(traj: Trajectory, depth: float = 1e-6,
                          band: float = 0.05, rv_tol: float = 0.01) -> OriginLimitReport:
    """Limit of v = r^alpha w as r -> 0 judged on the deepest decade of samples."""
    if traj.frame is not Frame.SCALED_V:
        traj = transform_trajectory(traj, Frame.SCALED_V)
    L = traj.params.L
    r = traj.radius
    r0 = float(np.min(r))
    if r0 > depth:
        return OriginLimitReport(OriginLimit.UNDETERMINED, r0, float("nan"), float("nan"),
                                 f"insufficient depth (r_min={r0:.3g} > {depth:g})")
    deep = r <= 10.0 * r0
    v = traj.value[deep]
    rv = np.abs(r[deep] * traj.slope[deep])
    v_last = float(traj.value[np.argmin(r)])
    max_rv = float(np.max(rv))
    if max_rv > rv_tol * L:
        tag, why = OriginLimit.UNDETERMINED, "r v' not small in the deepest decade"
    elif np.all(np.abs(v) <= band * L):
        tag, why = OriginLimit.TENDS_TO_ZERO, ""
    elif np.all(np.abs(v - L) <= band * L):
        tag, why = OriginLimit.TENDS_TO_L, ""
    else:
        tag, why = OriginLimit.UNDETERMINED, "v outside both bands"
    return OriginLimitReport(tag, r0, v_last, max_rv, why)
