"""Profile equations, frames and exact special solutions.

Every equation handled here has the radial form

    y'' + (k/r + sigma*r/2) y' + G(r, y) = 0,

with sigma = +1 for forward profiles, -1 for backward profiles and 0 for
steady states.  The frame fixes the unknown: the profile w itself, the
scaled profile v = r^alpha w, its normalisation h = v/L, or v as a function
of s = log r (steady states only).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np

from .exponents import LUndefinedError, Params


class EquationKind(str, Enum):
    FORWARD = "ForwardProfile"
    BACKWARD = "BackwardProfile"
    STEADY = "Steady"

    @property
    def sigma(self) -> int:
        return {"ForwardProfile": 1, "BackwardProfile": -1, "Steady": 0}[self.value]


class Frame(str, Enum):
    PHYSICAL_W = "PhysicalW"
    SCALED_V = "ScaledV"
    NORMALIZED_H = "NormalizedH"
    LOG_PHASE = "LogPhase"

    @property
    def radial(self) -> bool:
        return self is not Frame.LOG_PHASE


class UnsupportedCombination(ValueError):
    pass


class DomainError(ValueError):
    """Non-integer power of a negative value."""


def _kind(x) -> EquationKind:
    return x if isinstance(x, EquationKind) else EquationKind(x)


def _frame(x) -> Frame:
    return x if isinstance(x, Frame) else Frame(x)


def positive_power(y, p: float):
    """y**p, refusing negative bases unless p is an integer."""
    y_arr = np.asarray(y, dtype=float)
    if float(p).is_integer():
        return y_arr ** p if y_arr.ndim else float(y_arr) ** p
    if np.any(y_arr < 0):
        raise DomainError(f"negative base for non-integer power p={p}")
    return y_arr ** p if y_arr.ndim else float(y_arr) ** p


@dataclass(frozen=True)
class ProfileState:
    coord: float
    value: float
    slope: float
    frame: Frame
    kind: EquationKind
    params: Params

    def __post_init__(self):
        object.__setattr__(self, "frame", _frame(self.frame))
        object.__setattr__(self, "kind", _kind(self.kind))
        if self.frame.radial and not self.coord > 0:
            raise ValueError(f"radial coordinate must be positive, got {self.coord!r}")
        if not (math.isfinite(self.coord) and math.isfinite(self.value)
                and math.isfinite(self.slope)):
            raise ValueError("state has non-finite entries")

    @property
    def radius(self) -> float:
        return self.coord if self.frame.radial else math.exp(self.coord)


# ---------------------------------------------------------------------------
# equation coefficients

def damping_coefficient(frame: Frame, params: Params) -> float:
    """k in the k/r first-order term."""
    if _frame(frame) is Frame.PHYSICAL_W:
        return params.n - 1.0
    return params.n - 1.0 - 2.0 * params.alpha


def forcing(kind: EquationKind, frame: Frame, params: Params, r, y, *, odd_extension=False):
    """r^2 * G(r, y), the zeroth-order part multiplied by r^2.

    With ``odd_extension`` the power y^p is replaced by |y|^(p-1) y, which is
    only used by the integrator to evaluate trial stages past a zero.
    """
    kind, frame = _kind(kind), _frame(frame)
    p = params.p
    if odd_extension:
        yp = np.abs(y) ** (p - 1.0) * y
    else:
        yp = positive_power(y, p)
    if frame is Frame.PHYSICAL_W:
        if kind is EquationKind.BACKWARD:
            # y^p - y/(p-1) written to vanish exactly at y = kappa
            scaled = np.abs(y / params.kappa) ** (p - 1.0) if odd_extension \
                else positive_power(y / params.kappa, p - 1.0)
            return r * r * y * (scaled - 1.0) / (p - 1.0)
        return r * r * (kind.sigma * y / (p - 1.0) + yp)
    g = params.gamma
    if frame is Frame.NORMALIZED_H:
        return g * (yp - y)
    # ScaledV / LogPhase: v^p - gamma v; the form gamma v ((v/L)^(p-1) - 1)
    # vanishes exactly at v = L
    if params.has_L and not odd_extension:
        L = params.L
        return g * y * ((y / L) ** (p - 1.0) - 1.0) if np.all(np.asarray(y) >= 0) else yp - g * y
    if params.has_L:
        L = params.L
        return g * y * (np.abs(y / L) ** (p - 1.0) - 1.0)
    return yp - g * y


def _check_combination(kind: EquationKind, frame: Frame, params: Params):
    if frame is Frame.LOG_PHASE and kind is not EquationKind.STEADY:
        raise UnsupportedCombination(
            f"LogPhase is autonomous only for Steady, not {kind.value}")
    if frame is Frame.NORMALIZED_H and not params.has_L:
        raise LUndefinedError("NormalizedH frame needs p > p_sg")


def rhs(state: ProfileState) -> tuple[float, float]:
    """Derivative (value', slope') of the first-order system for the state.

    For radial frames the derivative is with respect to r; for LogPhase it
    is with respect to s = log r.
    """
    kind, frame, prm = state.kind, state.frame, state.params
    _check_combination(kind, frame, prm)
    y, yp = state.value, state.slope
    if frame is Frame.LOG_PHASE:
        return yp, -prm.beta * yp - forcing(kind, frame, prm, 1.0, y)
    r = state.coord
    k = damping_coefficient(frame, prm)
    ypp = -(k / r + kind.sigma * r / 2.0) * yp - forcing(kind, frame, prm, r, y) / (r * r)
    return yp, float(ypp)


def rhs_array(kind, frame, params: Params, coord, value, slope):
    """Vectorised :func:`rhs` over arrays of states."""
    kind, frame = _kind(kind), _frame(frame)
    _check_combination(kind, frame, params)
    coord, value, slope = (np.asarray(x, dtype=float) for x in (coord, value, slope))
    if frame is Frame.LOG_PHASE:
        return slope, -params.beta * slope - forcing(kind, frame, params, 1.0, value)
    r = coord
    k = damping_coefficient(frame, params)
    ypp = -(k / r + kind.sigma * r / 2.0) * slope - forcing(kind, frame, params, r, value) / (r * r)
    return slope, ypp


def log_system(kind, frame, params: Params) -> Callable:
    """Right-hand side in s = log r for the state (y, q) with q = r y'.

    dq/ds = (1-k) q - sigma r^2 q / 2 - r^2 G(r, y).  Used internally by the
    integrator; stages past a zero use the odd extension of y^p.
    """
    kind, frame = _kind(kind), _frame(frame)
    _check_combination(kind, frame, params)
    k = damping_coefficient(frame, params)
    one_minus_k = 1.0 - k
    half_sigma = kind.sigma / 2.0
    p = params.p
    pm1 = p - 1.0
    g = params.gamma
    steady_like = frame is Frame.LOG_PHASE

    if frame is Frame.PHYSICAL_W and kind is EquationKind.BACKWARD:
        inv_kappa = 1.0 / params.kappa
        inv_pm1 = 1.0 / pm1

        def zeroth(r2, y):
            return r2 * y * (abs(y * inv_kappa) ** pm1 - 1.0) * inv_pm1
    elif frame is Frame.PHYSICAL_W:
        c0 = kind.sigma / pm1

        def zeroth(r2, y):
            return r2 * (c0 * y + abs(y) ** pm1 * y)
    elif frame is Frame.NORMALIZED_H:
        def zeroth(r2, y):
            return g * y * (abs(y) ** pm1 - 1.0)
    elif params.has_L:
        inv_L = 1.0 / params.L

        def zeroth(r2, y):
            return g * y * (abs(y * inv_L) ** pm1 - 1.0)
    else:
        def zeroth(r2, y):
            return abs(y) ** pm1 * y - g * y

    def f(s, Y):
        y, q = Y[0], Y[1]
        if steady_like:
            r2 = 1.0
            damp = 0.0
        else:
            r2 = math.exp(2.0 * s)
            damp = half_sigma * r2 * q
        return np.array([q, one_minus_k * q - damp - zeroth(r2, y)])

    return f


# ---------------------------------------------------------------------------
# frame transformations (vectorised; scalars and arrays both accepted)

def _to_w(frame: Frame, params: Params, coord, value, slope):
    if frame is Frame.PHYSICAL_W:
        return coord, value, slope
    if frame is Frame.LOG_PHASE:
        r = np.exp(coord)
        v, dv = value, slope / r
    elif frame is Frame.NORMALIZED_H:
        L = params.L
        r, v, dv = coord, L * value, L * slope
    else:
        r, v, dv = coord, value, slope
    a = params.alpha
    ra = r ** (-a)
    return r, ra * v, ra * (dv - a * v / r)


def _from_w(frame: Frame, params: Params, r, w, dw):
    if frame is Frame.PHYSICAL_W:
        return r, w, dw
    a = params.alpha
    ra = r ** a
    v = ra * w
    dv = a * r ** (a - 1.0) * w + ra * dw
    if frame is Frame.SCALED_V:
        return r, v, dv
    if frame is Frame.NORMALIZED_H:
        L = params.L
        return r, v / L, dv / L
    return np.log(r), v, r * dv


def _direct(src: Frame, dst: Frame, params: Params, coord, value, slope):
    # shortcuts between the scaled frames keep round-trips exact
    scaled = {Frame.SCALED_V, Frame.NORMALIZED_H, Frame.LOG_PHASE}
    if src in scaled and dst in scaled:
        if src is Frame.LOG_PHASE:
            r = np.exp(coord)
            coord, slope = r, slope / r
        elif src is Frame.NORMALIZED_H:
            L = params.L
            value, slope = value * L, slope * L
        # now ScaledV
        if dst is Frame.SCALED_V:
            return coord, value, slope
        if dst is Frame.NORMALIZED_H:
            L = params.L
            return coord, value / L, slope / L
        return np.log(coord), value, coord * slope
    r, w, dw = _to_w(src, params, coord, value, slope)
    return _from_w(dst, params, r, w, dw)


def transform_arrays(src, dst, params: Params, coord, value, slope):
    src, dst = _frame(src), _frame(dst)
    if Frame.NORMALIZED_H in (src, dst) and not params.has_L:
        raise LUndefinedError("NormalizedH frame needs p > p_sg")
    if src is dst:
        return coord, value, slope
    return _direct(src, dst, params, coord, value, slope)


def transform_state(state: ProfileState, target_frame) -> ProfileState:
    target = _frame(target_frame)
    c, v, s = transform_arrays(state.frame, target, state.params,
                               state.coord, state.value, state.slope)
    return ProfileState(float(c), float(v), float(s), target, state.kind, state.params)


# ---------------------------------------------------------------------------
# exact solutions and scalar functions

def u_star(params: Params, r):
    """Singular steady state U_*(r) = L r^(-alpha) and its derivative."""
    L, a = params.L, params.alpha
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("u_star needs r > 0")
    u = L * r ** (-a)
    du = -a * L * r ** (-a - 1.0)
    if u.ndim == 0:
        return float(u), float(du)
    return u, du


def d_fn(params: Params, xi):
    return params.alpha ** 2 * (positive_power(xi, params.p) - xi)


def b_fn(params: Params, xi):
    p = params.p
    return params.alpha ** 2 * (positive_power(xi, p + 1.0) / (p + 1.0) - 0.5 * np.square(xi))


def a_fn(params: Params, xi):
    p = params.p
    return positive_power(xi, p + 1.0) / (p + 1.0) - 0.5 * params.gamma * np.square(xi)


def f_remainder(params: Params, u):
    """Quadratic remainder (L+u)^p - L^p - p L^(p-1) u of the expansion at L."""
    p, L = params.p, params.L
    base = L + np.asarray(u, dtype=float)
    if np.any(base <= 0) and not float(p).is_integer():
        raise DomainError("f_remainder needs L + u > 0")
    out = positive_power(base, p) - L ** p - p * L ** (p - 1.0) * np.asarray(u)
    return float(out) if np.ndim(out) == 0 else out


def f_remainder_literal(params: Params, v):
    """Alternative reading with the full profile v = L + u inside the remainder.

    Kept for comparison only: it does not vanish at v = L, so it cannot be the
    O(u^2) term of the expansion around U_*.
    """
    p, L = params.p, params.L
    v = np.asarray(v, dtype=float)
    out = positive_power(L + v, p) - L ** p - p * L ** (p - 1.0) * v
    return float(out) if np.ndim(out) == 0 else out


class ScalarKit(NamedTuple):
    d: float
    b: float
    a: float
    f: float | None


def scalar_kit(params: Params, xi) -> ScalarKit:
    """d(xi), b(xi), a(xi) and the remainder f evaluated at u = xi."""
    if np.any(np.asarray(xi) < 0):
        raise DomainError("scalar functions are defined for xi >= 0")
    f = f_remainder(params, xi) if params.has_L else None
    return ScalarKit(d_fn(params, xi), b_fn(params, xi), a_fn(params, xi), f)


# ---------------------------------------------------------------------------
# trajectories

@dataclass(frozen=True)
class TrajectoryMeta:
    kind: EquationKind
    frame: Frame
    params: Params
    options: dict = field(default_factory=dict)
    termination: str = "span_end"
    event_coord: float | None = None

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "frame": self.frame.value,
            "params": {"n": self.params.n, "p": self.params.p},
            "options": dict(self.options),
            "termination": self.termination,
            "event_coord": self.event_coord,
        }


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution with monotone coordinate; arrays are read-only.

    ``dense`` optionally maps coordinates to (value, slope) between samples.
    """
    coord: np.ndarray
    value: np.ndarray
    slope: np.ndarray
    meta: TrajectoryMeta
    dense: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        arrs = []
        for name in ("coord", "value", "slope"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
            arrs.append(a)
        if not (arrs[0].shape == arrs[1].shape == arrs[2].shape) or arrs[0].ndim != 1:
            raise ValueError("coord/value/slope must be 1-d arrays of equal length")
        if arrs[0].size > 1:
            d = np.diff(arrs[0])
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValueError("trajectory coordinate must be strictly monotone")

    def __len__(self):
        return self.coord.size

    @property
    def kind(self) -> EquationKind:
        return self.meta.kind

    @property
    def frame(self) -> Frame:
        return self.meta.frame

    @property
    def params(self) -> Params:
        return self.meta.params

    @property
    def radius(self) -> np.ndarray:
        return self.coord if self.frame.radial else np.exp(self.coord)

    @property
    def samples(self) -> list[ProfileState]:
        return [ProfileState(c, v, s, self.frame, self.kind, self.params)
                for c, v, s in zip(self.coord.tolist(), self.value.tolist(),
                                   self.slope.tolist())]

    def state(self, i: int) -> ProfileState:
        return ProfileState(float(self.coord[i]), float(self.value[i]),
                            float(self.slope[i]), self.frame, self.kind, self.params)

    def evaluate(self, coord):
        """(value, slope) at arbitrary coordinates inside the span."""
        coord = np.asarray(coord, dtype=float)
        if self.dense is not None:
            return self.dense(coord)
        from scipy.interpolate import CubicHermiteSpline
        c, v, s = self.coord, self.value, self.slope
        if c[0] > c[-1]:
            c, v, s = c[::-1], v[::-1], s[::-1]
        spl = CubicHermiteSpline(c, v, s)
        return spl(coord), spl.derivative()(coord)

    def with_meta(self, **changes) -> "Trajectory":
        from dataclasses import replace
        return Trajectory(self.coord, self.value, self.slope,
                          replace(self.meta, **changes), self.dense)


def transform_trajectory(traj: Trajectory, target_frame) -> Trajectory:
    target = _frame(target_frame)
    src, prm = traj.frame, traj.params
    c, v, s = transform_arrays(src, target, prm, traj.coord, traj.value, traj.slope)
    dense = None
    if traj.dense is not None:
        inner = traj.dense

        def dense(x, _inner=inner):
            x = np.asarray(x, dtype=float)
            # map target coordinate back to source coordinate
            if src.radial == target.radial:
                xs = x
            elif target is Frame.LOG_PHASE:
                xs = np.exp(x)
            else:
                xs = np.log(x)
            val, slp = _inner(xs)
            _, tv, ts = transform_arrays(src, target, prm, xs, val, slp)
            return tv, ts
    from dataclasses import replace
    return Trajectory(c, v, s, replace(traj.meta, frame=target), dense)


def scale_steady(traj: Trajectory, a: float) -> Trajectory:
    """Member U_a(r) = a U_1(a^((p-1)/2) r) of the steady scaling family."""
    if traj.kind is not EquationKind.STEADY:
        raise ValueError("scaling invariance holds for the steady equation only")
    prm = traj.params
    lam = a ** (1.0 / prm.alpha)
    frame = traj.frame
    if frame is Frame.PHYSICAL_W:
        vfac, sfac = a, a * lam
    else:
        vfac, sfac = 1.0, lam
    if frame is Frame.LOG_PHASE:
        shift = math.log(lam)
        coord = traj.coord - shift
        sfac = 1.0
    else:
        coord = traj.coord / lam
    dense = None
    if traj.dense is not None:
        inner = traj.dense

        def dense(x, _inner=inner):
            x = np.asarray(x, dtype=float)
            xs = x + math.log(lam) if frame is Frame.LOG_PHASE else x * lam
            val, slp = _inner(xs)
            return vfac * val, sfac * slp
    return Trajectory(coord, vfac * traj.value, sfac * traj.slope, traj.meta, dense)


def analytic_trajectory(params: Params, r, kind=EquationKind.STEADY,
                        frame=Frame.PHYSICAL_W, which: str = "u_star") -> Trajectory:
    """Sample U_* (which='u_star') or the constant kappa (which='kappa')."""
    r = np.asarray(r, dtype=float)
    if which == "u_star":
        w, dw = u_star(params, r)

        def dense_w(x):
            return u_star(params, np.asarray(x, dtype=float))
    elif which == "kappa":
        w = np.full_like(r, params.kappa)
        dw = np.zeros_like(r)

        def dense_w(x):
            x = np.asarray(x, dtype=float)
            return np.full_like(x, params.kappa), np.zeros_like(x)
    else:
        raise ValueError(f"unknown analytic solution {which!r}")
    meta = TrajectoryMeta(_kind(kind), Frame.PHYSICAL_W, params,
                          {"analytic": which}, "analytic")
    traj = Trajectory(r, w, dw, meta, dense_w)
    return transform_trajectory(traj, frame) if _frame(frame) is not Frame.PHYSICAL_W else traj


# ---------------------------------------------------------------------------
# residuals

def _fd_weights(x: np.ndarray, x0: float) -> np.ndarray:
    """First-derivative weights at x0 for the stencil x (Fornberg/Vandermonde)."""
    m = x.size
    h = x - x0
    scale = np.max(np.abs(h)) or 1.0
    hs = h / scale
    V = np.vander(hs, m, increasing=True).T
    rhs_ = np.zeros(m)
    rhs_[1] = 1.0
    return np.linalg.solve(V, rhs_) / scale


def derivative_along(x: np.ndarray, y: np.ndarray, width: int = 7) -> np.ndarray:
    """dy/dx by high-order finite differences on a (possibly nonuniform) grid."""
    n = x.size
    width = min(width, n)
    half = width // 2
    out = np.empty(n)
    for i in range(n):
        lo = min(max(i - half, 0), n - width)
        out[i] = _fd_weights(x[lo:lo + width], x[i]) @ y[lo:lo + width]
    return out


class InsufficientSamples(ValueError):
    pass


_C7 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0


def _d_ds_dense(traj: Trajectory, s: np.ndarray, h: float) -> np.ndarray:
    """d(slope)/ds at log-coordinates s from the dense output, central 7-point.

    The step shrinks like 1/r^2 where the Gaussian drift sets the scale.
    """
    if traj.frame is Frame.LOG_PHASE or traj.kind.sigma == 0:
        hs = np.full(s.shape, h)
    else:
        hs = h / np.maximum(1.0, np.exp(2.0 * s) / 2.0)
    grid = s[:, None] + hs[:, None] * np.arange(-3, 4)[None, :]
    x = grid if traj.frame is Frame.LOG_PHASE else np.exp(grid)
    _, slope = traj.dense(x.ravel())
    return (np.asarray(slope).reshape(grid.shape) @ _C7) / hs


def residual_of(traj: Trajectory, h: float = 1e-2) -> float:
    """Max pointwise ODE residual over the samples, scaled by max(1, |value|).

    The second derivative comes from central differences in s = log r of
    the slope: on the dense output when the trajectory has one (step ``h``,
    stencils may reach 3h past the ends), otherwise on the samples.
    """
    if len(traj) < 3:
        raise InsufficientSamples("residual needs at least 3 samples")
    kind, frame, prm = traj.kind, traj.frame, traj.params
    _check_combination(kind, frame, prm)
    y, yp = traj.value, traj.slope
    s = traj.coord if frame is Frame.LOG_PHASE else np.log(traj.coord)
    if traj.dense is not None:
        d_slope = _d_ds_dense(traj, s, h)
    else:
        d_slope = derivative_along(s, yp)
    if frame is Frame.LOG_PHASE:
        res = d_slope + prm.beta * yp + forcing(kind, frame, prm, 1.0, y)
    else:
        r = traj.coord
        # d(y')/ds = r y''
        ypp = d_slope / r
        k = damping_coefficient(frame, prm)
        res = ypp + (k / r + kind.sigma * r / 2.0) * yp + forcing(kind, frame, prm, r, y) / (r * r)
    return float(np.max(np.abs(res) / np.maximum(1.0, np.abs(y))))
