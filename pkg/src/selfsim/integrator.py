"""Adaptive integration of the profile equations, series starts at r = 0,
and the energy/Pohozaev bookkeeping along computed trajectories.

Internally every equation is integrated in s = log r for the state
(y, r y'); the singular 1/r terms then become constant coefficients.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import DOP853, OdeSolution
from scipy.optimize import brentq

from .exponents import Params, indicial_roots
from .ode_core import (EquationKind, Frame, ProfileState, Trajectory,
                       TrajectoryMeta, _frame, _kind, log_system)

TERMINATIONS = ("span_end", "value_floor", "value_ceiling", "turn", "max_steps",
                "step_underflow", "nonfinite")


@dataclass(frozen=True)
class IntegrationOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    r_end: float = 10.0
    max_steps: int = 100_000
    value_floor: float | None = 0.0
    value_ceiling: float | None = 1e8
    turn_below: float | None = None
    samples_per_unit: int = 64

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            tol = getattr(self, name)
            if not (1e-14 < tol < 1e-2):
                raise ValueError(f"{name}={tol!r} outside (1e-14, 1e-2)")
        if not self.r_end > 0:
            raise ValueError("r_end must be positive")
        if self.max_steps < 1 or self.samples_per_unit < 2:
            raise ValueError("max_steps >= 1 and samples_per_unit >= 2 required")

    def halved(self) -> "IntegrationOptions":
        from dataclasses import replace
        return replace(self, rel_tol=self.rel_tol / 2, abs_tol=self.abs_tol / 2)

    def as_dict(self) -> dict:
        return asdict(self)


class IntegrationError(RuntimeError):
    pass


def _locate(sol_step, idx: int, level: float, t0: float, t1: float, xtol: float) -> float:
    def g(t):
        return float(sol_step(t)[idx]) - level
    return brentq(g, t0, t1, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)


def integrate(kind, frame, params: Params, initial: ProfileState,
              options: IntegrationOptions | None = None) -> Trajectory:
    """Integrate from ``initial`` towards ``options.r_end`` (either direction).

    Stops at the end of the span, when the frame value crosses
    ``value_floor`` or ``value_ceiling``, or when the step budget is
    exhausted.  With ``turn_below`` set it also stops where the slope turns
    from negative to positive at a value below that level.  The reason is
    stored in ``meta.termination``, the located event coordinate in
    ``meta.event_coord``.  Samples are log-spaced.
    """
    opts = options or IntegrationOptions()
    kind, frame = _kind(kind), _frame(frame)
    if initial.frame is not frame or initial.kind is not kind:
        raise ValueError("initial state must match the requested frame and kind")
    if initial.params != params:
        raise ValueError("initial state carries different params")
    f = log_system(kind, frame, params)

    if frame.radial:
        s0 = math.log(initial.coord)
        q0 = initial.coord * initial.slope
    else:
        s0 = initial.coord
        q0 = initial.slope
    s_end = math.log(opts.r_end)
    if s_end == s0:
        raise ValueError("empty integration span")
    direction = 1.0 if s_end > s0 else -1.0

    # near r = 0 the slope variable q = r y' is O(r^2); scale its absolute
    # tolerance to the starting size so relative accuracy is kept there
    atol_q = min(opts.abs_tol, opts.rel_tol * abs(q0)) if q0 != 0 else opts.abs_tol
    atol_y = min(opts.abs_tol, opts.rel_tol * abs(initial.value)) if initial.value != 0 else opts.abs_tol
    # but not below what rounding in the forcing r^2 G allows
    g_scale = abs(initial.value) * (initial.radius ** 2 if frame is Frame.PHYSICAL_W else 1.0)
    atol_q = max(atol_q, 4.0 * np.finfo(float).eps * g_scale)
    solver = DOP853(f, s0, np.array([initial.value, q0]), s_end,
                    rtol=opts.rel_tol, atol=[max(atol_y, 1e-300), max(atol_q, 1e-300)])
    ts = [s0]
    interps = []
    termination = "span_end"
    event_s = None
    floor, ceil = opts.value_floor, opts.value_ceiling
    turn_below = opts.turn_below
    xtol = max(1e-15, 1e-3 * opts.rel_tol)
    steps = 0
    while True:
        if solver.status == "finished":
            break
        if steps >= opts.max_steps:
            termination = "max_steps"
            break
        t_prev, y_prev = solver.t, solver.y.copy()
        msg = solver.step()
        steps += 1
        if solver.status == "failed":
            termination = "step_underflow" if "step size" in str(msg) else "nonfinite"
            break
        if not np.all(np.isfinite(solver.y)):
            termination = "nonfinite"
            break
        dense = solver.dense_output()
        t_new = solver.t
        hit = None
        probe_s = np.linspace(t_prev, t_new, 9)
        probe_y = dense(probe_s)[0]
        probe_y[0], probe_y[-1] = y_prev[0], solver.y[0]
        for level, name in ((floor, "value_floor"), (ceil, "value_ceiling")):
            if level is None:
                continue
            g = probe_y - level
            if g[0] == 0:
                continue
            flips = np.nonzero(np.sign(g[1:]) != np.sign(g[0]))[0]
            if flips.size == 0:
                continue
            i = flips[0] + 1
            tc = probe_s[i] if g[i] == 0 else _locate(dense, 0, level, probe_s[i - 1], probe_s[i], xtol)
            if hit is None or (tc - hit[0]) * direction < 0:
                hit = (tc, name)
        if turn_below is not None:
            # slope turning from negative to positive below the given level
            probe_q = dense(probe_s)[1]
            probe_q[0], probe_q[-1] = y_prev[1], solver.y[1]
            if direction < 0:
                probe_q = -probe_q
            up = np.nonzero((probe_q[:-1] < 0) & (probe_q[1:] >= 0))[0]
            if up.size:
                i = up[0] + 1
                tc = probe_s[i] if probe_q[i] == 0 else _locate(dense, 1, 0.0, probe_s[i - 1], probe_s[i], xtol)
                if float(dense(tc)[0]) < turn_below and (hit is None or (tc - hit[0]) * direction < 0):
                    hit = (tc, "turn")
        interps.append(dense)
        if hit is not None:
            event_s, termination = hit
            ts.append(event_s)
            break
        ts.append(t_new)

    s_last = ts[-1]
    if len(interps) == 0:
        raise IntegrationError(f"integration made no progress ({termination})")
    sol = OdeSolution(np.array(ts), interps)

    # log-spaced samples (uniform in s), last sample exactly at the stop point
    m = max(2, int(math.ceil(abs(s_last - s0) * opts.samples_per_unit)) + 1)
    s_grid = np.linspace(s0, s_last, m)
    Y = sol(s_grid)
    Y[:, 0] = (initial.value, q0)

    def dense_frame(x, _sol=sol, _radial=frame.radial):
        x = np.asarray(x, dtype=float)
        s = np.log(x) if _radial else x
        Yd = _sol(s)
        if _radial:
            return Yd[0], Yd[1] / np.exp(s)
        return Yd[0], Yd[1]

    if frame.radial:
        coord = np.exp(s_grid)
        coord[0] = initial.coord
        if termination == "span_end":
            coord[-1] = opts.r_end
        slope = Y[1] / coord
        slope[0] = initial.slope
        event_coord = math.exp(event_s) if event_s is not None else None
    else:
        coord = s_grid
        slope = Y[1]
        event_coord = event_s
    meta = TrajectoryMeta(kind, frame, params,
                          {**opts.as_dict(), "r_start": initial.radius, "steps": steps},
                          termination, event_coord)
    return Trajectory(coord, Y[0], slope, meta, dense_frame)


# ---------------------------------------------------------------------------
# starts

def series_coefficients(kind, params: Params, a: float) -> tuple[float, float]:
    """(c, d) with w = a + c r^2 + d r^4 + ... for the profile regular at 0."""
    kind = _kind(kind)
    n, p = params.n, params.p
    sig = kind.sigma
    if kind is EquationKind.BACKWARD:
        g0 = a * ((a / params.kappa) ** (p - 1.0) - 1.0) / (p - 1.0)
    else:
        g0 = sig * a / (p - 1.0) + a ** p
    g1 = sig / (p - 1.0) + p * a ** (p - 1.0)
    c = -g0 / (2.0 * n)
    d = -c * (sig + g1) / (4.0 * (n + 2.0))
    return c, d


def series_start(kind, params: Params, a: float, eps: float = 1e-4,
                 rel_tol: float = 1e-10) -> ProfileState:
    """Second-order start w(eps) = a + c eps^2 for the profile with w(0) = a.

    eps is halved until the neglected r^4 term is below rel_tol relative to
    the retained terms (value and slope).
    """
    if not a > 0:
        raise ValueError(f"center value must be positive, got {a!r}")
    kind = _kind(kind)
    c, d = series_coefficients(kind, params, a)
    for _ in range(200):
        val_err = abs(d) * eps ** 4
        slope_err = 4.0 * abs(d) * eps ** 3
        ok_val = val_err <= rel_tol * a
        ok_slope = c == 0 or slope_err <= rel_tol * abs(2.0 * c * eps)
        if ok_val and ok_slope:
            break
        eps /= 2.0
    return ProfileState(eps, a + c * eps * eps, 2.0 * c * eps,
                        Frame.PHYSICAL_W, kind, params)


class ComplexRootError(ValueError):
    pass


def singular_start(params: Params, delta: float, root_index: int = 1,
                   eps: float = 1e-2, kind=EquationKind.FORWARD) -> ProfileState:
    """U_* perturbed along one real indicial mode, in the ScaledV frame.

    v(eps) = L + delta and v'(eps) = mu * delta / eps, i.e. the local mode
    v - L = delta (r/eps)^mu.
    """
    L = params.L
    if delta == 0:
        return ProfileState(eps, L, 0.0, Frame.SCALED_V, kind, params)
    if root_index not in (1, 2):
        raise ValueError("root_index must be 1 or 2")
    roots = indicial_roots(params.n, params.p)
    mu = roots[root_index - 1]
    if isinstance(mu, complex):
        raise ComplexRootError(
            "indicial roots are complex for this p; use spiral_start")
    return ProfileState(eps, L + delta, mu * delta / eps, Frame.SCALED_V, kind, params)


def spiral_start(params: Params, amplitude: float, phase: float = 0.0,
                 eps: float = 1e-2, kind=EquationKind.FORWARD) -> ProfileState:
    """Start on the oscillatory mode A (r/eps)^lam cos(omega log(r/eps) + phase)."""
    L = params.L
    roots = indicial_roots(params.n, params.p)
    mu = roots[0]
    if not isinstance(mu, complex):
        raise ValueError("indicial roots are real; use singular_start")
    lam, om = mu.real, abs(mu.imag)
    u = amplitude * math.cos(phase)
    du = amplitude * (lam * math.cos(phase) - om * math.sin(phase)) / eps
    return ProfileState(eps, L + u, du, Frame.SCALED_V, kind, params)


# ---------------------------------------------------------------------------
# quadrature along trajectories

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _cumulative(fn, grid: np.ndarray, pieces: int) -> np.ndarray:
    """Cumulative integral of fn over grid, composite Gauss-Legendre."""
    a, b = grid[:-1], grid[1:]
    sub = np.linspace(0.0, 1.0, pieces + 1)
    total = np.zeros(a.size)
    for j in range(pieces):
        lo = a + (b - a) * sub[j]
        hi = a + (b - a) * sub[j + 1]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
        vals = fn(nodes.ravel()).reshape(nodes.shape)
        total += half * (vals @ _GL_W)
    return np.concatenate([[0.0], np.cumsum(total)])


def cumulative_quad(fn, grid: np.ndarray, rtol: float = 1e-8, max_pieces: int = 64):
    """Refine the composite rule until successive results agree to rtol."""
    pieces = 1
    prev = _cumulative(fn, grid, pieces)
    while pieces < max_pieces:
        pieces *= 2
        cur = _cumulative(fn, grid, pieces)
        scale = max(np.max(np.abs(cur)), 1e-300)
        if np.max(np.abs(cur - prev)) <= rtol * scale:
            return cur
        prev = cur
    return prev


# ---------------------------------------------------------------------------
# energy ledger

@dataclass(frozen=True, eq=False)
class EnergyLedger:
    """c(r) and the cumulative integrals along a NormalizedH trajectory.

    The identity checked is c(r) - c(r0) = -beta J(r) - sigma I(r)/2 with
    I = int h'^2 rho^3 and J = int h'^2 rho; at p = p_S beta vanishes and it
    reduces to the classical c(R) - c(rho) = -/+ (1/2) int h'^2 r^3.
    """
    r: np.ndarray
    c: np.ndarray
    I: np.ndarray
    J: np.ndarray
    residuals: np.ndarray
    direction: str
    beta: float
    sigma: int

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.residuals)))

    @property
    def scale(self) -> float:
        dc = np.max(np.abs(self.c - self.c[0]))
        return float(max(dc, 0.5 * np.max(np.abs(self.I)),
                         abs(self.beta) * np.max(np.abs(self.J)), 1e-300))

    @property
    def relative_residual(self) -> float:
        return self.residual / self.scale

    @property
    def corrected(self) -> np.ndarray:
        """c + beta J, monotone in the direction given by the kind."""
        return self.c + self.beta * self.J

    def monotonicity_violation(self, quantity: str = "c") -> float:
        """Largest step against the expected monotonicity (0 if none)."""
        vals = self.c if quantity == "c" else self.corrected
        steps = np.diff(vals) * np.sign(np.diff(self.r))
        if self.sigma > 0:
            return float(max(0.0, np.max(steps)))
        return float(max(0.0, -np.min(steps)))


def energy_ledger(traj: Trajectory, rtol: float = 1e-8) -> EnergyLedger:
    if traj.frame is not Frame.NORMALIZED_H:
        raise ValueError(f"energy ledger needs a NormalizedH trajectory, got {traj.frame.value}")
    kind = traj.kind
    if kind not in (EquationKind.FORWARD, EquationKind.BACKWARD):
        raise ValueError("energy ledger is defined for forward and backward profiles")
    prm = traj.params
    r = traj.radius
    s = np.log(r)
    h, dh = traj.value, traj.slope
    gam, p = prm.gamma, prm.p
    c = 0.5 * (r * dh) ** 2 + gam * (np.abs(h) ** (p + 1.0) / (p + 1.0) - 0.5 * h * h)

    def q2(x):
        val, slp = traj.evaluate(np.exp(x))
        return (np.exp(x) * slp) ** 2

    # I = int q^2 r^2 ds, J = int q^2 ds with q = r h'
    I = cumulative_quad(lambda x: q2(x) * np.exp(2 * x), s, rtol)
    J = cumulative_quad(q2, s, rtol)
    sig = kind.sigma
    res = c - c[0] + prm.beta * J + 0.5 * sig * I
    return EnergyLedger(r, c, I, J, res,
                        "forward-kind" if sig > 0 else "backward-kind", prm.beta, sig)


# ---------------------------------------------------------------------------
# Pohozaev-type identity for the scaled profile

@dataclass(frozen=True)
class PohozaevResult:
    residual: float
    scale: float
    boundary_kinetic: float
    dissipation: float
    cubic: float
    boundary_potential: float
    int_v_prime_sq_r: float

    @property
    def relative_residual(self) -> float:
        return abs(self.residual) / max(self.scale, 1e-300)


def pohozaev_check(traj: Trajectory, rho: float, R: float, rtol: float = 1e-8) -> PohozaevResult:
    """Left side of the identity obtained by multiplying the v-equation by v' r^2.

        [r^2 v'^2/2] + beta int v'^2 r + (sigma/2) int v'^2 r^3 + [a(v)] = 0

    on [rho, R]; sigma = +1 forward, -1 backward (the r^3 term changes sign
    with the drift r v'/2), 0 steady.
    """
    if traj.frame is not Frame.SCALED_V:
        raise ValueError("pohozaev_check needs a ScaledV trajectory")
    r = traj.radius
    lo, hi = min(r[0], r[-1]), max(r[0], r[-1])
    if not (lo <= rho < R <= hi):
        raise ValueError(f"[{rho}, {R}] not inside trajectory span [{lo}, {hi}]")
    prm = traj.params
    sig = traj.kind.sigma
    inside = (r > rho) & (r < R)
    grid = np.concatenate([[rho], np.sort(r[inside]), [R]])
    s = np.log(grid)

    def q2(x):
        _, slp = traj.evaluate(np.exp(x))
        return (np.exp(x) * slp) ** 2

    J = cumulative_quad(q2, s, rtol)[-1]
    K = cumulative_quad(lambda x: q2(x) * np.exp(2 * x), s, rtol)[-1]
    (v_rho, v_R), (dv_rho, dv_R) = traj.evaluate(np.array([rho, R]))
    kin = 0.5 * (R * dv_R) ** 2 - 0.5 * (rho * dv_rho) ** 2
    pot_R = v_R ** (prm.p + 1) / (prm.p + 1) - 0.5 * prm.gamma * v_R ** 2
    pot_rho = v_rho ** (prm.p + 1) / (prm.p + 1) - 0.5 * prm.gamma * v_rho ** 2
    pot = pot_R - pot_rho
    diss = prm.beta * J
    cub = 0.5 * sig * K
    total = kin + diss + cub + pot
    scale = max(abs(kin), abs(diss), abs(cub), abs(pot))
    return PohozaevResult(float(total), float(scale), float(kin), float(diss),
                          float(cub), float(pot), float(J))
