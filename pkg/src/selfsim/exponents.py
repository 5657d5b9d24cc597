"""Closed-form constants and critical exponents for u_t - Δu = u^p.

Unbounded exponents (e.g. the Joseph-Lundgren exponent for n <= 10) are
represented by ``math.inf``, so every comparison against them is total.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

UNBOUNDED = math.inf

# relative tolerance used to decide p == p_S in classify_regime
_BOUNDARY_RTOL = 1e-12


class LUndefinedError(ValueError):
    """Raised when the singular amplitude L is requested with p <= p_sg."""


@dataclass(frozen=True)
class Params:
    n: float
    p: float

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p!r}")
        if not self.n > 0:
            raise ValueError(f"dimension must be positive, got {self.n!r}")

    @property
    def alpha(self) -> float:
        return 2.0 / (self.p - 1.0)

    @property
    def beta(self) -> float:
        n, p = self.n, self.p
        return ((n - 2.0) * p - (n + 2.0)) / (p - 1.0)

    @property
    def gamma(self) -> float:
        n, p = self.n, self.p
        return 2.0 * ((n - 2.0) * p - n) / (p - 1.0) ** 2

    @property
    def has_L(self) -> bool:
        return self.gamma > 0

    @property
    def L(self) -> float:
        """Amplitude of the singular steady state L r^(-alpha)."""
        g = self.gamma
        if not g > 0:
            raise LUndefinedError(
                f"L is undefined for n={self.n}, p={self.p} (p <= p_sg)")
        return g ** (1.0 / (self.p - 1.0))

    @property
    def kappa(self) -> float:
        return (self.p - 1.0) ** (-1.0 / (self.p - 1.0))

    def as_dict(self) -> dict:
        d = {"n": self.n, "p": self.p, "alpha": self.alpha, "beta": self.beta,
             "gamma": self.gamma, "kappa": self.kappa}
        d["L"] = self.L if self.has_L else None
        return d


def derived_constants(n: float, p: float) -> Params:
    return Params(float(n), float(p))


@dataclass(frozen=True)
class ExponentTable:
    n: float
    p_F: float
    p_sg: float
    p_S: float
    p_JL: float
    p_JL_star: float | None
    p_L: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("n", "p_F", "p_sg", "p_S", "p_JL", "p_JL_star", "p_L")}


def exponent_table(n: float) -> ExponentTable:
    """All critical exponents for dimension ``n``.

    p_L is set to +inf for n <= 10, where the Lepin exponent is not defined.
    p_JL_star is None for n <= 2.
    """
    n = float(n)
    if not n > 0 or not math.isfinite(n):
        raise ValueError(f"invalid dimension n={n!r}")
    p_F = 1.0 + 2.0 / n
    if n > 2:
        p_sg = n / (n - 2.0)
        p_S = (n + 2.0) / (n - 2.0)
        p_JL_star = 1.0 + 4.0 / (n - 4.0 + 2.0 * math.sqrt(n - 1.0))
    else:
        p_sg = p_S = UNBOUNDED
        p_JL_star = None
    if n > 10:
        p_JL = 1.0 + 4.0 / (n - 4.0 - 2.0 * math.sqrt(n - 1.0))
        p_L = (n - 4.0) / (n - 10.0)
    else:
        p_JL = p_L = UNBOUNDED
    return ExponentTable(n, p_F, p_sg, p_S, p_JL, p_JL_star, p_L)


class RegimeTag(str, Enum):
    SUB_FUJITA = "subFujita"
    FUJITA_TO_SINGULAR = "FujitaToSingular"
    SINGULAR_TO_SOBOLEV = "singularToSobolev"
    SOBOLEV_CRITICAL = "SobolevCritical"
    SOBOLEV_TO_JL = "SobolevToJL"
    JL_TO_LEPIN = "JLToLepin"
    ABOVE_LEPIN = "aboveLepin"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    has_L: bool
    beta_sign: int


def _is_boundary(p: float, q: float) -> bool:
    return math.isfinite(q) and abs(p - q) <= _BOUNDARY_RTOL * q


def classify_regime(n: float, p: float) -> Regime:
    """Place p on the exponent ladder for dimension n.

    A p equal to a critical exponent belongs to the regime above it, except
    p == p_S which is reported as SobolevCritical.
    """
    prm = derived_constants(n, p)
    t = exponent_table(n)
    if _is_boundary(p, t.p_S):
        tag = RegimeTag.SOBOLEV_CRITICAL
    elif p < t.p_F and not _is_boundary(p, t.p_F):
        tag = RegimeTag.SUB_FUJITA
    elif p < t.p_sg and not _is_boundary(p, t.p_sg):
        tag = RegimeTag.FUJITA_TO_SINGULAR
    elif p < t.p_S:
        tag = RegimeTag.SINGULAR_TO_SOBOLEV
    elif p < t.p_JL and not _is_boundary(p, t.p_JL):
        tag = RegimeTag.SOBOLEV_TO_JL
    elif p < t.p_L and not _is_boundary(p, t.p_L):
        tag = RegimeTag.JL_TO_LEPIN
    else:
        tag = RegimeTag.ABOVE_LEPIN
    b = prm.beta
    beta_sign = 0 if _is_boundary(p, t.p_S) else (1 if b > 0 else -1)
    return Regime(tag, prm.has_L, beta_sign)


def indicial_constant(n: float, p: float) -> float:
    """Constant term 2(n-2-alpha) of the indicial polynomial at U_*."""
    return 2.0 * (n - 2.0 - 2.0 / (p - 1.0))


def indicial_discriminant(n: float, p: float) -> float:
    prm = Params(float(n), float(p))
    return prm.beta ** 2 - 4.0 * indicial_constant(n, p)


def indicial_roots(n: float, p: float) -> tuple[complex | float, complex | float]:
    """Roots of mu^2 + beta mu + 2(n-2-alpha) = 0, real part descending.

    Real roots are returned as floats, a complex pair as complex numbers
    (positive imaginary part first).
    """
    prm = Params(float(n), float(p))
    if not prm.has_L:
        raise LUndefinedError(f"indicial roots need p > p_sg (n={n}, p={p})")
    c = indicial_constant(n, p)
    if not math.isclose(c, (prm.p - 1.0) * prm.gamma, rel_tol=1e-12):
        raise ArithmeticError("indicial constant disagrees with (p-1)*gamma")
    b = prm.beta
    disc = b * b - 4.0 * c
    if disc >= 0:
        sq = math.sqrt(disc)
        # avoid cancellation for the smaller-magnitude root
        q = -0.5 * (b + math.copysign(sq, b)) if b != 0 else -0.5 * sq
        r1 = q
        r2 = c / q if q != 0 else 0.0
        return tuple(sorted((r1, r2), reverse=True))
    sq = cmath.sqrt(disc)
    return (complex(-b / 2, sq.imag / 2), complex(-b / 2, -sq.imag / 2))


def comparison_roots(n: float, p: float, eps: float) -> tuple[float, float, float, float]:
    """Comparison exponents (a1+, a1-, a2+, a2-) for a small eps > 0."""
    n = float(n)
    alpha = derived_constants(n, p).alpha
    lim = (n - 2.0) ** 2 / 4.0
    if not (0 <= eps < lim):
        raise ValueError(f"eps must lie in [0, {lim}), got {eps!r}")
    s_plus = math.sqrt((n - 2.0) ** 2 - 4.0 * eps)
    s_minus = math.sqrt((n - 2.0) ** 2 + 4.0 * eps)
    a1p = alpha - 0.5 * (n - 2.0 - s_plus)
    a1m = alpha - 0.5 * (n - 2.0 - s_minus)
    a2p = alpha - 0.5 * (n - 2.0 + s_plus)
    a2m = alpha - 0.5 * (n - 2.0 + s_minus)
    return a1p, a1m, a2p, a2m
