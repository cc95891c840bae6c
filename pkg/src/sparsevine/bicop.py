"""Parametric bivariate copula families.

Densities, h-functions (conditional distributions) and their inverses,
Kendall's tau conversions, maximum-likelihood fitting and criterion-based
family selection for the independence, Gaussian, Student t, Clayton,
Gumbel, Frank and Joe copulas.  Clayton, Gumbel and Joe can be rotated by
90, 180 or 270 degrees to capture negative or survival dependence.

Conventions
-----------
``hfunc1(u, v) = dC(u, v)/du`` is the distribution of the second argument
given the first, ``hfunc2(u, v) = dC(u, v)/dv`` the distribution of the
first given the second.  ``hinv1`` and ``hinv2`` invert them in their
second and first argument respectively.

All copula-scale inputs are clamped to ``[1e-10, 1 - 1e-10]``.
"""

from __future__ import annotations

import enum
import functools
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import interpolate, optimize, special, stats

from . import criteria
from .errors import ConfigError, DegenerateDataWarning, DomainError, FitError, InputError, NumericError

__all__ = [
    "CLAMP",
    "FamilyId",
    "BicopModel",
    "INDEPENDENCE",
    "PARAM_BOUNDS",
    "ALL_CANDIDATES",
    "candidates_for",
    "pdf",
    "logpdf",
    "loglik",
    "hfunc1",
    "hfunc2",
    "hfuncs",
    "hinv1",
    "t_ppf",
    "hinv2",
    "param_to_tau",
    "tau_to_param",
    "tau_range",
    "fit_mle",
    "select_family",
    "mutual_information",
    "empirical_tau",
]

CLAMP = 1e-10


class FamilyId(str, enum.Enum):
    INDEPENDENCE = "independence"
    GAUSSIAN = "gaussian"
    STUDENT_T = "student_t"
    CLAYTON = "clayton"
    GUMBEL = "gumbel"
    FRANK = "frank"
    JOE = "joe"


ROTATABLE = frozenset({FamilyId.CLAYTON, FamilyId.GUMBEL, FamilyId.JOE})
ROTATIONS = (0, 90, 180, 270)

# Optimizer boxes.  The ranges are implementation choices; Clayton stops at
# 28 because u**-theta overflows double precision soon after at the clamp.
PARAM_BOUNDS: dict[FamilyId, tuple[tuple[float, float], ...]] = {
    FamilyId.INDEPENDENCE: (),
    FamilyId.GAUSSIAN: ((-0.9999, 0.9999),),
    FamilyId.STUDENT_T: ((-0.9999, 0.9999), (2.0, 50.0)),
    FamilyId.CLAYTON: ((1e-4, 28.0),),
    FamilyId.GUMBEL: ((1.0, 50.0),),
    FamilyId.FRANK: ((-35.0, 35.0),),
    FamilyId.JOE: ((1.0, 30.0),),
}

_NPARS = {f: len(b) for f, b in PARAM_BOUNDS.items()}

STUDENT_DF_START = 5.0
_STUDENT_DF_GRID = np.geomspace(2.0, 50.0, 8)
_FRANK_MIN_ABS = 1e-6
_XATOL = 1e-8


def _rotations_for(family: FamilyId) -> tuple[int, ...]:
    return ROTATIONS if family in ROTATABLE else (0,)


ALL_CANDIDATES: tuple[tuple[FamilyId, int], ...] = tuple(
    (f, r) for f in FamilyId if f is not FamilyId.INDEPENDENCE for r in _rotations_for(f)
)


def candidates_for(families: Iterable[FamilyId | str]) -> tuple[tuple[FamilyId, int], ...]:
    """Expand family names into ``(family, rotation)`` candidates."""
    out = []
    for f in families:
        f = FamilyId(f)
        if f is FamilyId.INDEPENDENCE:
            continue
        out.extend((f, r) for r in _rotations_for(f))
    return tuple(out)


@dataclass(frozen=True)
class BicopModel:
    """A (fitted) pair-copula.

    ``loglik`` and ``nobs`` describe the data the model was fit on; they
    are zero for models built by hand.  ``at_boundary`` flags estimates
    that sit on the edge of the parameter box.
    """

    family: FamilyId = FamilyId.INDEPENDENCE
    rotation: int = 0
    params: tuple[float, ...] = ()
    nobs: int = 0
    loglik: float = 0.0
    at_boundary: bool = False

    def __post_init__(self):
        family = FamilyId(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        rotation = int(self.rotation)
        object.__setattr__(self, "rotation", rotation)
        if rotation not in _rotations_for(family):
            raise DomainError(f"rotation {rotation} not available for {family.value}")
        if len(self.params) != _NPARS[family]:
            raise DomainError(
                f"{family.value} takes {_NPARS[family]} parameter(s), got {len(self.params)}"
            )
        _check_params(family, self.params)

    @property
    def npars(self) -> int:
        return len(self.params)

    @property
    def is_independence(self) -> bool:
        return self.family is FamilyId.INDEPENDENCE

    def __repr__(self) -> str:
        pars = ", ".join(f"{p:.4g}" for p in self.params)
        rot = f" rot={self.rotation}" if self.rotation else ""
        return f"BicopModel({self.family.value}{rot} [{pars}])"


def _check_params(family: FamilyId, params: Sequence[float]) -> None:
    if not all(math.isfinite(p) for p in params):
        raise DomainError(f"non-finite parameter for {family.value}: {params}")
    if family is FamilyId.INDEPENDENCE:
        return
    if family in (FamilyId.GAUSSIAN, FamilyId.STUDENT_T):
        if not -1.0 < params[0] < 1.0:
            raise DomainError(f"correlation {params[0]} outside (-1, 1)")
        if family is FamilyId.STUDENT_T and not 2.0 <= params[1] <= 50.0:
            raise DomainError(f"degrees of freedom {params[1]} outside [2, 50]")
        return
    theta = params[0]
    if family is FamilyId.CLAYTON:
        ok = 0.0 < theta <= 28.0
    elif family is FamilyId.GUMBEL:
        ok = 1.0 <= theta <= 50.0
    elif family is FamilyId.JOE:
        ok = 1.0 <= theta <= 30.0
    else:
        ok = -35.0 <= theta <= 35.0 and theta != 0.0
    if not ok:
        raise DomainError(f"parameter {theta} outside the {family.value} domain")


INDEPENDENCE = BicopModel()


def _as_uv(u, v) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise InputError("copula-scale input contains non-finite values")
    return np.clip(u, CLAMP, 1.0 - CLAMP), np.clip(v, CLAMP, 1.0 - CLAMP)


# ---------------------------------------------------------------------------
# Base (unrotated) families.  Inputs are clamped arrays.
# ---------------------------------------------------------------------------


def _t_logdens(t: np.ndarray, df: float) -> np.ndarray:
    const = special.gammaln(0.5 * (df + 1.0)) - special.gammaln(0.5 * df) - 0.5 * math.log(df * math.pi)
    return const - 0.5 * (df + 1.0) * np.log1p(t * t / df)


def _t_polish(t: np.ndarray, q: np.ndarray, df: float) -> np.ndarray:
    # one Newton step on the lower tail, where stdtr is accurate
    return t - (special.stdtr(df, t) - q) / np.exp(_t_logdens(t, df))


def _t_ppf_lower(q: np.ndarray, df: float) -> np.ndarray:
    x = special.betaincinv(0.5 * df, 0.5, 2.0 * q)
    return _t_polish(-np.sqrt(df * (1.0 / x - 1.0)), q, df)


# lower half of the t quantile as a function of the normal score
_SPLINE_GRID = np.linspace(-6.5, 0.0, 1301)
_SPLINE_MIN_SIZE = 2048


@functools.lru_cache(maxsize=64)
def _t_ppf_spline(df: float) -> interpolate.CubicSpline:
    q = special.ndtr(_SPLINE_GRID)
    vals = _t_ppf_lower(q, df)
    vals[-1] = 0.0
    return interpolate.CubicSpline(_SPLINE_GRID, vals)


def t_ppf(p: np.ndarray, df: float) -> np.ndarray:
    """Quantile function of Student's t with ``df`` degrees of freedom."""
    p = np.asarray(p, dtype=float)
    q = np.minimum(p, 1.0 - p)
    if p.size < _SPLINE_MIN_SIZE:
        t = _t_ppf_lower(q, df)
    else:
        # large arrays: spline start in normal-score space plus a Newton
        # step, several times faster than the incomplete beta inverse
        z = special.ndtri(q)
        inside = z >= _SPLINE_GRID[0]
        t = np.empty_like(q)
        t[inside] = _t_polish(_t_ppf_spline(float(df))(z[inside]), q[inside], df)
        if not np.all(inside):
            t[~inside] = _t_ppf_lower(q[~inside], df)
    return np.where(p < 0.5, t, -t)


def _clayton_logs(lu, lv, theta):
    # log(u^-theta + v^-theta - 1), computed without overflow
    a = -theta * lu
    b = -theta * lv
    m = np.maximum(a, b)
    return m + np.log(np.exp(a - m) + np.exp(b - m) - np.exp(-m))


def _gumbel_parts(u, v, theta):
    x = -np.log(u)
    y = -np.log(v)
    lx = np.log(x)
    ly = np.log(y)
    log_s = np.logaddexp(theta * lx, theta * ly)
    a = np.exp(log_s / theta)
    return x, y, lx, ly, log_s, a


def _joe_parts(u, v, theta):
    lbu = np.log1p(-u)
    lbv = np.log1p(-v)
    a = np.exp(theta * lbu)
    b = np.exp(theta * lbv)
    s = a + b - a * b
    return lbu, lbv, a, b, s


def _base_logpdf(family: FamilyId, u, v, params) -> np.ndarray:
    if family is FamilyId.GAUSSIAN:
        rho = params[0]
        x = special.ndtri(u)
        y = special.ndtri(v)
        r2 = 1.0 - rho * rho
        return -0.5 * math.log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)
    if family is FamilyId.STUDENT_T:
        rho, df = params
        x = t_ppf(u, df)
        y = t_ppf(v, df)
        return _student_logpdf_xy(x, y, rho, df)
    if family is FamilyId.CLAYTON:
        theta = params[0]
        lu = np.log(u)
        lv = np.log(v)
        return (
            math.log1p(theta)
            - (1.0 + theta) * (lu + lv)
            - (2.0 + 1.0 / theta) * _clayton_logs(lu, lv, theta)
        )
    if family is FamilyId.GUMBEL:
        theta = params[0]
        x, y, lx, ly, log_s, a = _gumbel_parts(u, v, theta)
        return (
            -a
            + x
            + y
            + (theta - 1.0) * (lx + ly)
            + (1.0 / theta - 2.0) * log_s
            + np.log(a + theta - 1.0)
        )
    if family is FamilyId.FRANK:
        theta = params[0]
        if theta < 0:
            u, theta = 1.0 - u, -theta
        return (
            math.log(theta * -math.expm1(-theta)) - theta * (u + v) - 2.0 * _frank_log_denom(u, v, theta)
        )
    if family is FamilyId.JOE:
        theta = params[0]
        lbu, lbv, a, b, s = _joe_parts(u, v, theta)
        return (1.0 / theta - 2.0) * np.log(s) + (theta - 1.0) * (lbu + lbv) + np.log(theta - 1.0 + s)
    return np.zeros(np.broadcast(u, v).shape)


def _frank_log_denom(u, v, theta):
    # log(e^-a + e^-b - e^-(a+b) - e^-theta) for theta > 0, split into two
    # positive terms so nothing cancels
    a = theta * u
    b = theta * v
    return np.logaddexp(-a + np.log(-np.expm1(-b)), -b + np.log(-np.expm1(b - theta)))


def _student_logpdf_xy(x, y, rho, df):
    r2 = 1.0 - rho * rho
    const = (
        special.gammaln(0.5 * (df + 2.0))
        + special.gammaln(0.5 * df)
        - 2.0 * special.gammaln(0.5 * (df + 1.0))
        - 0.5 * math.log(r2)
    )
    quad = (x * x + y * y - 2.0 * rho * x * y) / (df * r2)
    return (
        const
        - 0.5 * (df + 2.0) * np.log1p(quad)
        + 0.5 * (df + 1.0) * (np.log1p(x * x / df) + np.log1p(y * y / df))
    )


def _base_hfunc1(family: FamilyId, u, v, params) -> np.ndarray:
    """h(v | u) of the unrotated family."""
    if family is FamilyId.GAUSSIAN:
        rho = params[0]
        x = special.ndtri(u)
        y = special.ndtri(v)
        return special.ndtr((y - rho * x) / math.sqrt(1.0 - rho * rho))
    if family is FamilyId.STUDENT_T:
        rho, df = params
        x = t_ppf(u, df)
        y = t_ppf(v, df)
        scale = np.sqrt((df + x * x) * (1.0 - rho * rho) / (df + 1.0))
        return special.stdtr(df + 1.0, (y - rho * x) / scale)
    if family is FamilyId.CLAYTON:
        theta = params[0]
        lu = np.log(u)
        lv = np.log(v)
        return np.exp((-theta - 1.0) * lu - (1.0 / theta + 1.0) * _clayton_logs(lu, lv, theta))
    if family is FamilyId.GUMBEL:
        theta = params[0]
        x, y, lx, ly, log_s, a = _gumbel_parts(u, v, theta)
        return np.exp(-a + x + (theta - 1.0) * lx + (1.0 / theta - 1.0) * log_s)
    if family is FamilyId.FRANK:
        theta = params[0]
        if theta < 0:
            u, theta = 1.0 - u, -theta
        return np.exp(-theta * u + np.log(-np.expm1(-theta * v)) - _frank_log_denom(u, v, theta))
    if family is FamilyId.JOE:
        theta = params[0]
        lbu, lbv, a, b, s = _joe_parts(u, v, theta)
        return np.exp((1.0 / theta - 1.0) * np.log(s) + (theta - 1.0) * lbu) * (-np.expm1(theta * lbv))
    return np.broadcast_to(v, np.broadcast(u, v).shape).astype(float)


def _base_hinv1(family: FamilyId, u, p, params) -> np.ndarray:
    """Solve h(v | u) = p for v, unrotated family."""
    if family is FamilyId.GAUSSIAN:
        rho = params[0]
        x = special.ndtri(u)
        return special.ndtr(rho * x + math.sqrt(1.0 - rho * rho) * special.ndtri(p))
    if family is FamilyId.STUDENT_T:
        rho, df = params
        x = t_ppf(u, df)
        scale = np.sqrt((df + x * x) * (1.0 - rho * rho) / (df + 1.0))
        return special.stdtr(df, rho * x + scale * t_ppf(p, df + 1.0))
    if family is FamilyId.CLAYTON:
        theta = params[0]
        w = -theta / (1.0 + theta) * np.log(p)
        with np.errstate(divide="ignore"):
            log_em1 = np.where(w > 30.0, w + np.log1p(-np.exp(-w)), np.log(np.expm1(w)))
        return np.exp(-np.logaddexp(0.0, -theta * np.log(u) + log_em1) / theta)
    if family is FamilyId.FRANK:
        theta = params[0]
        if theta < 0:
            u, theta = 1.0 - u, -theta
        a = -theta * u + np.log1p(-p)
        lp = np.log(p)
        return (np.logaddexp(a, lp) - np.logaddexp(a, lp - theta)) / theta
    if family is FamilyId.INDEPENDENCE:
        return np.broadcast_to(p, np.broadcast(u, p).shape).astype(float)
    return _numeric_hinv1(family, u, p, params)


def _numeric_hinv1(family, u, p, params, max_iter: int = 100) -> np.ndarray:
    # Newton on v with a bisection fallback; d h(v|u) / dv is the density.
    u, p = np.broadcast_arrays(u, p)
    shape = u.shape
    u = u.ravel().astype(float)
    p = p.ravel().astype(float)
    lo = np.full(u.shape, CLAMP)
    hi = np.full(u.shape, 1.0 - CLAMP)
    v = np.clip(p, CLAMP, 1.0 - CLAMP)
    active = np.ones(u.shape, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        ua, va = u[idx], v[idx]
        f = _base_hfunc1(family, ua, va, params) - p[idx]
        above = f > 0
        hi[idx] = np.where(above, va, hi[idx])
        lo[idx] = np.where(above, lo[idx], va)
        dens = np.exp(_base_logpdf(family, ua, va, params))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            step = va - f / dens
        bad = ~np.isfinite(step) | (step <= lo[idx]) | (step >= hi[idx])
        step = np.where(bad, 0.5 * (lo[idx] + hi[idx]), step)
        done = (f == 0.0) | (np.abs(step - va) <= 1e-14) | (hi[idx] - lo[idx] <= 1e-15)
        v[idx] = np.where(f == 0.0, va, step)
        active[idx[done]] = False
    if active.any():
        raise NumericError(
            f"h-function inversion for {family.value} did not converge "
            f"for {int(active.sum())} point(s) within {max_iter} steps"
        )
    return v.reshape(shape)


# ---------------------------------------------------------------------------
# Rotations
# ---------------------------------------------------------------------------


def _to_base(rotation: int, u, v):
    if rotation == 90:
        return 1.0 - u, v
    if rotation == 180:
        return 1.0 - u, 1.0 - v
    if rotation == 270:
        return u, 1.0 - v
    return u, v


def logpdf(model: BicopModel, u, v) -> np.ndarray:
    u, v = _as_uv(u, v)
    bu, bv = _to_base(model.rotation, u, v)
    return _base_logpdf(model.family, bu, bv, model.params)


def pdf(model: BicopModel, u, v) -> np.ndarray:
    """Copula density c(u, v)."""
    return np.exp(logpdf(model, u, v))


def loglik(model: BicopModel, u, v) -> float:
    if model.is_independence:
        return 0.0
    return float(np.sum(logpdf(model, u, v)))


def hfunc1(model: BicopModel, u, v) -> np.ndarray:
    """Conditional distribution of the second argument given the first."""
    u, v = _as_uv(u, v)
    f, r, par = model.family, model.rotation, model.params
    if r == 90:
        return _base_hfunc1(f, 1.0 - u, v, par)
    if r == 180:
        return 1.0 - _base_hfunc1(f, 1.0 - u, 1.0 - v, par)
    if r == 270:
        return 1.0 - _base_hfunc1(f, u, 1.0 - v, par)
    return _base_hfunc1(f, u, v, par)


def hfunc2(model: BicopModel, u, v) -> np.ndarray:
    """Conditional distribution of the first argument given the second."""
    u, v = _as_uv(u, v)
    f, r, par = model.family, model.rotation, model.params
    # every implemented family is exchangeable: dC(u, v)/dv = h1(u | v)
    if r == 90:
        return 1.0 - _base_hfunc1(f, v, 1.0 - u, par)
    if r == 180:
        return 1.0 - _base_hfunc1(f, 1.0 - v, 1.0 - u, par)
    if r == 270:
        return _base_hfunc1(f, 1.0 - v, u, par)
    return _base_hfunc1(f, v, u, par)


def hfuncs(model: BicopModel, u, v) -> tuple[np.ndarray, np.ndarray]:
    """Both h-functions at once, ``(hfunc1(u, v), hfunc2(u, v))``."""
    if model.family is FamilyId.GAUSSIAN:
        u, v = _as_uv(u, v)
        rho = model.params[0]
        x = special.ndtri(u)
        y = special.ndtri(v)
        s = math.sqrt(1.0 - rho * rho)
        return special.ndtr((y - rho * x) / s), special.ndtr((x - rho * y) / s)
    return hfunc1(model, u, v), hfunc2(model, u, v)


def hinv1(model: BicopModel, u, p) -> np.ndarray:
    """Inverse of :func:`hfunc1` in its second argument."""
    u, p = _as_uv(u, p)
    f, r, par = model.family, model.rotation, model.params
    if r == 90:
        out = _base_hinv1(f, 1.0 - u, p, par)
    elif r == 180:
        out = 1.0 - _base_hinv1(f, 1.0 - u, 1.0 - p, par)
    elif r == 270:
        out = 1.0 - _base_hinv1(f, u, 1.0 - p, par)
    else:
        out = _base_hinv1(f, u, p, par)
    return out


def hinv2(model: BicopModel, v, p) -> np.ndarray:
    """Inverse of :func:`hfunc2` in its first argument (``v`` is given)."""
    v, p = _as_uv(v, p)
    f, r, par = model.family, model.rotation, model.params
    if r == 90:
        out = 1.0 - _base_hinv1(f, v, 1.0 - p, par)
    elif r == 180:
        out = 1.0 - _base_hinv1(f, 1.0 - v, 1.0 - p, par)
    elif r == 270:
        out = _base_hinv1(f, 1.0 - v, p, par)
    else:
        out = _base_hinv1(f, v, p, par)
    return out


# ---------------------------------------------------------------------------
# Kendall's tau
# ---------------------------------------------------------------------------


def _frank_tau(theta: float) -> float:
    a = abs(theta)
    if a < 0.5:
        tau = a / 9.0 - a**3 / 900.0 + a**5 / 52920.0 - a**7 / 2721600.0
    else:
        # int_0^a t / (e^t - 1) dt = pi^2/6 + a log(1 - e^-a) - Li2(e^-a)
        one_m = -math.expm1(-a)
        integral = math.pi**2 / 6.0 + a * math.log(one_m) - float(special.spence(one_m))
        tau = 1.0 - 4.0 / a + 4.0 * integral / (a * a)
    return math.copysign(tau, theta)


def _joe_tau(theta: float) -> float:
    b = 2.0 / theta + 1.0
    h = b - 2.0
    if abs(h) > 1e-3:
        s = (special.digamma(2.0) - special.digamma(b)) / (2.0 - b)
    else:
        # Taylor expansion of the difference quotient around b = 2
        s = sum(
            float(special.polygamma(k + 1, 2.0)) * h**k / math.factorial(k + 1) for k in range(5)
        )
    return 1.0 - 2.0 * s / theta


def _base_tau(family: FamilyId, params) -> float:
    if family in (FamilyId.GAUSSIAN, FamilyId.STUDENT_T):
        return 2.0 / math.pi * math.asin(params[0])
    if family is FamilyId.CLAYTON:
        return params[0] / (params[0] + 2.0)
    if family is FamilyId.GUMBEL:
        return 1.0 - 1.0 / params[0]
    if family is FamilyId.FRANK:
        return _frank_tau(params[0])
    if family is FamilyId.JOE:
        return _joe_tau(params[0])
    return 0.0


def param_to_tau(model: BicopModel) -> float:
    tau = _base_tau(model.family, model.params)
    return -tau if model.rotation in (90, 270) else tau


def tau_range(family: FamilyId) -> tuple[float, float]:
    """Attainable Kendall's tau of the unrotated family on its box."""
    family = FamilyId(family)
    if family is FamilyId.INDEPENDENCE:
        return (0.0, 0.0)
    lo, hi = PARAM_BOUNDS[family][0]
    if family in (FamilyId.GAUSSIAN, FamilyId.STUDENT_T, FamilyId.FRANK):
        t = _base_tau(family, (hi,) + ((STUDENT_DF_START,) if family is FamilyId.STUDENT_T else ()))
        return (-t, t)
    return (_base_tau(family, (lo,)), _base_tau(family, (hi,)))


def tau_to_param(family: FamilyId, rotation: int, tau: float) -> tuple[float, ...]:
    """Parameter with Kendall's tau ``tau`` (Student t: ``df`` set to 5)."""
    family = FamilyId(family)
    if rotation not in _rotations_for(family):
        raise DomainError(f"rotation {rotation} not available for {family.value}")
    if not -1.0 < tau < 1.0:
        raise DomainError(f"tau {tau} outside (-1, 1)")
    base = -tau if rotation in (90, 270) else tau
    if family is FamilyId.INDEPENDENCE:
        if tau != 0.0:
            raise DomainError("independence has tau = 0")
        return ()
    if family in (FamilyId.GAUSSIAN, FamilyId.STUDENT_T):
        rho = math.sin(0.5 * math.pi * base)
        return (rho, STUDENT_DF_START) if family is FamilyId.STUDENT_T else (rho,)
    lo, hi = tau_range(family)
    if family is FamilyId.FRANK:
        if base == 0.0 or not lo <= base <= hi:
            raise DomainError(f"tau {tau} not attainable by frank")
        theta_hi = PARAM_BOUNDS[family][0][1]
        a = optimize.brentq(
            lambda t: _frank_tau(t) - abs(base), 1e-8, theta_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps
        )
        return (math.copysign(a, base),)
    if not lo <= base <= hi or (family is FamilyId.CLAYTON and base <= 0.0):
        raise DomainError(f"tau {tau} not attainable by {family.value} rotated {rotation}")
    if family is FamilyId.CLAYTON:
        return (2.0 * base / (1.0 - base),)
    if family is FamilyId.GUMBEL:
        return (1.0 / (1.0 - base),)
    if base == 0.0:
        return (1.0,)
    t_lo, t_hi = PARAM_BOUNDS[family][0]
    theta = optimize.brentq(
        lambda t: _joe_tau(t) - base, t_lo, t_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps
    )
    return (theta,)


# ---------------------------------------------------------------------------
# Estimation
# ---------------------------------------------------------------------------


def empirical_tau(u, v) -> float:
    """Kendall's tau-b of paired samples.

    All-tied input yields 0.0 together with a :class:`DegenerateDataWarning`.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise InputError("empirical_tau needs two 1-d arrays of equal length")
    if u.size < 2:
        raise InputError("empirical_tau needs at least two observations")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tau = stats.kendalltau(u, v).statistic
    if not math.isfinite(tau):
        warnings.warn("all observations tied; Kendall's tau set to 0", DegenerateDataWarning, stacklevel=2)
        return 0.0
    return float(tau)


def _split(data) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError("pair data must have shape (n, 2)")
    return _as_uv(arr[:, 0], arr[:, 1])


def _maximize_bounded(fun, lo: float, hi: float, win_lo: float, win_hi: float) -> tuple[float, float]:
    """Maximize ``fun`` on [lo, hi], searching [win_lo, win_hi] first."""
    win_lo, win_hi = max(lo, win_lo), min(hi, win_hi)
    res = optimize.minimize_scalar(
        lambda t: -fun(t), bounds=(win_lo, win_hi), method="bounded", options={"xatol": _XATOL}
    )
    x = float(res.x)
    slack = 1e-6 * max(1.0, abs(x))
    if (win_lo > lo and x - win_lo < slack) or (win_hi < hi and win_hi - x < slack):
        res = optimize.minimize_scalar(
            lambda t: -fun(t), bounds=(lo, hi), method="bounded", options={"xatol": _XATOL}
        )
        x = float(res.x)
    return x, float(-res.fun)


def _tau_window(family: FamilyId, base_tau: float, width: float = 0.2) -> tuple[float, float]:
    t_lo, t_hi = tau_range(family)
    margin = 1e-6
    a = min(max(base_tau - width, t_lo + margin), t_hi - margin)
    b = min(max(base_tau + width, t_lo + margin), t_hi - margin)
    if family is FamilyId.FRANK:
        sign = 1.0 if base_tau >= 0 else -1.0
        lo_abs, hi_abs = sorted((abs(a), abs(b)))
        if a * b <= 0:
            lo_abs = 1e-4
        lo_abs = max(lo_abs, 1e-4)
        pa = abs(tau_to_param(family, 0, lo_abs)[0])
        pb = abs(tau_to_param(family, 0, hi_abs)[0])
        return tuple(sorted((sign * pa, sign * pb)))
    a = max(a, 1e-6) if family is FamilyId.CLAYTON else a
    return tau_to_param(family, 0, a)[0], tau_to_param(family, 0, b)[0]


def _fit_student(u, v, base_tau: float) -> tuple[tuple[float, float], float]:
    n = u.size
    rho0 = math.sin(0.5 * math.pi * float(np.clip(base_tau, -0.999, 0.999)))
    (rho_lo, rho_hi), (df_lo, df_hi) = PARAM_BOUNDS[FamilyId.STUDENT_T]
    memo: dict[float, tuple[float, float]] = {}

    def profile(df: float) -> tuple[float, float]:
        if df in memo:
            return memo[df]
        x = t_ppf(u, df)
        y = t_ppf(v, df)
        ss = x * x + y * y
        xy = x * y
        const = n * (
            special.gammaln(0.5 * (df + 2.0)) + special.gammaln(0.5 * df) - 2.0 * special.gammaln(0.5 * (df + 1.0))
        ) + 0.5 * (df + 1.0) * float(np.sum(np.log1p(x * x / df) + np.log1p(y * y / df)))

        def ll(rho: float) -> float:
            r2 = 1.0 - rho * rho
            return const - 0.5 * n * math.log(r2) - 0.5 * (df + 2.0) * float(
                np.sum(np.log1p((ss - 2.0 * rho * xy) / (df * r2)))
            )

        rho, val = _maximize_bounded(ll, rho_lo, rho_hi, rho0 - 0.2, rho0 + 0.2)
        memo[df] = (rho, val)
        return rho, val

    grid = [float(g) for g in _STUDENT_DF_GRID]
    vals = [profile(g)[1] for g in grid]
    i = int(np.argmax(vals))
    a = math.log(grid[max(i - 1, 0)])
    b = math.log(grid[min(i + 1, len(grid) - 1)])
    res = optimize.minimize_scalar(
        lambda lg: -profile(min(max(math.exp(lg), df_lo), df_hi))[1],
        bounds=(a, b),
        method="bounded",
        options={"xatol": _XATOL},
    )
    df = min(max(math.exp(float(res.x)), df_lo), df_hi)
    rho, val = profile(df)
    if vals[i] > val:
        df = grid[i]
        rho, val = profile(df)
    return (rho, df), val


def fit_mle(family: FamilyId, rotation: int, data, *, tau: float | None = None) -> BicopModel:
    """Maximum-likelihood fit of one family/rotation to ``(n, 2)`` data.

    The search starts from the tau-inversion estimate (``tau`` may pass a
    precomputed empirical Kendall's tau) and is confined to the family's
    parameter box.  Estimates at the box boundary are flagged through
    ``BicopModel.at_boundary``.
    """
    family = FamilyId(family)
    u, v = _split(data)
    n = u.size
    if family is FamilyId.INDEPENDENCE:
        return BicopModel(nobs=n)
    if rotation not in _rotations_for(family):
        raise DomainError(f"rotation {rotation} not available for {family.value}")
    if n < 10:
        raise InputError(f"fit_mle needs at least 10 observations, got {n}")
    if np.ptp(u) == 0.0 or np.ptp(v) == 0.0:
        raise FitError("degenerate data: a margin is constant")
    if tau is None and family is not FamilyId.GAUSSIAN:
        tau = empirical_tau(u, v)
    base_tau = (-tau if rotation in (90, 270) else tau) if tau is not None else 0.0
    bu, bv = _to_base(rotation, u, v)

    closed_ll = None
    if family is FamilyId.STUDENT_T:
        params, _ = _fit_student(bu, bv, base_tau)
    elif family is FamilyId.GAUSSIAN:
        x = special.ndtri(bu)
        y = special.ndtri(bv)
        sxx = float(np.sum(x * x + y * y))
        sxy = float(np.sum(x * y))

        def ll(rho):
            r2 = 1.0 - rho * rho
            return -0.5 * n * math.log(r2) - (rho * rho * sxx - 2.0 * rho * sxy) / (2.0 * r2)

        # the score is a cubic in rho; take its best real root inside the box
        lo, hi = PARAM_BOUNDS[family][0]
        roots = np.roots([-float(n), sxy, n - sxx, sxy])
        cands = [lo, hi] + [float(r.real) for r in roots if abs(r.imag) < 1e-9 and lo < r.real < hi]
        params = (max(cands, key=ll),)
        closed_ll = ll(params[0])
    else:
        lo, hi = PARAM_BOUNDS[family][0]
        if family is FamilyId.FRANK:
            if base_tau >= 0:
                lo = _FRANK_MIN_ABS
            else:
                hi = -_FRANK_MIN_ABS
        win = _tau_window(family, base_tau)
        params = (
            _maximize_bounded(lambda t: float(np.sum(_base_logpdf(family, bu, bv, (t,)))), lo, hi, *win)[0],
        )

    bounds = PARAM_BOUNDS[family]
    at_boundary = any(
        abs(p - b_lo) <= 1e-6 * max(1.0, abs(b_lo)) or abs(p - b_hi) <= 1e-6 * max(1.0, abs(b_hi))
        for p, (b_lo, b_hi) in zip(params, bounds)
    )
    if family is FamilyId.FRANK:
        at_boundary = at_boundary or abs(params[0]) <= 1e-5
    model = BicopModel(family, rotation, params, nobs=n)
    ll_val = closed_ll if closed_ll is not None else loglik(model, u, v)
    if not math.isfinite(ll_val):
        raise FitError(f"non-finite log-likelihood for {family.value}", best=model)
    return BicopModel(family, rotation, params, nobs=n, loglik=ll_val, at_boundary=at_boundary)


def _admissible(candidates, tau: float | None):
    negative = tau is not None and tau < 0
    for fam, rot in candidates:
        if fam in ROTATABLE:
            if negative != (rot in (90, 270)):
                continue
        yield fam, rot


def select_family(
    data,
    candidates: Iterable[tuple[FamilyId, int]],
    criterion: criteria.CriterionConfig,
    tree_level: int = 1,
    *,
    tau: float | None = None,
) -> BicopModel:
    """Fit every admissible candidate and return the criterion minimizer.

    Independence is always a candidate and wins ties.  Rotations of the
    one-sided families are only tried when they match the sign of the
    empirical Kendall's tau.
    """
    candidates = [(FamilyId(f), int(r)) for f, r in candidates]
    if not candidates:
        raise ConfigError("empty candidate set")
    u, v = _split(data)
    n = u.size
    best = BicopModel(nobs=n)
    best_val = criteria.edge_criterion(0.0, 0, n, tree_level, True, criterion)
    if all(f is FamilyId.INDEPENDENCE for f, _ in candidates):
        return best
    if tau is None and any(f not in (FamilyId.INDEPENDENCE, FamilyId.GAUSSIAN) for f, _ in candidates):
        tau = empirical_tau(u, v)
    pair = np.column_stack((u, v))
    for fam, rot in _admissible(candidates, tau):
        if fam is FamilyId.INDEPENDENCE:
            continue
        try:
            model = fit_mle(fam, rot, pair, tau=tau)
        except (FitError, DomainError):
            continue
        val = criteria.edge_criterion(model.loglik, model.npars, n, tree_level, False, criterion)
        if val < best_val:
            best, best_val = model, val
    return best


# ---------------------------------------------------------------------------
# Mutual information
# ---------------------------------------------------------------------------


def _mi_gauss_legendre(model: BicopModel, nodes: int) -> float:
    lim = float(special.ndtri(1.0 - CLAMP))
    x, w = np.polynomial.legendre.leggauss(nodes)
    x = x * lim
    w = w * lim
    u = special.ndtr(x)
    weights = w * np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    uu, vv = np.meshgrid(u, u, indexing="ij")
    lc = logpdf(model, uu, vv)
    return float(weights @ (np.exp(lc) * lc) @ weights)


def mutual_information(model: BicopModel, nodes: int = 101, max_refine: int = 3) -> float:
    """Mutual information of a pair-copula, int c log c.

    Tensor Gauss-Legendre quadrature in normal-score coordinates on the
    clamped domain; the node count doubles while the relative change
    exceeds 1e-6.
    """
    if model.is_independence:
        return 0.0
    val = _mi_gauss_legendre(model, nodes)
    for _ in range(max_refine):
        if not math.isfinite(val):
            break
        nodes = 2 * nodes - 1
        new = _mi_gauss_legendre(model, nodes)
        change = abs(new - val) / max(abs(new), 1e-300)
        val = new
        if change <= 1e-6:
            break
    if not math.isfinite(val):
        raise NumericError(
            f"mutual information quadrature is non-finite for {model!r}; "
            "the density has a pole the rule cannot resolve, try more nodes"
        )
    return max(val, 0.0)
