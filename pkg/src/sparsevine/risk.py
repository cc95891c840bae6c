"""Marginal time-series models, Value-at-Risk forecasting and backtests.

Each asset follows an ARMA(1,1)-GARCH(1,1) model with standardized
(unit-variance) Student-t innovations,

    x_t = mu + phi x_{t-1} + psi a_{t-1} + a_t,   a_t = sigma_t eps_t,
    sigma_t^2 = omega + beta sigma_{t-1}^2 + alpha e_{t-1}^2,

where ``e`` is the standardized innovation ``eps`` by default
(:attr:`VarianceForm.STANDARDIZED`) or the shock ``a`` in the textbook
GARCH (:attr:`VarianceForm.SHOCK`).  The dependence between the
probability integral transforms of the innovations is a vine copula.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence, TextIO

import numpy as np
from scipy import optimize, special, stats

from . import fit as vfit
from .bicop import CLAMP, t_ppf
from .errors import ConfigError, DegenerateDataWarning, DomainError, FitError, InputError
from .fit import FitConfig, VineModel
from .sim import rvine_sample

__all__ = [
    "VarianceForm",
    "ArmaGarchParams",
    "MarginState",
    "MarginalFit",
    "CoverageResult",
    "VarForecast",
    "BacktestConfig",
    "BacktestReport",
    "MIN_SERIES_LENGTH",
    "fit_arma_garch",
    "fit_margins",
    "filter_series",
    "standard_errors",
    "pit",
    "std_t_cdf",
    "std_t_ppf",
    "simulate_arma_garch",
    "simulate_panel",
    "forecast_var",
    "rolling_backtest",
    "coverage_test",
    "write_backtest_table",
]

MIN_SERIES_LENGTH = 250
MIN_COVERAGE_LENGTH = 50
DEFAULT_LEVELS = (0.9, 0.95, 0.99)
_STATIONARITY_MARGIN = 1e-4


class VarianceForm(str, enum.Enum):
    STANDARDIZED = "eps2"  # alpha multiplies eps_{t-1}^2
    SHOCK = "a2"  # alpha multiplies a_{t-1}^2


@dataclass(frozen=True)
class ArmaGarchParams:
    mu: float
    phi: float
    psi: float
    omega: float
    alpha: float
    beta: float
    nu: float
    form: VarianceForm = VarianceForm.STANDARDIZED

    def __post_init__(self):
        object.__setattr__(self, "form", VarianceForm(self.form))
        for name in ("mu", "phi", "psi", "omega", "alpha", "beta", "nu"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise DomainError(f"{name} must be finite, got {val}")
            object.__setattr__(self, name, val)
        if self.omega <= 0.0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.alpha < 0.0 or self.beta < 0.0:
            raise DomainError(f"alpha and beta must be non-negative, got {self.alpha}, {self.beta}")
        if self.nu <= 2.0:
            raise DomainError(f"nu must exceed 2, got {self.nu}")

    @property
    def stationary(self) -> bool:
        return self.alpha + self.beta < 1.0

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.phi, self.psi, self.omega, self.alpha, self.beta, self.nu])


@dataclass(frozen=True)
class MarginState:
    """Last observed value, shock, innovation and variance of a series."""

    x: float
    a: float
    eps: float
    sigma2: float

    def forecast(self, params: ArmaGarchParams) -> tuple[float, float]:
        """Conditional mean and standard deviation of the next observation."""
        e = self.eps if params.form is VarianceForm.STANDARDIZED else self.a
        s2 = params.omega + params.beta * self.sigma2 + params.alpha * e * e
        return params.mu + params.phi * self.x + params.psi * self.a, math.sqrt(s2)

    def advance(self, params: ArmaGarchParams, x_new: float) -> "MarginState":
        mean, sd = self.forecast(params)
        a = x_new - mean
        return MarginState(float(x_new), a, a / sd, sd * sd)


@dataclass(frozen=True)
class MarginalFit:
    params: ArmaGarchParams
    residuals: np.ndarray = field(repr=False)
    volatility: np.ndarray = field(repr=False)
    shocks: np.ndarray = field(repr=False)
    loglik: float = 0.0
    series: np.ndarray = field(default=None, repr=False)
    init: MarginState = None
    at_boundary: bool = False

    @property
    def state(self) -> MarginState:
        """State after the last observation, the start of a forecast."""
        return MarginState(
            float(self.series[-1]), float(self.shocks[-1]), float(self.residuals[-1]), float(self.volatility[-1] ** 2)
        )


# ---------------------------------------------------------------------------
# Standardized Student t
# ---------------------------------------------------------------------------


def std_t_cdf(x, nu: float) -> np.ndarray:
    """CDF of the unit-variance Student t with ``nu`` degrees of freedom."""
    return special.stdtr(nu, np.asarray(x, dtype=float) * math.sqrt(nu / (nu - 2.0)))


def std_t_ppf(p, nu: float) -> np.ndarray:
    return t_ppf(np.asarray(p, dtype=float), nu) * math.sqrt((nu - 2.0) / nu)


def _std_t_logpdf(eps: np.ndarray, nu: float) -> np.ndarray:
    const = special.gammaln(0.5 * (nu + 1.0)) - special.gammaln(0.5 * nu) - 0.5 * math.log(math.pi * (nu - 2.0))
    return const - 0.5 * (nu + 1.0) * np.log1p(eps * eps / (nu - 2.0))


# ---------------------------------------------------------------------------
# Filtering and estimation
# ---------------------------------------------------------------------------


def _presample(x: np.ndarray) -> MarginState:
    # x_{-1} at the sample mean, no shock, sigma_0^2 at the sample variance
    return MarginState(float(np.mean(x)), 0.0, 0.0, float(np.var(x)))


def _filter_loop(p, x, init: MarginState, shock_form: bool):
    mu, phi, psi, omega, alpha, beta = p[:6]
    xs = x.tolist()
    n = len(xs)
    a_out = [0.0] * n
    s_out = [0.0] * n
    xp, ap = init.x, init.a
    s2 = init.sigma2
    for t in range(n):
        sd = math.sqrt(s2)
        a = xs[t] - (mu + phi * xp + psi * ap)
        a_out[t] = a
        s_out[t] = sd
        e = a if shock_form else a / sd
        s2 = omega + beta * s2 + alpha * e * e
        xp, ap = xs[t], a
    return np.array(a_out), np.array(s_out)


def filter_series(params: ArmaGarchParams, series, init: MarginState | None = None):
    """Shocks, volatilities and standardized residuals of ``series``.

    The first observation uses ``init`` as its presample state; by default
    the previous value sits at the sample mean with a zero shock and the
    first variance is the sample variance.
    """
    x = np.asarray(series, dtype=float)
    init = init or _presample(x)
    # the first variance is the presample one, not a recursion step
    a, sd = _filter_loop(params.as_array(), x, init, params.form is VarianceForm.SHOCK)
    return a, sd, a / sd


def _negloglik(p, x, init, shock_form) -> float:
    a, sd = _filter_loop(p, x, init, shock_form)
    eps = a / sd
    nu = p[6]
    val = -float(np.sum(_std_t_logpdf(eps, nu) - np.log(sd)))
    return val if math.isfinite(val) else 1e300


def _check_series(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise InputError(f"series must be one-dimensional, got shape {x.shape}")
    if x.size < MIN_SERIES_LENGTH:
        raise InputError(f"series needs at least {MIN_SERIES_LENGTH} observations, got {x.size}")
    bad = np.flatnonzero(~np.isfinite(x))
    if bad.size:
        raise InputError(f"non-finite value at position {bad[0]}")
    return x


def fit_arma_garch(series, form: VarianceForm | str = VarianceForm.STANDARDIZED) -> MarginalFit:
    """Maximum-likelihood ARMA(1,1)-GARCH(1,1) fit with standardized t innovations.

    Optimizes over a box with ``alpha + beta <= 1 - 1e-4`` by SLSQP.
    Raises :class:`FitError` for constant series or when the optimizer
    fails; ``at_boundary`` flags estimates on the stationarity boundary or
    another edge of the box.
    """
    x = _check_series(series)
    form = VarianceForm(form)
    shock_form = form is VarianceForm.SHOCK
    mean, var = float(np.mean(x)), float(np.var(x))
    if not var > 0.0:
        raise FitError("constant series: the GARCH likelihood is degenerate")
    sd = math.sqrt(var)
    init = _presample(x)

    # work on a rescaled vector so all coordinates are of order one
    scale = np.array([sd, 1.0, 1.0, var, 1.0, 1.0, 10.0])
    shift = np.array([mean, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    lim = 1.0 - _STATIONARITY_MARGIN
    bounds = [(-10.0, 10.0), (-0.999, 0.999), (-0.999, 0.999), (1e-8, 100.0), (0.0, lim), (0.0, lim), (0.21, 10.0)]

    def to_raw(z):
        return shift + scale * z

    def objective(z):
        return _negloglik(to_raw(z), x, init, shock_form)

    alpha0 = 0.08 if shock_form else min(0.1 * var, 0.1)
    omega0 = 0.07 if shock_form else max(0.15 - alpha0 / var, 0.01)
    z0 = np.array([0.0, 0.0, 0.0, omega0, alpha0, 0.85, 0.8])
    cons = [{"type": "ineq", "fun": lambda z: lim - z[4] - z[5]}]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = optimize.minimize(
            objective, z0, method="SLSQP", bounds=bounds, constraints=cons, options={"maxiter": 500, "ftol": 1e-10}
        )
    z = np.clip(res.x, [b[0] for b in bounds], [b[1] for b in bounds])
    raw = to_raw(z)
    if not res.success and not (np.all(np.isfinite(raw)) and objective(z) < 1e299):
        raise FitError(f"ARMA-GARCH optimizer failed: {res.message}", best=raw)
    if raw[4] + raw[5] > lim:
        raw[5] = lim - raw[4]
    try:
        params = ArmaGarchParams(*raw, form=form)
    except DomainError as exc:
        raise FitError(f"ARMA-GARCH estimate outside the parameter space: {exc}", best=raw) from exc
    a, s, eps = filter_series(params, x, init)
    ll = -_negloglik(params.as_array(), x, init, shock_form)
    if not math.isfinite(ll):
        raise FitError("ARMA-GARCH likelihood is not finite at the estimate", best=raw)
    zc = (raw - shift) / scale
    near = any(abs(zc[i] - lo) < 1e-6 or abs(zc[i] - hi) < 1e-6 for i, (lo, hi) in enumerate(bounds) if i != 4 and i != 5)
    at_boundary = near or raw[4] + raw[5] >= lim - 1e-8
    return MarginalFit(params, eps, s, a, ll, x, init, bool(at_boundary))


def standard_errors(fit: MarginalFit) -> np.ndarray:
    """Asymptotic standard errors from a central-difference Hessian.

    Order: mu, phi, psi, omega, alpha, beta, nu.  Entries are ``nan``
    when the Hessian is not positive definite.
    """
    p = fit.params.as_array()
    shock_form = fit.params.form is VarianceForm.SHOCK
    h = 1e-4 * np.maximum(np.abs(p), 1e-2)

    def f(q):
        return _negloglik(q, fit.series, fit.init, shock_form)

    k = p.size
    hess = np.empty((k, k))
    f0 = f(p)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        hess[i, i] = (f(p + ei) - 2.0 * f0 + f(p - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = h[j]
            val = (f(p + ei + ej) - f(p + ei - ej) - f(p - ei + ej) + f(p - ei - ej)) / (4.0 * h[i] * h[j])
            hess[i, j] = hess[j, i] = val
    try:
        np.linalg.cholesky(hess)
    except np.linalg.LinAlgError:
        return np.full(k, np.nan)
    return np.sqrt(np.diag(np.linalg.inv(hess)))


def pit(fit: MarginalFit) -> np.ndarray:
    """Probability integral transform of the standardized residuals."""
    return np.clip(std_t_cdf(fit.residuals, fit.params.nu), CLAMP, 1.0 - CLAMP)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


def _simulate_from_uniforms(params: ArmaGarchParams, u: np.ndarray, init: MarginState) -> np.ndarray:
    eps = std_t_ppf(np.clip(u, CLAMP, 1.0 - CLAMP), params.nu).tolist()
    out = [0.0] * len(eps)
    state = init
    for t, e in enumerate(eps):
        mean, sd = state.forecast(params)
        x = mean + sd * e
        out[t] = x
        state = MarginState(x, sd * e, e, sd * sd)
    return np.array(out)


def _stationary_state(params: ArmaGarchParams) -> MarginState:
    if params.form is VarianceForm.STANDARDIZED:
        s2 = (params.omega + params.alpha) / max(1.0 - params.beta, 1e-6)
    else:
        s2 = params.omega / max(1.0 - params.alpha - params.beta, 1e-6)
    return MarginState(params.mu / max(1.0 - params.phi, 1e-6), 0.0, 0.0, s2)


def simulate_arma_garch(params: ArmaGarchParams, n: int, seed=None, burn: int = 500) -> np.ndarray:
    """Simulate ``n`` observations after ``burn`` discarded ones."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = rng.random(int(n) + int(burn))
    return _simulate_from_uniforms(params, u, _stationary_state(params))[int(burn) :]


def simulate_panel(
    params: Sequence[ArmaGarchParams], vine: VineModel, n: int, seed=None, burn: int = 500
) -> np.ndarray:
    """Returns panel whose innovation PITs follow ``vine``."""
    if len(params) != vine.d:
        raise InputError(f"{len(params)} margins for a {vine.d}-dimensional vine")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = rvine_sample(vine, int(n) + int(burn), rng)
    cols = [_simulate_from_uniforms(p, u[:, k], _stationary_state(p))[int(burn) :] for k, p in enumerate(params)]
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# Value at Risk
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarForecast:
    """VaR of the equally weighted portfolio return, keyed by level."""

    levels: Mapping[float, float]
    draws: int
    mean: float


def _check_levels(levels) -> tuple[float, ...]:
    out = tuple(sorted(float(a) for a in levels))
    if not out:
        raise ConfigError("at least one VaR level is required")
    for a in out:
        if not 0.0 < a < 1.0:
            raise ConfigError(f"VaR level must lie in (0, 1), got {a}")
    return out


def forecast_var(
    params: Sequence[ArmaGarchParams],
    vine: VineModel,
    states: Sequence[MarginState],
    levels=DEFAULT_LEVELS,
    draws: int = 10_000,
    seed=None,
) -> VarForecast:
    """One-day-ahead VaR of the equally weighted portfolio by simulation.

    Draws ``draws`` vectors from the vine, maps each coordinate to an
    innovation of its margin, rolls the margins one step forward and takes
    the ``1 - alpha`` empirical quantile of the portfolio returns.
    """
    levels = _check_levels(levels)
    if int(draws) < 1000:
        raise ConfigError(f"at least 1000 draws are required, got {draws}")
    if not (len(params) == len(states) == vine.d):
        raise InputError(f"{len(params)} margins and {len(states)} states for a {vine.d}-dimensional vine")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = rvine_sample(vine, int(draws), rng)
    y = np.zeros(int(draws))
    mean_total = 0.0
    for k, (p, s) in enumerate(zip(params, states)):
        mean, sd = s.forecast(p)
        y += mean + sd * std_t_ppf(u[:, k], p.nu)
        mean_total += mean
    y /= vine.d
    q = np.quantile(y, [1.0 - a for a in levels])
    return VarForecast({a: float(v) for a, v in zip(levels, q)}, int(draws), mean_total / vine.d)


# ---------------------------------------------------------------------------
# Coverage test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoverageResult:
    lr_uc: float
    lr_ind: float
    lr_cc: float
    pvalue: float
    n: int
    exceedances: int
    boundary: bool = False


def _bernoulli_ll(n0: float, n1: float, p: float) -> float:
    return float(special.xlogy(n0, 1.0 - p) + special.xlogy(n1, p))


def coverage_test(indicators, alpha: float) -> CoverageResult:
    """Conditional coverage likelihood-ratio test for VaR exceedances.

    The sum of the unconditional coverage statistic (expected rate
    ``1 - alpha``) and the first-order Markov independence statistic is
    referred to a chi-square with two degrees of freedom.  Series with no
    exceedances or only exceedances get half an observation added to the
    empty class before the unconditional statistic is computed; the
    independence statistic is then zero and ``boundary`` is set.
    """
    hits = np.asarray(indicators)
    if hits.ndim != 1:
        raise InputError("indicators must be one-dimensional")
    if hits.size < MIN_COVERAGE_LENGTH:
        raise InputError(f"coverage test needs at least {MIN_COVERAGE_LENGTH} indicators, got {hits.size}")
    if not np.all((hits == 0) | (hits == 1)):
        raise InputError("indicators must be 0 or 1")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"level must lie in (0, 1), got {alpha}")
    hits = hits.astype(int)
    p = 1.0 - alpha
    n = hits.size
    n1 = int(hits.sum())
    n0 = n - n1
    boundary = n1 == 0 or n0 == 0
    c0, c1 = (n0 + 0.5, float(n1)) if n0 == 0 else (float(n0), n1 + 0.5) if n1 == 0 else (float(n0), float(n1))
    pi_hat = c1 / (c0 + c1)
    lr_uc = -2.0 * (_bernoulli_ll(c0, c1, p) - _bernoulli_ll(c0, c1, pi_hat))

    prev, cur = hits[:-1], hits[1:]
    n00 = int(np.sum((prev == 0) & (cur == 0)))
    n01 = int(np.sum((prev == 0) & (cur == 1)))
    n10 = int(np.sum((prev == 1) & (cur == 0)))
    n11 = int(np.sum((prev == 1) & (cur == 1)))
    if boundary:
        lr_ind = 0.0
    else:
        pi01 = n01 / (n00 + n01) if n00 + n01 else 0.0
        pi11 = n11 / (n10 + n11) if n10 + n11 else 0.0
        pi = (n01 + n11) / (n - 1)
        restricted = _bernoulli_ll(n00 + n10, n01 + n11, pi)
        unrestricted = _bernoulli_ll(n00, n01, pi01) + _bernoulli_ll(n10, n11, pi11)
        lr_ind = max(-2.0 * (restricted - unrestricted), 0.0)
    lr_uc = max(lr_uc, 0.0)
    lr_cc = lr_uc + lr_ind
    return CoverageResult(lr_uc, lr_ind, lr_cc, float(stats.chi2.sf(lr_cc, 2)), n, n1, boundary)


# ---------------------------------------------------------------------------
# Rolling backtest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BacktestConfig:
    fit: FitConfig = field(default_factory=FitConfig)
    levels: tuple[float, ...] = DEFAULT_LEVELS
    draws: int = 10_000
    seed: int = 0
    form: VarianceForm = VarianceForm.STANDARDIZED
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "levels", _check_levels(self.levels))
        object.__setattr__(self, "form", VarianceForm(self.form))
        if int(self.draws) < 1000:
            raise ConfigError(f"at least 1000 draws are required, got {self.draws}")
        if int(self.threads) < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")


@dataclass
class BacktestReport:
    levels: tuple[float, ...]
    returns: np.ndarray = field(repr=False)
    var: np.ndarray = field(repr=False)  # (days, levels)
    indicators: np.ndarray = field(repr=False)  # (days, levels), 1 when the return falls below the VaR
    coverage: dict = field(default_factory=dict)
    windows: list[tuple[int, int]] = field(default_factory=list)
    degenerate: list[int] = field(default_factory=list)
    sparsity: list[float] = field(default_factory=list)

    @property
    def frequencies(self) -> dict[float, float]:
        return {a: float(self.indicators[:, j].mean()) for j, a in enumerate(self.levels)}

    @property
    def pvalues(self) -> dict[float, float]:
        return {a: c.pvalue for a, c in self.coverage.items()}


def fit_margins(window: np.ndarray, form: VarianceForm = VarianceForm.STANDARDIZED, threads: int = 1) -> list[MarginalFit]:
    """ARMA-GARCH fits of every column of a returns matrix."""
    cols = [window[:, k] for k in range(window.shape[1])]

    def one(k):
        try:
            return fit_arma_garch(cols[k], form)
        except FitError as exc:
            raise FitError(f"asset {k}: {exc}", best=exc.best) from exc

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(one, range(len(cols))))
    return [one(k) for k in range(len(cols))]


def rolling_backtest(panel, train: int, test: int, config: BacktestConfig | None = None) -> BacktestReport:
    """Out-of-sample VaR exceedances of the equally weighted portfolio.

    Margins and vine are refit on the trailing ``train`` observations every
    ``test`` days; in between, margin states are updated daily with the
    observed returns.  Day ``t`` draws from its own random stream seeded
    by ``(seed, t)``.
    """
    config = config or BacktestConfig()
    x = np.asarray(panel, dtype=float)
    if x.ndim != 2 or x.shape[1] < 2:
        raise InputError(f"panel must be a T x d matrix with d >= 2, got shape {x.shape}")
    train, test = int(train), int(test)
    if test < 1:
        raise ConfigError(f"test window must be positive, got {test}")
    if train < MIN_SERIES_LENGTH:
        raise ConfigError(f"training window must be at least {MIN_SERIES_LENGTH}, got {train}")
    n_obs, d = x.shape
    if n_obs < train + test:
        raise ConfigError(f"panel has {n_obs} rows, need train + test = {train + test}")
    bad = np.argwhere(~np.isfinite(x))
    if bad.size:
        r, c = bad[0]
        raise InputError(f"non-finite return at row {r}, column {c}")

    fit_config = config.fit.replace(threads=config.threads)
    levels = config.levels
    days = list(range(train, n_obs))
    var = np.empty((len(days), len(levels)))
    report = BacktestReport(levels, x[train:].mean(axis=1), var, np.zeros_like(var, dtype=int))
    row = 0
    for start in range(train, n_obs, test):
        stop = min(start + test, n_obs)
        report.windows.append((start, stop))
        if np.any(np.ptp(x[start:stop], axis=0) == 0.0):
            warnings.warn(f"constant returns in test window starting at {start}", DegenerateDataWarning, stacklevel=2)
            report.degenerate.append(start)
        margins = fit_margins(x[start - train : start], config.form, config.threads)
        u = np.column_stack([pit(m) for m in margins])
        vine = vfit.fit(u, fit_config)
        report.sparsity.append(vine.sparsity)
        params = [m.params for m in margins]
        states = [m.state for m in margins]
        for t in range(start, stop):
            rng = np.random.default_rng(np.random.SeedSequence([config.seed, t]))
            fc = forecast_var(params, vine, states, levels, config.draws, rng)
            var[row] = [fc.levels[a] for a in levels]
            states = [s.advance(p, x[t, k]) for k, (p, s) in enumerate(zip(params, states))]
            row += 1
    report.indicators = (report.returns[:, None] < var).astype(int)
    for j, a in enumerate(levels):
        if len(days) >= MIN_COVERAGE_LENGTH:
            report.coverage[a] = coverage_test(report.indicators[:, j], a)
    return report


def write_backtest_table(reports: Mapping[str, BacktestReport], fh: TextIO) -> None:
    """Exceedance frequencies and coverage p-values, one column per model and level."""
    if not reports:
        raise ConfigError("no backtest reports to write")
    header = ["row"]
    freq = ["exceedances"]
    pval = ["p-value"]
    for name, rep in reports.items():
        for a in rep.levels:
            header.append(f"{name}@{a:g}")
            freq.append(f"{rep.frequencies[a]:.6f}")
            cov = rep.coverage.get(a)
            pval.append("nan" if cov is None else f"{cov.pvalue:.6f}")
    first = next(iter(reports.values()))
    fh.write("# one-day-ahead VaR of the equally weighted portfolio; exceedance = return below VaR\n")
    fh.write(f"# test days = {len(first.returns)}, refit windows = {len(first.windows)}\n")
    for line in (header, freq, pval):
        fh.write(",".join(line) + "\n")
