import io
import math

import numpy as np
import pytest
from scipy import stats

import oracles
from sparsevine import bicop
from sparsevine.bicop import BicopModel
from sparsevine.errors import ConfigError, DegenerateDataWarning, DomainError, FitError, InputError
from sparsevine.fit import FitConfig, VineModel, independence_model
from sparsevine.risk import (
    ArmaGarchParams,
    BacktestConfig,
    MarginState,
    VarianceForm,
    coverage_test,
    filter_series,
    fit_arma_garch,
    forecast_var,
    pit,
    rolling_backtest,
    simulate_arma_garch,
    simulate_panel,
    standard_errors,
    std_t_cdf,
    std_t_ppf,
    write_backtest_table,
)
from sparsevine.structure import dvine

TRUE = ArmaGarchParams(mu=0.0, phi=0.1, psi=0.05, omega=0.05, alpha=0.08, beta=0.85, nu=6.0)


def test_params_validation():
    with pytest.raises(DomainError):
        ArmaGarchParams(0, 0, 0, 0.0, 0.1, 0.8, 6)
    with pytest.raises(DomainError):
        ArmaGarchParams(0, 0, 0, 0.1, -0.1, 0.8, 6)
    with pytest.raises(DomainError):
        ArmaGarchParams(0, 0, 0, 0.1, 0.1, 0.8, 2.0)
    assert TRUE.stationary
    assert not ArmaGarchParams(0, 0, 0, 0.1, 0.3, 0.8, 6).stationary


# ---------------------------------------------------------------- standardized t


def test_std_t_is_unit_variance_and_inverts():
    nu = 6.0
    p = np.linspace(0.01, 0.99, 99)
    scaled = stats.t.ppf(p, nu) / math.sqrt(stats.t.var(nu))
    assert np.allclose(std_t_ppf(p, nu), scaled, rtol=1e-9)
    p = np.linspace(0.001, 0.999, 101)
    assert np.allclose(std_t_cdf(std_t_ppf(p, nu), nu), p, atol=1e-12)


# ---------------------------------------------------------------- filtering and estimation


def test_filter_identity_and_lengths():
    x = simulate_arma_garch(TRUE, 400, seed=1)
    a, sd, eps = filter_series(TRUE, x)
    assert a.shape == sd.shape == eps.shape == x.shape
    assert np.allclose(a, sd * eps, rtol=0, atol=1e-10)


def test_filter_first_variance_is_presample():
    x = simulate_arma_garch(TRUE, 300, seed=2)
    _, sd, _ = filter_series(TRUE, x)
    assert sd[0] ** 2 == pytest.approx(np.var(x), rel=1e-12)


def test_variance_forms_differ_only_in_recursion():
    shock = ArmaGarchParams(0.0, 0.1, 0.05, 0.05, 0.08, 0.85, 6.0, form=VarianceForm.SHOCK)
    x = simulate_arma_garch(TRUE, 300, seed=3)
    a1, sd1, _ = filter_series(TRUE, x)
    a2, sd2, _ = filter_series(shock, x)
    assert np.allclose(a1, a2)
    assert sd1[0] == sd2[0] and not np.allclose(sd1, sd2)


def test_state_advance_matches_filter():
    x = simulate_arma_garch(TRUE, 300, seed=4)
    a, sd, eps = filter_series(TRUE, x[:-1])
    state = MarginState(float(x[-2]), float(a[-1]), float(eps[-1]), float(sd[-1] ** 2))
    a_all, sd_all, _ = filter_series(TRUE, x)
    nxt = state.advance(TRUE, x[-1])
    assert nxt.a == pytest.approx(a_all[-1], abs=1e-12)
    assert math.sqrt(nxt.sigma2) == pytest.approx(sd_all[-1], rel=1e-12)


def test_fit_covers_true_parameters():
    cover = np.zeros(7)
    reps = 20
    for r in range(reps):
        fit = fit_arma_garch(simulate_arma_garch(TRUE, 2000, seed=100 + r))
        se = standard_errors(fit)
        cover += np.abs(fit.params.as_array() - TRUE.as_array()) <= 3 * se
        assert np.allclose(fit.shocks, fit.volatility * fit.residuals, atol=1e-10)
    assert np.all(cover >= 0.85 * reps), cover


def test_white_noise_has_small_arma_terms():
    x = np.random.default_rng(7).standard_normal(2000)
    fit = fit_arma_garch(x)
    assert abs(fit.params.phi + fit.params.psi) <= 0.1
    assert fit.params.alpha + fit.params.beta < 1.0


def test_fit_errors():
    with pytest.raises(FitError):
        fit_arma_garch(np.full(300, 0.01))
    with pytest.raises(InputError):
        fit_arma_garch(np.zeros(100))
    x = np.random.default_rng(0).standard_normal(300)
    x[10] = np.inf
    with pytest.raises(InputError):
        fit_arma_garch(x)


def test_pit_values():
    fit = fit_arma_garch(simulate_arma_garch(TRUE, 500, seed=5))
    u = pit(fit)
    assert np.all((u > 0) & (u < 1))
    assert float(std_t_cdf(0.0, 6.0)) == 0.5
    assert float(std_t_cdf(1e6, 6.0)) == pytest.approx(1.0)
    assert float(std_t_cdf(1.0, 6.0)) == pytest.approx(oracles.std_t_cdf_quadrature(1.0, 6.0), abs=1e-8)


# ---------------------------------------------------------------- VaR forecasts


def test_var_independence_oracle():
    d, nu, draws, seed = 4, 5.0, 20_000, 11
    p = ArmaGarchParams(0.0, 0.0, 0.0, 0.02, 0.05, 0.9, nu)
    state = MarginState(0.0, 0.0, 0.0, 1.0)
    s = state.forecast(p)[1]
    fc = forecast_var([p] * d, independence_model(dvine(d)), [state] * d, (0.9, 0.99), draws, seed)
    u = np.random.default_rng(seed).random((draws, d))
    y = (s * stats.t.ppf(u, nu) * math.sqrt((nu - 2) / nu)).mean(axis=1)
    for a in (0.9, 0.99):
        assert fc.levels[a] == pytest.approx(np.quantile(y, 1 - a), rel=1e-9)


def test_var_monotone_in_level():
    vine = VineModel(dvine(2), {next(iter(dvine(2).all_edges())): BicopModel("gaussian", 0, (0.5,))})
    st_ = MarginState(0.0, 0.0, 0.0, 1.0)
    fc = forecast_var([TRUE] * 2, vine, [st_] * 2, (0.9, 0.95, 0.99), 5000, 0)
    assert fc.levels[0.9] > fc.levels[0.95] > fc.levels[0.99]


def test_var_monte_carlo_error_scales():
    d = 2
    vine = independence_model(dvine(d))
    st_ = MarginState(0.0, 0.0, 0.0, 1.0)
    est = {R: [forecast_var([TRUE] * d, vine, [st_] * d, (0.95,), R, s).levels[0.95] for s in range(60)] for R in (1000, 4000)}
    ratio = np.std(est[1000]) / np.std(est[4000])
    assert 1.4 <= ratio <= 2.9


def test_var_errors():
    vine = independence_model(dvine(3))
    st_ = MarginState(0.0, 0.0, 0.0, 1.0)
    with pytest.raises(InputError):
        forecast_var([TRUE] * 2, vine, [st_] * 2)
    with pytest.raises(ConfigError):
        forecast_var([TRUE] * 3, vine, [st_] * 3, draws=10)
    with pytest.raises(ConfigError):
        forecast_var([TRUE] * 3, vine, [st_] * 3, levels=(1.2,))


# ---------------------------------------------------------------- coverage test


def test_coverage_pvalues_uniform_under_null():
    # at length 252 the statistic is discrete; the mean p-value is about
    # 0.48 at the 0.9 level (0.45 at 0.95, 0.68 at 0.99)
    rng = np.random.default_rng(0)
    pv = [coverage_test((rng.random(252) < 0.1).astype(int), 0.9).pvalue for _ in range(500)]
    assert 0.45 <= np.mean(pv) <= 0.55


def test_coverage_power():
    rng = np.random.default_rng(1)
    rej = np.mean([coverage_test((rng.random(252) < 0.3).astype(int), 0.9).pvalue < 0.05 for _ in range(200)])
    assert rej >= 0.5


def test_coverage_exact_rate_zero_uc():
    hits = np.zeros(100, dtype=int)
    hits[::10] = 1
    res = coverage_test(hits, 0.9)
    assert res.lr_uc == pytest.approx(0.0, abs=1e-12)
    assert res.exceedances == 10 and res.n == 100


def test_coverage_boundary_and_errors():
    res = coverage_test(np.zeros(252, dtype=int), 0.99)
    assert res.boundary and res.lr_ind == 0.0 and 0 < res.pvalue <= 1
    assert coverage_test(np.ones(60, dtype=int), 0.9).boundary
    with pytest.raises(InputError):
        coverage_test(np.zeros(10), 0.9)
    with pytest.raises(InputError):
        coverage_test(np.full(60, 2), 0.9)


def test_coverage_detects_clustering():
    hits = np.zeros(500, dtype=int)
    hits[100:125] = 1  # right rate, all in one block
    res = coverage_test(hits, 0.95)
    assert res.lr_uc == pytest.approx(0.0, abs=1e-9)
    assert res.pvalue < 0.01


# ---------------------------------------------------------------- backtest


@pytest.fixture(scope="module")
def small_panel():
    truth = VineModel(dvine(3), {e: BicopModel("gaussian", 0, (0.5,)) if e.tree_level == 1 else bicop.INDEPENDENCE
                                 for e in dvine(3).all_edges()})
    return simulate_panel([TRUE] * 3, truth, 560, seed=3)


FAST = BacktestConfig(FitConfig(families=("gaussian",)), draws=1000, seed=5)


def test_backtest_shapes_and_determinism(small_panel):
    rep = rolling_backtest(small_panel, 300, 130, FAST)
    assert rep.var.shape == (260, 3) and rep.indicators.shape == (260, 3)
    assert rep.windows == [(300, 430), (430, 560)]
    assert np.all(rep.var[:, 0] > rep.var[:, 2])
    for j, a in enumerate(rep.levels):
        assert rep.frequencies[a] == rep.indicators[:, j].mean()
    again = rolling_backtest(small_panel, 300, 130, BacktestConfig(FAST.fit, draws=1000, seed=5, threads=2))
    assert np.array_equal(rep.var, again.var)
    buf = io.StringIO()
    write_backtest_table({"m": rep}, buf)
    lines = [ln for ln in buf.getvalue().splitlines() if not ln.startswith("#")]
    assert lines[0] == "row,m@0.9,m@0.95,m@0.99"
    assert lines[1].startswith("exceedances,") and lines[2].startswith("p-value,")


def test_backtest_flags_constant_window(small_panel):
    x = small_panel.copy()
    x[430:, 1] = 0.0
    with pytest.warns(DegenerateDataWarning):
        rep = rolling_backtest(x, 300, 130, FAST)
    assert rep.degenerate == [430]


def test_backtest_config_errors(small_panel):
    with pytest.raises(ConfigError):
        rolling_backtest(small_panel, 300, 0, FAST)
    with pytest.raises(ConfigError):
        rolling_backtest(small_panel, 100, 50, FAST)
    with pytest.raises(ConfigError):
        rolling_backtest(small_panel, 500, 100, FAST)
    with pytest.raises(ConfigError):
        BacktestConfig(draws=10)
