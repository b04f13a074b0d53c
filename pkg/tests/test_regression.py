"""Regression engine, cross-checked against statsmodels and raw moments."""

import numpy as np
import pytest
import statsmodels.api as sm

from causalbeta.errors import RegressionError, ValidationError
from causalbeta.regression import (
    DesignMatrix,
    SeKind,
    beta_neutral_residual,
    interaction_fit,
    lag_profile,
    ols,
)


def _toy(n=400, seed=0, k=3):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, k))
    beta = np.arange(1, k + 1) * 0.5
    y = 1.5 + x @ beta + rng.standard_normal(n) * (1.0 + 0.5 * (x[:, 0] > 0))
    cluster = rng.integers(0, 25, size=n).astype("U4")
    return y, x, cluster


def _design(y, x, cluster=None, env=None):
    named = {f"x{j}": x[:, j] for j in range(x.shape[1])}
    return DesignMatrix.build(y, named, cluster_id=cluster, environment=env)


def _sm_exog(x):
    return sm.add_constant(x, prepend=True)


class TestOlsAgainstStatsmodels:
    def test_classical_coefficients_and_errors(self):
        y, x, _ = _toy()
        fit = ols(_design(y, x))
        ref = sm.OLS(y, _sm_exog(x)).fit()
        got = np.array([fit.coef["intercept"]] + [fit.coef[f"x{j}"] for j in range(3)])
        np.testing.assert_allclose(got, ref.params, rtol=1e-10)
        got_se = np.array([fit.se["intercept"]] + [fit.se[f"x{j}"] for j in range(3)])
        np.testing.assert_allclose(got_se, ref.bse, rtol=1e-10)
        assert fit.r_squared == pytest.approx(ref.rsquared, rel=1e-10)

    def test_heteroskedasticity_robust_errors(self):
        y, x, _ = _toy()
        fit = ols(_design(y, x), se_kind=SeKind.HC_ROBUST)
        ref = sm.OLS(y, _sm_exog(x)).fit(cov_type="HC1")
        got_se = np.array([fit.se["intercept"]] + [fit.se[f"x{j}"] for j in range(3)])
        np.testing.assert_allclose(got_se, ref.bse, rtol=1e-10)

    def test_cluster_errors(self):
        y, x, cluster = _toy()
        fit = ols(_design(y, x, cluster=cluster), se_kind=SeKind.CLUSTER_BY_DATE)
        ref = sm.OLS(y, _sm_exog(x)).fit(cov_type="cluster", cov_kwds={"groups": cluster})
        got_se = np.array([fit.se["intercept"]] + [fit.se[f"x{j}"] for j in range(3)])
        np.testing.assert_allclose(got_se, ref.bse, rtol=1e-10)

    def test_cluster_with_singleton_clusters_equals_hc1(self):
        # G == n makes the small-sample factors coincide by construction
        y, x, _ = _toy(n=120)
        singleton = np.arange(120).astype(str)
        clustered = ols(_design(y, x, cluster=singleton), se_kind=SeKind.CLUSTER_BY_DATE)
        robust = ols(_design(y, x), se_kind=SeKind.HC_ROBUST)
        for name in clustered.se:
            assert clustered.se[name] == pytest.approx(robust.se[name], rel=1e-12)

    def test_residuals_and_moment_identities(self):
        # independent route: normal equations on centered two-pass moments
        y, x, _ = _toy(n=300, seed=4, k=2)
        fit = ols(_design(y, x))
        assert fit.residuals.sum() == pytest.approx(0.0, abs=1e-8)
        for j in range(2):
            assert float(fit.residuals @ x[:, j]) == pytest.approx(0.0, abs=1e-7)
        xc = x - x.mean(axis=0)
        slopes = np.linalg.solve(xc.T @ xc, xc.T @ (y - y.mean()))
        for j in range(2):
            assert fit.coef[f"x{j}"] == pytest.approx(slopes[j], rel=1e-10)


class TestOlsValidation:
    def test_rank_deficient_design_rejected(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal(100)
        y = rng.standard_normal(100)
        with pytest.raises(RegressionError, match="rank_deficient"):
            ols(DesignMatrix.build(y, {"a": a, "b": 2.0 * a}))

    def test_more_columns_than_rows_rejected(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((3, 3))
        with pytest.raises(RegressionError, match="insufficient_observations"):
            ols(DesignMatrix.build(rng.standard_normal(3), {f"x{j}": x[:, j] for j in range(3)}))

    def test_constant_regressor_rejected_at_build(self):
        with pytest.raises(ValidationError, match="constant_column"):
            DesignMatrix.build(np.arange(5.0), {"c": np.ones(5)})

    def test_nonfinite_values_rejected(self):
        with pytest.raises(ValidationError, match="nonfinite"):
            DesignMatrix.build(np.array([1.0, np.nan, 2.0]), {"x": np.arange(3.0)})

    def test_cluster_errors_require_cluster_ids(self):
        y, x, _ = _toy(n=50)
        with pytest.raises(ValidationError, match="missing_cluster_id"):
            ols(_design(y, x), se_kind=SeKind.CLUSTER_BY_DATE)

    def test_single_cluster_rejected(self):
        y, x, _ = _toy(n=50)
        ones = np.zeros(50).astype(str)
        with pytest.raises(RegressionError, match="too_few_clusters"):
            ols(_design(y, x, cluster=ones), se_kind=SeKind.CLUSTER_BY_DATE)


class TestBetaNeutralResidual:
    def test_residual_is_orthogonal_to_regressor(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal(500)
        y = 0.4 + 1.3 * x + rng.standard_normal(500)
        slope, resid = beta_neutral_residual(y, x)
        assert slope == pytest.approx(1.3, abs=0.2)
        assert float(resid @ x) == pytest.approx(0.0, abs=1e-8)
        assert resid.sum() == pytest.approx(0.0, abs=1e-8)

    def test_matches_direct_two_pass_computation(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal(200)
        y = rng.standard_normal(200)
        slope = np.cov(x, y, ddof=1)[0, 1] / np.var(x, ddof=1)
        expected = y - (y.mean() - slope * x.mean()) - slope * x
        got_slope, got_resid = beta_neutral_residual(y, x)
        assert got_slope == pytest.approx(slope, rel=1e-10)
        np.testing.assert_allclose(got_resid, expected, atol=1e-10)

    def test_degenerate_regressor_rejected(self):
        with pytest.raises(RegressionError, match="degenerate_regressor"):
            beta_neutral_residual(np.arange(5.0), np.ones(5))

    def test_too_short_series_rejected(self):
        with pytest.raises(RegressionError, match="insufficient_observations"):
            beta_neutral_residual(np.array([1.0, 2.0]), np.array([0.0, 1.0]))


class TestInteractionFit:
    def _panel(self, seed=0, n_per=300):
        rng = np.random.default_rng(seed)
        envs = np.repeat(np.array(["calm", "storm", "wild"]), n_per)
        x = rng.standard_normal(3 * n_per)
        slopes = np.where(envs == "calm", 0.8, np.where(envs == "storm", 1.2, 1.0))
        y = 0.3 + slopes * x + rng.standard_normal(3 * n_per) * 0.7
        return y, x, envs

    def test_slopes_match_separate_per_environment_fits(self):
        # with nothing but the interacted regressor the pooled fit must
        # reproduce each environment's own two-variable regression exactly
        y, x, envs = self._panel()
        design = DesignMatrix.build(y, {"x": x}, environment=envs)
        result = interaction_fit(design, base_env="calm")
        for env in ("calm", "storm", "wild"):
            mask = envs == env
            ref = sm.OLS(y[mask], sm.add_constant(x[mask])).fit()
            assert result.slopes[env].beta == pytest.approx(ref.params[1], rel=1e-9)

    def test_delta_method_errors_match_statsmodels_on_expanded_design(self):
        y, x, envs = self._panel(seed=3)
        design = DesignMatrix.build(y, {"x": x}, environment=envs)
        result = interaction_fit(design, base_env="calm")
        # oracle: build the same dummy-and-interaction columns by hand
        d_storm = (envs == "storm").astype(float)
        d_wild = (envs == "wild").astype(float)
        exog = np.column_stack([np.ones_like(x), x, d_storm, d_wild, x * d_storm, x * d_wild])
        ref = sm.OLS(y, exog).fit()
        cov = ref.cov_params()
        assert result.slopes["calm"].se == pytest.approx(ref.bse[1], rel=1e-9)
        for env, col in (("storm", 4), ("wild", 5)):
            se = np.sqrt(cov[1, 1] + cov[col, col] + 2.0 * cov[1, col])
            assert result.slopes[env].se == pytest.approx(se, rel=1e-9)
            assert result.slopes[env].beta == pytest.approx(ref.params[1] + ref.params[col], rel=1e-9)

    def test_missing_base_environment_rejected(self):
        y, x, envs = self._panel()
        design = DesignMatrix.build(y, {"x": x}, environment=envs)
        with pytest.raises(RegressionError, match="missing_base_env"):
            interaction_fit(design, base_env="nope")

    def test_thin_environment_rejected(self):
        rng = np.random.default_rng(5)
        envs = np.array(["base"] * 100 + ["thin"] * 5)
        x = rng.standard_normal(105)
        y = x + rng.standard_normal(105)
        design = DesignMatrix.build(y, {"x": x}, environment=envs)
        with pytest.raises(RegressionError, match="thin_environment"):
            interaction_fit(design, base_env="base", min_env_rows=30)

    def test_environment_required(self):
        y, x, _ = self._panel()
        design = DesignMatrix.build(y, {"x": x})
        with pytest.raises(ValidationError, match="missing_environment"):
            interaction_fit(design, base_env="calm")


class TestLagProfile:
    def test_recovers_distributed_lag_coefficients(self):
        rng = np.random.default_rng(11)
        n = 5000
        x = rng.standard_normal(n)
        y = np.zeros(n)
        y[2:] = 0.9 * x[1:-1] + 0.3 * x[:-2]
        y += 0.1 * rng.standard_normal(n)
        rows = lag_profile(y, x, controls=None, max_lag=3)
        by_lag = {r.lag: r for r in rows}
        assert by_lag[0].coef == pytest.approx(0.0, abs=0.02)
        assert by_lag[1].coef == pytest.approx(0.9, abs=0.02)
        assert by_lag[2].coef == pytest.approx(0.3, abs=0.02)
        assert by_lag[3].coef == pytest.approx(0.0, abs=0.02)

    def test_matches_statsmodels_on_manually_lagged_design(self):
        rng = np.random.default_rng(12)
        n = 400
        x = rng.standard_normal(n)
        y = rng.standard_normal(n)
        rows = lag_profile(y, x, controls=None, max_lag=2)
        lagged = np.column_stack([x[2:], x[1:-1], x[:-2]])
        ref = sm.OLS(y[2:], sm.add_constant(lagged)).fit()
        for k, row in enumerate(rows):
            assert row.coef == pytest.approx(ref.params[k + 1], rel=1e-9)
            assert row.se == pytest.approx(ref.bse[k + 1], rel=1e-9)

    def test_controls_enter_contemporaneously(self):
        rng = np.random.default_rng(13)
        n = 3000
        w = rng.standard_normal(n)
        x = rng.standard_normal(n)
        y = np.zeros(n)
        y[1:] = 0.5 * x[:-1]
        y += 2.0 * w + 0.1 * rng.standard_normal(n)
        naked = {r.lag: r for r in lag_profile(y, x, controls=None, max_lag=1)}
        adjusted = {r.lag: r for r in lag_profile(y, x, controls={"w": w}, max_lag=1)}
        assert adjusted[1].coef == pytest.approx(0.5, abs=0.02)
        assert adjusted[1].se < naked[1].se  # the control soaks up variance

    def test_needs_enough_rows_after_trimming(self):
        with pytest.raises(RegressionError, match="insufficient_observations"):
            lag_profile(np.arange(6.0), np.arange(6.0) ** 2, controls=None, max_lag=4)
