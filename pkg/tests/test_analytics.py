"""Closed-form slope algebra: identities, limits, and monotonicity."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from causalbeta.analytics import (
    CURVE_COLUMNS,
    DEFAULT_SIGMA_X_GRID,
    ChainParams,
    ForkParams,
    attenuation_curve,
    chain_beta,
    fork_beta,
    fork_residual_loading,
)
from causalbeta.errors import ValidationError

nonzero = st.floats(min_value=0.05, max_value=8.0, allow_nan=False).flatmap(
    lambda v: st.sampled_from([v, -v])
)
sigma = st.floats(min_value=0.0, max_value=8.0, allow_nan=False)
sigma_pos = st.floats(min_value=0.01, max_value=8.0, allow_nan=False)


class TestForkBeta:
    def test_textbook_point(self):
        p = ForkParams(a=1.0, b=1.0, sigma_z=1.0, sigma_x=0.5, sigma_y=1.0)
        slope = fork_beta(p)
        assert slope.beta == pytest.approx(0.8)
        assert slope.attenuation == pytest.approx(0.8)
        assert slope.signal_ratio == 1.0

    def test_noiseless_regressor_recovers_signal_ratio(self):
        p = ForkParams(a=2.0, b=3.0, sigma_z=1.0, sigma_x=0.0, sigma_y=1.0)
        slope = fork_beta(p)
        assert slope.attenuation == 1.0
        assert slope.beta == pytest.approx(1.5)

    @given(a=nonzero, b=nonzero, sz=sigma_pos, sx=sigma, sy=sigma)
    def test_beta_is_exactly_ratio_times_attenuation(self, a, b, sz, sx, sy):
        slope = fork_beta(ForkParams(a=a, b=b, sigma_z=sz, sigma_x=sx, sigma_y=sy))
        assert slope.beta == slope.signal_ratio * slope.attenuation  # bit-exact
        assert 0.0 < slope.attenuation <= 1.0

    @given(a=nonzero, b=nonzero, sz=sigma_pos, sx=sigma, sy=sigma)
    def test_loading_is_exactly_complement(self, a, b, sz, sx, sy):
        p = ForkParams(a=a, b=b, sigma_z=sz, sigma_x=sx, sigma_y=sy)
        loading = fork_residual_loading(p)
        assert loading == p.b - p.a * fork_beta(p).beta  # bit-exact
        # hedged loading plus what the hedge removed reconstructs b (one rounding)
        assert p.a * fork_beta(p).beta + loading == pytest.approx(p.b, rel=1e-12, abs=1e-12)

    @given(a=nonzero, b=nonzero, sz=sigma_pos, sy=sigma)
    def test_beta_shrinks_and_loading_grows_with_observation_noise(self, a, b, sz, sy):
        grid = [0.0, 0.5, 1.0, 2.0, 4.0]
        betas = [abs(fork_beta(ForkParams(a, b, sz, sx, sy)).beta) for sx in grid]
        loads = [abs(fork_residual_loading(ForkParams(a, b, sz, sx, sy))) for sx in grid]
        assert betas == sorted(betas, reverse=True)
        assert loads == sorted(loads)

    def test_agrees_with_covariance_arithmetic(self):
        # independent route: beta = Cov(X, Y) / Var(X) from the model moments
        a, b, sz, sx = 1.3, -0.4, 0.9, 0.7
        p = ForkParams(a=a, b=b, sigma_z=sz, sigma_x=sx, sigma_y=1.0)
        cov_xy = a * b * sz**2
        var_x = a**2 * sz**2 + sx**2
        assert fork_beta(p).beta == pytest.approx(cov_xy / var_x, rel=1e-14)
        assert fork_residual_loading(p) == pytest.approx(b * sx**2 / var_x, rel=1e-12)

    def test_rejects_zero_a_and_twin_zero_noise(self):
        with pytest.raises(ValidationError, match="bad_params"):
            ForkParams(a=0.0, b=1.0, sigma_z=1.0, sigma_x=0.5, sigma_y=1.0)
        with pytest.raises(ValidationError, match="bad_params"):
            ForkParams(a=1.0, b=1.0, sigma_z=0.0, sigma_x=0.0, sigma_y=1.0)


class TestChainBeta:
    @given(
        a=nonzero,
        c=st.floats(min_value=-3.0, max_value=3.0, allow_nan=False),
        sz=sigma_pos,
        sx=sigma,
        sy=sigma,
    )
    def test_slope_equals_structural_coefficient_for_any_noise(self, a, c, sz, sx, sy):
        p = ChainParams(a=a, c=c, sigma_z=sz, sigma_x=sx, sigma_y=sy)
        assert chain_beta(p) == c

    def test_degenerate_regressor_rejected(self):
        with pytest.raises(ValidationError, match="bad_params"):
            ChainParams(a=1.0, c=1.0, sigma_z=0.0, sigma_x=0.0, sigma_y=1.0)


class TestAttenuationCurve:
    def test_default_grid_shape_and_columns(self):
        p = ForkParams(a=1.0, b=1.0, sigma_z=1.0, sigma_x=0.0, sigma_y=1.0)
        frame = attenuation_curve(p)
        assert list(frame.columns) == list(CURVE_COLUMNS)
        assert len(frame) == len(DEFAULT_SIGMA_X_GRID) == 21
        assert frame["sigma_x"].tolist() == list(DEFAULT_SIGMA_X_GRID)

    def test_rows_match_pointwise_closed_forms(self):
        p = ForkParams(a=1.2, b=0.7, sigma_z=1.1, sigma_x=0.0, sigma_y=0.9)
        frame = attenuation_curve(p, (0.0, 1.0, 3.0))
        for _, row in frame.iterrows():
            q = ForkParams(a=1.2, b=0.7, sigma_z=1.1, sigma_x=row["sigma_x"], sigma_y=0.9)
            assert row["beta"] == fork_beta(q).beta
            assert row["lambda"] == fork_beta(q).attenuation
            assert row["residual_loading"] == fork_residual_loading(q)

    def test_monotone_for_positive_parameters(self):
        p = ForkParams(a=1.0, b=1.0, sigma_z=1.0, sigma_x=0.0, sigma_y=1.0)
        frame = attenuation_curve(p)
        beta = frame["beta"].to_numpy()
        loading = frame["residual_loading"].to_numpy()
        assert (np.diff(beta) <= 0).all()
        assert (np.diff(loading) >= 0).all()

    def test_bad_grids_rejected(self):
        p = ForkParams(a=1.0, b=1.0, sigma_z=1.0, sigma_x=0.0, sigma_y=1.0)
        with pytest.raises(ValidationError, match="bad_grid"):
            attenuation_curve(p, ())
        with pytest.raises(ValidationError, match="bad_grid"):
            attenuation_curve(p, (0.5, -0.1))
        with pytest.raises(ValidationError, match="bad_grid"):
            attenuation_curve(p, (float("inf"),))
