"""Deterministic OLS machinery shared by the analytics and diagnostics layers.

Everything here is plain numpy: QR-based least squares with a condition
guard, three standard-error flavors (classical, heteroskedasticity-robust,
cluster-by-date), interaction designs for environment-specific slopes, and
distributed-lag designs.  No fitting routine mutates its inputs and repeated
calls are bit-identical, which the batch layer relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import RegressionError, ValidationError

INTERCEPT = "intercept"

# Reject designs whose column condition number exceeds this.
COND_LIMIT = 1e10


class SeKind(Enum):
    CLASSICAL = "classical"
    HC_ROBUST = "heteroskedasticity_robust"
    CLUSTER_BY_DATE = "cluster_by_date"


@dataclass(frozen=True)
class DesignMatrix:
    """A fully materialized regression problem.

    The intercept is always present and always first.  Rows with missing
    values never reach this type; alignment and dropping happen upstream.
    ``environment`` carries optional per-row regime labels consumed by
    :func:`interaction_fit`; ``cluster_id`` carries the grouping key for
    cluster-robust standard errors.
    """

    X: np.ndarray
    column_names: tuple[str, ...]
    y: np.ndarray
    cluster_id: np.ndarray | None = None
    environment: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ValidationError("shape_mismatch", f"X is {X.shape}, y is {y.shape}")
        if len(self.column_names) != X.shape[1]:
            raise ValidationError("shape_mismatch", "one name per design column required")
        if len(set(self.column_names)) != len(self.column_names):
            raise ValidationError("duplicate_column", "design column names must be unique")
        if not self.column_names or self.column_names[0] != INTERCEPT:
            raise ValidationError("missing_intercept", "first design column must be the intercept")
        if X.shape[0] and not np.all(X[:, 0] == 1.0):
            raise ValidationError("bad_intercept", "intercept column must be identically 1")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise ValidationError("nonfinite_values", "design contains non-finite values")
        for j in range(1, X.shape[1]):
            if X.shape[0] and np.ptp(X[:, j]) == 0.0:
                raise ValidationError("constant_column", f"column {self.column_names[j]!r} is constant")
        for name, attr in (("cluster_id", self.cluster_id), ("environment", self.environment)):
            if attr is not None:
                arr = np.asarray(attr)
                if arr.shape != (X.shape[0],):
                    raise ValidationError("shape_mismatch", f"{name} must have one entry per row")
                object.__setattr__(self, name, arr)

    @property
    def n_obs(self) -> int:
        return self.X.shape[0]

    @staticmethod
    def build(
        y,
        regressors: Mapping[str, Sequence[float]],
        cluster_id=None,
        environment=None,
    ) -> "DesignMatrix":
        """Assemble a design from named regressor vectors, intercept included."""
        y = np.asarray(y, dtype=np.float64)
        names = [INTERCEPT] + list(regressors)
        cols = [np.ones(y.shape[0])] + [np.asarray(v, dtype=np.float64) for v in regressors.values()]
        X = np.column_stack(cols) if cols else np.empty((y.shape[0], 0))
        return DesignMatrix(X=X, column_names=tuple(names), y=y, cluster_id=cluster_id, environment=environment)


@dataclass(frozen=True)
class RegressionFit:
    """OLS output: point estimates, chosen-flavor SEs, and the fit diagnostics.

    ``vcov`` is the full covariance of the coefficient vector in column
    order; interaction designs need it for linear-combination standard
    errors.
    """

    coef: dict[str, float]
    se: dict[str, float]
    residuals: np.ndarray
    r_squared: float
    n_obs: int
    se_kind: SeKind
    column_names: tuple[str, ...]
    vcov: np.ndarray

    def to_dict(self, include_residuals: bool = False) -> dict:
        out = {
            "coef": dict(self.coef),
            "se": dict(self.se),
            "r_squared": self.r_squared,
            "n_obs": self.n_obs,
            "se_kind": self.se_kind.value,
        }
        if include_residuals:
            out["residuals"] = self.residuals.tolist()
        return out


def _cluster_meat(X: np.ndarray, residuals: np.ndarray, cluster_id: np.ndarray) -> tuple[np.ndarray, int]:
    scores = X * residuals[:, None]
    _, codes = np.unique(cluster_id, return_inverse=True)
    n_clusters = int(codes.max()) + 1
    sums = np.zeros((n_clusters, X.shape[1]))
    np.add.at(sums, codes, scores)
    return sums.T @ sums, n_clusters


def ols(design: DesignMatrix, se_kind: SeKind = SeKind.CLASSICAL) -> RegressionFit:
    """Least squares via QR with a condition-number guard.

    In the bivariate case the slope equals sample Cov(x, y)/Var(x).  The
    cluster small-sample factor is G/(G-1) * (n-1)/(n-k), so that with every
    row its own cluster the result reproduces the HC1 scaling n/(n-k)
    exactly.
    """
    X, y = design.X, design.y
    n, k = X.shape
    if n <= k:
        raise RegressionError("insufficient_observations", f"{n} rows cannot identify {k} coefficients")

    Q, R = np.linalg.qr(X)
    singular_values = np.linalg.svd(R, compute_uv=False)
    if singular_values[-1] <= 0 or singular_values[0] / singular_values[-1] > COND_LIMIT:
        raise RegressionError("rank_deficient", "design columns are collinear beyond the condition limit")
    beta = np.linalg.solve(R, Q.T @ y)
    residuals = y - X @ beta
    rss = float(residuals @ residuals)

    r_inv = np.linalg.inv(R)
    xtx_inv = r_inv @ r_inv.T

    if se_kind is SeKind.CLASSICAL:
        vcov = xtx_inv * (rss / (n - k))
    elif se_kind is SeKind.HC_ROBUST:
        scores = X * residuals[:, None]
        vcov = xtx_inv @ (scores.T @ scores) @ xtx_inv * (n / (n - k))
    elif se_kind is SeKind.CLUSTER_BY_DATE:
        if design.cluster_id is None:
            raise ValidationError("missing_cluster_id", "cluster-robust SEs need a cluster_id on the design")
        meat, n_clusters = _cluster_meat(X, residuals, design.cluster_id)
        if n_clusters < 2:
            raise RegressionError("too_few_clusters", "cluster-robust SEs need at least 2 clusters")
        factor = (n_clusters / (n_clusters - 1)) * ((n - 1) / (n - k))
        vcov = xtx_inv @ meat @ xtx_inv * factor
    else:  # pragma: no cover - enum is closed
        raise ValidationError("bad_se_kind", f"unsupported SE kind {se_kind!r}")

    centered = y - y.mean()
    tss = float(centered @ centered)
    r_squared = 1.0 - rss / tss if tss > 0 else (1.0 if rss < 1e-300 else 0.0)

    names = design.column_names
    ses = np.sqrt(np.diag(vcov))
    return RegressionFit(
        coef={name: float(b) for name, b in zip(names, beta)},
        se={name: float(s) for name, s in zip(names, ses)},
        residuals=residuals,
        r_squared=float(r_squared),
        n_obs=n,
        se_kind=se_kind,
        column_names=names,
        vcov=vcov,
    )


def beta_neutral_residual(y, x) -> tuple[float, np.ndarray]:
    """Bivariate slope plus the hedged series y - alpha - beta*x.

    The residual has zero sample mean and zero sample covariance with x by
    construction; what it still correlates with is the interesting part.
    """
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if y.shape != x.shape or y.ndim != 1:
        raise ValidationError("shape_mismatch", "y and x must be equal-length vectors")
    if y.shape[0] < 3:
        raise RegressionError("insufficient_observations", "need at least 3 observations")
    if np.ptp(x) == 0.0 or np.var(x) == 0.0:
        raise RegressionError("degenerate_regressor", "x has zero variance")
    fit = ols(DesignMatrix.build(y, {"x": x}))
    return fit.coef["x"], fit.residuals


@dataclass(frozen=True)
class EnvSlope:
    beta: float
    se: float
    n_obs: int


@dataclass(frozen=True)
class InteractionResult:
    """Environment-specific slopes recovered from one pooled interaction fit."""

    slopes: dict[str, EnvSlope]
    base_env: str
    fit: RegressionFit

    def to_dict(self) -> dict:
        return {
            "base_env": self.base_env,
            "slopes": {
                env: {"beta": s.beta, "se": s.se, "n_obs": s.n_obs} for env, s in sorted(self.slopes.items())
            },
        }


def interaction_fit(
    design: DesignMatrix,
    base_env: str,
    se_kind: SeKind = SeKind.CLASSICAL,
    min_env_rows: int = 30,
) -> InteractionResult:
    """Environment-interacted regression of y on the design's first regressor.

    Fits y = a + b*x + sum over non-base environments e of
    (g_e * 1[env=e] + d_e * x * 1[env=e]) + controls, where x is the first
    non-intercept column and the remaining columns enter as controls.  The
    slope for the base environment is b; for any other environment it is
    b + d_e with a linear-combination standard error from the full
    coefficient covariance.
    """
    if design.environment is None:
        raise ValidationError("missing_environment", "design has no environment labels")
    if design.X.shape[1] < 2:
        raise ValidationError("missing_regressor", "interaction fit needs a slope regressor")
    env = np.asarray([str(e) for e in design.environment])
    # plain-str level names: iterating the numpy array would hand back np.str_,
    # which then leaks into slope keys and JSON output
    levels = sorted(str(e) for e in set(env))
    if base_env not in levels:
        raise RegressionError("missing_base_env", f"base environment {base_env!r} has no rows")
    others = [e for e in levels if e != base_env]
    for e in others:
        count = int((env == e).sum())
        if count < min_env_rows:
            raise RegressionError("thin_environment", f"environment {e!r} has {count} rows, floor is {min_env_rows}")

    x = design.X[:, 1]
    x_name = design.column_names[1]
    regressors: dict[str, np.ndarray] = {x_name: x}
    for e in others:
        mask = (env == e).astype(np.float64)
        regressors[f"env[{e}]"] = mask
        regressors[f"{x_name}:env[{e}]"] = x * mask
    for j in range(2, design.X.shape[1]):
        regressors[design.column_names[j]] = design.X[:, j]

    fit = ols(
        DesignMatrix.build(design.y, regressors, cluster_id=design.cluster_id),
        se_kind=se_kind,
    )
    names = list(fit.column_names)
    base_idx = names.index(x_name)
    slopes = {base_env: EnvSlope(fit.coef[x_name], fit.se[x_name], int((env == base_env).sum()))}
    for e in others:
        delta_idx = names.index(f"{x_name}:env[{e}]")
        beta_e = fit.coef[x_name] + fit.coef[f"{x_name}:env[{e}]"]
        var_e = (
            fit.vcov[base_idx, base_idx]
            + fit.vcov[delta_idx, delta_idx]
            + 2.0 * fit.vcov[base_idx, delta_idx]
        )
        slopes[e] = EnvSlope(float(beta_e), float(np.sqrt(max(var_e, 0.0))), int((env == e).sum()))
    return InteractionResult(slopes=slopes, base_env=base_env, fit=fit)


@dataclass(frozen=True)
class LagCoefficient:
    lag: int
    coef: float
    se: float


def as_control_block(controls, n_rows: int) -> tuple[list[str], np.ndarray]:
    """Normalize the accepted control container shapes to (names, matrix)."""
    if controls is None:
        return [], np.empty((n_rows, 0))
    if hasattr(controls, "columns"):  # pandas DataFrame
        names = [str(c) for c in controls.columns]
        return names, np.asarray(controls, dtype=np.float64)
    if isinstance(controls, Mapping):
        names = [str(k) for k in controls]
        return names, np.column_stack([np.asarray(v, dtype=np.float64) for v in controls.values()])
    arr = np.asarray(controls, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    return [f"control{j}" for j in range(arr.shape[1])], arr


def lag_profile(
    y,
    x,
    controls,
    max_lag: int,
    se_kind: SeKind = SeKind.CLASSICAL,
) -> list[LagCoefficient]:
    """Distributed-lag regression: y_t on x_t .. x_{t-max_lag} plus controls.

    One multiple regression containing all lags at once; the first max_lag
    rows (whose lags do not exist) are dropped.  Controls enter at time t.
    """
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if y.shape != x.shape or y.ndim != 1:
        raise ValidationError("shape_mismatch", "y and x must be equal-length vectors")
    if max_lag < 0:
        raise ValidationError("bad_lag", "max_lag must be >= 0")
    control_names, control_block = as_control_block(controls, y.shape[0])
    if control_block.shape[0] != y.shape[0]:
        raise ValidationError("shape_mismatch", "controls must align with y row for row")
    n_eff = y.shape[0] - max_lag
    n_regressors = max_lag + 1 + len(control_names) + 1
    if n_eff <= n_regressors:
        raise RegressionError(
            "insufficient_observations", f"{n_eff} usable rows for {n_regressors} coefficients"
        )

    regressors: dict[str, np.ndarray] = {}
    for k in range(max_lag + 1):
        regressors[f"x_lag{k}"] = x[max_lag - k : y.shape[0] - k]
    for name, col in zip(control_names, control_block.T):
        regressors[name] = col[max_lag:]
    fit = ols(DesignMatrix.build(y[max_lag:], regressors), se_kind=se_kind)
    return [LagCoefficient(k, fit.coef[f"x_lag{k}"], fit.se[f"x_lag{k}"]) for k in range(max_lag + 1)]
