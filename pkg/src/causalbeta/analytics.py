"""Closed-form population slopes for the two canonical three-node models.

Under a common driver (Z feeding both the index X and the asset Y), the
regression slope of Y on X is the signal ratio b/a shrunk by an
errors-in-variables attenuation factor, and hedging out the fitted slope
leaves a residual that still loads on the driver.  Under a lagged chain
(Z -> X -> Y) the correctly timed slope equals the structural coefficient
exactly, independent of every noise scale.  These formulas are the oracles
the Monte Carlo layer is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isfinite

import pandas as pd

from .errors import ValidationError

# sigma_x in [0, 5] stepping by 0.25; the attenuation-curve default
DEFAULT_SIGMA_X_GRID: tuple[float, ...] = tuple(0.25 * i for i in range(21))

CURVE_COLUMNS = ("sigma_x", "beta", "lambda", "residual_loading")


def _check_sigma(name: str, value: float) -> float:
    value = float(value)
    if not isfinite(value) or value < 0:
        raise ValidationError("bad_params", f"{name} must be a nonnegative real, got {value!r}")
    return value


@dataclass(frozen=True)
class ForkParams:
    """Common-driver model X = a*Z + U_X, Y = b*Z + U_Y."""

    a: float
    b: float
    sigma_z: float
    sigma_x: float
    sigma_y: float

    def __post_init__(self):
        for name in ("sigma_z", "sigma_x", "sigma_y"):
            object.__setattr__(self, name, _check_sigma(name, getattr(self, name)))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not isfinite(self.a) or self.a == 0.0:
            raise ValidationError("bad_params", "a must be finite and nonzero")
        if not isfinite(self.b):
            raise ValidationError("bad_params", "b must be finite")
        if self.sigma_z == 0.0 and self.sigma_x == 0.0:
            raise ValidationError("bad_params", "sigma_z and sigma_x cannot both be zero (Var(X) = 0)")


@dataclass(frozen=True)
class ChainParams:
    """Lagged-chain model X = a*Z + U_X, next-period Y = c*X + U_Y."""

    a: float
    c: float
    sigma_z: float
    sigma_x: float
    sigma_y: float

    def __post_init__(self):
        for name in ("sigma_z", "sigma_x", "sigma_y"):
            object.__setattr__(self, name, _check_sigma(name, getattr(self, name)))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "c", float(self.c))
        if not (isfinite(self.a) and isfinite(self.c)):
            raise ValidationError("bad_params", "a and c must be finite")
        if self.a * self.a * self.sigma_z**2 + self.sigma_x**2 <= 0.0:
            raise ValidationError("bad_params", "Var(X) must be positive")


@dataclass(frozen=True)
class ForkSlope:
    """Population regression slope of Y on X under the common-driver model.

    ``beta == signal_ratio * attenuation`` holds bit-exactly because that is
    how beta is computed; ``attenuation`` is 1 iff sigma_x is 0 and lies in
    (0, 1] whenever sigma_z > 0.
    """

    beta: float
    attenuation: float
    signal_ratio: float


def fork_beta(p: ForkParams) -> ForkSlope:
    """Slope, attenuation factor, and signal ratio for the common-driver model.

    beta = (b/a) * a^2 sigma_z^2 / (a^2 sigma_z^2 + sigma_x^2): the signal
    ratio shrunk by the share of Var(X) that the driver explains.
    """
    signal_var = p.a * p.a * p.sigma_z * p.sigma_z
    attenuation = signal_var / (signal_var + p.sigma_x * p.sigma_x)
    signal_ratio = p.b / p.a
    return ForkSlope(beta=signal_ratio * attenuation, attenuation=attenuation, signal_ratio=signal_ratio)


def fork_residual_loading(p: ForkParams) -> float:
    """Driver loading of the hedged series Y - beta*X, i.e. b - a*beta.

    Computed literally as b - a*beta, so that identity holds bit-for-bit
    against fork_beta; algebraically it equals b*sigma_x^2/(a^2 sigma_z^2 +
    sigma_x^2), which grows toward b as the index noise swamps the signal.
    """
    return p.b - p.a * fork_beta(p).beta


def chain_beta(p: ChainParams) -> float:
    """Correctly timed slope under the chain: the structural c, exactly.

    Takes the full parameter set despite using only c, so the noise
    independence is a testable statement about this function rather than a
    convention baked into its signature.
    """
    return p.c


def attenuation_curve(p: ForkParams, sigma_x_grid=DEFAULT_SIGMA_X_GRID) -> pd.DataFrame:
    """Closed-form curve over an index-noise grid.

    Returns one row per grid value with columns (sigma_x, beta, lambda,
    residual_loading), in grid order.  With a, b, sigma_z all positive, beta
    is nonincreasing and the loading nondecreasing along an increasing grid.
    """
    grid = [float(s) for s in sigma_x_grid]
    if not grid:
        raise ValidationError("bad_grid", "sigma_x grid must be non-empty")
    rows = []
    for sigma_x in grid:
        if not isfinite(sigma_x) or sigma_x < 0:
            raise ValidationError("bad_grid", f"grid values must be nonnegative reals, got {sigma_x!r}")
        q = ForkParams(a=p.a, b=p.b, sigma_z=p.sigma_z, sigma_x=sigma_x, sigma_y=p.sigma_y)
        slope = fork_beta(q)
        rows.append((sigma_x, slope.beta, slope.attenuation, fork_residual_loading(q)))
    return pd.DataFrame(rows, columns=list(CURVE_COLUMNS))
