"""Seeded synthetic return panels with known causal structure.

Each factory builds a complete diagnostic inputs bundle (panel, macro
levels, sector returns, events, index weights) whose data-generating process
is one of the canonical stories: a common driver moving index and assets
together, a lagged chain through the index, or a chain from a heavyweight
asset into the index.  The driver is recoverable from the emitted macro
file by construction: the vix level is a running sum of the driver shocks,
so its first difference reproduces them exactly.  That is what makes these
bundles usable as ground truth for the diagnostics battery.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import serialize
from .analytics import ForkParams, fork_beta, fork_residual_loading
from .data_io import (
    EnvironmentLabeling,
    EventCalendar,
    LabelScheme,
    ReturnPanel,
    ShockControls,
    build_controls,
    label_environments,
)
from .errors import ValidationError
from .graphs import AggregatorSpec
from .scm import _draw_shocks

MARKET_ID = "MKT"

_BURN = 5  # pre-sample rows so lagged assemblies start stationary


@dataclass(frozen=True)
class SyntheticBundle:
    """Everything the diagnostics battery consumes, plus the generating truth."""

    panel: ReturnPanel
    macro: pd.DataFrame
    sector_map: dict[str, str]
    sector_returns: pd.DataFrame | None
    events: EventCalendar
    weights: dict[str, float]
    target_asset: str
    labeling: EnvironmentLabeling | None
    truth: dict = field(default_factory=dict)

    def controls(self, standardize: bool = False) -> ShockControls:
        return build_controls(self.panel, self.macro, self.sector_returns, standardize=standardize)

    def aggregator(self) -> AggregatorSpec:
        return AggregatorSpec(
            constituents=sorted(self.weights), weights=self.weights, target_asset=self.target_asset
        )


def _bdates(n_days: int, start: str = "2015-01-02") -> pd.DatetimeIndex:
    idx = pd.bdate_range(start, periods=n_days)
    idx.name = "date"
    return idx


def _normal(seed: int, name: str, n: int) -> np.ndarray:
    return _draw_shocks(seed, name, 0, 1.0, n, workers=1)


def _lag(series: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros_like(series)
    out[k:] = series[:-k] if k else series
    return out


def _macro_frame(seed: int, z: np.ndarray, dates: pd.DatetimeIndex) -> pd.DataFrame:
    """Macro levels whose derived proxies embed the true driver.

    vix_level cumulates the driver shocks, so delta_vix recovers them
    one-for-one; the other two series are independent distractors.
    """
    n = len(dates)
    rates = 2.0 + 0.05 * np.cumsum(_normal(seed, "RATES", n))
    dxy = 100.0 * np.exp(0.002 * np.cumsum(_normal(seed, "DXY", n)))
    return pd.DataFrame(
        {"vix_level": 20.0 + np.cumsum(z), "dgs10_level": rates, "dxy_level": dxy},
        index=dates,
    )


def _default_events(dates: pd.DatetimeIndex, first: int, every: int) -> EventCalendar:
    if first >= len(dates):
        raise ValidationError("bad_params", "panel too short for the requested event schedule")
    return EventCalendar(name="synthetic_shocks", dates=frozenset(dates[first::every]))


def _equal_weights(assets: list[str]) -> dict[str, float]:
    w = 1.0 / len(assets)
    return {a: w for a in assets}


def make_fork_bundle(
    seed: int,
    n_days: int = 756,
    n_assets: int = 12,
    n_sectors: int = 3,
    a: float = 1.0,
    b: float = 1.0,
    sigma_z: float = 1.0,
    sigma_x: float = 0.5,
    sigma_y: float = 0.6,
    sector_gamma: float = 0.3,
    sector_scale: float = 0.8,
    event_every: int = 5,
    window: int = 250,
    gap_days: int = 5,
) -> SyntheticBundle:
    """Common-driver panel: market and every asset respond to the same shock.

    Market = a*Z + noise; asset = b*Z + sector factor + noise.  The implied
    same-day slope of assets on the market is the attenuated fork value, the
    with-driver-control slope is exactly zero, and hedged residuals keep a
    driver loading of b - a*beta.
    """
    dates = _bdates(n_days)
    z = sigma_z * _normal(seed, "Z", n_days)
    market = a * z + sigma_x * _normal(seed, "UX", n_days)

    eta = {s: _normal(seed, f"ETA{s}", n_days) for s in range(n_sectors)}
    sector_names = [f"S{s}" for s in range(n_sectors)]
    sector_returns = pd.DataFrame(
        {name: sector_scale * eta[s] for s, name in enumerate(sector_names)}, index=dates
    )

    assets: dict[str, np.ndarray] = {}
    sector_map: dict[str, str] = {}
    for i in range(n_assets):
        name = f"A{i:02d}"
        s = i % n_sectors
        assets[name] = b * z + sector_gamma * eta[s] + sigma_y * _normal(seed, f"U{i:02d}", n_days)
        sector_map[name] = sector_names[s]

    panel = ReturnPanel(
        dates=dates,
        asset_returns=pd.DataFrame(assets, index=dates),
        market_return=pd.Series(market, index=dates, name=MARKET_ID),
        asset_meta=sector_map,
    )
    params = ForkParams(a=a, b=b, sigma_z=sigma_z, sigma_x=sigma_x, sigma_y=sigma_y)
    truth = {
        "kind": "fork",
        "a": a,
        "b": b,
        "sigma_z": sigma_z,
        "sigma_x": sigma_x,
        "sigma_y": sigma_y,
        "beta": fork_beta(params).beta,
        "residual_loading": fork_residual_loading(params),
        "sector_loading": sector_gamma / sector_scale,
    }
    return SyntheticBundle(
        panel=panel,
        macro=_macro_frame(seed, z, dates),
        sector_map=sector_map,
        sector_returns=sector_returns,
        events=_default_events(dates, window + gap_days, event_every),
        weights=_equal_weights(list(assets)),
        target_asset="A00",
        labeling=None,
        truth=truth,
    )


def make_chain_market_bundle(
    seed: int,
    n_days: int = 750,
    n_assets: int = 8,
    a: float = 1.0,
    c: float = 1.0,
    sigma_z: float = 1.0,
    sigma_x: float = 0.5,
    sigma_y: float = 0.8,
    event_every: int = 10,
    window: int = 250,
    gap_days: int = 5,
) -> SyntheticBundle:
    """Lagged chain through the market: driver -> market -> assets, one lag each.

    The market leads assets by one period with coefficient c; there is no
    same-day mechanism, so contemporaneous slopes and hedged residual
    loadings are both null.
    """
    total = n_days + _BURN
    z = sigma_z * _normal(seed, "Z", total)
    market = a * _lag(z, 1) + sigma_x * _normal(seed, "UX", total)

    assets: dict[str, np.ndarray] = {}
    for i in range(n_assets):
        name = f"A{i:02d}"
        assets[name] = c * _lag(market, 1) + sigma_y * _normal(seed, f"U{i:02d}", total)

    dates = _bdates(n_days)
    panel = ReturnPanel(
        dates=dates,
        asset_returns=pd.DataFrame({k: v[_BURN:] for k, v in assets.items()}, index=dates),
        market_return=pd.Series(market[_BURN:], index=dates, name=MARKET_ID),
        asset_meta={},
    )
    truth = {"kind": "chain_market", "c": c, "lead_lag_direction": "market_leads", "causal_lag": 1}
    return SyntheticBundle(
        panel=panel,
        macro=_macro_frame(seed, z[_BURN:], dates),
        sector_map={},
        sector_returns=None,
        events=_default_events(dates, window + gap_days, event_every),
        weights=_equal_weights(list(assets)),
        target_asset="A00",
        labeling=None,
        truth=truth,
    )


def make_chain_asset_bundle(
    seed: int,
    n_days: int = 750,
    n_assets: int = 8,
    b: float = 0.2,
    sigma_z: float = 1.0,
    sigma_y: float = 1.0,
    sigma_m: float = 0.3,
    target_weight: float = 0.4,
    event_every: int = 10,
    window: int = 250,
    gap_days: int = 5,
) -> SyntheticBundle:
    """Heavyweight-asset chain: assets move first, the index follows next day.

    The measured market is last period's weighted aggregate plus noise, with
    the target asset carrying a large weight, so the contemporaneous own-beta
    is mostly mechanical and collapses under a leave-one-out index.
    """
    total = n_days + _BURN
    z = sigma_z * _normal(seed, "Z", total)
    assets: dict[str, np.ndarray] = {}
    for i in range(n_assets):
        name = f"A{i:02d}"
        assets[name] = b * _lag(z, 1) + sigma_y * _normal(seed, f"U{i:02d}", total)

    names = list(assets)
    other_weight = (1.0 - target_weight) / (n_assets - 1)
    weights = {name: (target_weight if name == names[0] else other_weight) for name in names}
    aggregate = np.zeros(total)
    for name in names:
        aggregate += weights[name] * assets[name]
    market = _lag(aggregate, 1) + sigma_m * _normal(seed, "UM", total)

    dates = _bdates(n_days)
    panel = ReturnPanel(
        dates=dates,
        asset_returns=pd.DataFrame({k: v[_BURN:] for k, v in assets.items()}, index=dates),
        market_return=pd.Series(market[_BURN:], index=dates, name=MARKET_ID),
        asset_meta={},
    )
    truth = {
        "kind": "chain_asset",
        "lead_lag_direction": "asset_leads",
        "target_weight": target_weight,
        "causal_lag": 1,
    }
    return SyntheticBundle(
        panel=panel,
        macro=_macro_frame(seed, z[_BURN:], dates),
        sector_map={},
        sector_returns=None,
        events=_default_events(dates, window + gap_days, event_every),
        weights=weights,
        target_asset=names[0],
        labeling=None,
        truth=truth,
    )


def make_two_regime_fork_bundle(
    seed: int,
    n_days: int = 10000,
    n_assets: int = 10,
    a: float = 1.0,
    b_by_regime: tuple[float, float] = (1.0, 1.5),
    regime_labels: tuple[str, str] = ("calm", "stressed"),
    sigma_z: float = 1.0,
    sigma_x: float = 0.5,
    sigma_y: float = 0.6,
) -> SyntheticBundle:
    """Fork panel whose driver loading switches regimes halfway through.

    With sigma_z = 1 and sigma_x = 0.5 the attenuation factor is 0.8, so
    regime loadings (1.0, 1.5) produce population slopes (0.8, 1.2).
    """
    dates = _bdates(n_days)
    half = n_days // 2
    b_path = np.where(np.arange(n_days) < half, b_by_regime[0], b_by_regime[1])

    z = sigma_z * _normal(seed, "Z", n_days)
    market = a * z + sigma_x * _normal(seed, "UX", n_days)
    assets = {
        f"A{i:02d}": b_path * z + sigma_y * _normal(seed, f"U{i:02d}", n_days) for i in range(n_assets)
    }

    panel = ReturnPanel(
        dates=dates,
        asset_returns=pd.DataFrame(assets, index=dates),
        market_return=pd.Series(market, index=dates, name=MARKET_ID),
        asset_meta={},
    )
    labeling = label_environments(
        panel,
        LabelScheme.EPISODES,
        episodes=[(regime_labels[1], dates[half], dates[-1])],
        base_label=regime_labels[0],
    )
    lam = fork_beta(ForkParams(a=a, b=1.0, sigma_z=sigma_z, sigma_x=sigma_x, sigma_y=sigma_y)).attenuation
    truth = {
        "kind": "two_regime_fork",
        "attenuation": lam,
        "slopes": {regime_labels[0]: (b_by_regime[0] / a) * lam, regime_labels[1]: (b_by_regime[1] / a) * lam},
    }
    return SyntheticBundle(
        panel=panel,
        macro=_macro_frame(seed, z, dates),
        sector_map={},
        sector_returns=None,
        events=_default_events(dates, 260, 21),
        weights=_equal_weights(list(assets)),
        target_asset="A00",
        labeling=labeling,
        truth=truth,
    )


def write_bundle(bundle: SyntheticBundle, outdir, overwrite: bool = False) -> dict[str, Path]:
    """Write the bundle as CSV files plus a ready-to-run diagnose config.

    Panel and macro files use exact float text so reloading reproduces the
    in-memory bundle bit-for-bit; the config fragment references the files by
    bare name, to be resolved relative to the config's own directory.
    """
    outdir = Path(outdir)
    written: dict[str, Path] = {}

    returns = bundle.panel.to_frame()
    written["returns"] = serialize.write_csv(returns, outdir / "returns.csv", overwrite, exact=True)

    macro = bundle.macro.reset_index()
    written["macro"] = serialize.write_csv(macro, outdir / "macro.csv", overwrite, exact=True)

    events = pd.DataFrame({"date": sorted(bundle.events.dates)})
    written["events"] = serialize.write_csv(events, outdir / "events.csv", overwrite)

    weights = pd.DataFrame(
        {"asset": list(bundle.weights), "weight": [bundle.weights[a] for a in bundle.weights]}
    )
    written["weights"] = serialize.write_csv(weights, outdir / "weights.csv", overwrite, exact=True)

    config = {
        "returns_csv": "returns.csv",
        "market_id": bundle.panel.market_id,
        "macro_csv": "macro.csv",
        "events_csv": "events.csv",
        "weights_csv": "weights.csv",
        "target_asset": bundle.target_asset,
    }
    if bundle.sector_returns is not None:
        sector_map = pd.DataFrame(
            {"asset": list(bundle.sector_map), "sector": [bundle.sector_map[a] for a in bundle.sector_map]}
        )
        written["sector_map"] = serialize.write_csv(sector_map, outdir / "sector_map.csv", overwrite)
        sectors = bundle.sector_returns.reset_index()
        written["sector_returns"] = serialize.write_csv(
            sectors, outdir / "sector_returns.csv", overwrite, exact=True
        )
        config["sector_map_csv"] = "sector_map.csv"
        config["sector_returns_csv"] = "sector_returns.csv"
    if bundle.labeling is not None and bundle.labeling.episode_definitions:
        config["scheme"] = bundle.labeling.scheme.value
        config["episodes"] = [
            {"label": label, "start": start.strftime("%Y-%m-%d"), "end": end.strftime("%Y-%m-%d")}
            for label, start, end in bundle.labeling.episode_definitions
        ]
    else:
        config["scheme"] = LabelScheme.VIX_TERCILES.value

    written["truth"] = serialize.write_json(bundle.truth, outdir / "truth.json", overwrite)
    written["config"] = serialize.write_json(config, outdir / "diagnose_config.json", overwrite)
    return written
