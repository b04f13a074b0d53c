"""The empirical battery: five checks that discriminate between the causal
stories a market-beta regression is compatible with.

Shock-day attenuation and post-hedge residual loadings probe the
common-driver story (slope collapses once driver proxies enter; hedged
residuals keep loading on the proxies).  Lead-lag profiles and the
leave-one-out index probe the lagged-chain stories (who moves first, and
how much of the slope is the asset's own weight echoing back).  Environment
betas probe stability across regimes.  Every check is a pure function of
its inputs; the battery orchestrator collects their reports and attaches
plain-language verdict notes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import pandas as pd

from .data_io import EnvironmentLabeling, EventCalendar, ReturnPanel, ShockControls
from .errors import CausalBetaError, DiagnosticsError, ValidationError
from .graphs import AggregatorSpec
from .regression import (
    DesignMatrix,
    LagCoefficient,
    SeKind,
    interaction_fit,
    ols,
)

log = logging.getLogger(__name__)

MACRO_CONTROL_NAMES = ("delta_vix", "delta_dgs10", "dxy_ret")
SECTOR_CONTROL = "sector_ret"


def _significant(coef: float, se: float, multiple: float) -> bool:
    return se > 0.0 and abs(coef) > multiple * se


def _event_dates(events) -> set[pd.Timestamp]:
    if events is None:
        return set()
    if isinstance(events, EventCalendar):
        return set(events.dates)
    return {pd.Timestamp(d) for d in events}


def _usable_dates(panel: ReturnPanel, controls: ShockControls | None) -> pd.DatetimeIndex:
    if controls is None or controls.is_empty:
        return panel.dates
    return panel.dates.intersection(controls.index)


def _stack_rows(panel: ReturnPanel, dates: pd.DatetimeIndex, controls: ShockControls | None) -> pd.DataFrame:
    """Long (date, asset) frame with y, market, and per-row control columns.

    The sector control is the return of each asset's own sector that day;
    macro controls repeat across assets within a date.
    """
    assets = list(panel.assets)
    n_assets = len(assets)
    frame = pd.DataFrame(
        {
            "date": np.repeat(dates.to_numpy(), n_assets),
            "asset": np.tile(np.asarray(assets, dtype=object), len(dates)),
            "y": panel.asset_returns.loc[dates, assets].to_numpy().ravel(),
            "market": np.repeat(panel.market_return.loc[dates].to_numpy(), n_assets),
        }
    )
    if controls is None or controls.is_empty:
        return frame
    macro = controls.macro_frame()
    for name in macro.columns:
        frame[name] = np.repeat(macro.loc[dates, name].to_numpy(), n_assets)
    if controls.sector_ret is not None:
        unlabeled = [a for a in assets if a not in panel.asset_meta]
        if unlabeled:
            raise ValidationError("unlabeled_assets", f"assets without sector labels: {unlabeled}")
        sectors = [panel.asset_meta[a] for a in assets]
        block = controls.sector_ret.loc[dates, sectors].to_numpy()
        frame[SECTOR_CONTROL] = block.ravel()
    return frame


def _standardize_columns(frame: pd.DataFrame, columns: Iterable[str]) -> tuple[pd.DataFrame, list[str], list[str]]:
    """Standardize in place over the pooled rows; constant columns are dropped."""
    kept, dropped = [], []
    out = frame.copy()
    for name in columns:
        values = out[name].to_numpy()
        sd = values.std()
        if sd == 0.0:
            out = out.drop(columns=[name])
            dropped.append(name)
        else:
            out[name] = (values - values.mean()) / sd
            kept.append(name)
    if dropped:
        log.info("dropped constant control columns: %s", dropped)
    return out, kept, dropped


# --- shock-day attenuation -----------------------------------------------------


@dataclass(frozen=True)
class AttenuationRecord:
    """Market slope on shock days, with and without driver proxies."""

    beta_without: float
    se_without: float
    beta_with: float
    se_with: float
    beta_no_sector: float
    se_no_sector: float
    ratio: float | None
    n_obs: int
    n_event_dates: int
    control_names: tuple[str, ...]
    dropped_controls: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "beta_without_controls": self.beta_without,
            "se_without_controls": self.se_without,
            "beta_with_controls": self.beta_with,
            "se_with_controls": self.se_with,
            "beta_no_sector_variant": self.beta_no_sector,
            "se_no_sector_variant": self.se_no_sector,
            "ratio": self.ratio,
            "n_obs": self.n_obs,
            "n_event_dates": self.n_event_dates,
            "control_names": list(self.control_names),
            "dropped_controls": list(self.dropped_controls),
        }

    def to_frame(self) -> pd.DataFrame:
        rows = [
            ("no_controls", self.beta_without, self.se_without),
            ("with_controls", self.beta_with, self.se_with),
            ("no_sector_variant", self.beta_no_sector, self.se_no_sector),
        ]
        frame = pd.DataFrame(rows, columns=["variant", "market_slope", "se"])
        frame["n_obs"] = self.n_obs
        return frame


def shock_day_attenuation(
    panel: ReturnPanel,
    events,
    controls: ShockControls,
    min_event_dates: int = 10,
    se_kind: SeKind = SeKind.CLUSTER_BY_DATE,
) -> AttenuationRecord:
    """Pool shock-day rows and compare the market slope with and without proxies.

    Controls are standardized over the pooled shock-day sample.  A no-sector
    variant is always reported; it equals the full fit when no sector block
    is present.
    """
    if controls is None or controls.is_empty:
        raise ValidationError("no_controls", "attenuation needs at least one driver proxy")
    usable = _usable_dates(panel, controls)
    dates = pd.DatetimeIndex(sorted(_event_dates(events) & set(usable)))
    if len(dates) < min_event_dates:
        raise DiagnosticsError(
            "too_few_events", f"{len(dates)} usable shock dates, need at least {min_event_dates}"
        )
    stacked = _stack_rows(panel, dates, controls)
    control_cols = [c for c in (*MACRO_CONTROL_NAMES, SECTOR_CONTROL) if c in stacked.columns]
    stacked, kept, dropped = _standardize_columns(stacked, control_cols)

    cluster = stacked["date"].to_numpy()
    y = stacked["y"].to_numpy()

    def fit(control_names: list[str]):
        regressors = {"market": stacked["market"].to_numpy()}
        regressors.update({c: stacked[c].to_numpy() for c in control_names})
        return ols(DesignMatrix.build(y, regressors, cluster_id=cluster), se_kind=se_kind)

    fit_plain = fit([])
    fit_full = fit(kept)
    no_sector = [c for c in kept if c != SECTOR_CONTROL]
    fit_nosec = fit(no_sector) if no_sector != kept else fit_full

    beta0, beta1 = fit_plain.coef["market"], fit_full.coef["market"]
    return AttenuationRecord(
        beta_without=beta0,
        se_without=fit_plain.se["market"],
        beta_with=beta1,
        se_with=fit_full.se["market"],
        beta_no_sector=fit_nosec.coef["market"],
        se_no_sector=fit_nosec.se["market"],
        ratio=(beta1 / beta0) if beta0 != 0.0 else None,
        n_obs=fit_plain.n_obs,
        n_event_dates=len(dates),
        control_names=tuple(kept),
        dropped_controls=tuple(dropped),
    )


# --- environment betas ----------------------------------------------------------


@dataclass(frozen=True)
class EnvBetaRow:
    environment: str
    beta: float
    se: float
    n_obs: int


@dataclass(frozen=True)
class EnvironmentBetaResult:
    rows: tuple[EnvBetaRow, ...]
    base_env: str

    def to_dict(self) -> dict:
        return {
            "base_env": self.base_env,
            "betas": [
                {"environment": r.environment, "beta": r.beta, "se": r.se, "n_obs": r.n_obs} for r in self.rows
            ],
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.environment, r.beta, r.se, r.n_obs) for r in self.rows],
            columns=["environment", "beta", "se", "n_obs"],
        )


def environment_betas(
    panel: ReturnPanel,
    labeling: EnvironmentLabeling,
    controls: ShockControls | None = None,
    base_env: str | None = None,
    min_env_rows: int = 30,
    se_kind: SeKind = SeKind.CLUSTER_BY_DATE,
) -> EnvironmentBetaResult:
    """Environment-specific market slopes from one pooled interaction fit."""
    usable = _usable_dates(panel, controls).intersection(labeling.labels.index)
    if len(usable) == 0:
        raise DiagnosticsError("no_labeled_dates", "no panel date carries an environment label")
    stacked = _stack_rows(panel, usable, controls)
    env = labeling.labels.loc[usable].to_numpy()
    env_rows = np.repeat(env, len(panel.assets))
    if base_env is None:
        values, counts = np.unique(env_rows, return_counts=True)
        base_env = str(values[np.argmax(counts)])

    regressors = {"market": stacked["market"].to_numpy()}
    for name in (*MACRO_CONTROL_NAMES, SECTOR_CONTROL):
        if name in stacked.columns:
            regressors[name] = stacked[name].to_numpy()
    design = DesignMatrix.build(
        stacked["y"].to_numpy(),
        regressors,
        cluster_id=stacked["date"].to_numpy(),
        environment=env_rows,
    )
    result = interaction_fit(design, base_env, se_kind=se_kind, min_env_rows=min_env_rows)
    rows = tuple(
        EnvBetaRow(env_name, slope.beta, slope.se, slope.n_obs)
        for env_name, slope in sorted(result.slopes.items())
    )
    return EnvironmentBetaResult(rows=rows, base_env=base_env)


# --- lead-lag -------------------------------------------------------------------


@dataclass(frozen=True)
class LeadLagResult:
    """Distributed-lag profiles in both directions plus a direction verdict."""

    market_to_asset: tuple[LagCoefficient, ...]
    asset_to_market: tuple[LagCoefficient, ...]
    market_leads: bool
    asset_leads: bool
    direction: str
    n_obs: int

    def to_dict(self) -> dict:
        def table(rows):
            return [{"lag": r.lag, "coef": r.coef, "se": r.se} for r in rows]

        return {
            "market_to_asset": table(self.market_to_asset),
            "asset_to_market": table(self.asset_to_market),
            "market_leads": self.market_leads,
            "asset_leads": self.asset_leads,
            "direction": self.direction,
            "n_obs": self.n_obs,
        }

    def to_frame(self) -> pd.DataFrame:
        rows = [("market_to_asset", r.lag, r.coef, r.se) for r in self.market_to_asset]
        rows += [("asset_to_market", r.lag, r.coef, r.se) for r in self.asset_to_market]
        return pd.DataFrame(rows, columns=["direction", "lag", "coef", "se"])


def lead_lag_test(
    panel: ReturnPanel,
    controls: ShockControls | None,
    max_lag: int = 5,
    se_kind: SeKind = SeKind.CLUSTER_BY_DATE,
    significance_multiple: float = 4.0,
) -> LeadLagResult:
    """Who moves first?  Pooled lag profiles of assets on the market and back.

    A direction counts as showing transmission when any coefficient at lag
    1 or deeper clears ``significance_multiple`` standard errors.  Lags are
    taken over consecutive panel rows.
    """
    if max_lag < 1:
        raise ValidationError("bad_lag", "lead-lag needs max_lag >= 1")
    positions = np.arange(len(panel.dates))
    usable = _usable_dates(panel, controls)
    mask = (positions >= max_lag) & panel.dates.isin(usable)
    rows = positions[mask]
    if rows.size == 0:
        raise DiagnosticsError("insufficient_observations", "no usable rows after lag trimming")
    dates_sel = panel.dates[rows]

    market = panel.market_return.to_numpy()
    asset_block = panel.asset_returns.to_numpy()
    n_assets = asset_block.shape[1]

    macro_cols: dict[str, np.ndarray] = {}
    if controls is not None and not controls.is_empty:
        macro = controls.macro_frame()
        for name in macro.columns:
            macro_cols[name] = np.repeat(macro.loc[dates_sel, name].to_numpy(), n_assets)
        if controls.sector_ret is not None:
            unlabeled = [a for a in panel.assets if a not in panel.asset_meta]
            if unlabeled:
                raise ValidationError("unlabeled_assets", f"assets without sector labels: {unlabeled}")
            sectors = [panel.asset_meta[a] for a in panel.assets]
            macro_cols[SECTOR_CONTROL] = controls.sector_ret.loc[dates_sel, sectors].to_numpy().ravel()

    cluster = np.repeat(dates_sel.to_numpy(), n_assets)

    # direction 1: asset returns on market lags
    regressors = {
        f"market_lag{k}": np.repeat(market[rows - k], n_assets) for k in range(max_lag + 1)
    }
    regressors.update(macro_cols)
    fit_ma = ols(
        DesignMatrix.build(asset_block[rows].ravel(), regressors, cluster_id=cluster), se_kind=se_kind
    )
    market_to_asset = tuple(
        LagCoefficient(k, fit_ma.coef[f"market_lag{k}"], fit_ma.se[f"market_lag{k}"])
        for k in range(max_lag + 1)
    )

    # direction 2: market return on asset lags, pooled across assets
    regressors = {
        f"asset_lag{k}": asset_block[rows - k].ravel() for k in range(max_lag + 1)
    }
    regressors.update(macro_cols)
    fit_am = ols(
        DesignMatrix.build(np.repeat(market[rows], n_assets), regressors, cluster_id=cluster),
        se_kind=se_kind,
    )
    asset_to_market = tuple(
        LagCoefficient(k, fit_am.coef[f"asset_lag{k}"], fit_am.se[f"asset_lag{k}"])
        for k in range(max_lag + 1)
    )

    market_leads = any(_significant(r.coef, r.se, significance_multiple) for r in market_to_asset[1:])
    asset_leads = any(_significant(r.coef, r.se, significance_multiple) for r in asset_to_market[1:])
    direction = {
        (True, False): "market_leads",
        (False, True): "asset_leads",
        (True, True): "both",
        (False, False): "none",
    }[(market_leads, asset_leads)]
    return LeadLagResult(
        market_to_asset=market_to_asset,
        asset_to_market=asset_to_market,
        market_leads=market_leads,
        asset_leads=asset_leads,
        direction=direction,
        n_obs=fit_ma.n_obs,
    )


# --- leave-one-out ---------------------------------------------------------------


@dataclass(frozen=True)
class LeaveOneOutResult:
    asset: str
    beta_full: float
    se_full: float
    beta_loo: float
    se_loo: float
    drop_fraction: float | None
    renormalized: bool
    note: str | None

    def to_dict(self) -> dict:
        return {
            "asset": self.asset,
            "beta_full": self.beta_full,
            "se_full": self.se_full,
            "beta_loo": self.beta_loo,
            "se_loo": self.se_loo,
            "drop_fraction": self.drop_fraction,
            "renormalized": self.renormalized,
            "note": self.note,
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([self.to_dict()])


def leave_one_out_compare(
    panel: ReturnPanel,
    asset: str,
    weights: AggregatorSpec,
    renormalize: bool = False,
    se_kind: SeKind = SeKind.CLASSICAL,
    significance_multiple: float = 4.0,
) -> LeaveOneOutResult:
    """Beta against the weighted aggregate versus the same aggregate without
    the asset's own contribution.

    Both indexes are built from the panel's constituent returns with the
    supplied weights, so a zero own-weight makes the two fits bit-identical.
    The default aggregate is unrenormalized; ``renormalize`` rescales the
    remaining weights to sum to one.
    """
    if asset not in panel.assets:
        raise ValidationError("unknown_asset", f"{asset!r} is not in the panel")
    if set(weights.constituents) != set(panel.assets):
        raise ValidationError(
            "weight_mismatch", "weights must cover exactly the panel's constituent assets"
        )
    order = list(weights.constituents)
    w_full = np.array([weights.weight_of(c) for c in order])
    w_loo = w_full.copy()
    own = order.index(asset)
    w_loo[own] = 0.0
    if renormalize:
        remaining = w_loo.sum()
        if remaining <= 0.0:
            raise ValidationError("degenerate_weights", "nothing left to renormalize after exclusion")
        w_loo = w_loo / remaining

    block = panel.asset_returns[order].to_numpy()
    y = panel.asset_returns[asset].to_numpy()
    fit_full = ols(DesignMatrix.build(y, {"index_full": block @ w_full}), se_kind=se_kind)
    fit_loo = ols(DesignMatrix.build(y, {"index_loo": block @ w_loo}), se_kind=se_kind)

    beta_full = fit_full.coef["index_full"]
    beta_loo = fit_loo.coef["index_loo"]
    note = None
    if beta_full == 0.0:
        drop = None
        note = "full-index beta is exactly zero; drop fraction undefined"
    else:
        drop = 1.0 - beta_loo / beta_full
        if not _significant(beta_full, fit_full.se["index_full"], significance_multiple):
            note = "full-index beta statistically indistinguishable from zero; drop fraction unreliable"
    return LeaveOneOutResult(
        asset=asset,
        beta_full=beta_full,
        se_full=fit_full.se["index_full"],
        beta_loo=beta_loo,
        se_loo=fit_loo.se["index_loo"],
        drop_fraction=drop,
        renormalized=renormalize,
        note=note,
    )


# --- post-hedge residual loadings --------------------------------------------------


@dataclass(frozen=True)
class LoadingRow:
    control: str
    loading: float
    se: float


@dataclass(frozen=True)
class EventLoadingRow:
    date: pd.Timestamp
    n_assets: int
    mean_residual: float
    sector_loading: float | None
    sector_se: float | None
    macro_values: dict[str, float]


@dataclass(frozen=True)
class PostHedgeResult:
    """Driver loadings of event-day residuals from pre-event rolling hedges.

    Macro proxies are constant across assets within one event day, so their
    loadings are identified only across events: the pooled table is the real
    contract.  Per-event rows carry what one day can identify (the sector
    loading across assets) plus that day's standardized macro values.
    """

    pooled: tuple[LoadingRow, ...]
    per_event: tuple[EventLoadingRow, ...]
    skipped: tuple[tuple[pd.Timestamp, str], ...]
    window: int
    gap_days: int
    n_obs: int
    dropped_controls: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "pooled": [{"control": r.control, "loading": r.loading, "se": r.se} for r in self.pooled],
            "per_event": [
                {
                    "date": r.date,
                    "n_assets": r.n_assets,
                    "mean_residual": r.mean_residual,
                    "sector_loading": r.sector_loading,
                    "sector_se": r.sector_se,
                    "macro_values": r.macro_values,
                }
                for r in self.per_event
            ],
            "skipped": [{"date": d, "reason": reason} for d, reason in self.skipped],
            "window": self.window,
            "gap_days": self.gap_days,
            "n_obs": self.n_obs,
            "dropped_controls": list(self.dropped_controls),
        }

    def pooled_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.control, r.loading, r.se) for r in self.pooled], columns=["control", "loading", "se"]
        )

    def event_frame(self) -> pd.DataFrame:
        rows = []
        for r in self.per_event:
            row = {
                "date": r.date,
                "n_assets": r.n_assets,
                "mean_residual": r.mean_residual,
                "sector_loading": r.sector_loading,
                "sector_se": r.sector_se,
            }
            row.update(r.macro_values)
            rows.append(row)
        return pd.DataFrame(rows)


def post_hedge_residual_loadings(
    panel: ReturnPanel,
    events,
    controls: ShockControls,
    window: int = 250,
    gap_days: int = 5,
    se_kind: SeKind = SeKind.CLUSTER_BY_DATE,
) -> PostHedgeResult:
    """Hedge each asset with a pre-event rolling market fit, then ask what the
    event-day residuals still load on.

    The estimation window is the ``window`` consecutive panel rows ending
    ``gap_days`` rows before the event, so event-day information never leaks
    into the hedge.  Events without enough history (or without control
    coverage) are skipped and reported.  Controls are standardized over the
    pooled event rows.
    """
    if controls is None or controls.is_empty:
        raise ValidationError("no_controls", "residual loadings need at least one driver proxy")
    if window < 3:
        raise ValidationError("bad_window", "window must be at least 3 rows")
    if gap_days < 1:
        raise ValidationError("bad_window", "gap_days must be at least 1")
    event_dates = sorted(_event_dates(events) & set(panel.dates))
    if not event_dates:
        raise DiagnosticsError("too_few_events", "no event date intersects the panel")

    market = panel.market_return.to_numpy()
    asset_block = panel.asset_returns.to_numpy()
    position = {d: i for i, d in enumerate(panel.dates)}
    control_index = set(controls.index)

    usable: list[tuple[pd.Timestamp, np.ndarray]] = []
    skipped: list[tuple[pd.Timestamp, str]] = []
    for date in event_dates:
        p = position[date]
        start = p - gap_days - window + 1
        if start < 0:
            skipped.append((date, "insufficient_history"))
            continue
        if date not in control_index:
            skipped.append((date, "missing_controls"))
            continue
        sl = slice(start, p - gap_days + 1)
        m = market[sl]
        var_m = m.var()
        if var_m == 0.0:
            skipped.append((date, "degenerate_market_window"))
            continue
        mean_m = m.mean()
        cols = asset_block[sl]
        slopes = ((cols - cols.mean(axis=0)) * (m - mean_m)[:, None]).mean(axis=0) / var_m
        alphas = cols.mean(axis=0) - slopes * mean_m
        residuals = asset_block[p] - alphas - slopes * market[p]
        usable.append((date, residuals))
    if not usable:
        raise DiagnosticsError("insufficient_history", "no event has enough pre-event history")

    kept_dates = pd.DatetimeIndex([d for d, _ in usable])
    stacked = _stack_rows(panel, kept_dates, controls)
    stacked["residual"] = np.concatenate([r for _, r in usable])
    control_cols = [c for c in (*MACRO_CONTROL_NAMES, SECTOR_CONTROL) if c in stacked.columns]
    stacked, kept, dropped = _standardize_columns(stacked, control_cols)

    regressors = {c: stacked[c].to_numpy() for c in kept}
    if not regressors:
        raise DiagnosticsError("no_controls", "every control was constant over the pooled event rows")
    pooled_fit = ols(
        DesignMatrix.build(stacked["residual"].to_numpy(), regressors, cluster_id=stacked["date"].to_numpy()),
        se_kind=se_kind,
    )
    pooled = tuple(LoadingRow(c, pooled_fit.coef[c], pooled_fit.se[c]) for c in kept)

    per_event: list[EventLoadingRow] = []
    macro_kept = [c for c in kept if c != SECTOR_CONTROL]
    for date, residuals in usable:
        day = stacked[stacked["date"] == date]
        sector_loading = sector_se = None
        if SECTOR_CONTROL in kept and day[SECTOR_CONTROL].nunique() > 1:
            fit = ols(DesignMatrix.build(day["residual"].to_numpy(), {SECTOR_CONTROL: day[SECTOR_CONTROL].to_numpy()}))
            sector_loading, sector_se = fit.coef[SECTOR_CONTROL], fit.se[SECTOR_CONTROL]
        per_event.append(
            EventLoadingRow(
                date=date,
                n_assets=residuals.size,
                mean_residual=float(residuals.mean()),
                sector_loading=sector_loading,
                sector_se=sector_se,
                macro_values={c: float(day[c].iloc[0]) for c in macro_kept},
            )
        )
    return PostHedgeResult(
        pooled=pooled,
        per_event=tuple(per_event),
        skipped=tuple(skipped),
        window=window,
        gap_days=gap_days,
        n_obs=pooled_fit.n_obs,
        dropped_controls=tuple(dropped),
    )


# --- orchestration ------------------------------------------------------------------


@dataclass(frozen=True)
class BatteryConfig:
    """Every knob of the battery in one place, with the documented defaults."""

    window: int = 250
    gap_days: int = 5
    max_lag: int = 5
    min_event_dates: int = 10
    min_env_rows: int = 30
    base_env: str | None = None
    se_kind: SeKind = SeKind.CLUSTER_BY_DATE
    renormalize_loo: bool = False
    significance_multiple: float = 4.0
    fork_attenuation_ratio: float = 0.5


@dataclass(frozen=True)
class DiagnosticReport:
    attenuation: AttenuationRecord | None
    env_betas: EnvironmentBetaResult | None
    lead_lag: LeadLagResult | None
    leave_one_out: LeaveOneOutResult | None
    residual_loadings: PostHedgeResult | None
    section_notes: tuple[str, ...]
    verdict_notes: tuple[str, ...]

    def to_dict(self) -> dict:
        def section(x):
            return x.to_dict() if x is not None else None

        return {
            "attenuation": section(self.attenuation),
            "env_betas": section(self.env_betas),
            "lead_lag": section(self.lead_lag),
            "leave_one_out": section(self.leave_one_out),
            "residual_loadings": section(self.residual_loadings),
            "section_notes": list(self.section_notes),
            "verdict_notes": list(self.verdict_notes),
        }

    def csv_tables(self) -> dict[str, pd.DataFrame]:
        tables: dict[str, pd.DataFrame] = {}
        if self.attenuation is not None:
            tables["attenuation"] = self.attenuation.to_frame()
        if self.env_betas is not None:
            tables["env_betas"] = self.env_betas.to_frame()
        if self.lead_lag is not None:
            tables["lead_lag"] = self.lead_lag.to_frame()
        if self.leave_one_out is not None:
            tables["leave_one_out"] = self.leave_one_out.to_frame()
        if self.residual_loadings is not None:
            tables["residual_loadings_pooled"] = self.residual_loadings.pooled_frame()
            tables["residual_loadings_by_event"] = self.residual_loadings.event_frame()
        return tables


def _verdict_notes(report_parts: dict, config: BatteryConfig) -> list[str]:
    notes: list[str] = []
    mult = config.significance_multiple
    att: AttenuationRecord | None = report_parts.get("attenuation")
    post: PostHedgeResult | None = report_parts.get("residual_loadings")

    attenuated = False
    if att is not None:
        base_significant = _significant(att.beta_without, att.se_without, mult)
        if base_significant and att.ratio is not None and abs(att.ratio) <= config.fork_attenuation_ratio:
            attenuated = True
            notes.append(
                f"shock-day market slope collapses once driver proxies enter "
                f"({att.beta_without:.3g} to {att.beta_with:.3g}, ratio {att.ratio:.3g})"
            )
        elif not base_significant:
            notes.append("shock-day market slope is already indistinguishable from zero without controls")
        else:
            notes.append("no material shock-day attenuation from driver proxies")

    loads = False
    if post is not None:
        loaded = [r.control for r in post.pooled if _significant(r.loading, r.se, mult)]
        if loaded:
            loads = True
            notes.append("post-hedge residuals still load on: " + ", ".join(loaded))
        else:
            notes.append("post-hedge residuals show no driver loadings")

    if attenuated and loads:
        notes.append("pattern consistent with fork: attenuation plus residual driver loadings")

    lead: LeadLagResult | None = report_parts.get("lead_lag")
    if lead is not None:
        if lead.direction == "market_leads":
            notes.append("lagged transmission signature: market leads assets (chain via the market)")
        elif lead.direction == "asset_leads":
            notes.append("lagged transmission signature: asset leads the market (chain via the asset)")
        elif lead.direction == "both":
            notes.append("lagged transmission signature in both directions; mixed mechanism")
        else:
            notes.append("no lead-lag signature in either direction")

    loo: LeaveOneOutResult | None = report_parts.get("leave_one_out")
    if loo is not None and loo.drop_fraction is not None and loo.note is None:
        if loo.drop_fraction >= 0.5:
            notes.append(
                f"leave-one-out beta drop {loo.drop_fraction:.2f}: the apparent market effect is "
                "largely the asset's own weight"
            )
        else:
            notes.append(f"leave-one-out beta drop {loo.drop_fraction:.2f}: own-weight share is minor")

    env: EnvironmentBetaResult | None = report_parts.get("env_betas")
    if env is not None and len(env.rows) > 1:
        betas = [r.beta for r in env.rows]
        spread = max(betas) - min(betas)
        worst_se = max(r.se for r in env.rows)
        if worst_se > 0 and spread > mult * worst_se:
            notes.append(f"environment-specific slopes differ across regimes (spread {spread:.3g})")
        else:
            notes.append("environment-specific slopes are stable across regimes")
    return notes


def run_full_battery(
    panel: ReturnPanel,
    events=None,
    controls: ShockControls | None = None,
    labeling: EnvironmentLabeling | None = None,
    weights: AggregatorSpec | None = None,
    config: BatteryConfig = BatteryConfig(),
) -> DiagnosticReport:
    """Run every applicable diagnostic; sections that cannot run are noted,
    never fatal.  The report is a pure function of the inputs and does not
    depend on the order sections execute in.
    """
    parts: dict[str, object] = {}
    section_notes: list[str] = []

    def attempt(name: str, fn):
        try:
            parts[name] = fn()
        except CausalBetaError as exc:
            parts[name] = None
            section_notes.append(f"{name}: skipped ({exc.kind}: {exc.args[0]})")

    attempt(
        "attenuation",
        lambda: shock_day_attenuation(
            panel, events, controls, min_event_dates=config.min_event_dates, se_kind=config.se_kind
        ),
    )
    if labeling is not None:
        attempt(
            "env_betas",
            lambda: environment_betas(
                panel,
                labeling,
                controls,
                base_env=config.base_env,
                min_env_rows=config.min_env_rows,
                se_kind=config.se_kind,
            ),
        )
    else:
        parts["env_betas"] = None
        section_notes.append("env_betas: skipped (no environment labeling provided)")
    attempt(
        "lead_lag",
        lambda: lead_lag_test(
            panel,
            controls,
            max_lag=config.max_lag,
            se_kind=config.se_kind,
            significance_multiple=config.significance_multiple,
        ),
    )
    if weights is not None:
        attempt(
            "leave_one_out",
            lambda: leave_one_out_compare(
                panel,
                weights.target_asset,
                weights,
                renormalize=config.renormalize_loo,
                significance_multiple=config.significance_multiple,
            ),
        )
    else:
        parts["leave_one_out"] = None
        section_notes.append("leave_one_out: skipped (no index weights provided)")
    attempt(
        "residual_loadings",
        lambda: post_hedge_residual_loadings(
            panel, events, controls, window=config.window, gap_days=config.gap_days, se_kind=config.se_kind
        ),
    )

    return DiagnosticReport(
        attenuation=parts.get("attenuation"),
        env_betas=parts.get("env_betas"),
        lead_lag=parts.get("lead_lag"),
        leave_one_out=parts.get("leave_one_out"),
        residual_loadings=parts.get("residual_loadings"),
        section_notes=tuple(section_notes),
        verdict_notes=tuple(_verdict_notes(parts, config)),
    )
