"""CSV ingestion and panel assembly.

File contracts: UTF-8, header row required, ISO-8601 dates, period as the
decimal separator, empty cell = missing.  A literal "NaN" (or any other
unparseable token) in a numeric cell is a parse error naming the offending
line, never a silent missing value.  Returns are natural-log differences.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DataError

log = logging.getLogger(__name__)

MACRO_LEVEL_COLUMNS = ("vix_level", "dgs10_level", "dxy_level")

# macro levels may be carried forward over at most this many calendar rows
FFILL_LIMIT = 3

_STANDARDIZE_TOL = 1e-8


# --- loading -----------------------------------------------------------------


def _read_text_csv(path) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise DataError("file_not_found", f"no such file: {path}")
    # keep_default_na off: empty string is the only missing marker we accept
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    return frame


def _parse_dates(raw: pd.Series, path, column: str) -> pd.DatetimeIndex:
    parsed = pd.to_datetime(raw, format="ISO8601", errors="coerce")
    bad = parsed.isna() | (raw.str.strip() == "")
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise DataError(
            "parse_error", f"{path}: line {row + 2}, column {column!r}: cannot parse date {raw.iloc[row]!r}"
        )
    return pd.DatetimeIndex(parsed)


def _parse_numeric(raw: pd.Series, path, column: str) -> pd.Series:
    """Empty cells become NaN; any other unparseable or non-finite token errors."""
    stripped = raw.str.strip()
    missing = stripped == ""
    parsed = pd.to_numeric(stripped.mask(missing), errors="coerce")
    bad = ~missing & ~np.isfinite(parsed.to_numpy(dtype=np.float64, na_value=np.nan))
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise DataError(
            "parse_error",
            f"{path}: line {row + 2}, column {column!r}: {raw.iloc[row]!r} is not a finite number "
            "(missing values must be empty cells)",
        )
    # reconvert through float(): to_numeric's fast path can be off by one ulp,
    # which would break the exact-reload contract of write_csv(exact=True)
    values = stripped.mask(missing, "nan").to_numpy(dtype=object).astype(np.float64)
    return pd.Series(values, index=raw.index)


def load_prices_csv(
    path,
    date_column: str = "date",
    id_column: str | None = None,
    value_column: str | None = None,
    wide: bool = False,
) -> pd.DataFrame:
    """Load a numeric time-series CSV into a wide date-by-id frame.

    Two layouts are accepted: wide (one column per id) and long (one row per
    (date, id) with ``id_column``/``value_column`` declared).  Dates must be
    ISO-8601 and duplicate (date, id) pairs are rejected.  Missing values
    (empty cells) survive as NaN; alignment decides their fate later.
    """
    frame = _read_text_csv(path)
    if date_column not in frame.columns:
        raise DataError("unknown_column", f"{path}: declared date column {date_column!r} not in header")
    dates = _parse_dates(frame[date_column], path, date_column)

    if wide:
        if id_column or value_column:
            raise DataError("bad_schema", "wide format takes no id/value columns")
        dup = pd.Series(dates).duplicated()
        if dup.any():
            row = int(np.flatnonzero(dup.to_numpy())[0])
            raise DataError("duplicate_key", f"{path}: line {row + 2}: duplicate date {dates[row].date()}")
        value_cols = [c for c in frame.columns if c != date_column]
        if not value_cols:
            raise DataError("unknown_column", f"{path}: wide file needs at least one value column")
        out = pd.DataFrame(
            {c: _parse_numeric(frame[c], path, c).to_numpy() for c in value_cols},
            index=dates,
        )
        out.index.name = date_column
        return out.sort_index()

    if not id_column or not value_column:
        raise DataError("bad_schema", "long format needs both id_column and value_column")
    for column in (id_column, value_column):
        if column not in frame.columns:
            raise DataError("unknown_column", f"{path}: declared column {column!r} not in header")
    ids = frame[id_column].str.strip()
    if (ids == "").any():
        row = int(np.flatnonzero((ids == "").to_numpy())[0])
        raise DataError("parse_error", f"{path}: line {row + 2}: empty id")
    values = _parse_numeric(frame[value_column], path, value_column)
    keyed = pd.MultiIndex.from_arrays([dates, ids])
    dup = keyed.duplicated()
    if dup.any():
        row = int(np.flatnonzero(dup)[0])
        raise DataError(
            "duplicate_key",
            f"{path}: line {row + 2}: duplicate (date, id) = ({dates[row].date()}, {ids.iloc[row]})",
        )
    out = pd.Series(values.to_numpy(), index=keyed).unstack()
    out.index.name = date_column
    return out.sort_index()


def load_events_csv(path, date_column: str = "date", name: str = "events") -> "EventCalendar":
    frame = _read_text_csv(path)
    if date_column not in frame.columns:
        raise DataError("unknown_column", f"{path}: declared date column {date_column!r} not in header")
    dates = _parse_dates(frame[date_column], path, date_column)
    dup = pd.Series(dates).duplicated()
    if dup.any():
        row = int(np.flatnonzero(dup.to_numpy())[0])
        raise DataError("duplicate_key", f"{path}: line {row + 2}: duplicate event date {dates[row].date()}")
    return EventCalendar(name=name, dates=frozenset(dates))


def load_sector_map_csv(path, asset_column: str = "asset", sector_column: str = "sector") -> dict[str, str]:
    frame = _read_text_csv(path)
    for column in (asset_column, sector_column):
        if column not in frame.columns:
            raise DataError("unknown_column", f"{path}: declared column {column!r} not in header")
    assets = frame[asset_column].str.strip()
    dup = assets.duplicated()
    if dup.any():
        row = int(np.flatnonzero(dup.to_numpy())[0])
        raise DataError("duplicate_key", f"{path}: line {row + 2}: duplicate asset {assets.iloc[row]!r}")
    return dict(zip(assets, frame[sector_column].str.strip()))


def load_weights_csv(path, asset_column: str = "asset", weight_column: str = "weight") -> dict[str, float]:
    """Read index weights; with a date column present, the latest date wins."""
    frame = _read_text_csv(path)
    for column in (asset_column, weight_column):
        if column not in frame.columns:
            raise DataError("unknown_column", f"{path}: declared column {column!r} not in header")
    if "date" in frame.columns:
        dates = _parse_dates(frame["date"], path, "date")
        frame = frame.loc[dates == dates.max()]
    assets = frame[asset_column].str.strip()
    dup = assets.duplicated()
    if dup.any():
        row = int(np.flatnonzero(dup.to_numpy())[0])
        raise DataError("duplicate_key", f"{path}: line {row + 2}: duplicate asset {assets.iloc[row]!r}")
    weights = _parse_numeric(frame[weight_column], path, weight_column)
    if weights.isna().any():
        raise DataError("parse_error", f"{path}: weights must not be missing")
    return dict(zip(assets, weights.astype(float)))


# --- panel -------------------------------------------------------------------


class PanelMode(Enum):
    FROM_PRICES = "from_prices"
    FROM_RETURNS = "from_returns"


@dataclass(frozen=True)
class ReturnPanel:
    """Aligned daily log-return panel plus the market series and sector tags."""

    dates: pd.DatetimeIndex
    asset_returns: pd.DataFrame
    market_return: pd.Series
    asset_meta: dict[str, str] = field(default_factory=dict)
    frequency: str = "daily"

    def __post_init__(self):
        if not (self.dates.is_monotonic_increasing and self.dates.is_unique):
            raise DataError("bad_dates", "panel dates must be strictly increasing and unique")
        if not (self.asset_returns.index.equals(self.dates) and self.market_return.index.equals(self.dates)):
            raise DataError("misaligned_panel", "asset and market series must share the panel dates")
        if self.asset_returns.shape[1] == 0:
            raise DataError("no_assets", "panel needs at least one asset column")
        if not np.isfinite(self.asset_returns.to_numpy()).all() or not np.isfinite(self.market_return.to_numpy()).all():
            raise DataError("nonfinite_values", "panel returns must be finite")

    @property
    def assets(self) -> tuple[str, ...]:
        return tuple(str(c) for c in self.asset_returns.columns)

    @property
    def market_id(self) -> str:
        return str(self.market_return.name)

    def to_frame(self) -> pd.DataFrame:
        """Wide frame (market first) that round-trips through from_returns."""
        out = pd.concat([self.market_return, self.asset_returns], axis=1)
        out.insert(0, "date", self.dates)
        return out.reset_index(drop=True)


@dataclass(frozen=True)
class EventCalendar:
    """A named set of shock dates; panel intersection happens at use time."""

    name: str
    dates: frozenset[pd.Timestamp]

    def intersect(self, dates: pd.DatetimeIndex) -> list[pd.Timestamp]:
        return sorted(set(dates) & self.dates)


def _log_returns(prices: pd.DataFrame, path_hint: str = "prices") -> pd.DataFrame:
    values = prices.to_numpy(dtype=np.float64)
    if np.nanmin(values) <= 0.0:
        raise DataError("nonpositive_price", f"{path_hint}: log returns need strictly positive prices")
    logp = np.log(values)
    returns = pd.DataFrame(logp[1:] - logp[:-1], index=prices.index[1:], columns=prices.columns)
    # a gap (NaN price) invalidates the return on both sides of the gap
    return returns


def build_panel(
    table: pd.DataFrame,
    market_id: str,
    sector_map: dict[str, str] | None = None,
    mode: PanelMode | str = PanelMode.FROM_PRICES,
) -> ReturnPanel:
    """Assemble an aligned ReturnPanel from a wide price or return table.

    In from_prices mode each column is converted to log returns first.  All
    series are then aligned on the dates where every one of them (market
    included) is observed; dropped rows are counted and logged.
    """
    mode = PanelMode(mode)
    if market_id not in table.columns:
        raise DataError("missing_market_id", f"market column {market_id!r} not in table")
    if not isinstance(table.index, pd.DatetimeIndex):
        raise DataError("bad_dates", "table must be indexed by dates (see load_prices_csv)")
    table = table.sort_index()

    if mode is PanelMode.FROM_PRICES:
        observed = table.notna().sum(axis=0)
        thin = [str(c) for c in table.columns if observed[c] < 2]
        if thin:
            raise DataError("insufficient_history", f"columns with fewer than 2 prices: {thin}")
        returns = _log_returns(table)
    else:
        returns = table

    aligned = returns.dropna(axis=0, how="any")
    dropped = len(returns) - len(aligned)
    if dropped:
        log.info("build_panel: dropped %d rows with missing values", dropped)
    if aligned.empty:
        raise DataError("empty_intersection", "no date has observations for every series")

    market = aligned[market_id]
    assets = aligned.drop(columns=[market_id])
    assets.columns = [str(c) for c in assets.columns]
    meta = {}
    if sector_map:
        meta = {asset: sector_map[asset] for asset in assets.columns if asset in sector_map}
    return ReturnPanel(
        dates=aligned.index,
        asset_returns=assets,
        market_return=market,
        asset_meta=meta,
    )


# --- shock controls ----------------------------------------------------------


@dataclass(frozen=True)
class ShockControls:
    """Observable driver proxies on one shared date index.

    Macro series are scalar per date; the sector block is one column per
    sector label and gets mapped onto assets through the panel's sector
    tags when designs are built.
    """

    delta_vix: pd.Series | None = None
    delta_dgs10: pd.Series | None = None
    dxy_ret: pd.Series | None = None
    sector_ret: pd.DataFrame | None = None
    standardized: bool = False

    def __post_init__(self):
        indexes = [s.index for s in (self.delta_vix, self.delta_dgs10, self.dxy_ret) if s is not None]
        if self.sector_ret is not None:
            indexes.append(self.sector_ret.index)
        for other in indexes[1:]:
            if not other.equals(indexes[0]):
                raise DataError("misaligned_controls", "all control series must share one date index")
        if self.standardized:
            checked = dict(self.macro_frame().items())
            if self.sector_ret is not None:
                checked.update({f"sector_ret[{c}]": self.sector_ret[c] for c in self.sector_ret.columns})
            for name, series in checked.items():
                values = series.to_numpy()
                if abs(values.mean()) > _STANDARDIZE_TOL or abs(values.std() - 1.0) > _STANDARDIZE_TOL:
                    raise DataError("not_standardized", f"{name} is flagged standardized but is not")

    @property
    def index(self) -> pd.DatetimeIndex:
        for series in (self.delta_vix, self.delta_dgs10, self.dxy_ret, self.sector_ret):
            if series is not None:
                return series.index
        return pd.DatetimeIndex([])

    @property
    def is_empty(self) -> bool:
        return all(s is None for s in (self.delta_vix, self.delta_dgs10, self.dxy_ret, self.sector_ret))

    def macro_frame(self) -> pd.DataFrame:
        columns = {}
        for name in ("delta_vix", "delta_dgs10", "dxy_ret"):
            series = getattr(self, name)
            if series is not None:
                columns[name] = series
        return pd.DataFrame(columns)


def _fill_levels(levels: pd.DataFrame, dates: pd.DatetimeIndex) -> pd.DataFrame:
    """Carry macro levels onto the panel dates, at most FFILL_LIMIT rows deep."""
    union = levels.index.union(dates)
    filled = levels.reindex(union).ffill(limit=FFILL_LIMIT).loc[dates]
    gaps = filled.isna().any(axis=1)
    if gaps.any():
        first = filled.index[gaps][0]
        raise DataError(
            "coverage_gap",
            f"macro levels missing for {first.date()} beyond the {FFILL_LIMIT}-row forward-fill limit",
        )
    return filled


def _standardize_frame(frame: pd.DataFrame) -> pd.DataFrame:
    out = {}
    for name, series in frame.items():
        sd = series.std(ddof=0)
        if not np.isfinite(sd) or sd == 0.0:
            raise DataError("degenerate_control", f"cannot standardize constant series {name!r}")
        out[name] = (series - series.mean()) / sd
    return pd.DataFrame(out, index=frame.index)


def build_controls(
    panel: ReturnPanel,
    macro: pd.DataFrame,
    sector_returns: pd.DataFrame | None = None,
    standardize: bool = False,
) -> ShockControls:
    """Derive driver proxies from macro levels (and optional sector returns).

    vix and dgs10 enter as first differences of levels, the dollar index as
    a log return; differencing consumes the first panel date.  Levels may be
    forward-filled over gaps of at most FFILL_LIMIT rows; anything wider is a
    coverage error.  With sector returns supplied, every panel asset must
    carry a sector tag that matches a sector column.
    """
    known = [c for c in MACRO_LEVEL_COLUMNS if c in macro.columns]
    if not known:
        raise DataError(
            "unknown_column", f"macro table has none of the level columns {list(MACRO_LEVEL_COLUMNS)}"
        )
    extra = [c for c in macro.columns if c not in MACRO_LEVEL_COLUMNS]
    if extra:
        raise DataError("unknown_column", f"unexpected macro columns: {extra}")
    levels = _fill_levels(macro[known], panel.dates)

    derived: dict[str, pd.Series] = {}
    if "vix_level" in levels:
        derived["delta_vix"] = levels["vix_level"].diff()
    if "dgs10_level" in levels:
        derived["delta_dgs10"] = levels["dgs10_level"].diff()
    if "dxy_level" in levels:
        if (levels["dxy_level"] <= 0).any():
            raise DataError("nonpositive_price", "dxy_level must be positive for log returns")
        derived["dxy_ret"] = np.log(levels["dxy_level"]).diff()
    frame = pd.DataFrame(derived).dropna(axis=0, how="any")

    sector = None
    if sector_returns is not None:
        unlabeled = [a for a in panel.assets if a not in panel.asset_meta]
        if unlabeled:
            raise DataError("unlabeled_assets", f"assets without sector labels: {unlabeled}")
        missing = sorted({panel.asset_meta[a] for a in panel.assets} - set(map(str, sector_returns.columns)))
        if missing:
            raise DataError("unknown_sector", f"sector returns missing columns: {missing}")
        sector = sector_returns.reindex(frame.index).dropna(axis=0, how="any")
        frame = frame.loc[sector.index]

    if standardize:
        frame = _standardize_frame(frame)
        if sector is not None:
            sector = _standardize_frame(sector)

    return ShockControls(
        delta_vix=frame.get("delta_vix"),
        delta_dgs10=frame.get("delta_dgs10"),
        dxy_ret=frame.get("dxy_ret"),
        sector_ret=sector,
        standardized=standardize,
    )


# --- environments -------------------------------------------------------------


class LabelScheme(Enum):
    VIX_TERCILES = "vix_terciles"
    RATES_TREND = "rates_trend_60d"
    USD_TREND = "usd_trend_60d"
    EPISODES = "episodes"


@dataclass(frozen=True)
class EnvironmentLabeling:
    """One regime label per covered panel date."""

    scheme: LabelScheme
    labels: pd.Series
    episode_definitions: tuple[tuple[str, pd.Timestamp, pd.Timestamp], ...] | None = None
    note: str | None = None

    def __post_init__(self):
        if not self.labels.index.is_unique:
            raise DataError("duplicate_label_dates", "each date may carry exactly one label")


def label_environments(
    panel: ReturnPanel,
    scheme: LabelScheme | str,
    levels: pd.Series | None = None,
    lookback: int = 60,
    episodes=None,
    base_label: str = "Base",
) -> EnvironmentLabeling:
    """Label panel dates by regime.

    Terciles: full-sample breakpoints of the level series (Low/Mid/High).
    Trend schemes: Up when the level rose over the trailing ``lookback``
    trading rows, otherwise Down (zero change counts as Down); the first
    ``lookback`` dates cannot be labeled and are dropped with a note.
    Episodes: caller-declared non-overlapping date ranges; uncovered dates
    get ``base_label``.
    """
    scheme = LabelScheme(scheme)
    note = None

    if scheme is LabelScheme.EPISODES:
        if not episodes:
            raise DataError("missing_episodes", "episode scheme needs episode definitions")
        spans = []
        for entry in episodes:
            if isinstance(entry, dict):
                label, start, end = entry["label"], entry["start"], entry["end"]
            else:
                label, start, end = entry
            spans.append((str(label), pd.Timestamp(start), pd.Timestamp(end)))
        spans.sort(key=lambda s: (s[1], s[2]))
        for (_, s1, e1), (label2, s2, _) in zip(spans, spans[1:]):
            if s2 <= e1:
                raise DataError("overlapping_episodes", f"episode {label2!r} overlaps the previous range")
        labels = pd.Series(base_label, index=panel.dates, dtype=object)
        for label, start, end in spans:
            labels.loc[(labels.index >= start) & (labels.index <= end)] = label
        return EnvironmentLabeling(scheme, labels, episode_definitions=tuple(spans))

    if levels is None:
        raise DataError("missing_levels", f"scheme {scheme.value} needs a level series")
    filled = _fill_levels(levels.to_frame("level"), panel.dates)["level"]

    if scheme is LabelScheme.VIX_TERCILES:
        lo, hi = np.quantile(filled.to_numpy(), [1.0 / 3.0, 2.0 / 3.0])
        labels = pd.Series(
            np.where(filled <= lo, "Low", np.where(filled <= hi, "Mid", "High")),
            index=panel.dates,
            dtype=object,
        )
        return EnvironmentLabeling(scheme, labels)

    # trend schemes: sign of the change over the trailing window
    change = filled.to_numpy()[lookback:] - filled.to_numpy()[:-lookback]
    covered = panel.dates[lookback:]
    if len(covered) == 0:
        raise DataError("insufficient_lookback", f"panel shorter than the {lookback}-day lookback")
    if lookback > 0:
        note = f"first {lookback} dates dropped (insufficient lookback)"
    labels = pd.Series(np.where(change > 0, "Up", "Down"), index=covered, dtype=object)
    return EnvironmentLabeling(scheme, labels, note=note)
