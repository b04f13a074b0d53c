"""CSV loading, panel assembly, control derivation, and regime labeling."""

import numpy as np
import pandas as pd
import pytest

from causalbeta.data_io import (
    FFILL_LIMIT,
    EventCalendar,
    LabelScheme,
    PanelMode,
    ReturnPanel,
    ShockControls,
    build_controls,
    build_panel,
    label_environments,
    load_events_csv,
    load_prices_csv,
    load_sector_map_csv,
    load_weights_csv,
)
from causalbeta.errors import DataError
from causalbeta.serialize import write_csv


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def _dates(n, start="2024-01-01"):
    return pd.bdate_range(start, periods=n)


class TestLoadPricesWide:
    def test_basic_and_sorted(self, tmp_path):
        path = _write(
            tmp_path,
            "p.csv",
            "date,AAA,BBB\n2024-01-03,101.5,50\n2024-01-02,100.0,49.5\n",
        )
        frame = load_prices_csv(path, wide=True)
        assert list(frame.columns) == ["AAA", "BBB"]
        assert frame.index.tolist() == [pd.Timestamp("2024-01-02"), pd.Timestamp("2024-01-03")]
        assert frame.loc["2024-01-03", "AAA"] == 101.5

    def test_empty_cell_becomes_nan(self, tmp_path):
        path = _write(tmp_path, "p.csv", "date,AAA\n2024-01-02,100\n2024-01-03,\n")
        frame = load_prices_csv(path, wide=True)
        assert np.isnan(frame.loc["2024-01-03", "AAA"])

    def test_nan_literal_rejected_with_line_number(self, tmp_path):
        # the literal token is not a valid value; only empty cells mean missing
        path = _write(tmp_path, "p.csv", "date,AAA\n2024-01-02,100\n2024-01-03,NaN\n")
        with pytest.raises(DataError, match=r"parse_error.*line 3.*'NaN'"):
            load_prices_csv(path, wide=True)

    def test_bad_date_points_at_its_line(self, tmp_path):
        path = _write(tmp_path, "p.csv", "date,AAA\n2024-01-02,100\nnot-a-date,101\n")
        with pytest.raises(DataError, match=r"parse_error.*line 3"):
            load_prices_csv(path, wide=True)

    def test_duplicate_date(self, tmp_path):
        path = _write(tmp_path, "p.csv", "date,AAA\n2024-01-02,100\n2024-01-02,101\n")
        with pytest.raises(DataError, match=r"duplicate_key.*line 3"):
            load_prices_csv(path, wide=True)

    def test_wide_rejects_long_options_and_missing_columns(self, tmp_path):
        path = _write(tmp_path, "p.csv", "date,AAA\n2024-01-02,100\n")
        with pytest.raises(DataError, match="bad_schema"):
            load_prices_csv(path, wide=True, id_column="asset")
        with pytest.raises(DataError, match="unknown_column"):
            load_prices_csv(path, date_column="day", wide=True)
        only_dates = _write(tmp_path, "d.csv", "date\n2024-01-02\n")
        with pytest.raises(DataError, match="unknown_column"):
            load_prices_csv(only_dates, wide=True)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="file_not_found"):
            load_prices_csv(tmp_path / "absent.csv", wide=True)


class TestLoadPricesLong:
    def test_pivot(self, tmp_path):
        path = _write(
            tmp_path,
            "p.csv",
            "date,asset,close\n"
            "2024-01-02,AAA,100\n"
            "2024-01-02,BBB,50\n"
            "2024-01-03,AAA,101\n",
        )
        frame = load_prices_csv(path, id_column="asset", value_column="close")
        assert frame.loc["2024-01-02", "BBB"] == 50.0
        assert np.isnan(frame.loc["2024-01-03", "BBB"])

    def test_duplicate_pair(self, tmp_path):
        path = _write(
            tmp_path,
            "p.csv",
            "date,asset,close\n2024-01-02,AAA,100\n2024-01-02,AAA,101\n",
        )
        with pytest.raises(DataError, match=r"duplicate_key.*line 3"):
            load_prices_csv(path, id_column="asset", value_column="close")

    def test_empty_id_and_schema_errors(self, tmp_path):
        path = _write(tmp_path, "p.csv", "date,asset,close\n2024-01-02, ,100\n")
        with pytest.raises(DataError, match=r"parse_error.*line 2"):
            load_prices_csv(path, id_column="asset", value_column="close")
        with pytest.raises(DataError, match="bad_schema"):
            load_prices_csv(path, id_column="asset")
        with pytest.raises(DataError, match="unknown_column"):
            load_prices_csv(path, id_column="ticker", value_column="close")


class TestSmallLoaders:
    def test_events_round_trip_and_intersect(self, tmp_path):
        path = _write(tmp_path, "e.csv", "date\n2024-01-03\n2024-01-05\n")
        cal = load_events_csv(path, name="fomc")
        assert cal.name == "fomc"
        panel_dates = pd.DatetimeIndex(["2024-01-02", "2024-01-03", "2024-01-04"])
        assert cal.intersect(panel_dates) == [pd.Timestamp("2024-01-03")]

    def test_events_duplicate(self, tmp_path):
        path = _write(tmp_path, "e.csv", "date\n2024-01-03\n2024-01-03\n")
        with pytest.raises(DataError, match=r"duplicate_key.*line 3"):
            load_events_csv(path)

    def test_sector_map(self, tmp_path):
        path = _write(tmp_path, "s.csv", "asset,sector\nAAA,tech\nBBB,energy\n")
        assert load_sector_map_csv(path) == {"AAA": "tech", "BBB": "energy"}
        dup = _write(tmp_path, "s2.csv", "asset,sector\nAAA,tech\nAAA,energy\n")
        with pytest.raises(DataError, match=r"duplicate_key.*line 3"):
            load_sector_map_csv(dup)

    def test_weights(self, tmp_path):
        path = _write(tmp_path, "w.csv", "asset,weight\nAAA,0.6\nBBB,0.4\n")
        assert load_weights_csv(path) == {"AAA": 0.6, "BBB": 0.4}
        missing = _write(tmp_path, "w2.csv", "asset,weight\nAAA,\n")
        with pytest.raises(DataError, match="parse_error"):
            load_weights_csv(missing)


class TestBuildPanel:
    def test_log_returns_hand_check(self):
        dates = _dates(3)
        table = pd.DataFrame({"MKT": [100.0, 102.0, 101.0], "AAA": [50.0, 51.0, 52.5]}, index=dates)
        panel = build_panel(table, market_id="MKT")
        assert panel.dates.tolist() == dates[1:].tolist()
        assert panel.market_return.iloc[0] == pytest.approx(np.log(102.0 / 100.0), rel=1e-15)
        assert panel.asset_returns["AAA"].iloc[1] == pytest.approx(np.log(52.5 / 51.0), rel=1e-15)
        assert panel.assets == ("AAA",)
        assert panel.market_id == "MKT"

    def test_gap_drops_both_adjacent_returns(self):
        dates = _dates(4)
        table = pd.DataFrame(
            {"MKT": [100.0, 101.0, 102.0, 103.0], "AAA": [50.0, np.nan, 52.0, 53.0]},
            index=dates,
        )
        panel = build_panel(table, market_id="MKT")
        # returns into and out of the missing price are both unusable
        assert panel.dates.tolist() == [dates[3]]

    def test_from_returns_passthrough(self):
        dates = _dates(3)
        table = pd.DataFrame({"MKT": [0.01, -0.02, 0.0], "AAA": [0.02, 0.01, -0.01]}, index=dates)
        panel = build_panel(table, market_id="MKT", mode="from_returns")
        assert len(panel.dates) == 3
        assert panel.asset_returns["AAA"].tolist() == [0.02, 0.01, -0.01]

    def test_sector_meta_attached(self):
        dates = _dates(3)
        table = pd.DataFrame({"MKT": [0.0, 0.0, 0.0], "AAA": [0.1, 0.1, 0.1]}, index=dates)
        panel = build_panel(table, "MKT", sector_map={"AAA": "tech", "ZZZ": "other"}, mode="from_returns")
        assert panel.asset_meta == {"AAA": "tech"}

    def test_errors(self):
        dates = _dates(3)
        table = pd.DataFrame({"MKT": [100.0, 101.0, 102.0], "AAA": [50.0, np.nan, np.nan]}, index=dates)
        with pytest.raises(DataError, match="missing_market_id"):
            build_panel(table, market_id="SPX")
        with pytest.raises(DataError, match="insufficient_history"):
            build_panel(table, market_id="MKT")
        with pytest.raises(DataError, match="bad_dates"):
            build_panel(table.reset_index(drop=True), market_id="MKT")
        with pytest.raises(DataError, match="nonpositive_price"):
            build_panel(table.assign(AAA=[-1.0, 1.0, 1.0]), market_id="MKT")
        alternating = pd.DataFrame(
            {"MKT": [100.0, 101.0, np.nan], "AAA": [np.nan, 50.0, 51.0]}, index=dates
        )
        with pytest.raises(DataError, match="empty_intersection"):
            build_panel(alternating, market_id="MKT")

    def test_panel_invariants(self):
        dates = _dates(3)
        returns = pd.DataFrame({"AAA": [0.1, 0.2, 0.3]}, index=dates)
        market = pd.Series([0.0, 0.1, 0.2], index=dates, name="MKT")
        with pytest.raises(DataError, match="misaligned_panel"):
            ReturnPanel(dates=dates, asset_returns=returns.iloc[:2], market_return=market)
        with pytest.raises(DataError, match="no_assets"):
            ReturnPanel(dates=dates, asset_returns=returns.drop(columns=["AAA"]), market_return=market)
        with pytest.raises(DataError, match="nonfinite_values"):
            ReturnPanel(
                dates=dates,
                asset_returns=returns.assign(AAA=[0.1, np.inf, 0.3]),
                market_return=market,
            )

    def test_to_frame_round_trips_through_from_returns(self):
        dates = _dates(4)
        rng = np.random.default_rng(7)
        panel = ReturnPanel(
            dates=dates,
            asset_returns=pd.DataFrame(rng.normal(size=(4, 2)), index=dates, columns=["AAA", "BBB"]),
            market_return=pd.Series(rng.normal(size=4), index=dates, name="MKT"),
        )
        wide = panel.to_frame().set_index("date")
        again = build_panel(wide, market_id="MKT", mode=PanelMode.FROM_RETURNS)
        pd.testing.assert_frame_equal(
            again.asset_returns, panel.asset_returns, check_names=False, check_freq=False
        )
        pd.testing.assert_series_equal(
            again.market_return, panel.market_return, check_names=False, check_freq=False
        )


class TestBuildControls:
    def _panel(self, n=6):
        dates = _dates(n)
        return ReturnPanel(
            dates=dates,
            asset_returns=pd.DataFrame({"AAA": np.linspace(0.0, 0.01, n)}, index=dates),
            market_return=pd.Series(np.linspace(0.0, 0.02, n), index=dates, name="MKT"),
        )

    def test_derivation_hand_check(self):
        panel = self._panel(4)
        macro = pd.DataFrame(
            {
                "vix_level": [15.0, 16.5, 16.0, 18.0],
                "dxy_level": [100.0, 101.0, 100.5, 102.0],
            },
            index=panel.dates,
        )
        controls = build_controls(panel, macro)
        # differencing consumes the first panel date
        assert controls.index.tolist() == panel.dates[1:].tolist()
        assert controls.delta_vix.iloc[0] == pytest.approx(1.5)
        assert controls.dxy_ret.iloc[1] == pytest.approx(np.log(100.5 / 101.0), rel=1e-15)
        assert controls.delta_dgs10 is None
        assert not controls.is_empty

    def test_ffill_within_limit_and_beyond(self):
        # levels observed on the first two dates only; panels reach past them
        reachable = self._panel(FFILL_LIMIT + 2)
        short = pd.DataFrame({"vix_level": [15.0, 16.0]}, index=reachable.dates[:2])
        filled = build_controls(reachable, short)
        assert len(filled.delta_vix) == FFILL_LIMIT + 1
        assert filled.delta_vix.iloc[-1] == 0.0  # carried level, zero difference
        with pytest.raises(DataError, match="coverage_gap"):
            build_controls(self._panel(FFILL_LIMIT + 3), short)

    def test_macro_column_screening(self):
        panel = self._panel()
        with pytest.raises(DataError, match="unknown_column"):
            build_controls(panel, pd.DataFrame({"oil_level": [1.0] * 6}, index=panel.dates))
        mixed = pd.DataFrame({"vix_level": [15.0] * 6, "oil_level": [1.0] * 6}, index=panel.dates)
        with pytest.raises(DataError, match="unknown_column"):
            build_controls(panel, mixed)
        with pytest.raises(DataError, match="nonpositive_price"):
            build_controls(panel, pd.DataFrame({"dxy_level": [100.0, -1.0, 100, 100, 100, 100]}, index=panel.dates))

    def test_standardize(self):
        panel = self._panel()
        macro = pd.DataFrame({"vix_level": [15.0, 16.0, 14.5, 17.0, 15.5, 16.2]}, index=panel.dates)
        controls = build_controls(panel, macro, standardize=True)
        values = controls.delta_vix.to_numpy()
        assert abs(values.mean()) < 1e-12
        assert values.std() == pytest.approx(1.0)
        assert controls.standardized
        flat = pd.DataFrame({"vix_level": [15.0] * 6}, index=panel.dates)
        with pytest.raises(DataError, match="degenerate_control"):
            build_controls(panel, flat, standardize=True)

    def test_sector_path(self):
        dates = _dates(5)
        panel = ReturnPanel(
            dates=dates,
            asset_returns=pd.DataFrame({"AAA": np.ones(5), "BBB": np.ones(5)}, index=dates),
            market_return=pd.Series(np.ones(5), index=dates, name="MKT"),
            asset_meta={"AAA": "tech", "BBB": "energy"},
        )
        macro = pd.DataFrame({"vix_level": [15.0, 16, 14, 17, 15]}, index=dates)
        sectors = pd.DataFrame({"tech": np.arange(5.0), "energy": np.arange(5.0) * 2}, index=dates)
        controls = build_controls(panel, macro, sector_returns=sectors)
        assert controls.sector_ret.index.equals(controls.delta_vix.index)
        assert list(controls.sector_ret.columns) == ["tech", "energy"]

        bare = ReturnPanel(
            dates=dates,
            asset_returns=panel.asset_returns,
            market_return=panel.market_return,
            asset_meta={"AAA": "tech"},
        )
        with pytest.raises(DataError, match="unlabeled_assets"):
            build_controls(bare, macro, sector_returns=sectors)
        with pytest.raises(DataError, match="unknown_sector"):
            build_controls(panel, macro, sector_returns=sectors.drop(columns=["energy"]))

    def test_shock_controls_invariants(self):
        dates = _dates(4)
        a = pd.Series([1.0, 2.0, 3.0, 4.0], index=dates)
        with pytest.raises(DataError, match="misaligned_controls"):
            ShockControls(delta_vix=a, delta_dgs10=a.iloc[:3])
        with pytest.raises(DataError, match="not_standardized"):
            ShockControls(delta_vix=a, standardized=True)
        assert ShockControls().is_empty
        frame = ShockControls(delta_vix=a).macro_frame()
        assert list(frame.columns) == ["delta_vix"]


class TestLabelEnvironments:
    def _panel(self, n):
        dates = _dates(n)
        return ReturnPanel(
            dates=dates,
            asset_returns=pd.DataFrame({"AAA": np.zeros(n) + 0.1}, index=dates),
            market_return=pd.Series(np.zeros(n) + 0.1, index=dates, name="MKT"),
        )

    def test_terciles(self):
        panel = self._panel(9)
        levels = pd.Series(np.arange(9.0) + 10.0, index=panel.dates)
        labeling = label_environments(panel, LabelScheme.VIX_TERCILES, levels=levels)
        assert labeling.labels.tolist() == ["Low"] * 3 + ["Mid"] * 3 + ["High"] * 3
        assert labeling.labels.index.equals(panel.dates)

    def test_trend_zero_change_counts_as_down(self):
        panel = self._panel(5)
        levels = pd.Series([10.0, 11.0, 10.0, 10.0, 12.0], index=panel.dates)
        labeling = label_environments(panel, "rates_trend_60d", levels=levels, lookback=2)
        # changes over 2 rows: 10->10 (Down), 11->10 (Down), 10->12 (Up)
        assert labeling.labels.tolist() == ["Down", "Down", "Up"]
        assert labeling.labels.index.equals(panel.dates[2:])
        assert "insufficient lookback" in labeling.note

    def test_trend_needs_enough_history(self):
        panel = self._panel(3)
        levels = pd.Series([10.0, 11.0, 12.0], index=panel.dates)
        with pytest.raises(DataError, match="insufficient_lookback"):
            label_environments(panel, LabelScheme.USD_TREND, levels=levels, lookback=10)

    def test_level_schemes_require_levels(self):
        with pytest.raises(DataError, match="missing_levels"):
            label_environments(self._panel(5), LabelScheme.VIX_TERCILES)

    def test_episodes(self):
        panel = self._panel(6)
        episodes = [
            {"label": "crisis", "start": panel.dates[1], "end": panel.dates[2]},
            ("recovery", panel.dates[4], panel.dates[5]),
        ]
        labeling = label_environments(panel, LabelScheme.EPISODES, episodes=episodes, base_label="calm")
        assert labeling.labels.tolist() == ["calm", "crisis", "crisis", "calm", "recovery", "recovery"]
        assert labeling.episode_definitions[0][0] == "crisis"

    def test_episode_validation(self):
        panel = self._panel(6)
        with pytest.raises(DataError, match="missing_episodes"):
            label_environments(panel, LabelScheme.EPISODES)
        overlapping = [
            ("a", panel.dates[0], panel.dates[3]),
            ("b", panel.dates[2], panel.dates[5]),
        ]
        with pytest.raises(DataError, match="overlapping_episodes"):
            label_environments(panel, LabelScheme.EPISODES, episodes=overlapping)


class TestExactCsvRoundTrip:
    def test_panel_survives_write_and_reload_bit_for_bit(self, tmp_path):
        n = 30
        dates = _dates(n)
        rng = np.random.default_rng(99)
        panel = ReturnPanel(
            dates=dates,
            asset_returns=pd.DataFrame(
                rng.standard_normal((n, 3)) * 0.01, index=dates, columns=["AAA", "BBB", "CCC"]
            ),
            market_return=pd.Series(rng.standard_normal(n) * 0.01, index=dates, name="MKT"),
        )
        path = write_csv(panel.to_frame(), tmp_path / "returns.csv", exact=True)
        reloaded = build_panel(
            load_prices_csv(path, wide=True), market_id="MKT", mode=PanelMode.FROM_RETURNS
        )
        assert (reloaded.asset_returns.to_numpy() == panel.asset_returns.to_numpy()).all()
        assert (reloaded.market_return.to_numpy() == panel.market_return.to_numpy()).all()
