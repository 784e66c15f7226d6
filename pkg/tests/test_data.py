"""Ingestion, calendar labels, mobility gap filling, windowing, and the
synthetic generator."""

import datetime as dt

import numpy as np
import pytest

from eadforecast.data import (
    DailyRecord,
    FeatureMask,
    SynthConfig,
    build_calendar_labels,
    fill_mobility,
    load_dataset,
    load_ead_csv,
    load_holidays,
    load_mobility_csv,
    load_weather_csv,
    make_windows,
    merge,
    synth_generate,
    write_dataset,
)
from eadforecast.errors import ConfigError, DataError


def write(path, text):
    path.write_text(text)
    return path


def weather_csv(tmp_path, rows):
    return write(tmp_path / "weather.csv", "date,tmax_c,humidity_pct\n" + "\n".join(rows) + "\n")


def ead_csv(tmp_path, rows):
    header = "date,all,children,adult,elderly,outdoor,indoor\n"
    return write(tmp_path / "ead.csv", header + "\n".join(rows) + "\n")


class TestLoaders:
    def test_weather_roundtrip(self, tmp_path):
        path = weather_csv(tmp_path, ["2020-01-01,10.5,60.0", "2020-01-02,-2.25,71.5"])
        out = load_weather_csv(path)
        assert out[dt.date(2020, 1, 2)] == (-2.25, 71.5)

    def test_weather_bad_row_reports_line(self, tmp_path):
        path = weather_csv(tmp_path, ["2020-01-01,10.5,60.0", "2020-01-02,oops,71.5"])
        with pytest.raises(DataError, match=":3:"):
            load_weather_csv(path)

    def test_weather_humidity_range(self, tmp_path):
        path = weather_csv(tmp_path, ["2020-01-01,10.5,160.0"])
        with pytest.raises(DataError, match="humidity"):
            load_weather_csv(path)

    def test_duplicate_date_rejected(self, tmp_path):
        path = weather_csv(tmp_path, ["2020-01-01,10.5,60.0", "2020-01-01,11.0,61.0"])
        with pytest.raises(DataError, match="duplicate"):
            load_weather_csv(path)

    def test_bad_header_rejected(self, tmp_path):
        path = write(tmp_path / "weather.csv", "day,tmax,rh\n2020-01-01,1,2\n")
        with pytest.raises(DataError, match="header"):
            load_weather_csv(path)

    def test_ead_counts(self, tmp_path):
        path = ead_csv(tmp_path, ["2020-01-01,100,10,40,50,20,80"])
        out = load_ead_csv(path)
        assert out[dt.date(2020, 1, 1)]["elderly"] == 50

    def test_ead_negative_rejected(self, tmp_path):
        path = ead_csv(tmp_path, ["2020-01-01,100,10,40,-50,20,80"])
        with pytest.raises(DataError, match="negative"):
            load_ead_csv(path)

    def test_mobility_sparse_ok(self, tmp_path):
        path = write(tmp_path / "mobility.csv", "date,mobility_pct\n2020-04-18,42.5\n")
        out = load_mobility_csv(path)
        assert out == {dt.date(2020, 4, 18): 42.5}

    def test_holidays_with_comments(self, tmp_path):
        path = write(tmp_path / "holidays.txt", "# new year\n2020-01-01\n\n2020-05-04 # midweek\n")
        assert load_holidays(path) == {dt.date(2020, 1, 1), dt.date(2020, 5, 4)}


class TestCalendarLabels:
    def test_saturday_is_off(self):
        assert build_calendar_labels([dt.date(2020, 1, 4)], set()) == [0]

    def test_midweek_holiday_is_off(self):
        wednesday = dt.date(2020, 1, 8)
        assert build_calendar_labels([wednesday], {wednesday}) == [0]

    def test_plain_tuesday_is_working(self):
        assert build_calendar_labels([dt.date(2020, 1, 7)], set()) == [1]


class TestMerge:
    def rows(self, days, start=dt.date(2020, 1, 1)):
        w, e = [], []
        for n in range(days):
            d = (start + dt.timedelta(days=n)).isoformat()
            w.append(f"{d},10.0,60.0")
            e.append(f"{d},100,10,40,50,20,80")
        return w, e

    def test_three_day_merge(self, tmp_path):
        w, e = self.rows(3)
        records = load_dataset(weather_csv(tmp_path, w), ead_csv(tmp_path, e))
        assert len(records) == 3
        assert records[0].ead["all"] == 100

    def test_gap_reported(self, tmp_path):
        w, e = self.rows(3)
        del w[1]  # drop 2020-01-02 from weather
        with pytest.raises(DataError, match="2020-01-02"):
            merge(load_weather_csv(weather_csv(tmp_path, w)), load_ead_csv(ead_csv(tmp_path, e)), None, set())

    def test_mobility_suffix_coverage(self, tmp_path):
        # Sparse mobility covering only the end of the span merges fine and
        # leaves earlier days to fill_mobility.
        w, e = self.rows(5)
        mob = write(tmp_path / "mobility.csv", "date,mobility_pct\n2020-01-04,80.0\n2020-01-05,60.0\n")
        records = load_dataset(weather_csv(tmp_path, w), ead_csv(tmp_path, e), mobility_path=mob)
        assert [r.mobility for r in records] == [None, None, None, 80.0, 60.0]


def plain_records(dates, mobility):
    return [
        DailyRecord(
            date=d, tmax=10.0, humidity=60.0, day_label=1,
            ead={g: 10 for g in ("all", "children", "adult", "elderly", "outdoor", "indoor")},
            mobility=m,
        )
        for d, m in zip(dates, mobility)
    ]


def date_range(start, days):
    return [start + dt.timedelta(days=n) for n in range(days)]


class TestFillMobility:
    def test_interior_gap_midpoint(self):
        dates = date_range(dt.date(2020, 5, 1), 3)
        records = plain_records(dates, [80.0, None, 60.0])
        filled = fill_mobility(records)
        assert filled[1].mobility == 70.0

    def test_january_baseline_is_100(self):
        dates = date_range(dt.date(2020, 1, 1), 31)
        records = plain_records(dates, [None] * 31)
        filled = fill_mobility(records, baseline_month="2020-01")
        assert all(r.mobility == 100.0 for r in filled)

    def test_baseline_to_first_observation_interpolates(self):
        # Anchor at Jan 31 (100) to Apr 18 (40): Mar 5 is 34 of 78 days in,
        # so 100 + (40-100)*34/78.
        dates = date_range(dt.date(2020, 1, 1), 200)
        mobility = [None] * 200
        idx_apr18 = (dt.date(2020, 4, 18) - dates[0]).days
        mobility[idx_apr18] = 40.0
        filled = fill_mobility(plain_records(dates, mobility), baseline_month="2020-01")
        idx_mar5 = (dt.date(2020, 3, 5) - dates[0]).days
        expected = 100.0 + (40.0 - 100.0) * 34.0 / 78.0
        assert filled[idx_mar5].mobility == pytest.approx(expected, abs=1e-12)
        assert filled[10].mobility == 100.0  # leading January day

    def test_trailing_hold(self):
        dates = date_range(dt.date(2020, 5, 1), 4)
        filled = fill_mobility(plain_records(dates, [70.0, None, None, None]))
        assert [r.mobility for r in filled] == [70.0, 70.0, 70.0, 70.0]

    def test_no_observations_no_baseline_rejected(self):
        dates = date_range(dt.date(2020, 5, 1), 3)
        with pytest.raises(DataError):
            fill_mobility(plain_records(dates, [None, None, None]))

    def test_piecewise_linear_between_observations(self):
        # Second difference vanishes strictly between observation points.
        dates = date_range(dt.date(2020, 2, 1), 30)
        mobility = [None] * 30
        mobility[0], mobility[12], mobility[29] = 90.0, 54.0, 71.0
        filled = fill_mobility(plain_records(dates, mobility))
        values = np.array([r.mobility for r in filled])
        for seg in (values[0:13], values[12:30]):
            assert np.allclose(np.diff(seg, n=2), 0.0, atol=1e-9)


class TestMakeWindows:
    def records(self, days):
        return plain_records(date_range(dt.date(2020, 1, 1), days), [100.0] * days)

    def test_count_span10_l7_k1(self):
        assert len(make_windows(self.records(10), 7, 1, FeatureMask())) == 3

    def test_count_span10_l7_k3(self):
        assert len(make_windows(self.records(10), 7, 3, FeatureMask())) == 1

    def test_count_formula_property(self):
        rng = np.random.default_rng(0)
        for _ in range(40):
            span = int(rng.integers(2, 40))
            L = int(rng.integers(1, span))
            K = int(rng.integers(1, span - L + 1))
            wins = make_windows(self.records(span), L, K, FeatureMask())
            assert len(wins) == span - L - K + 1

    def test_mask_drops_column(self):
        mask = FeatureMask(temperature=True, humidity=True, day_label=True, mobility=False)
        wins = make_windows(self.records(10), 7, 1, mask)
        assert wins[0].inputs.shape == (7, 3)

    def test_span_too_short(self):
        with pytest.raises(DataError):
            make_windows(self.records(5), 7, 1, FeatureMask())

    def test_targets_follow_inputs(self):
        records = self.records(12)
        for i, r in enumerate(records):
            r.ead["all"] = i
        wins = make_windows(records, 7, 3, FeatureMask())
        assert np.array_equal(wins[0].target, [7.0, 8.0, 9.0])
        assert wins[0].anchor_date == records[7].date

    def test_round_trip_bit_exact(self):
        records = self.records(12)
        rng = np.random.default_rng(1)
        for r in records:
            r.tmax = float(rng.normal(15, 9))
            r.humidity = float(rng.uniform(30, 90))
        wins = make_windows(records, 7, 1, FeatureMask())
        assert wins[0].inputs[0, 0] == records[0].tmax
        assert wins[-1].inputs[-1, 1] == records[-2].humidity


class TestSynthGenerate:
    def test_deterministic(self):
        a = synth_generate(SynthConfig(end=dt.date(2015, 3, 31)), seed=3)
        b = synth_generate(SynthConfig(end=dt.date(2015, 3, 31)), seed=3)
        assert all(
            ra.tmax == rb.tmax and ra.ead == rb.ead and ra.mobility == rb.mobility
            for ra, rb in zip(a.records, b.records)
        )

    def test_group_sums(self):
        result = synth_generate(SynthConfig(end=dt.date(2015, 3, 31)), seed=0)
        for r in result.records:
            assert r.ead["children"] + r.ead["adult"] + r.ead["elderly"] == r.ead["all"]
            assert r.ead["outdoor"] + r.ead["indoor"] == r.ead["all"]

    def test_mobility_factor_normalized_at_baseline(self):
        from eadforecast.data import _dispatch_factors

        cfg = SynthConfig()
        _, _, _, g = _dispatch_factors(cfg, 20.0, 60.0, 1, 100.0)
        assert g == pytest.approx(1.0, abs=1e-15)

    def test_u_shape_present_pre_pandemic(self):
        # Counts correlate positively with distance from the comfort
        # temperature before the pandemic regime starts.
        cfg = SynthConfig()
        result = synth_generate(cfg, seed=0)
        pre = [r for r in result.records if r.date < cfg.pandemic_start]
        dist = np.array([abs(r.tmax - cfg.comfort_temp) for r in pre])
        counts = np.array([r.ead["all"] for r in pre], dtype=float)
        corr = np.corrcoef(dist, counts)[0, 1]
        assert corr > 0.3

    def test_pandemic_mobility_is_suppressed(self):
        cfg = SynthConfig()
        result = synth_generate(cfg, seed=0)
        soe = [r.mobility for r in result.records if cfg.soe_start <= r.date <= cfg.soe_end]
        pre = [r.mobility for r in result.records if r.date < cfg.pandemic_start]
        assert 15.0 < np.mean(soe) < 45.0
        assert np.mean(pre) > 90.0

    def test_default_span(self):
        result = synth_generate(SynthConfig(), seed=0)
        assert result.records[0].date == dt.date(2014, 4, 1)
        assert result.records[-1].date == dt.date(2020, 8, 19)

    def test_invalid_span(self):
        with pytest.raises(ConfigError):
            synth_generate(SynthConfig(start=dt.date(2020, 1, 1), end=dt.date(2019, 1, 1)))


class TestWriteReadRoundTrip:
    def test_values_survive_bit_exactly(self, tmp_path):
        result = synth_generate(SynthConfig(end=dt.date(2014, 12, 31)), seed=5)
        paths = write_dataset(result, tmp_path)
        records = load_dataset(
            paths["weather"], paths["ead"],
            mobility_path=paths["mobility"], holidays_path=paths["holidays"],
        )
        assert len(records) == len(result.records)
        for original, loaded in zip(result.records, records):
            assert loaded.tmax == original.tmax
            assert loaded.humidity == original.humidity
            assert loaded.mobility == original.mobility
            assert loaded.ead == original.ead
            assert loaded.day_label == original.day_label

    def test_one_year_row_count(self, tmp_path):
        result = synth_generate(
            SynthConfig(start=dt.date(2016, 1, 1), end=dt.date(2016, 12, 31)), seed=0
        )
        assert len(result.records) == 366  # leap year
