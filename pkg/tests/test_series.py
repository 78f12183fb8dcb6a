import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arimacopula.errors import EmptyInput, InitialMismatch, InsufficientLength, MissingMonth, NonPositiveValue
from arimacopula.series import (
    DailyRecord,
    Series,
    add_months,
    difference,
    format_month,
    integrate,
    integrate_array,
    log_transform,
    monthly_average,
    months_between,
    parse_month,
    read_csv,
    write_csv,
)


def rec(y, m, d, v):
    return DailyRecord(dt.date(y, m, d), v)


class TestCalendar:
    def test_add_months_wraps_years(self):
        assert add_months((2010, 11), 3) == (2011, 2)
        assert add_months((2011, 1), -1) == (2010, 12)

    def test_months_between(self):
        assert months_between((1998, 1), (2010, 12)) == 155

    def test_parse_and_format(self):
        assert parse_month("2011-06") == (2011, 6)
        assert format_month((2011, 6)) == "2011-06"


class TestSeries:
    def test_values_are_read_only_copies(self):
        src = np.array([1.0, 2.0])
        s = Series((2000, 1), src)
        src[0] = 99.0
        assert s.values[0] == 1.0
        with pytest.raises(ValueError):
            s.values[0] = 5.0

    def test_rejects_empty_and_nonfinite(self):
        with pytest.raises(EmptyInput):
            Series((2000, 1), [])
        with pytest.raises(ValueError):
            Series((2000, 1), [1.0, math.nan])

    def test_window_and_index(self):
        s = Series((2000, 11), [1.0, 2.0, 3.0, 4.0])
        assert s.end == (2001, 2)
        w = s.window((2000, 12), (2001, 1))
        assert w.start == (2000, 12) and list(w.values) == [2.0, 3.0]


class TestMonthlyAverage:
    def test_mean_of_two_points(self):
        s = monthly_average([rec(2020, 1, 10, 4.0), rec(2020, 1, 20, 6.0)])
        assert s.start == (2020, 1) and list(s.values) == [5.0]

    def test_constant_per_month(self):
        recs = [rec(2019, m, 15, 2.5) for m in range(1, 13)]
        assert list(monthly_average(recs).values) == [2.5] * 12

    def test_one_to_thirty_one(self):
        recs = [rec(2020, 1, d, float(d)) for d in range(1, 32)]
        assert list(monthly_average(recs).values) == [sum(range(1, 32)) / 31]

    def test_empty(self):
        with pytest.raises(EmptyInput):
            monthly_average([])

    def test_gap_month(self):
        with pytest.raises(MissingMonth) as exc:
            monthly_average([rec(2020, 1, 5, 1.0), rec(2020, 3, 5, 1.0)])
        assert (exc.value.year, exc.value.month) == (2020, 2)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=25), st.randoms(use_true_random=False))
    def test_permutation_invariant(self, vals, rnd):
        recs = [rec(2020, 5, i + 1, v) for i, v in enumerate(vals)]
        shuffled = recs[:]
        rnd.shuffle(shuffled)
        assert monthly_average(recs).values[0] == monthly_average(shuffled).values[0]


class TestLog:
    def test_powers_of_e(self):
        s = log_transform(Series((2000, 1), [1.0, math.e, math.e**2]))
        np.testing.assert_allclose(s.values, [0.0, 1.0, 2.0], atol=1e-15)
        assert s.transform_log == 1

    def test_fraction_is_fine(self):
        assert log_transform(Series((2000, 1), [0.5])).values[0] == math.log(0.5)

    def test_nonpositive(self):
        with pytest.raises(NonPositiveValue) as exc:
            log_transform(Series((2000, 1), [2.0, 0.0]))
        assert exc.value.index == 1

    def test_exp_recovers(self):
        x = np.random.default_rng(0).lognormal(0, 3, 500)
        back = np.exp(log_transform(Series((2000, 1), x)).values)
        np.testing.assert_allclose(back, x, rtol=1e-12)


class TestDifference:
    s = Series((2000, 1), [1.0, 3.0, 6.0, 10.0])

    def test_first(self):
        d = difference(self.s, 1)
        assert list(d.values) == [2, 3, 4] and d.start == (2000, 2) and d.diff_spec == (1, 0, 1)

    def test_second(self):
        assert list(difference(self.s, 2).values) == [1, 1]

    def test_seasonal(self):
        d = difference(Series((2000, 1), [1, 2, 3, 4, 5, 6]), 0, 1, 3)
        assert list(d.values) == [3, 3, 3] and d.diff_spec == (0, 1, 3)

    def test_too_short(self):
        with pytest.raises(InsufficientLength):
            difference(Series((2000, 1), [1.0, 2.0]), 2)


class TestIntegrate:
    def test_first(self):
        deltas = Series((2000, 2), [2.0, 3.0, 4.0], diff_spec=(1, 0, 1))
        out = integrate(deltas, [1.0])
        assert list(out.values) == [1, 3, 6, 10] and out.start == (2000, 1)

    def test_second(self):
        assert list(integrate(Series((2000, 3), [1.0, 1.0], diff_spec=(2, 0, 1)), [1, 3]).values) == [1, 3, 6, 10]

    def test_wrong_initial_count(self):
        with pytest.raises(InitialMismatch):
            integrate(Series((2000, 3), [1.0, 1.0], diff_spec=(2, 0, 1)), [1.0])

    def test_random_walk_round_trip(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            x = Series((1990, 1), np.cumsum(rng.integers(-50, 50, 60)).astype(float))
            assert integrate(difference(x, 1), x.values[:1]) == x

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.integers(-10**6, 10**6), min_size=30, max_size=60),
        st.integers(0, 2), st.integers(0, 2), st.integers(2, 6),
    )
    def test_exact_round_trip(self, ints, d, D, period):
        # integer-valued data keeps every partial sum exact
        x = Series((2000, 1), np.array(ints, dtype=float))
        if len(x) <= d + D * period:
            return
        dx = difference(x, d, D, period)
        back = integrate(dx, x.values[: d + D * period])
        assert np.array_equal(back.values, x.values)

    def test_two_dimensional_paths(self):
        paths = np.arange(12, dtype=float).reshape(3, 4)
        out = integrate_array(paths, np.array([5.0]), 1, 0, 1)
        np.testing.assert_array_equal(out[:, 0], 5.0)
        np.testing.assert_array_equal(out[1], 5.0 + np.concatenate([[0], np.cumsum(paths[1])]))


class TestCsv:
    def test_daily_file_averaged(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("date,value\n2020-01-02,1.0\n2020-01-30,3.0\n2020-02-14,5.0\n")
        s = read_csv(p)
        assert s.start == (2020, 1) and list(s.values) == [2.0, 5.0] and s.name == "x"

    def test_monthly_round_trip_is_lossless(self, tmp_path):
        x = Series((1998, 1), np.random.default_rng(3).normal(size=40), name="y")
        write_csv(x, tmp_path / "y.csv")
        assert read_csv(tmp_path / "y.csv") == x

    def test_monthly_gap(self, tmp_path):
        p = tmp_path / "g.csv"
        p.write_text("date,value\n2020-01,1\n2020-03,2\n")
        with pytest.raises(MissingMonth):
            read_csv(p)

    def test_unsorted_daily(self, tmp_path):
        p = tmp_path / "u.csv"
        p.write_text("date,value\n2020-01-05,1\n2020-01-02,2\n")
        with pytest.raises(ValueError):
            read_csv(p)

    def test_header_required(self, tmp_path):
        p = tmp_path / "h.csv"
        p.write_text("2020-01,1\n")
        with pytest.raises(ValueError):
            read_csv(p)
