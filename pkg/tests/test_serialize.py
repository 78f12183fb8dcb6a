import json

import numpy as np
import pytest

from arimacopula.copula import FittedCopula
from arimacopula.forecast import ForecastDistribution, point_forecast, prediction_interval
from arimacopula.sarima import fit_css, forecast_point, make_fit
from arimacopula.serialize import (
    copula_from_dict,
    copula_to_dict,
    density_rows,
    dump_json,
    fmt,
    forecast_rows,
    load_fit,
    load_json,
    read_rows,
    save_fit,
    write_rows,
)
from arimacopula.series import Series
from arimacopula.synth import simulate_sarima


def same_fit(a, b):
    for name in ("params", "std_errors", "t_values", "p_values"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
    assert a.spec == b.spec and a.names == b.names
    assert a.residuals == b.residuals and a.series == b.series
    for name in ("sigma2", "objective", "mean", "ar_root_min", "ma_root_min"):
        x, y = getattr(a, name), getattr(b, name)
        assert x == y or (np.isnan(x) and np.isnan(y))


class TestFitPersistence:
    @pytest.mark.parametrize("spec,params", [("(0,2,2)", (0.2565, 0.6380)),
                                             ("(1,1,0)(1,0,1)[11]", (0.2061, 0.8768, 0.7346)),
                                             ("(1,0,1)", (0.5, 0.3))])
    def test_round_trip_is_bit_exact(self, tmp_path, spec, params):
        y = simulate_sarima(spec, params, 200, sigma=0.05, seed=1, start_level=3.0)
        fit = fit_css(Series((1995, 1), y, transform_log=1, name="z"), spec)
        back = load_fit(save_fit(fit, tmp_path / "f.json"))
        same_fit(fit, back)
        np.testing.assert_array_equal(forecast_point(fit, 10), forecast_point(back, 10))

    def test_nan_standard_errors_survive(self, tmp_path):
        fit = make_fit("(0,1,1)", [0.4], Series((2000, 1), np.cumsum(np.arange(30.0) % 7)))
        text = save_fit(fit, tmp_path / "f.json").read_text()
        assert '"nan"' in text and "NaN" not in text
        same_fit(fit, load_fit(tmp_path / "f.json"))


class TestCopulaPersistence:
    @pytest.mark.parametrize("c", [FittedCopula("clayton", 0.1 + 1 / 3), FittedCopula("t", -0.123456789, df=7.5),
                                   FittedCopula("independence")])
    def test_round_trip(self, c):
        assert copula_from_dict(json.loads(json.dumps(copula_to_dict(c)))) == c


class TestTables:
    def test_fmt_full_precision(self):
        assert float(fmt(0.1 + 0.2)) == 0.1 + 0.2
        assert fmt(np.int64(3)) == "3" and fmt("x") == "x"

    def test_rows_round_trip(self, tmp_path):
        vals = np.random.default_rng(0).standard_normal(5)
        write_rows(tmp_path / "t.csv", ("k", "v"), [(i, v) for i, v in enumerate(vals)])
        got = [float(r["v"]) for r in read_rows(tmp_path / "t.csv")]
        assert got == list(vals)

    def test_json_sorted_and_strict(self, tmp_path):
        dump_json({"b": 1, "a": 2}, tmp_path / "x.json")
        assert (tmp_path / "x.json").read_text().index('"a"') < (tmp_path / "x.json").read_text().index('"b"')
        assert load_json(tmp_path / "x.json") == {"a": 2, "b": 1}
        with pytest.raises(ValueError):
            dump_json({"a": float("nan")}, tmp_path / "y.json")

    def test_forecast_and_density_rows(self):
        d = ForecastDistribution(np.random.default_rng(1).standard_normal((2000, 3)), (2010, 12))
        rows = forecast_rows(d)
        assert [r[0] for r in rows] == ["2011-01", "2011-02", "2011-03"]
        lo, hi = prediction_interval(d)
        assert rows[1][1] == point_forecast(d)[1] and rows[2][4] == hi[2] and rows[0][3] == lo[0]
        dens = density_rows(d, bins=10)
        assert len(dens) == 30 and sum(r[3] for r in dens[:10]) == 2000
