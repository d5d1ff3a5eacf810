import warnings

import numpy as np
import pytest

import oracles
from gpforecast import (
    ConstantSeriesError,
    HyperParams,
    KernelSpec,
    Standardizer,
    Term,
    TimeSeries,
    default_horizon,
    default_spec,
    fit,
    forecast,
    future_time_index,
    make_time_index,
    parse_frequency,
    predict,
)


class TestTimeIndex:
    def test_monthly_one_year_is_exact(self):
        ts = TimeSeries(values=np.zeros(14), steps_per_year=12.0)
        index = make_time_index(ts)
        assert index[12] == 1.0
        assert index[0] == 0.0

    def test_quarterly_half_year(self):
        ts = TimeSeries(values=np.zeros(4), steps_per_year=4.0)
        assert make_time_index(ts)[2] == 0.5

    def test_six_hourly_full_year(self):
        # 4 steps/day * 365.25 days/year = 1461 steps/year
        ts = TimeSeries(values=np.zeros(1462), steps_per_year=1461.0)
        assert make_time_index(ts)[1461] == 1.0

    def test_future_index_continues_the_grid(self):
        ts = TimeSeries(values=np.zeros(10), steps_per_year=12.0)
        future = future_time_index(ts, 3)
        np.testing.assert_array_equal(future, np.array([10.0, 11.0, 12.0]) / 12.0)

    def test_bad_frequency_rejected(self):
        with pytest.raises(ValueError):
            TimeSeries(values=np.zeros(3), steps_per_year=0.0)
        with pytest.raises(ValueError):
            parse_frequency("-4")
        with pytest.raises(ValueError):
            parse_frequency("sometimes")

    def test_parse_frequency_names(self):
        assert parse_frequency("monthly") == 12.0
        assert parse_frequency("quarterly") == 4.0
        assert parse_frequency("1461") == 1461.0


class TestDefaultSpec:
    def test_single_seasonal_composition(self):
        spec = default_spec("single-seasonal")
        assert len(spec.terms) == 6
        assert spec.kinds() == ("PER", "LIN", "RBF", "SM1", "SM2", "WN")
        assert spec.term("PER").period == 1.0

    def test_double_seasonal_composition(self):
        spec = default_spec("double-seasonal")
        assert len(spec.terms) == 7
        assert spec.kinds() == ("PER", "PER2", "LIN", "RBF", "SM1", "SM2", "WN")
        assert spec.term("PER").period == pytest.approx(1.0 / 52.18)
        assert spec.term("PER2").period == pytest.approx(1.0 / 365.25)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            default_spec("triple")

    def test_default_horizons(self):
        assert default_horizon(TimeSeries(values=np.zeros(8), steps_per_year=12.0)) == 18
        assert default_horizon(TimeSeries(values=np.zeros(8), steps_per_year=4.0)) == 8
        assert default_horizon(TimeSeries(values=np.zeros(8), steps_per_year=1461.0)) == 42
        with pytest.raises(ValueError):
            default_horizon(TimeSeries(values=np.zeros(8), steps_per_year=52.0))


class TestStandardizer:
    def test_round_trip_is_exact_to_float_precision(self):
        rng = np.random.default_rng(0)
        values = 100.0 + 7.0 * rng.standard_normal(50)
        std = Standardizer.fit(values)
        back = std.inverse(std.transform(values))
        np.testing.assert_allclose(back, values, rtol=1e-12, atol=1e-12)

    def test_transform_has_zero_mean_unit_variance(self):
        rng = np.random.default_rng(1)
        values = rng.uniform(5.0, 9.0, size=40)
        z = Standardizer.fit(values).transform(values)
        assert float(z.mean()) == pytest.approx(0.0, abs=1e-12)
        assert float(z.std()) == pytest.approx(1.0, abs=1e-12)

    def test_constant_series_rejected(self):
        with pytest.raises(ConstantSeriesError):
            Standardizer.fit(np.full(10, 3.3))


class TestForecast:
    def test_sine_series_forecast_is_accurate(self, sine_forecast_run):
        assert sine_forecast_run["mae_standardized"] <= 0.1

    def test_forecast_shapes_and_positivity(self, sine_forecast_run):
        fc = sine_forecast_run["forecast"]
        assert fc.horizon == 18
        assert fc.mean.shape == (18,)
        assert fc.variance.shape == (18,)
        assert np.all(fc.variance > 0)

    def test_noise_series_forecasts_stay_calibrated(self, noise_forecast_runs):
        mean_passes = sum(1 for r in noise_forecast_runs if r["mean_ok"])
        sd_passes = sum(1 for r in noise_forecast_runs if r["sd_ok"])
        assert mean_passes >= 18, f"forecast means inside +-0.5 in only {mean_passes}/20 runs"
        assert sd_passes >= 18, f"predictive sd inside [0.5, 2.0]x in only {sd_passes}/20 runs"

    def test_power_of_two_scaling_is_bit_exact(self):
        rng = np.random.default_rng(31)
        t = np.arange(40) / 12.0
        base = np.sin(2 * np.pi * t) + 0.3 * rng.standard_normal(40)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fc1, _ = forecast(TimeSeries(values=base, steps_per_year=12.0), 6)
            fc2, _ = forecast(TimeSeries(values=2.0 * base, steps_per_year=12.0), 6)
        np.testing.assert_array_equal(fc2.mean, 2.0 * fc1.mean)
        np.testing.assert_array_equal(fc2.variance, 4.0 * fc1.variance)

    def test_general_affine_equivariance(self):
        rng = np.random.default_rng(37)
        t = np.arange(48) / 12.0
        base = 0.5 * t + np.sin(2 * np.pi * t) + 0.2 * rng.standard_normal(48)
        a, b = 3.0, 10.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fc1, _ = forecast(TimeSeries(values=base, steps_per_year=12.0), 6)
            fc2, _ = forecast(TimeSeries(values=a * base + b, steps_per_year=12.0), 6)
        np.testing.assert_allclose(fc2.mean, a * fc1.mean + b, rtol=1e-3, atol=1e-3)
        np.testing.assert_allclose(fc2.variance, a * a * fc1.variance, rtol=1e-3)

    def test_constant_series_raises(self):
        with pytest.raises(ConstantSeriesError):
            forecast(TimeSeries(values=np.ones(20), steps_per_year=12.0), 3)

    def test_short_series_rejected(self):
        with pytest.raises(ValueError, match="at least 8"):
            forecast(TimeSeries(values=np.arange(7.0), steps_per_year=12.0), 3)

    def test_bad_horizon_rejected(self):
        with pytest.raises(ValueError, match="horizon"):
            forecast(TimeSeries(values=np.arange(12.0), steps_per_year=12.0), 0)


class TestDoubleSeasonal:
    def test_six_hourly_series_with_daily_pattern(self):
        # 30 days of 6-hour steps: a daily cycle plus a weekly level shift
        rng = np.random.default_rng(47)
        n = 120
        steps = np.arange(n)
        daily = np.sin(2.0 * np.pi * steps / 4.0)
        weekly = 0.5 * np.sin(2.0 * np.pi * steps / 28.0)
        values = 3.0 + daily + weekly + 0.1 * rng.standard_normal(n)
        ts = TimeSeries(values=values, steps_per_year=1461.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fc, result = forecast(ts, 8, mode="double-seasonal")
        assert fc.mean.shape == (8,)
        assert np.all(fc.variance > 0)
        # the daily cycle extrapolates: the forecast must track its phase
        future_daily = np.sin(2.0 * np.pi * np.arange(n, n + 8) / 4.0)
        assert float(np.mean(np.abs(fc.mean - 3.0 - future_daily))) < 0.75


class TestHorizonMonotonicity:
    def test_rbf_variance_grows_with_distance(self):
        # fixed hyperparameters: the property is about the model, not training
        spec = KernelSpec(terms=(Term("RBF"), Term("WN")))
        theta = HyperParams(s2_rbf=1.0, ell_rbf=1.0, s2_noise=0.1)
        rng = np.random.default_rng(41)
        x = np.linspace(0.0, 4.0, 20)
        y = rng.standard_normal(20)
        state = fit(spec, theta, x, y)
        x_star = 4.0 + np.linspace(0.05, 5.0, 40)
        posterior = predict(state, spec, theta, x_star)
        diffs = np.diff(posterior.observation_variance)
        assert np.all(diffs >= -1e-12)
