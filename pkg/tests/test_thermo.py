import numpy as np
import pytest

from skyhdr.thermo import (
    PlantConfig,
    ThermoTrace,
    Thresholds,
    analyze_trace,
    controller_step,
    day_ambient,
    day_solar,
    format_summary,
    read_trace,
    sealed_default,
    simulate,
    ventilated_default,
    write_trace,
)

DAY = 86400.0


def constant_plant(ambient=25.0, solar=0.0, model="ventilated", q_cool=0.0, **kw):
    return PlantConfig(
        model=model,
        k_env=kw.get("k_env", 1 / 600),
        q_solar_peak=kw.get("q_solar_peak", 0.011),
        q_cool=q_cool,
        ambient_profile=lambda t: ambient,
        solar_profile=lambda t: solar,
        dt=kw.get("dt", 1.0),
    )


class TestController:
    def test_switches_on_at_threshold(self):
        assert controller_step(False, 37.0, Thresholds()) is True

    def test_stays_on_inside_band(self):
        assert controller_step(True, 33.0, Thresholds()) is True

    def test_stays_off_below_threshold(self):
        assert controller_step(False, 36.9, Thresholds()) is False

    def test_switches_off_below_band(self):
        assert controller_step(True, 31.9, Thresholds()) is False

    def test_boundary_off_threshold(self):
        # exactly 32 has not yet fallen below the band
        assert controller_step(True, 32.0, Thresholds()) is True

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            Thresholds(t_on=30.0, t_off=32.0)
        with pytest.raises(ValueError):
            Thresholds(t_on=41.0, t_max=40.0)


class TestSimulate:
    def test_equilibrium_stays_constant(self):
        trace = simulate(constant_plant(ambient=25.0), Thresholds(), 3600)
        assert np.allclose(trace.temps_c, 25.0)
        assert not trace.cooler_on.any()

    def test_decay_toward_ambient(self):
        plant = PlantConfig(model="sealed", k_env=1 / 600, q_solar_peak=0.0, q_cool=0.002,
                            ambient_profile=lambda t: 25.0 if t > 0 else 35.0,
                            solar_profile=lambda t: 0.0)
        trace = simulate(plant, Thresholds(), 7200)
        assert trace.temps_c[0] == 35.0
        assert (np.diff(trace.temps_c) <= 0).all()
        assert not trace.cooler_on.any()
        assert trace.temps_c[-1] == pytest.approx(25.0, abs=0.1)

    def test_fixed_point_convergence(self):
        plant = constant_plant(ambient=25.0, solar=0.6, k_env=1 / 600, q_solar_peak=0.011)
        target = 25.0 + 0.011 * 0.6 * 600.0
        trace = simulate(plant, Thresholds(), 6000)  # 10 / k_env
        assert trace.temps_c[-1] == pytest.approx(target, abs=0.1)
        gap = np.abs(trace.temps_c - target)
        assert (np.diff(gap) <= 1e-12).all()

    def test_sealed_day_respects_band_and_limit(self):
        trace = simulate(sealed_default(), Thresholds(), DAY)
        assert trace.temps_c.max() <= 40.0
        on = trace.cooler_on.astype(int)
        on_events = np.flatnonzero(np.diff(on) == 1) + 1
        off_events = np.flatnonzero(np.diff(on) == -1) + 1
        assert len(on_events) >= 1
        for idx in on_events:
            assert 37.0 <= trace.temps_c[idx] <= 37.5
        for idx in off_events:
            assert 31.5 <= trace.temps_c[idx] < 32.0

    def test_sealed_smoother_than_ventilated(self):
        sealed = analyze_trace(simulate(sealed_default(), Thresholds(), DAY))
        vented = analyze_trace(simulate(ventilated_default(), Thresholds(), DAY))
        assert sealed.total_variation_c < vented.total_variation_c

    def test_ventilated_never_cools(self):
        trace = simulate(ventilated_default(), Thresholds(), DAY)
        assert not trace.cooler_on.any()

    def test_halving_dt_stable(self):
        final = {}
        for dt in (1.0, 0.5):
            trace = simulate(sealed_default(dt=dt), Thresholds(), DAY)
            final[dt] = trace.temps_c[-1]
        assert abs(final[1.0] - final[0.5]) < 0.1

    def test_duration_must_match_step(self):
        with pytest.raises(ValueError, match="multiple"):
            simulate(constant_plant(), Thresholds(), 100.5)

    def test_non_finite_profile_rejected(self):
        plant = PlantConfig(model="ventilated", k_env=1 / 600, q_solar_peak=0.01, q_cool=0.0,
                            ambient_profile=lambda t: float("nan") if t > 10 else 25.0,
                            solar_profile=lambda t: 0.0)
        with pytest.raises(ValueError, match="non-finite"):
            simulate(plant, Thresholds(), 100)

    def test_profiles_match_climate(self):
        temps = [day_ambient(t) for t in range(0, 86400, 60)]
        assert min(temps) == pytest.approx(25.0, abs=0.01)
        assert max(temps) == pytest.approx(33.0, abs=0.01)
        assert day_solar(0.0) == 0.0
        assert day_solar(43200.0) == pytest.approx(1.0)

    def test_plant_validation(self):
        with pytest.raises(ValueError, match="cooler"):
            PlantConfig(model="ventilated", k_env=1 / 600, q_solar_peak=0.01, q_cool=0.01,
                        ambient_profile=day_ambient, solar_profile=day_solar)
        with pytest.raises(ValueError, match="model"):
            PlantConfig(model="open", k_env=1 / 600, q_solar_peak=0.01, q_cool=0.0,
                        ambient_profile=day_ambient, solar_profile=day_solar)


class TestAnalyzeTrace:
    def test_constant_trace(self):
        trace = ThermoTrace([0, 1, 2], [30.0, 30.0, 30.0], [False, False, False])
        summary = analyze_trace(trace)
        assert summary.total_variation_c == 0.0
        assert summary.duty_fraction == 0.0

    def test_hand_sum(self):
        trace = ThermoTrace([0, 1, 2], [30.0, 32.0, 31.0], [False, True, False])
        summary = analyze_trace(trace)
        assert summary.max_c == 32.0
        assert summary.min_c == 30.0
        assert summary.total_variation_c == pytest.approx(3.0)
        assert summary.duty_fraction == pytest.approx(1 / 3)

    def test_format(self):
        trace = ThermoTrace([0, 1], [30.0, 31.0], [False, True])
        line = format_summary(analyze_trace(trace))
        assert line == "max=31.000 min=30.000 variation=1.000 duty=0.500000"

    def test_trace_validation(self):
        with pytest.raises(ValueError):
            ThermoTrace([], [], [])
        with pytest.raises(ValueError):
            ThermoTrace([0, 1], [30.0], [False])
        with pytest.raises(ValueError):
            ThermoTrace([0, 2, 3], [30.0, 31.0, 32.0], [False] * 3)  # non-uniform
        with pytest.raises(ValueError):
            ThermoTrace([0, 0], [30.0, 31.0], [False, False])


class TestTraceIO:
    def test_round_trip(self, tmp_path):
        trace = simulate(sealed_default(), Thresholds(), 600)
        path = tmp_path / "trace.csv"
        write_trace(trace, path)
        back = read_trace(path)
        assert np.array_equal(back.times_s, trace.times_s)
        assert np.array_equal(back.cooler_on, trace.cooler_on)
        assert np.allclose(back.temps_c, trace.temps_c, atol=5e-4)

    def test_header_and_precision(self, tmp_path):
        trace = ThermoTrace([0, 1], [25.12345, 26.0], [False, True])
        path = tmp_path / "trace.csv"
        write_trace(trace, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t_s,temp_c,cooler_on"
        assert lines[1] == "0,25.123,0"
        assert lines[2] == "1,26.000,1"

    def test_accepts_measured_log(self, tmp_path):
        path = tmp_path / "measured.csv"
        path.write_text("t_s,temp_c,cooler_on\n0,29.1,0\n300,31.7,0\n600,33.4,1\n")
        summary = analyze_trace(read_trace(path))
        assert summary.max_c == pytest.approx(33.4)
        assert summary.duty_fraction == pytest.approx(1 / 3)

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,temp\n0,1\n")
        with pytest.raises(ValueError, match="header"):
            read_trace(path)

    def test_rejects_malformed_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t_s,temp_c,cooler_on\n0,25.0,yes\n")
        with pytest.raises(ValueError):
            read_trace(path)

    def test_rejects_bad_flag(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t_s,temp_c,cooler_on\n0,25.0,2\n")
        with pytest.raises(ValueError, match="cooler_on"):
            read_trace(path)
