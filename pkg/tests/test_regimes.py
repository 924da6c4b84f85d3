import math

import numpy as np
import pytest

from spinbattery import (
    EnergyTrace,
    IsingParams,
    QuenchProtocol,
    asymptotic_energy,
    energy_at_times,
    energy_trace,
    find_recurrence,
    find_short_time_max,
    ising_energy_trace,
    occupation_snapshot,
    resolution_bound,
    scaling_study,
    sweep_delta0,
    sweep_field,
)
from spinbattery.ising import ising_resolution_bound
from spinbattery.regimes import (
    DT_SAFETY,
    RecurrenceWindowWarning,
    RegimeDetectionError,
    analyze_trace,
    default_recurrence_window,
    ising_recurrence_window,
    linear_fit,
)


def _synthetic_trace(times, values):
    return EnergyTrace(
        times=np.asarray(times, dtype=float),
        values=np.asarray(values, dtype=float),
        protocol=None,
        evaluator="synthetic",
    )


class TestFindShortTimeMax:
    def test_single_cosine_peak(self):
        # pure 1 - cos(2 w t) peaks first at t = pi / (2 w)
        w = 0.8
        times = np.arange(0.0, 10.0, 0.01)
        trace = _synthetic_trace(times, 1.0 - np.cos(2 * w * times))
        tau, peak = find_short_time_max(trace)
        assert tau == pytest.approx(math.pi / (2 * w), abs=1e-4)
        assert peak == pytest.approx(2.0, abs=1e-6)

    def test_ising_two_mode_chain_is_single_cosine(self):
        # N=2 has modes at k = pi/2 and 3 pi/2 with one common frequency, so
        # the whole trace is a single cosine and tau_s is exactly analytic
        params = IsingParams(0.8, 0.7, 2)
        omega = math.sqrt(1 + 1.5**2 - 2 * 1.5 * math.cos(math.pi / 2))
        dt = 0.5 * ising_resolution_bound(params)
        trace = ising_energy_trace(params, 8.0, dt)
        tau, _ = find_short_time_max(trace)
        assert tau == pytest.approx(math.pi / (2 * omega), abs=1e-3)

    def test_flat_trace_fails(self):
        trace = _synthetic_trace(np.arange(0.0, 5.0, 0.1), np.zeros(50))
        with pytest.raises(RegimeDetectionError):
            find_short_time_max(trace)

    def test_monotone_trace_fails(self):
        times = np.arange(0.0, 5.0, 0.1)
        with pytest.raises(RegimeDetectionError):
            find_short_time_max(_synthetic_trace(times, times**2))

    def test_refinement_beats_grid(self):
        # vertex between samples: parabolic refinement must land closer to
        # the true maximum than the raw grid resolution
        times = np.arange(0.0, 3.0, 0.13)
        true_tau = 1.234
        values = 5.0 - (times - true_tau) ** 2
        tau, peak = find_short_time_max(_synthetic_trace(times, values))
        assert tau == pytest.approx(true_tau, abs=1e-9)
        assert peak == pytest.approx(5.0, abs=1e-9)


class TestFindRecurrence:
    def test_finds_windowed_peak(self):
        times = np.arange(0.0, 100.0, 0.1)
        values = np.exp(-((times - 70.0) ** 2) / 4.0)
        trace = _synthetic_trace(times, values)
        tau, peak = find_recurrence(trace, (60.0, 80.0))
        assert tau == pytest.approx(70.0, abs=1e-6)
        assert peak == pytest.approx(1.0, abs=1e-6)

    def test_edge_maximum_warns(self):
        times = np.arange(0.0, 50.0, 0.1)
        trace = _synthetic_trace(times, np.zeros_like(times))
        with pytest.warns(RecurrenceWindowWarning):
            find_recurrence(trace, (10.0, 20.0))

    def test_empty_window_rejected(self):
        trace = _synthetic_trace(np.arange(0.0, 5.0, 0.1), np.zeros(50))
        with pytest.raises(ValueError):
            find_recurrence(trace, (10.0, 20.0))


class TestWindows:
    def test_xy_window_calibration(self):
        assert default_recurrence_window(300) == (600.0, 800.0)

    def test_ising_window_calibration(self):
        lo, hi = ising_recurrence_window(600)
        assert lo == pytest.approx(280.0, abs=1e-9)
        assert hi == pytest.approx(350.0, abs=1e-9)


class TestAnalyzeTrace:
    def test_report_fields_and_ordering(self):
        protocol = QuenchProtocol(1.25, 0.3, 0.6, 40)
        window = default_recurrence_window(40)
        dt = DT_SAFETY * resolution_bound(protocol)
        trace = energy_trace(protocol, window[1], dt)
        report = analyze_trace(trace, asymptotic_energy(protocol), window)
        assert 0 < report.tau_s < window[0] <= report.tau_r <= window[1]
        assert report.e_s >= report.e_inf - 1e-9 * protocol.n_dimers
        assert report.e_r >= report.e_inf - 1e-9 * protocol.n_dimers
        assert report.window_r == window


class TestOccupationSnapshot:
    def test_null_quench_all_zero(self):
        rows = occupation_snapshot(QuenchProtocol(1.1, 0.2, 0.0, 30), 5.0)
        assert len(rows) == 30
        assert all(abs(n2) <= 1e-12 for _, n2 in rows)

    def test_momentum_grid(self):
        rows = occupation_snapshot(QuenchProtocol(1.1, 0.2, 0.8, 24), 3.0)
        ks = [k for k, _ in rows]
        assert ks == sorted(ks)
        assert ks[0] == pytest.approx(2 * math.pi * 0.5 / 24, abs=1e-12)
        assert ks[-1] == pytest.approx(2 * math.pi * 23.5 / 24, abs=1e-12)

    def test_flat_band_charging_concentrates_at_half_pi(self):
        # charging at delta0 + delta1 = 1: filled modes cluster around k=pi/2
        protocol = QuenchProtocol(1.1, 0.2, 0.8, 300)
        rows = occupation_snapshot(protocol, 730.0)
        k_peak = max(rows, key=lambda kn: kn[1])[0]
        assert abs(k_peak - math.pi / 2) < 0.35

    def test_critical_charging_fills_zone_edge(self):
        # delta0 + delta1 = gamma: gap closes at k = pi and occupation
        # approaches one there
        protocol = QuenchProtocol(1.1, 0.3, 0.8, 300)
        rows = occupation_snapshot(protocol, 722.0)
        near_edge = [n2 for k, n2 in rows if abs(k - math.pi) < 0.15]
        assert max(near_edge) > 0.9

    def test_critical_charging_fills_zone_center(self):
        # gamma (delta0 + delta1) = 1: gap closes at k = 0 instead
        protocol = QuenchProtocol(1.1, 1.0 / 1.1 - 0.8, 0.8, 300)
        rows = occupation_snapshot(protocol, 794.0)
        near_zero = [n2 for k, n2 in rows if k < 0.15]
        assert max(near_zero) > 0.9


class TestSweeps:
    def test_rows_ordered_and_normalized(self):
        grid = [0.18, 0.2, 0.22]
        rows = sweep_delta0(1.1, 0.8, 40, grid, workers=1)
        assert [r.param for r in rows] == grid
        for r in rows:
            assert r.e_s_per > 0 and r.e_r_per > 0 and r.e_inf_per > 0
            assert r.tau_s < r.tau_r

    def test_worker_count_does_not_change_results(self):
        grid = [0.15, 0.2, 0.25]
        serial = sweep_delta0(1.1, 0.8, 30, grid, workers=1)
        parallel = sweep_delta0(1.1, 0.8, 30, grid, workers=3)
        assert serial == parallel

    def test_rejects_nonpositive_grid(self):
        with pytest.raises(ValueError):
            sweep_delta0(1.1, 0.8, 30, [0.0, 0.1])

    def test_ising_sweep_rows(self):
        rows = sweep_field(0.25, 60, [0.7, 0.75, 0.8], workers=1)
        assert [r.param for r in rows] == [0.7, 0.75, 0.8]
        assert all(r.e_inf_per > 0 for r in rows)


class TestScalingStudy:
    def test_small_sizes_rejected(self):
        with pytest.raises(ValueError):
            scaling_study(1.25, 0.3, 0.6, [4, 50])

    def test_rows_and_recurrence_growth(self):
        rows = scaling_study(1.25, 0.3, 0.6, [20, 40], workers=1)
        assert [r.n_dimers for r in rows] == [20, 40]
        # tau_r roughly doubles when the chain doubles
        ratio = rows[1].tau_r / rows[0].tau_r
        assert 1.7 < ratio < 2.3
        # short-time and asymptotic densities are already size converged
        assert rows[0].e_inf_per == pytest.approx(rows[1].e_inf_per, rel=1e-3)

    def test_first_maximum_time_does_not_grow_with_size(self):
        taus = []
        for n_dimers in (20, 40):
            protocol = QuenchProtocol(1.25, 0.3, 0.6, n_dimers)
            dt = DT_SAFETY * resolution_bound(protocol)
            trace = energy_trace(protocol, 50.0, dt)
            taus.append(find_short_time_max(trace)[0])
        assert taus[1] == pytest.approx(taus[0], rel=0.05)


class TestLinearFit:
    def test_exact_line(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        slope, intercept, r2 = linear_fit(x, 3.5 * x - 1.0)
        assert slope == pytest.approx(3.5, abs=1e-12)
        assert intercept == pytest.approx(-1.0, abs=1e-12)
        assert r2 == pytest.approx(1.0, abs=1e-12)


class TestPlateauRobustness:
    @pytest.mark.parametrize("delta1", [0.5, 0.7, 0.9])
    def test_asymptotic_insensitive_to_charging_parameters(self, delta1):
        # For each quench amplitude, sweep the initial dimerization across
        # every choice whose charging point crosses exactly one critical
        # line (gamma * delta' = 1 here): the plateau density hardly moves,
        # the short-time peak moves a lot.  The asymptotic regime needs no
        # fine tuning of the charging parameters.
        gamma, n_dimers = 1.1, 120
        lo = 1.0 / gamma - delta1
        hi = gamma - delta1
        e_inf, e_s = [], []
        for delta0 in np.linspace(lo + 0.02, hi - 0.02, 5):
            protocol = QuenchProtocol(gamma, float(delta0), delta1, n_dimers)
            assert gamma * protocol.delta0 < 1.0 < gamma * (protocol.delta0 + delta1)
            assert protocol.delta0 + delta1 < gamma
            e_inf.append(asymptotic_energy(protocol) / n_dimers)
            dt = DT_SAFETY * resolution_bound(protocol)
            times = dt * np.arange(int(50.0 / dt) + 1)
            values = energy_at_times(protocol, times)
            trace = EnergyTrace(times=times, values=values, protocol=protocol, evaluator="full")
            _, peak = find_short_time_max(trace)
            e_s.append(peak / n_dimers)

        spread_inf = (max(e_inf) - min(e_inf)) / np.mean(e_inf)
        spread_s = (max(e_s) - min(e_s)) / np.mean(e_s)
        assert spread_inf < 0.10
        assert spread_s > spread_inf
