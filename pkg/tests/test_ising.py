import math

import numpy as np
import pytest

from spinbattery import (
    IsingParams,
    bogoliubov_angle,
    ising_asymptotic_energy,
    ising_dispersion,
    ising_energy_at_times,
    ising_energy_stored,
    ising_energy_trace,
    ising_mode_data,
)
from spinbattery.ed import TransverseIsing, build_hamiltonian, oracle_energy_trace
from spinbattery.ising import ising_resolution_bound

# Frozen 50-digit evaluations of the closed-form dispersion and angle pair.
FROZEN_EPS = 0.2000548234962534756  # h=0.8, N=600, q=1/2
FROZEN_SIN2T = 0.06273646219296270348  # h=0.75, N=600, q=3/2
FROZEN_COS2T = -0.99803012795782420775


class TestIsingParams:
    def test_valid(self):
        IsingParams(0.8, 0.7, 600)

    @pytest.mark.parametrize("n", [1, 0, -4])
    def test_rejects_small_chains(self, n):
        with pytest.raises(ValueError):
            IsingParams(0.8, 0.7, n)


class TestDispersion:
    def test_zero_field_is_flat(self):
        for q in (0.5, 1.5, 3.5):
            assert ising_dispersion(0.0, 4, q) == pytest.approx(1.0, abs=1e-15)

    def test_critical_field_identity(self):
        for q in (0.5, 2.5, 4.5):
            k = 2 * math.pi * q / 6
            assert ising_dispersion(1.0, 6, q) == pytest.approx(
                2 * abs(math.sin(k / 2)), abs=1e-14
            )

    def test_derived_value(self):
        assert ising_dispersion(0.8, 600, 0.5) == pytest.approx(FROZEN_EPS, abs=1e-14)

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.5, 600.5, 0.3])
    def test_rejects_bad_modes(self, q):
        with pytest.raises(ValueError):
            ising_dispersion(0.8, 600, q)


class TestBogoliubovAngle:
    def test_zero_field(self):
        for q in (0.5, 1.5, 2.5):
            k = 2 * math.pi * q / 4
            s, c = bogoliubov_angle(0.0, 4, q)
            assert s == pytest.approx(math.sin(k), abs=1e-14)
            assert c == pytest.approx(-math.cos(k), abs=1e-14)

    def test_zone_edge(self):
        # q = N/2 is representable for odd N and puts k exactly at pi
        s, c = bogoliubov_angle(0.75, 5, 2.5)
        assert s == pytest.approx(0.0, abs=1e-15)
        assert c == pytest.approx(1.0, abs=1e-15)

    def test_derived_pair(self):
        s, c = bogoliubov_angle(0.75, 600, 1.5)
        assert s == pytest.approx(FROZEN_SIN2T, abs=1e-14)
        assert c == pytest.approx(FROZEN_COS2T, abs=1e-14)

    def test_normalization(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            n = int(rng.integers(2, 40))
            q = int(rng.integers(0, n)) + 0.5
            h = float(rng.uniform(-2.0, 2.0))
            s, c = bogoliubov_angle(h, n, q)
            assert s * s + c * c == pytest.approx(1.0, abs=1e-14)


class TestEnergyStored:
    def test_null_quench(self):
        p = IsingParams(0.8, 0.0, 12)
        for t in (0.0, 3.0, 50.0):
            assert ising_energy_stored(p, t) == 0.0

    def test_zero_at_t0(self):
        assert ising_energy_stored(IsingParams(0.8, 0.7, 600), 0.0) == 0.0

    @pytest.mark.parametrize("n_sites", [4, 6])
    def test_matches_oracle(self, n_sites):
        params = IsingParams(0.8, 0.7, n_sites)
        times = np.linspace(0.0, 20.0, 81)
        engine = ising_energy_at_times(params, times)
        battery = build_hamiltonian(TransverseIsing(0.8), n_sites)
        charger = build_hamiltonian(TransverseIsing(1.5), n_sites)
        oracle = oracle_energy_trace(battery, charger, times)
        assert np.max(np.abs(engine - oracle.values)) <= 1e-8

    def test_beta_amplitude_equals_closed_form_per_mode(self):
        # |beta(t)|^2 from the angle pairs, times the battery dispersion,
        # must reproduce each mode's closed-form contribution
        params = IsingParams(0.8, 0.7, 10)
        for j in range(10):
            q = j + 0.5
            data = ising_mode_data(params, q)
            si, ci = data.angle_initial
            sf, cf = data.angle_charging
            sin2diff = si * cf - ci * sf
            k = 2 * math.pi * q / params.n_sites
            amp = params.h1**2 * math.sin(k) ** 2 / (2 * data.eps * data.omega**2)
            for t in (0.3, 1.7, 9.2):
                beta2 = math.sin(data.omega * t) ** 2 * sin2diff**2
                closed = amp * (1 - math.cos(2 * data.omega * t))
                assert data.eps * beta2 == pytest.approx(closed, abs=1e-12)

    def test_reflection_symmetry_half_zone(self):
        # contributions at q and N - q coincide, so twice the half zone
        # rebuilds the full sum
        params = IsingParams(0.8, 0.7, 12)
        t = 4.2

        def contrib(q):
            k = 2 * math.pi * q / 12
            eps = ising_dispersion(0.8, 12, q)
            om = ising_dispersion(1.5, 12, q)
            return 0.7**2 * math.sin(k) ** 2 / (2 * eps * om**2) * (1 - math.cos(2 * om * t))

        full = sum(contrib(j + 0.5) for j in range(12))
        half_doubled = 2.0 * sum(contrib(j + 0.5) for j in range(6))
        assert half_doubled == pytest.approx(full, abs=1e-12)
        assert ising_energy_stored(params, t) == pytest.approx(full, abs=1e-12)

    def test_exact_upper_bound(self):
        params = IsingParams(0.8, 0.7, 30)
        bound = 2.0 * ising_asymptotic_energy(params)
        rng = np.random.default_rng(32)
        for t in rng.uniform(0.0, 200.0, size=20):
            de = ising_energy_stored(params, float(t))
            assert 0.0 <= de <= bound + 1e-12

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            ising_energy_stored(IsingParams(0.8, 0.7, 6), -1.0)


class TestAsymptotic:
    def test_null_quench(self):
        assert ising_asymptotic_energy(IsingParams(0.8, 0.0, 20)) == 0.0

    def test_equals_windowed_time_average(self):
        params = IsingParams(0.8, 0.7, 600)
        dt = 0.5 * ising_resolution_bound(params)
        times = 50.0 + dt * np.arange(int(200.0 / dt) + 1)
        mean = float(np.mean(ising_energy_at_times(params, times)))
        e_inf = ising_asymptotic_energy(params)
        assert abs(e_inf - mean) <= 0.005 * abs(mean)

    def test_critical_enhancement(self):
        # E_inf/N is maximal where the charging chain is critical (h0+h1=1)
        grid = np.round(np.arange(0.5, 0.9001, 0.01), 10)
        vals = {h0: ising_asymptotic_energy(IsingParams(float(h0), 0.25, 600)) for h0 in grid}
        peak = vals[0.75]
        for h0, v in vals.items():
            if abs(h0 - 0.75) >= 0.05:
                assert peak > v


class TestTrace:
    def test_matches_pointwise(self):
        params = IsingParams(0.8, 0.7, 8)
        trace = ising_energy_trace(params, 12.0, 0.05)
        pointwise = np.array([ising_energy_stored(params, float(t)) for t in trace.times])
        assert np.array_equal(trace.values, pointwise)

    def test_rejects_coarse_dt(self):
        params = IsingParams(0.8, 0.7, 8)
        with pytest.raises(ValueError, match="need dt <="):
            ising_energy_trace(params, 10.0, 2.0 * ising_resolution_bound(params))

    def test_reference_trace_three_regimes(self):
        # N = 600 at h0=0.8, h1=0.7: early first maximum, flat plateau at the
        # asymptotic value, recurrence inside [280, 350]
        from spinbattery.regimes import DT_SAFETY, analyze_trace, ising_recurrence_window

        params = IsingParams(0.8, 0.7, 600)
        window = ising_recurrence_window(600)
        dt = DT_SAFETY * ising_resolution_bound(params)
        trace = ising_energy_trace(params, window[1], dt)
        e_inf = ising_asymptotic_energy(params)
        report = analyze_trace(trace, e_inf, window)
        assert 0.0 < report.tau_s <= 50.0
        assert 280.0 <= report.tau_r <= 350.0
        assert report.e_inf < report.e_r <= report.e_s
        mask = (trace.times >= 50.0) & (trace.times <= 250.0)
        plateau = trace.values[mask]
        assert float(np.std(plateau) / np.mean(plateau)) < 0.02
