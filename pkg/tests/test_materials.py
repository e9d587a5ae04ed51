"""Material fitting, eigenstrain construction, and telemetry ingestion."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shrinkmorph.errors import MaterialDataError, ParameterDomainError
from shrinkmorph.materials import (
    MaterialModel,
    StressStrainCurve,
    TemperatureLog,
    ThermalLoad,
    contraction_stress,
    fit_linear_modulus,
    get_preset,
    ingest_temperature_log,
    kelvin_to_fahrenheit,
    summarize_temperature_log,
    thermal_eigenstrain,
)


class TestMaterialModel:
    def test_poisson_half_rejected(self):
        with pytest.raises(ParameterDomainError):
            MaterialModel(E=100.0, nu=0.5, alpha=0.0)

    def test_presets_carry_table_values(self):
        s = get_preset("shrink_film_sim")
        assert s.E == pytest.approx(404.2082)
        assert s.alpha == -0.01
        assert get_preset("shrink_film_measured").alpha == -0.005
        k = get_preset("kirigami_abs")
        assert k.E == pytest.approx(761.6368)
        assert k.alpha == 0.0

    def test_unknown_preset(self):
        with pytest.raises(ParameterDomainError):
            get_preset("adamantium")


class TestFitLinearModulus:
    def test_linear_curve_exact(self):
        eps = np.linspace(0.0, 0.1, 11)
        curve = StressStrainCurve(eps, 500.0 * eps)
        assert fit_linear_modulus(curve, 0.05) == pytest.approx(500.0, rel=1e-12)

    def test_quadratic_curve_analytic_integral(self):
        # integral of k*eps^2 is k*eps_m^3/3, so E = (2/3)*k*eps_m
        k = 3000.0
        eps = np.linspace(0.0, 0.12, 600)
        curve = StressStrainCurve(eps, k * eps**2)
        assert fit_linear_modulus(curve, 0.1) == pytest.approx(200.0, rel=1e-3)

    def test_eps_m_beyond_data(self):
        curve = StressStrainCurve(np.array([0.0, 0.02]), np.array([0.0, 10.0]))
        with pytest.raises(MaterialDataError):
            fit_linear_modulus(curve, 0.05)

    def test_default_cap(self):
        eps = np.linspace(0.0, 0.2, 21)
        curve = StressStrainCurve(eps, 100.0 * eps)
        assert fit_linear_modulus(curve) == pytest.approx(100.0)

    @given(scale=st.floats(0.1, 100.0))
    @settings(max_examples=20, deadline=None)
    def test_homogeneous_in_stress(self, scale):
        eps = np.linspace(0.0, 0.08, 30)
        sig = 200.0 * eps + 4000.0 * eps**2
        e1 = fit_linear_modulus(StressStrainCurve(eps, sig), 0.05)
        e2 = fit_linear_modulus(StressStrainCurve(eps, scale * sig), 0.05)
        assert e2 == pytest.approx(scale * e1, rel=1e-12)

    def test_bracketed_by_secant_and_tangent(self):
        # convex monotone curve: secant modulus <= E <= initial tangent
        eps = np.linspace(0.0, 0.1, 200)
        k0, k2 = 800.0, -3500.0  # concave hardening-then-soft curve stays monotone
        sig = k0 * eps + k2 * eps**2
        assert np.all(np.diff(sig) > 0)
        cap = 0.08
        e_fit = fit_linear_modulus(StressStrainCurve(eps, sig), cap)
        secant = np.interp(cap, eps, sig) / cap
        tangent0 = (sig[1] - sig[0]) / (eps[1] - eps[0])
        assert secant <= e_fit + 1e-9
        assert e_fit <= tangent0 + 1e-9

    def test_curve_validation(self):
        with pytest.raises(MaterialDataError):
            StressStrainCurve(np.array([0.0, 0.1, 0.1]), np.array([0.0, 1.0, 2.0]))
        with pytest.raises(MaterialDataError):
            StressStrainCurve(np.array([0.01, 0.1]), np.array([1.0, 2.0]))


class TestEigenstrain:
    def test_paper_inputs_in_plane(self):
        mat = MaterialModel(E=404.2082, nu=0.49, alpha=-0.01)
        e = thermal_eigenstrain(mat, 110.0, "in_plane")
        np.testing.assert_allclose(np.diag(e), [-1.1, -1.1, 0.0])

    def test_zero_delta(self):
        mat = get_preset("shrink_film_sim")
        np.testing.assert_array_equal(thermal_eigenstrain(mat, 0.0), np.zeros((3, 3)))

    def test_isotropic_mode(self):
        mat = MaterialModel(E=404.2082, nu=0.49, alpha=-0.005)
        e = thermal_eigenstrain(mat, 110.0, "isotropic")
        np.testing.assert_allclose(np.diag(e), [-0.55, -0.55, -0.55])

    def test_linear_in_delta_T(self):
        mat = get_preset("shrink_film_sim")
        e1 = thermal_eigenstrain(mat, 30.0)
        e2 = thermal_eigenstrain(mat, 60.0)
        np.testing.assert_allclose(e2, 2.0 * e1)


class TestContractionStress:
    def test_paper_value(self):
        mat = MaterialModel(E=404.2082, nu=0.49, alpha=-0.01)
        assert contraction_stress(mat, 110.0) == pytest.approx(444.63, abs=0.01)

    def test_zero_cases(self):
        assert contraction_stress(get_preset("shrink_film_sim"), 0.0) == 0.0
        assert contraction_stress(get_preset("kirigami_abs"), 300.0) == 0.0

    def test_linear_in_delta_T(self):
        mat = get_preset("shrink_film_measured")
        assert contraction_stress(mat, 80.0) == pytest.approx(
            2.0 * contraction_stress(mat, 40.0)
        )


class TestThermalLoad:
    def test_validation(self):
        with pytest.raises(ParameterDomainError):
            ThermalLoad(delta_T=110.0, n_steps=0)
        with pytest.raises(ParameterDomainError):
            ThermalLoad(delta_T=-5.0)


class TestTemperatureLog:
    def write_log(self, tmp_path, rows, unit="F"):
        path = tmp_path / "log.csv"
        body = "\n".join(f"{t},{v}" for t, v in rows)
        path.write_text(f"time_s,temp,{unit}\n{body}\n")
        return path

    def test_constant_oven_matches_paper_delta(self, tmp_path):
        path = self.write_log(tmp_path, [(0, 270), (60, 270), (120, 270)], unit="F")
        ambient = (72.0 - 32.0) * 5.0 / 9.0 + 273.15
        summary = ingest_temperature_log(path, ambient)
        assert summary.delta_T_mean == pytest.approx(110.0, abs=1e-9)
        assert summary.std_K == pytest.approx(0.0, abs=1e-9)

    def test_single_sample(self, tmp_path):
        path = self.write_log(tmp_path, [(0, 400)], unit="K")
        summary = ingest_temperature_log(path, 300.0)
        assert summary.duration_s == 0.0
        assert summary.std_K == 0.0
        assert summary.mean_K == pytest.approx(400.0)

    def test_two_equal_segments_mean(self, tmp_path):
        path = self.write_log(tmp_path, [(0, 400), (10, 400), (10, 410), (20, 410)], "K")
        summary = ingest_temperature_log(path, 300.0)
        assert summary.mean_K == pytest.approx(405.0)

    def test_non_monotonic_time_rejected(self, tmp_path):
        path = self.write_log(tmp_path, [(10, 400), (5, 401)], "K")
        with pytest.raises(MaterialDataError):
            ingest_temperature_log(path, 300.0)

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "log.csv"
        path.write_text("time_s,temp,K\n")
        with pytest.raises(MaterialDataError):
            ingest_temperature_log(path, 300.0)

    def test_fahrenheit_round_trip(self):
        temps = np.array([250.0, 270.0, 399.5])
        k = TemperatureLog(np.arange(3.0), (temps - 32.0) * 5 / 9 + 273.15, "F")
        back = kelvin_to_fahrenheit(k.temp_K)
        np.testing.assert_allclose(back, temps, atol=1e-9)
