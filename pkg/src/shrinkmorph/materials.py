"""Constitutive parameters, modulus fitting, and experiment telemetry.

Units: stress in MPa, strain dimensionless, temperature in K, time in s.
Negative thermal coefficients mean in-plane contraction on heating.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import MaterialDataError, ParameterDomainError


@dataclass(frozen=True)
class MaterialModel:
    """Linear isotropic elasticity plus a thermal eigenstrain coefficient.

    ``nu`` must stay strictly below 0.5: displacement-based solid elements
    need an invertible constitutive tensor, so near-incompressibility is
    expressed as nu = 0.49 by default in the shipped presets.
    """

    E: float  # Young's modulus, MPa
    nu: float  # Poisson ratio
    alpha: float  # thermal coefficient, 1/K (negative = contraction)
    name: str = "unnamed"

    def __post_init__(self):
        if self.E <= 0:
            raise ParameterDomainError(f"material {self.name!r}: E must be > 0")
        if not 0.0 <= self.nu < 0.5:
            raise ParameterDomainError(
                f"material {self.name!r}: nu must be in [0, 0.5), got {self.nu}"
            )

    @property
    def lame_lambda(self) -> float:
        return self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))

    @property
    def lame_mu(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))


# Shipped presets. The shrink film's simulation coefficient (-0.01 1/K) is
# deliberately larger in magnitude than the measured -0.005 1/K; it absorbs
# the unmodelled adhesive layer. Both are available by name.
PRESETS: dict[str, MaterialModel] = {
    "shrink_film_sim": MaterialModel(
        E=404.2082, nu=0.49, alpha=-0.01, name="shrink_film_sim"
    ),
    "shrink_film_measured": MaterialModel(
        E=404.2082, nu=0.49, alpha=-0.005, name="shrink_film_measured"
    ),
    "kirigami_abs": MaterialModel(
        E=761.6368, nu=0.49, alpha=0.0, name="kirigami_abs"
    ),
    "kirigami_abs_measured": MaterialModel(
        E=761.6368, nu=0.49, alpha=-0.0001, name="kirigami_abs_measured"
    ),
}


def get_preset(name: str) -> MaterialModel:
    try:
        return PRESETS[name]
    except KeyError:
        raise ParameterDomainError(
            f"unknown material preset {name!r}; known: {sorted(PRESETS)}"
        ) from None


@dataclass(frozen=True)
class ThermalLoad:
    """Temperature change applied through a load-factor continuation."""

    delta_T: float  # K, >= 0
    n_steps: int = 20
    mode: str = "in_plane"  # or "isotropic"

    def __post_init__(self):
        if self.n_steps < 1:
            raise ParameterDomainError("thermal load: n_steps must be >= 1")
        if self.delta_T < 0:
            raise ParameterDomainError("thermal load: delta_T must be >= 0")
        if self.mode not in ("in_plane", "isotropic"):
            raise ParameterDomainError("thermal load: mode must be in_plane|isotropic")


def contraction_stress(mat: MaterialModel, delta_T: float) -> float:
    """Equivalent biaxial contraction stress magnitude, -alpha*E*deltaT (MPa).

    Diagnostic only; the solver applies the load in eigenstrain form, which
    reproduces this stress uniaxially through sigma = C:(alpha*deltaT*I2d).
    """
    if delta_T < 0:
        raise ParameterDomainError("delta_T must be >= 0")
    return -mat.alpha * mat.E * delta_T


def thermal_eigenstrain(mat: MaterialModel, delta_T: float, mode: str = "in_plane") -> np.ndarray:
    """Stress-free strain tensor for a temperature change.

    in_plane: diag(a, a, 0) with a = alpha*deltaT (the film contracts only
    laterally). isotropic: a*I, kept for element patch testing.
    """
    a = mat.alpha * delta_T
    if mode == "in_plane":
        return np.diag([a, a, 0.0])
    if mode == "isotropic":
        return a * np.eye(3)
    raise ParameterDomainError(f"unknown eigenstrain mode {mode!r}")


# ---------------------------------------------------------------------------
# stress-strain curves


@dataclass
class StressStrainCurve:
    """Measured uniaxial response: strictly increasing strain, sigma(0) = 0."""

    strain: np.ndarray
    stress: np.ndarray

    def __post_init__(self):
        self.strain = np.asarray(self.strain, dtype=float)
        self.stress = np.asarray(self.stress, dtype=float)
        if self.strain.shape != self.stress.shape or self.strain.ndim != 1:
            raise MaterialDataError("strain and stress must be equal-length vectors")
        if self.strain.size < 2:
            raise MaterialDataError("need at least 2 samples")
        if not np.all(np.diff(self.strain) > 0):
            raise MaterialDataError("strains must be strictly increasing")
        if self.strain[0] != 0.0 or self.stress[0] != 0.0:
            raise MaterialDataError("curve must start at (0, 0)")

    @classmethod
    def from_csv(cls, path) -> "StressStrainCurve":
        """Read `strain,stress_mpa` rows (header required)."""
        strains, stresses = [], []
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None or [h.strip().lower() for h in header[:2]] != [
                "strain",
                "stress_mpa",
            ]:
                raise MaterialDataError(
                    f"{path}: expected header 'strain,stress_mpa', got {header}"
                )
            for row in reader:
                if not row or not "".join(row).strip():
                    continue
                try:
                    strains.append(float(row[0]))
                    stresses.append(float(row[1]))
                except (ValueError, IndexError) as e:
                    raise MaterialDataError(f"{path}: bad row {row!r} ({e})") from None
        return cls(np.array(strains), np.array(stresses))


def fit_linear_modulus(curve: StressStrainCurve, eps_m: float | None = None) -> float:
    """Energy-equivalent linear modulus up to the strain cap eps_m.

    Matches the strain energy of the measured curve with the linear model:
    E = (2 / eps_m^2) * integral_0^eps_m sigma d eps, trapezoidal on the
    samples with linear interpolation at the cap. Exact for data that is
    already piecewise linear.
    """
    if eps_m is None:
        eps_m = min(0.05, float(curve.strain[-1]))
    if eps_m <= 0:
        raise MaterialDataError("eps_m must be > 0")
    if eps_m > curve.strain[-1] * (1.0 + 1e-12):
        raise MaterialDataError(
            f"eps_m={eps_m} beyond the measured strain range "
            f"(max {curve.strain[-1]})"
        )
    eps = curve.strain
    sig = curve.stress
    k = int(np.searchsorted(eps, eps_m, side="right"))
    xs = np.concatenate([eps[:k], [eps_m]])
    ys = np.concatenate([sig[:k], [np.interp(eps_m, eps, sig)]])
    energy = float(np.trapezoid(ys, xs))
    return 2.0 * energy / (eps_m * eps_m)


# ---------------------------------------------------------------------------
# oven temperature logs


def _to_kelvin(values: np.ndarray, unit: str) -> np.ndarray:
    unit = unit.strip().upper()
    if unit == "K":
        return values
    if unit == "C":
        return values + 273.15
    if unit == "F":
        return (values - 32.0) * (5.0 / 9.0) + 273.15
    raise MaterialDataError(f"unknown temperature unit {unit!r} (use F, C or K)")


def kelvin_to_fahrenheit(values):
    return (np.asarray(values) - 273.15) * 1.8 + 32.0


@dataclass
class TemperatureLog:
    """Oven telemetry: sample times (s, non-decreasing) and temperatures (K)."""

    time_s: np.ndarray
    temp_K: np.ndarray
    source_unit: str = "K"

    def __post_init__(self):
        self.time_s = np.asarray(self.time_s, dtype=float)
        self.temp_K = np.asarray(self.temp_K, dtype=float)
        if self.time_s.size == 0:
            raise MaterialDataError("temperature log is empty")
        if self.time_s.shape != self.temp_K.shape:
            raise MaterialDataError("time and temperature must be equal length")
        if np.any(np.diff(self.time_s) < 0):
            raise MaterialDataError("log times must be non-decreasing")

    @classmethod
    def from_csv(cls, path) -> "TemperatureLog":
        """Read `time_s,temp,<unit>` rows; the unit lives in the header."""
        times, temps = [], []
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if (
                header is None
                or len(header) < 3
                or header[0].strip().lower() != "time_s"
                or header[1].strip().lower() != "temp"
            ):
                raise MaterialDataError(
                    f"{path}: expected header 'time_s,temp,<F|C|K>', got {header}"
                )
            unit = header[2].strip().upper()
            if unit not in ("F", "C", "K"):
                raise MaterialDataError(f"{path}: bad unit {header[2]!r} in header")
            for row in reader:
                if not row or not "".join(row).strip():
                    continue
                try:
                    times.append(float(row[0]))
                    temps.append(float(row[1]))
                except (ValueError, IndexError) as e:
                    raise MaterialDataError(f"{path}: bad row {row!r} ({e})") from None
        if not times:
            raise MaterialDataError(f"{path}: no samples")
        return cls(
            np.array(times), _to_kelvin(np.array(temps), unit), source_unit=unit
        )


@dataclass(frozen=True)
class TemperatureLogSummary:
    mean_K: float
    std_K: float
    duration_s: float
    delta_T_mean: float


def summarize_temperature_log(log: TemperatureLog, ambient_K: float) -> TemperatureLogSummary:
    """Time-weighted mean/std of a log plus the mean excess over ambient.

    Single-sample logs get zero duration and zero std. The time weighting
    uses the trapezoidal rule, so irregular sampling is handled correctly.
    """
    t, T = log.time_s, log.temp_K
    duration = float(t[-1] - t[0])
    if duration <= 0:
        mean = float(np.mean(T))
        std = float(np.std(T)) if T.size > 1 else 0.0
    else:
        mean = float(np.trapezoid(T, t) / duration)
        var = float(np.trapezoid((T - mean) ** 2, t) / duration)
        std = math.sqrt(max(0.0, var))
    return TemperatureLogSummary(
        mean_K=mean,
        std_K=std,
        duration_s=duration,
        delta_T_mean=mean - ambient_K,
    )


def ingest_temperature_log(path, ambient_K: float) -> TemperatureLogSummary:
    return summarize_temperature_log(TemperatureLog.from_csv(path), ambient_K)
