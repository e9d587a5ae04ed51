"""Run configuration: parsing, validation, serialization.

Configs are YAML with units encoded in key names (`_mm`, `_K`, `_MPa`);
the experiment mixes Fahrenheit ovens, kelvin loads and millimetre
geometry, so the suffixes keep transcription mistakes visible. A parsed
config serializes back to the identical mapping (round-trip contract).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .fem import SolveConfig
from .geometry import (
    AnnulusRimSpec,
    CustomSpec,
    LotusSpec,
    PatternSpec,
    PyramidCrossSpec,
    SpoonSpec,
    StripSpec,
)
from .materials import MaterialModel, PRESETS, ThermalLoad

BC_MODES = ("substrate_boundary_z", "free_floating")


@dataclass
class LayerConfig:
    name: str
    thickness_mm: float
    material: str
    subdivisions: int = 1


@dataclass
class OutputConfig:
    directory: str = "runs/out"
    vtk: bool = True
    vtk_per_step: bool = False
    svg: bool = False
    polygons: bool = False
    stl_layer: str | None = None


@dataclass
class RunConfig:
    pattern: dict
    mesh_h_target_mm: float
    mesh_min_angle_deg: float
    layers: list[LayerConfig]
    load: ThermalLoad
    solver: SolveConfig
    bc: str
    materials: dict[str, MaterialModel]
    output: OutputConfig
    raw: dict = field(repr=False, default_factory=dict)

    def pattern_spec(self) -> PatternSpec:
        return _pattern_spec(self.pattern)

    def strip_margin(self) -> float:
        return float(self.pattern.get("kirigami_margin_mm", 0.0))

    def reference_radius(self) -> float | None:
        """Planform radius for the H/2R metric, when the pattern has one."""
        kind = self.pattern.get("kind")
        if kind in ("lotus", "pyramid_cross", "annulus_rim", "spoon"):
            return float(self.pattern["R_mm"])
        return None

    def config_hash(self) -> str:
        return hashlib.sha256(
            yaml.safe_dump(self.raw, sort_keys=True).encode()
        ).hexdigest()


def _need(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise ConfigError(f"{path}.{key}: missing required field")
    return mapping[key]


def _pattern_spec(p: dict) -> PatternSpec:
    kind = _need(p, "kind", "pattern")
    try:
        if kind == "lotus":
            return LotusSpec(
                R=float(_need(p, "R_mm", "pattern")),
                gamma=float(_need(p, "gamma", "pattern")),
                n_petals=int(p.get("n_petals", 8)),
                petal_fill=float(p.get("petal_fill", 0.5)),
            )
        if kind == "strip":
            return StripSpec(
                length=float(_need(p, "length_mm", "pattern")),
                width=float(_need(p, "width_mm", "pattern")),
            )
        if kind == "pyramid_cross":
            return PyramidCrossSpec(
                R=float(_need(p, "R_mm", "pattern")),
                arm_width=float(_need(p, "arm_width_mm", "pattern")),
                n_arms=int(p.get("n_arms", 4)),
            )
        if kind == "annulus_rim":
            return AnnulusRimSpec(
                R=float(_need(p, "R_mm", "pattern")),
                r_inner=float(_need(p, "r_inner_mm", "pattern")),
                n_petals=int(p.get("n_petals", 8)),
                petal_fill=float(p.get("petal_fill", 0.5)),
            )
        if kind == "spoon":
            return SpoonSpec(
                R=float(_need(p, "R_mm", "pattern")),
                gamma=float(p.get("gamma", 0.5)),
                handle_length=float(p.get("handle_length_mm", 45.0)),
                handle_width=float(p.get("handle_width_mm", 10.0)),
                kirigami_margin=float(p.get("kirigami_margin_mm", 2.0)),
            )
        if kind == "custom":
            return CustomSpec(path=str(_need(p, "path", "pattern")))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"pattern: {e}") from None
    raise ConfigError(f"pattern.kind: unknown kind {kind!r}")


def _parse_material(name: str, m: dict) -> MaterialModel:
    try:
        return MaterialModel(
            E=float(_need(m, "E_MPa", f"materials.{name}")),
            nu=float(m.get("nu", 0.49)),
            alpha=float(_need(m, "alpha_per_K", f"materials.{name}")),
            name=name,
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"materials.{name}: {e}") from None


def parse_config(data: dict) -> RunConfig:
    """Validate a config mapping; error messages carry the field path."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")

    pattern = _need(data, "pattern", "config")
    _pattern_spec(pattern)  # validate now, rebuild lazily later

    mesh = _need(data, "mesh", "config")
    h = float(_need(mesh, "h_target_mm", "mesh"))
    if h <= 0:
        raise ConfigError("mesh.h_target_mm: must be > 0")
    min_angle = float(mesh.get("min_angle_deg", 20.0))

    materials = dict(PRESETS)
    for name, m in (data.get("materials") or {}).items():
        materials[name] = _parse_material(name, m)

    layers = []
    for i, entry in enumerate(_need(mesh, "layers", "mesh")):
        path = f"mesh.layers[{i}]"
        layer = LayerConfig(
            name=str(_need(entry, "name", path)),
            thickness_mm=float(_need(entry, "thickness_mm", path)),
            material=str(_need(entry, "material", path)),
            subdivisions=int(entry.get("subdivisions", 1)),
        )
        if layer.thickness_mm <= 0:
            raise ConfigError(f"{path}.thickness_mm: must be > 0")
        if layer.material not in materials:
            raise ConfigError(
                f"{path}.material: unknown material {layer.material!r}"
            )
        layers.append(layer)
    if not layers:
        raise ConfigError("mesh.layers: at least one layer required")

    load_map = _need(data, "load", "config")
    solver_map = data.get("solver") or {}
    try:
        load = ThermalLoad(
            delta_T=float(_need(load_map, "delta_T_K", "load")),
            n_steps=int(load_map.get("n_steps", solver_map.get("n_load_steps", 20))),
            mode=str(load_map.get("mode", "in_plane")),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"load: {e}") from None

    amp = solver_map.get("imperfection_amplitude_mm")
    try:
        solver = SolveConfig(
            newton_tol=float(solver_map.get("newton_tol", 1e-8)),
            max_newton_iters=int(solver_map.get("max_newton_iters", 30)),
            n_load_steps=int(solver_map.get("n_load_steps", 20)),
            step_halving_depth=int(solver_map.get("step_halving_depth", 6)),
            imperfection_amplitude=None if amp is None else float(amp),
            imperfection_seed=int(solver_map.get("imperfection_seed", 0)),
            imperfection_bias=str(solver_map.get("imperfection_bias", "+z")),
            linear_solver=str(solver_map.get("linear_solver", "direct")),
            lambda_max=float(solver_map.get("lambda_max", 1.0)),
        )
    except ValueError as e:
        raise ConfigError(f"solver: {e}") from None

    bc = str(solver_map.get("bc", "substrate_boundary_z"))
    if bc not in BC_MODES:
        raise ConfigError(f"solver.bc: must be one of {BC_MODES}")

    out_map = data.get("output") or {}
    output = OutputConfig(
        directory=str(out_map.get("directory", "runs/out")),
        vtk=bool(out_map.get("vtk", True)),
        vtk_per_step=bool(out_map.get("vtk_per_step", False)),
        svg=bool(out_map.get("svg", False)),
        polygons=bool(out_map.get("polygons", False)),
        stl_layer=out_map.get("stl_layer"),
    )

    return RunConfig(
        pattern=dict(pattern),
        mesh_h_target_mm=h,
        mesh_min_angle_deg=min_angle,
        layers=layers,
        load=load,
        solver=solver,
        bc=bc,
        materials=materials,
        output=output,
        raw=data,
    )


def load_config(path) -> RunConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: YAML parse error: {e}") from None
    cfg = parse_config(data)
    return cfg


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.raw, sort_keys=True)


def bundled_config_path(name: str) -> Path:
    """Path of a shipped reference config (strip_validation, bowl_gamma05,
    trilayer_spoon, sweep_fig5)."""
    p = Path(__file__).parent / "configs" / f"{name}.yaml"
    if not p.exists():
        known = sorted(q.stem for q in p.parent.glob("*.yaml"))
        raise ConfigError(f"no bundled config {name!r}; known: {known}")
    return p
