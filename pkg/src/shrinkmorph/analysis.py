"""Shape metrics, analytic validation oracles, and the gamma sweep harness."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ContinuationStallError, DegenerateGeometryError, ShrinkMorphError
from .fem import MorphResult, SolveConfig, solve_static
from .geometry import LotusSpec, build_lotus
from .materials import MaterialModel, ThermalLoad
from .meshing import LayerStackEntry, extrude, triangulate


def measure_height(result: MorphResult, R: float) -> tuple[float, float]:
    """Morphed height above the substrate reference plane, and H/2R.

    H is the maximum deformed z over the substrate bottom-plane nodes; the
    boundary is pinned at z = 0, so the flat state measures exactly 0.
    """
    if R <= 0:
        raise DegenerateGeometryError("R must be > 0")
    z = result.deformed[result.substrate_bottom_nodes, 2]
    h = float(z.max())
    return h, h / (2.0 * R)


def timoshenko_curvature(
    E1: float, t1: float, E2: float, t2: float, mismatch_strain: float
) -> float:
    """Classical bimetal-strip curvature for an interlayer mismatch strain.

    kappa = 6 e (1+m)^2 / ( h [3(1+m)^2 + (1+mn)(m^2 + 1/(mn))] ),
    m = t1/t2, n = E1/E2, h = t1 + t2. Equal layers reduce to 3e/2h.
    """
    if min(E1, t1, E2, t2) <= 0:
        raise DegenerateGeometryError("moduli and thicknesses must be > 0")
    m = t1 / t2
    n = E1 / E2
    h = t1 + t2
    denom = 3.0 * (1.0 + m) ** 2 + (1.0 + m * n) * (m * m + 1.0 / (m * n))
    return 6.0 * mismatch_strain * (1.0 + m) ** 2 / (h * denom)


def _kasa_circle_fit(x: np.ndarray, z: np.ndarray) -> tuple[float, float, float]:
    """Algebraic least-squares circle through (x, z); returns (a, b, r)."""
    A = np.column_stack([2.0 * x, 2.0 * z, np.ones_like(x)])
    rhs = x * x + z * z
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    a, b, c = sol
    r = np.sqrt(max(c + a * a + b * b, 0.0))
    return float(a), float(b), float(r)


def fit_midline_curvature(
    result: MorphResult, axis: str = "x", band_fraction: float = 0.15
) -> float:
    """Signed circle-fit curvature of the deformed substrate midline.

    Nodes of the substrate bottom plane within a transverse band around the
    centerline are fit in the (axis, z) plane, after trimming one composite
    thickness from each strip end (boundary layers the analytic bimorph
    formula does not model). Positive curvature means curling toward +z.
    """
    if axis not in ("x", "y"):
        raise DegenerateGeometryError("axis must be 'x' or 'y'")
    along, across = (0, 1) if axis == "x" else (1, 0)
    ids = result.substrate_bottom_nodes
    ref = result.reference[ids]
    def_ = result.deformed[ids]

    t_total = float(result.reference[:, 2].max() - result.reference[:, 2].min())
    v = ref[:, across]
    vc = 0.5 * (v.max() + v.min())
    band = band_fraction * max(v.max() - v.min(), 1e-30)
    sel = np.abs(v - vc) <= band + 1e-12

    s = ref[:, along]
    lo, hi = s.min() + t_total, s.max() - t_total
    sel &= (s >= lo) & (s <= hi)
    if int(sel.sum()) < 5:
        raise DegenerateGeometryError(
            f"only {int(sel.sum())} centerline nodes; need at least 5"
        )

    xs = def_[sel, along]
    zs = def_[sel, 2]
    a, b, r = _kasa_circle_fit(xs, zs)
    if not np.isfinite(r) or r <= 0 or r > 1e12:
        return 0.0
    kappa = 1.0 / r
    return kappa if b >= zs.mean() else -kappa


# ---------------------------------------------------------------------------
# gamma sweep


@dataclass(frozen=True)
class SweepCase:
    """Everything one lotus solve needs; picklable for worker processes."""

    spec: LotusSpec
    h_target: float
    min_angle: float
    thicknesses: tuple[float, float]  # substrate, kirigami (mm)
    materials: tuple[MaterialModel, MaterialModel]
    load: ThermalLoad
    cfg: SolveConfig


@dataclass
class SweepRow:
    gamma: float
    alpha: float
    H_mm: float
    H_over_2R: float
    lam: float
    runtime_s: float
    error: str = ""
    height_curve: np.ndarray | None = None  # (lam, H) accepted steps


def run_lotus_case(case: SweepCase) -> SweepRow:
    """pattern -> mesh -> solve -> measure for one radius ratio."""
    t0 = time.perf_counter()
    spec = case.spec
    alpha = 0.5 * (1.0 - spec.gamma**2)
    try:
        layout = build_lotus(spec)
        mesh2d = triangulate(layout, case.h_target, case.min_angle)
        sub, kir = case.materials
        stack = [
            LayerStackEntry("substrate", case.thicknesses[0], sub.name),
            LayerStackEntry("kirigami", case.thicknesses[1], kir.name),
        ]
        mesh = extrude(mesh2d, stack)
        mats = {sub.name: sub, kir.name: kir}
        try:
            result = solve_static(mesh, mats, case.load, case.cfg)
        except ContinuationStallError as stall:
            result = stall.result
        h, h2r = measure_height(result, spec.R)
        return SweepRow(
            gamma=spec.gamma,
            alpha=alpha,
            H_mm=h,
            H_over_2R=h2r,
            lam=result.lam,
            runtime_s=time.perf_counter() - t0,
            height_curve=result.height_curve(),
        )
    except ShrinkMorphError as e:
        return SweepRow(
            gamma=spec.gamma,
            alpha=alpha,
            H_mm=float("nan"),
            H_over_2R=float("nan"),
            lam=0.0,
            runtime_s=time.perf_counter() - t0,
            error=str(e),
        )


def common_lambda(rows: list[SweepRow]) -> float:
    """Largest load factor reached by every non-failed case.

    Continuation always lands on the shared base grid before any bisected
    values, so the intersection of accepted-lambda sets is non-trivial
    whenever every case converged at least one step.
    """
    sets = []
    for row in rows:
        if row.height_curve is not None and len(row.height_curve):
            sets.append({round(float(l), 12) for l in row.height_curve[:, 0]})
    if not sets:
        return 0.0
    shared = set.intersection(*sets)
    return max(shared) if shared else 0.0


def height_at_lambda(row: SweepRow, lam: float) -> float:
    if row.height_curve is None or not len(row.height_curve):
        return float("nan")
    lams = np.round(row.height_curve[:, 0], 12)
    hit = np.nonzero(lams == round(lam, 12))[0]
    if hit.size:
        return float(row.height_curve[hit[0], 1])
    return float("nan")


def sweep_gamma(
    base_spec: LotusSpec,
    gammas,
    load: ThermalLoad,
    cfg: SolveConfig,
    materials: tuple[MaterialModel, MaterialModel],
    thicknesses: tuple[float, float] = (0.1, 1.8),
    h_target: float = 1.25,
    min_angle: float = 20.0,
    n_workers: int = 1,
) -> list[SweepRow]:
    """Solve the lotus family over a gamma list with identical settings.

    Heights in the returned rows are re-read at the maximum common
    converged load factor, so the comparison across gammas is honest even
    when the stiffest case stalls first. Failed cases carry their error
    per-row. Row order follows the input order regardless of scheduling.
    """
    cases = [
        SweepCase(
            spec=replace(base_spec, gamma=float(g)),
            h_target=h_target,
            min_angle=min_angle,
            thicknesses=thicknesses,
            materials=materials,
            load=load,
            cfg=cfg,
        )
        for g in gammas
    ]
    if n_workers > 1 and len(cases) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(run_lotus_case, cases))
    else:
        rows = [run_lotus_case(c) for c in cases]

    lam_c = common_lambda(rows)
    for row in rows:
        if not row.error:
            h = height_at_lambda(row, lam_c)
            if np.isfinite(h):
                row.H_mm = h
                row.H_over_2R = h / (2.0 * cases[0].spec.R)
    return rows


def sweep_csv_lines(rows: list[SweepRow]) -> list[str]:
    lines = ["gamma,alpha,H_mm,H_over_2R,lambda,runtime_s"]
    for r in rows:
        lines.append(
            f"{r.gamma:.6g},{r.alpha:.6g},{r.H_mm:.9g},{r.H_over_2R:.9g},"
            f"{r.lam:.6g},{r.runtime_s:.3f}"
        )
    return lines


def plot_file_lines(rows: list[SweepRow]) -> list[str]:
    """Two-column gamma vs H/2R table (the paper-figure axes)."""
    lines = ["# gamma  H_over_2R"]
    for r in rows:
        lines.append(f"{r.gamma:.6g} {r.H_over_2R:.9g}")
    return lines
