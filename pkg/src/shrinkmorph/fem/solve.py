"""Newton continuation through the thermal buckling transition.

The eigenstrain is scaled by a load factor lambda walked from 0 to 1 on a
fixed grid; failed steps are bisected down to a minimum step. A seeded
out-of-plane perturbation of the interior reference geometry selects the
buckling branch deterministically, biased to the side the composite rises
toward in the experiment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import ContinuationStallError, SingularSystemError
from ..materials import MaterialModel, ThermalLoad
from ..meshing import LayeredMesh
from .assembly import FEModel
from .constraints import ConstraintSet, build_constraints


@dataclass(frozen=True)
class SolveConfig:
    newton_tol: float = 1e-8  # relative residual
    max_newton_iters: int = 30
    n_load_steps: int = 20
    step_halving_depth: int = 6
    imperfection_amplitude: float | None = None  # mm; default 1e-3 * t_substrate
    imperfection_seed: int = 0
    imperfection_bias: str = "+z"  # or "-z"
    linear_solver: str = "direct"  # or "iterative"
    # continuation target; the full grid still has n_load_steps points on
    # [0, 1], so capped runs land on the same lambda values as full runs
    lambda_max: float = 1.0

    def __post_init__(self):
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be > 0")
        if self.n_load_steps < 1:
            raise ValueError("n_load_steps must be >= 1")
        if self.imperfection_bias not in ("+z", "-z"):
            raise ValueError("imperfection_bias must be '+z' or '-z'")
        if self.linear_solver not in ("direct", "iterative"):
            raise ValueError("linear_solver must be 'direct' or 'iterative'")
        if not 0.0 < self.lambda_max <= 1.0:
            raise ValueError("lambda_max must be in (0, 1]")


@dataclass
class StepRecord:
    step: int
    lam: float
    iterations: int
    residuals: list[float]
    height: float  # max z of substrate bottom-plane nodes at this state


@dataclass
class MorphResult:
    """Converged (possibly partial) equilibrium state and its history."""

    deformed: np.ndarray  # (N, 3) mm
    reference: np.ndarray  # (N, 3) imperfection-seeded reference
    displacement: np.ndarray  # (3N,)
    lam: float  # converged load factor in [0, 1]
    von_mises: np.ndarray  # (M,) per-element Cauchy-equivalent stress, MPa
    strain_energy: float  # mJ
    history: list[StepRecord]
    substrate_bottom_nodes: np.ndarray  # node ids on the substrate z=0 plane
    stalled: bool = False

    def height_curve(self) -> np.ndarray:
        """(lambda, height) pairs over accepted steps."""
        return np.array([(rec.lam, rec.height) for rec in self.history])


def linear_solve(
    tangent: sp.spmatrix,
    rhs: np.ndarray,
    constraints: ConstraintSet | np.ndarray,
    mode: str = "direct",
) -> np.ndarray:
    """Solve the constraint-reduced system; fixed dofs get zero increment.

    direct: sparse LU of the reduced matrix. iterative: Jacobi-
    preconditioned conjugate gradients to relative tolerance 1e-10.
    """
    n = rhs.shape[0]
    fixed = (
        constraints.fixed_indices()
        if isinstance(constraints, ConstraintSet)
        else np.asarray(constraints, dtype=int)
    )
    free = np.setdiff1d(np.arange(n), fixed)
    k_ff = tangent.tocsr()[free][:, free].tocsc()
    b = rhs[free]
    out = np.zeros(n)
    if b.size == 0:
        return out
    if mode == "direct":
        try:
            lu = spla.splu(k_ff)
            x = lu.solve(b)
        except RuntimeError as e:
            raise SingularSystemError(f"sparse factorization failed: {e}") from None
        if not np.all(np.isfinite(x)):
            raise SingularSystemError("factorization produced non-finite values")
    else:
        diag = k_ff.diagonal()
        if np.any(diag == 0):
            raise SingularSystemError("zero diagonal entry; cannot precondition")
        m = spla.LinearOperator(k_ff.shape, matvec=lambda v: v / diag)
        x, info = spla.cg(k_ff, b, rtol=1e-10, atol=0.0, maxiter=20 * b.size, M=m)
        if info != 0:
            raise SingularSystemError(f"conjugate gradients did not converge ({info})")
    out[free] = x
    return out


def seeded_imperfection(
    mesh: LayeredMesh, amplitude: float, seed: int, bias: str
) -> np.ndarray:
    """Column-wise z perturbation of the interior reference geometry.

    Each interior 2D node column shifts rigidly (layer thicknesses are
    preserved, so no element can invert). The field mixes a smooth radial
    bump with seeded per-node noise, all one-signed toward the bias side.
    """
    n2d = len(mesh.mesh2d.nodes)
    rng = np.random.default_rng(seed)
    noise = rng.random(n2d)

    xy = mesh.mesh2d.nodes
    center = xy.mean(axis=0)
    r = np.linalg.norm(xy - center, axis=1)
    rmax = max(r.max(), 1e-30)
    bump = 1.0 - (r / rmax) ** 2

    dz = amplitude * (0.7 * bump + 0.3 * noise)
    dz[mesh.mesh2d.boundary_nodes()] = 0.0
    if bias == "-z":
        dz = -dz

    ref = mesh.nodes.copy()
    ref[:, 2] += dz[mesh.node_column]
    return ref


def _substrate_bottom_nodes(mesh: LayeredMesh, substrate_layer: int = 0) -> np.ndarray:
    lo, _ = mesh.layer_levels[substrate_layer]
    nodes = mesh.nodes_of_layer(substrate_layer)
    return nodes[mesh.node_level[nodes] == lo]


def solve_static(
    mesh: LayeredMesh,
    materials: dict[str, MaterialModel],
    load: ThermalLoad,
    cfg: SolveConfig = SolveConfig(),
    constraints: ConstraintSet | None = None,
) -> MorphResult:
    """Continuation Newton solve; raises ContinuationStallError (with the
    partial result attached) if the minimum step size makes no progress."""
    if constraints is None:
        constraints = build_constraints(mesh)

    amplitude = cfg.imperfection_amplitude
    if amplitude is None:
        amplitude = 1e-3 * mesh.stack[0].thickness
    reference = seeded_imperfection(mesh, amplitude, cfg.imperfection_seed, cfg.imperfection_bias)

    model = FEModel(mesh, materials, load, reference=reference)
    fixed = constraints.fixed_indices()
    free = np.setdiff1d(np.arange(model.n_dof), fixed)
    bottom = _substrate_bottom_nodes(mesh)

    u = np.zeros(model.n_dof)
    constraints.apply(u)

    n_steps = load.n_steps
    base = 1.0 / n_steps
    min_step = base / (2**cfg.step_halving_depth)

    history: list[StepRecord] = []
    lam_done = 0.0
    force_scale = 0.0
    step_no = 0
    stalled = False

    def height_of(uu):
        z = reference[bottom, 2] + uu.reshape(-1, 3)[bottom, 2]
        return float(z.max())

    def newton(u0, lam_t):
        """Line-searched Newton with adaptive Levenberg damping.

        The damping only modifies the iteration matrix (K + c I), never the
        residual equations, so converged states are exact equilibria; it is
        what lets continuation ride through near-singular tangents at
        secondary (wrinkling) bifurcations. Damping decays once full steps
        succeed, so the final iterations are plain Newton.
        """
        uu = u0.copy()
        r = model.residual(uu, lam_t)
        norms = [float(np.linalg.norm(r[free]))]
        nonlocal force_scale
        scale = max(norms[0], force_scale)
        if norms[0] <= 1e-14 * max(scale, 1.0):
            return uu, norms
        tol_abs = cfg.newton_tol * max(norms[0], 1e-12 * scale)
        damping = 0.0
        rejects = 0
        for _ in range(cfg.max_newton_iters):
            r, k = model.residual_and_tangent(uu, lam_t)
            while True:
                try:
                    if damping > 0.0:
                        dscale = float(np.abs(k.diagonal()).mean())
                        kd = k + (damping * dscale) * sp.eye(k.shape[0], format="csr")
                    else:
                        kd = k
                    du = linear_solve(kd, -r, fixed, cfg.linear_solver)
                    break
                except SingularSystemError:
                    damping = max(10.0 * damping, 1e-6)
                    if damping > 1e3:
                        return None, norms
            step = 1.0
            accepted = False
            r_prev = norms[-1]
            for _ in range(6):
                cand = uu + step * du
                rn = float(np.linalg.norm(model.residual(cand, lam_t)[free]))
                if np.isfinite(rn) and (rn <= tol_abs or rn < r_prev * (1.0 - 1e-4 * step)):
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                rejects += 1
                damping = max(10.0 * damping, 1e-6)
                if rejects >= 3 or damping > 1e3:
                    return None, norms
                continue
            uu = cand
            norms.append(rn)
            if rn <= tol_abs:
                return uu, norms
            if step == 1.0:
                damping *= 0.25
                if damping < 1e-9:
                    damping = 0.0
            rejects = 0
        return None, norms

    pending = [base * (k + 1) for k in range(n_steps) if base * (k + 1) <= cfg.lambda_max + 1e-12]
    while pending:
        lam_t = pending[0]
        u_new, norms = newton(u, lam_t)
        if u_new is not None:
            step_no += 1
            pending.pop(0)
            u = u_new
            lam_done = lam_t
            force_scale = max(force_scale, norms[0])
            history.append(
                StepRecord(
                    step=step_no,
                    lam=lam_t,
                    iterations=len(norms) - 1,
                    residuals=norms,
                    height=height_of(u),
                )
            )
            continue
        delta = lam_t - lam_done
        if delta / 2.0 < min_step * (1.0 - 1e-12):
            stalled = True
            break
        pending.insert(0, lam_done + delta / 2.0)

    result = MorphResult(
        deformed=reference + u.reshape(-1, 3),
        reference=reference,
        displacement=u,
        lam=lam_done,
        von_mises=model.von_mises(u, lam_done),
        strain_energy=model.strain_energy(u, lam_done),
        history=history,
        substrate_bottom_nodes=bottom,
        stalled=stalled,
    )
    if stalled:
        raise ContinuationStallError(
            f"continuation stalled at lambda = {lam_done:.6g} "
            f"(minimum step {min_step:.3g} reached)",
            result,
        )
    return result
