"""Global residual / tangent assembly over a layered wedge mesh."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..errors import MeshingError
from ..materials import MaterialModel, ThermalLoad, thermal_eigenstrain
from ..meshing import LayeredMesh
from .element import cauchy_von_mises, reference_gradients_volume, wedge_batch


class FEModel:
    """Precomputed element data for one mesh + material set + load.

    Reference geometry may differ from the mesh nodes (imperfection-seeded
    coordinates); everything downstream of the constructor is a pure
    function of the displacement vector and load factor, so one model can
    be shared by a whole continuation run.
    """

    def __init__(
        self,
        mesh: LayeredMesh,
        materials: dict[str, MaterialModel],
        load: ThermalLoad,
        reference: np.ndarray | None = None,
        enhanced: bool = True,
    ):
        self.mesh = mesh
        self.materials = materials
        self.load = load
        self.enhanced = enhanced
        self.reference = (
            np.asarray(reference, dtype=float) if reference is not None else mesh.nodes.copy()
        )
        if self.reference.shape != mesh.nodes.shape:
            raise MeshingError("reference coordinate array has the wrong shape")

        mats = []
        for entry in mesh.stack:
            if entry.material not in materials:
                raise MeshingError(f"material {entry.material!r} not provided")
            mats.append(materials[entry.material])
        lam_by_layer = np.array([m.lame_lambda for m in mats])
        mu_by_layer = np.array([m.lame_mu for m in mats])
        eig_by_layer = np.stack(
            [thermal_eigenstrain(m, load.delta_T, load.mode) for m in mats]
        )

        el = mesh.element_layer
        self.lam = lam_by_layer[el]
        self.mu = mu_by_layer[el]
        self.eig_full = eig_by_layer[el]  # eigenstrain at load factor 1

        self.x = self.reference[mesh.elements]  # (e, 6, 3)
        self.pre = reference_gradients_volume(self.x)
        self.dofs = (3 * mesh.elements[:, :, None] + np.arange(3)).reshape(-1, 18)
        self.rows = np.repeat(self.dofs, 18, axis=1).ravel()
        self.cols = np.tile(self.dofs, (1, 18)).ravel()
        self.n_dof = mesh.n_dof

    def _batch(self, u, lam_factor, want_energy, want_force, want_tangent):
        ue = u.reshape(-1, 3)[self.mesh.elements]
        return wedge_batch(
            self.x,
            ue,
            lam_factor * self.eig_full,
            self.lam,
            self.mu,
            self.enhanced,
            want_energy=want_energy,
            want_force=want_force,
            want_tangent=want_tangent,
            precomputed=self.pre,
        )

    def strain_energy(self, u: np.ndarray, lam_factor: float) -> float:
        """Total stored energy in mJ (= N mm)."""
        e, _, _ = self._batch(u, lam_factor, True, False, False)
        return float(e.sum())

    def residual(self, u: np.ndarray, lam_factor: float) -> np.ndarray:
        _, f, _ = self._batch(u, lam_factor, False, True, False)
        return np.bincount(self.dofs.ravel(), f.ravel(), minlength=self.n_dof)

    def residual_and_tangent(self, u: np.ndarray, lam_factor: float):
        _, f, k = self._batch(u, lam_factor, False, True, True)
        r = np.bincount(self.dofs.ravel(), f.ravel(), minlength=self.n_dof)
        kk = sp.coo_matrix(
            (k.ravel(), (self.rows, self.cols)), shape=(self.n_dof, self.n_dof)
        ).tocsr()
        return r, kk

    def von_mises(self, u: np.ndarray, lam_factor: float) -> np.ndarray:
        ue = u.reshape(-1, 3)[self.mesh.elements]
        return cauchy_von_mises(
            self.x, ue, lam_factor * self.eig_full, self.lam, self.mu, self.enhanced
        )


def assemble(
    mesh: LayeredMesh,
    u: np.ndarray,
    lam_factor: float,
    load: ThermalLoad,
    materials: dict[str, MaterialModel],
    enhanced: bool = True,
):
    """One-shot global residual and sparse symmetric tangent.

    Convenience wrapper; iterative callers should build one FEModel and
    reuse it (fixed sparsity, precomputed reference gradients).
    """
    model = FEModel(mesh, materials, load, enhanced=enhanced)
    return model.residual_and_tangent(np.asarray(u, dtype=float), lam_factor)


def strain_energy(
    mesh: LayeredMesh,
    u: np.ndarray,
    lam_factor: float,
    load: ThermalLoad,
    materials: dict[str, MaterialModel],
    enhanced: bool = True,
) -> float:
    model = FEModel(mesh, materials, load, enhanced=enhanced)
    return model.strain_energy(np.asarray(u, dtype=float), lam_factor)
