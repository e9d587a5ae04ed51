"""6-node wedge element: total-Lagrangian St. Venant-Kirchhoff kinematics.

Strain measure is Green-Lagrange E = (F^T F - I)/2 with a prescribed
stress-free eigenstrain e*: the stored energy density is

    psi = 0.5 * lam * tr(E - e*)^2 + mu * (E - e*):(E - e*)

integrated over the reference wedge with 3 in-plane barycentric points x 2
through-thickness Gauss points.

Thin stacked layers bend far too stiffly with plain linear prisms: the
element cannot represent the linear-through-thickness normal strain that
Poisson coupling demands, which locks the bending mode badly as nu -> 0.5.
The cure here is the standard solid-shell enhancement: one internal strain
mode per element, E_zz -> E_zz + beta * zeta, statically condensed in
closed form (the energy is quadratic in beta). Energy, internal force and
tangent are all derived from the condensed energy, so they remain exactly
consistent; the tangent gains a symmetric rank-one correction.

The enhancement singles out the stack direction z, as a shell formulation
does: material-frame rotation invariance is kept for rotations about z
(plus all in-plane motions), which is the symmetry the stacked-plate
problem actually has. The unenhanced element (enhanced=False) is fully
isotropic and is kept for patch and objectivity testing.

All element routines are vectorized over a leading element axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvertedElementError

_SQ3 = 1.0 / np.sqrt(3.0)

# (xi, eta, zeta, weight); triangle reference area 1/2, zeta on [-1, 1]
FULL_RULE = np.array(
    [
        (1 / 6, 1 / 6, -_SQ3, 1 / 6),
        (2 / 3, 1 / 6, -_SQ3, 1 / 6),
        (1 / 6, 2 / 3, -_SQ3, 1 / 6),
        (1 / 6, 1 / 6, +_SQ3, 1 / 6),
        (2 / 3, 1 / 6, +_SQ3, 1 / 6),
        (1 / 6, 2 / 3, +_SQ3, 1 / 6),
    ]
)


def shape_gradients(rule: np.ndarray) -> np.ndarray:
    """d N_i / d (xi, eta, zeta) at each rule point; shape (nq, 6, 3)."""
    out = np.zeros((len(rule), 6, 3))
    for q, (xi, eta, zeta, _) in enumerate(rule):
        lo = 0.5 * (1.0 - zeta)
        hi = 0.5 * (1.0 + zeta)
        l1, l2, l3 = 1.0 - xi - eta, xi, eta
        out[q] = [
            [-lo, -lo, -0.5 * l1],
            [+lo, 0.0, -0.5 * l2],
            [0.0, +lo, -0.5 * l3],
            [-hi, -hi, +0.5 * l1],
            [+hi, 0.0, +0.5 * l2],
            [0.0, +hi, +0.5 * l3],
        ]
    return out


_DN_FULL = shape_gradients(FULL_RULE)
ZETA = FULL_RULE[:, 2]


def reference_gradients_volume(x: np.ndarray):
    """Reference shape-function gradients and weighted Jacobians.

    x: (e, 6, 3) reference nodal coordinates. Returns G: (e, nq, 6, 3)
    with G[e,q,i] = grad_X N_i, and wdet: (e, nq) = w_q * det J, whose sum
    over q is the element volume.
    """
    x = np.asarray(x, dtype=float)
    jac = np.einsum("eia,qib->eqab", x, _DN_FULL)
    det = np.linalg.det(jac)
    if np.any(det <= 0.0):
        bad = int(np.argwhere(det <= 0.0)[0][0])
        raise InvertedElementError(bad, f"det J = {det[bad].min():.3e}")
    inv = np.linalg.inv(jac)
    g = np.einsum("qib,eqba->eqia", _DN_FULL, inv)
    wdet = FULL_RULE[:, 3][None, :] * det
    return g, wdet


def _strain_terms(u: np.ndarray, g: np.ndarray, eig: np.ndarray):
    """F, elastic strain Ee = E - e*, and tr(Ee) per quadrature point."""
    f = np.einsum("eia,eqib->eqab", u, g)
    f[..., 0, 0] += 1.0
    f[..., 1, 1] += 1.0
    f[..., 2, 2] += 1.0
    e = 0.5 * (np.einsum("eqca,eqcb->eqab", f, f) - np.eye(3))
    ee = e - eig[:, None, :, :]
    tr = np.einsum("eqaa->eq", ee)
    return f, ee, tr


def wedge_batch(
    x: np.ndarray,
    u: np.ndarray,
    eig: np.ndarray,
    lam: np.ndarray,
    mu: np.ndarray,
    enhanced: bool = True,
    want_energy=True,
    want_force=True,
    want_tangent=True,
    precomputed=None,
):
    """Energy, internal force and consistent tangent for a batch of wedges.

    x, u: (e, 6, 3); eig: (e, 3, 3) eigenstrain; lam, mu: (e,) Lame
    constants. Returns (U (e,), f (e, 18), K (e, 18, 18)); entries not
    requested are None.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if precomputed is None:
        g, wdet = reference_gradients_volume(x)
    else:
        g, wdet = precomputed

    f, ee, tr = _strain_terms(u, g, eig)

    if enhanced:
        # condense the internal thickness mode: Ee_zz += beta * zeta with
        # dU/dbeta = sum w zeta S_zz = 0 solved in closed form
        l_lin = np.einsum("eq,q,eq->e", wdet, ZETA, lam[:, None] * tr + 2.0 * mu[:, None] * ee[..., 2, 2])
        q_den = (lam + 2.0 * mu) * np.einsum("eq,q->e", wdet, ZETA**2)
        beta = -l_lin / q_den
        dz = beta[:, None] * ZETA[None, :]
        ee = ee.copy()
        ee[..., 2, 2] += dz
        tr = tr + dz

    s = 2.0 * mu[:, None, None, None] * ee
    s[..., 0, 0] += lam[:, None] * tr
    s[..., 1, 1] += lam[:, None] * tr
    s[..., 2, 2] += lam[:, None] * tr

    ne = len(x)
    nq = g.shape[1]
    energy = force = tangent = None
    if want_energy:
        energy = np.einsum("eq,eqab,eqab->e", wdet, ee, ee) * mu
        energy += 0.5 * lam * np.einsum("eq,eq->e", wdet, tr**2)

    if want_force:
        fs = f @ s  # (e, q, 3, 3) first Piola-Kirchhoff
        force = np.einsum("eq,eqac,eqic->eia", wdet, fs, g).reshape(ne, 18)

    if want_tangent:
        # batched per quadrature point: keeps the temporaries BLAS-shaped
        tangent = np.zeros((ne, 18, 18))
        k5 = tangent.reshape(ne, 6, 3, 6, 3)
        if enhanced:
            v = np.zeros((ne, 6, 3))
        for q in range(nq):
            fq = f[:, q]
            gq = g[:, q]
            w = wdet[:, q]
            # material strain-displacement rows in engineering Voigt order
            t_prod = fq[:, None, :, :, None] * gq[:, :, None, None, :]
            b = np.empty((ne, 6, 3, 6))
            b[..., 0] = t_prod[..., 0, 0]
            b[..., 1] = t_prod[..., 1, 1]
            b[..., 2] = t_prod[..., 2, 2]
            b[..., 3] = t_prod[..., 0, 1] + t_prod[..., 1, 0]
            b[..., 4] = t_prod[..., 0, 2] + t_prod[..., 2, 0]
            b[..., 5] = t_prod[..., 1, 2] + t_prod[..., 2, 1]
            bm = b.reshape(ne, 18, 6)
            trv = bm[:, :, :3].sum(axis=2)  # tr(dE) per dof
            wl = (w * lam)[:, None]
            tangent += (wl * trv)[:, :, None] * trv[:, None, :]
            bmu = bm * (w * mu)[:, None, None]
            bmu[:, :, :3] *= 2.0
            tangent += bmu @ bm.transpose(0, 2, 1)
            # geometric part: (G_i . S G_j) on each displacement component
            gsg = (gq @ s[:, q]) @ gq.transpose(0, 2, 1)
            gsg = gsg * w[:, None, None]
            for a in range(3):
                k5[:, :, a, :, a] += gsg
            if enhanced:
                # d^2 U / du dbeta accumulates toward the rank-one update
                hq = trv.reshape(ne, 6, 3)
                hz = gq[:, :, 2, None] * fq[:, None, :, 2]
                v += (w * ZETA[q] * lam)[:, None, None] * hq
                v += 2.0 * (w * ZETA[q] * mu)[:, None, None] * hz
        if enhanced:
            vf = v.reshape(ne, 18)
            tangent -= vf[:, :, None] * vf[:, None, :] / q_den[:, None, None]

    return energy, force, tangent


def cauchy_von_mises(x, u, eig, lam, mu, enhanced: bool = True) -> np.ndarray:
    """Element-average von Mises of the push-forward Cauchy stress (MPa)."""
    g, wdet = reference_gradients_volume(np.asarray(x, dtype=float))
    f, ee, tr = _strain_terms(np.asarray(u, dtype=float), g, eig)
    if enhanced:
        l_lin = np.einsum(
            "eq,q,eq->e", wdet, ZETA, lam[:, None] * tr + 2.0 * mu[:, None] * ee[..., 2, 2]
        )
        q_den = (lam + 2.0 * mu) * np.einsum("eq,q->e", wdet, ZETA**2)
        dz = (-l_lin / q_den)[:, None] * ZETA[None, :]
        ee = ee.copy()
        ee[..., 2, 2] += dz
        tr = tr + dz
    s = 2.0 * mu[:, None, None, None] * ee
    s[..., 0, 0] += lam[:, None] * tr
    s[..., 1, 1] += lam[:, None] * tr
    s[..., 2, 2] += lam[:, None] * tr
    detf = np.linalg.det(f)
    sigma = np.einsum("eqab,eqbc,eqdc->eqad", f, s, f) / detf[..., None, None]
    dev = sigma - np.einsum("eqaa->eq", sigma)[..., None, None] * np.eye(3) / 3.0
    vm = np.sqrt(1.5 * np.einsum("eqab,eqab->eq", dev, dev))
    vol = wdet.sum(axis=1)
    return np.einsum("eq,eq->e", wdet, vm) / vol


@dataclass
class ElementState:
    """Single-element evaluation state (mainly a test surface)."""

    element_id: int
    coords: np.ndarray  # (6, 3) reference coordinates, mm
    displacement: np.ndarray  # (18,) mm
    eigenstrain: np.ndarray  # (3, 3)
    lam: float
    mu: float
    enhanced: bool = True

    @classmethod
    def from_material(cls, element_id, coords, displacement, eigenstrain, material,
                      enhanced: bool = True):
        return cls(
            element_id,
            np.asarray(coords, dtype=float),
            np.asarray(displacement, dtype=float),
            np.asarray(eigenstrain, dtype=float),
            material.lame_lambda,
            material.lame_mu,
            enhanced,
        )

    def _batch_args(self):
        return (
            self.coords[None],
            self.displacement.reshape(1, 6, 3),
            self.eigenstrain[None],
            np.array([self.lam]),
            np.array([self.mu]),
            self.enhanced,
        )


def element_force_tangent(state: ElementState):
    """Internal force (18,) and consistent tangent (18, 18) of one wedge."""
    try:
        _, f, k = wedge_batch(*state._batch_args(), want_energy=False)
    except InvertedElementError:
        raise InvertedElementError(state.element_id) from None
    return f[0], k[0]


def element_energy(state: ElementState) -> float:
    try:
        e, _, _ = wedge_batch(
            *state._batch_args(), want_force=False, want_tangent=False
        )
    except InvertedElementError:
        raise InvertedElementError(state.element_id) from None
    return float(e[0])
