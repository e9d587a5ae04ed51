"""Wedge element verification: finite-difference oracles, patch states,
objectivity, and rigid-mode content of the tangent."""

import math

import numpy as np
import pytest

from shrinkmorph.errors import InvertedElementError
from shrinkmorph.fem.element import (
    ElementState,
    element_energy,
    element_force_tangent,
    reference_gradients_volume,
    wedge_batch,
)
from shrinkmorph.materials import MaterialModel


def unit_wedge(scale=1.0, thickness=1.0):
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]) * scale
    bottom = np.column_stack([tri, np.zeros(3)])
    top = np.column_stack([tri, np.full(3, thickness)])
    return np.vstack([bottom, top])


def random_wedge(rng, scale=1.0):
    x = unit_wedge(scale=scale, thickness=0.6 * scale)
    return x + 0.08 * scale * rng.standard_normal(x.shape)


def make_state(x, u, eig, E=100.0, nu=0.3, enhanced=False):
    mat = MaterialModel(E=E, nu=nu, alpha=-0.01)
    return ElementState.from_material(0, x, u.ravel(), eig, mat, enhanced=enhanced)


def fd_force(state, h=1e-6):
    """Central differences of the energy, the independent gradient oracle."""
    f = np.zeros(18)
    for i in range(18):
        up = state.displacement.copy()
        um = state.displacement.copy()
        up[i] += h
        um[i] -= h
        sp = ElementState(0, state.coords, up, state.eigenstrain, state.lam, state.mu, state.enhanced)
        sm = ElementState(0, state.coords, um, state.eigenstrain, state.lam, state.mu, state.enhanced)
        f[i] = (element_energy(sp) - element_energy(sm)) / (2 * h)
    return f


def fd_tangent(state, h=1e-6):
    k = np.zeros((18, 18))
    for i in range(18):
        up = state.displacement.copy()
        um = state.displacement.copy()
        up[i] += h
        um[i] -= h
        sp = ElementState(0, state.coords, up, state.eigenstrain, state.lam, state.mu, state.enhanced)
        sm = ElementState(0, state.coords, um, state.eigenstrain, state.lam, state.mu, state.enhanced)
        fp, _ = element_force_tangent(sp)
        fm, _ = element_force_tangent(sm)
        k[:, i] = (fp - fm) / (2 * h)
    return k


class TestReferenceGeometry:
    def test_volume_of_unit_wedge(self):
        _, wdet = reference_gradients_volume(unit_wedge()[None])
        assert wdet.sum() == pytest.approx(0.5, rel=1e-12)

    def test_inverted_raises(self):
        x = unit_wedge()
        x[3:, 2] = -1.0  # top below bottom
        with pytest.raises(InvertedElementError):
            reference_gradients_volume(x[None])


class TestReferenceState:
    @pytest.mark.parametrize("enhanced", [False, True])
    def test_zero_everything(self, enhanced):
        st = make_state(unit_wedge(), np.zeros((6, 3)), np.zeros((3, 3)), enhanced=enhanced)
        f, k = element_force_tangent(st)
        assert np.linalg.norm(f) == pytest.approx(0.0, abs=1e-14)
        assert np.allclose(k, k.T, atol=1e-10)
        # exactly 6 near-null rigid modes; condensation adds no spurious ones
        w = np.linalg.eigvalsh(k)
        assert np.sum(np.abs(w) < 1e-9 * np.abs(w).max()) == 6
        assert np.all(w > -1e-9 * np.abs(w).max())

    @pytest.mark.parametrize("enhanced", [False, True])
    def test_pure_stretch_matches_isotropic_eigenstrain(self, enhanced):
        # u = (sqrt(1+2e) - 1) x gives Green strain e*I exactly: zero stress
        e = 1e-2
        x = unit_wedge()
        stretch = math.sqrt(1.0 + 2.0 * e) - 1.0
        u = stretch * x
        st = make_state(x, u, e * np.eye(3), nu=0.46 if enhanced else 0.3, enhanced=enhanced)
        f, _ = element_force_tangent(st)
        scale = st.lam + 2 * st.mu
        assert np.abs(f).max() <= 1e-12 * scale

    def test_energy_zero_at_matching_stretch(self):
        e = 0.03
        x = random_wedge(np.random.default_rng(3))
        stretch = math.sqrt(1.0 + 2.0 * e) - 1.0
        st = make_state(x, stretch * x, e * np.eye(3))
        assert element_energy(st) == pytest.approx(0.0, abs=1e-12)


class TestConsistency:
    @pytest.mark.parametrize("enhanced", [False, True])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_force_is_energy_gradient(self, seed, enhanced):
        rng = np.random.default_rng(seed)
        x = random_wedge(rng)
        u = 0.05 * rng.standard_normal((6, 3))
        eig = np.diag([-0.02, -0.02, 0.0])
        st = make_state(x, u, eig, nu=0.47 if enhanced else 0.33, enhanced=enhanced)
        f, _ = element_force_tangent(st)
        f_fd = fd_force(st)
        err = np.linalg.norm(f - f_fd) / np.linalg.norm(f_fd)
        assert err <= 1e-6

    @pytest.mark.parametrize("enhanced", [False, True])
    @pytest.mark.parametrize("seed", [0, 1])
    def test_tangent_is_force_jacobian(self, seed, enhanced):
        rng = np.random.default_rng(10 + seed)
        x = random_wedge(rng)
        u = 0.05 * rng.standard_normal((6, 3))
        st = make_state(x, u, np.zeros((3, 3)), nu=0.47 if enhanced else 0.3, enhanced=enhanced)
        _, k = element_force_tangent(st)
        k_fd = fd_tangent(st)
        err = np.linalg.norm(k - k_fd) / np.linalg.norm(k_fd)
        assert err <= 1e-6
        assert np.allclose(k, k.T, atol=1e-9 * np.abs(k).max())


class TestObjectivity:
    def rotation(self, axis, angle):
        axis = np.asarray(axis, dtype=float)
        axis /= np.linalg.norm(axis)
        K = np.array(
            [
                [0, -axis[2], axis[1]],
                [axis[2], 0, -axis[0]],
                [-axis[1], axis[0], 0],
            ]
        )
        return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)

    @pytest.mark.parametrize("enhanced", [False, True])
    def test_energy_invariant_under_z_rotation_in_plane_eigenstrain(self, enhanced):
        # diag(a, a, 0) eigenstrain is axisymmetric: any rotation about z
        # applied to reference + deformed leaves the energy unchanged (the
        # thickness enhancement also keeps z special, so it shares this)
        rng = np.random.default_rng(7)
        x = random_wedge(rng)
        u = 0.04 * rng.standard_normal((6, 3))
        eig = np.diag([-0.05, -0.05, 0.0])
        st = make_state(x, u, eig, enhanced=enhanced)
        q = self.rotation([0, 0, 1], 0.83)
        xq = x @ q.T
        uq = (x + u) @ q.T - xq
        stq = make_state(xq, uq, eig, enhanced=enhanced)
        u0, u1 = element_energy(st), element_energy(stq)
        assert u1 == pytest.approx(u0, rel=1e-10)

    def test_energy_invariant_under_any_rotation_isotropic_eigenstrain(self):
        # the unenhanced element is fully isotropic in the material frame
        rng = np.random.default_rng(8)
        x = random_wedge(rng)
        u = 0.04 * rng.standard_normal((6, 3))
        eig = -0.03 * np.eye(3)
        st = make_state(x, u, eig)
        q = self.rotation([0.3, -0.5, 0.81], 1.21)
        xq = x @ q.T
        uq = (x + u) @ q.T - xq
        stq = make_state(xq, uq, eig)
        assert element_energy(stq) == pytest.approx(element_energy(st), rel=1e-10)

    @pytest.mark.parametrize("enhanced", [False, True])
    def test_spatial_rotation_superposed_on_deformed(self, enhanced):
        # true objectivity: rotating only the deformed configuration leaves
        # the energy unchanged for either element variant
        rng = np.random.default_rng(9)
        x = random_wedge(rng)
        u = 0.04 * rng.standard_normal((6, 3))
        eig = np.diag([-0.02, -0.02, 0.0])
        st = make_state(x, u, eig, enhanced=enhanced)
        q = self.rotation([0.4, 0.2, 0.89], 0.9)
        uq = (x + u) @ q.T - x
        stq = make_state(x, uq, eig, enhanced=enhanced)
        assert element_energy(stq) == pytest.approx(element_energy(st), rel=1e-10)

    def test_finite_rotation_of_stress_free_state_stays_stress_free(self):
        # rigid rotation after a stress-free stretch keeps zero force
        e = 0.02
        x = unit_wedge()
        q = self.rotation([0.2, 0.9, 0.1], 0.6)
        stretch = math.sqrt(1.0 + 2.0 * e)
        u = (stretch * x) @ q.T - x
        st = make_state(x, u, e * np.eye(3))
        f, _ = element_force_tangent(st)
        assert np.abs(f).max() <= 1e-11 * (st.lam + 2 * st.mu)


class TestBatchShape:
    def test_batch_matches_single(self):
        rng = np.random.default_rng(5)
        xs = np.stack([random_wedge(rng) for _ in range(4)])
        us = 0.03 * rng.standard_normal((4, 6, 3))
        eigs = np.stack([np.diag([-0.01 * i, -0.01 * i, 0.0]) for i in range(4)])
        lam = np.full(4, 57.0)
        mu = np.full(4, 41.0)
        e, f, k = wedge_batch(xs, us, eigs, lam, mu, enhanced=False)
        for i in range(4):
            st = ElementState(i, xs[i], us[i].ravel(), eigs[i], 57.0, 41.0, False)
            fi, ki = element_force_tangent(st)
            assert e[i] == pytest.approx(element_energy(st), rel=1e-12, abs=1e-15)
            np.testing.assert_allclose(f[i], fi, rtol=1e-12, atol=1e-13)
            np.testing.assert_allclose(k[i], ki, rtol=1e-12, atol=1e-13)
