"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.fields.matrices import rotation, skew
from pyfracrigid.grid.lattice import Lattice, WorldRect
from pyfracrigid.rigidity.chains import affine_l2_sq, chain_rotation_field, rigid_chain_propagate
from pyfracrigid.rigidity.fits import (RigidMotion, best_fit_rigid_motion, best_fit_rotation, gradient_residual,
                                       procrustes, project_infinitesimal_rigid, rigid_residual)
from pyfracrigid.rigidity.harmonic import harmonic_ratio, harmonic_split
from pyfracrigid.utils.errors import EmptyFitError

angles = st.floats(-3.0, 3.0, allow_nan=False)
coords = st.floats(-2.0, 2.0, allow_nan=False)


def test_rigid_motion_rejects_non_rotations():
    with pytest.raises(ValueError):
        RigidMotion(np.diag([1.0, -1.0]), (0.0, 0.0))
    m = RigidMotion.from_angle(0.25, (1.0, 2.0))
    assert m.angle == pytest.approx(0.25)
    assert np.allclose(m.apply([0.0, 0.0]), [1.0, 2.0])
    assert m.distance(RigidMotion.identity()) == pytest.approx(2.0)
    assert m.to_dict()["c"] == [1.0, 2.0]


def test_best_fits_recover_a_rigid_field(rigid_field, rigid_motion):
    assert best_fit_rotation(rigid_field).angle == pytest.approx(0.4)
    fit = best_fit_rigid_motion(rigid_field)
    assert fit.distance(rigid_motion) < 1e-10
    assert rigid_residual(rigid_field, fit) == pytest.approx(0.0, abs=1e-20)
    assert gradient_residual(rigid_field, rigid_motion.R) == pytest.approx(0.0, abs=1e-20)


def test_empty_regions_cannot_be_fitted(rigid_field):
    empty = np.zeros(rigid_field.shape, dtype=bool)
    with pytest.raises(EmptyFitError):
        best_fit_rotation(rigid_field, empty)
    with pytest.raises(EmptyFitError):
        best_fit_rigid_motion(rigid_field, empty)


@settings(deadline=None)
@given(angles, coords, coords)
def test_procrustes_recovers_the_motion(theta, c1, c2):
    rng = np.random.default_rng(7)
    x = rng.uniform(-1.0, 1.0, (12, 2))
    truth = RigidMotion.from_angle(theta, (c1, c2))
    fit = procrustes(x, truth.apply(x), np.ones(12))
    assert fit.distance(truth) < 1e-9


def test_infinitesimal_projection(lat16):
    u = DeformationField.from_function(lat16, lambda p, _: p @ skew(0.3).T + np.array([0.2, -0.4]))
    motion = project_infinitesimal_rigid(u)
    assert motion.a == pytest.approx(0.3)
    assert np.allclose(motion.c, [0.2, -0.4])
    assert np.allclose(motion.A, [[0.0, 0.3], [-0.3, 0.0]])


def test_projection_removes_infinitesimal_rotations(lat16):
    def displacement(p, _):
        return np.stack([p[..., 0] ** 2, p[..., 0] * p[..., 1]], -1) + p @ skew(-0.5).T

    u = DeformationField.from_function(lat16, displacement)
    motion = project_infinitesimal_rigid(u)
    base = DeformationField.from_function(lat16, lambda p, _: np.stack([p[..., 0] ** 2, p[..., 0] * p[..., 1]], -1))
    assert motion.a - project_infinitesimal_rigid(base).a == pytest.approx(-0.5)


def test_chain_of_a_rigid_field(rigid_field, rigid_motion):
    chain = chain_rotation_field(rigid_field, np.ones(rigid_field.shape, dtype=bool), 0.25)
    assert len(chain.components) == 1
    comp = chain.components[0]
    assert len(comp.squares) == 16
    assert comp.exact_rigid and comp.ratio == 0.0
    assert np.allclose(comp.rotation, rigid_motion.R)
    assert comp.parents[0] == -1
    assert chain.predicted == [256.0]


def test_chain_components_follow_the_region(rigid_field):
    mask = np.zeros(rigid_field.shape, dtype=bool)
    mask[:, :8] = True
    mask[:, 24:] = True
    chain = chain_rotation_field(rigid_field, mask, 0.25)
    assert [len(c.squares) for c in chain.components] == [4, 4]
    rmap = chain.rotation_map(rigid_field.shape)
    assert np.isnan(rmap[:, 8:24]).all()


def test_chain_ratio_on_a_bent_field():
    lat = Lattice(0.5 / 32, 32, 32)
    f = DeformationField.from_function(
        lat, lambda p, _: np.stack([np.sin(p[..., 0]), p[..., 1] + 0.3 * p[..., 0] ** 2], -1))
    comp = chain_rotation_field(f, np.ones(lat.shape, dtype=bool), 0.25).components[0]
    assert not comp.exact_rigid
    assert comp.best_numerator <= comp.numerator * (1 + 1e-12)
    assert np.isfinite(comp.ratio) and comp.link_constant >= 0


def test_affine_l2_on_the_unit_square():
    assert affine_l2_sq(np.eye(2), np.zeros(2), WorldRect(0.0, 0.0, 1.0, 1.0)) == pytest.approx(2.0 / 3.0)
    assert affine_l2_sq(np.zeros((2, 2)), np.array([3.0, 4.0]), WorldRect(0.0, 0.0, 2.0, 1.0)) == pytest.approx(50.0)


def test_rigid_chain_propagation():
    path = [WorldRect(0.0, 0.0, 1.0, 1.0), WorldRect(0.5, 0.0, 1.5, 1.0), WorldRect(1.0, 0.0, 2.0, 1.0)]
    motions = [RigidMotion.from_angle(a) for a in (0.0, 0.1, 0.2)]
    dev = rigid_chain_propagate(motions, path)
    assert dev.links == 2
    assert dev.kappa == pytest.approx(80.0)
    assert dev.total_angle == pytest.approx(0.2)
    assert dev.holds
    with pytest.raises(ValueError):
        rigid_chain_propagate(motions, [path[0], WorldRect(3.0, 0.0, 4.0, 1.0), path[2]])
    with pytest.raises(ValueError):
        rigid_chain_propagate(motions[:2], path)


def test_harmonic_split_keeps_affine_fields(lat16):
    f = DeformationField.from_function(lat16, lambda p, _: p @ np.array([[1.2, 0.1], [-0.3, 0.9]]).T)
    split = harmonic_split(f)
    assert np.allclose(split.z.corners, 0.0, atol=1e-9)
    assert split.residual <= 1e-10


def test_harmonic_split_of_a_bent_field(lat16):
    f = DeformationField.from_function(
        lat16, lambda p, _: np.stack([p[..., 0] + 0.2 * p[..., 1] ** 2, p[..., 1]], -1))
    region = np.zeros(lat16.shape, dtype=bool)
    region[2:14, 2:14] = True
    split = harmonic_split(f, region)
    assert np.allclose(split.w.corners[~region], f.corners[~region])
    # w = y on the boundary of the region
    assert np.allclose(split.w.corners[2, 2:14, 0], f.corners[2, 2:14, 0])
    assert np.allclose(split.w.corners[2:14, 2, :, 0], f.corners[2:14, 2, :, 0])
    assert np.abs(split.z.corners[region]).max() > 1e-6
    assert np.isfinite(harmonic_ratio(f, split, region))


def test_harmonic_ratio_of_a_rigid_field(rigid_field):
    split = harmonic_split(rigid_field)
    assert math.isnan(harmonic_ratio(rigid_field, split))


def test_harmonic_split_rejects_interior_cracks(lat16):
    labels = np.zeros(lat16.shape, dtype=np.int64)
    labels[:, 8:] = 1
    f = DeformationField.from_function(lat16, lambda p, lab: p @ rotation(0.1 * lab).T, labels)
    with pytest.raises(ValueError):
        harmonic_split(f)
    assert harmonic_split(f, labels == 0).iterations >= 0
