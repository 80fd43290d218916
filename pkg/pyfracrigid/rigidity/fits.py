"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.fields.matrices import is_rotation, polar_angle, rotation, skew
from pyfracrigid.utils.errors import EmptyFitError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RigidMotion:
    """x -> R x + c with R in SO(2)."""
    R: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        R = np.array(self.R, dtype=float)
        c = np.array(self.c, dtype=float).reshape(2)
        if not is_rotation(R, tol=1e-12):
            raise ValueError("R must be a rotation within 1e-12")
        R.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_angle(cls, theta: float, c=(0.0, 0.0)) -> "RigidMotion":
        return cls(rotation(theta), c)

    @classmethod
    def identity(cls) -> "RigidMotion":
        return cls(np.eye(2), np.zeros(2))

    @property
    def angle(self) -> float:
        return math.atan2(self.R[1, 0], self.R[0, 0])

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("ab,...b->...a", self.R, np.asarray(x, dtype=float)) + self.c

    def distance(self, other: "RigidMotion") -> float:
        return float(max(np.max(np.abs(self.R - other.R)), np.max(np.abs(self.c - other.c))))

    def to_dict(self):
        return {"R": self.R.tolist(), "c": self.c.tolist()}


@dataclass(frozen=True, eq=False)
class InfinitesimalRigidMotion:
    """x -> A x + c with A = [[0, a], [-a, 0]]."""
    a: float
    c: np.ndarray

    @property
    def A(self) -> np.ndarray:
        return skew(self.a)

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.stack([self.a * x[..., 1], -self.a * x[..., 0]], axis=-1) + np.asarray(self.c)

    def distance(self, other: "InfinitesimalRigidMotion") -> float:
        return float(max(abs(self.a - other.a), np.max(np.abs(np.asarray(self.c) - np.asarray(other.c)))))

    def to_dict(self):
        return {"A": self.A.tolist(), "c": np.asarray(self.c).tolist()}


def fit_region(f: DeformationField, region=None) -> np.ndarray:
    if region is None:
        return f.active
    region = np.asarray(region, dtype=bool)
    if region.shape != f.shape:
        raise ValueError("Region mask does not match the field lattice")
    return region & f.active


def corner_samples(f: DeformationField, region=None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Corner points, values and quadrature weights h^2/4 of the region's cells."""
    mask = fit_region(f, region)
    pts = f.lattice.corner_coords()[mask].reshape(-1, 2)
    vals = f.corners[mask].reshape(-1, 2)
    w = np.full(pts.shape[0], f.h ** 2 / 4.0)
    return pts, vals, w


def best_fit_rotation(f: DeformationField, region=None) -> RigidMotion:
    """
    Rotation minimizing sum |grad y - R|^2 h^2: the polar factor of the summed gradient.

    :raises EmptyFitError: region without active cells.
    """
    mask = fit_region(f, region)
    if not mask.any():
        raise EmptyFitError("best_fit_rotation: region has no gradient cells")
    M = np.sum(f.gradients[mask], axis=0)
    return RigidMotion.from_angle(float(polar_angle(M)))


def procrustes(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> RigidMotion:
    """
    Weighted orthogonal Procrustes over SO(2) with translation.

    :param x: (n, 2) reference points.
    :param y: (n, 2) target values.
    :param w: (n,) positive weights.
    :return: (R, c) minimizing sum w |y - (R x + c)|^2.
    """
    if x.shape[0] == 0:
        raise EmptyFitError("procrustes: no samples")
    W = float(np.sum(w))
    xb = (w[:, None] * x).sum(axis=0) / W
    yb = (w[:, None] * y).sum(axis=0) / W
    K = np.einsum("n,na,nb->ab", w, y - yb, x - xb)
    R = rotation(float(polar_angle(K)))
    return RigidMotion(R, yb - R @ xb)


def best_fit_rigid_motion(f: DeformationField, region=None) -> RigidMotion:
    """
    (R, c) minimizing the corner-quadrature L^2 distance between y and R x + c.

    A region reduced to a single point yields R = Id and c = y - x.
    """
    x, y, w = corner_samples(f, region)
    if x.shape[0] == 0:
        raise EmptyFitError("best_fit_rigid_motion: empty region")
    if np.allclose(x, x[0]):
        return RigidMotion(np.eye(2), y[0] - x[0])
    return procrustes(x, y, w)


def rigid_residual(f: DeformationField, motion, region=None) -> float:
    """||y - motion||^2_{L^2(region)} by corner quadrature."""
    x, y, w = corner_samples(f, region)
    d = y - motion.apply(x)
    return float(np.sum(w * np.sum(d * d, axis=1)))


def gradient_residual(f: DeformationField, R: np.ndarray, region=None, power: int = 2) -> float:
    """||grad y - R||^p_{L^p(region)} with R a single matrix or per-cell (ny, nx, 2, 2) field."""
    mask = fit_region(f, region)
    R = np.asarray(R, dtype=float)
    diff = f.gradients - R
    n = np.linalg.norm(diff, axis=(-2, -1))
    ok = mask & np.isfinite(n)
    return float(np.sum(n[ok] ** power)) * f.h ** 2


def infinitesimal_projection(x: np.ndarray, u: np.ndarray, w: np.ndarray) -> InfinitesimalRigidMotion:
    """
    L^2(w)-orthogonal projection of samples u onto span{e1, e2, (-x2, x1)}.

    With centred coordinates the three basis fields are mutually orthogonal, so the
    normal equations are diagonal.
    """
    if x.shape[0] == 0:
        raise EmptyFitError("infinitesimal_projection: no samples")
    W = float(np.sum(w))
    xb = (w[:, None] * x).sum(axis=0) / W
    xc = x - xb
    alpha = (w[:, None] * u).sum(axis=0) / W
    g33 = float(np.sum(w * np.sum(xc * xc, axis=1)))
    beta = float(np.sum(w * (-xc[:, 1] * u[:, 0] + xc[:, 0] * u[:, 1]))) / g33 if g33 > 0 else 0.0
    a = -beta
    A = np.array([[0.0, a], [-a, 0.0]])
    return InfinitesimalRigidMotion(a, alpha - A @ xb)


def project_infinitesimal_rigid(u: DeformationField, region=None) -> InfinitesimalRigidMotion:
    """Pu over the region's cells (corner quadrature)."""
    x, v, w = corner_samples(u, region)
    return infinitesimal_projection(x, v, w)
