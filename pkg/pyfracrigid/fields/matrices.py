"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import numpy as np

# Closed-form 2x2 algebra. A matrix F = [[a, b], [c, d]] splits into a conformal part
# p Id + q J and an anti-conformal part r K + s L with J the quarter turn; its singular
# values are Q + R and |Q - R| with Q = |(p, q)|, R = |(r, s)|, and det F = Q^2 - R^2.


def conformal_parts(F):
    F = np.asarray(F, dtype=float)
    a, b, c, d = F[..., 0, 0], F[..., 0, 1], F[..., 1, 0], F[..., 1, 1]
    return (a + d) / 2.0, (c - b) / 2.0, (a - d) / 2.0, (b + c) / 2.0


def rotation(theta):
    """Rotation matrices of shape (..., 2, 2) for an array of angles."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def polar_angle(M):
    """
    Angle of the rotation closest to M in the Frobenius norm.

    The nearest rotation to any 2x2 matrix is the rotation by atan2(q, p); when the
    conformal part vanishes the tie is broken by the angle 0.
    """
    p, q, _, _ = conformal_parts(M)
    angle = np.arctan2(q, p)
    return np.where(np.hypot(p, q) > 0, angle, 0.0)


def dist_sq_to_SO2(F):
    """dist^2(F, SO(2)) = 2 (Q - 1)^2 + 2 R^2; NaN entries propagate."""
    p, q, r, s = conformal_parts(F)
    return 2.0 * (np.hypot(p, q) - 1.0) ** 2 + 2.0 * (r * r + s * s)


def dist_to_SO2(F):
    """
    Distance of F to SO(2).

    Equals sqrt((s1 - 1)^2 + (s2 - 1)^2) for det F >= 0 and sqrt((s1 - 1)^2 + (s2 + 1)^2)
    otherwise, with singular values s1 >= s2.

    :param F: array (..., 2, 2), finite.
    :return: array (...)
    """
    F = np.asarray(F, dtype=float)
    if not np.all(np.isfinite(F)):
        raise ValueError("dist_to_SO2 requires finite entries")
    return np.sqrt(dist_sq_to_SO2(F))


def is_rotation(R, tol=1e-12) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (2, 2) or not np.all(np.isfinite(R)):
        return False
    return bool(np.max(np.abs(R.T @ R - np.eye(2))) <= tol and abs(np.linalg.det(R) - 1.0) <= tol)


def sym(G):
    G = np.asarray(G, dtype=float)
    return 0.5 * (G + np.swapaxes(G, -1, -2))


def linear_strain(F, R):
    """
    e_R(F) = (R^T F + F^T R) / 2 - Id.

    :param F: 2x2 (or stacked) matrix.
    :param R: rotation.
    :return: symmetric matrix.
    """
    R = np.asarray(R, dtype=float)
    if not is_rotation(R, tol=1e-10):
        raise ValueError("R is not a rotation within 1e-10")
    G = np.einsum("ba,...bc->...ac", R, np.asarray(F, dtype=float))
    return sym(G) - np.eye(2)


def skew(a):
    """Skew matrices [[0, a], [-a, 0]] for an array of scalars."""
    a = np.asarray(a, dtype=float)
    z = np.zeros_like(a)
    return np.stack([np.stack([z, a], -1), np.stack([-a, z], -1)], -2)
