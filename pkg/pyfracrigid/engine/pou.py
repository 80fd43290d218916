"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import numpy as np

from pyfracrigid.grid.lattice import Lattice

# Tensor-product bumps on the four shifted lattices of squares of side L. Along each
# axis the bump is a cubic smoothstep falling from 1 at the square centre to 0 at 3L/8,
# so |b'| <= 1.5 / (3L/8) = 4/L. A square's bump is zero on its boundary, hence sums
# over one shift never mix two squares.


def smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def bump(t, half_side: float):
    """1D bump of a square with half side ``half_side`` at offset t from its centre."""
    return smoothstep((0.75 * half_side - np.abs(t)) / (0.75 * half_side))


def shift_weights(lattice: Lattice, block: int) -> list:
    """
    Unnormalised weights eta_i at the corners of every cell, for shifts 1..4.

    Each corner is measured from the centre of the block of shift i owning the cell.

    :param lattice: lattice.
    :param block: square side in cells.
    :return: four arrays of shape (ny, nx, 2, 2) indexed [j, i, dy, dx].
    """
    X = lattice.corner_coords()
    half = block * lattice.side / 2.0
    out = []
    for shift in (1, 2, 3, 4):
        cx, cy = lattice.block_centers(block, shift)
        bx = bump(X[..., 0] - cx[None, :, None, None], half)
        by = bump(X[..., 1] - cy[:, None, None, None], half)
        out.append(bx * by)
    return out


def healable(covered: list, weights: list) -> np.ndarray:
    """Cells whose four corners all carry a positive weight from a shift with a local map."""
    total = sum(w * c[:, :, None, None] for w, c in zip(weights, covered))
    return np.all(total > 0, axis=(-2, -1))


def gradient_constant(weights: list, covered: list, den: np.ndarray, h: float, block: int,
                      cells: np.ndarray) -> float:
    """
    lambda times the largest partial derivative of the normalised weights eta_i / sum eta over ``cells``.

    Derivatives are the cellwise bilinear ones of the corner values; the raw bumps alone
    stay at or below 4, the normalisation can raise it.
    """
    if not cells.any():
        return 0.0
    worst = 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        for w, c in zip(weights, covered):
            eta = np.where(den > 0, w * c[:, :, None, None] / den, 0.0)
            dx = ((eta[..., 0, 1] - eta[..., 0, 0]) + (eta[..., 1, 1] - eta[..., 1, 0])) / (2.0 * h)
            dy = ((eta[..., 1, 0] - eta[..., 0, 0]) + (eta[..., 1, 1] - eta[..., 0, 1])) / (2.0 * h)
            worst = max(worst, float(np.max(np.maximum(np.abs(dx), np.abs(dy))[cells])))
    return worst * block * h
