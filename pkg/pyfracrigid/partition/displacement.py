"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import logging

import numpy as np

from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.grid.edges import EdgeSet
from pyfracrigid.partition.partition import CaccioppoliPartition

logger = logging.getLogger(__name__)


def build_displacement(yhat: DeformationField, partition: CaccioppoliPartition) -> DeformationField:
    """
    u = y^ - (R_j x + c_j) on P_j and 0 off the pieces.

    The jump edges of u are those of y^ together with every interface between two
    labels, so openings of u across piece boundaries are recorded even when they vanish.
    """
    lat = partition.lattice
    X = lat.corner_coords()
    corners = np.where(yhat.active[:, :, None, None, None], np.zeros(yhat.corners.shape), np.nan)
    for p in partition.pieces:
        sel = p.cells & yhat.active
        corners[sel] = yhat.corners[sel] - p.motion.apply(X[sel])
    structure = EdgeSet.interfaces(partition.labels, lat.side, valid=yhat.active)
    edges = yhat.jumps.edges | structure
    return DeformationField.build(lat, corners, yhat.active, edges.vertical, edges.horizontal)


def reconstruct(u: DeformationField, partition: CaccioppoliPartition) -> np.ndarray:
    """Corner values u + (R_j x + c_j) on the pieces, NaN elsewhere."""
    X = partition.lattice.corner_coords()
    out = np.full(u.corners.shape, np.nan)
    for p in partition.pieces:
        sel = p.cells & u.active
        out[sel] = u.corners[sel] + p.motion.apply(X[sel])
    return out


def essential_jumps(u: DeformationField, tol: float) -> EdgeSet:
    """Jump edges of u whose opening exceeds ``tol`` at some endpoint."""
    av, ah = u.jumps.amplitudes()
    v = u.jumps.edges.vertical & (np.nan_to_num(av).max(axis=-1) > tol)
    h = u.jumps.edges.horizontal & (np.nan_to_num(ah).max(axis=-1) > tol)
    return EdgeSet(v, h, u.h)
