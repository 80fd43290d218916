"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import logging
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
from scipy import ndimage

from pyfracrigid.engine.carving import energy_density
from pyfracrigid.engine.local_maps import LocalMotionMaps
from pyfracrigid.engine.pou import gradient_constant, shift_weights
from pyfracrigid.enums.Kinematics import Kinematics
from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.grid.edges import EdgeSet
from pyfracrigid.grid.grid_set import GridSet, extract_components, label_components
from pyfracrigid.grid.lattice import cells_per_length
from pyfracrigid.grid.set_calculus import fill_holes
from pyfracrigid.rigidity.fits import infinitesimal_projection, procrustes
from pyfracrigid.utils.errors import HealingError

logger = logging.getLogger(__name__)

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class HealResult:
    field: DeformationField
    U_H: GridSet
    healed: np.ndarray
    filled: np.ndarray
    metrics: Dict[str, float] = field(default_factory=dict)


def blend(f: DeformationField, maps: LocalMotionMaps):
    """Partition-of-unity blend sum_i eta_i (M_i x + c_i) / sum_i eta_i at every cell corner."""
    lat = f.lattice
    X = lat.corner_coords()
    weights = shift_weights(lat, maps.block)
    num = np.zeros(X.shape)
    den = np.zeros(X.shape[:-1])
    for idx, w in enumerate(weights):
        w = w * maps.covered[idx][:, :, None, None]
        num += w[..., None] * np.nan_to_num(maps.evaluate(idx, X))
        den += w
    with np.errstate(invalid="ignore", divide="ignore"):
        return num / den[..., None], den


def heal(f: DeformationField, U: GridSet, maps: LocalMotionMaps, lam: float, ring: int = 2) -> HealResult:
    """
    Replace the field on U by the blended local motions and fill the holes of U below lambda.

    Cells of a filled hole take the healed value at nodes they share with U and the
    motion fitted to the healed field on a ring of U cells around the hole elsewhere.
    The healed region U^H carries no jump; jumps survive on its boundary and outside.

    :param f: field.
    :param U: cells to heal, each corner covered by a shift with positive weight.
    :param maps: local motions.
    :param lam: lambda-square side (hole threshold).
    :param ring: width in cells of the fitting ring around a hole.
    :raises HealingError: a cell of U lacks a rigid-motion value.
    """
    lat = f.lattice
    if cells_per_length(lat, lam) != maps.block:
        raise ValueError("lam does not match the block size of the local maps")
    ny, nx = lat.shape
    cells = U.mask & f.active
    healed, den = blend(f, maps)
    bad = cells & ~np.all(den > 0, axis=(-2, -1))
    if bad.any():
        j, i = np.argwhere(bad)[0]
        bi, bj = lat.block_index(maps.block, 4)
        raise HealingError(f"cell {(int(i), int(j))} in lambda-square {(int(bi[i]), int(bj[j]))} "
                           f"carries no rigid-motion value")
    U_H = fill_holes(U, lam)
    if np.any(U_H.mask & ~f.active):
        U_H = extract_components(U_H.mask & f.active, lat)
    holes = U_H.mask & ~cells
    corners = np.array(f.corners)
    corners[cells] = healed[cells]
    nodal = np.full((ny + 1, nx + 1, 2), np.nan)
    for dy in (0, 1):
        for dx in (0, 1):
            target = nodal[dy:dy + ny, dx:dx + nx]
            target[cells] = healed[:, :, dy, dx][cells]
    X = lat.corner_coords()
    n, labels = label_components(holes)
    for q in range(1, n + 1):
        hole = labels == q
        band = ndimage.binary_dilation(hole, structure=_EIGHT, iterations=ring) & cells
        if not band.any():
            raise HealingError(f"hole at cell {tuple(int(v) for v in np.argwhere(hole)[0][::-1])} has no healed neighbourhood")
        pts = X[band].reshape(-1, 2)
        vals = healed[band].reshape(-1, 2)
        w = np.full(pts.shape[0], lat.side ** 2 / 4.0)
        motion = (infinitesimal_projection(pts, vals, w) if maps.kinematics == Kinematics.LINEAR
                  else procrustes(pts, vals, w))
        for dy in (0, 1):
            for dx in (0, 1):
                shared = nodal[dy:dy + ny, dx:dx + nx][hole]
                fitted = motion.apply(X[:, :, dy, dx][hole])
                corners[:, :, dy, dx][hole] = np.where(np.isfinite(shared), shared, fitted)
    interior = f.jumps.interior_to(U_H.mask)
    seam = EdgeSet.interfaces(U_H.mask.astype(np.int8), lat.side, valid=f.active)
    kept = f.jumps.edges - interior
    out = f.with_corners(corners, kept.vertical | seam.vertical, kept.horizontal | seam.horizontal)
    metrics = _metrics(f, out, cells, U_H.mask, maps.kinematics)
    metrics["filled_cells"] = float(holes.sum())
    metrics["pou_gradient_constant"] = gradient_constant(shift_weights(lat, maps.block), maps.covered, den,
                                                         lat.side, maps.block, cells)
    logger.debug("healed %d cells, filled %d hole cells", int(cells.sum()), int(holes.sum()))
    return HealResult(out, U_H, cells, holes, metrics)


def _metrics(f, out, cells, healed_region, kinematics) -> Dict[str, float]:
    h2 = f.h ** 2
    dens = energy_density(out, kinematics)
    dG = np.sum((out.gradients - f.gradients) ** 2, axis=(-2, -1))
    dv = np.sum((out.corners - f.corners) ** 2, axis=-1).sum(axis=(-2, -1)) / 4.0
    return {
        "healed_energy": float(np.sum(dens[healed_region])) * h2,
        "gradient_change": float(np.sum(dG[cells])) * h2,
        "value_change": float(np.sum(dv[cells])) * h2,
        "healed_cells": float(cells.sum()),
    }
