"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import logging
import math
from typing import List, NamedTuple, Optional

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse.linalg import lsqr

from pyfracrigid.enums.NormKind import NormKind
from pyfracrigid.fields.deformation_field import DeformationField, mismatch_edges
from pyfracrigid.fields.energies import Energies
from pyfracrigid.fields.matrices import polar_angle, rotation
from pyfracrigid.grid.grid_set import GridSet, StarMeasureConfig, set_norm
from pyfracrigid.grid.lattice import CellRect
from pyfracrigid.rigidity.fits import gradient_residual

logger = logging.getLogger(__name__)

RESOLVED = "resolved"
SUBGRID = "subgrid"


class SubatomisticFit(NamedTuple):
    rotations: np.ndarray        # (ny, nx, 2, 2), NaN off the fitted squares
    squares: List[CellRect]
    residual: float              # ||G_rep - R||^2 over the squares
    curl: float                  # total curl defect of the extended field
    curl_constant: float
    budget: float                # gamma + eps ||U||_*
    regime: str
    raw_residual: float = 0.0    # ||grad v - R||^2 with R fitted on grad v itself
    repair_l2: float = 0.0       # ||grad v - G_rep||^2 over the squares

    @property
    def ratio(self) -> float:
        if self.budget > 0:
            return self.residual / self.budget
        return 0.0 if self.residual <= 0 else math.inf

    def to_dict(self):
        return {"squares": len(self.squares), "residual": self.residual, "raw_residual": self.raw_residual,
                "repair_l2": self.repair_l2, "curl": self.curl, "curl_constant": self.curl_constant,
                "budget": self.budget, "ratio": self.ratio, "regime": self.regime}


def identity_extension(f: DeformationField, cells: np.ndarray) -> DeformationField:
    """Field equal to y on ``cells`` and to the identity elsewhere, on the whole lattice."""
    lat = f.lattice
    X = lat.corner_coords()
    keep = cells & f.active
    corners = np.where(keep[:, :, None, None, None], np.nan_to_num(f.corners), X)
    everywhere = np.ones(lat.shape, dtype=bool)
    v, h = mismatch_edges(corners, everywhere, 0.0)
    return DeformationField.build(lat, corners, everywhere, v, h)


def gradient_operator(ny: int, nx: int, h: float) -> sparse.csr_matrix:
    """
    Bilinear-stencil gradient of nodal values.

    Rows are d/dx of every cell followed by d/dy of every cell (raster order), columns
    are the (ny+1)(nx+1) nodes in raster order.
    """
    j, i = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
    cell = (j * nx + i).ravel()
    n = ny * nx
    w = 1.0 / (2.0 * h)
    rows, cols, vals = [], [], []
    stencils = ((0, (((0, 1), w), ((0, 0), -w), ((1, 1), w), ((1, 0), -w))),
                (n, (((1, 0), w), ((0, 0), -w), ((1, 1), w), ((0, 1), -w))))
    for offset, stencil in stencils:
        for (dy, dx), s in stencil:
            rows.append(cell + offset)
            cols.append(((j + dy) * (nx + 1) + (i + dx)).ravel())
            vals.append(np.full(n, s))
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(2 * n, (ny + 1) * (nx + 1)))


def curl_repair(f: DeformationField, tol: float = 1e-12) -> np.ndarray:
    """
    Least-squares projection of the cell gradients onto gradients of continuous fields.

    The removed part is the incompatible one, carried by the cells along the jumps; a
    field without jumps comes back unchanged. Each component is solved with LSQR started
    from the nodal values of the field.

    :param f: field defined on every cell.
    :param tol: LSQR stopping tolerance.
    :return: repaired gradients (ny, nx, 2, 2) indexed [j, i, component, derivative].
    """
    ny, nx = f.shape
    n = ny * nx
    D = gradient_operator(ny, nx, f.h)
    G = np.nan_to_num(f.gradients)
    nodal = np.nan_to_num(f.nodal_values())
    out = np.empty_like(G)
    for a in (0, 1):
        b = np.concatenate([G[..., a, 0].ravel(), G[..., a, 1].ravel()])
        sol = lsqr(D, b, atol=tol, btol=tol, x0=nodal[..., a].ravel())
        g = D @ sol[0]
        out[..., a, 0] = g[:n].reshape(ny, nx)
        out[..., a, 1] = g[n:].reshape(ny, nx)
        logger.debug("curl repair component %d: %d LSQR iterations (stop %d)", a, sol[2], sol[1])
    return out


def subatomistic_fit(f: DeformationField, U, k: float, eps: float, M: Optional[float] = None,
                     star: Optional[StarMeasureConfig] = None) -> SubatomisticFit:
    """
    Rotations per k-square of y extended by the identity off U, after curl repair.

    The extension v carries the cracks of y as jumps, so grad v has a curl concentrated
    on them. Its gradients are first projected onto gradients of continuous fields; the
    rotation of a square is the polar factor of the summed repaired gradients and the
    residual ||G_rep - R||^2 is compared with gamma + eps ||U||_*. Squares below two cells
    fall in the sub-grid regime, where nothing is fitted and the threshold carving takes over.

    :param f: field.
    :param U: GridSet or boolean cell mask.
    :param k: square side.
    :param eps: energy scale.
    :param M: Lipschitz bound for the curl constant, defaults to that of f.
    :param star: star weight for ||U||_*.
    """
    lat = f.lattice
    mask = (U.mask if isinstance(U, GridSet) else np.asarray(U, dtype=bool)) & f.active
    norm = set_norm(U, NormKind.STAR, star) if isinstance(U, GridSet) else 0.0
    gamma = Energies.cell_energy(f, mask)
    budget = gamma + eps * norm
    block = int(round(k / lat.side))
    rotations = np.full(lat.shape + (2, 2), np.nan)
    if block < 2:
        logger.info("k = %.4g spans fewer than two cells; deferring to threshold carving", k)
        return SubatomisticFit(rotations, [], 0.0, 0.0, math.nan, budget, SUBGRID)
    v = identity_extension(f, mask)
    G = np.nan_to_num(v.gradients)
    G_rep = curl_repair(v)
    h2 = lat.side ** 2
    squares, residual, raw, repair = [], 0.0, 0.0, 0.0
    for rect in lat.blocks(block, 4):
        cells = rect.mask(lat.nx, lat.ny)
        if not (cells & mask).any():
            continue
        R = rotation(float(polar_angle(G_rep[cells].sum(axis=0))))
        rotations[rect.slices] = R
        residual += float(np.sum((G_rep[cells] - R) ** 2)) * h2
        raw += gradient_residual(v, rotation(float(polar_angle(G[cells].sum(axis=0)))), cells)
        repair += float(np.sum((G[cells] - G_rep[cells]) ** 2)) * h2
        squares.append(rect)
    defect = Energies.curl_defect(v)
    bound = v.lipschitz_bound if M is None else M
    length = v.jumps.length
    constant = defect.total / (bound * length) if bound > 0 and length > 0 else math.nan
    return SubatomisticFit(rotations, squares, residual, defect.total, constant, budget, RESOLVED, raw, repair)


def crack_spacing_below(W: GridSet, s_cells: int) -> bool:
    """True when two distinct complement components of W come within ``s_cells`` cells of each other."""
    labels = W.component_labels()
    if len(W.components) < 2 or s_cells < 1:
        return False
    size = 2 * s_cells + 1
    top = ndimage.maximum_filter(labels, size=size, mode="constant", cval=-1)
    low = ndimage.minimum_filter(np.where(labels < 0, np.iinfo(np.int64).max, labels), size=size,
                                 mode="constant", cval=np.iinfo(np.int64).max)
    near = (top >= 0) & (low < np.iinfo(np.int64).max)
    return bool(np.any(near & (top != low)))
