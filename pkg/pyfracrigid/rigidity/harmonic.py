"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import logging
import math
from typing import NamedTuple, Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import cg

from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.fields.energies import Energies
from pyfracrigid.utils.errors import HarmonicSolveError

logger = logging.getLogger(__name__)

_STEPS = ((0, 1), (0, -1), (1, 0), (-1, 0))


class HarmonicSplit(NamedTuple):
    w: DeformationField
    z: DeformationField
    residual: float
    iterations: int


def _interior_nodes(region: np.ndarray) -> np.ndarray:
    """Nodes whose four surrounding cells all lie in the region."""
    ny, nx = region.shape
    out = np.zeros((ny + 1, nx + 1), dtype=bool)
    out[1:ny, 1:nx] = region[:-1, :-1] & region[:-1, 1:] & region[1:, :-1] & region[1:, 1:]
    return out


def laplace_system(region: np.ndarray, boundary_values: np.ndarray):
    """
    Five-point Dirichlet system on the interior nodes of a cell region.

    :param region: boolean cell mask.
    :param boundary_values: nodal values (ny+1, nx+1, 2), read on the region's boundary nodes.
    :return: (A, b, unknown) with A = 4 I - adjacency (sparse, SPD), b of shape (n, 2),
        and the boolean node mask of unknowns.
    """
    unknown = _interior_nodes(region)
    n = int(unknown.sum())
    index = np.full(unknown.shape, -1, dtype=np.int64)
    index[unknown] = np.arange(n)
    rows, cols = [], []
    b = np.zeros((n, 2))
    pj, pi = np.nonzero(unknown)
    for dj, di in _STEPS:
        qj, qi = pj + dj, pi + di
        q = index[qj, qi]
        inner = q >= 0
        rows.append(index[pj[inner], pi[inner]])
        cols.append(q[inner])
        outer = ~inner
        np.add.at(b, index[pj[outer], pi[outer]], boundary_values[qj[outer], qi[outer]])
    adjacency = sparse.csr_matrix((np.ones(sum(r.size for r in rows)), (np.concatenate(rows), np.concatenate(cols))),
                                  shape=(n, n))
    A = (4.0 * sparse.identity(n, format="csr") - adjacency).tocsr()
    return A, b, unknown


def harmonic_split(f: DeformationField, region: Optional[np.ndarray] = None, rtol: float = 1e-10) -> HarmonicSplit:
    """
    Split y = w + z on a region with w discretely harmonic and w = y on the region boundary.

    Outside the region w = y and z = 0. Every region cell keeps its own corner values at
    boundary nodes, so the Dirichlet data are reproduced exactly.

    :param f: field, jump-free inside the region.
    :param region: cell mask (defaults to the active cells).
    :param rtol: relative residual target of the conjugate-gradient solve.
    :raises ValueError: the region has interior jump edges.
    :raises HarmonicSolveError: the solve missed rtol within 10 n iterations.
    """
    region = f.active if region is None else np.asarray(region, dtype=bool) & f.active
    if not f.jumps.interior_to(region).is_empty:
        raise ValueError("harmonic_split requires a region without interior jumps")
    nodal = f.restricted(region).nodal_values()
    A, b, unknown = laplace_system(region, np.nan_to_num(nodal))
    n = A.shape[0]
    w_nodes = nodal.copy()
    residual, iterations = 0.0, 0
    if n:
        for comp in range(2):
            counter = [0]

            def count(_):
                counter[0] += 1

            rhs = b[:, comp]
            x, info = cg(A, rhs, x0=nodal[unknown][:, comp], rtol=rtol, atol=0.0, maxiter=10 * n, callback=count)
            norm_b = float(np.linalg.norm(rhs))
            res = float(np.linalg.norm(rhs - A @ x)) / norm_b if norm_b > 0 else float(np.linalg.norm(A @ x))
            iterations = max(iterations, counter[0])
            residual = max(residual, res)
            if info != 0 and res > rtol:
                raise HarmonicSolveError(res, counter[0])
            w_nodes[unknown, comp] = x
    ny, nx = f.shape
    corners = np.array(f.corners)
    for dy in (0, 1):
        for dx in (0, 1):
            sel = region & unknown[dy:dy + ny, dx:dx + nx]
            corners[:, :, dy, dx, :][sel] = w_nodes[dy:dy + ny, dx:dx + nx, :][sel]
    w = f.with_corners(corners)
    z = f.with_corners(np.where(f.active[:, :, None, None, None], f.corners - corners, np.nan))
    logger.debug("harmonic split: %d unknowns, residual %.3e after %d iterations", n, residual, iterations)
    return HarmonicSplit(w, z, residual, iterations)


def harmonic_ratio(f: DeformationField, split: HarmonicSplit, region: Optional[np.ndarray] = None) -> float:
    """||grad z||_{L^2} / ||dist(grad y, SO(2))||_{L^2} over the region (NaN for a rigid field)."""
    mask = f.active if region is None else np.asarray(region, dtype=bool) & f.active
    G = split.z.gradients[mask]
    num = float(np.sum(G * G)) * f.h ** 2
    den = Energies.cell_energy(f, mask)
    if den <= 0:
        return math.nan if num <= 1e-30 else math.inf
    return math.sqrt(num / den)
