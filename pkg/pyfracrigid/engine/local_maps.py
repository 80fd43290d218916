"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from pyfracrigid.engine.carving import block_components
from pyfracrigid.engine.config import EngineConfig
from pyfracrigid.engine.pou import healable, shift_weights
from pyfracrigid.enums.Kinematics import Kinematics
from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.fields.matrices import polar_angle, rotation, skew
from pyfracrigid.grid.grid_set import GridSet, extract_components
from pyfracrigid.grid.lattice import cells_per_length
from pyfracrigid.rigidity.fits import infinitesimal_projection
from pyfracrigid.utils.utils import Utils

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LocalMotionMaps:
    """
    Rigid (or infinitesimal rigid) motions constant on the components of the
    lambda-squares of each shift, stored per cell.

    ``matrices[i]`` holds R (NONLINEAR) or A (LINEAR) and ``translations[i]`` holds c
    for shift i+1; both are NaN on cells not covered by that shift.
    """
    matrices: List[np.ndarray]
    translations: List[np.ndarray]
    covered: List[np.ndarray]
    block: int
    kinematics: Kinematics
    U: GridSet
    U_J: np.ndarray
    dropped: int
    metrics: Dict[str, float] = field(default_factory=dict)

    def evaluate(self, shift_index: int, points: np.ndarray) -> np.ndarray:
        """M x + c of shift ``shift_index`` (0-based) at per-cell points shaped (ny, nx, ..., 2)."""
        M = self.matrices[shift_index]
        c = self.translations[shift_index]
        extra = points.ndim - 3
        Mx = M.reshape(M.shape[:2] + (1,) * extra + (2, 2))
        cx = c.reshape(c.shape[:2] + (1,) * extra + (2,))
        return np.einsum("...ab,...b->...a", Mx, points) + cx


def local_rigid_motion_map(f: DeformationField, W: GridSet, lam: float, m: float, cfg: EngineConfig,
                           rotation_maps: Optional[List[np.ndarray]] = None,
                           kinematics: Kinematics = Kinematics.NONLINEAR) -> LocalMotionMaps:
    """
    Korn-Poincare step on every component of the lambda-squares of the four shifts.

    Per component F with enough coverage, the rotation R^ (polar factor of the shift-4
    rotation map summed over F) is factored out, R^T y - x is projected onto
    infinitesimal rigid motions A x + c' over the enlarged 3 lambda-square, and
    R^ (Id + A) is rounded to the rotation R^ Rot(atan2(-a, 1)) with c = R^ c'. In LINEAR
    kinematics the displacement is projected directly and no rounding takes place.

    A component is dropped when |F| < coverage_c m |Q n lattice|.

    :param f: field (a displacement in LINEAR kinematics).
    :param W: current grid set.
    :param lam: lambda-square side.
    :param m: coarsening ratio of the coverage rule.
    :param cfg: engine configuration.
    :param rotation_maps: the four maps of the rotation step (NONLINEAR only).
    :param kinematics: NONLINEAR or LINEAR.
    :return: LocalMotionMaps with U the cells that can be healed.
    """
    lat = f.lattice
    block = cells_per_length(lat, lam)
    region = W.mask & f.active
    X = lat.corner_coords()
    C = f.corners
    G = np.nan_to_num(f.gradients)
    h2 = lat.side ** 2
    ref = rotation_maps[3] if rotation_maps is not None else None

    def fit_shift(shift: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, int]:
        M_map = np.full(lat.shape + (2, 2), np.nan)
        c_map = np.full(lat.shape + (2,), np.nan)
        cov = np.zeros(lat.shape, dtype=bool)
        low = 0
        for rect in lat.blocks(block, shift):
            need = cfg.coverage_c * m * rect.nx * rect.ny
            for F, F_hat, win in block_components(region, rect, block):
                if F.sum() < need:
                    low += 1
                    continue
                pts = X[win.slices][F_hat].reshape(-1, 2)
                vals = C[win.slices][F_hat].reshape(-1, 2)
                w = np.full(pts.shape[0], h2 / 4.0)
                if kinematics == Kinematics.LINEAR:
                    p = infinitesimal_projection(pts, vals, w)
                    M, c = skew(p.a), np.asarray(p.c)
                else:
                    R_hat = None
                    if ref is not None:
                        Rs = ref[win.slices][F]
                        Rs = Rs[np.all(np.isfinite(Rs), axis=(-2, -1))]
                        if Rs.shape[0]:
                            R_hat = rotation(float(polar_angle(Rs.sum(axis=0))))
                    if R_hat is None:
                        R_hat = rotation(float(polar_angle(G[win.slices][F_hat].sum(axis=0))))
                    v = vals @ R_hat - pts
                    p = infinitesimal_projection(pts, v, w)
                    M = R_hat @ rotation(math.atan2(-p.a, 1.0))
                    c = R_hat @ np.asarray(p.c)
                M_map[win.slices][F] = M
                c_map[win.slices][F] = c
                cov[win.slices] |= F
        return M_map, c_map, cov, low

    fitted = Utils.ordered_map(fit_shift, (1, 2, 3, 4), cfg.threads)
    matrices = [r[0] for r in fitted]
    translations = [r[1] for r in fitted]
    covered = [r[2] for r in fitted]
    dropped = sum(r[3] for r in fitted)
    U_cells = region & healable(covered, shift_weights(lat, block))
    U_J = np.logical_or.reduce(covered)
    maps = LocalMotionMaps(matrices, translations, covered, block, kinematics,
                           extract_components(U_cells, lat), U_J, dropped)
    metrics = _metrics(f, maps, ref, region)
    if dropped:
        logger.info("%d lambda-square components below the coverage threshold were dropped", dropped)
    return dataclasses.replace(maps, metrics=metrics)


def _metrics(f: DeformationField, maps: LocalMotionMaps, ref, region) -> Dict[str, float]:
    h2 = f.h ** 2
    X = f.lattice.corner_coords()
    rot_dev = motion = grad = 0.0
    for idx, cov in enumerate(maps.covered):
        M = maps.matrices[idx]
        if ref is not None:
            d = np.sum((M - ref) ** 2, axis=(-2, -1))
            ok = cov & np.isfinite(d)
            rot_dev += float(np.sum(d[ok])) * h2
        elif maps.kinematics == Kinematics.LINEAR:
            rot_dev += float(np.sum(np.sum(M[cov] ** 2, axis=(-2, -1)))) * h2
        diff = f.corners - maps.evaluate(idx, X)
        e = np.sum(diff * diff, axis=-1).sum(axis=(-2, -1)) * h2 / 4.0
        motion += float(np.sum(e[cov]))
        g = np.sum((f.gradients - M) ** 2, axis=(-2, -1))
        grad += float(np.sum(g[cov])) * h2
    uncovered = float(np.sum(region & ~maps.U_J)) * h2
    return {"rotation_deviation": rot_dev, "motion_l2": motion, "gradient_l2": grad,
            "uncovered_area": uncovered, "dropped": float(maps.dropped)}
