"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import ndimage

from pyfracrigid.engine.config import EngineConfig
from pyfracrigid.enums.Kinematics import Kinematics
from pyfracrigid.enums.NormKind import NormKind
from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.fields.energies import Energies
from pyfracrigid.fields.matrices import polar_angle, rotation
from pyfracrigid.grid.grid_set import (GridSet, StarMeasureConfig, label_components, make_component, measure_star,
                                       set_norm)
from pyfracrigid.grid.lattice import CellRect, cells_per_length
from pyfracrigid.grid.set_calculus import merge_small_components, rect_component, rectangle_hull, rectangleize
from pyfracrigid.utils.errors import BudgetViolation, HullPreconditionError
from pyfracrigid.utils.utils import Utils

logger = logging.getLogger(__name__)

_EIGHT = np.ones((3, 3), dtype=bool)


def energy_density(f: DeformationField, kinematics: Kinematics = Kinematics.NONLINEAR) -> np.ndarray:
    if kinematics == Kinematics.LINEAR:
        return Energies.linear_density(f)
    return Energies.density(f)


class CarveResult(NamedTuple):
    grid_set: GridSet
    squares: List[CellRect]
    energies: List[float]
    gamma: float
    budget_lhs: float
    budget_rhs: float


def carve_squares(W: GridSet, rects: List[CellRect]) -> GridSet:
    """
    Remove disjoint squares from W, each recorded as its own complement component.

    Old components lose the carved cells and are split into their connected pieces.
    """
    if not rects:
        return W
    lat = W.lattice
    carved = np.zeros(lat.shape, dtype=bool)
    sets = []
    for r in rects:
        m = r.mask(lat.nx, lat.ny)
        carved |= m
        sets.append(m)
    for c in W.components:
        rest = c.cells & ~carved
        n, labels = label_components(rest)
        sets.extend(labels == q for q in range(1, n + 1))
    comps = [make_component(s, lat.side) for s in sets]
    order = ([q for q in range(len(sets)) if comps[q].interior]
             + [q for q in range(len(sets)) if not comps[q].interior])
    return GridSet.build(lat, W.mask & ~carved, sets, order, W.refinements, validate=False)


def threshold_carve(f: DeformationField, W: GridSet, k: float, eps: float,
                    cfg: Optional[StarMeasureConfig] = None,
                    kinematics: Kinematics = Kinematics.NONLINEAR) -> CarveResult:
    """
    Carve every k-square whose energy on the square's part of W exceeds eps * k.

    The carved boundary obeys sum |dQ|_* <= 8 gamma / eps, gamma being the energy on W.

    :param f: field.
    :param W: grid set on the field lattice.
    :param k: square side, a multiple of the cell side.
    :param eps: energy threshold per unit length.
    :param cfg: star weight.
    :param kinematics: NONLINEAR uses dist^2(grad y, SO(2)), LINEAR |e(grad u)|^2.
    :return: CarveResult
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    cfg = cfg or StarMeasureConfig()
    lat = W.lattice
    block = cells_per_length(lat, k)
    region = W.mask & f.active
    dens = np.where(region, energy_density(f, kinematics), 0.0) * lat.side ** 2
    gamma = float(np.sum(dens))
    rects, energies = [], []
    for rect in lat.blocks(block, 4):
        e = float(np.sum(dens[rect.slices]))
        if e > eps * k:
            rects.append(rect)
            energies.append(e)
            logger.debug("carving square %s with energy %.6g", rect, e)
    lhs = float(sum(measure_star(rect_component(r, lat), cfg) for r in rects))
    rhs = 8.0 * gamma / eps
    if lhs > rhs * (1 + 1e-12):
        raise BudgetViolation(None, "sum |dQ|_* <= 8 gamma / eps", lhs, rhs)
    return CarveResult(carve_squares(W, rects), rects, energies, gamma, lhs, rhs)


def block_components(mask: np.ndarray, rect: CellRect, grow: int) -> Iterator[Tuple[np.ndarray, np.ndarray, CellRect]]:
    """
    Connected components F of rect n mask together with their enlargement.

    The enlargement dilates F by ``grow`` cells (Chebyshev distance) inside the mask and
    keeps the connected part containing F. Both masks are given on the window ``rect``
    grown by ``grow`` and clipped to the lattice.

    :return: iterator of (F, F_hat, window)
    """
    ny, nx = mask.shape
    win = rect.grown(grow).clipped(nx, ny)
    sub = mask[win.slices]
    n, labels = label_components(mask[rect.slices])
    oj, oi = rect.j0 - win.j0, rect.i0 - win.i0
    for q in range(1, n + 1):
        F = np.zeros(sub.shape, dtype=bool)
        F[oj:oj + rect.ny, oi:oi + rect.nx] = labels == q
        if grow > 0:
            grown = ndimage.binary_dilation(F, structure=_EIGHT, iterations=grow) & sub
            _, lab2 = label_components(grown)
            F_hat = lab2 == lab2[F][0]
        else:
            F_hat = F
        yield F, F_hat, win


@dataclass(frozen=True, eq=False)
class RotationMaps:
    """Per-cell rotations of the four shifted k-lattices (NaN where no fit exists)."""
    grid_set: GridSet
    maps: List[np.ndarray]
    carve: CarveResult
    rectangleize_constant: float
    rectangleized: bool
    flagged: int
    metrics: Dict[str, float] = field(default_factory=dict)


def piecewise_rotation_map(f: DeformationField, W: GridSet, k: float, m: float, eps: float, s: float,
                           cfg: EngineConfig, fit_field: Optional[DeformationField] = None,
                           kinematics: Kinematics = Kinematics.NONLINEAR) -> RotationMaps:
    """
    Carve, regularise and fit piecewise constant rotations on the four shifted k-lattices.

    The set W' is obtained from W by energy-threshold carving at c_* eps, replacing the
    interior components by their bounding rectangles and merging small touching
    components. On W', every component F of a k-square is fitted on its enlargement
    (dilation by s) so that a fit never crosses a crack.

    :param f: field whose energy drives the carving.
    :param W: current grid set.
    :param k: carving square side.
    :param m: coarsening ratio, enters the reported bounds only.
    :param eps: energy scale of the step.
    :param s: current lattice scale.
    :param cfg: engine configuration.
    :param fit_field: field the rotations are fitted on (the harmonic part), defaults to f.
    :param kinematics: LINEAR skips the fits and returns identity maps.
    :return: RotationMaps
    """
    g = f if fit_field is None else fit_field
    lat = W.lattice
    carve = threshold_carve(f, W, k, cfg.threshold_c * eps, cfg.star, kinematics)
    W1 = carve.grid_set
    constant, rectangleized = 0.0, False
    if W1.interior_components:
        hulls = [rectangle_hull(c, lat) for c in W1.interior_components]
        try:
            res = rectangleize(W1, hulls, 0.0, cfg.star)
            W1, constant, rectangleized = res.grid_set, res.constant, True
        except HullPreconditionError as e:
            logger.info("rectangleization skipped: %s (pair %s)", e, e.pair)
    W2 = merge_small_components(W1, k, part="ii", cfg=cfg.star)
    region = W2.mask & f.active
    block = cells_per_length(lat, k)
    grow = max(0, int(round(s / lat.side)))
    G = np.nan_to_num(g.gradients)

    def fit_shift(shift: int) -> Tuple[np.ndarray, int]:
        R = np.full(lat.shape + (2, 2), np.nan)
        if kinematics == Kinematics.LINEAR:
            R[region] = np.eye(2)
            return R, 0
        bad = 0
        for rect in lat.blocks(block, shift):
            for F, F_hat, win in block_components(region, rect, grow):
                M = np.sum(G[win.slices][F_hat], axis=0)
                if not np.all(np.isfinite(M)) or not F_hat.any():
                    bad += 1
                    continue
                R[win.slices][F] = rotation(float(polar_angle(M)))
        return R, bad

    fitted = Utils.ordered_map(fit_shift, (1, 2, 3, 4), cfg.threads)
    maps = [R for R, _ in fitted]
    flagged = sum(bad for _, bad in fitted)
    density = np.where(region, energy_density(f, kinematics), 0.0)
    h2 = lat.side ** 2
    gamma = float(np.sum(density)) * h2
    delta2 = delta4 = 0.0
    Gf = f.gradients
    for R in maps:
        n = np.linalg.norm(Gf - R, axis=(-2, -1))
        ok = region & np.isfinite(n)
        delta2 += float(np.sum(n[ok] ** 2)) * h2
        delta4 += float(np.sum(n[ok] ** 4)) * h2
    l = k / s
    metrics = {
        "gamma": gamma,
        "delta2": delta2,
        "delta4": delta4,
        "ratio2": delta2 / gamma if gamma > 0 else (0.0 if delta2 == 0 else math.inf),
        "ratio4": delta4 / gamma if gamma > 0 else (0.0 if delta4 == 0 else math.inf),
        "l4": l ** 4,
        "vartheta": l ** 9 * cfg.C_m(m) ** 2 * eps / s,
        "star_norm": set_norm(W2, NormKind.STAR, cfg.star),
    }
    if flagged:
        logger.warning("%d components without usable gradients were excluded from the rotation fits", flagged)
    return RotationMaps(W2, maps, carve, constant, rectangleized, flagged, metrics)
