"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Sequence, Tuple

import numpy as np

from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.fields.energies import Energies
from pyfracrigid.grid.grid_set import GridSet, label_components
from pyfracrigid.grid.lattice import CellRect, WorldRect, cells_per_length
from pyfracrigid.rigidity.fits import RigidMotion, best_fit_rotation, gradient_residual

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ChainComponent:
    """Rotations of the k-squares of one chain-connected component."""
    squares: List[CellRect]
    rotations: List[np.ndarray]
    parents: List[int]           # breadth-first tree, -1 at the root
    rotation: np.ndarray         # R(p0) of the root square
    cells: np.ndarray
    numerator: float             # ||grad y - R(p0)||^2 on the squares
    denominator: float           # ||dist(grad y, SO(2))||^2 on the squares
    best_numerator: float        # same with the best single rotation
    link_constant: float         # max over tree links of k^2 |R(a) - R(b)|^2 / (gamma(a) + gamma(b))
    exact_rigid: bool

    @property
    def ratio(self) -> float:
        if self.exact_rigid:
            return 0.0
        if self.denominator > 0:
            return self.numerator / self.denominator
        return math.inf

    @property
    def best_ratio(self) -> float:
        if self.exact_rigid:
            return 0.0
        if self.denominator > 0:
            return self.best_numerator / self.denominator
        return math.inf


@dataclass(frozen=True, eq=False)
class ChainRotationField:
    k: float
    components: List[ChainComponent]

    @property
    def predicted(self) -> List[float]:
        """(k^-2 |U|)^2 per component, the scale the ratios are compared with."""
        return [float(len(c.squares)) ** 2 for c in self.components]

    def rotation_map(self, shape) -> np.ndarray:
        """Per-cell rotation (ny, nx, 2, 2), NaN off the squares."""
        out = np.full(shape + (2, 2), np.nan)
        for comp in self.components:
            for rect, R in zip(comp.squares, comp.rotations):
                out[rect.slices] = R
        return out


def _squares(mask: np.ndarray, block: int, lattice) -> Dict[Tuple[int, int], CellRect]:
    bi, bj = lattice.block_index(block, 4)
    out = {}
    for rect in lattice.blocks(block, 4):
        if rect.nx == block and rect.ny == block and mask[rect.slices].all():
            out[(int(bj[rect.j0]), int(bi[rect.i0]))] = rect
    return out


def chain_rotation_field(f: DeformationField, U, k: float, tol: float = 1e-24) -> ChainRotationField:
    """
    Best-fit rotations on the k-squares inside U chained breadth-first from a root square.

    Squares sharing a side are linked; each connected family of squares is one
    component with its own root (the first square in raster order).

    :param f: field.
    :param U: GridSet or boolean cell mask.
    :param k: square side, a multiple of the cell side.
    :param tol: energies below this count as zero for the exact-rigid flag.
    :return: ChainRotationField
    """
    mask = U.mask if isinstance(U, GridSet) else np.asarray(U, dtype=bool)
    mask = mask & f.active
    block = cells_per_length(f.lattice, k)
    squares = _squares(mask, block, f.lattice)
    gamma = {key: Energies.cell_energy(f, rect.mask(f.lattice.nx, f.lattice.ny)) for key, rect in squares.items()}
    rots = {key: best_fit_rotation(f, rect.mask(f.lattice.nx, f.lattice.ny)).R for key, rect in squares.items()}
    seen = set()
    components = []
    for root in sorted(squares):
        if root in seen:
            continue
        order, parents = [root], {root: None}
        seen.add(root)
        queue = deque([root])
        while queue:
            a = queue.popleft()
            for d in ((0, 1), (1, 0), (0, -1), (-1, 0)):
                b = (a[0] + d[0], a[1] + d[1])
                if b in squares and b not in seen:
                    seen.add(b)
                    parents[b] = a
                    order.append(b)
                    queue.append(b)
        pos = {key: n for n, key in enumerate(order)}
        cells = np.zeros(f.shape, dtype=bool)
        for key in order:
            cells[squares[key].slices] = True
        R0 = rots[root]
        num = gradient_residual(f, R0, cells)
        den = Energies.cell_energy(f, cells)
        best = gradient_residual(f, best_fit_rotation(f, cells).R, cells)
        link = 0.0
        for key in order[1:]:
            p = parents[key]
            jump = k ** 2 * float(np.sum((rots[key] - rots[p]) ** 2))
            g = gamma[key] + gamma[p]
            if g > tol:
                link = max(link, jump / g)
            elif jump > tol:
                link = math.inf
        components.append(ChainComponent(
            [squares[key] for key in order], [rots[key] for key in order],
            [-1 if parents[key] is None else pos[parents[key]] for key in order],
            R0, cells, num, den, best, link, num <= tol and den <= tol))
    n_mask, _ = label_components(mask)
    if n_mask > len(components):
        logger.debug("chain_rotation_field: %d mask components, %d square components", n_mask, len(components))
    return ChainRotationField(k, components)


class ChainDeviation(NamedTuple):
    lhs: float
    rhs: float
    kappa: float
    links: int
    link_deviations: List[float]
    total_angle: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12) + 1e-300


def affine_l2_sq(M: np.ndarray, v: np.ndarray, rect: WorldRect) -> float:
    """Exact integral of |M x + v|^2 over a rectangle."""
    A = rect.area
    ctr = rect.center
    S1 = A * ctr
    S2 = A * (np.outer(ctr, ctr) + np.diag([rect.width ** 2 / 12.0, rect.height ** 2 / 12.0]))
    return float(np.trace(M.T @ M @ S2) + 2.0 * v @ M @ S1 + A * v @ v)


def motion_gap(a, b, rect: WorldRect) -> float:
    """||(R_a x + c_a) - (R_b x + c_b)||^2 on rect."""
    Ma = a.R if isinstance(a, RigidMotion) else a.A
    Mb = b.R if isinstance(b, RigidMotion) else b.A
    return affine_l2_sq(Ma - Mb, np.asarray(a.c) - np.asarray(b.c), rect)


def _relative_angle(a: RigidMotion, b: RigidMotion) -> float:
    Q = b.R @ a.R.T
    return math.atan2(Q[1, 0], Q[0, 0])


def rigid_chain_propagate(motions: Sequence[RigidMotion], path: Sequence[WorldRect]) -> ChainDeviation:
    """
    Deviation of the last rigid motion of a chain from the first, on the first rectangle.

    Link i compares motions i and i+1 on the overlap of rectangles i and i+1. The bound
    is kappa m^3 sum e_i^2 with m the number of links and kappa the largest ratio
    |H| / |B_i n B_{i+1}| * (diam H / min side of B_i n B_{i+1})^2, H being the bounding box
    of the path.

    :raises ValueError: consecutive rectangles without interior overlap.
    """
    if len(motions) != len(path) or not motions:
        raise ValueError("One rectangle per motion is required")
    hull = WorldRect(min(r.x0 for r in path), min(r.y0 for r in path),
                     max(r.x1 for r in path), max(r.y1 for r in path))
    diam = math.hypot(hull.width, hull.height)
    deviations, kappa = [], 0.0
    for i in range(len(path) - 1):
        overlap = path[i].intersection(path[i + 1])
        if overlap is None:
            raise ValueError(f"Rectangles {i} and {i + 1} do not overlap")
        deviations.append(motion_gap(motions[i], motions[i + 1], overlap))
        side = min(overlap.width, overlap.height)
        kappa = max(kappa, hull.area / overlap.area * (diam / side) ** 2)
    m = len(deviations)
    lhs = motion_gap(motions[-1], motions[0], path[0])
    rhs = kappa * m ** 3 * float(np.sum(deviations)) if m else 0.0
    total = float(sum(_relative_angle(a, b) for a, b in zip(motions[:-1], motions[1:])))
    return ChainDeviation(lhs, rhs, kappa, m, deviations, total)
