"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import logging
import math
from typing import List, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy import ndimage

from pyfracrigid.enums.NormKind import NormKind
from pyfracrigid.grid.edges import EdgeSet
from pyfracrigid.grid.grid_set import (BoundaryComponent, GridSet, StarMeasureConfig, is_connected,
                                       label_components, make_component, measure_infty, measure_star,
                                       set_norm)
from pyfracrigid.grid.lattice import CellRect, Lattice, WorldRect
from pyfracrigid.utils.errors import HullPreconditionError

logger = logging.getLogger(__name__)

_EIGHT = np.ones((3, 3), dtype=bool)


def fill_holes(W: GridSet, threshold: float) -> GridSet:
    """
    H^lambda(W): absorb every interior component with |Gamma|_inf <= threshold.

    :param W: grid set.
    :param threshold: lambda >= 0, ``math.inf`` yields H(W).
    :return: GridSet
    """
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    mask = W.mask.copy()
    kept = []
    for c in W.components:
        if c.interior and measure_infty(c) <= threshold:
            mask |= c.cells
        else:
            kept.append(c.cells)
    if len(kept) == len(W.components):
        return W
    return GridSet.build(W.lattice, mask, kept, list(range(len(kept))), W.refinements, validate=False)


def rectangle_hull(c: BoundaryComponent, target: Lattice) -> CellRect:
    """
    Smallest cell-aligned rectangle of ``target`` containing Gamma.

    :param c: component, on a lattice sharing the lower-left corner with target.
    :param target: lattice whose cells the rectangle is made of.
    :return: CellRect on target.
    """
    x0, x1, y0, y1 = c.gamma.node_extents()
    length = c.gamma.length
    ll = target.lower_left
    rect = WorldRect(ll[0] + x0 * length, ll[1] + y0 * length, ll[0] + x1 * length, ll[1] + y1 * length)
    return target.snap_outward(rect)


def rect_component(rect: CellRect, lattice: Lattice) -> BoundaryComponent:
    """Standalone component made of the cells of ``rect``."""
    return make_component(rect.mask(lattice.nx, lattice.ny), lattice.side)


def union_star_bound(V: CellRect, c: BoundaryComponent, lattice: Lattice, cfg: StarMeasureConfig):
    """
    Both sides of |d(V u X)|_* <= |dV|_* + |Gamma|_* for a rectangle V meeting X.

    :return: (lhs, rhs)
    """
    rect = rect_component(V, lattice)
    union = make_component(rect.cells | c.cells, lattice.side)
    return measure_star(union, cfg), measure_star(rect, cfg) + measure_star(c.standalone(), cfg)


def _as_cells(W: GridSet, V) -> np.ndarray:
    lat = W.lattice
    if isinstance(V, CellRect):
        return V.mask(lat.nx, lat.ny)
    if isinstance(V, WorldRect):
        return lat.to_cell_rect(V).mask(lat.nx, lat.ny)
    cells = np.asarray(V)
    if cells.shape != lat.shape or cells.dtype != bool:
        raise ValueError("V must be a boolean cell mask on the lattice of W or a cell-aligned rectangle")
    return cells


def subtract_and_mark(W: GridSet, V: Union[np.ndarray, CellRect, WorldRect]) -> GridSet:
    """
    (W minus V) with V recorded as a new complement component placed first.

    :param W: grid set.
    :param V: cell set, cell rectangle, or cell-aligned world rectangle.
    :return: GridSet whose components are V followed by X_i minus V in the old order.
    """
    cells = _as_cells(W, V)
    if not cells.any():
        return W
    sets = [cells]
    for c in W.components:
        rest = c.cells & ~cells
        if rest.any():
            sets.append(rest)
    comps = [make_component(s, W.lattice.side) for s in sets]
    order = [k for k in range(len(sets)) if comps[k].interior] + [k for k in range(len(sets)) if not comps[k].interior]
    return GridSet.build(W.lattice, W.mask & ~cells, sets, order, W.refinements, validate=False)


def _bbox(cells):
    js, is_ = np.nonzero(cells)
    return js.min(), js.max(), is_.min(), is_.max()


def _touching(a, b, box_a, box_b) -> bool:
    if box_a[0] > box_b[1] + 1 or box_b[0] > box_a[1] + 1 or box_a[2] > box_b[3] + 1 or box_b[2] > box_a[3] + 1:
        return False
    j0 = max(min(box_a[0], box_b[0]) - 1, 0)
    j1 = max(box_a[1], box_b[1]) + 2
    i0 = max(min(box_a[2], box_b[2]) - 1, 0)
    i1 = max(box_a[3], box_b[3]) + 2
    grown = ndimage.binary_dilation(a[j0:j1, i0:i1], structure=_EIGHT)
    return bool((grown & b[j0:j1, i0:i1]).any())


def _size(cells, length):
    if _border(cells):
        return math.inf
    return measure_infty(make_component(cells, length))


def _merge_pass(sets: List[np.ndarray], length: float, k: float, both: bool) -> List[np.ndarray]:
    sets = list(sets)
    sizes = [_size(s, length) for s in sets]
    boxes = [_bbox(s) for s in sets]
    while True:
        found = None
        for a in range(len(sets)):
            for b in range(a + 1, len(sets)):
                small = (sizes[a] <= k and sizes[b] <= k) if both else min(sizes[a], sizes[b]) <= k
                if small and _touching(sets[a], sets[b], boxes[a], boxes[b]):
                    found = (a, b)
                    break
            if found:
                break
        if found is None:
            return sets
        a, b = found
        sets[a] = sets[a] | sets[b]
        sizes[a] = _size(sets[a], length)
        boxes[a] = _bbox(sets[a])
        del sets[b], sizes[b], boxes[b]


def _border(cells):
    return bool(cells[0, :].any() or cells[-1, :].any() or cells[:, 0].any() or cells[:, -1].any())


def merge_small_components(W: GridSet, k: float, t: Optional[float] = None, part: str = "ii",
                           cfg: Optional[StarMeasureConfig] = None) -> GridSet:
    """
    Combine touching complement components until no small component touches another.

    Two components touch when their closures intersect. Part "i" merges pairs of
    interior components both of size |Gamma|_inf <= k, part "ii" additionally merges
    any touching pair whose smaller member has size <= k (boundary-touching
    components count as large).

    :param W: grid set in V^s_t (every interior component has projections <= 2t).
    :param k: size threshold.
    :param t: class parameter; None skips the class check.
    :param part: "i" or "ii".
    :param cfg: star weight for the norm assertion.
    :return: GridSet with ||U||_* <= ||W||_*.
    """
    if part not in ("i", "ii"):
        raise ValueError("part must be 'i' or 'ii'")
    if t is not None and W.max_projection() > 2 * t * (1 + 1e-12):
        raise ValueError(f"Grid set is not in the class with t={t}: max projection {W.max_projection()}")
    sets = [c.cells for c in W.components]
    merged = _merge_pass(sets, W.lattice.side, k, both=True)
    if part == "ii":
        merged = _merge_pass(merged, W.lattice.side, k, both=False)
    if len(merged) == len(sets):
        return W
    U = GridSet.build(W.lattice, W.mask, merged, None, W.refinements, validate=False)
    before = set_norm(W, NormKind.STAR, cfg)
    after = set_norm(U, NormKind.STAR, cfg)
    if after > before * (1 + 1e-12) + 1e-15:
        raise AssertionError(f"merging increased the star norm: {before} -> {after}")
    if t is not None and part == "ii" and U.max_projection() > 2 * (t + k) * (1 + 1e-12):
        logger.warning("merged set leaves the class with t + k: %.6g", U.max_projection())
    logger.debug("merged %d components into %d", len(sets), len(merged))
    return U


class RectangleizeResult(NamedTuple):
    grid_set: GridSet
    constant: float
    norm_before: float
    norm_after: float


def rectangleize(V: GridSet, hulls: Sequence[CellRect], nu: float,
                 cfg: Optional[StarMeasureConfig] = None) -> RectangleizeResult:
    """
    Replace the interior components of V by disjoint connected pieces of given hulls.

    Hulls are claimed from the smallest to the largest; each component becomes the
    part of its hull not claimed before, split into connected pieces.

    :param V: grid set.
    :param hulls: one rectangle per interior component, in ordering order.
    :param nu: projection slack of the hulls.
    :param cfg: star weight.
    :return: RectangleizeResult with the measured c of ||U||_* <= (1 + c nu) ||V||_*.
    """
    cfg = cfg or StarMeasureConfig()
    lat = V.lattice
    interior = V.interior_components
    if len(hulls) != len(interior):
        raise ValueError(f"Expected {len(interior)} hulls, got {len(hulls)}")
    if nu < 0:
        raise ValueError("nu must be non-negative")
    zs = [h.mask(lat.nx, lat.ny) for h in hulls]
    for j, (c, z, h) in enumerate(zip(interior, zs, hulls)):
        if not h.contains_cells(c.cells):
            raise HullPreconditionError((j, j), f"Hull {j} does not contain its component")
        hz = make_component(z, lat.side)
        px, py = c.projections()
        qx, qy = hz.projections()
        slack = nu * measure_infty(c) + 1e-12 * lat.side
        if qx > px + slack or qy > py + slack:
            raise HullPreconditionError((j, j), f"Hull {j} exceeds the projection bound")
    for a in range(len(zs)):
        for b in range(a + 1, len(zs)):
            if not (is_connected(zs[a] & ~zs[b]) or is_connected(zs[b] & ~zs[a])):
                raise HullPreconditionError((a, b), f"Hulls {a} and {b}: neither difference is connected")
    claimed = np.zeros(lat.shape, dtype=bool)
    pieces = []
    for j in sorted(range(len(zs)), key=lambda q: (int(zs[q].sum()), q)):
        rest = zs[j] & ~claimed
        claimed |= zs[j]
        n, labels = label_components(rest)
        pieces.extend(labels == q for q in range(1, n + 1))
    for c in V.boundary_components:
        rest = c.cells & ~claimed
        if rest.any():
            pieces.append(rest)
    U = GridSet.build(lat, V.mask & ~claimed, pieces, None, V.refinements, validate=False)
    before = set_norm(V, NormKind.STAR, cfg)
    after = set_norm(U, NormKind.STAR, cfg)
    if before > 0 and nu > 0:
        constant = (after / before - 1.0) / nu
    else:
        constant = 0.0 if after <= before else math.inf
    return RectangleizeResult(U, constant, before, after)


def perimeter(cells: np.ndarray, ambient: GridSet) -> float:
    """
    Length of the edges separating ``cells`` from the rest of the ambient region.

    :param cells: boolean cell mask.
    :param ambient: grid set whose mask is the ambient region.
    :return: P(cells, ambient).
    """
    return perimeter_count(cells, ambient.mask) * ambient.lattice.side


def perimeter_count(cells: np.ndarray, ambient_mask: np.ndarray) -> int:
    cells = np.asarray(cells, dtype=bool)
    other = ambient_mask & ~cells
    v = (cells[:, 1:] & other[:, :-1]) | (cells[:, :-1] & other[:, 1:])
    h = (cells[1:, :] & other[:-1, :]) | (cells[:-1, :] & other[1:, :])
    return int(v.sum() + h.sum())


def refine_grid_set(W: GridSet, factor: int = 2) -> GridSet:
    """Same geometric set on a lattice refined ``factor`` times; components keep ids and order."""
    lat = W.lattice.refined(factor)
    up = lambda a: np.kron(a, np.ones((factor, factor), dtype=bool)).astype(bool)
    return GridSet.build(lat, up(W.mask), [up(s) for s in W.cell_sets()], W.ordering,
                         W.refinements + 1, validate=False)
