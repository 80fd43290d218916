"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import cv2
import numpy as np

from pyfracrigid.enums.NormKind import NormKind
from pyfracrigid.grid.edges import EdgeSet
from pyfracrigid.grid.lattice import Lattice
from pyfracrigid.utils.errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StarMeasureConfig:
    """Weight h_* of the convex combination |.|_* = h_* |.|_H + (1 - h_*) |.|_inf."""
    h_star: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.h_star < 1.0:
            raise ConfigError(f"h_star must lie in (0, 1), got {self.h_star}")


def label_components(mask: np.ndarray) -> Tuple[int, np.ndarray]:
    """
    4-connected components of a boolean cell mask.

    :param mask: boolean array (ny, nx).
    :return: (count, labels) with labels 0 off the mask and 1..count on it, in raster order.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return 0, np.zeros(mask.shape, dtype=np.int32)
    count, labels = cv2.connectedComponents(mask.astype(np.uint8), connectivity=4)
    return int(count) - 1, labels


def is_connected(cells: np.ndarray) -> bool:
    """True for a 4-connected non-empty cell set (the empty set counts as connected)."""
    n, _ = label_components(cells)
    return n <= 1


def touches_border(cells: np.ndarray) -> bool:
    return bool(cells[0, :].any() or cells[-1, :].any() or cells[:, 0].any() or cells[:, -1].any())


def min_cell(cells: np.ndarray) -> Tuple[int, int]:
    flat = int(np.argmax(cells.ravel()))
    return divmod(flat, cells.shape[1])


@dataclass(frozen=True, eq=False)
class BoundaryComponent:
    """
    One complement component X of a grid set with its boundary Gamma = dX and the
    edges Theta it owns under the ordering of the set.
    """
    index: int
    cells: np.ndarray
    gamma: EdgeSet
    theta: EdgeSet
    interior: bool

    @property
    def area_cells(self) -> int:
        return int(self.cells.sum())

    @property
    def min_cell(self) -> Tuple[int, int]:
        return min_cell(self.cells)

    def projections(self) -> Tuple[float, float]:
        return self.gamma.projections()

    def standalone(self) -> "BoundaryComponent":
        """Copy owning its whole boundary (Theta = Gamma)."""
        return BoundaryComponent(self.index, self.cells, self.gamma, self.gamma, self.interior)


def make_component(cells: np.ndarray, length: float, index: int = 0) -> BoundaryComponent:
    cells = np.array(cells, dtype=bool)
    cells.setflags(write=False)
    gamma = EdgeSet.boundary_of(cells, length)
    return BoundaryComponent(index, cells, gamma, gamma, not touches_border(cells))


def measure_infty(c: BoundaryComponent) -> float:
    """|Gamma|_inf = sqrt(|pi_1 Gamma|^2 + |pi_2 Gamma|^2)."""
    px, py = c.projections()
    return math.hypot(px, py)


def measure_hausdorff(c: BoundaryComponent) -> float:
    return c.theta.measure


def measure_star(c: BoundaryComponent, cfg: StarMeasureConfig) -> float:
    """
    :param c: component whose theta was computed under its owning ordering.
    :param cfg: star weight.
    :return: h_* |Theta|_H + (1 - h_*) |Gamma|_inf.
    """
    return cfg.h_star * measure_hausdorff(c) + (1.0 - cfg.h_star) * measure_infty(c)


def _ordering_key(c: BoundaryComponent):
    if c.interior:
        return 0, -measure_infty(c), c.min_cell
    return 1, 0.0, c.min_cell


@dataclass(frozen=True, eq=False)
class GridSet:
    """
    Union of lattice cells together with an explicit list of complement components.

    ``components`` is stored in ordering order; ``component.index`` is the stable id
    of a component, and Theta is computed along that order. Two grid sets may share
    a mask and differ in their components.
    """
    lattice: Lattice
    mask: np.ndarray
    components: Tuple[BoundaryComponent, ...]
    refinements: int = 0

    @classmethod
    def build(cls, lattice: Lattice, mask: np.ndarray, cell_sets: Sequence[np.ndarray],
              ordering: Optional[Sequence[int]] = None, refinements: int = 0,
              validate: bool = True) -> "GridSet":
        """
        Assemble a grid set from its complement components.

        :param lattice: ambient lattice.
        :param mask: cell mask of the set.
        :param cell_sets: complement components; their position is their id.
        :param ordering: explicit order of ids (interior components first). None
            selects the canonical order: interior by decreasing |Gamma|_inf, then
            by lexicographic minimal cell, boundary-touching ones by minimal cell.
        :param refinements: number of factor-2 refinements applied so far.
        :param validate: check that the components partition the complement.
        :return: GridSet
        """
        mask = np.array(mask, dtype=bool)
        if mask.shape != lattice.shape:
            raise ValueError(f"Mask shape {mask.shape} does not match lattice {lattice.shape}")
        if validate:
            cover = np.zeros(mask.shape, dtype=np.int32)
            for cells in cell_sets:
                if not np.any(cells):
                    raise ValueError("Complement components must be non-empty")
                cover += np.asarray(cells, dtype=np.int32)
            if np.any(cover > 1):
                raise ValueError("Complement components overlap")
            if not np.array_equal(cover == 1, ~mask):
                raise ValueError("Complement components do not cover the mask complement")
        base = [make_component(cells, lattice.side, idx) for idx, cells in enumerate(cell_sets)]
        if ordering is None:
            order = sorted(range(len(base)), key=lambda k: _ordering_key(base[k]))
        else:
            order = list(ordering)
            if sorted(order) != list(range(len(base))):
                raise ValueError("Ordering must be a permutation of the component ids")
            flags = [base[k].interior for k in order]
            if any(not a and b for a, b in zip(flags, flags[1:])):
                raise ValueError("Interior components must precede boundary-touching ones")
        ny, nx = lattice.shape
        owned = EdgeSet.empty(ny, nx, lattice.side)
        components = []
        for k in order:
            c = base[k]
            theta = c.gamma - owned
            owned = owned | c.gamma
            components.append(BoundaryComponent(c.index, c.cells, c.gamma, theta, c.interior))
        mask.setflags(write=False)
        return cls(lattice, mask, tuple(components), refinements)

    @property
    def ordering(self) -> Tuple[int, ...]:
        return tuple(c.index for c in self.components)

    @property
    def interior_components(self) -> List[BoundaryComponent]:
        return [c for c in self.components if c.interior]

    @property
    def boundary_components(self) -> List[BoundaryComponent]:
        return [c for c in self.components if not c.interior]

    def cell_sets(self) -> List[np.ndarray]:
        """Component cell sets indexed by id."""
        out = [None] * len(self.components)
        for c in self.components:
            out[c.index] = c.cells
        return out

    def component(self, index: int) -> BoundaryComponent:
        for c in self.components:
            if c.index == index:
                return c
        raise KeyError(index)

    def with_ordering(self, ordering: Sequence[int]) -> "GridSet":
        return GridSet.build(self.lattice, self.mask, self.cell_sets(), ordering, self.refinements, validate=False)

    def component_labels(self) -> np.ndarray:
        """Per-cell component id, -1 on the mask."""
        out = np.full(self.lattice.shape, -1, dtype=np.int64)
        for c in self.components:
            out[c.cells] = c.index
        return out

    def max_projection(self) -> float:
        """Largest axis projection over interior components (0 without holes)."""
        vals = [max(c.projections()) for c in self.interior_components]
        return max(vals) if vals else 0.0

    def to_json_dict(self):
        return {
            **self.lattice.to_dict(),
            "mask": self.mask.astype(int).ravel().tolist(),
            "ordering": list(self.ordering),
            "component_labels": self.component_labels().ravel().tolist(),
            "refinements": self.refinements,
        }

    @classmethod
    def from_json_dict(cls, d) -> "GridSet":
        lattice = Lattice.from_dict(d)
        mask = np.asarray(d["mask"], dtype=bool).reshape(lattice.shape)
        ordering = d.get("ordering")
        if "component_labels" in d:
            labels = np.asarray(d["component_labels"], dtype=np.int64).reshape(lattice.shape)
            cell_sets = [labels == k for k in range(int(labels.max()) + 1)]
            return cls.build(lattice, mask, cell_sets, ordering, int(d.get("refinements", 0)))
        w = extract_components(mask, lattice)
        if ordering is not None and len(ordering) == len(w.components):
            w = w.with_ordering(ordering)
        return w


def extract_components(mask: np.ndarray, ambient: Lattice) -> GridSet:
    """
    Grid set whose components are the 4-connected components of the mask complement.

    :param mask: boolean cell mask, shape ambient.shape.
    :param ambient: lattice.
    :return: GridSet in canonical ordering.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != ambient.shape:
        raise ValueError(f"Mask shape {mask.shape} does not match lattice {ambient.shape}")
    n, labels = label_components(~mask)
    cell_sets = [labels == k for k in range(1, n + 1)]
    return GridSet.build(ambient, mask, cell_sets, validate=False)


def set_norm(W: GridSet, kind: NormKind, cfg: Optional[StarMeasureConfig] = None) -> float:
    """
    ||W||_Z: sum over interior components of the chosen measure.

    :param W: grid set.
    :param kind: NormKind.INFTY, HAUSDORFF or STAR.
    :param cfg: star weight (only read for STAR).
    :return: length.
    """
    comps = W.interior_components
    if kind == NormKind.INFTY:
        vals = [measure_infty(c) for c in comps]
    elif kind == NormKind.HAUSDORFF:
        vals = [measure_hausdorff(c) for c in comps]
    elif kind == NormKind.STAR:
        cfg = cfg or StarMeasureConfig()
        vals = [measure_star(c, cfg) for c in comps]
    else:
        raise ValueError(f"Invalid norm kind {kind}")
    return float(np.sum(vals)) if vals else 0.0


def theta_partition_ok(W: GridSet) -> bool:
    """Thetas pairwise disjoint and their union equal to the union of the Gammas."""
    ny, nx = W.lattice.shape
    seen = EdgeSet.empty(ny, nx, W.lattice.side)
    union_gamma = EdgeSet.empty(ny, nx, W.lattice.side)
    for c in W.components:
        if not (c.theta & seen).is_empty:
            return False
        seen = seen | c.theta
        union_gamma = union_gamma | c.gamma
    return seen.same_as(union_gamma)
