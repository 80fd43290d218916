"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

# offsets z_i of the four shifted lattices I^s_i = s z_i + 2s Z^2
SHIFT_OFFSETS = {1: (0, 0), 2: (1, 0), 3: (0, 1), 4: (1, 1)}


@dataclass(frozen=True)
class WorldRect:
    """Axis-aligned rectangle [x0, x1] x [y0, y1] in world coordinates."""
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x1 >= self.x0 and self.y1 >= self.y0):
            raise ValueError(f"Degenerate rectangle {self}")

    @property
    def width(self):
        return self.x1 - self.x0

    @property
    def height(self):
        return self.y1 - self.y0

    @property
    def area(self):
        return self.width * self.height

    @property
    def center(self):
        return np.array([(self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0])

    def intersection(self, other: "WorldRect") -> Optional["WorldRect"]:
        x0, y0 = max(self.x0, other.x0), max(self.y0, other.y0)
        x1, y1 = min(self.x1, other.x1), min(self.y1, other.y1)
        if x1 <= x0 or y1 <= y0:
            return None
        return WorldRect(x0, y0, x1, y1)


@dataclass(frozen=True)
class CellRect:
    """Half-open block of cells [i0, i1) x [j0, j1); i is the column, j the row."""
    i0: int
    j0: int
    i1: int
    j1: int

    @property
    def nx(self):
        return max(0, self.i1 - self.i0)

    @property
    def ny(self):
        return max(0, self.j1 - self.j0)

    @property
    def is_empty(self):
        return self.nx == 0 or self.ny == 0

    @property
    def slices(self) -> Tuple[slice, slice]:
        return slice(self.j0, self.j1), slice(self.i0, self.i1)

    def clipped(self, nx, ny) -> "CellRect":
        return CellRect(max(self.i0, 0), max(self.j0, 0), min(self.i1, nx), min(self.j1, ny))

    def grown(self, r) -> "CellRect":
        return CellRect(self.i0 - r, self.j0 - r, self.i1 + r, self.j1 + r)

    def mask(self, nx, ny) -> np.ndarray:
        out = np.zeros((ny, nx), dtype=bool)
        c = self.clipped(nx, ny)
        if not c.is_empty:
            out[c.slices] = True
        return out

    def contains_cells(self, cells: np.ndarray) -> bool:
        js, is_ = np.nonzero(cells)
        if js.size == 0:
            return True
        return bool(is_.min() >= self.i0 and is_.max() < self.i1 and js.min() >= self.j0 and js.max() < self.j1)


@dataclass(frozen=True)
class Lattice:
    """
    Square cells Q^s_i(p) = p + s(-1,1)^2 centred at p = origin + s z_i + 2s(a, b).

    Arrays over cells are indexed ``[j, i]`` (row j along x2, column i along x1).
    """
    spacing: float
    nx: int
    ny: int
    shift: int = 4
    origin: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError("Lattice spacing must be positive")
        if self.shift not in SHIFT_OFFSETS:
            raise ValueError(f"Invalid shift {self.shift}")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("Lattice needs at least one cell")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def side(self) -> float:
        """Cell side length 2s."""
        return 2.0 * self.spacing

    @property
    def shape(self) -> Tuple[int, int]:
        return self.ny, self.nx

    @property
    def lower_left(self) -> np.ndarray:
        z = SHIFT_OFFSETS[self.shift]
        return np.array([self.origin[0] + self.spacing * (z[0] - 1), self.origin[1] + self.spacing * (z[1] - 1)])

    @property
    def bounds(self) -> WorldRect:
        ll = self.lower_left
        return WorldRect(ll[0], ll[1], ll[0] + self.nx * self.side, ll[1] + self.ny * self.side)

    def cell_center(self, i, j) -> np.ndarray:
        ll = self.lower_left
        return np.array([ll[0] + (i + 0.5) * self.side, ll[1] + (j + 0.5) * self.side])

    def cell_centers(self) -> np.ndarray:
        """Centres as an array of shape (ny, nx, 2)."""
        ll = self.lower_left
        xs = ll[0] + (np.arange(self.nx) + 0.5) * self.side
        ys = ll[1] + (np.arange(self.ny) + 0.5) * self.side
        X, Y = np.meshgrid(xs, ys)
        return np.stack([X, Y], axis=-1)

    def node_coords(self) -> np.ndarray:
        """Grid nodes as an array of shape (ny+1, nx+1, 2)."""
        ll = self.lower_left
        xs = ll[0] + np.arange(self.nx + 1) * self.side
        ys = ll[1] + np.arange(self.ny + 1) * self.side
        X, Y = np.meshgrid(xs, ys)
        return np.stack([X, Y], axis=-1)

    def corner_coords(self) -> np.ndarray:
        """Cell corners as an array of shape (ny, nx, 2, 2, 2) indexed [j, i, dy, dx, component]."""
        nodes = self.node_coords()
        out = np.empty((self.ny, self.nx, 2, 2, 2))
        for dy in (0, 1):
            for dx in (0, 1):
                out[:, :, dy, dx, :] = nodes[dy:dy + self.ny, dx:dx + self.nx, :]
        return out

    def cell_rect_world(self, rect: CellRect) -> WorldRect:
        ll = self.lower_left
        return WorldRect(ll[0] + rect.i0 * self.side, ll[1] + rect.j0 * self.side,
                         ll[0] + rect.i1 * self.side, ll[1] + rect.j1 * self.side)

    def to_cell_rect(self, rect: WorldRect, tol=1e-9) -> CellRect:
        """Exact conversion of a cell-aligned world rectangle; raises ValueError otherwise."""
        ll = self.lower_left
        coords = [(rect.x0 - ll[0]) / self.side, (rect.y0 - ll[1]) / self.side,
                  (rect.x1 - ll[0]) / self.side, (rect.y1 - ll[1]) / self.side]
        rounded = [round(c) for c in coords]
        if any(abs(c - r) > tol for c, r in zip(coords, rounded)):
            raise ValueError(f"Rectangle {rect} is not aligned with the lattice cells")
        return CellRect(rounded[0], rounded[1], rounded[2], rounded[3])

    def snap_outward(self, rect: WorldRect, tol=1e-9) -> CellRect:
        """Smallest block of cells whose union contains ``rect``, clipped to the extent."""
        ll = self.lower_left
        i0 = math.floor((rect.x0 - ll[0]) / self.side + tol)
        j0 = math.floor((rect.y0 - ll[1]) / self.side + tol)
        i1 = math.ceil((rect.x1 - ll[0]) / self.side - tol)
        j1 = math.ceil((rect.y1 - ll[1]) / self.side - tol)
        return CellRect(i0, j0, max(i1, i0 + 1), max(j1, j0 + 1)).clipped(self.nx, self.ny)

    def refined(self, factor: int = 2) -> "Lattice":
        """Same extent, cells split ``factor`` times along each axis."""
        if factor < 1:
            raise ValueError("Refinement factor must be positive")
        spacing = self.spacing / factor
        z = SHIFT_OFFSETS[self.shift]
        ll = self.lower_left
        origin = (ll[0] - spacing * (z[0] - 1), ll[1] - spacing * (z[1] - 1))
        return Lattice(spacing, self.nx * factor, self.ny * factor, self.shift, origin)

    def blocks(self, block: int, shift: int = 4) -> List[CellRect]:
        """
        Squares of a coarse lattice made of ``block`` x ``block`` cells, clipped to the extent.

        The coarse lattice with shift 4 is anchored at the lower-left corner; the
        other shifts move it by half a block along the axes where z_i is 0.

        :param block: coarse square side in cells.
        :param shift: shifted-lattice index in 1..4.
        :return: list of non-empty CellRect, rows first.
        """
        if block < 1:
            raise ValueError("Block size must be at least one cell")
        z = SHIFT_OFFSETS[shift]
        off_x = (1 - z[0]) * (block // 2)
        off_y = (1 - z[1]) * (block // 2)
        rects = []
        for j0 in range(-off_y, self.ny, block):
            for i0 in range(-off_x, self.nx, block):
                r = CellRect(i0, j0, i0 + block, j0 + block).clipped(self.nx, self.ny)
                if not r.is_empty:
                    rects.append(r)
        return rects

    def block_index(self, block: int, shift: int = 4) -> Tuple[np.ndarray, np.ndarray]:
        """Per-column and per-row coarse indices of the blocks of :meth:`blocks`."""
        z = SHIFT_OFFSETS[shift]
        off_x = (1 - z[0]) * (block // 2)
        off_y = (1 - z[1]) * (block // 2)
        return (np.arange(self.nx) + off_x) // block, (np.arange(self.ny) + off_y) // block

    def block_centers(self, block: int, shift: int = 4) -> Tuple[np.ndarray, np.ndarray]:
        """World x-centre per column and y-centre per row of the (unclipped) block owning it."""
        z = SHIFT_OFFSETS[shift]
        off_x = (1 - z[0]) * (block // 2)
        off_y = (1 - z[1]) * (block // 2)
        bi, bj = self.block_index(block, shift)
        ll = self.lower_left
        cx = ll[0] + ((bi * block - off_x) + block / 2.0) * self.side
        cy = ll[1] + ((bj * block - off_y) + block / 2.0) * self.side
        return cx, cy

    def to_dict(self):
        return {"spacing": self.spacing, "shift": self.shift, "nx": self.nx, "ny": self.ny,
                "origin": list(self.origin)}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["spacing"]), int(d["nx"]), int(d["ny"]), int(d.get("shift", 4)),
                   tuple(d.get("origin", (0.0, 0.0))))


def cells_per_length(lattice: Lattice, length: float, tol=1e-9) -> int:
    """Number of cells spanning ``length``; raises ValueError when it is not a multiple of the cell side."""
    n = length / lattice.side
    r = round(n)
    if r < 1 or abs(n - r) > tol * max(1.0, abs(n)):
        raise ValueError(f"Length {length} is not a multiple of the cell side {lattice.side}")
    return int(r)
