"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class EdgeSet:
    """
    Set of lattice edges.

    ``vertical[j, i]`` is the edge on the line x-index i between cells (j, i-1) and (j, i);
    ``horizontal[j, i]`` is the edge on the line y-index j between cells (j-1, i) and (j, i).
    Index 0 and the last index denote edges on the lattice border.
    """
    vertical: np.ndarray
    horizontal: np.ndarray
    length: float

    def __post_init__(self):
        ny, nx1 = self.vertical.shape
        if self.horizontal.shape != (ny + 1, nx1 - 1):
            raise ValueError("Inconsistent edge array shapes")
        for a in (self.vertical, self.horizontal):
            a.setflags(write=False)

    @classmethod
    def empty(cls, ny, nx, length) -> "EdgeSet":
        return cls(np.zeros((ny, nx + 1), dtype=bool), np.zeros((ny + 1, nx), dtype=bool), length)

    @classmethod
    def boundary_of(cls, cells: np.ndarray, length: float) -> "EdgeSet":
        """Topological boundary of a cell set, lattice-border edges included."""
        p = np.pad(np.asarray(cells, dtype=bool), 1)
        vertical = p[1:-1, :-1] != p[1:-1, 1:]
        horizontal = p[:-1, 1:-1] != p[1:, 1:-1]
        return cls(vertical, horizontal, length)

    @classmethod
    def inside(cls, cells: np.ndarray, length: float) -> "EdgeSet":
        """Interior edges with both adjacent cells in ``cells``."""
        cells = np.asarray(cells, dtype=bool)
        ny, nx = cells.shape
        v = np.zeros((ny, nx + 1), dtype=bool)
        h = np.zeros((ny + 1, nx), dtype=bool)
        v[:, 1:nx] = cells[:, 1:] & cells[:, :-1]
        h[1:ny, :] = cells[1:, :] & cells[:-1, :]
        return cls(v, h, length)

    @classmethod
    def interfaces(cls, labels: np.ndarray, length: float, valid=None) -> "EdgeSet":
        """Interior edges separating cells with different labels (both cells valid)."""
        ny, nx = labels.shape
        valid = np.ones_like(labels, dtype=bool) if valid is None else valid
        v = np.zeros((ny, nx + 1), dtype=bool)
        h = np.zeros((ny + 1, nx), dtype=bool)
        v[:, 1:nx] = (labels[:, 1:] != labels[:, :-1]) & valid[:, 1:] & valid[:, :-1]
        h[1:ny, :] = (labels[1:, :] != labels[:-1, :]) & valid[1:, :] & valid[:-1, :]
        return cls(v, h, length)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.vertical.shape[0], self.horizontal.shape[1]

    def _combine(self, other, op) -> "EdgeSet":
        return EdgeSet(op(self.vertical, other.vertical), op(self.horizontal, other.horizontal), self.length)

    def __or__(self, other):
        return self._combine(other, np.logical_or)

    def __and__(self, other):
        return self._combine(other, np.logical_and)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a & ~b)

    @property
    def count(self) -> int:
        return int(self.vertical.sum() + self.horizontal.sum())

    @property
    def is_empty(self) -> bool:
        return self.count == 0

    @property
    def measure(self) -> float:
        """One-dimensional Hausdorff measure."""
        return self.count * self.length

    def same_as(self, other) -> bool:
        return bool(np.array_equal(self.vertical, other.vertical) and np.array_equal(self.horizontal, other.horizontal))

    def is_subset_of(self, other) -> bool:
        return (self - other).is_empty

    def node_extents(self) -> Tuple[int, int, int, int]:
        """(min x-node, max x-node, min y-node, max y-node) over all edge endpoints."""
        vj, vi = np.nonzero(self.vertical)
        hj, hi = np.nonzero(self.horizontal)
        if vj.size + hj.size == 0:
            raise ValueError("Empty edge set has no extent")
        xs = np.concatenate([vi, hi, hi + 1])
        ys = np.concatenate([vj, vj + 1, hj])
        return int(xs.min()), int(xs.max()), int(ys.min()), int(ys.max())

    def projections(self) -> Tuple[float, float]:
        """Lengths |pi_1 E| and |pi_2 E| of the axis projections of the bounding box."""
        x0, x1, y0, y1 = self.node_extents()
        return (x1 - x0) * self.length, (y1 - y0) * self.length

    def endpoints(self):
        """Node-index endpoints as two (n, 2) arrays of (row, col)."""
        vj, vi = np.nonzero(self.vertical)
        hj, hi = np.nonzero(self.horizontal)
        a = np.concatenate([np.stack([vj, vi], 1), np.stack([hj, hi], 1)])
        b = np.concatenate([np.stack([vj + 1, vi], 1), np.stack([hj, hi + 1], 1)])
        return a, b

    def vertices(self) -> np.ndarray:
        """Boolean (ny+1, nx+1) array of nodes touched by an edge."""
        ny, nx = self.shape
        out = np.zeros((ny + 1, nx + 1), dtype=bool)
        out[:-1, :] |= self.vertical
        out[1:, :] |= self.vertical
        out[:, :-1] |= self.horizontal
        out[:, 1:] |= self.horizontal
        return out

    def adjacent_cells(self) -> np.ndarray:
        """Boolean (ny, nx) array of cells having at least one side in the set."""
        out = self.vertical[:, :-1] | self.vertical[:, 1:]
        out = out | self.horizontal[:-1, :] | self.horizontal[1:, :]
        return out

    def interior_only(self) -> "EdgeSet":
        """Drop the edges lying on the lattice border."""
        v = self.vertical.copy()
        h = self.horizontal.copy()
        v[:, 0] = v[:, -1] = False
        h[0, :] = h[-1, :] = False
        return EdgeSet(v, h, self.length)
