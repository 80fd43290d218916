"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from pyfracrigid.enums.EdgeSide import EdgeSide
from pyfracrigid.grid.edges import EdgeSet
from pyfracrigid.grid.lattice import Lattice
from pyfracrigid.utils.errors import NoGradientError

logger = logging.getLogger(__name__)


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class JumpSet:
    """
    Jump edges of a field with their crack openings [y] = y+ - y-.

    The plus side of a vertical edge is the east cell, of a horizontal edge the north
    cell. Openings are stored per edge endpoint, ordered by increasing coordinate,
    with NaN off the jump set.
    """
    edges: EdgeSet
    opening_vertical: np.ndarray    # (ny, nx+1, 2, 2) [edge, endpoint, component]
    opening_horizontal: np.ndarray  # (ny+1, nx, 2, 2)

    @property
    def count(self) -> int:
        return self.edges.count

    @property
    def length(self) -> float:
        """H^1(J_y)."""
        return self.edges.measure

    def amplitudes(self):
        """Per-endpoint |[y]| as two arrays shaped like the edge masks plus an endpoint axis."""
        return (np.linalg.norm(self.opening_vertical, axis=-1),
                np.linalg.norm(self.opening_horizontal, axis=-1))

    def interior_to(self, cells: np.ndarray) -> EdgeSet:
        """Jump edges with both adjacent cells in ``cells``."""
        return self.edges & EdgeSet.inside(cells, self.edges.length)

    def records(self):
        """Iterate (j, i, side) per jump edge; (j, i) is the plus cell, side W or S."""
        vj, vi = np.nonzero(self.edges.vertical)
        for j, i in zip(vj, vi):
            yield int(j), int(i), EdgeSide.W
        hj, hi = np.nonzero(self.edges.horizontal)
        for j, i in zip(hj, hi):
            yield int(j), int(i), EdgeSide.S


def _openings(corners, vertical, horizontal):
    ny, nx = corners.shape[:2]
    ov = np.full((ny, nx + 1, 2, 2), np.nan)
    oh = np.full((ny + 1, nx, 2, 2), np.nan)
    ov[:, 1:nx] = corners[:, 1:, :, 0, :] - corners[:, :-1, :, 1, :]
    oh[1:ny] = corners[1:, :, 0, :, :] - corners[:-1, :, 1, :, :]
    ov[~vertical] = np.nan
    oh[~horizontal] = np.nan
    return ov, oh


def admissible_edges(active: np.ndarray):
    """Interior edge masks whose two adjacent cells are active."""
    ny, nx = active.shape
    v = np.zeros((ny, nx + 1), dtype=bool)
    h = np.zeros((ny + 1, nx), dtype=bool)
    v[:, 1:nx] = active[:, 1:] & active[:, :-1]
    h[1:ny, :] = active[1:, :] & active[:-1, :]
    return v, h


def mismatch_edges(corners: np.ndarray, active: np.ndarray, tol: float):
    """Admissible edges across which the two cells disagree by more than ``tol`` at an endpoint."""
    v, h = admissible_edges(active)
    ov, oh = _openings(np.nan_to_num(corners), v, h)
    with np.errstate(invalid="ignore"):
        v = v & (np.nan_to_num(np.linalg.norm(ov, axis=-1)).max(axis=-1) > tol)
        h = h & (np.nan_to_num(np.linalg.norm(oh, axis=-1)).max(axis=-1) > tol)
    return v, h


@dataclass(frozen=True, eq=False)
class DeformationField:
    """
    Discrete SBV field stored as per-cell corner values.

    Neighbouring cells share their corner values except across jump edges, where both
    one-sided values are kept, so crack openings are exact.

    :param lattice: cell lattice; h = lattice.side.
    :param corners: (ny, nx, 2, 2, 2) values indexed [j, i, dy, dx, component].
    :param active: cells belonging to the domain.
    :param jumps: jump edges and openings.
    """
    lattice: Lattice
    corners: np.ndarray
    active: np.ndarray
    jumps: JumpSet

    @classmethod
    def build(cls, lattice: Lattice, corners: np.ndarray, active: Optional[np.ndarray] = None,
              jump_vertical: Optional[np.ndarray] = None,
              jump_horizontal: Optional[np.ndarray] = None) -> "DeformationField":
        ny, nx = lattice.shape
        corners = np.array(corners, dtype=float)
        if corners.shape != (ny, nx, 2, 2, 2):
            raise ValueError(f"corners must have shape {(ny, nx, 2, 2, 2)}, got {corners.shape}")
        active = np.ones((ny, nx), dtype=bool) if active is None else np.array(active, dtype=bool)
        if not np.all(np.isfinite(corners[active])):
            raise ValueError("Field values must be finite on active cells")
        corners[~active] = np.nan
        av, ah = admissible_edges(active)
        v = np.zeros((ny, nx + 1), dtype=bool) if jump_vertical is None else np.array(jump_vertical, dtype=bool)
        h = np.zeros((ny + 1, nx), dtype=bool) if jump_horizontal is None else np.array(jump_horizontal, dtype=bool)
        v &= av
        h &= ah
        ov, oh = _openings(corners, v, h)
        jumps = JumpSet(EdgeSet(v, h, lattice.side), _readonly(ov), _readonly(oh))
        return cls(lattice, _readonly(corners), _readonly(active), jumps)

    @classmethod
    def from_nodal(cls, lattice: Lattice, values: np.ndarray, active: Optional[np.ndarray] = None) -> "DeformationField":
        """Continuous field from node values of shape (ny+1, nx+1, 2)."""
        ny, nx = lattice.shape
        values = np.asarray(values, dtype=float)
        if values.shape != (ny + 1, nx + 1, 2):
            raise ValueError(f"nodal values must have shape {(ny + 1, nx + 1, 2)}")
        corners = np.empty((ny, nx, 2, 2, 2))
        for dy in (0, 1):
            for dx in (0, 1):
                corners[:, :, dy, dx, :] = values[dy:dy + ny, dx:dx + nx, :]
        return cls.build(lattice, corners, active)

    @classmethod
    def from_function(cls, lattice: Lattice, func: Callable[[np.ndarray, int], np.ndarray],
                      labels: Optional[np.ndarray] = None, active: Optional[np.ndarray] = None,
                      drop_continuous: bool = True, extra_jumps=None) -> "DeformationField":
        """
        Evaluate ``func(points, label)`` at the corners of the cells carrying each label.

        Edges between cells of different labels become jump edges, except where the
        two one-sided values coincide exactly and ``drop_continuous`` is set.
        ``extra_jumps`` adds (vertical, horizontal) edge masks, e.g. hairline cracks.
        """
        ny, nx = lattice.shape
        labels = np.zeros((ny, nx), dtype=np.int64) if labels is None else np.asarray(labels)
        pts = lattice.corner_coords()
        corners = np.full((ny, nx, 2, 2, 2), np.nan)
        for lab in np.unique(labels):
            sel = labels == lab
            corners[sel] = np.asarray(func(pts[sel], int(lab)), dtype=float)
        act = np.ones((ny, nx), dtype=bool) if active is None else np.asarray(active, dtype=bool)
        v = np.zeros((ny, nx + 1), dtype=bool)
        h = np.zeros((ny + 1, nx), dtype=bool)
        v[:, 1:nx] = labels[:, 1:] != labels[:, :-1]
        h[1:ny, :] = labels[1:, :] != labels[:-1, :]
        if drop_continuous:
            mv, mh = mismatch_edges(corners, act, 0.0)
            v &= mv
            h &= mh
        if extra_jumps is not None:
            v |= extra_jumps[0]
            h |= extra_jumps[1]
        return cls.build(lattice, corners, act, v, h)

    @property
    def h(self) -> float:
        return self.lattice.side

    @property
    def shape(self):
        return self.lattice.shape

    @cached_property
    def gradients(self) -> np.ndarray:
        """Bilinear-stencil gradient per cell, shape (ny, nx, 2, 2) indexed [j, i, component, derivative]."""
        c = self.corners
        d1 = ((c[:, :, 0, 1] - c[:, :, 0, 0]) + (c[:, :, 1, 1] - c[:, :, 1, 0])) / (2.0 * self.h)
        d2 = ((c[:, :, 1, 0] - c[:, :, 0, 0]) + (c[:, :, 1, 1] - c[:, :, 0, 1])) / (2.0 * self.h)
        return _readonly(np.stack([d1, d2], axis=-1))

    @cached_property
    def lipschitz_bound(self) -> float:
        """M = max over active cells of |grad y| (Frobenius)."""
        if not self.active.any():
            return 0.0
        return float(np.max(np.linalg.norm(self.gradients[self.active], axis=(-2, -1))))

    def nodal_values(self) -> np.ndarray:
        """Node values (ny+1, nx+1, 2) taken from the first active cell touching each node."""
        ny, nx = self.shape
        out = np.full((ny + 1, nx + 1, 2), np.nan)
        for dy, dx in ((1, 1), (1, 0), (0, 1), (0, 0)):
            vals = self.corners[:, :, dy, dx, :]
            target = out[dy:dy + ny, dx:dx + nx, :]
            sel = self.active & np.isnan(target[..., 0])
            target[sel] = vals[sel]
        return out

    def with_corners(self, corners: np.ndarray, jump_vertical=None, jump_horizontal=None) -> "DeformationField":
        v = self.jumps.edges.vertical if jump_vertical is None else jump_vertical
        h = self.jumps.edges.horizontal if jump_horizontal is None else jump_horizontal
        return DeformationField.build(self.lattice, corners, self.active, v, h)

    def restricted(self, cells: np.ndarray) -> "DeformationField":
        """Same values on ``cells & active``, other cells deactivated."""
        act = self.active & cells
        corners = np.where(act[:, :, None, None, None], self.corners, np.nan)
        return DeformationField.build(self.lattice, corners, act,
                                      self.jumps.edges.vertical, self.jumps.edges.horizontal)

    def to_json_dict(self):
        nodal = self.nodal_values()
        records = []
        for j, i, side in self.jumps.records():
            if side == EdgeSide.W:
                plus = self.corners[j, i, :, 0, :]
                minus = self.corners[j, i - 1, :, 1, :]
            else:
                plus = self.corners[j, i, 0, :, :]
                minus = self.corners[j - 1, i, 1, :, :]
            records.append({"cell": [i, j], "side": side.name, "plus": plus.tolist(), "minus": minus.tolist()})
        return {
            "spacing_h": self.h,
            "nx": self.lattice.nx,
            "ny": self.lattice.ny,
            "origin": list(self.lattice.lower_left),
            "values": [[None if np.isnan(v) else float(v) for v in p] for p in nodal.reshape(-1, 2)],
            "active": self.active.astype(int).ravel().tolist(),
            "jump_edges": records,
        }

    @classmethod
    def from_json_dict(cls, d) -> "DeformationField":
        h = float(d["spacing_h"])
        nx, ny = int(d["nx"]), int(d["ny"])
        lattice = Lattice(h / 2.0, nx, ny, 4, tuple(d.get("origin", (0.0, 0.0))))
        values = np.array([[np.nan if v is None else v for v in p] for p in d["values"]], dtype=float)
        values = values.reshape(ny + 1, nx + 1, 2)
        active = np.asarray(d["active"], dtype=bool).reshape(ny, nx)
        corners = np.empty((ny, nx, 2, 2, 2))
        for dy in (0, 1):
            for dx in (0, 1):
                corners[:, :, dy, dx, :] = values[dy:dy + ny, dx:dx + nx, :]
        v = np.zeros((ny, nx + 1), dtype=bool)
        hz = np.zeros((ny + 1, nx), dtype=bool)
        for rec in d.get("jump_edges", []):
            i, j = rec["cell"]
            side = EdgeSide[rec["side"]]
            plus = np.asarray(rec["plus"], dtype=float)
            minus = np.asarray(rec["minus"], dtype=float)
            if side == EdgeSide.W:
                v[j, i] = True
                corners[j, i, :, 0, :] = plus
                corners[j, i - 1, :, 1, :] = minus
            elif side == EdgeSide.E:
                v[j, i + 1] = True
                corners[j, i + 1, :, 0, :] = plus
                corners[j, i, :, 1, :] = minus
            elif side == EdgeSide.S:
                hz[j, i] = True
                corners[j, i, 0, :, :] = plus
                corners[j - 1, i, 1, :, :] = minus
            else:
                hz[j + 1, i] = True
                corners[j + 1, i, 0, :, :] = plus
                corners[j, i, 1, :, :] = minus
        corners[~active] = np.nan
        return cls.build(lattice, corners, active, v, hz)


def gradient(f: DeformationField, cell) -> np.ndarray:
    """
    Gradient of ``f`` on a cell given as (i, j).

    :raises NoGradientError: for inactive cells.
    """
    i, j = cell
    if not (0 <= j < f.lattice.ny and 0 <= i < f.lattice.nx) or not f.active[j, i]:
        raise NoGradientError(f"cell {(i, j)} carries no gradient")
    return np.array(f.gradients[j, i])
