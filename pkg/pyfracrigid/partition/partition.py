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
from dataclasses import dataclass
from typing import Dict, List, Optional, Union

import numpy as np
from scipy import ndimage

from pyfracrigid.enums.Kinematics import Kinematics
from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.grid.edges import EdgeSet
from pyfracrigid.grid.grid_set import GridSet, label_components
from pyfracrigid.grid.lattice import Lattice
from pyfracrigid.grid.set_calculus import perimeter_count
from pyfracrigid.rigidity.chains import chain_rotation_field
from pyfracrigid.rigidity.fits import (InfinitesimalRigidMotion, RigidMotion, best_fit_rigid_motion,
                                       gradient_residual, project_infinitesimal_rigid)
from pyfracrigid.utils.utils import Utils

logger = logging.getLogger(__name__)

EXCLUDED = 0
PENDING = -1

Motion = Union[RigidMotion, InfinitesimalRigidMotion]

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class Piece:
    label: int
    cells: np.ndarray
    perimeter: float
    motion: Optional[Motion] = None
    flagged: bool = False
    chain: Optional[Dict[str, float]] = None

    @property
    def area_cells(self) -> int:
        return int(self.cells.sum())

    def to_dict(self):
        d = {"label": self.label, "cells": self.area_cells, "perimeter": self.perimeter,
             "flagged": self.flagged}
        if self.motion is not None:
            d.update(self.motion.to_dict())
        if self.chain is not None:
            d["chain"] = dict(self.chain)
        return d


@dataclass(frozen=True, eq=False)
class CaccioppoliPartition:
    """
    Labelled pieces of Omega_rho.

    ``labels`` holds the piece label per cell, EXCLUDED (0) outside Omega_rho and PENDING
    (-1) on cells of Omega_rho that no piece owns yet.
    """
    lattice: Lattice
    labels: np.ndarray
    pieces: List[Piece]
    omega_rho: np.ndarray
    rho: float

    @property
    def total_perimeter(self) -> float:
        return float(sum(p.perimeter for p in self.pieces))

    @property
    def pending(self) -> np.ndarray:
        return self.labels == PENDING

    @property
    def complete(self) -> bool:
        return not self.pending.any()

    def piece(self, label: int) -> Piece:
        for p in self.pieces:
            if p.label == label:
                return p
        raise KeyError(label)

    def min_area_constant(self) -> float:
        """min_j |P_j| / rho, the constant c of |P_j| >= c rho."""
        if not self.pieces:
            return math.nan
        return min(p.area_cells for p in self.pieces) * self.lattice.side ** 2 / self.rho

    def perimeter_check(self):
        """
        Both sides of sum_j P(P_j, Omega_rho) = 2 |piece-piece interfaces| + |piece-pending interfaces|.

        :return: (sum of perimeters, edge count side) as lengths.
        """
        h = self.lattice.side
        lab = np.where(self.omega_rho, self.labels, EXCLUDED)
        pieces = lab > 0
        iface = EdgeSet.interfaces(lab, h, valid=self.omega_rho)
        both = EdgeSet.interfaces(lab, h, valid=pieces)
        one = iface - both
        return self.total_perimeter, 2.0 * both.measure + one.measure

    def motions(self) -> List[Dict]:
        return [p.to_dict() for p in self.pieces]

    def with_pieces(self, labels: np.ndarray, pieces: List[Piece]) -> "CaccioppoliPartition":
        return dataclasses.replace(self, labels=labels, pieces=pieces)


def omega_rho(active: np.ndarray, h: float, rho: float, margin: float) -> np.ndarray:
    """Active cells whose centre lies farther than margin * rho from the domain boundary."""
    padded = np.pad(np.asarray(active, dtype=bool), 1)
    dist = ndimage.distance_transform_edt(padded)[1:-1, 1:-1] * h - h / 2.0
    return np.asarray(active, dtype=bool) & (dist > margin * rho)


def _make_piece(label, cells, om, h, **kw) -> Piece:
    return Piece(label, cells, perimeter_count(cells, om) * h, **kw)


def extract_partition(W_final: GridSet, rho: float, active: Optional[np.ndarray] = None,
                      margin: float = 0.0) -> CaccioppoliPartition:
    """
    Pieces = 4-connected components of W_final n Omega_rho, in raster order.

    :param W_final: set at the terminal scale.
    :param rho: partition scale.
    :param active: domain cells (all cells by default).
    :param margin: Omega_rho keeps cells farther than margin * rho from the boundary.
    """
    lat = W_final.lattice
    active = np.ones(lat.shape, dtype=bool) if active is None else np.asarray(active, dtype=bool)
    om = omega_rho(active, lat.side, rho, margin)
    n, lab = label_components(W_final.mask & om)
    labels = np.where(om, PENDING, EXCLUDED).astype(np.int64)
    labels[lab > 0] = lab[lab > 0]
    pieces = [_make_piece(q, lab == q, om, lat.side) for q in range(1, n + 1)]
    logger.info("extracted %d pieces, %d pending cells", n, int((labels == PENDING).sum()))
    return CaccioppoliPartition(lat, labels, pieces, om, rho)


def fit_motion(f: DeformationField, cells: np.ndarray, kinematics: Kinematics) -> Motion:
    if kinematics == Kinematics.LINEAR:
        return project_infinitesimal_rigid(f, cells)
    return best_fit_rigid_motion(f, cells)


def chain_audit(f: DeformationField, cells: np.ndarray, motion: RigidMotion, rho: float) -> Optional[Dict[str, float]]:
    """
    Chain aggregation of square rotations inside a piece against its global fit.

    On the largest chain component the rotation of the root square R0 and the global
    rotation R satisfy |Q| |R0 - R|^2 <= 2 ||grad y - R0||^2 + 2 ||grad y - R||^2 on the
    chained squares Q.
    """
    lat = f.lattice
    block = max(1, int(round(rho / lat.side)))
    field = chain_rotation_field(f, cells, block * lat.side)
    if not field.components:
        return None
    comp = max(field.components, key=lambda c: len(c.squares))
    area = float(comp.cells.sum()) * lat.side ** 2
    deviation = area * float(np.sum((comp.rotation - motion.R) ** 2))
    budget = 2.0 * comp.numerator + 2.0 * gradient_residual(f, motion.R, comp.cells)
    return {"squares": float(len(comp.squares)), "deviation": deviation, "budget": budget,
            "link_constant": comp.link_constant, "passed": float(deviation <= budget * (1 + 1e-9) + 1e-14)}


def assign_rigid_motions(f: DeformationField, partition: CaccioppoliPartition,
                         kinematics: Kinematics = Kinematics.NONLINEAR, threads: int = 1) -> CaccioppoliPartition:
    """
    Fit one motion per piece over all its cells; pieces without active cells are dropped.

    The per-piece fits run on up to ``threads`` worker threads and are collected in piece order.
    """
    labels = np.array(partition.labels)

    def fit_piece(p: Piece) -> Optional[Piece]:
        cells = p.cells & f.active
        if not cells.any():
            return None
        motion = fit_motion(f, cells, kinematics)
        chain = None
        if kinematics == Kinematics.NONLINEAR:
            chain = chain_audit(f, cells, motion, partition.rho)
        return dataclasses.replace(p, motion=motion, chain=chain)

    pieces = []
    for p, fitted in zip(partition.pieces, Utils.ordered_map(fit_piece, partition.pieces, threads)):
        if fitted is None:
            logger.warning("piece %d has no active cells and is dropped", p.label)
            labels[p.cells] = PENDING
            continue
        if fitted.chain is not None and not fitted.chain["passed"]:
            logger.warning("piece %d: chained rotations deviate beyond the budget", p.label)
        pieces.append(fitted)
    return partition.with_pieces(labels, pieces)


def relabel(partition: CaccioppoliPartition, labels: np.ndarray, motions: Dict[int, Motion],
            flagged=frozenset(), chains: Optional[Dict[int, Dict]] = None) -> CaccioppoliPartition:
    """Renumber positive labels 1..n by first cell in raster order and rebuild the pieces."""
    h = partition.lattice.side
    flat = labels.ravel()
    vals, first = np.unique(flat[flat > 0], return_index=True)
    order = [int(v) for v in vals[np.argsort(first)]]
    out = np.where(labels > 0, 0, labels).astype(np.int64)
    pieces = []
    for new, old in enumerate(order, start=1):
        cells = labels == old
        out[cells] = new
        pieces.append(_make_piece(new, cells, partition.omega_rho, h, motion=motions.get(old),
                                  flagged=old in flagged, chain=(chains or {}).get(old)))
    return partition.with_pieces(out, pieces)


def merge_equivalent_pieces(f: DeformationField, partition: CaccioppoliPartition, lam: float, tol: float,
                            kinematics: Kinematics = Kinematics.NONLINEAR) -> CaccioppoliPartition:
    """
    Merge pieces whose motions agree within ``tol`` and whose cells lie within ``lam``.

    Merged pieces are refitted; the lowest label of a group survives before renumbering.
    """
    pieces = [p for p in partition.pieces if p.motion is not None]
    if len(pieces) < 2:
        return partition
    reach = max(1, int(math.ceil(lam / partition.lattice.side)))
    parent = {p.label: p.label for p in pieces}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    grown = {p.label: ndimage.binary_dilation(p.cells, structure=_EIGHT, iterations=reach) for p in pieces}
    for x in range(len(pieces)):
        for y in range(x + 1, len(pieces)):
            a, b = pieces[x], pieces[y]
            if a.motion.distance(b.motion) <= tol and (grown[a.label] & b.cells).any():
                ra, rb = find(a.label), find(b.label)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    if all(find(p.label) == p.label for p in pieces):
        return partition
    labels = np.array(partition.labels)
    for p in pieces:
        labels[p.cells] = find(p.label)
    motions = {}
    for root in sorted({find(p.label) for p in pieces}):
        cells = (labels == root) & f.active
        motions[root] = fit_motion(f, cells, kinematics)
    out = relabel(partition, labels, motions)
    logger.info("merged %d pieces into %d", len(pieces), len(out.pieces))
    return out
