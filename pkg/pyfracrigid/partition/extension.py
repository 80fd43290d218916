"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import heapq
import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from pyfracrigid.enums.Kinematics import Kinematics
from pyfracrigid.fields.deformation_field import DeformationField, mismatch_edges
from pyfracrigid.fields.energies import Energies
from pyfracrigid.grid.edges import EdgeSet
from pyfracrigid.grid.grid_set import label_components
from pyfracrigid.partition.partition import PENDING, CaccioppoliPartition, relabel
from pyfracrigid.rigidity.fits import InfinitesimalRigidMotion, RigidMotion

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Extension:
    field: DeformationField
    partition: CaccioppoliPartition
    filled: np.ndarray
    flagged: List[int]
    seams: Dict[str, float]
    part_crack: Dict[str, float] = field(default_factory=dict)


def _neighbours(mask: np.ndarray) -> np.ndarray:
    out = np.zeros_like(mask)
    out[1:, :] |= mask[:-1, :]
    out[:-1, :] |= mask[1:, :]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    return out


def fill_pending(original: DeformationField, partition: CaccioppoliPartition, motions: Dict[int, object]):
    """
    Assign pending cells to pieces by seeded region growing.

    Pending cells are claimed in order of increasing residual, the squared distance
    between a piece's motion and the original corner values of the cell, and only by a
    piece they touch (ties go to the lower label). A claimed cell lets its piece reach
    its pending neighbours. Pending regions no piece reaches are returned separately.

    :return: (labels, unreached mask)
    """
    labels = np.array(partition.labels)
    ny, nx = labels.shape
    X = partition.lattice.corner_coords()
    C = np.nan_to_num(original.corners)
    act = original.active
    residual = {}
    for lab, motion in motions.items():
        d = motion.apply(X) - C
        residual[lab] = np.where(act, np.sum(d * d, axis=(-3, -2, -1)), 0.0)
    heap = []
    pending = labels == PENDING
    for lab in sorted(motions):
        js, is_ = np.nonzero(pending & _neighbours(labels == lab))
        for j, i in zip(js.tolist(), is_.tolist()):
            heap.append((float(residual[lab][j, i]), lab, j, i))
    heapq.heapify(heap)
    while heap:
        _, lab, j, i = heapq.heappop(heap)
        if labels[j, i] != PENDING:
            continue
        labels[j, i] = lab
        for q, p in ((j + 1, i), (j - 1, i), (j, i + 1), (j, i - 1)):
            if 0 <= q < ny and 0 <= p < nx and labels[q, p] == PENDING:
                heapq.heappush(heap, (float(residual[lab][q, p]), lab, q, p))
    return labels, labels == PENDING


def part_crack(yhat: DeformationField, partition: CaccioppoliPartition, original_jump_length: float,
               eps: float, rho: float) -> Dict[str, float]:
    """
    Both sides of sum_j P(P_j, Omega_rho) / 2 + int_{J \\ dP} f(|[y]|) <= H^1(J_y) + C1 rho, with C1 measured.
    """
    h = yhat.h
    lab = partition.labels
    between = EdgeSet.interfaces(lab, h)
    ny, nx = lab.shape
    v_in = np.zeros((ny, nx + 1), dtype=bool)
    h_in = np.zeros((ny + 1, nx), dtype=bool)
    inside = lab > 0
    v_in[:, 1:nx] = inside[:, 1:] & inside[:, :-1]
    h_in[1:ny, :] = inside[1:, :] & inside[:-1, :]
    inner = (yhat.jumps.edges & EdgeSet(v_in, h_in, h)) - between
    av, ah = yhat.jumps.amplitudes()
    dens = 0.0
    if inner.vertical.any():
        dens += float(np.sum(Energies.relaxed_surface_density(av[inner.vertical], eps, rho).mean(axis=-1)))
    if inner.horizontal.any():
        dens += float(np.sum(Energies.relaxed_surface_density(ah[inner.horizontal], eps, rho).mean(axis=-1)))
    lhs = 0.5 * partition.total_perimeter + dens * h
    constant = (lhs - original_jump_length) / rho
    return {"lhs": lhs, "half_perimeter": 0.5 * partition.total_perimeter, "crack_relaxed": dens * h,
            "rhs_jump_length": original_jump_length, "constant": max(constant, 0.0)}


def assemble_extension(original: DeformationField, healed: DeformationField, partition: CaccioppoliPartition,
                       eps: float, jump_tol: float = 1e-9,
                       kinematics: Kinematics = Kinematics.NONLINEAR) -> Extension:
    """
    Complete the partition over Omega_rho and build y^ from it.

    y^ equals the healed field on the cells the pieces already own and the motion of
    the owning piece on every cell filled here. A pending region with no adjacent piece
    becomes its own piece carrying the identity (zero displacement in LINEAR kinematics)
    and is flagged. Jumps of y^ are the edges whose opening exceeds ``jump_tol``.

    :param original: input field y.
    :param healed: engine output.
    :param partition: partition with motions.
    :param eps: energy scale of the relaxed seam density.
    :param jump_tol: essential-jump amplitude.
    :param kinematics: NONLINEAR or LINEAR.
    """
    lat = partition.lattice
    motions = {p.label: p.motion for p in partition.pieces if p.motion is not None}
    labels, unreached = fill_pending(original, partition, motions)
    flagged = []
    if unreached.any():
        n, lab = label_components(unreached)
        top = max(motions) if motions else 0
        ident = (InfinitesimalRigidMotion(0.0, np.zeros(2)) if kinematics == Kinematics.LINEAR
                 else RigidMotion.identity())
        for q in range(1, n + 1):
            top += 1
            labels[lab == q] = top
            motions[top] = ident
            flagged.append(top)
        logger.warning("%d pending regions without an adjacent piece were given the identity", n)
    owned = partition.labels > 0
    filled = (labels > 0) & ~owned
    chains = {p.label: p.chain for p in partition.pieces}
    done = relabel(partition, labels, motions, frozenset(flagged), chains)
    flagged = [p.label for p in done.pieces if p.flagged]
    X = lat.corner_coords()
    corners = np.array(healed.corners)
    for p in done.pieces:
        sel = p.cells & filled
        if sel.any():
            corners[sel] = p.motion.apply(X[sel])
    v, hz = mismatch_edges(corners, healed.active, jump_tol)
    yhat = DeformationField.build(lat, corners, healed.active, v, hz)
    seam = EdgeSet.interfaces(done.labels, lat.side, valid=done.labels > 0) & yhat.jumps.edges
    av, ah = yhat.jumps.amplitudes()
    amps = np.concatenate([av[seam.vertical].max(axis=-1) if seam.vertical.any() else np.zeros(0),
                           ah[seam.horizontal].max(axis=-1) if seam.horizontal.any() else np.zeros(0)])
    seams = {"edges": float(seam.count), "length": seam.measure,
             "max_amplitude": float(amps.max()) if amps.size else 0.0}
    pc = part_crack(yhat, done, original.jumps.length, eps, partition.rho)
    logger.info("extension filled %d cells; part+crack constant %.4g", int(filled.sum()), pc["constant"])
    return Extension(yhat, done, filled, flagged, seams, pc)
