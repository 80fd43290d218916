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
from typing import Dict, List

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse import csgraph

from pyfracrigid.grid.edges import EdgeSet
from pyfracrigid.grid.grid_set import label_components
from pyfracrigid.partition.partition import CaccioppoliPartition

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Separator:
    """
    Edge set S between different pieces inside Omega_rho, with the audits of its
    generalized Jordan curves.
    """
    edges: EdgeSet
    boundary: EdgeSet
    loops: Dict[int, int]
    audits: Dict[str, Dict[str, float]] = field(default_factory=dict)
    flagged: List[int] = field(default_factory=list)

    @property
    def length(self) -> float:
        return self.edges.measure

    def rows(self) -> List[Dict]:
        """One record per edge of S: orientation, cell index and end nodes."""
        out = []
        vj, vi = np.nonzero(self.edges.vertical)
        for j, i in zip(vj, vi):
            out.append({"orientation": "V", "j": int(j), "i": int(i),
                        "x0": int(i), "y0": int(j), "x1": int(i), "y1": int(j) + 1})
        hj, hi = np.nonzero(self.edges.horizontal)
        for j, i in zip(hj, hi):
            out.append({"orientation": "H", "j": int(j), "i": int(i),
                        "x0": int(i), "y0": int(j), "x1": int(i) + 1, "y1": int(j)})
        return out


def _node_graph(edges: EdgeSet):
    """Sparse adjacency of lattice nodes joined by the edges; node id = row * (nx + 1) + col."""
    ny, nx = edges.shape
    a, b = edges.endpoints()
    n = (ny + 1) * (nx + 1)
    ia = a[:, 0] * (nx + 1) + a[:, 1]
    ib = b[:, 0] * (nx + 1) + b[:, 1]
    data = np.ones(ia.size, dtype=np.int8)
    return sparse.coo_matrix((data, (ia, ib)), shape=(n, n)).tocsr(), ia, ib


def _cell_graph(cells: np.ndarray, cut: EdgeSet):
    """Adjacency of the given cells across edges not in ``cut``."""
    ny, nx = cells.shape
    ids = np.arange(ny * nx).reshape(ny, nx)
    rows, cols = [], []
    ok_v = cells[:, 1:] & cells[:, :-1] & ~cut.vertical[:, 1:nx]
    rows.append(ids[:, :-1][ok_v])
    cols.append(ids[:, 1:][ok_v])
    ok_h = cells[1:, :] & cells[:-1, :] & ~cut.horizontal[1:ny, :]
    rows.append(ids[:-1, :][ok_h])
    cols.append(ids[1:, :][ok_h])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    return sparse.coo_matrix((np.ones(r.size, dtype=np.int8), (r, c)), shape=(ny * nx, ny * nx)).tocsr()


def _inner_loops(cells: np.ndarray) -> int:
    n, _ = label_components(~np.pad(cells, 1))
    return max(n - 1, 0)


def jordan_separator(partition: CaccioppoliPartition, hat_omega: np.ndarray, rho: float, q_exponent: int,
                     star_norm: float = 0.0) -> Separator:
    """
    Separator S and the checkable forms of its properties.

    (i) H^1(S) against ||Omega^H||_* + C1 rho; (ii) every piece boundary lies in
    S u dOmega_rho, with one outer and ``loops`` inner cycles; (iii) every region cut
    out by S u dOmega_rho contains a piece; (iv) every cell of Omega_rho outside hat_omega
    lies within C1 rho^(q-2) of S; (v) the edges of S u dOmega_rho around each component
    of those cells form one connected graph.

    S is every label interface of the partition. Pieces grown from distinct components
    of hat_omega are never 4-adjacent inside hat_omega, so each edge of S has a cell of
    Omega_rho outside hat_omega on at least one side, i.e. S lies in the closure of
    Omega_rho minus hat_omega. The ``complement`` audit counts the edges of S with both
    sides retained.

    :param partition: labelled partition (pending cells allowed).
    :param hat_omega: boolean cell mask of the retained region.
    :param rho: partition scale.
    :param q_exponent: exponent q of the distance audit.
    :param star_norm: ||Omega^H||_* of the final set.
    """
    lat = partition.lattice
    h = lat.side
    om = partition.omega_rho
    lab = np.where(om, partition.labels, 0)
    S = EdgeSet.interfaces(lab, h, valid=om & (lab > 0))
    boundary = EdgeSet.boundary_of(om, h)
    net = S | boundary
    audits = {}

    c1 = (S.measure - star_norm) / rho
    audits["length"] = {"measured": S.measure, "bound": star_norm, "constant": max(c1, 0.0)}

    loops, flagged = {}, []
    for p in partition.pieces:
        rim = EdgeSet.boundary_of(p.cells, h)
        if not rim.is_subset_of(net):
            flagged.append(p.label)
        loops[p.label] = _inner_loops(p.cells)
    audits["jordan"] = {"pieces": float(len(partition.pieces)), "flagged": float(len(flagged)),
                        "passed": float(not flagged)}

    graph = _cell_graph(om, net)
    n_regions, region_of = csgraph.connected_components(graph, directed=False)
    region_of = region_of.reshape(lab.shape)
    with_piece = set(np.unique(region_of[om & (lab > 0)]).tolist())
    empty = set(np.unique(region_of[om]).tolist()) - with_piece
    audits["cycles"] = {"regions": float(len(set(np.unique(region_of[om]).tolist()))),
                        "empty_regions": float(len(empty)), "passed": float(not empty)}

    retained = om & np.asarray(hat_omega, dtype=bool)
    inside = (S & EdgeSet.inside(retained, h)).count
    audits["complement"] = {"edges": float(S.count), "retained_both_sides": float(inside),
                            "passed": float(inside == 0)}

    excluded = om & ~np.asarray(hat_omega, dtype=bool)
    if excluded.any():
        near = S.adjacent_cells()
        if near.any():
            dist = ndimage.distance_transform_edt(~near) * h
            worst = float(dist[excluded].max())
        else:
            worst = math.inf
    else:
        worst = 0.0
    scale = rho ** (q_exponent - 2)
    audits["distance"] = {"measured": worst, "scale": scale, "constant": worst / scale}

    node_graph, _, _ = _node_graph(net)
    _, node_comp = csgraph.connected_components(node_graph, directed=False)
    n_ex, ex_lab = label_components(excluded)
    split = 0
    for q in range(1, n_ex + 1):
        touching = net & EdgeSet.boundary_of(ex_lab == q, h)
        if touching.is_empty:
            continue
        a, _ = touching.endpoints()
        nx = lat.nx
        comps = np.unique(node_comp[a[:, 0] * (nx + 1) + a[:, 1]])
        if comps.size > 1:
            split += 1
    audits["connected"] = {"components": float(n_ex), "split": float(split), "passed": float(split == 0)}

    if flagged:
        logger.warning("pieces %s have boundary edges outside the separator", flagged)
    return Separator(S, boundary, loops, audits, flagged)
