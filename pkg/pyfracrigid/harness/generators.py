"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import logging
import math
from typing import List, Tuple

import numpy as np

from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.grid.lattice import CellRect, Lattice
from pyfracrigid.rigidity.fits import RigidMotion

logger = logging.getLogger(__name__)

MIN_PIECE_CELLS = 8
MAX_RETRIES = 32


def beam_map(x: np.ndarray) -> np.ndarray:
    """(x2 + 1) (sin x1, cos x1)"""
    x = np.asarray(x, dtype=float)
    r = x[..., 1] + 1.0
    return np.stack([r * np.sin(x[..., 0]), r * np.cos(x[..., 0])], axis=-1)


def smooth_perturbation(x: np.ndarray) -> np.ndarray:
    """Fixed smooth field v used by the scaling probes."""
    x = np.asarray(x, dtype=float)
    return np.stack([np.sin(np.pi * x[..., 0]) * np.sin(np.pi * x[..., 1]),
                     np.cos(np.pi * x[..., 0]) * x[..., 1] ** 2], axis=-1)


def _cells(length: float, h: float, name: str) -> int:
    n = int(round(length / h))
    if n < 1:
        raise ValueError(f"{name} spans no cell at h = {h}")
    return n


def gen_beam(delta: float, h: float) -> DeformationField:
    """
    Beam map on (0, 1) x (0, delta), evaluated at the lattice nodes, without jumps.

    :raises ValueError: h > delta / 8.
    """
    if not (delta > 0 and 0 < h <= delta / 8.0 * (1 + 1e-12)):
        raise ValueError(f"h must lie in (0, delta/8] = (0, {delta / 8.0}], got {h}")
    lat = Lattice(h / 2.0, _cells(1.0, h, "unit length"), _cells(delta, h, "delta"))
    f = DeformationField.from_function(lat, lambda p, _: beam_map(p))
    logger.info("beam: delta=%.4g h=%.4g (%d x %d cells)", delta, h, lat.nx, lat.ny)
    return f


def gen_twopiece(eps: float, h: float, margin: float = 0.25) -> DeformationField:
    """
    Beam U = (0, 1) x (0, eps^(1/3)) inside the ambient box (-margin, 1 + margin) x (-margin, delta + margin).

    Outside U the field is id + e2. delta = eps^(1/3) is snapped to the nearest multiple of h
    and the margin to a multiple of h. The left side of U, where both maps agree, carries
    no jump.

    :raises ValueError: h > delta / 8.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    delta = eps ** (1.0 / 3.0)
    if not 0 < h <= delta / 8.0 * (1 + 1e-12):
        raise ValueError(f"h must lie in (0, eps^(1/3)/8] = (0, {delta / 8.0}], got {h}")
    nd = _cells(delta, h, "eps^(1/3)")
    nm = int(round(margin / h))
    nb = _cells(1.0, h, "unit length")
    lat = Lattice(h / 2.0, nb + 2 * nm, nd + 2 * nm, 4, (-nm * h, -nm * h))
    labels = np.zeros(lat.shape, dtype=np.int64)
    labels[nm:nm + nd, nm:nm + nb] = 1

    def func(p, label):
        if label == 1:
            return beam_map(p)
        return p + np.array([0.0, 1.0])

    f = DeformationField.from_function(lat, func, labels)
    logger.info("two-piece field: eps=%.3g delta=%.4g h=%.4g, %d jump edges", eps, nd * h, h, f.jumps.count)
    return f


def _guillotine(rng: np.random.Generator, n_pieces: int, cells: int, min_cells: int) -> List[CellRect]:
    rects = [CellRect(0, 0, cells, cells)]
    while len(rects) < n_pieces:
        order = sorted(range(len(rects)), key=lambda q: (-(rects[q].nx * rects[q].ny), q))
        for q in order:
            r = rects[q]
            vertical = r.nx >= r.ny if rng.random() < 0.75 else r.nx < r.ny
            span = r.nx if vertical else r.ny
            if span < 2 * min_cells:
                vertical = not vertical
                span = r.nx if vertical else r.ny
            if span < 2 * min_cells:
                continue
            cut = int(rng.integers(min_cells, span - min_cells + 1))
            if vertical:
                a, b = CellRect(r.i0, r.j0, r.i0 + cut, r.j1), CellRect(r.i0 + cut, r.j0, r.i1, r.j1)
            else:
                a, b = CellRect(r.i0, r.j0, r.i1, r.j0 + cut), CellRect(r.i0, r.j0 + cut, r.i1, r.j1)
            rects[q:q + 1] = [a, b]
            break
        else:
            return []
    return rects


def random_motion(rng: np.random.Generator) -> RigidMotion:
    """Angle uniform on (-pi, pi), translation uniform in [-1/2, 1/2]^2."""
    return RigidMotion.from_angle(float(rng.uniform(-math.pi, math.pi)), rng.uniform(-0.5, 0.5, size=2))


def gen_piecewise_rigid(seed: int, n_pieces: int, cells: int = 64,
                        min_cells: int = MIN_PIECE_CELLS) -> Tuple[DeformationField, np.ndarray, List[RigidMotion]]:
    """
    Unit square split by guillotine slits into ``n_pieces`` rectangles, each moved rigidly.

    :param seed: 64-bit seed.
    :param n_pieces: number of pieces, >= 1.
    :param cells: cells per side.
    :param min_cells: smallest piece side in cells.
    :return: (field, ground-truth labels 1..n, motions by label - 1)
    :raises ValueError: no admissible split after the bounded retries.
    """
    if n_pieces < 1:
        raise ValueError("n_pieces must be >= 1")
    rng = np.random.default_rng(seed)
    rects = []
    for attempt in range(MAX_RETRIES):
        rects = _guillotine(rng, n_pieces, cells, min_cells)
        if rects:
            break
        logger.debug("degenerate split at attempt %d, drawing again", attempt)
    if not rects:
        raise ValueError(f"cannot split {cells}x{cells} cells into {n_pieces} pieces of side >= {min_cells}")
    lat = Lattice(0.5 / cells, cells, cells)
    labels = np.zeros(lat.shape, dtype=np.int64)
    for q, r in enumerate(rects, start=1):
        labels[r.slices] = q
    motions = [random_motion(rng) for _ in rects]
    f = DeformationField.from_function(lat, lambda p, label: motions[label - 1].apply(p), labels)
    logger.info("piecewise rigid field: seed=%d, %d pieces on %d x %d cells", seed, n_pieces, cells, cells)
    return f, labels, motions


def gen_perturbed_rigid(eps: float, cells: int = 32, angle: float = 0.3,
                        shift=(0.1, -0.2)) -> DeformationField:
    """R x + c + sqrt(eps) v on the unit square with the fixed smooth v."""
    lat = Lattice(0.5 / cells, cells, cells)
    motion = RigidMotion.from_angle(angle, shift)
    root = math.sqrt(eps)
    return DeformationField.from_function(lat, lambda p, _: motion.apply(p) + root * smooth_perturbation(p))
