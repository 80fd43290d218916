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
from typing import Optional

import numpy as np

from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.fields.matrices import dist_sq_to_SO2, sym

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Bulk (already divided by eps), surface length and relaxed surface of a Griffith-type energy."""
    bulk: float
    surface: float
    relaxed_surface: float
    epsilon: float
    rho: Optional[float] = None

    @property
    def total(self) -> float:
        return self.bulk + self.surface

    @property
    def relaxed_total(self) -> float:
        return self.bulk + self.relaxed_surface

    def to_dict(self):
        return {"bulk": self.bulk, "surface": self.surface, "relaxed_surface": self.relaxed_surface,
                "epsilon": self.epsilon, "rho": self.rho, "total": self.total,
                "relaxed_total": self.relaxed_total}


@dataclass(frozen=True)
class CurlDefect:
    total: float
    density: np.ndarray  # per interior node, shape (ny-1, nx-1)
    constant: float      # total / (M * H^1(J in region)); NaN without jumps


def _region(f: DeformationField, region) -> np.ndarray:
    if region is None:
        return f.active
    region = np.asarray(region, dtype=bool)
    if region.shape != f.shape:
        raise ValueError("Region mask does not match the field lattice")
    return region & f.active


def _both_sides(cells: np.ndarray):
    ny, nx = cells.shape
    v = np.zeros((ny, nx + 1), dtype=bool)
    h = np.zeros((ny + 1, nx), dtype=bool)
    v[:, 1:nx] = cells[:, 1:] & cells[:, :-1]
    h[1:ny, :] = cells[1:, :] & cells[:-1, :]
    return v, h


class Energies:

    @staticmethod
    def density(f: DeformationField) -> np.ndarray:
        """W(grad y) = dist^2(grad y, SO(2)) per cell, 0 on inactive cells."""
        d = dist_sq_to_SO2(f.gradients)
        return np.where(f.active, np.nan_to_num(d), 0.0)

    @staticmethod
    def linear_density(u: DeformationField) -> np.ndarray:
        """|e(grad u)|^2 per cell, 0 on inactive cells."""
        G = u.gradients
        e = sym(np.nan_to_num(G))
        d = np.sum(e * e, axis=(-2, -1))
        return np.where(u.active & np.all(np.isfinite(G), axis=(-2, -1)), d, 0.0)

    @staticmethod
    def cell_energy(f: DeformationField, region=None) -> float:
        """
        Midpoint rule for the integral of dist^2(grad y, SO(2)) over a region.

        :param f: field.
        :param region: boolean cell mask or None for all active cells.
        :return: energy.
        """
        mask = _region(f, region)
        return float(np.sum(Energies.density(f)[mask])) * f.h ** 2

    @staticmethod
    def griffith_energy(f: DeformationField, eps: float) -> EnergyBreakdown:
        """E_eps(y) = (1/eps) * int W(grad y) + H^1(J_y)."""
        if not eps > 0:
            raise ValueError("eps must be positive")
        bulk = Energies.cell_energy(f) / eps
        surface = f.jumps.length
        return EnergyBreakdown(bulk, surface, surface, eps)

    @staticmethod
    def relaxed_surface_density(amplitude, eps: float, rho: float):
        """f(x) = min(x / (sqrt(eps) rho), 1)."""
        return np.minimum(np.asarray(amplitude, dtype=float) / (math.sqrt(eps) * rho), 1.0)

    @staticmethod
    def _relaxed(f: DeformationField, eps: float, rho: float, mask: np.ndarray, edges=None):
        v, h = _both_sides(mask)
        ev = f.jumps.edges.vertical & v
        eh = f.jumps.edges.horizontal & h
        if edges is not None:
            ev = ev & edges[0]
            eh = eh & edges[1]
        av, ah = f.jumps.amplitudes()
        fv = Energies.relaxed_surface_density(av[ev], eps, rho).mean(axis=-1) if ev.any() else np.zeros(0)
        fh = Energies.relaxed_surface_density(ah[eh], eps, rho).mean(axis=-1) if eh.any() else np.zeros(0)
        relaxed = float(np.sum(fv) + np.sum(fh)) * f.h
        surface = float(ev.sum() + eh.sum()) * f.h
        return surface, relaxed

    @staticmethod
    def relaxed_energy(f: DeformationField, eps: float, rho: float, region=None) -> EnergyBreakdown:
        """
        E^rho_eps(y, U): bulk on U plus the relaxed surface density over jump edges inside U.

        The relaxed density of an edge is the mean of f over its two endpoints; an edge
        belongs to U when both adjacent cells do.
        """
        if not (eps > 0 and rho > 0):
            raise ValueError("eps and rho must be positive")
        mask = _region(f, region)
        bulk = Energies.cell_energy(f, mask) / eps
        surface, relaxed = Energies._relaxed(f, eps, rho, mask)
        return EnergyBreakdown(bulk, surface, relaxed, eps, rho)

    @staticmethod
    def linear_griffith_energy(u: DeformationField, eps: float, rho: Optional[float] = None,
                               region=None) -> EnergyBreakdown:
        """F_eps(u) = (1/eps) int |e(grad u)|^2 + H^1(J_u), relaxed with the same density when rho is given."""
        if not eps > 0:
            raise ValueError("eps must be positive")
        mask = _region(u, region)
        bulk = float(np.sum(Energies.linear_density(u)[mask])) * u.h ** 2 / eps
        if rho is None:
            v, hh = _both_sides(mask)
            surface = float((u.jumps.edges.vertical & v).sum() + (u.jumps.edges.horizontal & hh).sum()) * u.h
            return EnergyBreakdown(bulk, surface, surface, eps)
        surface, relaxed = Energies._relaxed(u, eps, rho, mask)
        return EnergyBreakdown(bulk, surface, relaxed, eps, rho)

    @staticmethod
    def curl_defect(f: DeformationField, region=None) -> CurlDefect:
        """
        Discrete curl of the gradient field.

        Around every interior node whose four cells lie in the region, the gradients
        are integrated along the dual plaquette through the four cell centres. The
        circulation vanishes for continuous fields and equals the signed sum of the
        openings at the crossed edge midpoints otherwise.
        """
        mask = _region(f, region)
        G = np.nan_to_num(f.gradients)
        h = f.h
        A = G[:-1, :-1]  # lower-left cell of each interior node
        B = G[:-1, 1:]
        C = G[1:, 1:]
        D = G[1:, :-1]
        circ = ((A[..., 0] + B[..., 0]) + (B[..., 1] + C[..., 1])
                - (C[..., 0] + D[..., 0]) - (D[..., 1] + A[..., 1])) * (h / 2.0)
        valid = mask[:-1, :-1] & mask[:-1, 1:] & mask[1:, 1:] & mask[1:, :-1]
        density = np.where(valid, np.linalg.norm(circ, axis=-1), 0.0)
        total = float(np.sum(density))
        v, hh = _both_sides(mask)
        jump_len = float((f.jumps.edges.vertical & v).sum() + (f.jumps.edges.horizontal & hh).sum()) * h
        m = f.lipschitz_bound
        constant = total / (m * jump_len) if jump_len > 0 and m > 0 else math.nan
        return CurlDefect(total, density, constant)
