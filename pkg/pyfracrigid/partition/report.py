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
from typing import Dict, Optional

import numpy as np

from pyfracrigid.engine.config import EngineConfig
from pyfracrigid.enums.Kinematics import Kinematics
from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.fields.energies import EnergyBreakdown, Energies
from pyfracrigid.fields.matrices import sym
from pyfracrigid.grid.edges import EdgeSet
from pyfracrigid.partition.displacement import essential_jumps
from pyfracrigid.partition.partition import CaccioppoliPartition
from pyfracrigid.utils.errors import BudgetViolation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RigidityReport:
    H1_Ju: float                    # J_u inside Omega_rho only
    H1_Ju_with_boundary: float      # plus the edges of dOmega_rho where u drops to 0
    structural_length: float        # piece-boundary length
    u_L2_sq: float
    sym_strain_sq: float
    grad_u_sq: float
    E_eps_y: EnergyBreakdown
    E_eps_rho_yhat: EnergyBreakdown
    modification_distance: Dict[str, float]
    budget_flags: Dict[str, Dict[str, float]]
    energy_ratio: float
    kinematics: Kinematics = Kinematics.NONLINEAR
    extras: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(bool(flag["passed"]) for flag in self.budget_flags.values())

    def to_dict(self):
        return {
            "H1_Ju": self.H1_Ju,
            "H1_Ju_with_boundary": self.H1_Ju_with_boundary,
            "structural_length": self.structural_length,
            "u_L2_sq": self.u_L2_sq,
            "sym_strain_sq": self.sym_strain_sq,
            "grad_u_sq": self.grad_u_sq,
            "E_eps_y": self.E_eps_y.to_dict(),
            "E_eps_rho_yhat": self.E_eps_rho_yhat.to_dict(),
            "modification_distance": dict(self.modification_distance),
            "budget_flags": {k: dict(v) for k, v in self.budget_flags.items()},
            "energy_ratio": self.energy_ratio,
            "kinematics": self.kinematics.name,
            "passed": self.passed,
            **self.extras,
        }


def _flag(measured: float, bound: float) -> Dict[str, float]:
    return {"measured": measured, "bound": bound, "passed": bool(measured <= bound)}


def _corner_l2(values: np.ndarray, cells: np.ndarray, h: float) -> float:
    v = np.nan_to_num(values[cells])
    return float(np.sum(v * v)) * h ** 2 / 4.0


def report(y_original: DeformationField, yhat: DeformationField, u: DeformationField,
           partition: CaccioppoliPartition, eps: float, rho: float, cfg: Optional[EngineConfig] = None,
           kinematics: Kinematics = Kinematics.NONLINEAR, omega_y: Optional[np.ndarray] = None,
           extras: Optional[Dict[str, object]] = None) -> RigidityReport:
    """
    Metrics of the decomposition and their budget flags.

    Budgets are measured constants: ||u||^2 / eps, sum_j ||e(R_j^T grad u)||^2 / eps,
    ||grad u||^2 / eps^(1 - eta), (E^rho_eps(y^) - E_eps(y)) / rho, the part+crack constant
    (when present in ``extras``) and |Omega_rho minus Omega_y| / rho, each compared with its
    configured bound.

    :param y_original: input field.
    :param yhat: extension y^.
    :param u: displacement.
    :param partition: complete partition with motions.
    :param eps: energy scale.
    :param rho: partition scale.
    :param cfg: budgets; defaults to EngineConfig().
    :param kinematics: LINEAR uses the linearised energies and R_j = Id.
    :param omega_y: retained region for the modification distances (Omega_rho by default).
    :param extras: additional JSON-ready entries copied into the report.
    """
    cfg = cfg or EngineConfig()
    extras = dict(extras or {})
    h = u.h
    om = partition.omega_rho & u.active
    omega_y = om if omega_y is None else np.asarray(omega_y, dtype=bool) & om

    ess = essential_jumps(u, cfg.jump_tol)
    ny, nx = om.shape
    v_any = np.zeros((ny, nx + 1), dtype=bool)
    h_any = np.zeros((ny + 1, nx), dtype=bool)
    v_any[:, 1:nx] = om[:, 1:] | om[:, :-1]
    h_any[1:ny, :] = om[1:, :] | om[:-1, :]
    H1_in = (ess & EdgeSet.inside(om, h)).measure
    H1_all = (ess & EdgeSet(v_any, h_any, h)).measure
    lab = np.where(om, partition.labels, 0)
    structural = EdgeSet.interfaces(lab, h, valid=om & (lab > 0)).measure

    u_sq = _corner_l2(u.corners, om, h)
    G = np.nan_to_num(u.gradients)
    grad_sq = float(np.sum(G[om] ** 2)) * h ** 2
    sym_sq = 0.0
    for p in partition.pieces:
        cells = p.cells & om
        if not cells.any():
            continue
        Gp = G[cells]
        if kinematics == Kinematics.NONLINEAR:
            Gp = np.einsum("ba,nbc->nac", p.motion.R, Gp)
        e = sym(Gp)
        sym_sq += float(np.sum(e * e)) * h ** 2

    if kinematics == Kinematics.LINEAR:
        E_y = Energies.linear_griffith_energy(y_original, eps)
        E_hat = Energies.linear_griffith_energy(yhat, eps, rho, om)
    else:
        E_y = Energies.griffith_energy(y_original, eps)
        E_hat = Energies.relaxed_energy(yhat, eps, rho, om)
    ratio = E_hat.relaxed_total / E_y.total if E_y.total > 0 else (1.0 if E_hat.relaxed_total == 0 else math.inf)

    both = omega_y & y_original.active
    dv = yhat.corners - y_original.corners
    dG = np.nan_to_num(yhat.gradients - y_original.gradients)
    modification = {"values_L2_sq": _corner_l2(dv, both, h),
                    "gradients_L2_sq": float(np.sum(dG[both] ** 2)) * h ** 2}

    excluded = float(np.sum(om & ~omega_y)) * h ** 2
    flags = {
        "u_L2": _flag(u_sq / eps, cfg.budget_u),
        "sym_strain": _flag(sym_sq / eps, cfg.budget_sym),
        "grad_u": _flag(grad_sq / eps ** (1.0 - cfg.eta), cfg.budget_grad),
        "energy": _flag(max(E_hat.relaxed_total - E_y.total, 0.0) / rho, cfg.budget_energy),
        "excluded": _flag(excluded / rho, cfg.budget_excluded),
    }
    if "part_crack" in extras:
        flags["part_crack"] = _flag(float(extras["part_crack"]["constant"]), cfg.budget_part_crack)
    chain_fail = [p.label for p in partition.pieces if p.chain is not None and not p.chain["passed"]]
    flags["chain"] = _flag(float(len(chain_fail)), 0.0)
    out = RigidityReport(H1_in, H1_all, structural, u_sq, sym_sq, grad_sq, E_y, E_hat, modification,
                         flags, ratio, kinematics, extras)
    if not out.passed:
        logger.warning("budget flags failed: %s", sorted(k for k, v in flags.items() if not v["passed"]))
    return out


def violation_report(error: BudgetViolation, kinematics: Kinematics = Kinematics.NONLINEAR) -> Dict[str, object]:
    """
    report.json content of a run stopped by a per-step budget violation.

    No partition exists at that point; the failing step and inequality are recorded
    under ``budget_violation`` and as the only (failed) budget flag.
    """
    measured, bound = float(error.measured), float(error.bound)
    return {
        "kinematics": kinematics.name,
        "budget_violation": {"step": error.step, "inequality": error.inequality,
                             "measured": measured, "bound": bound},
        "budget_flags": {"step_budget": {"measured": measured, "bound": bound, "passed": False}},
        "passed": False,
    }
