"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from pyfracrigid.engine.carving import energy_density, piecewise_rotation_map
from pyfracrigid.engine.config import EngineConfig
from pyfracrigid.engine.healing import heal
from pyfracrigid.engine.local_maps import local_rigid_motion_map
from pyfracrigid.engine.schedule import DeskStep, ScaleSchedule, desk_ladder
from pyfracrigid.engine.subatomistic import crack_spacing_below, subatomistic_fit
from pyfracrigid.enums.Kinematics import Kinematics
from pyfracrigid.enums.NormKind import NormKind
from pyfracrigid.enums.TraceEvent import TraceEvent
from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.grid.grid_set import GridSet, extract_components, set_norm
from pyfracrigid.observer.Message import Message
from pyfracrigid.rigidity.harmonic import harmonic_ratio, harmonic_split
from pyfracrigid.utils.errors import BudgetViolation

logger = logging.getLogger(__name__)


def initial_crack_set(f: DeformationField) -> GridSet:
    """
    Active cells minus the plus-side cell (east or north) of every jump edge.

    The field is jump-free inside the returned set; each crack becomes part of a
    complement component.
    """
    ny, nx = f.shape
    mask = np.array(f.active)
    mask &= ~f.jumps.edges.vertical[:, :nx]
    mask &= ~f.jumps.edges.horizontal[:ny, :]
    return extract_components(mask, f.lattice)


@dataclass
class EngineTrace:
    """Per-step records and the cell ledger of one engine run."""
    ladder: List[DeskStep]
    skipped: int
    records: List[Dict] = field(default_factory=list)
    prepass: Optional[Dict] = None
    prepass_rotations: Optional[np.ndarray] = None     # (ny, nx, 2, 2) of the pre-pass, not serialised
    removed: List[int] = field(default_factory=list)
    filled: List[int] = field(default_factory=list)
    ledger_ok: bool = True

    @property
    def carved_total(self) -> int:
        return int(sum(r["carved_cells"] for r in self.records))

    def to_dict(self):
        return {"steps": [s.to_dict() for s in self.ladder], "skipped": self.skipped,
                "records": self.records, "prepass": self.prepass, "removed": self.removed,
                "filled": self.filled, "ledger_ok": self.ledger_ok}


@dataclass(frozen=True, eq=False)
class EngineResult:
    field: DeformationField
    grid_set: GridSet
    trace: EngineTrace
    lam: float


def _publish(observer, what, record):
    if observer is not None:
        observer.sendMessage(Message(what, record))


def iterate(f: DeformationField, W0: GridSet, cfg: EngineConfig, observer=None,
            kinematics: Kinematics = Kinematics.NONLINEAR,
            schedule: Optional[ScaleSchedule] = None) -> EngineResult:
    """
    Run the multiscale engine over the scale ladder.

    Each step splits off the harmonic part on W_j, carves and fits rotations on the
    k-lattices, builds the local rigid motions on the lambda-lattices and heals. The
    next set is the healed region, so W_{j+1} = W_j - removed_j + filled_j.

    :param f: field (a displacement in LINEAR kinematics).
    :param W0: initial set, usually :func:`initial_crack_set`.
    :param cfg: engine configuration.
    :param observer: optional Observer receiving one Message per step.
    :param kinematics: NONLINEAR or LINEAR.
    :param schedule: schedule used to count the steps below the first desk scale.
    :raises BudgetViolation: the star norm grew beyond the per-step bound.
    """
    lat = f.lattice
    ladder, skipped = desk_ladder(cfg, lat, schedule)
    trace = EngineTrace(ladder, skipped)
    if skipped:
        logger.info("%d schedule steps lie below the first desk scale %.4g", skipped, ladder[0].s)
    if cfg.subatomistic_prepass and crack_spacing_below(W0, ladder[0].s_cells):
        fit = subatomistic_fit(f, W0, ladder[0].k, ladder[0].eps, star=cfg.star)
        trace.prepass = fit.to_dict()
        trace.prepass_rotations = fit.rotations
        _publish(observer, TraceEvent.PREPASS, dict(trace.prepass))
        logger.info("crack spacing below s0: sub-grid pre-pass ratio %.4g (%s)", fit.ratio, fit.regime)
    y, W = f, W0
    for step in ladder:
        region = W.mask & y.active
        beta = set_norm(W, NormKind.STAR, cfg.star)
        gamma = float(np.sum(energy_density(y, kinematics)[region])) * lat.side ** 2
        split = harmonic_split(y, region)
        alpha = harmonic_ratio(y, split, region)
        rot = piecewise_rotation_map(y, W, step.k, cfg.m_value, step.eps, step.s, cfg,
                                     fit_field=split.w, kinematics=kinematics)
        star = rot.metrics["star_norm"]
        bound = (1.0 + cfg.budget_c1 * cfg.t) * beta + 8.0 * gamma / (cfg.threshold_c * step.eps)
        if star > bound * (1 + 1e-12) + 1e-15:
            raise BudgetViolation(step.j, "||W'||_* <= (1 + C1 t) ||W||_* + 8 gamma / (c_* eps)", star, bound)
        maps = local_rigid_motion_map(y, rot.grid_set, step.lam, cfg.m_value, cfg, rot.maps, kinematics)
        healed = heal(y, maps.U, maps, step.lam)
        W_next = healed.U_H
        removed = region & ~W_next.mask
        filled = W_next.mask & ~region
        ledger = (region & ~removed) | filled
        ok_cells = bool(np.array_equal(ledger, W_next.mask & y.active))
        ok_count = int(region.sum()) - int(removed.sum()) + int(filled.sum()) == int((W_next.mask & y.active).sum())
        trace.removed.append(int(removed.sum()))
        trace.filled.append(int(filled.sum()))
        trace.ledger_ok = trace.ledger_ok and ok_cells and ok_count
        record = {
            "j": step.j, "s_j": step.s, "eps_j": step.eps, "k_j": step.k, "lambda_j": step.lam,
            "beta": beta, "gamma": gamma, "alpha": alpha,
            "carved_cells": int(sum(r.nx * r.ny for r in rot.carve.squares)),
            "star_norm": star, "star_bound": bound,
            "harmonic_residual": split.residual, "harmonic_iterations": split.iterations,
            "rectangleized": rot.rectangleized, "rectangleize_constant": rot.rectangleize_constant,
            "flagged": rot.flagged,
            "extent_constant": W_next.max_projection() / step.k,
            "removed_cells": int(removed.sum()), "filled_cells": int(filled.sum()),
            "ledger_ok": ok_cells and ok_count,
        }
        record.update({f"rotation_{k}": v for k, v in rot.metrics.items() if k != "star_norm"})
        record.update({f"local_{k}": v for k, v in maps.metrics.items()})
        record.update({f"heal_{k}": v for k, v in healed.metrics.items()})
        trace.records.append(record)
        _publish(observer, TraceEvent.STEP, dict(record))
        logger.info("step %d: s=%.4g k=%.4g lambda=%.4g gamma=%.4g ||W||_*=%.4g carved=%d filled=%d",
                    step.j, step.s, step.k, step.lam, gamma, star, record["carved_cells"], record["filled_cells"])
        y, W = healed.field, W_next
    total_ok = (int((W0.mask & f.active).sum()) - sum(trace.removed) + sum(trace.filled)
                == int((W.mask & f.active).sum()))
    trace.ledger_ok = trace.ledger_ok and total_ok
    if not trace.ledger_ok:
        logger.warning("cell ledger does not balance")
    _publish(observer, TraceEvent.DONE, {"steps": len(trace.records), "ledger_ok": trace.ledger_ok})
    return EngineResult(y, W, trace, ladder[-1].lam)
