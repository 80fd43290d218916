"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import logging
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from pyfracrigid.engine.config import EngineConfig
from pyfracrigid.engine.iteration import EngineResult, initial_crack_set, iterate
from pyfracrigid.engine.schedule import ScaleSchedule, make_schedule
from pyfracrigid.enums.Kinematics import Kinematics
from pyfracrigid.enums.NormKind import NormKind
from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.fields.energies import Energies
from pyfracrigid.grid.grid_set import set_norm
from pyfracrigid.observer.TraceWriter import TraceWriter
from pyfracrigid.partition.displacement import build_displacement
from pyfracrigid.partition.extension import Extension, assemble_extension
from pyfracrigid.partition.partition import assign_rigid_motions, extract_partition, merge_equivalent_pieces
from pyfracrigid.partition.report import RigidityReport, report, violation_report
from pyfracrigid.partition.separator import Separator, jordan_separator
from pyfracrigid.utils.errors import BudgetViolation
from pyfracrigid.utils.utils import Utils

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    schedule: ScaleSchedule
    engine: EngineResult
    extension: Extension
    displacement: DeformationField
    separator: Separator
    report: RigidityReport

    @property
    def partition(self):
        return self.extension.partition


class Decomposition:
    def __init__(self, config: Optional[EngineConfig] = None, kinematics=Kinematics.NONLINEAR, observer=None):
        """
        Initializes the Decomposition object.

        Parameters:
            config (EngineConfig): engine and assembly parameters (defaults when None).
            kinematics (Kinematics): NONLINEAR for deformations, LINEAR for displacements.
            observer (Observer): optional receiver of the per-step trace messages.
        """
        if not isinstance(kinematics, Kinematics):
            raise ValueError("Invalid kinematics")
        self.config = config or EngineConfig()
        self.kinematics = kinematics
        self.observer = observer

    def run(self, field: DeformationField, eps: Optional[float] = None,
            rho: Optional[float] = None) -> DecompositionResult:
        """
        Engine, partition, extension, displacement, separator and report for one field.

        :raises ScheduleInfeasible: the schedule inequalities fail for this configuration.
        :raises BudgetViolation: the engine's per-step norm bound failed.
        """
        cfg = self.config
        eps = cfg.eps if eps is None else eps
        rho = cfg.rho if rho is None else rho
        W0 = initial_crack_set(field)
        schedule = make_schedule(cfg, set_norm(W0, NormKind.STAR, cfg.star))
        engine = iterate(field, W0, cfg, self.observer, self.kinematics, schedule)
        partition = extract_partition(engine.grid_set, rho, field.active, cfg.boundary_margin)
        partition = assign_rigid_motions(engine.field, partition, self.kinematics, cfg.threads)
        partition = merge_equivalent_pieces(engine.field, partition, engine.lam, cfg.merge_tol, self.kinematics)
        ext = assemble_extension(field, engine.field, partition, eps, cfg.jump_tol, self.kinematics)
        u = build_displacement(ext.field, ext.partition)
        star_final = set_norm(engine.grid_set, NormKind.STAR, cfg.star)
        sep = jordan_separator(ext.partition, engine.grid_set.mask, rho, cfg.q_exponent, star_final)
        p_meas, p_edges = ext.partition.perimeter_check()
        extras = {
            "partition": {"pieces": len(ext.partition.pieces), "total_perimeter": ext.partition.total_perimeter,
                          "perimeter_edges": p_edges, "perimeter_consistent": bool(np.isclose(p_meas, p_edges)),
                          "min_area_constant": ext.partition.min_area_constant(),
                          "filled_cells": int(ext.filled.sum()), "flagged": ext.flagged},
            "part_crack": ext.part_crack,
            "seams": ext.seams,
            "separator": {"length": sep.length, "audits": sep.audits, "loops": sep.loops,
                          "flagged": sep.flagged},
            "engine": {"steps": len(engine.trace.records), "skipped": engine.trace.skipped,
                       "carved_cells": engine.trace.carved_total, "ledger_ok": engine.trace.ledger_ok,
                       "prepass": engine.trace.prepass, "final_star_norm": star_final},
            "schedule": {"J_star": schedule.J_star, "J_hat": schedule.J_hat, "identity_ok": schedule.identity_ok,
                         "vartheta_ok": schedule.vartheta_ok, "log_kappa": schedule.log_kappa},
            "eps": eps,
            "rho": rho,
        }
        if self.kinematics == Kinematics.LINEAR:
            om = ext.partition.omega_rho
            extras["sym_strain_hat_sq"] = float(np.sum(Energies.linear_density(ext.field)[om])) * field.h ** 2
        rep = report(field, ext.field, u, ext.partition, eps, rho, cfg, self.kinematics,
                     omega_y=engine.grid_set.mask, extras=extras)
        logger.info("decomposition: %d pieces, H1(J_u)=%.6g, passed=%s", len(ext.partition.pieces),
                    rep.H1_Ju, rep.passed)
        return DecompositionResult(schedule, engine, ext, u, sep, rep)


def write_outputs(result: DecompositionResult, outdir):
    """report.json, partition.csv, motions.json and separator.csv in ``outdir``."""
    os.makedirs(outdir, exist_ok=True)
    Utils.write_json(os.path.join(outdir, "report.json"), result.report.to_dict())
    Utils.write_label_grid(os.path.join(outdir, "partition.csv"), result.partition.labels)
    Utils.write_json(os.path.join(outdir, "motions.json"), result.partition.motions())
    Utils.write_csv(os.path.join(outdir, "separator.csv"), result.separator.rows(),
                    columns=["orientation", "j", "i", "x0", "y0", "x1", "y1"])


def run_decompose(input_path, outdir, config: Optional[EngineConfig] = None, linear: bool = False) -> DecompositionResult:
    """
    Full pipeline from a field file to the output directory, trace.jsonl included.

    The trace is streamed by a TraceWriter while the engine runs. Outputs are written
    even when a budget flag fails; the caller decides the exit status from the report.
    A per-step BudgetViolation still leaves a failed report.json next to the trace
    before it propagates.
    """
    field = DeformationField.from_json_dict(Utils.read_json(input_path))
    os.makedirs(outdir, exist_ok=True)
    writer = TraceWriter(os.path.join(outdir, "trace.jsonl"))
    kinematics = Kinematics.LINEAR if linear else Kinematics.NONLINEAR
    writer.startLoop()
    try:
        result = Decomposition(config, kinematics, writer).run(field)
    except BudgetViolation as e:
        logger.error("run stopped at step %s: %s", e.step, e)
        Utils.write_json(os.path.join(outdir, "report.json"), violation_report(e, kinematics))
        raise
    finally:
        writer.stopLoop()
    write_outputs(result, outdir)
    return result
