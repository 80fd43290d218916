"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import logging
from typing import Optional

from pyfracrigid.Decomposition import Decomposition
from pyfracrigid.engine.config import EngineConfig
from pyfracrigid.enums.Kinematics import Kinematics
from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.partition.report import RigidityReport

logger = logging.getLogger(__name__)


def linear_variant(u_field: DeformationField, eps: float, rho: float, config: Optional[EngineConfig] = None,
                   observer=None) -> RigidityReport:
    """
    Decomposition of a displacement into infinitesimal rigid motions A_j x + c_j.

    Same pipeline as the nonlinear one with projections in place of rotation fits and
    no rounding to rotations. ``u_L2_sq`` of the report is sum_j ||u^ - (A_j x + c_j)||^2
    and ``sym_strain_hat_sq`` is ||e(grad u^)||^2 on Omega_rho.
    """
    result = Decomposition(config, Kinematics.LINEAR, observer).run(u_field, eps, rho)
    return result.report
