"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

from enum import Enum

class Kinematics(Enum):
    NONLINEAR= 0
    LINEAR= 1
