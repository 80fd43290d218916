"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

from enum import IntEnum

class ExitCode(IntEnum):
    """Process exit codes of the command line interface."""
    OK= 0
    ERROR= 1
    INFEASIBLE= 2
    IO= 3
    BUDGET= 4
