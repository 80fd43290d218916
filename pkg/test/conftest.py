"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import numpy as np
import pytest

from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.grid.lattice import Lattice
from pyfracrigid.rigidity.fits import RigidMotion


@pytest.fixture
def lat16():
    # unit square, h = 1/16
    return Lattice(0.5 / 16, 16, 16)


@pytest.fixture
def rigid_motion():
    return RigidMotion.from_angle(0.4, (0.3, -0.1))


@pytest.fixture
def rigid_field(rigid_motion):
    lat = Lattice(0.5 / 32, 32, 32)
    return DeformationField.from_function(lat, lambda p, _: rigid_motion.apply(p))


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)
