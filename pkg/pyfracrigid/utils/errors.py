"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""


class PyFracRigidError(Exception):
    """Base class of every error raised by the toolkit."""


class ConfigError(PyFracRigidError, ValueError):
    """Invalid engine configuration."""


class ScheduleInfeasible(ConfigError):
    """
    The scale schedule violates its feasibility chain.

    :param inequality: name of the failing inequality.
    """

    def __init__(self, inequality, message):
        super().__init__(message)
        self.inequality = inequality


class EmptyFitError(PyFracRigidError, ValueError):
    """A fit was requested over a region without usable cells."""


class NoGradientError(PyFracRigidError, ValueError):
    """The requested cell carries no gradient (inactive cell)."""


class HarmonicSolveError(PyFracRigidError, RuntimeError):
    def __init__(self, residual, iterations):
        super().__init__(
            f"Laplace solve did not converge: relative residual {residual:.3e} after {iterations} iterations"
        )
        self.residual = residual
        self.iterations = iterations


class HullPreconditionError(PyFracRigidError, ValueError):
    def __init__(self, pair, message):
        super().__init__(message)
        self.pair = pair


class HealingError(PyFracRigidError, RuntimeError):
    """A cell that has to be healed carries no rigid-motion value."""


class BudgetViolation(PyFracRigidError, RuntimeError):
    def __init__(self, step, inequality, measured, bound):
        super().__init__(
            f"step {step}: {inequality} violated (measured {measured:.6g} > bound {bound:.6g})"
        )
        self.step = step
        self.inequality = inequality
        self.measured = measured
        self.bound = bound
