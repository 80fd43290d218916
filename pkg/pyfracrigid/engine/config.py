"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import dataclasses
import json
import logging
import math
import os
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional

from pyfracrigid.grid.grid_set import StarMeasureConfig
from pyfracrigid.utils.errors import ConfigError

logger = logging.getLogger(__name__)

ENV_PREFIX = "PYFRACRIGID_"


@dataclass(frozen=True)
class EngineConfig:
    """
    Parameters of the multiscale engine and of the final assembly.

    The first block drives the scale-schedule algebra, the second the scales the engine
    actually runs on a lattice, the third the assembly and report budgets.
    """
    rho: float = 0.1
    q_exponent: int = 4
    t: float = 0.1
    h_star: float = 0.1
    eta: float = 0.2
    z: float = 4.0                      # C_m = m^-z
    threshold_c: float = 4.0            # c_* of the energy-threshold carving
    m: Optional[float] = None           # None means rho
    eps: float = 1e-4
    c_hat: float = 2.0
    C_star: float = 1.0
    z_bar: float = 1.0
    r: float = 1.0 / 18.0
    omega: Optional[float] = None       # None means eta / 36
    kappa: Optional[float] = None       # None: smallest feasible value times e
    log_eps: Optional[float] = None     # overrides log(eps) in the schedule algebra

    start_scale_cells: int = 4
    refinement: int = 2
    carve_ratio: int = 4
    energy_growth: float = 2.0
    max_steps: int = 8
    coverage_c: float = 4.0
    subatomistic_prepass: bool = True

    merge_tol: float = 1e-8
    jump_tol: float = 1e-9
    boundary_margin: float = 0.0
    budget_c1: float = 1.0
    budget_u: float = 1e3
    budget_sym: float = 1e3
    budget_grad: float = 1e3
    budget_energy: float = 1e3
    budget_part_crack: float = 1e3
    budget_excluded: float = 1e3
    threads: int = 1

    def __post_init__(self):
        checks = [
            (0 < self.rho < 1, "rho must lie in (0, 1)"),
            (int(self.q_exponent) == self.q_exponent and self.q_exponent >= 2, "q_exponent must be an integer >= 2"),
            (0 < self.t <= self.rho, "t must lie in (0, rho]"),
            (0 < self.h_star < 1, "h_star must lie in (0, 1)"),
            (0 < self.eta < 1, "eta must lie in (0, 1)"),
            (self.z >= 0, "z must be non-negative"),
            (self.threshold_c > 0, "threshold_c must be positive"),
            (self.m is None or 0 < self.m <= 1, "m must lie in (0, 1]"),
            (self.eps > 0, "eps must be positive"),
            (self.c_hat >= 1, "c_hat must be >= 1"),
            (self.C_star >= 1, "C_star must be >= 1"),
            (self.r > 0, "r must be positive"),
            (self.omega is None or self.omega > 0, "omega must be positive"),
            (self.kappa is None or self.kappa > 0, "kappa must be positive"),
            (self.log_eps is None or self.log_eps < 0, "log_eps must be negative"),
            (self.start_scale_cells >= 1, "start_scale_cells must be >= 1"),
            (self.refinement >= 2, "refinement must be >= 2"),
            (self.carve_ratio >= 1, "carve_ratio must be >= 1"),
            (self.energy_growth >= 1, "energy_growth must be >= 1"),
            (self.max_steps >= 1, "max_steps must be >= 1"),
            (self.coverage_c > 0, "coverage_c must be positive"),
            (self.merge_tol >= 0 and self.jump_tol >= 0, "tolerances must be non-negative"),
            (self.boundary_margin >= 0, "boundary_margin must be non-negative"),
            (self.budget_c1 >= 0, "budget_c1 must be non-negative"),
            (self.threads >= 1, "threads must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)

    @property
    def m_value(self) -> float:
        return self.rho if self.m is None else self.m

    @property
    def omega_value(self) -> float:
        return self.eta / 36.0 if self.omega is None else self.omega

    @property
    def log_epsilon(self) -> float:
        return math.log(self.eps) if self.log_eps is None else self.log_eps

    @property
    def star(self) -> StarMeasureConfig:
        return StarMeasureConfig(self.h_star)

    def C_m(self, m: Optional[float] = None) -> float:
        """Surrogate C_m = m^-z."""
        return (self.m_value if m is None else m) ** (-self.z)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "EngineConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}")
        try:
            return cls(**{k: _coerce(cls, k, v) for k, v in d.items()})
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(str(e)) from e

    @classmethod
    def from_json(cls, path) -> "EngineConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def with_env_overrides(self, environ: Optional[Mapping[str, str]] = None) -> "EngineConfig":
        """Copy with every field set through a PYFRACRIGID_<FIELD> variable replaced."""
        environ = os.environ if environ is None else environ
        changes = {}
        for f in dataclasses.fields(self):
            key = ENV_PREFIX + f.name.upper()
            if key in environ:
                changes[f.name] = _parse(type(self), f.name, environ[key])
        if changes:
            logger.info("configuration overrides from the environment: %s", sorted(changes))
            try:
                return dataclasses.replace(self, **changes)
            except (TypeError, ValueError) as e:
                if isinstance(e, ConfigError):
                    raise
                raise ConfigError(str(e)) from e
        return self


def _kind(cls, name):
    default = next(f.default for f in dataclasses.fields(cls) if f.name == name)
    if isinstance(default, bool):
        return bool
    if isinstance(default, int):
        return int
    return float


def _coerce(cls, name, value):
    if value is None:
        return None
    kind = _kind(cls, name)
    if kind is int and isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"{name} must be an integer")
    return kind(value)


def _parse(cls, name, text: str):
    text = text.strip()
    if text.lower() in ("none", "null", ""):
        return None
    kind = _kind(cls, name)
    if kind is bool:
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"Invalid boolean for {name}: {text}")
    try:
        value = float(text)
    except ValueError as e:
        raise ConfigError(f"Invalid value for {name}: {text}") from e
    return _coerce(cls, name, value)
