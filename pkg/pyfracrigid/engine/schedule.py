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
from typing import List, Optional

from pyfracrigid.engine.config import EngineConfig
from pyfracrigid.grid.lattice import Lattice
from pyfracrigid.utils.errors import ConfigError, ScheduleInfeasible

logger = logging.getLogger(__name__)

# The schedule quantities span hundreds of orders of magnitude, so everything is
# kept as natural logarithms; ``value`` converts back when representable.


def _exp(x: float) -> float:
    return math.exp(x) if x < 700 else math.inf


@dataclass(frozen=True)
class ScheduleStep:
    j: int
    log_s: float
    log_eps: float
    log_d: float            # unfloored min{(s_j / eps_j)^r, eps^-omega}
    d_floor: float          # floor(d_j), inf when not representable
    capped: bool            # d_j hit eps^-omega
    log_l: float
    log_lambda: float
    log_k: float
    log_nu: float
    log_t: float
    log_T: float
    log_vartheta: float
    log_q: float
    B: float
    vartheta_ok: bool

    @property
    def s(self) -> float:
        return _exp(self.log_s)

    @property
    def k(self) -> float:
        return _exp(self.log_k)

    @property
    def lam(self) -> float:
        return _exp(self.log_lambda)

    def to_dict(self):
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass(frozen=True)
class ScaleSchedule:
    steps: List[ScheduleStep]
    log_T: float
    log_P: float
    log_kappa: float
    log_eps0: float
    B: float
    J_star: int
    J_hat: int
    identity_ok: bool
    vartheta_ok: bool

    def __len__(self):
        return len(self.steps)

    def __getitem__(self, j) -> ScheduleStep:
        return self.steps[j]

    def to_dict(self):
        return {"log_T": self.log_T, "log_P": self.log_P, "log_kappa": self.log_kappa,
                "log_eps0": self.log_eps0, "B": self.B, "J_star": self.J_star, "J_hat": self.J_hat,
                "identity_ok": self.identity_ok, "vartheta_ok": self.vartheta_ok,
                "steps": [s.to_dict() for s in self.steps]}


def budget_B(cfg: EngineConfig, initial_norm: float, j: Optional[int] = None) -> float:
    """
    B_j = (||W0||_* + C_* rho) sum_{i<j} t^i prod_{i<j} (1 + C_* t^(i+1)); j=None gives the limit B.
    """
    base = initial_norm + cfg.C_star * cfg.rho
    if j is None:
        prod, i = 1.0, 0
        while True:
            factor = cfg.C_star * cfg.t ** (i + 1)
            if factor < 1e-17:
                break
            prod *= 1.0 + factor
            i += 1
        return base / (1.0 - cfg.t) * prod
    total = sum(cfg.t ** i for i in range(j))
    prod = math.prod(1.0 + cfg.C_star * cfg.t ** (i + 1) for i in range(j))
    return base * total * prod


def minimal_log_kappa(cfg: EngineConfig, log_T: float, log_P: float) -> float:
    """Smallest log kappa with q0 T^(1/r) >= T^(-z_bar), given q0 = T P^-1 (kappa rho / c^2)^r."""
    r = cfg.r
    return ((-cfg.z_bar - 1.0 / r - 1.0) * log_T + log_P) / r + math.log(cfg.c_hat ** 2 / cfg.rho)


def make_schedule(cfg: EngineConfig, initial_norm: float = 0.0) -> ScaleSchedule:
    """
    Scale schedule of the iteration, evaluated in log space.

    T = t^(2z+18) makes T <= C_t^-2 t^18 hold for the surrogate C_t = t^-z. The feasibility
    chain q0 T^(1/r) >= T^-z_bar >= T^-1 >= c^4 P^2 > 1 is checked first.

    :param cfg: engine configuration.
    :param initial_norm: ||W0||_* of the initial crack set, entering B.
    :return: ScaleSchedule with steps 0..J*.
    :raises ScheduleInfeasible: naming the failing inequality.
    """
    r, omega, eta = cfg.r, cfg.omega_value, cfg.eta
    log_eps = cfg.log_epsilon
    log_t = math.log(cfg.t)
    log_T = (2.0 * cfg.z + 18.0) * log_t
    B = budget_B(cfg, initial_norm)
    log_P = 2.0 * math.log(cfg.c_hat) + math.log1p(B / cfg.rho)
    log_kappa = (minimal_log_kappa(cfg, log_T, log_P) + 1.0) if cfg.kappa is None else math.log(cfg.kappa)
    log_eps0 = 2.0 * math.log(cfg.c_hat) - math.log(cfg.rho) + log_eps
    log_s0 = log_kappa + log_eps
    log_q0 = log_T - log_P + r * (log_s0 - log_eps0)
    lhs = log_q0 + log_T / r
    chain = [
        ("q0 T^(1/r) > 1", lhs > 0),
        ("q0 T^(1/r) >= T^-z_bar", lhs >= -cfg.z_bar * log_T * (1 + 1e-12)),
        ("T^-z_bar >= T^-1", cfg.z_bar >= 1.0),
        ("T^-1 >= c^4 P^2", -log_T >= 4.0 * math.log(cfg.c_hat) + 2.0 * log_P),
        ("c^4 P^2 > 1", 4.0 * math.log(cfg.c_hat) + 2.0 * log_P > 0),
    ]
    for name, ok in chain:
        if not ok:
            raise ScheduleInfeasible(name, f"epsilon too large for this rho/t: {name} fails")
    cap = -omega * log_eps
    log_T_eps = omega * log_eps / log_T
    J_star = math.ceil(math.log(log_T_eps) / math.log1p(r) + 1.0 / omega)
    if J_star < 0:
        raise ScheduleInfeasible("J* >= 0", f"negative step count {J_star}")
    steps = []
    ls, le = log_s0, log_eps0
    for j in range(J_star + 1):
        log_d = min(r * (ls - le), cap)
        log_Tj = (j + 1) * log_T
        log_tj = (j + 1) * log_t
        log_l = log_d - 2.0 * log_tj
        log_lambda = ls + log_d - log_tj
        log_k = ls + log_l
        log_theta = -ls + le + 9.0 * log_l - 2.0 * cfg.z * log_tj
        le_next = le + log_P - log_Tj
        theta_ok = log_theta <= log_eps0 - 2.0 * math.log(cfg.c_hat) - le_next + log_Tj + 1e-9 * abs(log_theta)
        steps.append(ScheduleStep(
            j=j, log_s=ls, log_eps=le, log_d=log_d,
            d_floor=float(math.floor(_exp(log_d))) if log_d < 700 else math.inf,
            capped=r * (ls - le) >= cap, log_l=log_l, log_lambda=log_lambda, log_k=log_k, log_nu=ls,
            log_t=log_tj, log_T=log_Tj, log_vartheta=log_theta, log_q=log_d - log_P + log_Tj,
            B=budget_B(cfg, initial_norm, j), vartheta_ok=theta_ok))
        ls, le = ls + log_d, le_next
    bound = -(eta / 2.0) * log_eps
    J_hat = -1
    for st in steps:
        if st.log_s - st.log_eps <= bound:
            J_hat = st.j
        else:
            break
    identity_ok = True
    for a, b in zip(steps[:-1], steps[1:]):
        if b.j > J_hat:
            break
        if not math.isclose(b.log_q, log_T + (1.0 + r) * a.log_q, rel_tol=1e-12, abs_tol=1e-12):
            identity_ok = False
            logger.error("q recursion off at step %d: %.17g vs %.17g", b.j, b.log_q,
                         log_T + (1.0 + r) * a.log_q)
    if not identity_ok:
        raise ScheduleInfeasible("q_(j+1) = T q_j^(1+r)", "the q recursion does not hold up to J_hat")
    # the vartheta bound is only asserted up to J_hat
    failing = [st.j for st in steps if st.j <= J_hat and not st.vartheta_ok]
    if failing:
        raise ScheduleInfeasible("vartheta_j <= eps0 T_j / (c^2 eps_(j+1))",
                                 f"vartheta bound fails at steps {failing}")
    vartheta_ok = True
    beyond = [st.j for st in steps if st.j > J_hat and not st.vartheta_ok]
    if beyond:
        logger.debug("vartheta bound not met past J_hat at steps %s", beyond)
    logger.info("schedule: J*=%d, J_hat=%d, log kappa=%.6g", J_star, J_hat, log_kappa)
    return ScaleSchedule(steps, log_T, log_P, log_kappa, log_eps0, B, J_star, J_hat, identity_ok, vartheta_ok)


@dataclass(frozen=True)
class DeskStep:
    """Scales of one engine step on a lattice with cell side h."""
    j: int
    s: float
    eps: float
    lam: float
    k: float
    s_cells: int
    lam_cells: int
    k_cells: int

    def to_dict(self):
        return {"j": self.j, "s": self.s, "eps": self.eps, "lambda": self.lam, "k": self.k}


def desk_ladder(cfg: EngineConfig, lattice: Lattice, schedule: Optional[ScaleSchedule] = None):
    """
    Scales the engine runs: s_j = s0 d^j, lambda_j = d s_j, k_j = l s_j, eps_j = eps g^j.

    Stops before the k-square outgrows the lattice or after ``max_steps``.

    :return: (steps, skipped) with ``skipped`` the number of schedule steps below s0.
    """
    h = lattice.side
    d = cfg.refinement
    steps = []
    for j in range(cfg.max_steps):
        s_cells = cfg.start_scale_cells * d ** j
        k_cells = cfg.carve_ratio * s_cells
        if k_cells > min(lattice.nx, lattice.ny):
            break
        steps.append(DeskStep(j, s_cells * h, cfg.eps * cfg.energy_growth ** j, d * s_cells * h,
                              k_cells * h, s_cells, d * s_cells, k_cells))
    if not steps:
        raise ConfigError(f"lattice {lattice.nx}x{lattice.ny} is too small for a first carving square "
                          f"of {cfg.carve_ratio * cfg.start_scale_cells} cells")
    skipped = 0
    if schedule is not None:
        floor = math.log(cfg.start_scale_cells * h)
        skipped = sum(1 for st in schedule.steps if st.log_s < floor)
    return steps, skipped
