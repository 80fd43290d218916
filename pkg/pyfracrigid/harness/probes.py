"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from pyfracrigid.Decomposition import Decomposition
from pyfracrigid.engine.config import EngineConfig
from pyfracrigid.fields.energies import Energies
from pyfracrigid.harness.generators import gen_beam, gen_perturbed_rigid, gen_twopiece
from pyfracrigid.rigidity.fits import best_fit_rigid_motion, best_fit_rotation, gradient_residual, rigid_residual
from pyfracrigid.rigidity.harmonic import harmonic_ratio, harmonic_split
from pyfracrigid.utils.utils import LogLogFit, Utils

logger = logging.getLogger(__name__)

R2_FLAG = 0.95


@dataclass(frozen=True)
class ProbePoint:
    parameter: float
    measured: Dict[str, float]


@dataclass(frozen=True)
class ProbeResult:
    """Sweep of one probe with the log-log slope of ``target`` against the parameter."""
    name: str
    parameter_name: str
    target: str
    points: List[ProbePoint]
    fit: LogLogFit
    expected_slope: Optional[float] = None
    flagged: bool = False

    @property
    def fitted_slope(self) -> float:
        return self.fit.slope

    @property
    def confidence_interval(self):
        return self.fit.ci_low, self.fit.ci_high

    def rows(self) -> List[Dict]:
        out = []
        for p in self.points:
            row = {self.parameter_name: p.parameter, **p.measured}
            row.update({"fitted_slope": self.fit.slope, "slope_ci_low": self.fit.ci_low,
                        "slope_ci_high": self.fit.ci_high, "r_squared": self.fit.r_squared,
                        "expected_slope": self.expected_slope, "flagged": self.flagged})
            out.append(row)
        return out

    def to_csv(self, path):
        return Utils.write_csv(path, self.rows())


def _sweep(name: str, parameter_name: str, target: str, values: Sequence[float],
           measure: Callable[[float], Dict[str, float]], expected: Optional[float], threads: int) -> ProbeResult:
    values = [float(v) for v in values]
    if len(values) < 3:
        raise ValueError(f"{name} needs at least three {parameter_name} values, got {len(values)}")
    measured = Utils.ordered_map(measure, values, threads)
    points = [ProbePoint(v, m) for v, m in zip(values, measured)]
    fit = Utils.loglog_fit(values, [m[target] for m in measured])
    flagged = fit.r_squared < R2_FLAG
    if flagged:
        logger.warning("%s: log-log fit with R^2 = %.3f below %.2f", name, fit.r_squared, R2_FLAG)
    logger.info("%s: slope %.4f in [%.4f, %.4f]", name, fit.slope, fit.ci_low, fit.ci_high)
    return ProbeResult(name, parameter_name, target, points, fit, expected, flagged)


def probe_constant(deltas: Sequence[float], cells_per_delta: int = 64, threads: int = 1) -> ProbeResult:
    """
    inf_R ||grad y - R||^2 / ||dist(grad y, SO(2))||^2 on the beam with h = delta / cells_per_delta.

    The ratio grows like delta^-2.
    """
    def measure(delta):
        f = gen_beam(delta, delta / cells_per_delta)
        R = best_fit_rotation(f).R
        num = gradient_residual(f, R)
        den = Energies.cell_energy(f)
        return {"best_residual": num, "energy": den, "ratio": num / den,
                "energy_over_delta3": den / delta ** 3}

    return _sweep("probe_constant", "delta", "ratio", deltas, measure, -2.0, threads)


def probe_example2(eps_list: Sequence[float], cells_per_delta: int = 8, threads: int = 1) -> ProbeResult:
    """Global best-fit residuals of the two-piece field against eps^(1/3)."""
    def measure(eps):
        delta = eps ** (1.0 / 3.0)
        f = gen_twopiece(eps, delta / cells_per_delta)
        R = best_fit_rotation(f).R
        grad = gradient_residual(f, R)
        motion = best_fit_rigid_motion(f)
        values = rigid_residual(f, motion)
        return {"gradient_residual": grad, "value_residual": values,
                "gradient_ratio": grad / delta, "value_ratio": values / delta,
                "energy": Energies.cell_energy(f), "jump_length": f.jumps.length}

    return _sweep("probe_example2", "eps", "gradient_residual", eps_list, measure, 1.0 / 3.0, threads)


def probe_scaling(eps_list: Sequence[float], cells: int = 32, config: Optional[EngineConfig] = None,
                  threads: int = 1) -> ProbeResult:
    """
    ||u||^2 / eps and sum_j ||e(R_j^T grad u)||^2 / eps for R x + c + sqrt(eps) v.

    Both ratios stay bounded as eps decreases; the fitted target is ||u||^2 with slope 1.
    The engine runs at the probed eps; without a config a single step on squares of eight
    cells keeps the perturbation below the carving threshold.
    """
    base = config or EngineConfig(max_steps=1, start_scale_cells=2)

    def measure(eps):
        f = gen_perturbed_rigid(eps, cells)
        rep = Decomposition(dataclasses.replace(base, eps=eps)).run(f, eps=eps).report
        return {"u_L2_sq": rep.u_L2_sq, "sym_strain_sq": rep.sym_strain_sq,
                "u_ratio": rep.u_L2_sq / eps, "sym_ratio": rep.sym_strain_sq / eps,
                "pieces": float(rep.extras["partition"]["pieces"])}

    return _sweep("probe_scaling", "eps", "u_L2_sq", eps_list, measure, 1.0, threads)


def probe_harmonic(deltas: Sequence[float], cells_per_delta: int = 16, threads: int = 1) -> ProbeResult:
    """||grad z|| / ||dist(grad y, SO(2))|| of the harmonic split of the beam over a delta sweep."""
    def measure(delta):
        f = gen_beam(delta, delta / cells_per_delta)
        split = harmonic_split(f)
        ratio = harmonic_ratio(f, split)
        return {"ratio": ratio, "iterations": float(split.iterations), "residual": split.residual}

    result = _sweep("probe_harmonic", "delta", "ratio", deltas, measure, None, threads)
    if any(not math.isfinite(p.measured["ratio"]) for p in result.points):
        logger.warning("probe_harmonic: non-finite ratios in the sweep")
    return result
