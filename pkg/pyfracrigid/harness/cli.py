"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import argparse
import dataclasses
import json
import logging
import os
import sys

from pyfracrigid.Decomposition import run_decompose
from pyfracrigid.engine.config import EngineConfig
from pyfracrigid.enums.ExitCode import ExitCode
from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.fields.energies import Energies
from pyfracrigid.harness.generators import gen_beam, gen_piecewise_rigid, gen_twopiece
from pyfracrigid.harness.probes import probe_constant, probe_example2, probe_harmonic, probe_scaling
from pyfracrigid.utils.errors import BudgetViolation, ConfigError, PyFracRigidError
from pyfracrigid.utils.utils import Utils

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pyfracrigid",
                                 description="Piecewise rigid decomposition of cracked deformation fields.")
    ap.add_argument("--threads", type=int, default=1, help="Cap on parallel sweep points")
    ap.add_argument("--log-level", default=os.environ.get("PYFRACRIGID_LOG_LEVEL", "WARNING"),
                    help="Logging level (DEBUG, INFO, WARNING, ...)")
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate an example field")
    gsub = gen.add_subparsers(dest="kind", required=True)
    beam = gsub.add_parser("beam", help="Thin beam (0,1) x (0,delta)")
    beam.add_argument("--delta", type=float, required=True)
    beam.add_argument("--h", type=float, required=True)
    beam.add_argument("-o", "--output", required=True)
    two = gsub.add_parser("twopiece", help="Beam of height eps^(1/3) inside a rigid ambient box")
    two.add_argument("--eps", type=float, required=True)
    two.add_argument("--h", type=float, required=True)
    two.add_argument("--margin", type=float, default=0.25)
    two.add_argument("-o", "--output", required=True)
    pw = gsub.add_parser("pwrigid", help="Random piecewise rigid field")
    pw.add_argument("--seed", type=int, required=True)
    pw.add_argument("--pieces", type=int, required=True)
    pw.add_argument("--cells", type=int, default=64)
    pw.add_argument("-o", "--output", required=True)
    pw.add_argument("--labels", help="Optional CSV for the ground-truth labels")

    probe = sub.add_parser("probe", help="Constant-scaling sweeps")
    psub = probe.add_subparsers(dest="kind", required=True)
    pc = psub.add_parser("constant", help="Rigidity constant of the beam against delta")
    pc.add_argument("--deltas", required=True, help="Comma separated, e.g. 0.2,0.1,0.05")
    pc.add_argument("--cells-per-delta", type=int, default=64)
    pc.add_argument("-o", "--output", required=True)
    pe = psub.add_parser("example2", help="Global fit residuals of the two-piece field against eps")
    pe.add_argument("--eps-list", required=True)
    pe.add_argument("--cells-per-delta", type=int, default=8)
    pe.add_argument("-o", "--output", required=True)
    ps = psub.add_parser("scaling", help="Decomposition metrics of R x + c + sqrt(eps) v")
    ps.add_argument("--eps-list", required=True)
    ps.add_argument("--cells", type=int, default=32)
    ps.add_argument("-c", "--config")
    ps.add_argument("-o", "--output", required=True)
    ph = psub.add_parser("harmonic", help="Harmonic split ratio of the beam against delta")
    ph.add_argument("--deltas", required=True)
    ph.add_argument("--cells-per-delta", type=int, default=16)
    ph.add_argument("-o", "--output", required=True)

    dec = sub.add_parser("decompose", help="Run the engine and the assembly on a field file")
    dec.add_argument("-i", "--input", required=True)
    dec.add_argument("-c", "--config")
    dec.add_argument("-o", "--output", required=True, help="Output directory")
    dec.add_argument("--linear", action="store_true", help="Treat the field as a displacement")

    en = sub.add_parser("energy", help="Print the Griffith energies of a field")
    en.add_argument("-i", "--input", required=True)
    en.add_argument("--eps", type=float, required=True)
    en.add_argument("--rho", type=float, required=True)
    return ap


def load_config(path, threads: int = 1) -> EngineConfig:
    cfg = EngineConfig.from_json(path) if path else EngineConfig()
    cfg = cfg.with_env_overrides()
    return cfg if threads == cfg.threads else dataclasses.replace(cfg, threads=threads)


def _gen(args) -> int:
    if args.kind == "beam":
        f = gen_beam(args.delta, args.h)
    elif args.kind == "twopiece":
        f = gen_twopiece(args.eps, args.h, args.margin)
    else:
        f, labels, _ = gen_piecewise_rigid(args.seed, args.pieces, args.cells)
        if args.labels:
            Utils.write_label_grid(args.labels, labels)
    Utils.write_json(args.output, f.to_json_dict())
    return ExitCode.OK


def _probe(args) -> int:
    if args.kind == "constant":
        res = probe_constant(Utils.parse_float_list(args.deltas), args.cells_per_delta, args.threads)
    elif args.kind == "example2":
        res = probe_example2(Utils.parse_float_list(args.eps_list), args.cells_per_delta, args.threads)
    elif args.kind == "scaling":
        cfg = load_config(args.config) if args.config else None
        res = probe_scaling(Utils.parse_float_list(args.eps_list), args.cells, cfg, args.threads)
    else:
        res = probe_harmonic(Utils.parse_float_list(args.deltas), args.cells_per_delta, args.threads)
    res.to_csv(args.output)
    return ExitCode.OK


def _decompose(args) -> int:
    cfg = load_config(args.config, args.threads)
    result = run_decompose(args.input, args.output, cfg, args.linear)
    return ExitCode.OK if result.report.passed else ExitCode.BUDGET


def _energy(args) -> int:
    f = DeformationField.from_json_dict(Utils.read_json(args.input))
    out = {"griffith": Energies.griffith_energy(f, args.eps).to_dict(),
           "relaxed": Energies.relaxed_energy(f, args.eps, args.rho).to_dict(),
           "linear": Energies.linear_griffith_energy(f, args.eps, args.rho).to_dict(),
           "jump_edges": f.jumps.count, "jump_length": f.jumps.length}
    print(json.dumps(Utils.to_jsonable(out), sort_keys=True))
    return ExitCode.OK


COMMANDS = {"gen": _gen, "probe": _probe, "decompose": _decompose, "energy": _energy}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        return int(COMMANDS[args.command](args))
    except BudgetViolation as e:
        logger.error("budget violation: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return int(ExitCode.BUDGET)
    except ConfigError as e:
        logger.error("infeasible configuration: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return int(ExitCode.INFEASIBLE)
    except (OSError, json.JSONDecodeError, KeyError) as e:
        logger.error("i/o failure: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return int(ExitCode.IO)
    except (PyFracRigidError, ValueError) as e:
        logger.error("processing failure: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return int(ExitCode.ERROR)


if __name__ == "__main__":
    sys.exit(main())
