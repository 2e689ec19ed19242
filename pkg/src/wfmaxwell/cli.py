"""Command-line interface.

Subcommands:
  mesh        build a structured box mesh and write the ASCII format
  refine      Worsey-Farin refine a mesh file
  assemble    dump the curl-curl and mass matrices of a mesh
  spectrum    run a single eigenvalue computation, CSV to stdout
  experiment  run a scenario (config file plus flag overrides) into a directory
  rates       observed-order calculator on given h and error lists

Exit codes: 0 success, 2 validation failure, 3 resource cap exceeded.
"""

import argparse
import sys

import numpy as np

from . import experiments
from .eig import convergence_rates
from .errors import ProblemTooLargeError, WfMaxwellError
from .fem import assemble_curl_curl, assemble_mass, build_dof_map, quadrature, reference_basis
from .mesh import build_box_mesh, read_mesh, write_mesh
from .wf import validate_wf, worsey_farin_refine

DEFAULT_DOMAIN = "0,3.141592653589793,0,3.141592653589793,0,3.141592653589793"


def _build_parser():
    parser = argparse.ArgumentParser(prog="wfmaxwell", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_mesh = sub.add_parser("mesh", help="build a structured box mesh")
    p_mesh.add_argument("--n", type=int, required=True, help="subdivisions per axis")
    p_mesh.add_argument("--domain", default=DEFAULT_DOMAIN, help="x0,x1,y0,y1,z0,z1")
    p_mesh.add_argument("--out", required=True)

    p_ref = sub.add_parser("refine", help="Worsey-Farin refine a mesh file")
    p_ref.add_argument("--in", dest="infile", required=True)
    p_ref.add_argument("--out", required=True)
    p_ref.add_argument("--report", help="write the validation report here")

    p_asm = sub.add_parser("assemble", help="assemble and dump K and M")
    p_asm.add_argument("--mesh", required=True)
    p_asm.add_argument("--degree", type=int, required=True)
    p_asm.add_argument("--out-k", required=True)
    p_asm.add_argument("--out-m", required=True)

    def add_scenario_flags(p, require_n):
        p.add_argument("--n", type=int, nargs="+", required=require_n)
        p.add_argument("--degree", type=int)
        p.add_argument("--refine", choices=experiments.REFINE_MODES)
        p.add_argument("--bc", choices=experiments.BC_MODES)
        p.add_argument("--num-eigs", type=int)
        p.add_argument("--zero-tol", type=float)
        p.add_argument("--domain")
        p.add_argument("--dense-cap", type=int)

    p_spec = sub.add_parser("spectrum", help="single run, spectrum CSV to stdout")
    add_scenario_flags(p_spec, require_n=True)

    p_exp = sub.add_parser("experiment", help="run a scenario into an output directory")
    p_exp.add_argument("--config", help="flat key = value scenario file")
    add_scenario_flags(p_exp, require_n=False)
    p_exp.add_argument("--out", required=True, help="output directory for the tables")

    p_rates = sub.add_parser("rates", help="observed-order calculator")
    p_rates.add_argument("--h", type=float, nargs="+", required=True)
    p_rates.add_argument("--err", type=float, nargs="+", required=True)

    return parser


def _scenario_from_args(args, config=None):
    merged = dict(config or {})
    overrides = {
        "domain": args.domain,
        "n": args.n,
        "degree": args.degree,
        "refine": args.refine,
        "num_eigs": args.num_eigs,
        "zero_tol": args.zero_tol,
        "bc": args.bc,
        "dense_cap": args.dense_cap,
    }
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    return experiments.make_scenario(merged)


def _cmd_mesh(args):
    box = experiments.parse_domain(args.domain)
    write_mesh(build_box_mesh(box, args.n), args.out)
    return 0


def _cmd_refine(args):
    mesh = read_mesh(args.infile)
    wf = worsey_farin_refine(mesh)
    write_mesh(wf.fine, args.out)
    if args.report:
        with open(args.report, "w") as fh:
            for line in validate_wf(wf).lines():
                fh.write(line + "\n")
    return 0


def _cmd_assemble(args):
    mesh = read_mesh(args.mesh)
    dof = build_dof_map(mesh, args.degree)
    basis = reference_basis(args.degree)
    quad = quadrature(2 * args.degree)
    assemble_curl_curl(mesh, dof, basis, quad).dump(getattr(args, "out_k"))
    assemble_mass(mesh, dof, basis, quad).dump(getattr(args, "out_m"))
    return 0


def _cmd_spectrum(args):
    scenario = _scenario_from_args(args)
    if len(scenario.n_values) != 1:
        raise ValueError("spectrum runs a single mesh size; use experiment for several")
    report = experiments.run_scenario(scenario)
    for line in experiments.spectrum_csv_lines(report.runs[0]):
        print(line)
    return 0


def _cmd_experiment(args):
    config = experiments.load_config(args.config) if args.config else {}
    scenario = _scenario_from_args(args, config)
    report = experiments.run_scenario(scenario)
    for path in experiments.emit_tables(report, args.out):
        print(path)
    return 0


def _cmd_rates(args):
    for rate in convergence_rates(np.asarray(args.h), np.asarray(args.err)):
        print(repr(float(rate)))
    return 0


_COMMANDS = {
    "mesh": _cmd_mesh,
    "refine": _cmd_refine,
    "assemble": _cmd_assemble,
    "spectrum": _cmd_spectrum,
    "experiment": _cmd_experiment,
    "rates": _cmd_rates,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ProblemTooLargeError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except (WfMaxwellError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
