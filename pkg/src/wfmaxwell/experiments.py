"""End-to-end experiment pipeline: mesh, refine, assemble, constrain, solve.

A scenario fixes the domain, the mesh sizes, the element degree, whether
the mesh is Worsey-Farin refined, and the boundary condition. Running it
produces, per mesh size, the computed spectrum compared against the exact
box spectrum, plus observed convergence rates of the first nonzero
eigenvalue across mesh sizes. Runs are deterministic: identical scenarios
produce byte-identical tables.
"""

from dataclasses import dataclass, field

import numpy as np

from .bc import apply_constraints, build_tangential_constraints, identity_constraints
from .eig import (
    DEFAULT_ZERO_TOL,
    DENSE_DIM_CAP,
    compare_spectra,
    convergence_rates,
    exact_eigenvalues,
    rayleigh_residual,
    solve_generalized,
)
from .errors import PipelineCheckError, ProblemTooLargeError
from .fem import assemble_curl_curl, assemble_mass, build_dof_map, quadrature, reference_basis
from .mesh import Box, build_box_mesh, mesh_quality, pi_cube
from .wf import validate_wf, worsey_farin_refine

RESIDUAL_LIMIT = 1e-8
SPURIOUS_WINDOW = (1.5, 2.5)

REFINE_MODES = ("none", "wf")
BC_MODES = ("tangential", "none")


@dataclass
class Scenario:
    box: Box = field(default_factory=pi_cube)
    n_values: tuple = (2,)
    degree: int = 2
    refine: str = "wf"
    num_eigs: int = 13
    zero_tol: float = DEFAULT_ZERO_TOL
    bc: str = "tangential"
    dense_cap: int = DENSE_DIM_CAP

    def __post_init__(self):
        self.n_values = tuple(int(n) for n in self.n_values)
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ValueError("n values must all be >= 1")
        if len(set(self.n_values)) != len(self.n_values):
            raise ValueError("n values must be distinct")
        if not 1 <= int(self.degree) <= 4:
            raise ValueError("degree must be in 1..4")
        if int(self.num_eigs) < 1:
            raise ValueError("num_eigs must be >= 1")
        if float(self.zero_tol) <= 0:
            raise ValueError("zero_tol must be positive")
        if self.refine not in REFINE_MODES:
            raise ValueError(f"refine must be one of {REFINE_MODES}")
        if self.bc not in BC_MODES:
            raise ValueError(f"bc must be one of {BC_MODES}")


@dataclass
class ScenarioRun:
    n: int
    h: float
    h_fine_max: float
    reduced_dim: int
    zero_count: int
    spectrum: object
    comparison: object
    residual_max: float
    num_paired: int


@dataclass
class ExperimentReport:
    scenario: Scenario
    runs: list
    lambda1_errors: list
    rates: np.ndarray | None

    @property
    def h_values(self):
        return [run.h for run in self.runs]


def _run_single(scenario, n):
    mesh = build_box_mesh(scenario.box, n)
    if scenario.refine == "wf":
        wf = worsey_farin_refine(mesh)
        report = validate_wf(wf)
        if not report.passed:
            failing = [k for k, ok in report.checks.items() if not ok]
            raise PipelineCheckError(f"refinement validation failed: {failing}")
        mesh = wf.fine

    k = scenario.degree
    dof = build_dof_map(mesh, k)
    basis = reference_basis(k)
    quad = quadrature(2 * k)
    K = assemble_curl_curl(mesh, dof, basis, quad)
    M = assemble_mass(mesh, dof, basis, quad)

    if scenario.bc == "tangential":
        constraints = build_tangential_constraints(mesh, dof)
    else:
        constraints = identity_constraints(dof)
    K_red, M_red = apply_constraints(K, M, constraints)

    spectrum = solve_generalized(
        K_red,
        M_red,
        zero_tol=scenario.zero_tol,
        num_vectors=scenario.num_eigs,
        dense_cap=scenario.dense_cap,
    )

    num_paired = min(scenario.num_eigs, len(spectrum.nonzero))
    residual_max = 0.0
    if spectrum.vectors is not None and spectrum.vectors.shape[1]:
        V = spectrum.vectors
        gram = V.T @ (M_red @ V)
        ortho = float(np.max(np.abs(gram - np.eye(V.shape[1]))))
        if ortho > RESIDUAL_LIMIT:
            raise PipelineCheckError(f"eigenvector M-orthonormality check failed: {ortho:.3e}")
        for i in range(min(num_paired, V.shape[1])):
            lam = spectrum.values[spectrum.vectors_start + i]
            res = rayleigh_residual(K_red, M_red, lam, V[:, i])
            residual_max = max(residual_max, res)
        if residual_max > RESIDUAL_LIMIT:
            raise PipelineCheckError(f"rayleigh residual check failed: {residual_max:.3e}")

    comparison = None
    if num_paired > 0:
        lengths = scenario.box.extent
        comparison = compare_spectra(
            spectrum, exact_eigenvalues(num_paired, lengths), window=SPURIOUS_WINDOW
        )

    return ScenarioRun(
        n=n,
        h=max(scenario.box.extent) / n,
        h_fine_max=float(mesh_quality(mesh).h.max()),
        reduced_dim=K_red.dim,
        zero_count=spectrum.zero_count,
        spectrum=spectrum,
        comparison=comparison,
        residual_max=residual_max,
        num_paired=num_paired,
    )


def run_scenario(scenario):
    runs = []
    for n in sorted(scenario.n_values):
        try:
            runs.append(_run_single(scenario, n))
        except ProblemTooLargeError as err:
            raise ProblemTooLargeError(
                f"n={n}: {err}", dim=err.dim, cap=err.cap
            ) from err

    lambda1_errors = [
        float(run.comparison.errors[0]) if run.comparison is not None else None
        for run in runs
    ]
    rates = None
    usable = [e for e in lambda1_errors if e is not None]
    if len(runs) >= 2 and len(usable) == len(runs):
        rates = convergence_rates([run.h for run in runs], usable)
    return ExperimentReport(
        scenario=scenario, runs=runs, lambda1_errors=lambda1_errors, rates=rates
    )


# -- table emission ----------------------------------------------------------


def spectrum_csv_lines(run):
    """Spectrum CSV: one row per paired eigenvalue, zero modes in the footer."""
    lines = ["index,lambda_h,lambda_exact,abs_error"]
    if run.comparison is not None:
        comp = run.comparison
        for i in range(len(comp.computed)):
            lines.append(
                f"{i + 1},{comp.computed[i]!r},{comp.exact[i]!r},{comp.errors[i]!r}"
            )
    lines.append(f"zero_count,{run.zero_count}")
    return lines


def rates_csv_lines(report):
    lines = ["h,abs_error_lambda1,rate"]
    for i, run in enumerate(report.runs):
        err = report.lambda1_errors[i]
        err_txt = "" if err is None else repr(err)
        rate_txt = ""
        if i > 0 and report.rates is not None:
            rate_txt = repr(float(report.rates[i - 1]))
        lines.append(f"{run.h!r},{err_txt},{rate_txt}")
    return lines


def emit_tables(report, out_dir):
    """Write one spectrum CSV per mesh size plus rates.csv; returns the paths."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for run in report.runs:
        path = out / f"spectrum_n{run.n}.csv"
        path.write_text("\n".join(spectrum_csv_lines(run)) + "\n")
        paths.append(path)
    rates_path = out / "rates.csv"
    rates_path.write_text("\n".join(rates_csv_lines(report)) + "\n")
    paths.append(rates_path)
    return paths


# -- config files ------------------------------------------------------------

CONFIG_KEYS = ("domain", "n", "degree", "refine", "num_eigs", "zero_tol", "bc", "dense_cap")


def parse_domain(text):
    parts = [float(tok) for tok in text.replace(",", " ").split()]
    if len(parts) != 6:
        raise ValueError("domain needs six numbers: x0,x1,y0,y1,z0,z1")
    x0, x1, y0, y1, z0, z1 = parts
    return Box((x0, y0, z0), (x1, y1, z1))


def load_config(path):
    """Flat `key = value` text file; '#' starts a comment."""
    config = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {raw.rstrip()}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ValueError(f"unknown config key: {key}")
            config[key] = value
    return config


def make_scenario(config):
    """Scenario from a string-valued config dict (file values or CLI overrides)."""
    kwargs = {}
    if "domain" in config:
        kwargs["box"] = parse_domain(config["domain"])
    if "n" in config:
        value = config["n"]
        if isinstance(value, str):
            value = [int(tok) for tok in value.replace(",", " ").split()]
        kwargs["n_values"] = tuple(int(v) for v in value)
    if "degree" in config:
        kwargs["degree"] = int(config["degree"])
    if "refine" in config:
        kwargs["refine"] = str(config["refine"])
    if "num_eigs" in config:
        kwargs["num_eigs"] = int(config["num_eigs"])
    if "zero_tol" in config:
        kwargs["zero_tol"] = float(config["zero_tol"])
    if "bc" in config:
        kwargs["bc"] = str(config["bc"])
    if "dense_cap" in config:
        kwargs["dense_cap"] = int(config["dense_cap"])
    return Scenario(**kwargs)
