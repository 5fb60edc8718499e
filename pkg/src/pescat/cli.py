"""Command-line front end: JSON ingestion, pipeline orchestration, CSV output.

Subcommands:

    complete   recover the j-unitary W from a reflection problem file
    scatter    scattering coefficients of a parameter problem file
    potential  potential values and singularity report
    invert     reflection coefficient -> recovered parameters and potential
    roundtrip  direct-then-inverse identity check of a parameter file
    verify     closed forms against the direct ODE integration oracle

Exit codes: 0 success, 2 input/validation error, 3 numerical/convergence
error.  Output files are byte stable: fixed key order, floats at 17
significant digits, no timestamps.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .completion import ParameterSet, build_W, check_j_unitarity, extract_R_from_W, parameters_from_reflection
from .dirac import PotentialEvaluator, find_singularities, potential_v, scattering_coefficients
from .errors import (
    ImproperEntry,
    LimitNotConverged,
    NoConvergence,
    NonConvergence,
    NotAdmissible,
    NotContractive,
    NotMonic,
    PescatError,
    PoleProximity,
    RealSpectrumUnresolved,
    Singular,
    SingularAt,
    SingularPotential,
    SpectraOverlap,
    SwapFailure,
)
from .inverse import invert_from_reflection, roundtrip_check
from .matnum import fnorm
from .odeverify import derivative_check, numeric_reflection
from .realization import (
    RationalRealization,
    contractive_on_real_line,
    evaluate,
    max_pointwise_gap,
    mcmillan_degree,
    minimal_reduce,
    probe_grid,
)

VALIDATION_ERRORS = (NotContractive, NotAdmissible, NotMonic, ImproperEntry, ValueError)
NUMERICAL_ERRORS = (
    RealSpectrumUnresolved,
    LimitNotConverged,
    NonConvergence,
    NoConvergence,
    SpectraOverlap,
    SwapFailure,
    Singular,
    PoleProximity,
    SingularPotential,
    SingularAt,
)


# ---------------------------------------------------------------------------
# deterministic serialization


def _fmt_float(x: float) -> str:
    if not np.isfinite(x):
        raise ValueError("refusing to serialize non-finite number")
    return format(float(x), ".17g")


def dumps_stable(obj, indent: int = 0) -> str:
    """JSON text with fixed formatting (17 significant digits for floats)."""
    pad = "  " * indent
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = ", ".join(dumps_stable(v, indent) for v in obj)
        if len(inner) <= 72 and "\n" not in inner:
            return f"[{inner}]"
        body = ",\n".join(pad + "  " + dumps_stable(v, indent + 1) for v in obj)
        return "[\n" + body + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        body = ",\n".join(
            pad + "  " + json.dumps(str(k)) + ": " + dumps_stable(v, indent + 1)
            for k, v in obj.items()
        )
        return "{\n" + body + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def write_json(path: Path, obj) -> None:
    path.write_text(dumps_stable(obj) + "\n")


def matrix_to_json(M: np.ndarray) -> list:
    M = np.atleast_2d(np.asarray(M, complex))
    return [
        [[float(entry.real), float(entry.imag)] for entry in row] for row in M
    ]


def matrix_from_json(obj, name: str) -> np.ndarray:
    if not isinstance(obj, list):
        raise ValueError(f"{name}: expected a nested array")
    if not obj:
        return np.zeros((0, 0), complex)
    rows = []
    width = None
    for row in obj:
        if not isinstance(row, list):
            raise ValueError(f"{name}: expected rows of [re, im] pairs")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValueError(f"{name}: ragged rows")
        entries = []
        for cell in row:
            if (
                not isinstance(cell, list)
                or len(cell) != 2
                or not all(isinstance(z, (int, float)) and not isinstance(z, bool) for z in cell)
            ):
                raise ValueError(f"{name}: entries must be [re, im] number pairs")
            entries.append(complex(cell[0], cell[1]))
        rows.append(entries)
    A = np.array(rows, dtype=complex)
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name}: non-finite entries")
    return A


def realization_to_json(F: RationalRealization) -> dict:
    return {
        "m1": F.in_dim,
        "m2": F.out_dim,
        "n": F.n,
        "D": matrix_to_json(F.D),
        "C": matrix_to_json(F.C),
        "A": matrix_to_json(F.A),
        "B": matrix_to_json(F.B),
    }


# ---------------------------------------------------------------------------
# problem files


@dataclass
class Tolerances:
    residual: float = 1e-9
    grid: float = 1e-8
    oracle: float = 1e-4


@dataclass
class GridSpec:
    lambda_min: float
    lambda_max: float
    lambda_points: int
    x_max: float
    x_points: int

    def __post_init__(self):
        if self.lambda_points < 2 or self.x_points < 2:
            raise ValueError("grid needs at least two points per axis")
        if not self.lambda_max > self.lambda_min:
            raise ValueError("lambda_max must exceed lambda_min")
        if not self.x_max > 0:
            raise ValueError("x_max must be positive")

    def lambdas(self) -> np.ndarray:
        return np.linspace(self.lambda_min, self.lambda_max, self.lambda_points)

    def xs(self) -> np.ndarray:
        return np.linspace(0.0, self.x_max, self.x_points)


@dataclass
class ProblemFile:
    kind: str
    m1: int
    m2: int
    matrices: dict
    tolerances: dict

    def reflection(self) -> RationalRealization:
        A = self.matrices["A"]
        n = A.shape[0]
        B = self.matrices["B"]
        C = self.matrices["C"]
        if B.size == 0:
            B = np.zeros((n, self.m1), complex)
        if C.size == 0:
            C = np.zeros((self.m2, n), complex)
        return RationalRealization(
            D=np.zeros((self.m2, self.m1), complex), C=C, A=A, B=B
        )

    def parameters(self) -> ParameterSet:
        alpha = self.matrices["alpha"]
        n = alpha.shape[0]
        g1 = self.matrices["gamma1"]
        g = self.matrices["gamma"]
        if g1.size == 0:
            g1 = np.zeros((n, self.m1), complex)
        if g.size == 0:
            g = np.zeros((n, self.m2), complex)
        return ParameterSet(alpha=alpha, S0=self.matrices["S0"], gamma1=g1, gamma=g)


def load_problem(path: str) -> ProblemFile:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValueError(f"cannot read problem file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"problem file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValueError("problem file must be a JSON object")
    kind = raw.get("kind")
    if kind not in ("reflection", "parameters"):
        raise ValueError('problem "kind" must be "reflection" or "parameters"')
    try:
        m1 = int(raw["m1"])
        m2 = int(raw["m2"])
    except (KeyError, TypeError) as exc:
        raise ValueError("problem file needs integer m1 and m2") from exc
    if m1 < 0 or m2 < 0:
        raise ValueError("m1 and m2 must be nonnegative")
    keys = ("A", "B", "C") if kind == "reflection" else ("alpha", "S0", "gamma1", "gamma")
    matrices = {}
    for key in keys:
        if key not in raw:
            raise ValueError(f'problem file is missing matrix "{key}"')
        matrices[key] = matrix_from_json(raw[key], key)
    square = matrices["A"] if kind == "reflection" else matrices["alpha"]
    n = square.shape[0]
    if square.shape != (n, n):
        raise ValueError("state matrix must be square")
    shape_contract = (
        {"B": (n, m1), "C": (m2, n)}
        if kind == "reflection"
        else {"S0": (n, n), "gamma1": (n, m1), "gamma": (n, m2)}
    )
    for key, shape in shape_contract.items():
        got = matrices[key].shape
        if got != shape and matrices[key].size != 0:
            raise ValueError(f'matrix "{key}" must be {shape[0]}x{shape[1]}, got {got}')
    tols = raw.get("tolerances", {})
    if not isinstance(tols, dict):
        raise ValueError('"tolerances" must be a table')
    return ProblemFile(kind=kind, m1=m1, m2=m2, matrices=matrices, tolerances=tols)


def resolve_tolerances(problem: ProblemFile, args) -> Tolerances:
    t = Tolerances()
    for key in ("residual", "grid", "oracle"):
        if key in problem.tolerances:
            setattr(t, key, float(problem.tolerances[key]))
    # flags win over the problem-file table
    if args.tol_residual is not None:
        t.residual = args.tol_residual
    if args.tol_grid is not None:
        t.grid = args.tol_grid
    if args.tol_oracle is not None:
        t.oracle = args.tol_oracle
    return t


def parameters_to_problem_json(p: ParameterSet) -> dict:
    return {
        "kind": "parameters",
        "m1": p.m1,
        "m2": p.m2,
        "alpha": matrix_to_json(p.alpha),
        "S0": matrix_to_json(p.S0),
        "gamma1": matrix_to_json(p.gamma1),
        "gamma": matrix_to_json(p.gamma),
    }


def _csv_lines(header: str, rows) -> str:
    out = [header]
    for row in rows:
        out.append(",".join(_fmt_float(x) if isinstance(x, float) else str(x) for x in row))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_complete(problem: ProblemFile, grid: GridSpec, tols: Tolerances, out: Path) -> int:
    if problem.kind != "reflection":
        raise ValueError('complete expects a problem of kind "reflection"')
    R = minimal_reduce(problem.reflection())
    if not contractive_on_real_line(R):
        raise NotContractive("not contractive on real line")
    params = parameters_from_reflection(R, tol=tols.residual)
    W = build_W(params)
    R_back = extract_R_from_W(W)
    report = check_j_unitarity(W, params.signature)
    deg_R = R.n
    deg_W = mcmillan_degree(W)
    if R.n:
        gap_grid = probe_grid(
            np.concatenate([R.poles(), R_back.poles()]),
            guard=1e-3 * max(1.0, fnorm(R.A)),
        )
    else:
        gap_grid = np.linspace(-5.0, 5.0, 9)
    roundtrip_gap = max_pointwise_gap(R, R_back, gap_grid)
    passed = (
        report.metric_defect <= tols.grid
        and report.block_defect <= tols.grid
        and roundtrip_gap <= tols.grid
        and deg_R == deg_W
    )
    write_json(out / "parameters.json", parameters_to_problem_json(params))
    write_json(out / "W_realization.json", realization_to_json(W))
    write_json(
        out / "checks.json",
        {
            "j_unitarity_max_defect": report.metric_defect,
            "block_identity_max_defect": report.block_defect,
            "roundtrip_max_gap": roundtrip_gap,
            "mcmillan_degree_R": deg_R,
            "mcmillan_degree_W": deg_W,
            "tolerance": tols.grid,
            "passed": passed,
        },
    )
    return 0


def cmd_scatter(problem: ProblemFile, grid: GridSpec, tols: Tolerances, out: Path) -> int:
    if problem.kind != "parameters":
        raise ValueError('scatter expects a problem of kind "parameters"')
    params = problem.parameters()
    params.require_admissible()
    sc = scattering_coefficients(params)
    unit = sc.unitarity_defect()
    fact = sc.factorization_defect()
    write_json(
        out / "coefficients.json",
        {
            "T_L": realization_to_json(sc.T_L),
            "R_L": realization_to_json(sc.R_L),
            "T_R": realization_to_json(sc.T_R),
            "R_R": realization_to_json(sc.R_R),
            "chi": realization_to_json(sc.chi),
            "kappa": {
                "mode": sc.kappa.mode.value,
                "value": matrix_to_json(sc.kappa.value),
                "convergence_diagnostic": float(sc.kappa.convergence_diagnostic),
            },
            "unitarity_max_defect": unit,
            "factorization_max_defect": fact,
            "tolerance": tols.grid,
            "passed": unit <= tols.grid and fact <= tols.grid,
        },
    )
    blocks = (("T_L", sc.T_L), ("R_L", sc.R_L), ("T_R", sc.T_R), ("R_R", sc.R_R))
    rows = []
    for lam in grid.lambdas():
        vals = []
        try:
            for _, F in blocks:
                vals.append(evaluate(F, complex(lam)))
        except PoleProximity:
            continue
        for (name, _), val in zip(blocks, vals):
            for i in range(val.shape[0]):
                for j in range(val.shape[1]):
                    rows.append(
                        (float(lam), name, i, j, float(val[i, j].real), float(val[i, j].imag))
                    )
    (out / "scattering_grid.csv").write_text(
        _csv_lines("lambda,block,row,col,re,im", rows)
    )
    return 0


def cmd_potential(problem: ProblemFile, grid: GridSpec, tols: Tolerances, out: Path) -> int:
    if problem.kind != "parameters":
        raise ValueError('potential expects a problem of kind "parameters"')
    params = problem.parameters()
    pe = PotentialEvaluator(params)
    rows = []
    skipped = []
    for x in grid.xs():
        val = potential_v(pe, float(x))
        if isinstance(val, SingularAt):
            skipped.append({"x": float(x), "cond": float(val.cond)})
            continue
        for i in range(val.shape[0]):
            for j in range(val.shape[1]):
                rows.append((float(x), i, j, float(val[i, j].real), float(val[i, j].imag)))
    (out / "potential.csv").write_text(_csv_lines("x,row,col,re,im", rows))
    brackets = find_singularities(pe, grid.x_max)
    write_json(
        out / "singularities.json",
        {
            "threshold": pe.singularity_threshold,
            "singularities": [
                {"x": b.x, "bracket": [b.lo, b.hi]} for b in brackets
            ],
            "skipped_grid_points": skipped,
        },
    )
    return 0


def cmd_invert(problem: ProblemFile, grid: GridSpec, tols: Tolerances, out: Path) -> int:
    if problem.kind != "reflection":
        raise ValueError('invert expects a problem of kind "reflection"')
    result = invert_from_reflection(problem.reflection(), tol=tols.grid)
    write_json(out / "parameters.json", parameters_to_problem_json(result.params))
    rows = []
    skipped = 0
    for x in grid.xs():
        val = potential_v(result.evaluator, float(x))
        if isinstance(val, SingularAt):
            skipped += 1
            continue
        for i in range(val.shape[0]):
            for j in range(val.shape[1]):
                rows.append((float(x), i, j, float(val[i, j].real), float(val[i, j].imag)))
    (out / "potential.csv").write_text(_csv_lines("x,row,col,re,im", rows))
    write_json(
        out / "report.json",
        {
            "reflection_residual": result.reflection_residual,
            "singular_grid_points": skipped,
            "tolerance": tols.grid,
            "passed": result.reflection_residual <= tols.grid,
        },
    )
    return 0


def cmd_roundtrip(problem: ProblemFile, grid: GridSpec, tols: Tolerances, out: Path) -> int:
    if problem.kind != "parameters":
        raise ValueError('roundtrip expects a problem of kind "parameters"')
    params = problem.parameters()
    report = roundtrip_check(params, tol=tols.grid, x_grid=grid.xs())
    write_json(
        out / "roundtrip.json",
        {
            "similarity": None
            if report.similarity is None
            else matrix_to_json(report.similarity),
            "s0_gap": report.s0_gap,
            "lambda0_gap": report.lambda0_gap,
            "alpha_gap": report.alpha_gap,
            "lambda_profile_gap": report.lambda_profile_gap,
            "s_profile_gap": report.s_profile_gap,
            "potential_gap": report.potential_gap,
            "reflection_residual": report.reflection_residual,
            "tolerance": tols.grid,
            "passed": report.passed,
        },
    )
    return 0


def cmd_verify(problem: ProblemFile, grid: GridSpec, tols: Tolerances, out: Path) -> int:
    if problem.kind != "parameters":
        raise ValueError('verify expects a problem of kind "parameters"')
    params = problem.parameters()
    pe = PotentialEvaluator(params)
    sc = scattering_coefficients(params)
    ode_tol = min(1e-6, tols.oracle / 100.0)
    gaps = []
    for lam in grid.lambdas():
        numeric = numeric_reflection(pe, float(lam), x_far=grid.x_max, tol=ode_tol)
        closed = evaluate(sc.R_L, complex(lam))
        gaps.append(float(np.linalg.norm(numeric - closed)))
    deriv = derivative_check(pe, x=1.0, lam=complex(grid.lambda_min), h=1e-4)
    max_gap = max(gaps)
    write_json(
        out / "verify.json",
        {
            "lambda_grid": [float(v) for v in grid.lambdas()],
            "reflection_gaps": gaps,
            "max_reflection_gap": max_gap,
            "derivative_residual": float(deriv),
            "x_far": grid.x_max,
            "tolerance": tols.oracle,
            "passed": max_gap <= tols.oracle,
        },
    )
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pescat",
        description="Completion of j-unitary rational functions and explicit "
        "scattering for Dirac-type systems with pseudo-exponential potentials.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "complete": cmd_complete,
        "scatter": cmd_scatter,
        "potential": cmd_potential,
        "invert": cmd_invert,
        "roundtrip": cmd_roundtrip,
        "verify": cmd_verify,
    }
    for name, fn in handlers.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("problem", help="path to a JSON problem file")
        p.add_argument("--out-dir", default=".", help="directory for output files")
        p.add_argument("--grid-lmin", type=float, default=-5.0)
        p.add_argument("--grid-lmax", type=float, default=5.0)
        p.add_argument(
            "--grid-lpoints", type=int, default=5 if name == "verify" else 101
        )
        p.add_argument(
            "--xmax", type=float, default=30.0 if name == "verify" else 10.0
        )
        p.add_argument("--xpoints", type=int, default=201)
        p.add_argument("--tol-residual", type=float, default=None)
        p.add_argument("--tol-grid", type=float, default=None)
        p.add_argument("--tol-oracle", type=float, default=None)
        p.set_defaults(handler=fn)
    return parser


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, NUMERICAL_ERRORS):
        return 3
    if isinstance(exc, VALIDATION_ERRORS):
        return 2
    return 3 if isinstance(exc, PescatError) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        problem = load_problem(args.problem)
        tols = resolve_tolerances(problem, args)
        grid = GridSpec(
            lambda_min=args.grid_lmin,
            lambda_max=args.grid_lmax,
            lambda_points=args.grid_lpoints,
            x_max=args.xmax,
            x_points=args.xpoints,
        )
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        return args.handler(problem, grid, tols, out)
    except (PescatError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    raise SystemExit(main())
