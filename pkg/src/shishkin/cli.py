"""Command-line front end: validate, mesh, solve, converge.

All file I/O lives here; the library modules stay pure.  Data artifacts
(CSV/TSV) go to --output (default stdout), diagnostics go to stderr.  Exit
status: 0 success, 1 validation failure (inadmissible problem, bad request
parameters), 2 solver error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .convergence import ConvergenceReport, parameter_sweep
from .discretize import assemble, check_sign_structure
from .mesh import (
    Mesh,
    MeshOrder,
    MeshParameterError,
    build_mesh,
    transition_parameters,
)
from .problem import (
    DEFAULT_ALPHA_SAFETY,
    DEFAULT_SAMPLE_COUNT,
    ProblemError,
    ProblemSpec,
    problem_from_json,
    validate_sign_dominance,
)
from .solver import SingularBlockError, SolutionGrid, solve

__all__ = [
    "RunConfig",
    "run",
    "main",
    "load_problem_file",
    "write_mesh_csv",
    "read_mesh_csv",
    "write_solution_csv",
    "read_solution_csv",
    "write_report_csv",
    "read_report_csv",
    "write_plot_tsv",
]

_FMT = "%.17g"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_IO = 3


@dataclass
class RunConfig:
    """Parsed invocation: which command, on which problem, with which knobs."""

    command: str
    problem_path: str
    n_intervals: Optional[int] = None
    n_list: tuple[int, ...] = ()
    order: MeshOrder = MeshOrder.FIRST
    output_path: Optional[str] = None
    plot_path: Optional[str] = None
    eps_grid: Optional[tuple[tuple[float, ...], ...]] = None
    workers: int = 1
    sample_count: int = DEFAULT_SAMPLE_COUNT
    safety: float = DEFAULT_ALPHA_SAFETY
    force_uniform: bool = False
    refine_once: bool = False
    defines: tuple[tuple[str, str], ...] = field(default_factory=tuple)


def _substitute(text: str, defines: Sequence[tuple[str, str]]) -> str:
    for name, value in defines:
        text = re.sub(r"\b%s\b" % re.escape(name), value, text)
    return text


def load_problem_file(path: str, defines: Sequence[tuple[str, str]] = ()) -> ProblemSpec:
    """Read a problem JSON file, applying textual --define substitutions.

    Substitution is whole-word and purely textual, applied to the A and f
    expression strings before parsing; it is how named constants (say an
    EPS placeholder) are inlined without extending the expression language.
    """
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if defines and isinstance(data, dict):
        if isinstance(data.get("A"), list):
            data["A"] = [
                [_substitute(e, defines) if isinstance(e, str) else e for e in row]
                if isinstance(row, list) else row
                for row in data["A"]
            ]
        if isinstance(data.get("f"), list):
            data["f"] = [_substitute(e, defines) if isinstance(e, str) else e
                         for e in data["f"]]
    return problem_from_json(data)


# ---------------------------------------------------------------------------
# CSV / TSV artifacts (fixed headers; floats at 17 significant digits)

def write_mesh_csv(fh, mesh: Mesh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["j", "x_j", "h_j", "band_id"])
    bands = mesh.interval_band_ids()
    spacings = mesh.spacings
    writer.writerow(["0", _FMT % mesh.points[0], "", ""])
    for j in range(1, mesh.points.size):
        writer.writerow([str(j), _FMT % mesh.points[j], _FMT % spacings[j - 1],
                         str(int(bands[j - 1]))])


def read_mesh_csv(fh):
    """Parse a mesh CSV back into (points, spacings, band_ids)."""
    reader = csv.reader(fh)
    header = next(reader)
    if header != ["j", "x_j", "h_j", "band_id"]:
        raise ValueError("unexpected mesh CSV header: %r" % header)
    points, spacings, bands = [], [], []
    for row in reader:
        points.append(float(row[1]))
        if row[2] != "":
            spacings.append(float(row[2]))
            bands.append(int(row[3]))
    return np.array(points), np.array(spacings), np.array(bands, dtype=int)


def write_solution_csv(fh, grid: SolutionGrid) -> None:
    n = grid.values.shape[1]
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["j", "x_j"] + ["U_%d" % (i + 1) for i in range(n)])
    for j in range(grid.values.shape[0]):
        writer.writerow([str(j), _FMT % grid.mesh.points[j]]
                        + [_FMT % v for v in grid.values[j]])


def read_solution_csv(fh):
    """Parse a solution CSV back into (points, values)."""
    reader = csv.reader(fh)
    header = next(reader)
    if header[:2] != ["j", "x_j"] or not header[2:]:
        raise ValueError("unexpected solution CSV header: %r" % header)
    points, values = [], []
    for row in reader:
        points.append(float(row[1]))
        values.append([float(v) for v in row[2:]])
    return np.array(points), np.array(values)


def write_report_csv(fh, report: ConvergenceReport) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["order", "eps_id", "N", "D_N", "p_N", "residual"])
    for cell in report.cells:
        writer.writerow([
            report.method_order.value,
            str(cell.eps_index),
            str(cell.intervals),
            _FMT % cell.value,
            "" if cell.order is None else _FMT % cell.order,
            _FMT % cell.residual,
        ])


def read_report_csv(fh):
    """Parse a convergence report CSV into a list of row dicts."""
    reader = csv.reader(fh)
    header = next(reader)
    if header != ["order", "eps_id", "N", "D_N", "p_N", "residual"]:
        raise ValueError("unexpected report CSV header: %r" % header)
    rows = []
    for row in reader:
        rows.append({
            "order": row[0],
            "eps_id": int(row[1]),
            "N": int(row[2]),
            "D_N": float(row[3]),
            "p_N": None if row[4] == "" else float(row[4]),
            "residual": float(row[5]),
        })
    return rows


def write_plot_tsv(fh, report: ConvergenceReport) -> None:
    """N against D_N, one column per diffusion vector (for external plotting)."""
    ids = sorted({c.eps_index for c in report.cells})
    ns = sorted({c.intervals for c in report.cells})
    by_cell = {(c.eps_index, c.intervals): c.value for c in report.cells}
    fh.write("\t".join(["N"] + ["eps_%d" % i for i in ids]) + "\n")
    for n_mesh in ns:
        vals = [by_cell.get((i, n_mesh), math.nan) for i in ids]
        fh.write("\t".join([str(n_mesh)] + [_FMT % v for v in vals]) + "\n")


# ---------------------------------------------------------------------------
# commands

def _open_output(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _emit(path: Optional[str], writer_fn) -> None:
    fh, owned = _open_output(path)
    try:
        writer_fn(fh)
    finally:
        if owned:
            fh.close()


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def _validated(spec: ProblemSpec, config: RunConfig):
    report = validate_sign_dominance(spec, config.sample_count, config.safety)
    if not report.is_admissible:
        _info("validate: problem inadmissible (worst row margin %.6g, %d violations)"
              % (report.worst_row_margin, len(report.violations)))
        return report, False
    if not report.a3_holds:
        _info("validate: warning: sqrt(eps_n) > sqrt(alpha)/4; solving proceeds "
              "but the parameter-uniform guarantee is not claimed")
    return report, True


def _cmd_validate(config: RunConfig) -> int:
    spec = load_problem_file(config.problem_path, config.defines)
    report = validate_sign_dominance(spec, config.sample_count, config.safety)
    print("sign/dominance condition: %s" % ("PASS" if report.a1_holds else "FAIL"))
    print("worst row margin: %.6g" % report.worst_row_margin)
    if report.a1_holds:
        print("alpha: %.12g" % report.a2_alpha)
        print("layer-width condition sqrt(eps_n) <= sqrt(alpha)/4: %s"
              % ("PASS" if report.a3_holds else "WARN (guarantee not claimed)"))
    for v in report.violations[:20]:
        where = "row %d" % v.row if v.col is None else "row %d, col %d" % (v.row, v.col)
        print("violation: %s at x = %.6g (%s)" % (v.condition, v.x, where))
    if len(report.violations) > 20:
        print("... and %d further violations" % (len(report.violations) - 20))
    if config.output_path:
        payload = report.to_dict()
        payload["sample_count"] = config.sample_count
        _emit(config.output_path,
              lambda fh: fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n"))
    return EXIT_OK if report.is_admissible else EXIT_VALIDATION


def _cmd_mesh(config: RunConfig) -> int:
    spec = load_problem_file(config.problem_path, config.defines)
    report, ok = _validated(spec, config)
    if not ok:
        return EXIT_VALIDATION
    params = transition_parameters(spec.eps, report.a2_alpha, config.n_intervals,
                                   config.order, force_uniform=config.force_uniform)
    mesh = build_mesh(params)
    _emit(config.output_path, lambda fh: write_mesh_csv(fh, mesh))
    _info("mesh: N = %d, b = %s, transition values = %s"
          % (params.intervals, list(params.b_vector),
             ["%.6g" % v for v in params.values]))
    return EXIT_OK


def _cmd_solve(config: RunConfig) -> int:
    spec = load_problem_file(config.problem_path, config.defines)
    report, ok = _validated(spec, config)
    if not ok:
        return EXIT_VALIDATION
    params = transition_parameters(spec.eps, report.a2_alpha, config.n_intervals,
                                   config.order, force_uniform=config.force_uniform)
    mesh = build_mesh(params)
    system = assemble(spec, mesh)
    structure = check_sign_structure(system)
    if not structure.ok:
        _info("solve: assembled matrix violates the sign/dominance structure "
              "at mesh points (%d violations, margin %.6g)"
              % (len(structure.violations), structure.min_dominance_margin))
        return EXIT_VALIDATION
    grid = solve(system, refine_once=config.refine_once)
    _emit(config.output_path, lambda fh: write_solution_csv(fh, grid))
    _info("solve: residual max-norm %.6g" % grid.residual_norm)
    if grid.ill_conditioned:
        _info("solve: warning: residual exceeds the ill-conditioning threshold")
    return EXIT_OK


def _cmd_converge(config: RunConfig) -> int:
    spec = load_problem_file(config.problem_path, config.defines)
    report, ok = _validated(spec, config)
    if not ok:
        return EXIT_VALIDATION
    eps_grid = config.eps_grid if config.eps_grid is not None else (tuple(spec.eps),)
    sweep = parameter_sweep(spec, eps_grid, list(config.n_list), config.order,
                            workers=config.workers, force_uniform=config.force_uniform)
    _emit(config.output_path, lambda fh: write_report_csv(fh, sweep))
    if config.plot_path:
        _emit(config.plot_path, lambda fh: write_plot_tsv(fh, sweep))
    for row in sweep.rows:
        _info("converge: N = %5d  worst D_N = %-12.6g  p_N = %s  residual = %.3g"
              % (row.intervals, row.value,
                 "-" if row.order is None else "%.4f" % row.order, row.residual))
    if sweep.uniform_order_estimate is not None:
        _info("converge: uniform order estimate = %.4f" % sweep.uniform_order_estimate)
    failures = [c for c in sweep.cells if c.error]
    if failures:
        for c in failures[:10]:
            _info("converge: cell (eps_id %d, N %d) failed: %s"
                  % (c.eps_index, c.intervals, c.error))
        return EXIT_SOLVER
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "mesh": _cmd_mesh,
    "solve": _cmd_solve,
    "converge": _cmd_converge,
}


def run(config: RunConfig) -> int:
    """Execute one parsed invocation, mapping failures to exit codes."""
    try:
        return _COMMANDS[config.command](config)
    except (OSError, json.JSONDecodeError) as err:
        _info("%s: i/o error: %s" % (config.command, err))
        return EXIT_IO
    except SingularBlockError as err:
        _info("%s: solver error: %s" % (config.command, err))
        return EXIT_SOLVER
    except (ProblemError, MeshParameterError, ValueError) as err:
        _info("%s: %s" % (config.command, err))
        return EXIT_VALIDATION


def _parse_defines(items) -> tuple[tuple[str, str], ...]:
    out = []
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise ValueError("--define expects NAME=VALUE, got %r" % item)
        out.append((name, value))
    return tuple(out)


def _parse_eps_grid(text: Optional[str]):
    if text is None:
        return None
    grid = json.loads(text)
    if not isinstance(grid, list) or not grid:
        raise ValueError("--eps-grid expects a JSON array of arrays of numbers")
    return tuple(tuple(float(v) for v in row) for row in grid)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", help="problem JSON file")
    common.add_argument("--define", action="append", metavar="NAME=VALUE",
                        help="textual substitution applied to expression strings")
    common.add_argument("--sample-count", type=int, default=DEFAULT_SAMPLE_COUNT,
                        help="validation sample points on [0,1] (default %(default)s)")
    common.add_argument("--safety", type=float, default=DEFAULT_ALPHA_SAFETY,
                        help="safety factor for the alpha bound (default %(default)s)")
    common.add_argument("-o", "--output", default=None,
                        help="output path ('-' or omitted: stdout)")

    parser = argparse.ArgumentParser(
        prog="shishkin",
        description="Solve singularly perturbed reaction-diffusion systems on "
                    "piecewise-uniform layer-adapted meshes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common],
                   help="check problem admissibility; JSON report with -o")

    p_mesh = sub.add_parser("mesh", parents=[common], help="emit a mesh as CSV")
    p_mesh.add_argument("--N", type=int, required=True, dest="n_intervals",
                        help="mesh intervals (power of two, >= 2^(n+2))")
    p_mesh.add_argument("--order", choices=[o.value for o in MeshOrder],
                        default=MeshOrder.FIRST.value)
    p_mesh.add_argument("--force-uniform-mesh", action="store_true")

    p_solve = sub.add_parser("solve", parents=[common], help="solve and emit solution CSV")
    p_solve.add_argument("--N", type=int, required=True, dest="n_intervals")
    p_solve.add_argument("--order", choices=[o.value for o in MeshOrder],
                         default=MeshOrder.FIRST.value)
    p_solve.add_argument("--force-uniform-mesh", action="store_true")
    p_solve.add_argument("--refine-once", action="store_true",
                         help="apply one iterative-refinement step")

    p_conv = sub.add_parser("converge", parents=[common],
                            help="two-mesh convergence study; report CSV")
    p_conv.add_argument("--N", required=True, dest="n_csv",
                        help="comma-separated doubling mesh sizes, e.g. 64,128,256")
    p_conv.add_argument("--order", choices=[o.value for o in MeshOrder],
                        default=MeshOrder.FIRST.value)
    p_conv.add_argument("--eps-grid", default=None,
                        help="JSON array of diffusion vectors to sweep")
    p_conv.add_argument("--workers", type=int, default=1,
                        help="worker processes for sweep cells")
    p_conv.add_argument("--plot-data", default=None,
                        help="also write N-vs-D TSV to this path")
    p_conv.add_argument("--force-uniform-mesh", action="store_true")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    config = RunConfig(
        command=ns.command,
        problem_path=ns.problem,
        output_path=ns.output,
        sample_count=ns.sample_count,
        safety=ns.safety,
        defines=_parse_defines(ns.define),
    )
    if ns.command in ("mesh", "solve"):
        config.n_intervals = ns.n_intervals
        config.order = MeshOrder(ns.order)
        config.force_uniform = ns.force_uniform_mesh
    if ns.command == "solve":
        config.refine_once = ns.refine_once
    if ns.command == "converge":
        config.n_list = tuple(int(part) for part in ns.n_csv.split(","))
        config.order = MeshOrder(ns.order)
        config.force_uniform = ns.force_uniform_mesh
        config.eps_grid = _parse_eps_grid(ns.eps_grid)
        config.workers = ns.workers
        config.plot_path = ns.plot_data
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        config = config_from_args(ns)
    except ValueError as err:
        _info("shishkin: %s" % err)
        return EXIT_VALIDATION
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
