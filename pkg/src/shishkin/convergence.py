"""Empirical convergence measurement.

Two error meters are provided.  When a closed-form solution exists (the
scalar constant-coefficient case) the exact nodal error E_N is recorded
per mesh size.  Otherwise the two-mesh estimator is used: solve on the
N-interval mesh, solve again on its bisection (same transition values, so
the coarse nodes are shared exactly), and take the max-norm difference at
the coarse nodes.  Orders come from consecutive doublings,

    p_N = log2(D_N / D_{2N}),

and a parameter sweep reports the worst difference per N over a grid of
diffusion parameters together with the smallest per-parameter order at
the largest N - the empirical meaning of parameter-uniform convergence.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .discretize import assemble
from .mesh import MeshOrder, bisect_mesh, build_mesh, require_admissible_intervals, transition_parameters
from .problem import ProblemSpec, compute_alpha
from .solver import solve

__all__ = [
    "StudyRow",
    "SweepCell",
    "ConvergenceReport",
    "exact_scalar_solution",
    "exact_error_study",
    "two_mesh_difference",
    "convergence_order",
    "parameter_sweep",
    "with_eps",
]


@dataclass(frozen=True)
class StudyRow:
    """One mesh size: its error/difference, computed order, and solve residual."""

    intervals: int
    value: float
    order: Optional[float]
    residual: float


@dataclass(frozen=True)
class SweepCell:
    """One (diffusion vector, mesh size) measurement inside a sweep."""

    eps_index: int
    intervals: int
    value: float
    residual: float
    order: Optional[float] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class ConvergenceReport:
    """Error study outcome.

    rows holds the headline sequence (for sweeps: the worst value over the
    diffusion grid per N, with orders computed from that sequence); cells
    holds every individual measurement.  uniform_order_estimate is the
    minimum over the sweep of the per-parameter order at the largest N
    where an order is defined (None when no order is computable).
    """

    method_order: MeshOrder
    rows: tuple[StudyRow, ...]
    eps_sweep: tuple[tuple[float, ...], ...]
    uniform_order_estimate: Optional[float]
    cells: tuple[SweepCell, ...]
    kind: str  # "exact" or "two-mesh"


def exact_scalar_solution(eps: float, a: float, f_const: float,
                          u0: float, u1: float, x: float) -> float:
    """Closed form for -eps u'' + a u = f, u(0) = u0, u(1) = u1 (constants).

    u(x) = f/a + c1 exp(-x sqrt(a/eps)) + c2 exp(-(1-x) sqrt(a/eps)), with
    c1, c2 matching the boundary data.  The endpoints return the boundary
    values exactly.
    """
    if not (a > 0.0 and eps > 0.0):
        raise ValueError("need a > 0 and eps > 0")
    if x == 0.0:
        return float(u0)
    if x == 1.0:
        return float(u1)
    mean = f_const / a
    rate = math.sqrt(a / eps)
    mu = math.exp(-rate)
    det = 1.0 - mu * mu
    r0 = u0 - mean
    r1 = u1 - mean
    c1 = (r0 - mu * r1) / det
    c2 = (r1 - mu * r0) / det
    return mean + c1 * math.exp(-x * rate) + c2 * math.exp(-(1.0 - x) * rate)


def _scalar_spec(eps: float, a: float, f_const: float, u0: float, u1: float) -> ProblemSpec:
    return ProblemSpec.from_strings(
        eps=[eps], a=[[repr(float(a))]], f=[repr(float(f_const))],
        u_left=[u0], u_right=[u1],
    )


def _check_doubling(ns: Sequence[int]) -> None:
    if not ns:
        raise ValueError("need at least one mesh size")
    for a, b in zip(ns, ns[1:]):
        if b != 2 * a:
            raise ValueError("mesh sizes must double: got %d after %d" % (b, a))


def convergence_order(pairs: Sequence[tuple[int, float]]) -> list[tuple[int, Optional[float]]]:
    """Computed orders p_N = log2(D_N / D_2N) from a doubling sequence.

    The final entry (and any entry whose successor difference is zero or
    whose own difference is zero) carries None: the order is undefined
    there, not zero.
    """
    ns = [p[0] for p in pairs]
    _check_doubling(ns)
    out: list[tuple[int, Optional[float]]] = []
    for k, (n_k, d_k) in enumerate(pairs):
        if k + 1 == len(pairs):
            out.append((n_k, None))
            break
        d_next = pairs[k + 1][1]
        if d_k <= 0.0 or d_next <= 0.0:
            out.append((n_k, None))
        else:
            out.append((n_k, math.log2(d_k / d_next)))
    return out


def exact_error_study(eps: float, a: float, f_const: float, u0: float, u1: float,
                      ns: Sequence[int], order: MeshOrder,
                      force_uniform: bool = False) -> ConvergenceReport:
    """Nodal max-norm error against the closed-form scalar solution, per N."""
    order = MeshOrder(order)
    _check_doubling(ns)
    spec = _scalar_spec(eps, a, f_const, u0, u1)
    alpha = compute_alpha(spec)
    errors = []
    residuals = []
    for n_mesh in ns:
        params = transition_parameters(spec.eps, alpha, n_mesh, order,
                                       force_uniform=force_uniform)
        mesh = build_mesh(params)
        grid = solve(assemble(spec, mesh))
        exact = np.array([exact_scalar_solution(eps, a, f_const, u0, u1, x)
                          for x in mesh.points])
        errors.append(float(np.max(np.abs(grid.values[:, 0] - exact))))
        residuals.append(grid.residual_norm)
    orders = convergence_order(list(zip(ns, errors)))
    rows = tuple(
        StudyRow(intervals=n_mesh, value=err, order=p, residual=res)
        for (n_mesh, err, (_, p), res) in zip(ns, errors, orders, residuals)
    )
    cells = tuple(
        SweepCell(eps_index=0, intervals=r.intervals, value=r.value,
                  residual=r.residual, order=r.order)
        for r in rows
    )
    return ConvergenceReport(
        method_order=order,
        rows=rows,
        eps_sweep=(tuple(spec.eps),),
        uniform_order_estimate=_last_defined_order(rows),
        cells=cells,
        kind="exact",
    )


def _last_defined_order(rows: Sequence[StudyRow]) -> Optional[float]:
    for row in reversed(rows):
        if row.order is not None:
            return row.order
    return None


def _two_mesh_cell(spec: ProblemSpec, intervals: int, order: MeshOrder,
                   alpha: float, force_uniform: bool) -> tuple[float, float]:
    params = transition_parameters(spec.eps, alpha, intervals, order,
                                   force_uniform=force_uniform)
    coarse_mesh = build_mesh(params)
    fine_mesh = bisect_mesh(coarse_mesh)
    coarse = solve(assemble(spec, coarse_mesh))
    fine = solve(assemble(spec, fine_mesh))
    diff = float(np.max(np.abs(coarse.values - fine.values[::2])))
    return diff, max(coarse.residual_norm, fine.residual_norm)


def two_mesh_difference(spec: ProblemSpec, intervals: int, order: MeshOrder,
                        force_uniform: bool = False) -> float:
    """Max-norm difference at shared nodes between a mesh and its bisection.

    The comparison mesh halves every interval of the N-interval mesh and
    keeps its transition values, so every coarse node is a fine node and
    no interpolation enters the estimate.
    """
    order = MeshOrder(order)
    require_admissible_intervals(spec.n, intervals)
    alpha = compute_alpha(spec)
    diff, _ = _two_mesh_cell(spec, intervals, order, alpha, force_uniform)
    return diff


def with_eps(spec: ProblemSpec, eps: Sequence[float]) -> ProblemSpec:
    """Copy of spec with a different diffusion vector (revalidated)."""
    return replace(spec, eps=tuple(float(e) for e in eps))


def _sweep_cell_task(args):
    spec, e_idx, intervals, order, alpha, force_uniform = args
    try:
        value, residual = _two_mesh_cell(spec, intervals, order, alpha, force_uniform)
        return SweepCell(eps_index=e_idx, intervals=intervals, value=value, residual=residual)
    except Exception as err:  # pragma: no cover - exercised via worker failures
        return SweepCell(eps_index=e_idx, intervals=intervals, value=math.nan,
                         residual=math.nan, error="%s: %s" % (type(err).__name__, err))


def parameter_sweep(spec_template: ProblemSpec, eps_grid: Sequence[Sequence[float]],
                    ns: Sequence[int], order: MeshOrder, workers: int = 1,
                    force_uniform: bool = False) -> ConvergenceReport:
    """Two-mesh differences over a grid of diffusion vectors.

    Per N the report rows carry the worst (largest) difference over the
    grid; failed cells are preserved with their error message and simply
    drop out of the aggregation.
    """
    order = MeshOrder(order)
    _check_doubling(ns)
    specs = [with_eps(spec_template, e) for e in eps_grid]
    tasks = []
    for e_idx, spec in enumerate(specs):
        require_admissible_intervals(spec.n, ns[0])
        alpha = compute_alpha(spec)
        for n_mesh in ns:
            tasks.append((spec, e_idx, n_mesh, order, alpha, force_uniform))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_sweep_cell_task, tasks))
    else:
        cells = [_sweep_cell_task(t) for t in tasks]

    by_cell = {(c.eps_index, c.intervals): c for c in cells}
    # per-parameter order sequences
    per_eps_orders: list[Optional[float]] = []
    ordered_cells = []
    for e_idx in range(len(specs)):
        seq = [by_cell[(e_idx, n_mesh)] for n_mesh in ns]
        if any(c.error for c in seq):
            orders = [(n_mesh, None) for n_mesh in ns]
        else:
            orders = convergence_order([(c.intervals, c.value) for c in seq])
        for cell, (_, p) in zip(seq, orders):
            ordered_cells.append(replace(cell, order=p))
        defined = [p for _, p in orders if p is not None]
        per_eps_orders.append(defined[-1] if defined else None)

    rows = []
    worst = []
    for n_mesh in ns:
        col = [by_cell[(e_idx, n_mesh)] for e_idx in range(len(specs))]
        values = [c.value for c in col if not c.error]
        residuals = [c.residual for c in col if not c.error]
        worst.append((n_mesh, max(values) if values else math.nan,
                      max(residuals) if residuals else math.nan))
    worst_orders = convergence_order([(n_mesh, v) for n_mesh, v, _ in worst]) \
        if all(not math.isnan(v) for _, v, _ in worst) else [(n_mesh, None) for n_mesh, _, _ in worst]
    for (n_mesh, value, residual), (_, p) in zip(worst, worst_orders):
        rows.append(StudyRow(intervals=n_mesh, value=value, order=p, residual=residual))

    defined_overall = [p for p in per_eps_orders if p is not None]
    uniform = min(defined_overall) if len(defined_overall) == len(specs) and defined_overall else None
    return ConvergenceReport(
        method_order=order,
        rows=tuple(rows),
        eps_sweep=tuple(tuple(s.eps) for s in specs),
        uniform_order_estimate=uniform,
        cells=tuple(ordered_cells),
        kind="two-mesh",
    )
