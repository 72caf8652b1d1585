"""Block-tridiagonal elimination (block Thomas algorithm).

Forward elimination folds each sub-block into the pivot block,

    D'_j = D_j - L_j (D'_{j-1})^{-1} R_{j-1},

with a dense LU factorisation (partial pivoting) inside each n x n block;
back substitution then runs from the right boundary.  The admissible
problems produce M-matrix structure, under which this elimination is
stable without pivoting across blocks; every solve certifies itself by
recording the max-norm residual on the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .discretize import DiscreteSystem, apply_operator
from .mesh import Mesh

__all__ = [
    "SolutionGrid",
    "SingularBlockError",
    "PIVOT_FLOOR",
    "RESIDUAL_WARN_FACTOR",
    "solve",
    "residual_norm",
]

PIVOT_FLOOR = 1e-300
RESIDUAL_WARN_FACTOR = 1e-6


class SingularBlockError(RuntimeError):
    """A pivot block became numerically singular during elimination."""

    def __init__(self, node: int, pivot: float):
        self.node = node
        self.pivot = pivot
        super().__init__(
            "numerically singular pivot block at node %d (smallest pivot %.3g)" % (node, pivot)
        )


@dataclass(frozen=True, eq=False)
class SolutionGrid:
    """Solution values U_i(x_j), with the residual recorded at solve time.

    ill_conditioned is set when the residual exceeded the warning threshold
    relative to the problem scale; the values are still returned.
    """

    values: np.ndarray  # (N+1, n)
    mesh: Mesh
    residual_norm: float
    ill_conditioned: bool = False

    def __post_init__(self):
        self.values.setflags(write=False)


def _block_thomas(system: DiscreteSystem, rhs: np.ndarray,
                  left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Solve with given interior right-hand side and boundary values."""
    rows = system.num_intervals - 1
    n = system.n
    factors = []
    sup_t = np.empty((rows, n, n))
    rhs_t = np.empty((rows, n))
    prev_sup = None
    prev_rhs = left
    for k in range(rows):
        sub = system.sub_blocks[k]
        if k == 0:
            pivot_block = system.diag_blocks[0].copy()
            b = rhs[0] - sub @ prev_rhs
        else:
            # carry = (D'_{k-1})^{-1} [R_{k-1} | b_{k-1}]
            carry = lu_solve(factors[k - 1], np.column_stack([prev_sup, prev_rhs]))
            pivot_block = system.diag_blocks[k] - sub @ carry[:, :n]
            b = rhs[k] - sub @ carry[:, n]
        lu, piv = lu_factor(pivot_block)
        smallest = float(np.min(np.abs(np.diag(lu))))
        if smallest < PIVOT_FLOOR:
            raise SingularBlockError(k + 1, smallest)
        factors.append((lu, piv))
        sup_t[k] = system.super_blocks[k]
        rhs_t[k] = b
        prev_sup = sup_t[k]
        prev_rhs = b
    values = np.empty((system.num_intervals + 1, n))
    values[0] = left
    values[-1] = right
    for k in range(rows - 1, -1, -1):
        values[k + 1] = lu_solve(factors[k], rhs_t[k] - sup_t[k] @ values[k + 2])
    return values


def solve(system: DiscreteSystem, refine_once: bool = False) -> SolutionGrid:
    """Solve the assembled system; optionally apply one refinement step.

    Deterministic: identical systems produce bit-identical grids on one
    platform.  Raises SingularBlockError when a pivot block degenerates;
    flags (but does not reject) results whose residual exceeds
    RESIDUAL_WARN_FACTOR times the problem scale.
    """
    values = _block_thomas(system, system.rhs, system.boundary_left, system.boundary_right)
    if refine_once:
        r = apply_operator(system, values)
        correction = _block_thomas(system, -r[1:-1], -r[0], -r[-1])
        values = values + correction
    res = float(np.max(np.abs(apply_operator(system, values))))
    return SolutionGrid(
        values=values,
        mesh=system.mesh,
        residual_norm=res,
        ill_conditioned=res > RESIDUAL_WARN_FACTOR * system.scale,
    )


def residual_norm(system: DiscreteSystem, grid) -> float:
    """Max-norm of the residual of grid against the system."""
    return float(np.max(np.abs(apply_operator(system, grid))))
