"""Central-difference discretisation on an arbitrary (nonuniform) mesh.

At every interior node the second derivative is replaced by the three-point
difference

    d2 U(x_j) = (D+ U(x_j) - D- U(x_j)) / hbar_j,
    D+ U(x_j) = (U(x_{j+1}) - U(x_j)) / h_{j+1},
    D- U(x_j) = (U(x_j) - U(x_{j-1})) / h_j,

with h_j = x_j - x_{j-1} and hbar_j = (h_j + h_{j+1})/2, which is exact on
quadratics for any spacing.  The resulting system is block-tridiagonal with
n x n blocks; Dirichlet data is imposed as explicit identity rows at both
ends so residual checks stay aligned with the node indexing j = 0..N.

Under the admissibility conditions every off-diagonal entry of the matrix
is non-positive and every row strictly diagonally dominant (the structure
that yields the discrete maximum principle); check_sign_structure scans
the assembled entries and reports the minimal dominance margin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exprs import ExprDomainError, evaluate_array
from .mesh import Mesh
from .problem import CoefficientDomainError, ProblemSpec

__all__ = [
    "DiscreteSystem",
    "SignStructureReport",
    "assemble",
    "apply_operator",
    "check_sign_structure",
    "dump_coordinates",
    "to_dense",
]


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    """Assembled block-tridiagonal system, immutable after construction.

    Arrays are indexed by interior row: sub_blocks[k], diag_blocks[k],
    super_blocks[k] and rhs[k] belong to node j = k+1, k = 0..N-2.  The
    sub/super blocks are diagonal (pure second-difference coupling); the
    diagonal blocks add A(x_j).  scale = 1 + ||u(0)|| + ||u(1)|| + ||f||
    anchors all relative tolerances.
    """

    sub_blocks: np.ndarray  # (N-1, n, n)
    diag_blocks: np.ndarray  # (N-1, n, n)
    super_blocks: np.ndarray  # (N-1, n, n)
    rhs: np.ndarray  # (N-1, n)
    boundary_left: np.ndarray  # (n,)
    boundary_right: np.ndarray  # (n,)
    mesh: Mesh
    scale: float

    def __post_init__(self):
        for name in ("sub_blocks", "diag_blocks", "super_blocks", "rhs",
                     "boundary_left", "boundary_right"):
            getattr(self, name).setflags(write=False)

    @property
    def n(self) -> int:
        return self.boundary_left.size

    @property
    def num_intervals(self) -> int:
        return self.mesh.num_intervals


def assemble(spec: ProblemSpec, mesh: Mesh) -> DiscreteSystem:
    """Assemble the discrete operator and right-hand side on a mesh.

    Coefficients and forcing terms are evaluated at every mesh point; a
    domain failure is reported with the entry name and the node location.
    """
    pts = mesh.points
    big_n = mesh.num_intervals
    n = spec.n
    a_vals = np.empty((n, n, big_n + 1))
    for i in range(n):
        for j in range(n):
            try:
                a_vals[i, j] = evaluate_array(spec.a_entries[i][j], pts)
            except ExprDomainError as err:
                raise CoefficientDomainError("A[%d][%d]: %s" % (i, j, err)) from err
    f_vals = np.empty((n, big_n + 1))
    for i in range(n):
        try:
            f_vals[i] = evaluate_array(spec.f_entries[i], pts)
        except ExprDomainError as err:
            raise CoefficientDomainError("f[%d]: %s" % (i, err)) from err

    d = np.diff(pts)
    h_lo = d[:-1]  # h_j     for j = 1..N-1
    h_hi = d[1:]  # h_{j+1}
    hbar = 0.5 * (h_lo + h_hi)
    w_lo = 1.0 / (hbar * h_lo)  # weight of U_{j-1}
    w_hi = 1.0 / (hbar * h_hi)  # weight of U_{j+1}

    eps = np.asarray(spec.eps)
    rows = big_n - 1
    sub = np.zeros((rows, n, n))
    sup = np.zeros((rows, n, n))
    diag = np.transpose(a_vals[:, :, 1:big_n], (2, 0, 1)).copy()
    for i in range(n):
        sub[:, i, i] = -eps[i] * w_lo
        sup[:, i, i] = -eps[i] * w_hi
        diag[:, i, i] += eps[i] * (w_lo + w_hi)
    rhs = f_vals[:, 1:big_n].T.copy()

    scale = 1.0 + max(abs(v) for v in spec.u_left) + max(abs(v) for v in spec.u_right)
    scale += float(np.max(np.abs(f_vals)))
    return DiscreteSystem(
        sub_blocks=sub,
        diag_blocks=diag,
        super_blocks=sup,
        rhs=rhs,
        boundary_left=np.asarray(spec.u_left, dtype=float),
        boundary_right=np.asarray(spec.u_right, dtype=float),
        mesh=mesh,
        scale=scale,
    )


def apply_operator(system: DiscreteSystem, grid) -> np.ndarray:
    """Residual of the discrete equations at a candidate grid function.

    grid is an (N+1, n) array or anything with a .values attribute shaped
    that way.  Interior rows return L U - f; the boundary rows return the
    mismatch against the Dirichlet data.
    """
    values = np.asarray(getattr(grid, "values", grid), dtype=float)
    big_n = system.num_intervals
    n = system.n
    if values.shape != (big_n + 1, n):
        raise ValueError("grid shape %r does not match system (%d, %d)"
                         % (values.shape, big_n + 1, n))
    r = np.empty_like(values)
    r[0] = values[0] - system.boundary_left
    r[-1] = values[-1] - system.boundary_right
    r[1:-1] = (
        np.einsum("kij,kj->ki", system.sub_blocks, values[:-2])
        + np.einsum("kij,kj->ki", system.diag_blocks, values[1:-1])
        + np.einsum("kij,kj->ki", system.super_blocks, values[2:])
        - system.rhs
    )
    return r


@dataclass(frozen=True)
class SignStructureReport:
    """Scan of the assembled matrix entries.

    Violations are (node j, block row i, block col k, offending value)
    tuples for positive off-diagonal entries.  The dominance margin is the
    minimum over rows of diagonal minus the absolute off-diagonal sum
    (boundary identity rows contribute a margin of 1).
    """

    off_diagonal_ok: bool
    min_dominance_margin: float
    violations: tuple[tuple[int, int, int, float], ...]

    @property
    def ok(self) -> bool:
        return self.off_diagonal_ok and self.min_dominance_margin > 0.0


def check_sign_structure(system: DiscreteSystem) -> SignStructureReport:
    """Verify non-positive off-diagonals and strict row dominance entrywise."""
    n = system.n
    rows = system.num_intervals - 1
    violations = []
    eye = np.eye(n, dtype=bool)
    for k in range(rows):
        for name, block in (("sub", system.sub_blocks[k]),
                            ("diag", system.diag_blocks[k]),
                            ("super", system.super_blocks[k])):
            off = block > 0.0 if name != "diag" else (block > 0.0) & ~eye
            for i, j in zip(*np.nonzero(off)):
                violations.append((k + 1, int(i), int(j), float(block[i, j])))
    diag_entries = system.diag_blocks[:, np.arange(n), np.arange(n)]
    off_sum = (
        np.abs(system.sub_blocks).sum(axis=2)
        + np.abs(system.super_blocks).sum(axis=2)
        + np.abs(system.diag_blocks).sum(axis=2)
        - np.abs(diag_entries)
    )
    margins = diag_entries - off_sum
    min_margin = min(float(margins.min()), 1.0) if rows else 1.0
    return SignStructureReport(
        off_diagonal_ok=not violations,
        min_dominance_margin=min_margin,
        violations=tuple(violations),
    )


def _coordinate_entries(system: DiscreteSystem):
    """Yield (row, col, value) for every structurally nonzero matrix entry."""
    n = system.n
    big_n = system.num_intervals
    for i in range(n):
        yield i, i, 1.0
    for k in range(big_n - 1):
        base = (k + 1) * n
        for i in range(n):
            row = base + i
            for j in range(n):
                v = system.sub_blocks[k, i, j]
                if v != 0.0:
                    yield row, base - n + j, float(v)
            for j in range(n):
                v = system.diag_blocks[k, i, j]
                if v != 0.0:
                    yield row, base + j, float(v)
            for j in range(n):
                v = system.super_blocks[k, i, j]
                if v != 0.0:
                    yield row, base + n + j, float(v)
    for i in range(n):
        yield big_n * n + i, big_n * n + i, 1.0


def dump_coordinates(system: DiscreteSystem, fh) -> None:
    """Write the assembled matrix in "row col value" text form (debug aid)."""
    for row, col, value in _coordinate_entries(system):
        fh.write("%d %d %.17g\n" % (row, col, value))


def to_dense(system: DiscreteSystem) -> tuple[np.ndarray, np.ndarray]:
    """Dense matrix and right-hand side of the full system (small N only)."""
    n = system.n
    big_n = system.num_intervals
    size = (big_n + 1) * n
    mat = np.zeros((size, size))
    for row, col, value in _coordinate_entries(system):
        mat[row, col] = value
    vec = np.empty(size)
    vec[:n] = system.boundary_left
    vec[n : size - n] = system.rhs.ravel()
    vec[size - n :] = system.boundary_right
    return mat, vec
