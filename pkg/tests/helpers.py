"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from shishkin import ProblemSpec


def zmatrix_problem(rng: np.random.Generator, n: int, nonneg_data: bool = True,
                    x_dependent: bool = True) -> ProblemSpec:
    """Random admissible problem: non-positive coupling, dominant diagonal.

    Off-diagonal entries are negative constants; diagonals add a margin and
    (optionally) a nonnegative bump w*x*(1-x) that cannot break dominance.
    With nonneg_data the forcing terms and boundary values are nonnegative.
    """
    eps = np.sort(10.0 ** rng.uniform(-8.0, -1.0, size=n))
    while len(set(eps)) < n:  # pragma: no cover - vanishingly unlikely
        eps = np.sort(10.0 ** rng.uniform(-8.0, -1.0, size=n))
    off = -rng.uniform(0.1, 1.0, size=(n, n))
    a = [["" for _ in range(n)] for _ in range(n)]
    for i in range(n):
        row_abs = float(sum(abs(off[i, j]) for j in range(n) if j != i))
        margin = float(rng.uniform(0.3, 2.0))
        bump = float(rng.uniform(0.0, 1.0)) if x_dependent and rng.random() < 0.5 else 0.0
        for j in range(n):
            if i == j:
                base = row_abs + margin
                if bump:
                    a[i][j] = "%r + %r*x*(1 - x)" % (base, bump)
                else:
                    a[i][j] = repr(base)
            else:
                a[i][j] = repr(float(off[i, j]))
    f = []
    for i in range(n):
        lo = 0.0 if nonneg_data else -2.0
        c = float(rng.uniform(lo, 2.0))
        d = float(rng.uniform(0.0, 1.0))
        f.append("%r + %r*x*(1 - x)" % (c, d))
    lo = 0.0 if nonneg_data else -1.0
    u_left = rng.uniform(lo, 1.0, size=n)
    u_right = rng.uniform(lo, 1.0, size=n)
    return ProblemSpec.from_strings(list(eps), a, f, list(u_left), list(u_right))


def quadratic_problem(eps, a_matrix, coeffs):
    """Manufactured problem whose exact solution components are quadratics.

    coeffs[i] = (c0, c1, c2) gives u_i(x) = c0 + c1 x + c2 x^2; the forcing
    terms are synthesized so the continuous problem is satisfied exactly.
    Returns (spec, exact) with exact(points) -> (len(points), n) array.
    """
    n = len(eps)
    f = []
    for i in range(n):
        p0 = -float(eps[i]) * 2.0 * coeffs[i][2]
        p1 = 0.0
        p2 = 0.0
        for k in range(n):
            p0 += a_matrix[i][k] * coeffs[k][0]
            p1 += a_matrix[i][k] * coeffs[k][1]
            p2 += a_matrix[i][k] * coeffs[k][2]
        f.append("%r + %r*x + %r*x^2" % (float(p0), float(p1), float(p2)))
    u_left = [c[0] for c in coeffs]
    u_right = [c[0] + c[1] + c[2] for c in coeffs]
    a_str = [[repr(float(v)) for v in row] for row in a_matrix]
    spec = ProblemSpec.from_strings(list(eps), a_str, f, u_left, u_right)

    def exact(points):
        points = np.asarray(points)
        return np.stack([c[0] + c[1] * points + c[2] * points**2 for c in coeffs], axis=1)

    return spec, exact
