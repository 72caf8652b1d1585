"""Piecewise-uniform layer-adapted meshes and their diagnostics.

The unit interval is split into 2n+1 bands: n nested layer bands at each
end and a coarse interior.  The left-hand band edges are the transition
values

    sigma_n = min(1/4, s * sqrt(eps_n / alpha) * ln N)
    sigma_i = min(sigma_{i+1} / 2, s * sqrt(eps_i / alpha) * ln N),

swept downward, with s = 1 for the first-order mesh and s = 2 for the
second-order one; the right-hand edges mirror them at x = 1.  Each band
carries a fixed share of the N intervals: N/2^{n+1} in the innermost band
at each end, N/2^{n-i+2} in band i, and N/2 across the interior, uniformly
subdivided.  Whenever a min takes its cap branch everywhere the mesh
degenerates to the classical uniform mesh, which is recorded per level in
a boolean vector (True = the logarithmic branch was the strict minimum).

Also here: the analytic layer envelopes exp(-x * sqrt(alpha/eps_i)) used
as diagnostics, and the points where two scaled envelopes cross.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MeshOrder",
    "Side",
    "TransitionParams",
    "Mesh",
    "MeshParameterError",
    "InteractionOrderWarning",
    "require_admissible_intervals",
    "transition_parameters",
    "build_mesh",
    "bisect_mesh",
    "layer_function",
    "interaction_point",
]

TRANSITION_CAP = 0.25


class MeshOrder(str, enum.Enum):
    """Which accuracy target the transition values aim at."""

    FIRST = "first"
    SECOND = "second"

    @property
    def width_scale(self) -> float:
        """Multiplier on sqrt(eps/alpha)*ln N: 1 for first order, 2 for second."""
        return 1.0 if self is MeshOrder.FIRST else 2.0

    @property
    def target_rate(self) -> int:
        """Nominal convergence order (power of N^-1 ln N in the error model)."""
        return 1 if self is MeshOrder.FIRST else 2


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class MeshParameterError(ValueError):
    """Inadmissible mesh request (wrong interval count, bad parameters)."""


class InteractionOrderWarning(UserWarning):
    """Envelope-crossing ordering guarantees need sqrt(eps_i) <= sqrt(eps_j)/2."""


@dataclass(frozen=True)
class TransitionParams:
    """Transition values for one mesh, with their branch provenance.

    values[i] is the i-th left-hand band edge; log_branch[i] is True when
    the logarithmic branch was the strict minimum at that level (for the
    top level, when it fell strictly below the 1/4 cap).  A False at level
    i < n-1 means values[i] is exactly half of values[i+1].
    """

    order: MeshOrder
    values: tuple[float, ...]
    log_branch: tuple[bool, ...]
    alpha: float
    intervals: int
    log_n: float

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def b_vector(self) -> tuple[int, ...]:
        return tuple(int(b) for b in self.log_branch)


def require_admissible_intervals(n: int, intervals: int) -> None:
    """Interval counts must be 2^n * k with k a power of two, k >= 4.

    Equivalently: a power of two no smaller than 2^(n+2).  This makes every
    band count a whole (power-of-two) number of intervals.
    """
    if intervals < 1 or (intervals & (intervals - 1)) != 0 or intervals < (4 << n):
        raise MeshParameterError(
            "interval count %d inadmissible for n = %d: need a power of two >= %d"
            % (intervals, n, 4 << n)
        )


def transition_parameters(
    eps,
    alpha: float,
    intervals: int,
    order: MeshOrder = MeshOrder.FIRST,
    force_uniform: bool = False,
) -> TransitionParams:
    """Compute the transition values for the given diffusion parameters.

    The sweep runs from the largest parameter down; ties between the two
    branches resolve to the cap/halving branch.  force_uniform takes the
    cap branch at every level, yielding the classical uniform mesh (used
    for degradation contrast studies).
    """
    eps = tuple(float(e) for e in eps)
    n = len(eps)
    if n < 1:
        raise MeshParameterError("need at least one diffusion parameter")
    if any(e <= 0.0 for e in eps) or any(eps[i] >= eps[i + 1] for i in range(n - 1)):
        raise MeshParameterError("diffusion parameters must be positive and strictly increasing")
    if not alpha > 0.0:
        raise MeshParameterError("alpha must be positive")
    order = MeshOrder(order)
    require_admissible_intervals(n, intervals)
    log_n = math.log(intervals)
    scale = order.width_scale
    values = [0.0] * n
    branch = [False] * n
    for i in range(n - 1, -1, -1):
        cap = TRANSITION_CAP if i == n - 1 else values[i + 1] / 2.0
        layer = scale * math.sqrt(eps[i] / alpha) * log_n
        if not force_uniform and layer < cap:
            values[i] = layer
            branch[i] = True
        else:
            values[i] = cap
    return TransitionParams(
        order=order,
        values=tuple(values),
        log_branch=tuple(branch),
        alpha=float(alpha),
        intervals=intervals,
        log_n=log_n,
    )


@dataclass(frozen=True, eq=False)
class Mesh:
    """Mesh points with their band structure.

    points has one entry per node, strictly increasing from 0 to 1 and
    symmetric (x_j + x_{N-j} = 1 holds exactly: the right half is built by
    mirroring).  band_counts lists the intervals per band, left to right
    (2n+1 entries summing to the interval count).  params records the
    transition values the construction started from; for bisected meshes
    it is the generating coarse mesh's parameter set.
    """

    points: np.ndarray
    band_counts: tuple[int, ...]
    params: TransitionParams

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "band_counts", tuple(int(c) for c in self.band_counts))
        if sum(self.band_counts) != self.num_intervals:
            raise MeshParameterError("band counts do not sum to the interval count")

    @property
    def num_intervals(self) -> int:
        return self.points.size - 1

    @property
    def spacings(self) -> np.ndarray:
        """h_j = x_j - x_{j-1}, j = 1..N (length N)."""
        return np.diff(self.points)

    def interval_band_ids(self) -> np.ndarray:
        """Band index (0-based, left to right) of each interval; length N."""
        return np.repeat(np.arange(len(self.band_counts)), self.band_counts)


def build_mesh(params: TransitionParams) -> Mesh:
    """Construct the mesh for the given transition values.

    Band edges are placed exactly (the stored transition values become mesh
    points verbatim) and each band is subdivided uniformly; the right half
    mirrors the left, so symmetry holds bit for bit.
    """
    n = params.n
    big_n = params.intervals
    half = big_n // 2
    # left-half band edges and interval counts: [0, s_1], (s_i, s_{i+1}], (s_n, 1/2]
    edges = [0.0] + list(params.values) + [0.5]
    counts = [big_n >> (n + 1)]
    counts += [big_n >> (n - i + 2) for i in range(1, n)]
    counts.append(big_n >> 2)
    pts = np.empty(big_n + 1)
    idx = 0
    pts[0] = 0.0
    for left, right, count in zip(edges[:-1], edges[1:], counts):
        width = right - left
        for m in range(1, count):
            pts[idx + m] = left + width * (m / count)
        pts[idx + count] = right
        idx += count
    assert idx == half
    pts[half + 1 :] = 1.0 - pts[:half][::-1]
    band_counts = tuple(counts[:n]) + (big_n >> 1,) + tuple(counts[:n][::-1])
    return Mesh(points=pts, band_counts=band_counts, params=params)


def bisect_mesh(mesh: Mesh) -> Mesh:
    """Halve every interval of a mesh, keeping every existing point.

    The result shares all coarse points (node 2j of the fine mesh is node j
    of the coarse one, the same float) and stays exactly symmetric.  Used
    by the two-mesh error estimator, where the comparison mesh must nest.
    """
    old = mesh.points
    big_n = mesh.num_intervals
    half = big_n // 2
    pts = np.empty(2 * big_n + 1)
    pts[::2] = old
    for j in range(half):
        mid = 0.5 * (old[j] + old[j + 1])
        pts[2 * j + 1] = mid
        pts[2 * big_n - 2 * j - 1] = 1.0 - mid
    band_counts = tuple(2 * c for c in mesh.band_counts)
    return Mesh(points=pts, band_counts=band_counts, params=mesh.params)


def layer_function(side, index: int, x: float, eps, alpha: float) -> float:
    """Analytic layer envelope exp(-x * sqrt(alpha/eps_i)), or its mirror.

    side is "left" or "right" (the right envelope is the left one in 1-x);
    index selects the diffusion parameter (0-based).
    """
    side = Side(side)
    e = float(eps[index])
    t = x if side is Side.LEFT else 1.0 - x
    return math.exp(-t * math.sqrt(alpha / e))


def interaction_point(i: int, j: int, eps, alpha: float) -> float:
    """Point where the scaled envelopes of levels i and j cross.

    Returns the x at which exp(-x sqrt(alpha/eps_i))/sqrt(eps_i) equals the
    same quantity for j.  Requires i < j.  The ordering guarantees between
    such points (monotonicity in i and j, confinement to (0, 1/2]) need the
    halving hypothesis sqrt(eps_i) <= sqrt(eps_j)/2; when it fails the
    value is still returned but an InteractionOrderWarning is emitted.
    """
    if not 0 <= i < j < len(eps):
        raise ValueError("interaction point needs indices 0 <= i < j < n")
    si = math.sqrt(float(eps[i]))
    sj = math.sqrt(float(eps[j]))
    if si > sj / 2.0:
        warnings.warn(
            "sqrt(eps[%d]) > sqrt(eps[%d])/2: crossing-point ordering guarantees do not apply"
            % (i, j),
            InteractionOrderWarning,
            stacklevel=2,
        )
    return math.log(sj / si) / (math.sqrt(alpha) * (1.0 / si - 1.0 / sj))
