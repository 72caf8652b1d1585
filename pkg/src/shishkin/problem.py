"""Boundary-value problem data and admissibility checks.

The system solved by this toolkit is

    -eps_i u_i''(x) + sum_j a_ij(x) u_j(x) = f_i(x)   on (0, 1),

with Dirichlet data at both ends and 0 < eps_1 < ... < eps_n <= 1.  A
problem is admissible when, at every x in [0, 1]:

  * the off-diagonal coupling is non-positive, a_ij(x) <= 0 for i != j,
  * every row of A is strictly diagonally dominant,
  * the row sums admit a strictly positive lower bound alpha.

Both conditions are checked by dense sampling (expressions are opaque) and
re-checked on the actual mesh points when a system is assembled.  The
further requirement sqrt(eps_n) <= sqrt(alpha)/4 ties the layer widths to
the coarse region; its failure downgrades the convergence guarantee but
does not block solving, so it is reported as a flag, not an error.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exprs import Expr, ExprDomainError, ExprError, evaluate_array, parse

__all__ = [
    "ProblemSpec",
    "ValidationReport",
    "Violation",
    "ProblemError",
    "ProblemFormatError",
    "CoincidentParametersError",
    "AlphaConditionError",
    "CoefficientDomainError",
    "DEFAULT_SAMPLE_COUNT",
    "DEFAULT_ALPHA_SAFETY",
    "validate_sign_dominance",
    "compute_alpha",
    "check_eps_condition",
    "problem_from_json",
]

DEFAULT_SAMPLE_COUNT = 1024
DEFAULT_ALPHA_SAFETY = 0.9


class ProblemError(ValueError):
    """Base class for problem-definition failures."""


class ProblemFormatError(ProblemError):
    """Malformed problem document; the message cites the offending path."""


class CoincidentParametersError(ProblemError):
    """Two diffusion parameters are equal; distinct parameters are required."""


class AlphaConditionError(ProblemError):
    """No admissible positive lower bound alpha for the row sums of A."""


class CoefficientDomainError(ProblemError):
    """A coefficient or forcing expression failed to evaluate at a point."""


@dataclass(frozen=True)
class Violation:
    """One admissibility failure: which condition, where, and which entry."""

    condition: str  # "sign" or "dominance"
    x: float
    row: int
    col: Optional[int] = None


@dataclass(frozen=True)
class ProblemSpec:
    """Immutable problem data: diffusion parameters, coefficients, boundary values.

    a_entries[i][j] and f_entries[i] are expression trees in x (see
    shishkin.exprs); eps must be strictly increasing with every entry in
    (0, 1].  alpha_override, when given, is used verbatim after a check
    that it sits strictly below the sampled minimum row sum.
    """

    eps: tuple[float, ...]
    a_entries: tuple[tuple[Expr, ...], ...]
    f_entries: tuple[Expr, ...]
    u_left: tuple[float, ...]
    u_right: tuple[float, ...]
    alpha_override: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        object.__setattr__(self, "a_entries", tuple(tuple(row) for row in self.a_entries))
        object.__setattr__(self, "f_entries", tuple(self.f_entries))
        object.__setattr__(self, "u_left", tuple(float(v) for v in self.u_left))
        object.__setattr__(self, "u_right", tuple(float(v) for v in self.u_right))
        n = len(self.eps)
        if n < 1:
            raise ProblemFormatError("eps must contain at least one parameter")
        for i, e in enumerate(self.eps):
            if not (0.0 < e <= 1.0):
                raise ProblemFormatError("eps[%d] = %r must lie in (0, 1]" % (i, e))
        for i in range(n - 1):
            if self.eps[i] == self.eps[i + 1]:
                raise CoincidentParametersError(
                    "eps[%d] and eps[%d] coincide (%r); distinct parameters required"
                    % (i, i + 1, self.eps[i])
                )
            if self.eps[i] > self.eps[i + 1]:
                raise ProblemFormatError("eps must be strictly increasing")
        if len(self.a_entries) != n or any(len(row) != n for row in self.a_entries):
            raise ProblemFormatError("A must be an n x n array of expressions (n = %d)" % n)
        if len(self.f_entries) != n:
            raise ProblemFormatError("f must have n = %d entries" % n)
        if len(self.u_left) != n or len(self.u_right) != n:
            raise ProblemFormatError("u_left and u_right must have n = %d entries" % n)
        if self.alpha_override is not None and not self.alpha_override > 0.0:
            raise ProblemFormatError("alpha override must be positive")

    @property
    def n(self) -> int:
        return len(self.eps)

    @classmethod
    def from_strings(cls, eps, a, f, u_left, u_right, alpha_override=None) -> "ProblemSpec":
        """Build a spec from expression source strings (entries may also be numbers)."""
        n = len(eps)
        a_parsed = tuple(
            tuple(_parse_entry(a[i][j], "A[%d][%d]" % (i, j)) for j in range(len(a[i])))
            for i in range(n)
        )
        f_parsed = tuple(_parse_entry(f[i], "f[%d]" % i) for i in range(len(f)))
        return cls(
            eps=tuple(eps),
            a_entries=a_parsed,
            f_entries=f_parsed,
            u_left=tuple(u_left),
            u_right=tuple(u_right),
            alpha_override=alpha_override,
        )


def _parse_entry(source, where: str) -> Expr:
    if isinstance(source, (int, float)):
        source = repr(float(source))
    try:
        return parse(source)
    except ExprError as err:
        raise ProblemFormatError("%s: %s" % (where, err)) from err


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the admissibility checks over a sample of [0, 1].

    a1_holds covers the sign and dominance conditions; a2_alpha is the
    accepted positive lower bound for the row sums (NaN when unavailable);
    a3_holds records whether sqrt(eps_n) <= sqrt(alpha)/4.  The worst row
    margin is min over samples and rows of a_ii - sum_{j != i} |a_ij|.
    """

    a1_holds: bool
    a2_alpha: float
    a3_holds: bool
    worst_row_margin: float
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def is_admissible(self) -> bool:
        return self.a1_holds and self.a2_alpha > 0.0

    def to_dict(self) -> dict:
        return {
            "a1_holds": self.a1_holds,
            "a2_alpha": None if math.isnan(self.a2_alpha) else self.a2_alpha,
            "a3_holds": self.a3_holds,
            "worst_row_margin": self.worst_row_margin,
            "violations": [
                {"condition": v.condition, "x": v.x, "row": v.row, "col": v.col}
                for v in self.violations
            ],
        }


def _sample_coefficients(spec: ProblemSpec, xs: np.ndarray) -> np.ndarray:
    """Evaluate A over xs; shape (n, n, len(xs)).  Errors cite the entry and x."""
    n = spec.n
    out = np.empty((n, n, xs.size))
    for i in range(n):
        for j in range(n):
            try:
                out[i, j] = evaluate_array(spec.a_entries[i][j], xs)
            except ExprDomainError as err:
                raise CoefficientDomainError("A[%d][%d]: %s" % (i, j, err)) from err
    return out


def validate_sign_dominance(
    spec: ProblemSpec,
    sample_count: int = DEFAULT_SAMPLE_COUNT,
    safety: float = DEFAULT_ALPHA_SAFETY,
) -> ValidationReport:
    """Check the sign and dominance conditions at equispaced sample points.

    Every violation is recorded with its condition, sample point, and row
    (and column, for sign violations).  When the checks pass, the report
    also carries the accepted alpha and the layer-width flag, so a single
    call gives the complete admissibility picture.
    """
    if sample_count < 2:
        raise ValueError("sample_count must be at least 2")
    xs = np.linspace(0.0, 1.0, sample_count)
    a_vals = _sample_coefficients(spec, xs)
    n = spec.n
    violations: list[Violation] = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            bad = a_vals[i, j] > 0.0
            for k in np.flatnonzero(bad):
                violations.append(Violation("sign", float(xs[k]), i, j))
    off_sum = np.sum(np.abs(a_vals), axis=1) - np.abs(a_vals[np.arange(n), np.arange(n)])
    margins = a_vals[np.arange(n), np.arange(n)] - off_sum  # (n, samples)
    worst_row_margin = float(margins.min())
    for i in range(n):
        bad = margins[i] <= 0.0
        for k in np.flatnonzero(bad):
            violations.append(Violation("dominance", float(xs[k]), i))
    a1_holds = not violations
    if a1_holds:
        alpha = compute_alpha(spec, sample_count, safety)
        a3 = check_eps_condition(spec, alpha)
    else:
        alpha = math.nan
        a3 = False
    return ValidationReport(
        a1_holds=a1_holds,
        a2_alpha=alpha,
        a3_holds=a3,
        worst_row_margin=worst_row_margin,
        violations=tuple(violations),
    )


def compute_alpha(
    spec: ProblemSpec,
    sample_count: int = DEFAULT_SAMPLE_COUNT,
    safety: float = DEFAULT_ALPHA_SAFETY,
) -> float:
    """Positive lower bound for the row sums of A, strictly below their minimum.

    Returns safety times the sampled minimum row sum, or alpha_override
    verbatim after checking it sits strictly below that minimum.  The
    safety factor realizes the strict inequality the bound requires.
    """
    if not 0.0 < safety < 1.0:
        raise ValueError("safety must lie in (0, 1)")
    if sample_count < 2:
        raise ValueError("sample_count must be at least 2")
    xs = np.linspace(0.0, 1.0, sample_count)
    a_vals = _sample_coefficients(spec, xs)
    row_sums = a_vals.sum(axis=1)  # (n, samples)
    sampled_min = float(row_sums.min())
    if sampled_min <= 0.0:
        raise AlphaConditionError(
            "sampled minimum row sum is %r; no positive alpha exists" % sampled_min
        )
    if spec.alpha_override is not None:
        if spec.alpha_override >= sampled_min:
            raise AlphaConditionError(
                "alpha override %r is not strictly below the sampled minimum row sum %r"
                % (spec.alpha_override, sampled_min)
            )
        return float(spec.alpha_override)
    return safety * sampled_min


def check_eps_condition(spec: ProblemSpec, alpha: float) -> bool:
    """True iff sqrt(eps_n) <= sqrt(alpha)/4 (largest parameter vs. alpha)."""
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    return math.sqrt(spec.eps[-1]) <= math.sqrt(alpha) / 4.0


def problem_from_json(document) -> ProblemSpec:
    """Build a ProblemSpec from a JSON document (text or an already-parsed dict).

    Expected keys: n, eps, A (n x n array of expression strings), f,
    u_left, u_right, and optionally alpha.  Errors cite the JSON path of
    the offending element.
    """
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as err:
            raise ProblemFormatError("not valid JSON: %s" % err) from err
    else:
        data = document
    if not isinstance(data, dict):
        raise ProblemFormatError("top level: expected a JSON object")
    for key in ("n", "eps", "A", "f", "u_left", "u_right"):
        if key not in data:
            raise ProblemFormatError("missing required key '%s'" % key)
    n = data["n"]
    if not isinstance(n, int) or n < 1:
        raise ProblemFormatError("n: expected a positive integer")
    eps = _number_list(data["eps"], "eps", n)
    a = data["A"]
    if not isinstance(a, list) or len(a) != n:
        raise ProblemFormatError("A: expected %d rows" % n)
    for i, row in enumerate(a):
        if not isinstance(row, list) or len(row) != n:
            raise ProblemFormatError("A[%d]: expected %d entries" % (i, n))
        for j, entry in enumerate(row):
            if not isinstance(entry, (str, int, float)):
                raise ProblemFormatError("A[%d][%d]: expected an expression string" % (i, j))
    f = data["f"]
    if not isinstance(f, list) or len(f) != n:
        raise ProblemFormatError("f: expected %d entries" % n)
    for i, entry in enumerate(f):
        if not isinstance(entry, (str, int, float)):
            raise ProblemFormatError("f[%d]: expected an expression string" % i)
    u_left = _number_list(data["u_left"], "u_left", n)
    u_right = _number_list(data["u_right"], "u_right", n)
    alpha = data.get("alpha")
    if alpha is not None and not isinstance(alpha, (int, float)):
        raise ProblemFormatError("alpha: expected a number")
    return ProblemSpec.from_strings(eps, a, f, u_left, u_right, alpha_override=alpha)


def _number_list(value, where: str, n: int) -> tuple[float, ...]:
    if not isinstance(value, list) or len(value) != n:
        raise ProblemFormatError("%s: expected an array of %d numbers" % (where, n))
    out = []
    for k, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ProblemFormatError("%s[%d]: expected a number" % (where, k))
        out.append(float(v))
    return tuple(out)
