"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as the
criteria execute.
"""

import json
import math

import numpy as np
import pytest

from helpers import quadratic_problem, zmatrix_problem
from shishkin import (
    MeshOrder,
    ProblemSpec,
    Side,
    assemble,
    build_mesh,
    compute_alpha,
    evaluate_array,
    exact_error_study,
    interaction_point,
    layer_function,
    parameter_sweep,
    solve,
    transition_parameters,
    validate_sign_dominance,
)
from shishkin.cli import main

FIRST_ORDER_THRESHOLD = 0.8
SECOND_ORDER_THRESHOLD = 1.6
CONSTANT_RATIO_BOUND = 10.0


def _report(number, name, ok, detail=""):
    line = "ACCEPTANCE %d (%s): %s" % (number, name, "PASS" if ok else "FAIL")
    if detail:
        line += " - " + detail
    print(line)
    return ok


def _random_validated_solves():
    """50 random admissible problems with nonnegative data, varied meshes."""
    rng = np.random.default_rng(20250809)
    cases = []
    for idx in range(50):
        n = int(rng.integers(1, 4))
        spec = zmatrix_problem(rng, n, nonneg_data=True)
        report = validate_sign_dominance(spec, sample_count=257)
        assert report.a1_holds, "generator must produce admissible problems"
        n_mesh = int(rng.choice([64, 128]))
        order = MeshOrder.FIRST if rng.random() < 0.5 else MeshOrder.SECOND
        force = bool(rng.random() < 0.2)
        params = transition_parameters(spec.eps, report.a2_alpha, n_mesh, order,
                                       force_uniform=force)
        mesh = build_mesh(params)
        system = assemble(spec, mesh)
        grid = solve(system)
        cases.append((spec, report, mesh, system, grid))
    return cases


@pytest.fixture(scope="module")
def random_solves():
    return _random_validated_solves()


def test_criterion_1_discrete_maximum_principle(random_solves):
    failures = []
    for idx, (spec, report, mesh, system, grid) in enumerate(random_solves):
        floor = -1e-12 * system.scale
        if grid.values.min() < floor:
            failures.append((idx, grid.values.min(), floor))
    ok = _report(1, "discrete maximum principle", not failures,
                 "%d/50 problems kept min U >= -1e-12*scale" %
                 (50 - len(failures)))
    assert ok, failures


def test_criterion_2_discrete_stability(random_solves):
    failures = []
    for idx, (spec, report, mesh, system, grid) in enumerate(random_solves):
        f_max = max(float(np.max(np.abs(evaluate_array(f, mesh.points))))
                    for f in spec.f_entries)
        bound = max(max(abs(v) for v in spec.u_left),
                    max(abs(v) for v in spec.u_right),
                    f_max / report.a2_alpha)
        sup = float(np.max(np.abs(grid.values)))
        if sup > bound + 1e-10 * system.scale:
            failures.append((idx, sup, bound))
    ok = _report(2, "discrete stability bound", not failures,
                 "%d/50 problems stayed within the bound" % (50 - len(failures)))
    assert ok, failures


def test_criterion_3_oracle_rates_and_uniform_constant():
    ns = [64, 128, 256, 512, 1024]
    eps_sweep = [10.0**-k for k in range(2, 11)]
    problems = []
    for order, threshold in ((MeshOrder.FIRST, FIRST_ORDER_THRESHOLD),
                             (MeshOrder.SECOND, SECOND_ORDER_THRESHOLD)):
        constants = []
        for eps in eps_sweep:
            study = exact_error_study(eps, 1.0, 1.0, 0.0, 0.0, ns, order)
            p512 = [r.order for r in study.rows if r.intervals == 512][0]
            if p512 < threshold:
                problems.append("%s eps=%g p512=%.3f < %.1f"
                                % (order.value, eps, p512, threshold))
            rate = lambda m: (math.log(m) / m) ** order.target_rate
            # fitted constant: the envelope max of E_N / rate(N), the
            # smallest C with E_N <= C * rate(N) over the study sizes
            constants.append(max(r.value / rate(r.intervals) for r in study.rows))
        ratio = max(constants) / min(constants)
        if ratio > CONSTANT_RATIO_BOUND:
            problems.append("%s order: fitted-C max/min = %.2f > %.1f"
                            % (order.value, ratio, CONSTANT_RATIO_BOUND))
    ok = _report(3, "oracle rates and constant spread", not problems,
                 "; ".join(problems) if problems else
                 "all orders above thresholds, constants within factor %g"
                 % CONSTANT_RATIO_BOUND)
    assert ok, problems


def test_criterion_4_two_mesh_system_study():
    spec = ProblemSpec.from_strings([2**-20, 2**-10],
                                    [["2", "-1"], ["-1", "2"]],
                                    ["1", "1"], [0, 0], [0, 0])
    eps_grid = [(2.0**(-2 * j), 2.0**-j) for j in range(4, 11)]
    ns = [64, 128, 256, 512, 1024]
    results = {}
    for order, threshold in ((MeshOrder.FIRST, FIRST_ORDER_THRESHOLD),
                             (MeshOrder.SECOND, SECOND_ORDER_THRESHOLD)):
        report = parameter_sweep(spec, eps_grid, ns, order)
        results[order] = (report.uniform_order_estimate, threshold)
    failures = ["%s: %.4f < %.1f" % (o.value, est, thr)
                for o, (est, thr) in results.items() if est < thr]
    ok = _report(4, "parameter-uniform two-mesh study", not failures,
                 ", ".join("%s=%.4f" % (o.value, est)
                           for o, (est, _) in results.items()))
    assert ok, failures


def test_criterion_5_structural_suite():
    failures = []

    # band counts: [N/2^(n+1), N/2^(n-i+2) ..., N/2, mirrored]
    for n, eps in ((1, [1e-6]), (2, [1e-8, 1e-4]), (3, [1e-9, 1e-6, 1e-3])):
        for n_mesh in (4 << n, 64, 256):
            params = transition_parameters(eps, 1.0, n_mesh, MeshOrder.FIRST)
            mesh = build_mesh(params)
            expected = [n_mesh >> (n + 1)]
            expected += [n_mesh >> (n - i + 2) for i in range(1, n)]
            expected += [n_mesh >> 1]
            expected += expected[:n][::-1]
            if list(mesh.band_counts) != expected or sum(mesh.band_counts) != n_mesh:
                failures.append("band counts n=%d N=%d" % (n, n_mesh))

    # all-caps vector: exactly uniform spacing
    for n_mesh in (64, 512):
        params = transition_parameters([0.125, 0.25, 0.5], 1.0, n_mesh,
                                       MeshOrder.FIRST)
        if params.b_vector != (0, 0, 0):
            failures.append("expected all-caps branches at N=%d" % n_mesh)
        mesh = build_mesh(params)
        if not np.all(mesh.spacings == 1.0 / n_mesh):
            failures.append("uniform spacing not exact at N=%d" % n_mesh)

    # envelope identities at log-branch transition values
    for order, power in ((MeshOrder.FIRST, 1), (MeshOrder.SECOND, 2)):
        for n_mesh in (64, 256, 1024):
            eps = [2**-28, 2**-16]
            params = transition_parameters(eps, 1.0, n_mesh, order)
            for i, hit in enumerate(params.log_branch):
                if not hit:
                    continue
                value = layer_function(Side.LEFT, i, params.values[i], eps, 1.0)
                target = float(n_mesh) ** -power
                if abs(value - target) > 1e-12 * target:
                    failures.append("envelope identity %s N=%d level=%d"
                                    % (order.value, n_mesh, i))

    # crossing-point ordering over 100 random admissible triples
    rng = np.random.default_rng(1138)
    for _ in range(100):
        s3 = 10.0 ** rng.uniform(-2.5, math.log10(0.25))
        s2 = s3 * rng.uniform(0.1, 0.5)
        s1 = s2 * rng.uniform(0.1, 0.5)
        eps = [s1**2, s2**2, s3**2]
        x12 = interaction_point(0, 1, eps, 1.0)
        x13 = interaction_point(0, 2, eps, 1.0)
        x23 = interaction_point(1, 2, eps, 1.0)
        if not (0.0 < x12 < x13 < x23 <= 0.5):
            failures.append("crossing ordering for eps=%r" % (eps,))

    # layer-envelope monotonicity over 1000 random samples
    rng = np.random.default_rng(90125)
    eps = [1e-5, 1e-3, 1e-1]
    for _ in range(1000):
        x, y = np.sort(rng.uniform(0.0, 1.0, size=2))
        i = int(rng.integers(0, 2))
        j = int(rng.integers(i + 1, 3))
        left_i_x = layer_function(Side.LEFT, i, x, eps, 1.0)
        ok_sample = (
            left_i_x < layer_function(Side.LEFT, j, x, eps, 1.0)
            and left_i_x > layer_function(Side.LEFT, i, y, eps, 1.0)
            and 0.0 < left_i_x <= 1.0
            and layer_function(Side.RIGHT, i, x, eps, 1.0)
            < layer_function(Side.RIGHT, j, x, eps, 1.0)
            and layer_function(Side.RIGHT, i, x, eps, 1.0)
            < layer_function(Side.RIGHT, i, y, eps, 1.0)
        )
        if not ok_sample:
            failures.append("monotonicity at x=%r y=%r i=%d j=%d" % (x, y, i, j))

    ok = _report(5, "structural suite", not failures,
                 "bands, uniform meshes, envelope identities, orderings")
    assert ok, failures[:10]


def test_criterion_6_quadratic_exactness():
    failures = []
    configs = [
        ("uniform-natural", [0.25, 1.0], False),
        ("uniform-forced", [1e-8, 1e-4], True),
        ("mixed", [1e-8, 0.9], False),
        ("full-layer", [1e-8, 1e-4], False),
    ]
    coeffs = [(0.0, 1.0, -1.0), (1.0, 0.5, 0.5)]
    a_matrix = [[2.0, -1.0], [-1.0, 2.0]]
    for name, eps, force in configs:
        spec, exact = quadratic_problem(eps, a_matrix, coeffs)
        alpha = compute_alpha(spec)
        for order in (MeshOrder.FIRST, MeshOrder.SECOND):
            for n_mesh in (16, 64, 256):
                params = transition_parameters(spec.eps, alpha, n_mesh, order,
                                               force_uniform=force)
                mesh = build_mesh(params)
                grid = solve(assemble(spec, mesh))
                expected = exact(mesh.points)
                scale = 1.0 + float(np.max(np.abs(expected)))
                err = float(np.max(np.abs(grid.values - expected)))
                if err > 1e-9 * scale:
                    failures.append("%s %s N=%d err=%.2e"
                                    % (name, order.value, n_mesh, err))
    ok = _report(6, "quadratic exactness on every mesh class", not failures,
                 "%d configurations checked" % (len(configs) * 6))
    assert ok, failures


def test_criterion_7_deterministic_artifacts(tmp_path):
    problem = tmp_path / "problem.json"
    problem.write_text(json.dumps({
        "n": 2, "eps": [1e-6, 1e-2],
        "A": [["2", "-1"], ["-1", "2"]],
        "f": ["1", "1"], "u_left": [0, 0], "u_right": [0, 0],
    }))
    snapshots = []
    for tag in ("first", "second"):
        mesh_out = tmp_path / ("mesh_%s.csv" % tag)
        sol_out = tmp_path / ("sol_%s.csv" % tag)
        rep_out = tmp_path / ("rep_%s.csv" % tag)
        assert main(["mesh", str(problem), "--N", "64", "-o", str(mesh_out)]) == 0
        assert main(["solve", str(problem), "--N", "64", "-o", str(sol_out)]) == 0
        assert main(["converge", str(problem), "--order", "first",
                     "--N", "64,128", "-o", str(rep_out)]) == 0
        snapshots.append((mesh_out.read_bytes(), sol_out.read_bytes(),
                          rep_out.read_bytes()))
    ok = _report(7, "byte-identical artifacts", snapshots[0] == snapshots[1])
    assert ok
