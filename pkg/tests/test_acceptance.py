"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from cli_cases import CASES, GOLDEN, run_case
from strategies import (CYCLE_TARGET, circle, directional_fd, random_cloud, random_complex,
                        random_diagram, random_image_pair, random_vertex_values,
                        rectangle_image, regular_tetrahedron, square, unit_sphere, wheel)
from topokit import geometry
from topokit.lpvi import LpviConfig, lpvi
from topokit.metrics import bottleneck, brute_force_diagram_distance, topo_diff, wasserstein
from topokit.optimizer import (OptimizerConfig, ToyProblem, estimate_constants, optimize,
                               verify_fluctuation_structure, verify_lemma2, verify_lemma3,
                               verify_net_progress)
from topokit.persistence import (alpha_filtration, alpha_persistence, compute_persistence,
                                 lower_star_filtration)
from topokit.persloss import persloss, persloss_gradient
from topokit.rank_oracle import betti_rank_oracle

pytestmark = pytest.mark.acceptance

W0 = np.random.default_rng(0).random(8)


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n{label}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail
    return emit


def test_c1_persistence_matches_oracle(report):
    start = time.perf_counter()
    mismatches = 0
    for seed in range(500):
        rng = np.random.default_rng(seed)
        n, S = random_complex(rng)
        fc = lower_star_filtration(S, random_vertex_values(rng, n))
        mismatches += compute_persistence(fc).triples(0) != betti_rank_oracle(fc).triples(0)
    for seed in range(100):
        fc = alpha_filtration(random_cloud(np.random.default_rng(1000 + seed)))
        mismatches += compute_persistence(fc).triples(0) != betti_rank_oracle(fc).triples(0)
    elapsed = time.perf_counter() - start
    report("C1 persistence vs rank oracle", mismatches == 0 and elapsed < 60,
           f"600 trials, {mismatches} mismatches, {elapsed:.1f}s")


def test_c2_analytic_fixtures(report):
    sq = [(p.birth, p.death) for p in alpha_persistence(square()).in_dim(1) if p.persistence > 0]
    (bar,) = [p for p in alpha_persistence(circle(64)).in_dim(1) if p.persistence > 1e-6]
    circle_err = max(abs(bar.birth - math.sin(math.pi / 64) ** 2), abs(bar.death - 1.0))
    _, r2 = geometry.circumsphere((0, 1, 2, 3), regular_tetrahedron())
    tet_err = abs(r2 - 3 / 8)
    ok = sq == [(0.25, 0.5)] and circle_err < 1e-9 and tet_err < 1e-12
    report("C2 analytic fixtures", ok,
           f"square {sq}, circle err {circle_err:.1e}, tetra err {tet_err:.1e}")


def test_c3_metrics_vs_brute_force(report):
    worst = 0.0
    for seed in range(500):
        rng = np.random.default_rng(seed)
        A, B = random_diagram(rng), random_diagram(rng)
        worst = max(worst, abs(wasserstein(A, B) - brute_force_diagram_distance(A, B)),
                    abs(bottleneck(A, B) - brute_force_diagram_distance(A, B, math.inf)))
    axiom_failures = 0
    for seed in range(200):
        rng = np.random.default_rng(10_000 + seed)
        A, B, C = (random_diagram(rng) for _ in range(3))
        for dist in (wasserstein, bottleneck):
            axiom_failures += not (dist(A, A) == 0 and abs(dist(A, B) - dist(B, A)) <= 1e-12
                                   and dist(A, C) <= dist(A, B) + dist(B, C) + 1e-9)
    report("C3 diagram metrics", worst < 1e-9 and axiom_failures == 0,
           f"500 oracle trials, worst error {worst:.1e}, {axiom_failures} axiom failures")


def test_c4_lower_star_stability(report):
    violations = 0
    for seed in range(200):
        rng = np.random.default_rng(20_000 + seed)
        n, S = random_complex(rng)
        f = random_vertex_values(rng, n)
        g = f + rng.uniform(-0.2, 0.2, n) * rng.random()
        df = compute_persistence(lower_star_filtration(S, f)).capped(5.0)
        dg = compute_persistence(lower_star_filtration(S, g)).capped(5.0)
        violations += bottleneck(df, dg) > np.max(np.abs(f - g)) + 1e-12
    report("C4 lower-star stability", violations == 0, f"200 trials, {violations} violations")


def test_c5_lpvi_safety(report):
    X = unit_sphere()
    out, rep = lpvi(X, LpviConfig())
    out2, _ = lpvi(X, LpviConfig())
    bad_3d = bad_2d = 0
    for nb in rep.neighborhoods:
        local = X[[nb.center, *nb.neighbors]]
        if nb.branch == "3d":
            scaled = (local - X[nb.center]) / nb.radius
            cand = (nb.candidates - X[nb.center]) / nb.radius
            bad_3d += not topo_diff(scaled, np.vstack([scaled, cand])) < 0.5
        elif nb.branch == "2d":
            normal = np.cross(*nb.frame.basis)
            diam = np.ptp(local, axis=0).max()
            bad_2d += sum(abs(np.dot(p - nb.frame.origin, normal)) > 1e-9 * diam
                          for p in out[list(nb.added)])
    preserved = np.array_equal(out[:200], X)
    deterministic = out.tobytes() == out2.tobytes()
    ok = bad_3d == bad_2d == 0 and preserved and deterministic and rep.accepted_3d > 0
    report("C5 LPVI safety", ok,
           f"{rep.accepted_3d} 3D accepted, {rep.fallback_2d} 2D fallback, "
           f"{bad_3d + bad_2d} violations, preserved={preserved}, deterministic={deterministic}")


def test_c6_persloss(report):
    identity = all(persloss(img, img).total == 0.0 for img in
                   (np.random.default_rng(s).random((8, 8, 3)) for s in range(5)))
    fixture = persloss(rectangle_image(0.3, 0.9), rectangle_image(0.7, 0.9), (1, 1, 0)).total
    stable, worst, seed = 0, 0.0, 0
    while stable < 100 and seed < 300:
        R, G, rng = random_image_pair(seed)
        _, grad = persloss_gradient(R, G, (2, 1, 0))
        dirs = [rng.normal(size=R.shape), grad.d_pixels / np.linalg.norm(grad.d_pixels)]
        err, unstable, _ = directional_fd(R, G, (2, 1, 0), dirs)
        if unstable < len(dirs):
            stable += 1
            worst = max(worst, err)
        seed += 1
    ok = identity and abs(fixture - 0.005) < 1e-12 and stable >= 100 and worst < 1e-4
    report("C6 PersLoss", ok, f"identity={identity}, fixture {fixture!r}, "
           f"{stable} stable pairs, worst FD rel error {worst:.1e}")


def test_c7_convergence_machine_check(report):
    start = time.perf_counter()
    eps = 0.01
    problem = ToyProblem(wheel(), CYCLE_TARGET)
    runs = {
        "cycle": optimize(problem, OptimizerConfig(lambda_topo=1.0, epsilon=eps,
                                                   persloss_period=1), W0),
        "supervised": optimize(ToyProblem(wheel(), CYCLE_TARGET, supv_weight=10.0),
                               OptimizerConfig(lambda_topo=0.05, epsilon=eps,
                                               persloss_period=1), W0),
    }
    details, ok = [], True
    for name, r in runs.items():
        c = r.constants
        within = r.stop_reason == "converged" and r.stop_index <= c.iteration_bound(eps)
        lemmas = all(verify_lemma2(r.trace)) and all(verify_lemma3(r.trace, c))
        progress = all(verify_net_progress(r.trace, eps))
        ok &= within and lemmas and progress
        details.append(f"{name}: {len(r.trace)} iters <= {c.iteration_bound(eps)}, "
                       f"lemmas={lemmas}, progress={progress}")
    c = estimate_constants(problem, 1.0)
    neg = optimize(problem, OptimizerConfig(eta=100 / (2 * c.C2), persloss_period=1), W0)
    neg_violations = verify_lemma2(neg.trace).count(False)
    elapsed = time.perf_counter() - start
    ok &= neg_violations >= 1 and elapsed < 120
    report("C7 convergence machine check", ok,
           "; ".join(details) + f"; negative control {neg_violations} violations, {elapsed:.1f}s")


def test_c8_fluctuation_structure(report):
    traces = [
        optimize(ToyProblem(wheel(), CYCLE_TARGET), OptimizerConfig(persloss_period=1), W0),
        optimize(ToyProblem(wheel(), CYCLE_TARGET, supv_weight=10.0),
                 OptimizerConfig(lambda_topo=0.05, persloss_period=1), W0),
        optimize(ToyProblem(wheel(), CYCLE_TARGET, supv_weight=10.0),
                 OptimizerConfig(lambda_topo=0.05), W0),
    ]
    step_rises = sum(verify_fluctuation_structure(r.trace).count(False) for r in traces)
    refresh_rises = sum(row.refresh_change > 0 for r in traces for row in r.trace.rows)
    report("C8 fluctuation structure", step_rises == 0,
           f"{len(traces)} traces, {step_rises} gradient-step increases, "
           f"{refresh_rises} refresh increases")


def test_c9_cli_goldens(report, tmp_path):
    mismatched = []
    for name in sorted(CASES):
        for run in (1, 2):
            (tmp_path / f"{name}_{run}").mkdir()
        first = run_case(name, tmp_path / f"{name}_1")
        second = run_case(name, tmp_path / f"{name}_2")
        golden = {f: (GOLDEN / f).read_bytes() for f in first[1]}
        if first != second or first[1] != golden or first[0] != CASES[name][2]:
            mismatched.append(name)
    report("C9 CLI goldens", not mismatched,
           f"{len(CASES)} cases x 2 runs, mismatched: {mismatched or 'none'}")
