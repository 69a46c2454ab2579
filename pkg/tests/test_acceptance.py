"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v -s``; the lines are
also collected in the terminal summary under "acceptance criteria".
"""

import math
import time
from itertools import combinations

import numpy as np
import pytest

from randflag.certify import vanishing_pipeline
from randflag.complex import build_skeleton
from randflag.experiments import (
    TrialConfig,
    expected_maximal_cliques,
    pittel_probability,
    poisson_fit,
    poisson_mean,
    run_trials,
    upper_threshold,
)
from randflag.graph import Graph, Seed, component_count, sample_gnp
from randflag.homology import betti, boundary_matrix, compose_is_zero
from randflag.spectral import lambda2, laplacian, perturbation_check, spectrum

# Soundness sampling skips draws whose expected top-face count exceeds this,
# so the exact audit stays within desk-scale time.
SOUNDNESS_FACE_BUDGET = 20000


def _graph_from_code(n, pairs, code):
    rows = [0] * n
    for i, (u, v) in enumerate(pairs):
        if code >> i & 1:
            rows[u] |= 1 << v
            rows[v] |= 1 << u
    return Graph(n, rows)


def test_criterion_01_exhaustive_oracle_equivalence(acceptance):
    start = time.perf_counter()
    pairs = list(combinations(range(6), 2))
    mismatches = euler_bad = dd_bad = 0
    for code in range(1 << len(pairs)):
        sk = build_skeleton(_graph_from_code(6, pairs, code), 5)
        fast = betti(sk, "modular")
        slow = betti(sk, "exact")
        mismatches += fast.betti != slow.betti or fast.ranks != slow.ranks
        euler_bad += not (fast.euler_holds() and slow.euler_holds())
        for d in range(2, sk.dimension + 1):
            dd_bad += not compose_is_zero(boundary_matrix(sk, d - 1), boundary_matrix(sk, d))
    elapsed = time.perf_counter() - start
    ok = mismatches == euler_bad == dd_bad == 0
    acceptance(1, ok, f"32768 graphs on 6 vertices: {mismatches} Betti mismatches, "
                      f"{euler_bad} Euler failures, {dd_bad} nonzero dd; {elapsed:.0f}s")
    assert ok


def test_criterion_02_garland_soundness(acceptance):
    rng = np.random.default_rng(2)
    sampled = 0
    certified = {1: 0, 2: 0}
    violations = []
    ns, ps = [], []
    skipped = 0
    while sampled < 1000:
        n = int(rng.integers(10, 81))
        p = float(rng.uniform(0.1, 0.9))
        k = int(rng.integers(1, 3))
        if math.comb(n, k + 2) * p ** math.comb(k + 2, 2) > SOUNDNESS_FACE_BUDGET:
            skipped += 1
            continue
        g = sample_gnp(n, p, Seed(2, sampled))
        sampled += 1
        ns.append(n)
        ps.append(p)
        res = vanishing_pipeline(g, k)
        if res.certificate.certified:
            certified[k] += 1
            bk = betti(build_skeleton(g, k + 1), "exact", max_degree=k).betti[k]
            if bk != 0:
                violations.append((n, p, k, bk))
    ok = not violations and sum(certified.values()) > 0
    acceptance(2, ok, f"{sampled} complexes (n {min(ns)}..{max(ns)}, p {min(ps):.2f}..{max(ps):.2f}, "
                      f"{skipped} over-budget draws skipped); certified k=1: {certified[1]}, "
                      f"k=2: {certified[2]}; violations: {len(violations)}")
    assert not violations, violations
    assert certified[1] > 0 and certified[2] > 0


@pytest.fixture(scope="module")
def maximal_clique_run():
    cfg = TrialConfig("maximal_cliques", 200, 1, c=0.0, trials=3000, seed=3)
    return run_trials(cfg)


def test_criterion_03_maximal_clique_expectation(acceptance, maximal_clique_run):
    rec = maximal_clique_run
    p = rec.config.edge_probability
    expected = expected_maximal_cliques(200, 1, p)
    mean, se = rec.aggregate["mean"], rec.aggregate["std_error"]
    z = (mean - expected) / se
    ok = abs(z) <= 3
    acceptance(3, ok, f"p={p:.5f}: mean N2 {mean:.4f} vs E {expected:.4f}, SE {se:.4f}, z={z:+.2f} "
                      f"(limit 3); {rec.wall_time:.0f}s")
    assert abs(p - 0.20954) < 5e-6
    assert ok


def test_criterion_04_poisson_fit(acceptance, maximal_clique_run):
    mu = poisson_mean(1, 0.0)
    fit = poisson_fit(maximal_clique_run, mu)
    ok = fit.tv_distance <= 0.08
    acceptance(4, ok, f"TV(empirical N2, Pois({mu:.5f})) = {fit.tv_distance:.4f} (limit 0.08); "
                      f"chi2 {fit.chi2:.2f} on {fit.dof} dof")
    assert ok


def test_criterion_05_connectivity_threshold(acceptance):
    n = 2000
    base = math.log(n) / n
    high = run_trials(TrialConfig("connected", n, p=1.3 * base, trials=300, seed=5))
    low = run_trials(TrialConfig("connected", n, p=0.7 * base, trials=300, seed=5, stream_offset=300))
    ok = high.success_fraction >= 0.9 and low.success_fraction <= 0.1
    acceptance(5, ok, f"n=2000: P[connected] {high.success_fraction:.3f} at 1.3 ln n/n (need >= 0.9), "
                      f"{low.success_fraction:.3f} at 0.7 ln n/n (need <= 0.1); "
                      f"{high.wall_time + low.wall_time:.0f}s")
    assert ok


def test_criterion_06_h1_vanishing_window(acceptance):
    n = 150
    pu = upper_threshold(n, 1, 0.0)
    above = run_trials(TrialConfig("betti", n, 1, p=1.15 * pu, trials=200, seed=6))
    below = run_trials(TrialConfig("betti", n, 1, p=0.85 * pu, trials=200, seed=6, stream_offset=200))
    ok = above.success_fraction >= 0.8 and below.success_fraction <= 0.3
    acceptance(6, ok, f"n=150, threshold {pu:.4f}: P[beta1=0] {above.success_fraction:.3f} at 1.15x "
                      f"(need >= 0.8), {below.success_fraction:.3f} at 0.85x (need <= 0.3); "
                      f"{above.wall_time + below.wall_time:.0f}s")
    assert ok


def test_criterion_07_pittel_forest_probability(acceptance):
    n, c = 3000, 0.5
    target = pittel_probability(c)
    cfg = TrialConfig("graph_betti1", n, p=c / n, trials=2000, seed=7)
    rec = run_trials(cfg)
    frac = rec.success_fraction
    # Spot-check the cycle-rank shortcut against the boundary-rank computation.
    disagreements = 0
    for t in rec.trials[:100]:
        g = sample_gnp(n, cfg.edge_probability, Seed(cfg.seed, t["stream"]))
        b1 = betti(build_skeleton(g, 1), "modular", of_skeleton=True).betti[1]
        disagreements += b1 != t["value"]
    ok = abs(frac - target) <= 0.03 and disagreements == 0
    acceptance(7, ok, f"n=3000, c=0.5: P[forest] {frac:.4f} vs closed form {target:.5f} (tol 0.03); "
                      f"rank spot-checks disagreeing: {disagreements}/100; {rec.wall_time:.0f}s")
    assert ok


def test_criterion_08_wielandt_hoffman(acceptance):
    rng = np.random.default_rng(8)
    checked = worst = 0
    slack = -math.inf
    stream = 0
    while checked < 500:
        n = int(rng.integers(6, 61))
        p = float(rng.uniform(min(1.0, 3 * math.log(n) / n), 0.9))
        g = sample_gnp(n, p, Seed(8, stream))
        stream += 1
        if min(g.degrees()) < 2 or component_count(g) != 1:
            continue
        edges = list(g.edges())
        e = edges[int(rng.integers(len(edges)))]
        rec = perturbation_check(g, e)
        worst += not rec.ok
        slack = max(slack, rec.lhs - rec.rhs)
        checked += 1
    ok = worst == 0
    acceptance(8, ok, f"500 connected graphs (min degree >= 2): {worst} violations; "
                      f"max lhs - rhs = {slack:.3e}")
    assert ok


def test_criterion_09_spectral_golden_values(acceptance):
    kn_err = max(abs(lambda2(Graph.complete(n)) - n / (n - 1)) for n in range(3, 13))
    c4_err = max(abs(a - b) for a, b in zip(spectrum(laplacian(Graph.cycle(4))).eigenvalues, (0, 1, 1, 2)))
    rng = np.random.default_rng(9)
    tested = multi = bad = 0
    stream = 0
    while tested < 1000:
        n = int(rng.integers(4, 41))
        g = sample_gnp(n, float(rng.uniform(0.05, 0.5)), Seed(9, stream))
        stream += 1
        if min(g.degrees()) == 0:
            continue
        comps = component_count(g)
        multi += comps > 1
        bad += spectrum(laplacian(g)).kernel_dimension() != comps
        tested += 1
    ok = kn_err <= 1e-9 and c4_err <= 1e-9 and bad == 0
    acceptance(9, ok, f"max |lambda2(K_n) - n/(n-1)| {kn_err:.1e}, C4 error {c4_err:.1e}; kernel "
                      f"dimension != components on {bad}/1000 graphs ({multi} disconnected)")
    assert ok


def test_criterion_10_betti_profile(acceptance):
    cfg = TrialConfig("betti_profile", 120, 1, p=0.35, trials=200, seed=10)
    rec = run_trials(cfg)
    frac = rec.success_fraction
    supports = rec.aggregate["support_counts"]
    ok = frac >= 0.7
    acceptance(10, ok, f"n=120, p=0.35: reduced Betti support exactly {{1}} in {frac:.3f} of 200 trials "
                       f"(floor 0.7); supports seen {supports}; {rec.wall_time:.0f}s")
    assert ok
