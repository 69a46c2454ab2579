import io
import json
import math

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from helpers import graph_from_code
from randflag.complex import count_maximal_cliques
from randflag.experiments import (
    ThresholdRangeError,
    TrialConfig,
    _crossing,
    critical_p,
    expected_maximal_cliques,
    lower_threshold,
    pittel_probability,
    poisson_fit,
    poisson_mean,
    run_trials,
    success,
    sweep,
    sweep_csv,
    upper_threshold,
    write_jsonl,
)

# -- closed forms, checked against exact symbolic evaluation ---------------------

n_, k_, e_, c_ = sympy.symbols("n k eps c", positive=True)


def sym_upper(n, k, eps):
    return float(sympy.N(((sympy.Rational(k, 2) + 1 + eps) * sympy.log(n) / n) ** sympy.Rational(1, k + 1), 30))


def test_upper_threshold_examples():
    assert upper_threshold(100, 1, 0) == pytest.approx(sym_upper(100, 1, 0), abs=1e-12)
    assert upper_threshold(100, 1, 0) == pytest.approx(0.26283, abs=5e-6)
    assert upper_threshold(math.e, 1, 0.5) == pytest.approx(math.sqrt(2 / math.e), abs=1e-12)
    assert upper_threshold(math.e, 1, 0.5) == pytest.approx(0.8578, abs=5e-5)


@given(st.integers(10, 10**6), st.integers(1, 4), st.floats(0, 2), st.floats(0.01, 1))
def test_upper_threshold_monotone_in_eps(n, k, eps, step):
    try:
        assert upper_threshold(n, k, eps) < upper_threshold(n, k, eps + step)
    except ThresholdRangeError:
        pass


def test_upper_threshold_out_of_range():
    with pytest.raises(ThresholdRangeError):
        upper_threshold(3, 1, 5)
    with pytest.raises(ThresholdRangeError):
        upper_threshold(1, 1, 0)


def test_lower_threshold_examples():
    assert lower_threshold(100, 1, 0) == pytest.approx(0.02, abs=1e-15)
    assert lower_threshold(64, 2, 1) == pytest.approx(0.25, abs=1e-15)
    for n in (7, 50, 1000):
        assert lower_threshold(n, 1, 0) == pytest.approx(2 / n, rel=1e-15)
    with pytest.raises(ThresholdRangeError):
        lower_threshold(2, 1, 5)
    with pytest.raises(ValueError):
        lower_threshold(10, 0, 0)


def test_critical_p_examples():
    ref = float(sympy.N(((sympy.Rational(3, 2) * sympy.log(200) + sympy.log(sympy.log(200)) / 2) / 200) ** sympy.Rational(1, 2), 30))
    assert critical_p(200, 1, 0) == pytest.approx(ref, abs=1e-12)
    assert critical_p(200, 1, 0) == pytest.approx(0.20954, abs=5e-6)
    assert critical_p(200, 1, -1) < critical_p(200, 1, 1)
    with pytest.raises(ThresholdRangeError):
        critical_p(200, 1, 1000)
    with pytest.raises(ThresholdRangeError):
        critical_p(200, 1, -100)


def test_expected_maximal_cliques_examples():
    assert expected_maximal_cliques(5, 1, 1.0) == 0
    assert expected_maximal_cliques(5, 0, 0.0) == 5
    assert expected_maximal_cliques(4, 1, 0.5) == pytest.approx(1.6875, abs=1e-15)
    assert expected_maximal_cliques(2, 3, 0.5) == 0
    with pytest.raises(ValueError):
        expected_maximal_cliques(5, 1, 1.5)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("p", [0.0, 0.3, 0.5, 0.9, 1.0])
def test_expected_maximal_cliques_exhaustive(n, p):
    # Sum over all graphs on n vertices, weighted by their G(n, p) probability.
    pairs = math.comb(n, 2)
    for k in range(n):
        total = 0.0
        for code in range(1 << pairs):
            m = bin(code).count("1")
            weight = p**m * (1 - p) ** (pairs - m)
            total += weight * count_maximal_cliques(graph_from_code(n, code), k + 1)
        assert expected_maximal_cliques(n, k, p) == pytest.approx(total, abs=1e-12)


def test_poisson_mean_examples():
    assert poisson_mean(1, 0) == pytest.approx(math.sqrt(1.5) / 2, abs=1e-15)
    assert poisson_mean(1, 0) == pytest.approx(0.61237, abs=5e-6)
    assert poisson_mean(2, 0) == pytest.approx(1 / 3, abs=1e-15)
    assert poisson_mean(1, 50) < 1e-20
    with pytest.raises(ValueError):
        poisson_mean(0, 0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_poisson_mean_is_the_limit(k):
    # The finite-n expectation approaches the limit from above, slowly.
    ratios = [expected_maximal_cliques(n, k, critical_p(n, k, 0.0)) / poisson_mean(k, 0.0) for n in (10**6, 10**9, 10**12, 10**15, 10**30)]
    assert all(r > 1 for r in ratios)
    assert ratios == sorted(ratios, reverse=True)
    assert ratios[-1] - 1 < (ratios[0] - 1) / 2


@pytest.mark.xfail(strict=True, reason="relative gap at n=1e6 is 3.1%, 9.5%, 17.5% for k=1,2,3; log-log corrections decay slowly")
@pytest.mark.parametrize("k", [1, 2, 3])
def test_poisson_mean_within_two_percent_at_one_million(k):
    n = 10**6
    ratio = expected_maximal_cliques(n, k, critical_p(n, k, 0.0)) / poisson_mean(k, 0.0)
    assert abs(ratio - 1) <= 0.02


def test_pittel_examples():
    assert pittel_probability(0) == 1
    assert pittel_probability(0.5) == pytest.approx(0.96650, abs=5e-6)
    assert pittel_probability(0.5) == pytest.approx(math.sqrt(0.5) * math.exp(0.25 + 0.0625), abs=1e-15)
    assert pittel_probability(1 - 1e-12) < 1e-5
    with pytest.raises(ValueError):
        pittel_probability(1)


# -- trial configs and runs ------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(statistic="nope", n=10, p=0.5),
        dict(statistic="betti", n=10),
        dict(statistic="betti", n=10, p=0.5, c=0.0),
        dict(statistic="betti", n=10, p=1.5),
        dict(statistic="betti", n=10, k=0, p=0.5),
        dict(statistic="has_t_certified", n=10, k=2, p=0.5),
        dict(statistic="betti", n=10, p=0.5, trials=0),
        dict(statistic="betti", n=10, p=0.5, method="float"),
        dict(statistic="connected", n=0, p=0.5),
        dict(statistic="maximal_cliques", n=10, c=100.0),
    ],
)
def test_infeasible_configs_rejected(kwargs):
    with pytest.raises(ValueError):
        TrialConfig(**kwargs)


@pytest.mark.parametrize("p", [0.0, 1.0])
def test_betti1_trivial_extremes(p):
    rec = run_trials(TrialConfig("betti", 12, 1, p=p, trials=5))
    assert rec.values == [0] * 5
    assert rec.success_fraction == 1.0


def test_records_are_reproducible():
    cfg = TrialConfig("maximal_cliques", 60, 1, c=0.0, trials=40, seed=9)
    a, b = run_trials(cfg), run_trials(cfg)
    assert a.trials == b.trials and a.aggregate == b.aggregate
    c = run_trials(TrialConfig("maximal_cliques", 60, 1, c=0.0, trials=40, seed=10))
    assert c.trials != a.trials


def test_parallel_matches_serial():
    cfg = TrialConfig("betti", 30, 1, p=0.3, trials=12, seed=4)
    assert run_trials(cfg, jobs=2).trials == run_trials(cfg, jobs=1).trials


def test_aggregate_fields():
    rec = run_trials(TrialConfig("maximal_cliques", 40, 1, p=0.3, trials=50))
    agg = rec.aggregate
    for key in ("mean", "variance", "std_error", "ci95_half_width", "distribution", "success_fraction"):
        assert key in agg
    assert sum(agg["distribution"].values()) == 50
    summary = json.loads(json.dumps(rec.summary()))
    assert summary["config"]["resolved_p"] == 0.3


def test_statistics_run():
    for stat, k in [("connected", 1), ("certified", 1), ("has_t_certified", 1), ("graph_betti1", 1), ("betti_profile", 1)]:
        rec = run_trials(TrialConfig(stat, 14, k, p=0.6, trials=3, audit=stat.endswith("certified")))
        assert len(rec.trials) == 3
    rec = run_trials(TrialConfig("certified", 20, 1, p=0.8, trials=4, audit=True))
    for t in rec.trials:
        if t["value"]:
            assert t["betti_k"] == 0


def test_success_rule():
    cfg = TrialConfig("betti_profile", 10, 1, p=0.5)
    assert success(cfg, [0, 3, 0])
    assert not success(cfg, [0, 3, 1])
    assert not success(cfg, [0, 0, 0])
    assert success(TrialConfig("connected", 10, p=0.5), True)
    assert success(TrialConfig("betti", 10, p=0.5), 0)


def test_graph_betti1_matches_forest_test():
    rec = run_trials(TrialConfig("graph_betti1", 200, p=0.5 / 200, trials=50))
    assert all(v >= 0 for v in rec.values)


def test_maximal_clique_mean_small_scale():
    # A desk-sized shadow of the expectation formula: 600 trials at n=60.
    cfg = TrialConfig("maximal_cliques", 60, 1, p=0.3, trials=600, seed=1)
    rec = run_trials(cfg)
    agg = rec.aggregate
    assert abs(agg["mean"] - expected_maximal_cliques(60, 1, 0.3)) < 4 * agg["std_error"]


def test_success_monotone_in_mu():
    # Larger c means smaller mu, so P[N_2 = 0] should not decrease.
    res = sweep([-1.0, 0.0, 1.0, 2.0], TrialConfig("maximal_cliques", 80, 1, c=0.0, trials=300, seed=3), axis="c")
    fr = res.fractions
    hw = [r.aggregate["success_ci95"] for r in res.records]
    for i in range(len(fr) - 1):
        assert fr[i + 1] >= fr[i] - 2 * max(hw[i], hw[i + 1])


# -- Poisson fit -----------------------------------------------------------------------


def test_poisson_fit_point_mass():
    fit = poisson_fit([0] * 10, 1.0)
    assert fit.tv_distance == pytest.approx(1 - math.exp(-1), abs=1e-12)


def test_poisson_fit_exact_proportions():
    mu, T = 1.3, 10**6
    values = []
    for j in range(40):
        values += [j] * round(T * stats.poisson.pmf(j, mu))
    fit = poisson_fit(values, mu)
    assert fit.tv_distance < 1e-5
    assert fit.p_value > 0.99


def test_poisson_fit_tail_beyond_support():
    # Values far in the tail count fully toward the distance.
    fit = poisson_fit([30], 1.0)
    assert fit.tv_distance == pytest.approx(1.0, abs=1e-12)


def test_poisson_fit_rejects_bad_input():
    with pytest.raises(ValueError):
        poisson_fit([], 1.0)
    with pytest.raises(ValueError):
        poisson_fit([-1, 2], 1.0)


def test_poisson_fit_chi2_matches_scipy():
    rng = __import__("numpy").random.default_rng(0)
    values = rng.poisson(2.0, 5000).tolist()
    fit = poisson_fit(values, 2.0)
    # Same pooling, via scipy's chisquare.
    j = fit.dof
    obs = [values.count(i) for i in range(j)] + [sum(v >= j for v in values)]
    exp = [5000 * stats.poisson.pmf(i, 2.0) for i in range(j)] + [5000 * stats.poisson.sf(j - 1, 2.0)]
    ref = stats.chisquare(obs, exp)
    assert fit.chi2 == pytest.approx(ref.statistic, rel=1e-9)
    assert fit.p_value == pytest.approx(ref.pvalue, rel=1e-6)


# -- sweeps -------------------------------------------------------------------------


def test_crossing_interpolation():
    assert _crossing([0.0, 1.0], [0.0, 1.0]) == 0.5
    assert _crossing([1.0, 2.0, 3.0], [0.1, 0.3, 0.7]) == pytest.approx(2.5)
    assert _crossing([1.0, 2.0], [0.8, 0.9]) is None


def test_sweep_single_point_and_errors():
    cfg = TrialConfig("connected", 50, p=0.1, trials=5)
    res = sweep([0.1], cfg)
    assert len(res.records) == 1 and res.crossing is None
    with pytest.raises(ValueError):
        sweep([], cfg)
    with pytest.raises(ValueError):
        sweep([0.1, 0.3, 0.2], cfg)
    with pytest.raises(ValueError):
        sweep([0.1, 0.2], cfg, axis="q")


def test_connectivity_sweep_crosses():
    n = 400
    base = math.log(n) / n
    res = sweep([0.5 * base, 1.5 * base], TrialConfig("connected", n, p=base, trials=100))
    assert res.fractions[0] < 0.5 < res.fractions[1]
    assert 0.5 * base < res.crossing < 1.5 * base
    # Grid points draw disjoint stream ranges.
    assert res.records[1].trials[0]["stream"] == 100


def test_sweep_csv_and_jsonl():
    cfg = TrialConfig("connected", 30, p=0.2, trials=4)
    res = sweep([0.1, 0.25], cfg)
    rows = sweep_csv(res).splitlines()
    assert rows[0] == "p,success_fraction,ci95_half_width"
    assert rows[1].startswith("0.1,")
    buf = io.StringIO()
    write_jsonl(res.records[0], buf)
    lines = [json.loads(x) for x in buf.getvalue().splitlines()]
    assert [x["stream"] for x in lines] == [0, 1, 2, 3]
