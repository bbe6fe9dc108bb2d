import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softcomplex.complex import thin
from softcomplex.experiments import (
    SWEEP_HEADER,
    ConfigError,
    EstimatorResult,
    InsufficientEvents,
    RegimeSpec,
    TrialConfig,
    build_trial_complex,
    conditional_thinning_check,
    estimate,
    extract,
    mu_integral,
    normalized_pattern_density,
    pattern_count,
    predicted_cech_pattern_factor,
    predicted_thinning_factor,
    run_trial,
    run_trials,
    sample_cloud,
    sweep,
    sweep_csv,
)
from softcomplex.geometry import Domain, PointCloud


def pair_probability_unit_square(r):
    """P(|X - Y| <= r) for X, Y uniform on the unit square, r <= 1 (exact)."""
    return math.pi * r**2 - 8.0 / 3.0 * r**3 + 0.5 * r**4


def test_pair_probability_oracle_against_rejection_sampling():
    rng = np.random.default_rng(3)
    x, y = rng.random((2, 2_000_000, 2))
    hit = (((x - y) ** 2).sum(axis=1) <= 0.05**2).mean()
    p = pair_probability_unit_square(0.05)
    assert abs(hit - p) < 3 * math.sqrt(p * (1 - p) / 2_000_000)


# ---------------------------------------------------------------------------
# configuration


def test_config_validation():
    with pytest.raises(ConfigError):
        TrialConfig(r=0)
    with pytest.raises(ConfigError):
        TrialConfig(k_max=3, rho=(1, 1))
    with pytest.raises(ConfigError):
        TrialConfig(model="alpha")
    with pytest.raises(ConfigError):
        TrialConfig(n=10.5)
    with pytest.raises(ConfigError):
        TrialConfig(rho=(1.2, 1))
    with pytest.raises(ConfigError):
        TrialConfig.from_dict({"n": 10, "radius": 0.1})
    cfg = TrialConfig(n=50, r=0.2, seed=4)
    assert TrialConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.W == pytest.approx(50 * 0.04)
    assert TrialConfig(process="poisson", n=50).n == 50.0


def test_regime_radii():
    assert RegimeSpec("subcritical", c=2, eps=0.5).radius(100, 2) == pytest.approx(2 * 100 ** -1.0)
    assert RegimeSpec("critical", lam=3).radius(300, 2) == pytest.approx(0.1)
    spec = RegimeSpec("supercritical", c=1.5, gamma=0.5)
    n, d = 1000, 2
    assert n * spec.radius(n, d) ** d == pytest.approx(1.5**2 * math.log(n) ** 0.5)
    assert RegimeSpec("connected", c=2).radius(1000, 1) == pytest.approx(2 * math.log(1000) / 1000)
    with pytest.raises(ConfigError):
        RegimeSpec("hyper")
    with pytest.raises(ConfigError):
        RegimeSpec("subcritical", eps=0)


# ---------------------------------------------------------------------------
# run_trial


def test_identity_thinning_trial():
    cfg = TrialConfig(n=120, r=0.15, rho=(1, 1, 1), k_max=3, seed=5)
    raw, _ = build_trial_complex(cfg, 2, thinned=False)
    th, _ = build_trial_complex(cfg, 2)
    assert raw == th
    res = run_trial(cfg, 2)
    assert res.census.empty_simplex == {1: 0, 2: 0}


def test_no_edges_trial():
    cfg = TrialConfig(n=40, r=0.5, rho=(0, 1, 1), k_max=3)
    res = run_trial(cfg, 0)
    assert tuple(res.betti) == (40, 0, 0)
    assert res.critical == [40, 0, 0, 0]


def test_trials_are_deterministic():
    cfg = TrialConfig(n=150, r=0.12, rho=(0.9, 0.6), model="cech", seed=11)
    assert run_trial(cfg, 3) == run_trial(cfg, 3)
    a = run_trials(cfg, 6, threads=1)
    b = run_trials(cfg, 6, threads=4)
    assert a == b
    assert run_trial(cfg, 3) != run_trial(cfg, 4)


@pytest.mark.parametrize("model", ["rips", "cech"])
@pytest.mark.parametrize("process", ["binomial", "poisson"])
def test_trial_invariants_across_models(model, process):
    cfg = TrialConfig(n=150, d=3, r=0.25, rho=(0.9, 0.7, 0.5), k_max=3, model=model, process=process, seed=1)
    for t in range(15):
        res = run_trial(cfg, t)
        assert len(res.betti) == 3 and len(res.critical) == 4


def test_large_trial_uses_morse_route_consistently():
    cfg = TrialConfig(n=1500, r=0.08, rho=(0.95, 0.9), k_max=2, seed=3)
    cx, _ = build_trial_complex(cfg, 0)
    assert sum(cx.f) > 20000
    from softcomplex.homology import full_betti

    assert run_trial(cfg, 0).full_betti == full_betti(cx, method="direct")


# ---------------------------------------------------------------------------
# estimators


def test_estimate_beta0_without_edges():
    cfg = TrialConfig(n=30, r=0.3, rho=(0, 1))
    res = estimate("beta:0", cfg, 5)
    assert res.mean == 30 and res.variance == 0 and res.ci_halfwidth == 0


def test_estimate_rejects_single_trial():
    with pytest.raises(ValueError):
        estimate("edges", TrialConfig(), 1)


def test_unknown_statistic():
    res = run_trial(TrialConfig(n=20), 0)
    with pytest.raises(ConfigError):
        extract("gamma:1", res)
    with pytest.raises(ConfigError):
        extract("beta:5", res)


def test_edge_count_matches_pair_probability():
    cfg = TrialConfig(n=200, r=0.05, rho=(1, 1), seed=21)
    res = estimate("edges", cfg, 300)
    want = math.comb(200, 2) * pair_probability_unit_square(0.05)
    assert abs(res.mean - want) <= res.ci_halfwidth


def test_estimator_variance_scaling():
    cfg = TrialConfig(n=100, r=0.1, seed=8)
    small = estimate("edges", cfg, 100)
    large = estimate("edges", cfg, 400)
    # ci^2 * trials estimates 9 var; both estimate the same variance
    assert small.ci_halfwidth**2 * small.trials == pytest.approx(9 * small.variance)
    ratio = (large.ci_halfwidth**2 * large.trials) / (small.ci_halfwidth**2 * small.trials)
    assert 0.6 < ratio < 1.6


def test_estimator_result_json_roundtrip():
    res = EstimatorResult.from_samples("x", [1.0, 2.0, 3.0, 6.0], seed=9)
    data = json.loads(res.to_json())
    assert set(data) == {"statistic", "trials", "mean", "variance", "ci_halfwidth", "seed"}
    assert EstimatorResult(**data) == res
    assert res.variance == pytest.approx(np.var([1, 2, 3, 6], ddof=1))
    assert res.ci_halfwidth == pytest.approx(3 * math.sqrt(res.variance / 4))


def test_threads_do_not_change_estimates():
    cfg = TrialConfig(n=200, r=0.09, rho=(0.9, 0.5), seed=2)
    assert estimate("beta:1", cfg, 20, threads=1) == estimate("beta:1", cfg, 20, threads=5)


# ---------------------------------------------------------------------------
# closed forms


def test_thinning_factor_examples():
    assert predicted_thinning_factor(1, (0.8, 0.5)) == pytest.approx(0.256)
    assert predicted_thinning_factor(1, (1, 1)) == 0
    assert predicted_thinning_factor(1, (1, 0)) == 1
    assert predicted_thinning_factor(2, (0.9, 0.8, 0.5)) == pytest.approx(0.5 * 0.9**6 * 0.8**4)
    with pytest.raises(ValueError):
        predicted_thinning_factor(2, (0.5, 0.5))


def test_cech_factor_examples():
    assert predicted_cech_pattern_factor(1, (0.5, 0.3)) == pytest.approx(0.125)
    assert predicted_cech_pattern_factor(2, (1, 1)) == 1
    assert predicted_cech_pattern_factor(2, (0.7, 0, 0.4)) == 0


@settings(max_examples=100, deadline=None)
@given(k=st.integers(1, 3), probs=st.lists(st.floats(0, 1), min_size=4, max_size=4))
def test_factors_are_probabilities(k, probs):
    assert 0 <= predicted_thinning_factor(k, probs) <= 1
    assert 0 <= predicted_cech_pattern_factor(k, probs) <= 1


# ---------------------------------------------------------------------------
# conditional thinning check


def test_conditional_check_bernoulli_case():
    cfg = TrialConfig(n=2000, r=0.01, rho=(1, 1), k_max=2, seed=4)
    res = conditional_thinning_check(1, (1, 0.5), cfg, 40)
    assert res.trials >= 100
    assert abs(res.mean - 0.5) <= 3 * math.sqrt(0.25 / res.trials)


def test_conditional_check_no_thinning_gives_zero():
    cfg = TrialConfig(n=2000, r=0.01, rho=(1, 1), k_max=2, seed=4)
    assert conditional_thinning_check(1, (1, 1), cfg, 40).mean == 0


def test_conditional_check_preconditions():
    cfg = TrialConfig(n=50, r=0.01, rho=(1, 1), k_max=2)
    with pytest.raises(InsufficientEvents):
        conditional_thinning_check(1, (0.8, 0.5), cfg, 5)
    with pytest.raises(ConfigError):
        conditional_thinning_check(1, (0.8, 0.5), cfg.replace(model="cech"), 5)
    with pytest.raises(ConfigError):
        conditional_thinning_check(2, (0.8, 0.5, 0.5), cfg, 5)


# ---------------------------------------------------------------------------
# patterns and mu


def test_pattern_counts_on_small_cloud():
    pts = np.array([[0.1, 0.1], [0.15, 0.1], [0.1, 0.15], [0.8, 0.8], [0.85, 0.8], [0.5, 0.1]])
    cloud = PointCloud(pts, Domain("cube", 2), 0)
    assert pattern_count("edge", cloud, 0.1) == 4
    assert pattern_count("triangle", cloud, 0.1) == 1
    assert pattern_count("path2", cloud, 0.1) == 0
    # at 0.06 the short side pair (1, 2) drops out, leaving one induced path 1-0-2
    assert pattern_count("path2", cloud, 0.06) == 1
    assert pattern_count("component:1", cloud, 0.1) == 1
    assert pattern_count("empty", cloud, 0.1) == 0
    with pytest.raises(ConfigError):
        pattern_count("square", cloud, 0.1)


def test_cech_empty_pattern():
    # equilateral triangle of side s: pairwise within r iff s <= r, Čech ball
    # radius s / sqrt(3) > r / 2 when s > r * sqrt(3) / 2
    s = 0.1
    pts = np.array([[0.5, 0.5], [0.5 + s, 0.5], [0.5 + s / 2, 0.5 + s * math.sqrt(3) / 2]])
    cloud = PointCloud(pts, Domain("cube", 2), 0)
    assert pattern_count("cech-empty:1", cloud, 0.105) == 1
    assert pattern_count("cech-empty:1", cloud, 0.2) == 0


def test_density_zero_when_nothing_connects():
    cfg = TrialConfig(n=5, r=1e-9)
    assert normalized_pattern_density("edge", cfg, 2).mean == 0


@pytest.mark.parametrize("d,want", [(1, 1.0), (2, math.pi / 2), (3, 2 * math.pi / 3)])
def test_mu_edge(d, want):
    res = mu_integral("K2", d, 400_000, seed=d)
    assert abs(res.mean - want) <= res.ci_halfwidth


def test_mu_empty_pattern():
    assert mu_integral("empty", 2, 1000, 0).mean == 0


def test_mu_rejects_large_patterns():
    with pytest.raises(ConfigError):
        mu_integral("component:3", 2, 1000, 0)


def test_triangle_density_stabilizes_near_mu():
    mu = mu_integral("triangle", 2, 400_000, seed=2)
    ests = []
    for n in (500, 1000, 2000):
        cfg = TrialConfig(n=n, r=n**-0.6, seed=n)
        ests.append(normalized_pattern_density("triangle", cfg, 80))
    a, b = ests[-2], ests[-1]
    assert abs(b.mean / a.mean - 1) <= (a.ci_halfwidth / a.mean + b.ci_halfwidth / b.mean)
    # boundary effects shrink like r; at n=2000 r ~ 0.01
    assert abs(b.mean - mu.mean) <= b.ci_halfwidth + mu.ci_halfwidth + 0.05 * mu.mean


# ---------------------------------------------------------------------------
# coupling and monotonicity


@pytest.mark.parametrize("seed", range(10))
def test_monotone_in_rho_with_coupled_seeds(seed):
    cfg = TrialConfig(n=100, r=0.2, rho=(1, 1, 1), k_max=3, seed=seed)
    base, _ = build_trial_complex(cfg, 0, thinned=False)
    rng = np.random.default_rng(seed)
    lo = rng.uniform(0, 1, 3)
    hi = np.minimum(lo + rng.uniform(0, 0.5, 3), 1)
    a = thin(base, lo, seed)
    b = thin(base, hi, seed)
    assert a.is_subcomplex_of(b)
    assert all(x <= y for x, y in zip(a.f, b.f))
    from softcomplex.census import components

    assert len(components(a)) >= len(components(b))


def test_binomial_and_poisson_agree_on_edges():
    b = estimate("edges", TrialConfig(n=150, r=0.08, seed=1), 300)
    p = estimate("edges", TrialConfig(n=150, r=0.08, process="poisson", seed=2), 300)
    assert abs(b.mean - p.mean) <= b.ci_halfwidth + p.ci_halfwidth
    # Poisson vertex count has variance n; binomial has none
    vb = estimate("vertices", TrialConfig(n=150, seed=1), 200)
    vp = estimate("vertices", TrialConfig(n=150, process="poisson", seed=2), 200)
    assert vb.variance == 0 and 100 < vp.variance < 220


# ---------------------------------------------------------------------------
# sweeps


def test_sweep_rows_and_csv():
    template = TrialConfig(n=100, rho=(0.9, 0.5), seed=7)
    rows = sweep(RegimeSpec("subcritical", c=1, eps=0.1), [100, 200], template, 10)
    assert [r["n"] for r in rows] == [100, 200]
    assert rows[0]["seed"] != rows[1]["seed"]
    for row in rows:
        assert 0 <= row["p_nonzero"] <= 1
        assert row["mean_pattern"] <= row["mean_beta"] <= row["mean_pattern"] + row["mean_flarge"]
        assert row["mean_beta"] <= row["mean_crit"]
    text = sweep_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0].split(",") == SWEEP_HEADER
    assert len(lines) == 3
    assert sweep_csv(sweep(RegimeSpec("subcritical", c=1, eps=0.1), [100, 200], template, 10, threads=3)) == text


def test_sweep_raises_k_max_for_k():
    rows = sweep(RegimeSpec("critical", lam=1), [100], TrialConfig(n=100, rho=(1, 1, 1)), 3, k=2)
    assert rows[0]["k"] == 2
    with pytest.raises(ConfigError):
        sweep(RegimeSpec("critical", lam=1), [100], TrialConfig(n=100, rho=(1, 1)), 3, k=2)


def test_sweep_rejects_empty():
    with pytest.raises(ConfigError):
        sweep(RegimeSpec(), [], TrialConfig(), 5)


def test_subcritical_beta_to_pattern_ratio_at_least_one():
    template = TrialConfig(n=100, rho=(0.9, 0.5), seed=3)
    rows = sweep(RegimeSpec("subcritical", c=2, eps=0.3), [250, 1000], template, 100)
    ratios = [r["mean_beta"] / r["mean_pattern"] for r in rows if r["mean_pattern"] > 0]
    assert ratios and all(x >= 1 for x in ratios)


def test_critical_regime_beta_per_vertex_stabilizes():
    template = TrialConfig(n=100, rho=(0.9, 0.5), seed=13)
    rows = sweep(RegimeSpec("critical", lam=2), [1000, 2000], template, 30)
    a, b = (r["mean_beta"] / r["n"] for r in rows)
    ca, cb = (r["ci_beta"] / r["n"] for r in rows)
    assert abs(a - b) <= ca + cb + 0.02 * max(a, b)


def test_sample_cloud_shape():
    cloud = sample_cloud(TrialConfig(n=33, d=3, domain="ball"), 0)
    assert cloud.points.shape == (33, 3)
    assert (np.linalg.norm(cloud.points, axis=1) <= 1).all()
