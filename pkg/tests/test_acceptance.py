"""The twelve acceptance criteria, one test each.

Every test prints a single ``ACCEPTANCE <i> PASS|FAIL: <detail>`` line to the
terminal (bypassing output capture) and then asserts. Parameters below were
fixed before the final run; Monte Carlo criteria use pre-declared seeds.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from oracles import random_complex
from softcomplex.census import census
from softcomplex.complex import (
    build_cech,
    build_rips,
    cross_polytope,
    disjoint_union,
    simplex_boundary,
    thin,
)
from softcomplex.experiments import (
    InvariantViolation,
    RegimeSpec,
    TrialConfig,
    build_trial_complex,
    conditional_thinning_check,
    estimate,
    mu_integral,
    normalized_pattern_density,
    predicted_thinning_factor,
    run_trial,
    run_trials,
    summarize,
    sweep,
)
from softcomplex.geometry import Domain, build_graph, sample_binomial
from softcomplex.homology import euler_characteristic, full_betti
from softcomplex.morse import build_gradient_field, critical_counts, verify_gradient


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


def test_1_exact_homology_oracles(report):
    start = time.perf_counter()
    problems = []
    for k in (1, 2, 3):
        want = tuple([1] + [0] * (k - 1) + [1])
        got = full_betti(simplex_boundary(k))[: k + 1]
        if got != want:
            problems.append(f"boundary of {k + 1}-simplex gave {got}")
    for k in (1, 2):
        want = tuple([1] + [0] * (k - 1) + [1])
        got = full_betti(cross_polytope(k))
        if got != want:
            problems.append(f"O_{k} gave {got}")
    rng = np.random.default_rng(1)
    for _ in range(50):
        a = random_complex(rng, int(rng.integers(1, 12)), 3, 6)
        b = random_complex(rng, int(rng.integers(1, 12)), 3, 6)
        if full_betti(disjoint_union(a, b)) != tuple(x + y for x, y in zip(full_betti(a), full_betti(b))):
            problems.append("disjoint union not additive")
    for t in range(500):
        n = int(rng.integers(2, 61))
        d = int(rng.integers(1, 4))
        r = float(rng.uniform(0.1, 0.6))
        cloud = sample_binomial(n, Domain("cube", d), t)
        base = build_rips(build_graph(cloud, r), 3) if t % 2 else build_cech(cloud, r, 3)
        cx = thin(base, rng.uniform(0.3, 1.0, 3), t)
        b = full_betti(cx)
        if sum((-1) ** i * x for i, x in enumerate(b)) != euler_characteristic(cx):
            problems.append(f"Euler identity failed on trial {t}")
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 10
    report(1, ok, f"{len(problems)} mismatches, {elapsed:.1f}s (limit 10s) {problems[:3]}")


def test_2_cross_polytope_face_counts(report):
    bad = []
    for k in range(1, 5):
        f = cross_polytope(k).f
        want = [2 ** (i + 1) * math.comb(k + 1, i + 1) for i in range(k + 1)]
        if list(f[: k + 1]) != want or any(f[k + 1 :]):
            bad.append((k, list(f), want))
    report(2, not bad, f"k=1..4 checked, mismatches {bad}")


def test_3_identity_thinning(report):
    rng = np.random.default_rng(3)
    bad = 0
    for j in range(100):
        d = int(rng.integers(1, 4))
        k_max = int(rng.integers(1, 4))
        n = int(rng.integers(10, 120))
        cfg = TrialConfig(
            n=n, d=d, r=float((rng.uniform(0.3, 3.0) / n) ** (1 / d)), rho=(1.0,) * k_max,
            model=("rips", "cech")[j % 2], k_max=k_max, seed=int(rng.integers(2**32)),
        )
        raw, cloud = build_trial_complex(cfg, j, thinned=False)
        res = run_trial(cfg, j)
        same = (
            build_trial_complex(cfg, j)[0] == raw
            and res.faces == raw.f
            and res.full_betti == full_betti(raw)
            and res.critical == critical_counts(build_gradient_field(raw, cloud))
            and (k_max < 2 or res.census == census(raw, range(1, k_max), m_rule=cfg.model))
        )
        bad += not same
    report(3, bad == 0, f"{100 - bad}/100 configs identical after identity thinning")


REGIMES_45 = [
    RegimeSpec("subcritical", c=1.0, eps=0.1),
    RegimeSpec("critical", lam=1.0),
    RegimeSpec("supercritical", c=1.0, gamma=1.0),
    RegimeSpec("connected", c=1.0),
]


@pytest.fixture(scope="module")
def corpus():
    """Trials across all four regimes, both models, d in {2, 3}, k_max = 3."""
    records = []
    for reg in REGIMES_45:
        for model in ("rips", "cech"):
            for d in (2, 3):
                for j, n in enumerate((60, 120, 200)):
                    cfg = TrialConfig(
                        n=n, d=d, r=reg.radius(n, d), rho=(0.9, 0.7, 0.5), model=model, k_max=3, seed=1000 + j
                    )
                    for t in range(42):
                        try:
                            records.append((reg.regime, cfg, run_trial(cfg, t), None))
                        except InvariantViolation as exc:
                            records.append((reg.regime, cfg, None, str(exc)))
    return records


def test_4_sandwich_bounds(report, corpus):
    violations = 0
    for _, cfg, res, err in corpus:
        if res is None:
            violations += "sandwich" in err
            continue
        for k in (1, 2):
            lo = res.census.empty_simplex[k]
            hi = lo + res.census.faces_in_large[(k, k + 3)]
            violations += not (lo <= res.betti[k] <= hi)
    regimes = sorted({r for r, *_ in corpus})
    ok = violations == 0 and len(corpus) >= 2000 and len(regimes) == 4
    report(4, ok, f"{len(corpus)} trials over {regimes}, {violations} sandwich violations")


def test_5_morse_bounds(report, corpus):
    violations = 0
    for _, cfg, res, err in corpus:
        if res is None:
            violations += 1
            continue
        if any(b > c for b, c in zip(res.full_betti, res.critical)):
            violations += 1
        if sum((-1) ** i * c for i, c in enumerate(res.critical)) != sum((-1) ** i * f for i, f in enumerate(res.faces)):
            violations += 1
    # run_trial asserts verify_gradient on every field it builds; re-check a slice here directly
    unverified = 0
    for _, cfg, _, _ in corpus[::20]:
        cx, cloud = build_trial_complex(cfg, 0)
        unverified += not verify_gradient(build_gradient_field(cx, cloud), cx)
    ok = violations == 0 and unverified == 0
    report(5, ok, f"{len(corpus)} trials, {violations} Morse/Euler violations, {unverified} unverified fields")


def test_6_conditional_thinning_factor(report):
    start = time.perf_counter()
    cfg = TrialConfig(n=2000, d=2, r=0.01, rho=(1.0, 1.0), model="rips", k_max=2, seed=6)
    lines, ok = [], True
    for rho, want in [((1.0, 0.5), 0.5), ((0.8, 0.5), 0.256), ((0.9, 0.1), 0.6561)]:
        assert predicted_thinning_factor(1, rho) == pytest.approx(want)
        res = conditional_thinning_check(1, rho, cfg, 100, min_events=500)
        sigma = math.sqrt(want * (1 - want) / res.trials)
        hit = abs(res.mean - want) <= 3 * sigma
        ok &= hit and res.trials >= 500
        lines.append(f"rho={rho}: {res.mean:.4f} vs {want} ({res.trials} events, {abs(res.mean - want) / sigma:.2f} sigma)")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    report(6, ok, "; ".join(lines) + f"; {elapsed:.1f}s")


def test_7_edge_density_limit(report):
    start = time.perf_counter()
    ests = []
    for n in (500, 1000, 2000, 4000):
        cfg = TrialConfig(n=n, d=2, r=n**-0.6, rho=(1.0, 1.0), seed=7)
        ests.append(normalized_pattern_density("edge", cfg, 2000).mean)
    gaps = [abs(e - math.pi / 2) for e in ests]
    monotone = all(b <= a for a, b in zip(gaps, gaps[1:]))
    close = gaps[-1] <= 0.05 * math.pi / 2
    elapsed = time.perf_counter() - start
    ok = monotone and close and elapsed < 300
    report(7, ok, f"estimates {[round(e, 4) for e in ests]}, gaps {[round(g, 4) for g in gaps]}, {elapsed:.1f}s")


def test_8_mu_integral(report):
    r1 = mu_integral("K2", 1, 1_000_000, seed=81)
    r2 = mu_integral("K2", 2, 1_000_000, seed=82)
    ok1 = abs(r1.mean - 1.0) <= 3 * r1.se
    ok2 = abs(r2.mean - math.pi / 2) <= 3 * r2.se
    report(
        8, ok1 and ok2,
        f"d=1: {r1.mean:.5f} ± {r1.se:.5f} (target 1); d=2: {r2.mean:.5f} ± {r2.se:.5f} (target {math.pi / 2:.5f})",
    )


def test_9_threshold_trend(report):
    ladder = [250, 500, 1000, 2000, 4000]
    template = TrialConfig(n=250, d=2, rho=(0.9, 0.5), model="rips", k_max=2, seed=99)
    factor = predicted_thinning_factor(1, template.rho)

    vanish = RegimeSpec("subcritical", c=4.7, eps=0.5)
    grow = RegimeSpec("subcritical", c=0.6, eps=0.1)
    # the driving quantity (1 - p2) p1^3 n^3 r^(2d) must fall for one ladder and rise for the other
    drive_v = [factor * n**3 * vanish.radius(n, 2) ** 4 for n in ladder]
    drive_g = [factor * n**3 * grow.radius(n, 2) ** 4 for n in ladder]
    w_g = [n * grow.radius(n, 2) ** 2 for n in ladder]
    assert all(b < a for a, b in zip(drive_v, drive_v[1:]))
    assert all(b > a for a, b in zip(drive_g, drive_g[1:])) and all(b < a for a, b in zip(w_g, w_g[1:]))

    pv = [row["p_nonzero"] for row in sweep(vanish, ladder, template, 2000, k=1)]
    pg = [row["p_nonzero"] for row in sweep(grow, ladder, template, 2000, k=1)]
    ok_v = all(b < a for a, b in zip(pv, pv[1:])) and pv[-1] < 0.1
    ok_g = all(b > a for a, b in zip(pg, pg[1:])) and pg[-1] > 0.9
    report(9, ok_v and ok_g, f"P(b1>0) vanishing {pv}; persistent {pg}")


def test_10_connected_regime_vanishing(report):
    n = 4000
    base = TrialConfig(n=n, d=2, rho=(0.9, 0.9), model="rips", k_max=2, seed=2026)
    conn = base.replace(r=RegimeSpec("connected", c=1.5).radius(n, 2))
    crit = base.replace(r=RegimeSpec("critical", lam=1.0).radius(n, 2))
    res_conn = run_trials(conn, 20)
    res_crit = run_trials(crit, 10)
    mean_conn = summarize("beta:1", res_conn, conn.seed).mean
    mean_crit = summarize("beta:1", res_crit, crit.seed).mean
    p_conn = summarize("nonzero:1", res_conn, conn.seed).mean
    ok = mean_conn < 0.05 * mean_crit and p_conn < 0.1
    report(10, ok, f"mean b1 connected {mean_conn:.3f} vs critical {mean_crit:.1f}; P(b1>0) {p_conn:.3f}")


STATS_11 = ["vertices", "edges", "faces:2", "beta:0", "beta:1", "crit:1", "empty:1", "flarge:1", "nonzero:1"]


def _configs_11(meta_seed: int):
    rng = np.random.default_rng(meta_seed)
    out = []
    for _ in range(10):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(100, 301))
        w = float(rng.uniform(0.3, 1.5))
        out.append(
            TrialConfig(
                n=n, d=d, r=(w / n) ** (1 / d), rho=tuple(float(x) for x in rng.uniform(0.5, 1.0, 2)),
                model=("rips", "cech")[int(rng.integers(0, 2))], k_max=2, seed=int(rng.integers(2**63)),
            )
        )
    return out


def test_11_binomial_poisson_coupling(report):
    failures, worst = [], 0.0
    for cfg in _configs_11(0):
        binom = run_trials(cfg, 300)
        pois = run_trials(cfg.replace(process="poisson", n=float(cfg.n)), 300)
        for stat in STATS_11:
            a = summarize(stat, binom, cfg.seed)
            b = summarize(stat, pois, cfg.seed)
            se = math.sqrt(a.se**2 + b.se**2)
            z = abs(a.mean - b.mean) / se if se > 0 else (0.0 if a.mean == b.mean else math.inf)
            worst = max(worst, z)
            if z > 3:
                failures.append((cfg.d, cfg.model, stat, round(z, 2)))
    report(11, not failures, f"10 configs x {len(STATS_11)} statistics, worst z={worst:.2f}, failures {failures}")


def test_12_thread_determinism(report, tmp_path):
    args = [
        sys.executable, "-m", "softcomplex", "sweep", "--regime", "subcritical", "--model", "rips",
        "--k", "1", "--n", "250,500,1000,2000", "--trials", "200", "--seed", "7", "--rho", "0.9,0.5,1",
    ]
    outs = []
    for threads in (1, 8):
        path = tmp_path / f"sweep{threads}.csv"
        proc = subprocess.run(args + ["--threads", str(threads), "--out", str(path)], capture_output=True, check=False)
        assert proc.returncode == 0, proc.stderr
        outs.append(path.read_bytes())
    report(12, outs[0] == outs[1], f"CSV sizes {len(outs[0])} and {len(outs[1])} bytes, identical={outs[0] == outs[1]}")
