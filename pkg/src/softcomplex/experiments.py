"""Monte Carlo drivers, closed-form predictions and regime sweeps.

Each trial is keyed by ``(seed, trial_id)``: its point cloud comes from the
substream ``(seed, POINTS, trial_id)`` and its thinning coins from a seed
derived from ``(seed, THIN, trial_id)``. Trials are independent, so they can
run on any number of worker threads; results are collected in trial order
and aggregated afterwards, which makes every estimate schedule-independent.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from itertools import combinations
from math import comb
from typing import Callable, Iterable, Sequence

import numpy as np

from softcomplex._rng import STREAM_MU, STREAM_THIN, check_seed, derive_seed, generator
from softcomplex.census import CensusReport, ComponentTable, census
from softcomplex.complex import ProbabilityVector, SimplicialComplex, build_cech, build_rips, thin
from softcomplex.geometry import (
    Domain,
    PointCloud,
    batch_min_enclosing_ball_radius,
    build_graph,
    sample_binomial,
    sample_poisson,
)
from softcomplex.homology import DIRECT_FACE_LIMIT, BettiVector, euler_characteristic, full_betti
from softcomplex.morse import build_gradient_field, critical_counts, verify_gradient

__all__ = [
    "ConfigError",
    "InvariantViolation",
    "InsufficientEvents",
    "TrialConfig",
    "RegimeSpec",
    "TrialResult",
    "EstimatorResult",
    "sample_cloud",
    "build_trial_complex",
    "run_trial",
    "run_trials",
    "extract",
    "summarize",
    "estimate",
    "predicted_thinning_factor",
    "predicted_cech_pattern_factor",
    "PATTERNS",
    "pattern_count",
    "mu_integral",
    "normalized_pattern_density",
    "conditional_thinning_check",
    "sweep",
    "SWEEP_HEADER",
    "sweep_csv",
]


class ConfigError(ValueError):
    """An experiment configuration is malformed."""


class InvariantViolation(AssertionError):
    """A trial broke a property that must hold for every sample."""


class InsufficientEvents(RuntimeError):
    """Too few qualifying events were observed for a meaningful estimate."""


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class TrialConfig:
    """One point of the experiment space.

    ``n`` is the number of points for ``process="binomial"`` and the total
    intensity for ``process="poisson"``.
    """

    n: float = 100
    d: int = 2
    domain: str = "cube"
    r: float = 0.1
    rho: tuple = (1.0, 1.0)
    model: str = "rips"
    k_max: int = 2
    process: str = "binomial"
    seed: int = 0

    def __post_init__(self):
        try:
            rho = tuple(float(p) for p in (self.rho if not np.isscalar(self.rho) else [self.rho]))
            object.__setattr__(self, "rho", rho)
            object.__setattr__(self, "d", int(self.d))
            object.__setattr__(self, "k_max", int(self.k_max))
            object.__setattr__(self, "r", float(self.r))
            object.__setattr__(self, "seed", check_seed(self.seed))
            object.__setattr__(self, "domain", Domain(self.domain, self.d).kind)
            ProbabilityVector(rho)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if not self.r > 0:
            raise ConfigError("r must be positive")
        if self.k_max < 1:
            raise ConfigError("k_max must be >= 1")
        if len(self.rho) < self.k_max:
            raise ConfigError(f"rho has {len(self.rho)} entries but k_max is {self.k_max}")
        if self.model not in ("rips", "cech"):
            raise ConfigError(f"model must be 'rips' or 'cech', got {self.model!r}")
        if self.process not in ("binomial", "poisson"):
            raise ConfigError(f"process must be 'binomial' or 'poisson', got {self.process!r}")
        if self.process == "binomial":
            if float(self.n) != int(self.n) or self.n < 0:
                raise ConfigError("binomial n must be a non-negative integer")
            object.__setattr__(self, "n", int(self.n))
        else:
            if not float(self.n) > 0:
                raise ConfigError("Poisson intensity must be positive")
            object.__setattr__(self, "n", float(self.n))

    @property
    def domain_obj(self) -> Domain:
        return Domain(self.domain, self.d)

    @property
    def W(self) -> float:
        return float(self.n) * self.r**self.d

    def replace(self, **changes) -> "TrialConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["rho"] = list(self.rho)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TrialConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


REGIMES = ("subcritical", "critical", "supercritical", "connected")


@dataclass(frozen=True)
class RegimeSpec:
    """A radius schedule ``r(n)`` for one of the four regimes.

    * subcritical: ``r = c * n**(-1/d - eps)``
    * critical: ``r = (lam / n)**(1/d)``
    * supercritical: ``r = c * n**(-1/d) * log(n)**(gamma/d)``, so ``n r^d = c^d log(n)^gamma``
    * connected: ``r = c * (log(n) / n)**(1/d)``
    """

    regime: str = "subcritical"
    c: float = 1.0
    eps: float = 0.1
    lam: float = 1.0
    gamma: float = 0.5

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ConfigError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if not (self.c > 0 and self.lam > 0 and self.gamma > 0):
            raise ConfigError("c, lam and gamma must be positive")
        if self.regime == "subcritical" and not self.eps > 0:
            raise ConfigError("subcritical scaling needs eps > 0")

    def radius(self, n: float, d: int) -> float:
        n = float(n)
        if n < 2:
            raise ConfigError("radius schedules need n >= 2")
        if self.regime == "subcritical":
            return self.c * n ** (-1.0 / d - self.eps)
        if self.regime == "critical":
            return (self.lam / n) ** (1.0 / d)
        if self.regime == "supercritical":
            return self.c * n ** (-1.0 / d) * math.log(n) ** (self.gamma / d)
        return self.c * (math.log(n) / n) ** (1.0 / d)

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# single trials


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one sample.

    ``betti`` covers degrees ``0..k_max-1`` (those fixed by the stored faces);
    ``critical`` and ``faces`` cover ``0..k_max``.
    """

    betti: BettiVector
    census: CensusReport
    critical: list
    faces: list
    full_betti: BettiVector = field(repr=False, default=None)


def sample_cloud(config: TrialConfig, trial_id: int) -> PointCloud:
    if config.process == "binomial":
        return sample_binomial(config.n, config.domain_obj, config.seed, trial_id)
    return sample_poisson(config.n, config.domain_obj, config.seed, trial_id)


def _build(config: TrialConfig, cloud: PointCloud, k_max: int | None = None):
    k_max = config.k_max if k_max is None else k_max
    graph = build_graph(cloud, config.r)
    if config.model == "rips":
        return graph, build_rips(graph, k_max)
    return graph, build_cech(cloud, config.r, k_max, graph)


def _thin_seed(config: TrialConfig, trial_id: int) -> int:
    return derive_seed(config.seed, STREAM_THIN, trial_id)


def build_trial_complex(config: TrialConfig, trial_id: int, thinned: bool = True):
    """The (optionally thinned) complex of one trial together with its point cloud."""
    cloud = sample_cloud(config, trial_id)
    _, cx = _build(config, cloud)
    if thinned:
        cx = thin(cx, config.rho, _thin_seed(config, trial_id))
    return cx, cloud


def _violation(config: TrialConfig, trial_id: int, msg: str) -> InvariantViolation:
    return InvariantViolation(f"{msg} (config={config.to_dict()}, trial_id={trial_id})")


def run_trial(config: TrialConfig, trial_id: int, check: bool = True) -> TrialResult:
    """Sample, build, thin and measure one complex.

    With ``check`` every per-sample invariant is asserted: thinning gives a
    subcomplex, Čech lies inside Rips, the Euler identity holds for both Betti
    numbers and critical counts, the gradient field verifies, the Morse
    inequalities hold and the pattern sandwich bounds hold for each
    ``k < k_max``.
    """
    cloud = sample_cloud(config, trial_id)
    graph, cx = _build(config, cloud)
    th = thin(cx, config.rho, _thin_seed(config, trial_id))
    field_ = build_gradient_field(th, cloud)
    crit = critical_counts(field_)
    big = sum(th.f) > DIRECT_FACE_LIMIT
    fb = full_betti(th, method="morse" if big else "direct", matching=field_ if big else None)
    b = BettiVector(fb[: config.k_max])
    rep = census(th, range(1, config.k_max), m_rule=config.model)
    if check:
        if not th.is_subcomplex_of(cx):
            raise _violation(config, trial_id, "thinned complex is not a subcomplex")
        if config.model == "cech" and not cx.is_subcomplex_of(build_rips(graph, config.k_max)):
            raise _violation(config, trial_id, "Čech complex not contained in Rips complex")
        if any(x < 0 for x in fb) or (th.n > 0 and fb[0] < 1):
            raise _violation(config, trial_id, f"impossible Betti numbers {fb}")
        chi = euler_characteristic(th)
        if sum((-1) ** i * x for i, x in enumerate(fb)) != chi:
            raise _violation(config, trial_id, f"Euler identity fails: betti={fb}, f={th.f}")
        if sum((-1) ** i * x for i, x in enumerate(crit)) != chi:
            raise _violation(config, trial_id, f"critical counts {crit} break the Euler identity")
        if not verify_gradient(field_, th):
            raise _violation(config, trial_id, "gradient field has a closed V-path")
        if any(x > c for x, c in zip(fb, crit)):
            raise _violation(config, trial_id, f"Morse inequality fails: betti={fb}, critical={crit}")
        for k in range(1, config.k_max):
            lo = rep.empty_simplex[k]
            hi = lo + rep.faces_in_large[(k, k + 3)]
            if not lo <= b[k] <= hi:
                raise _violation(config, trial_id, f"sandwich {lo} <= b_{k}={b[k]} <= {hi} fails")
    return TrialResult(b, rep, crit, th.f, fb)


def _pmap(fn: Callable, items: Iterable, threads: int) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_trials(config: TrialConfig, trials: int, threads: int = 1, check: bool = True) -> list[TrialResult]:
    """Trials ``0..trials-1`` in order, computed on ``threads`` workers."""
    return _pmap(lambda t: run_trial(config, t, check=check), range(int(trials)), threads)


# ---------------------------------------------------------------------------
# estimators


@dataclass(frozen=True)
class EstimatorResult:
    statistic: str
    trials: int
    mean: float
    variance: float
    ci_halfwidth: float
    seed: int

    @classmethod
    def from_samples(cls, statistic: str, values, seed: int) -> "EstimatorResult":
        x = np.asarray(values, dtype=np.float64)
        if x.size < 2:
            raise ValueError("an estimate needs at least 2 samples")
        mean = float(x.sum() / x.size)
        var = float(((x - mean) ** 2).sum() / (x.size - 1))
        return cls(statistic, int(x.size), mean, var, 3.0 * math.sqrt(var / x.size), int(seed))

    @property
    def se(self) -> float:
        return math.sqrt(self.variance / self.trials)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def extract(statistic: str, result: TrialResult) -> float:
    """Read a named statistic off a trial.

    Names: ``beta:k``, ``nonzero:k`` (indicator b_k > 0), ``crit:k``,
    ``faces:i``, ``edges``, ``components``, ``empty:k`` (hollow simplex
    components), ``cross:k``, ``flarge:k`` (k-faces in components of at least
    k + 3 vertices) and ``vertices``.
    """
    name, _, arg = statistic.partition(":")
    k = int(arg) if arg else None
    try:
        if name == "beta":
            return float(result.betti[k])
        if name == "nonzero":
            return float(result.betti[k] > 0)
        if name == "crit":
            return float(result.critical[k])
        if name == "faces":
            return float(result.faces[k])
        if name == "edges":
            return float(result.faces[1])
        if name == "vertices":
            return float(result.faces[0])
        if name == "components":
            return float(result.betti[0])
        if name == "empty":
            return float(result.census.empty_simplex[k])
        if name == "cross":
            return float(result.census.cross_polytope[k])
        if name == "flarge":
            return float(result.census.faces_in_large[(k, k + 3)])
    except (IndexError, KeyError, TypeError) as exc:
        raise ConfigError(f"statistic {statistic!r} is not available for this configuration") from exc
    raise ConfigError(f"unknown statistic {statistic!r}")


def summarize(statistic: str, results: Sequence[TrialResult], seed: int) -> EstimatorResult:
    return EstimatorResult.from_samples(statistic, [extract(statistic, r) for r in results], seed)


def estimate(statistic: str, config: TrialConfig, trials: int, threads: int = 1) -> EstimatorResult:
    """Sample mean and variance of ``statistic`` over ``trials`` independent trials."""
    if int(trials) < 2:
        raise ValueError("estimate needs trials >= 2")
    return summarize(statistic, run_trials(config, trials, threads), config.seed)


# ---------------------------------------------------------------------------
# closed forms


def predicted_thinning_factor(k: int, rho) -> float:
    """``(1 - p_{k+1}) * prod_{i=1}^{k} p_i ** C(k+2, i+1)``: the chance that a full
    (k+1)-simplex component thins to its hollow boundary."""
    rho = ProbabilityVector.coerce(rho)
    if len(rho) < k + 1:
        raise ValueError(f"need p_1..p_{k + 1}")
    return (1.0 - rho.p(k + 1)) * predicted_cech_pattern_factor(k, rho)


def predicted_cech_pattern_factor(k: int, rho) -> float:
    """``prod_{i=1}^{k} p_i ** C(k+2, i+1)``: survival of every face of a hollow (k+1)-simplex."""
    rho = ProbabilityVector.coerce(rho)
    if len(rho) < k:
        raise ValueError(f"need p_1..p_{k}")
    return float(np.prod([rho.p(i) ** comb(k + 2, i + 1) for i in range(1, k + 1)]))


# ---------------------------------------------------------------------------
# patterns


@dataclass(frozen=True)
class Pattern:
    name: str
    order: int


def _parse_pattern(name: str) -> Pattern:
    alias = {"K2": "edge", "K3": "triangle", "path₂": "path2"}
    name = alias.get(name, name)
    if name == "edge":
        return Pattern(name, 2)
    if name in ("path2", "triangle"):
        return Pattern(name, 3)
    if name in ("empty", "none"):
        return Pattern("empty", 2)
    base, _, arg = name.partition(":")
    if base in ("component", "cech-empty") and arg:
        k = int(arg)
        if k < 1:
            raise ConfigError("pattern index must be >= 1")
        return Pattern(f"{base}:{k}", k + 2)
    if base == "cech-empty":
        return Pattern("cech-empty:1", 3)
    raise ConfigError(
        f"unknown pattern {name!r}; use edge, path2, triangle, component:k, cech-empty:k or empty"
    )


PATTERNS = ("edge", "path2", "triangle", "component:k", "cech-empty:k", "empty")


def pattern_count(pattern: str, cloud: PointCloud, r: float) -> int:
    """Occurrences of ``pattern`` in the geometric complexes on ``cloud``.

    ``edge``, ``path2`` and ``triangle`` count induced subgraphs of G(n, r);
    ``component:k`` counts components of G(n, r) that are complete graphs on
    k + 2 vertices; ``cech-empty:k`` counts components of the Čech complex
    that are hollow (k+1)-simplices.
    """
    pat = _parse_pattern(pattern)
    if pat.name == "empty":
        return 0
    graph = build_graph(cloud, r)
    if pat.name == "edge":
        return graph.m
    if pat.name in ("path2", "triangle"):
        tri = build_rips(graph, 2).f[2]
        if pat.name == "triangle":
            return tri
        deg = graph.degrees().astype(np.int64)
        return int((deg * (deg - 1) // 2).sum() - 3 * tri)
    base, _, arg = pat.name.partition(":")
    k = int(arg)
    if base == "component":
        table = ComponentTable.of(build_rips(graph, 1))
        return int(table.matches([k + 2, comb(k + 2, 2)]).sum())
    table = ComponentTable.of(build_cech(cloud, r, k + 1, graph))
    return int(table.empty_simplex(k).sum())


def _pattern_indicator(pat: Pattern, pts: np.ndarray) -> np.ndarray:
    """h(pattern) for a batch of configurations ``pts`` of shape (m, order, d), radius 1."""
    m, order, _ = pts.shape
    pairs = [(a, b) for a in range(order) for b in range(a + 1, order)]
    adj = np.stack([((pts[:, a] - pts[:, b]) ** 2).sum(axis=1) <= 1.0 for a, b in pairs], axis=1)
    if pat.name == "empty":
        return np.zeros(m, dtype=bool)
    if pat.name == "path2":
        return adj.sum(axis=1) == 2
    complete = adj.all(axis=1)
    if not pat.name.startswith("cech-empty"):
        return complete
    out = np.zeros(m, dtype=bool)
    idx = np.flatnonzero(complete)
    if idx.size == 0:
        return out
    cand = pts[idx]
    ok = batch_min_enclosing_ball_radius(cand) > 0.5
    # every proper subset of size >= 3 must still have a small enough ball
    for size in range(3, order):
        for sub in combinations(range(order), size):
            ok &= batch_min_enclosing_ball_radius(cand[:, list(sub)]) <= 0.5
    out[idx] = ok
    return out


def mu_integral(pattern: str, d: int, samples: int, seed: int, chunk: int = 200_000) -> EstimatorResult:
    """Monte Carlo value of the pattern constant on the unit cube.

    The constant is ``(1/k!) * int f^k * int h(0, x_1, ..., x_{k-1}) dx`` with
    ``f`` the uniform density (so ``int f^k = 1``) and the inner integral taken
    over ``[-k, k]^{d(k-1)}`` at unit radius. ``mean`` is the estimate and
    ``ci_halfwidth`` three standard errors.
    """
    pat = _parse_pattern(pattern)
    k = pat.order
    if k > 4:
        raise ConfigError("mu_integral supports patterns on at most 4 vertices")
    samples = int(samples)
    if samples < 2:
        raise ValueError("need at least 2 samples")
    rng = generator(seed, STREAM_MU)
    scale = (2.0 * k) ** (d * (k - 1)) / math.factorial(k)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        x = rng.uniform(-k, k, size=(m, k - 1, d))
        pts = np.concatenate([np.zeros((m, 1, d)), x], axis=1)
        h = _pattern_indicator(pat, pts).astype(np.float64) * scale
        total += float(h.sum())
        total_sq += float((h * h).sum())
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return EstimatorResult(f"mu:{pat.name}:d={d}", samples, mean, var, 3.0 * math.sqrt(var / samples), int(seed))


def normalized_pattern_density(
    pattern: str, config: TrialConfig, trials: int, scaling: str = "subcritical", threads: int = 1
) -> EstimatorResult:
    """Pattern count divided by ``n^k r^{d(k-1)}`` (or by ``n`` under critical scaling)."""
    pat = _parse_pattern(pattern)
    if int(trials) < 2:
        raise ValueError("need trials >= 2")
    if scaling == "subcritical":
        norm = float(config.n) ** pat.order * config.r ** (config.d * (pat.order - 1))
    elif scaling == "critical":
        norm = float(config.n)
    else:
        raise ConfigError("scaling must be 'subcritical' or 'critical'")

    def one(t: int) -> float:
        return pattern_count(pat.name, sample_cloud(config, t), config.r) / norm

    values = _pmap(one, range(int(trials)), threads)
    return EstimatorResult.from_samples(f"density:{pat.name}", values, config.seed)


def conditional_thinning_check(
    k: int, rho, config: TrialConfig, trials: int, threads: int = 1, min_events: int = 100
) -> EstimatorResult:
    """Fraction of isolated full (k+1)-simplices whose thinned image is a hollow simplex.

    Every component of the unthinned Rips complex that is a full simplex on
    k + 2 vertices is one Bernoulli event; ``trials`` in the result is the
    number of events and ``mean`` the observed fraction, to be compared with
    ``predicted_thinning_factor(k, rho)``.
    """
    if config.model != "rips":
        raise ConfigError("the conditional thinning check is defined for the Rips model")
    if config.k_max < k + 1:
        raise ConfigError(f"k_max must be at least {k + 1}")
    rho = ProbabilityVector.coerce(rho)
    if len(rho) < k + 1:
        raise ConfigError(f"rho needs p_1..p_{k + 1}")
    cfg = config.replace(k_max=k + 1, rho=tuple(rho.probs))

    def one(t: int) -> tuple[int, int]:
        cloud = sample_cloud(cfg, t)
        _, cx = _build(cfg, cloud)
        table = ComponentTable.of(cx)
        full = table.full_simplex(k)
        if not full.any():
            return 0, 0
        th = thin(cx, rho, _thin_seed(cfg, t))
        hollow = ComponentTable.of(th, labels=(table.ncomp, table.labels)).empty_simplex(k)
        return int(full.sum()), int((full & hollow).sum())

    counts = _pmap(one, range(int(trials)), threads)
    events = sum(e for e, _ in counts)
    hits = sum(h for _, h in counts)
    if events < min_events:
        raise InsufficientEvents(f"only {events} isolated {k + 1}-simplices observed; need {min_events}")
    frac = hits / events
    var = frac * (1.0 - frac) * events / (events - 1)
    return EstimatorResult(f"conditional:{k}", events, frac, var, 3.0 * math.sqrt(var / events), cfg.seed)


# ---------------------------------------------------------------------------
# sweeps

SWEEP_HEADER = (
    "n,r,W,model,k,mean_beta,ci_beta,mean_pattern,ci_pattern,mean_flarge,mean_crit,p_nonzero,trials,seed"
).split(",")


def sweep(
    regime: RegimeSpec,
    n_values: Sequence[float],
    template: TrialConfig,
    trials: int,
    k: int = 1,
    threads: int = 1,
) -> list[dict]:
    """One row per ``n``: Betti, pattern, large-component and critical-count means.

    The pattern is the hollow (k+1)-simplex component count of the model in
    use. Row ``j`` runs on the child seed ``derive_seed(template.seed, j)``,
    which is reported in the ``seed`` column.
    """
    if not len(n_values):
        raise ConfigError("n_values must be nonempty")
    if int(trials) < 2:
        raise ValueError("need trials >= 2")
    if template.k_max < k + 1:
        template = template.replace(k_max=k + 1)
    rows = []
    for j, n in enumerate(n_values):
        r = regime.radius(n, template.d)
        cfg = template.replace(n=n, r=r, seed=derive_seed(template.seed, j))
        results = run_trials(cfg, trials, threads)
        beta = summarize(f"beta:{k}", results, cfg.seed)
        pat = summarize(f"empty:{k}", results, cfg.seed)
        rows.append(
            {
                "n": cfg.n,
                "r": r,
                "W": cfg.W,
                "model": cfg.model,
                "k": k,
                "mean_beta": beta.mean,
                "ci_beta": beta.ci_halfwidth,
                "mean_pattern": pat.mean,
                "ci_pattern": pat.ci_halfwidth,
                "mean_flarge": summarize(f"flarge:{k}", results, cfg.seed).mean,
                "mean_crit": summarize(f"crit:{k}", results, cfg.seed).mean,
                "p_nonzero": summarize(f"nonzero:{k}", results, cfg.seed).mean,
                "trials": int(trials),
                "seed": cfg.seed,
            }
        )
    return rows


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def sweep_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in rows:
        w.writerow([_fmt(row[h]) for h in SWEEP_HEADER])
    return buf.getvalue()
