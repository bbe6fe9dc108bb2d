"""Point processes on the unit cube / unit ball and the geometric predicates
that define Rips and Čech complexes."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from softcomplex._rng import STREAM_POINTS, check_seed, generator

__all__ = [
    "Domain",
    "PointCloud",
    "GeometricGraph",
    "sample_binomial",
    "sample_poisson",
    "build_graph",
    "all_pairs_edges",
    "min_enclosing_ball_radius",
    "batch_min_enclosing_ball_radius",
    "unit_ball_volume",
]

_KIND_ALIASES = {
    "cube": "cube",
    "unit-cube": "cube",
    "unit_cube": "cube",
    "ball": "ball",
    "unit-ball": "ball",
    "unit_ball": "ball",
}

# below this many points the all-pairs search beats building a grid
ALL_PAIRS_CUTOFF = 64


def unit_ball_volume(d: int) -> float:
    """Lebesgue measure of the unit ball in R^d, pi^(d/2) / Gamma(d/2 + 1)."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class Domain:
    """Unit cube [0, 1]^d or unit ball B(0, 1) in R^d."""

    kind: str = "cube"
    dim: int = 2

    def __post_init__(self):
        kind = _KIND_ALIASES.get(str(self.kind).lower())
        if kind is None:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if int(self.dim) < 1:
            raise ValueError("domain dimension must be >= 1")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def volume(self) -> float:
        return 1.0 if self.kind == "cube" else unit_ball_volume(self.dim)

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        if self.kind == "cube":
            return np.all((points >= 0.0) & (points <= 1.0), axis=1)
        return np.einsum("ij,ij->i", points, points) <= 1.0

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "cube":
            return rng.random((n, self.dim))
        # uniform direction times radius U^(1/d)
        g = rng.standard_normal((n, self.dim))
        norms = np.linalg.norm(g, axis=1)
        norms[norms == 0.0] = 1.0
        radii = rng.random(n) ** (1.0 / self.dim)
        return g / norms[:, None] * radii[:, None]


@dataclass(frozen=True)
class PointCloud:
    """A realisation of the binomial process X_n or the Poisson process P_lambda.

    ``points`` has shape ``(N, d)``; row ``i`` is vertex ``i``.
    """

    points: np.ndarray
    domain: Domain
    seed: int
    process: str = "binomial"
    intensity: float = 0.0

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, self.domain.dim)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.domain.dim

    def __len__(self) -> int:
        return self.n

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)


def sample_binomial(n: int, domain: Domain, seed: int, *stream_key: int) -> PointCloud:
    """``n`` i.i.d. uniform points in ``domain``.

    ``stream_key`` selects an independent substream of ``seed`` (used for
    per-trial streams); the default stream is used when it is empty.
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = generator(seed, STREAM_POINTS, *stream_key)
    pts = domain.sample(rng, n)
    return PointCloud(pts, domain, check_seed(seed), "binomial", float(n))


def sample_poisson(lam: float, domain: Domain, seed: int, *stream_key: int) -> PointCloud:
    """Poisson process of total intensity ``lam``: N ~ Poisson(lam) uniform points."""
    lam = float(lam)
    if not lam > 0:
        raise ValueError("Poisson intensity must be positive")
    rng = generator(seed, STREAM_POINTS, *stream_key)
    count = int(rng.poisson(lam))
    pts = domain.sample(rng, count)
    return PointCloud(pts, domain, check_seed(seed), "poisson", lam)


@dataclass(frozen=True)
class GeometricGraph:
    """G(n, r): edge {i, j} iff |X_i - X_j| <= r.

    ``edges`` is an ``(m, 2)`` int64 array with ``i < j`` in every row, rows
    sorted lexicographically.
    """

    n: int
    r: float
    edges: np.ndarray = field(repr=False)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(a), int(b)) for a, b in self.edges}

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)


def _sqdist(points: np.ndarray, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    diff = points[i] - points[j]
    return np.einsum("ij,ij->i", diff, diff)


def _sorted_edges(i: np.ndarray, j: np.ndarray) -> np.ndarray:
    if i.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    order = np.lexsort((j, i))
    return np.stack([i[order], j[order]], axis=1).astype(np.int64)


def all_pairs_edges(points: np.ndarray, r: float) -> np.ndarray:
    """Brute-force fixed-radius edge list; also the oracle for the grid search."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    i, j = np.triu_indices(n, k=1)
    keep = _sqdist(points, i, j) <= r * r
    return _sorted_edges(i[keep], j[keep])


def _expand_ranges(starts: np.ndarray, counts: np.ndarray) -> np.ndarray:
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    offsets = np.cumsum(counts) - counts
    return np.arange(total, dtype=np.int64) - np.repeat(offsets - starts, counts)


def _grid_edges(points: np.ndarray, r: float) -> np.ndarray | None:
    n, d = points.shape
    lo = points.min(axis=0)
    cells = np.floor((points - lo) / r).astype(np.int64)
    # one padding cell on each side so neighbour offsets never wrap
    cells += 1
    shape = cells.max(axis=0) + 2
    if math.prod(int(s) for s in shape) >= 2**62:
        return None
    strides = np.ones(d, dtype=np.int64)
    for a in range(d - 2, -1, -1):
        strides[a] = strides[a + 1] * shape[a + 1]
    keys = cells @ strides
    order = np.argsort(keys, kind="stable")
    skeys = keys[order]
    ukeys, ustart, ucount = np.unique(skeys, return_index=True, return_counts=True)

    src_all, dst_all = [], []
    for off in itertools.product((-1, 0, 1), repeat=d):
        off = np.array(off, dtype=np.int64)
        # half the offsets suffice; the zero offset is handled with i < j below
        nz = np.flatnonzero(off)
        if nz.size and off[nz[0]] < 0:
            continue
        nkeys = ukeys + off @ strides
        pos = np.searchsorted(ukeys, nkeys)
        pos = np.minimum(pos, ukeys.size - 1)
        hit = ukeys[pos] == nkeys
        if not hit.any():
            continue
        a_cells = np.flatnonzero(hit)
        b_cells = pos[hit]
        # every point of cell a against every point of cell b
        a_cnt = ucount[a_cells]
        b_cnt = ucount[b_cells]
        a_pts = _expand_ranges(ustart[a_cells], a_cnt)
        rep_b_start = np.repeat(ustart[b_cells], a_cnt)
        rep_b_cnt = np.repeat(b_cnt, a_cnt)
        src = np.repeat(a_pts, rep_b_cnt)
        dst = _expand_ranges(rep_b_start, rep_b_cnt)
        src = order[src]
        dst = order[dst]
        if not nz.size:
            keep = src < dst
            src, dst = src[keep], dst[keep]
        src_all.append(src)
        dst_all.append(dst)
    if not src_all:
        return np.empty((0, 2), dtype=np.int64)
    src = np.concatenate(src_all)
    dst = np.concatenate(dst_all)
    keep = _sqdist(points, src, dst) <= r * r
    src, dst = src[keep], dst[keep]
    i = np.minimum(src, dst)
    j = np.maximum(src, dst)
    return _sorted_edges(i, j)


def build_graph(cloud: PointCloud | np.ndarray, r: float, method: str = "auto") -> GeometricGraph:
    """Fixed-radius neighbour graph of a cloud.

    ``method`` is ``"grid"`` (uniform grid with cell size ``r``), ``"pairs"``
    (all pairs) or ``"auto"``. All choices return the identical edge set.
    """
    r = float(r)
    if not r > 0:
        raise ValueError("radius must be positive")
    points = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    n = points.shape[0]
    if method not in ("auto", "grid", "pairs"):
        raise ValueError(f"unknown neighbour search {method!r}")
    edges = None
    if n >= 2 and (method == "grid" or (method == "auto" and n > ALL_PAIRS_CUTOFF)):
        edges = _grid_edges(points, r)
    if edges is None:
        edges = all_pairs_edges(points, r)
    return GeometricGraph(n, r, edges)


# ---------------------------------------------------------------------------
# minimum enclosing ball


def _circumball(pts: list[np.ndarray]) -> tuple[np.ndarray, float]:
    """Smallest ball with every point of ``pts`` on its boundary (squared radius)."""
    p0 = pts[0]
    if len(pts) == 1:
        return p0.copy(), 0.0
    u = np.array([p - p0 for p in pts[1:]])
    gram = u @ u.T
    rhs = 0.5 * np.einsum("ij,ij->i", u, u)
    lam, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
    offset = lam @ u
    return p0 + offset, float(offset @ offset)


def _welzl_mtf(pts: list[np.ndarray], end: int, boundary: list[np.ndarray], dim: int):
    if boundary:
        center, r2 = _circumball(boundary)
    else:
        center, r2 = None, -1.0
    if len(boundary) == dim + 1:
        return center, r2
    i = 0
    while i < end:
        p = pts[i]
        if center is None or float((p - center) @ (p - center)) > r2 * (1 + 1e-12) + 1e-24:
            center, r2 = _welzl_mtf(pts, i, boundary + [p], dim)
            # move to front
            pts.insert(0, pts.pop(i))
        i += 1
    return center, r2


def min_enclosing_ball_radius(points) -> float:
    """Radius of the smallest ball containing ``points`` (move-to-front Welzl)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1) if pts.size else pts.reshape(0, 1)
    if pts.shape[0] == 0:
        raise ValueError("min_enclosing_ball_radius needs at least one point")
    work = [p for p in pts]
    _, r2 = _welzl_mtf(work, len(work), [], pts.shape[1])
    return math.sqrt(max(r2, 0.0))


def batch_min_enclosing_ball_radius(points: np.ndarray) -> np.ndarray:
    """Minimum enclosing ball radius for each of ``m`` small point sets.

    ``points`` has shape ``(m, s, d)`` with ``s <= 5``. The answer is the
    smallest circumball (over support subsets) that still contains all ``s``
    points; degenerate subsets are skipped.
    """
    pts = np.asarray(points, dtype=float)
    m, s, _ = pts.shape
    if s == 1:
        return np.zeros(m)
    best = np.full(m, np.inf)
    for t in range(1, s + 1):
        for sub in itertools.combinations(range(s), t):
            p0 = pts[:, sub[0], :]
            u = pts[:, list(sub[1:]), :] - p0[:, None, :]
            gram = np.einsum("mid,mjd->mij", u, u)
            rhs = 0.5 * np.einsum("mid,mid->mi", u, u)
            if t == 1:
                # only useful when every point coincides
                lam = np.zeros((m, 0))
                ok = np.ones(m, dtype=bool)
            elif t == 2:
                ok = gram[:, 0, 0] > 0
                lam = np.zeros((m, 1))
                lam[ok, 0] = rhs[ok, 0] / gram[ok, 0, 0]
            else:
                det = np.linalg.det(gram)
                scale = np.prod(np.einsum("mii->mi", gram), axis=1)
                ok = np.abs(det) > 1e-12 * np.maximum(scale, 1e-300)
                lam = np.zeros((m, t - 1))
                if ok.any():
                    lam[ok] = np.linalg.solve(gram[ok], rhs[ok][..., None])[..., 0]
            center = p0 + np.einsum("mi,mid->md", lam, u)
            r2 = np.einsum("md,md->m", center - p0, center - p0)
            dev = pts - center[:, None, :]
            far = np.einsum("msd,msd->ms", dev, dev).max(axis=1)
            ok &= far <= r2 * (1 + 1e-9) + 1e-18
            best = np.where(ok & (r2 < best), r2, best)
    return np.sqrt(best)
