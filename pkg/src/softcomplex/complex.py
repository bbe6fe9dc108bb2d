"""Vietoris-Rips and Čech complexes and their multiparameter thinning.

Faces of dimension ``i`` are stored as an ``(f_i, i + 1)`` int64 array whose
rows are strictly increasing vertex ids, sorted lexicographically. Vertices
are always present: ``faces[0]`` is ``arange(n)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from softcomplex._rng import check_seed, face_uniforms
from softcomplex.geometry import (
    GeometricGraph,
    PointCloud,
    batch_min_enclosing_ball_radius,
    build_graph,
)

__all__ = [
    "SimplicialComplex",
    "ProbabilityVector",
    "build_rips",
    "build_cech",
    "thin",
    "face_counts",
    "simplex",
    "simplex_boundary",
    "cross_polytope",
    "disjoint_union",
    "dumps",
    "loads",
    "dump",
    "load",
]

# Čech predicate: radius <= r/2 + CECH_TOL
CECH_TOL = 1e-12


def _empty(width: int) -> np.ndarray:
    return np.empty((0, width), dtype=np.int64)


def _normalise(rows, width: int) -> np.ndarray:
    arr = np.asarray(rows, dtype=np.int64).reshape(-1, width)
    if arr.shape[0] == 0:
        return _empty(width)
    arr = np.sort(arr, axis=1)
    return np.unique(arr, axis=0)


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """A finite simplicial complex on vertices ``0..n-1`` truncated at ``k_max``."""

    n: int
    k_max: int
    faces: tuple = field(repr=False)

    def __post_init__(self):
        n, k_max = int(self.n), int(self.k_max)
        if n < 0 or k_max < 0:
            raise ValueError("n and k_max must be non-negative")
        given = list(self.faces)
        if len(given) > k_max + 1:
            extra = [g for g in given[k_max + 1 :] if len(g)]
            if extra:
                raise ValueError("faces above k_max")
            given = given[: k_max + 1]
        arrays = [np.arange(n, dtype=np.int64).reshape(-1, 1)]
        for i in range(1, k_max + 1):
            rows = given[i] if i < len(given) else _empty(i + 1)
            arr = np.asarray(rows, dtype=np.int64).reshape(-1, i + 1)
            arrays.append(arr)
        for arr in arrays:
            arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k_max", k_max)
        object.__setattr__(self, "faces", tuple(arrays))
        object.__setattr__(self, "_keys", {})

    # -- construction -----------------------------------------------------

    @classmethod
    def from_faces(
        cls,
        n: int,
        faces: Iterable[Sequence[int]],
        k_max: int | None = None,
        close: bool = True,
    ) -> "SimplicialComplex":
        """Complex generated by ``faces`` (their downward closure if ``close``)."""
        by_dim: dict[int, set[tuple[int, ...]]] = {}
        for face in faces:
            face = tuple(sorted(int(v) for v in face))
            if not face:
                continue
            if len(set(face)) != len(face):
                raise ValueError(f"repeated vertex in face {face}")
            if face[0] < 0 or face[-1] >= n:
                raise ValueError(f"vertex id out of range in face {face}")
            subsets = (
                itertools.chain.from_iterable(
                    itertools.combinations(face, t) for t in range(2, len(face) + 1)
                )
                if close
                else [face]
            )
            for sub in subsets:
                by_dim.setdefault(len(sub) - 1, set()).add(sub)
        top = max(by_dim, default=0)
        if k_max is None:
            k_max = top
        elif top > k_max:
            raise ValueError("face dimension exceeds k_max")
        arrays = [None] + [
            _normalise(sorted(by_dim.get(i, ())), i + 1) for i in range(1, k_max + 1)
        ]
        cx = cls(n, k_max, tuple(arrays))
        if not close:
            cx.check()
        return cx

    # -- queries ----------------------------------------------------------

    @property
    def f(self) -> list[int]:
        return [int(a.shape[0]) for a in self.faces]

    @property
    def dimension(self) -> int:
        """Largest dimension with at least one face (0 for a vertex set, -1 if empty)."""
        nonempty = [i for i, a in enumerate(self.faces) if a.shape[0]]
        return max(nonempty, default=-1)

    def face_array(self, i: int) -> np.ndarray:
        if 0 <= i <= self.k_max:
            return self.faces[i]
        return _empty(max(i + 1, 1))

    def face_tuples(self, i: int) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in self.face_array(i)]

    def face_set(self) -> set[tuple[int, ...]]:
        out: set[tuple[int, ...]] = set()
        for i in range(self.k_max + 1):
            out.update(self.face_tuples(i))
        return out

    def _radix_ok(self, width: int) -> bool:
        return max(self.n, 2) ** width < 2**63

    def _row_keys(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        base = np.int64(max(self.n, 2))
        keys = np.zeros(rows.shape[0], dtype=np.int64)
        for j in range(rows.shape[1]):
            keys = keys * base + rows[:, j]
        return keys

    def keys(self, i: int) -> np.ndarray:
        cache = self._keys
        if i not in cache:
            cache[i] = self._row_keys(self.face_array(i))
        return cache[i]

    def index_of(self, i: int, rows: np.ndarray) -> np.ndarray:
        """Row index in ``faces[i]`` of each (sorted) row, or -1 when absent."""
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, i + 1)
        if rows.shape[0] == 0:
            return np.empty(0, dtype=np.int64)
        if i == 0:
            ok = (rows[:, 0] >= 0) & (rows[:, 0] < self.n)
            return np.where(ok, rows[:, 0], -1)
        if not self._radix_ok(i + 1):
            lookup = {tuple(r): k for k, r in enumerate(self.face_tuples(i))}
            return np.array([lookup.get(tuple(int(v) for v in r), -1) for r in rows], dtype=np.int64)
        table = self.keys(i)
        if table.size == 0:
            return np.full(rows.shape[0], -1, dtype=np.int64)
        q = self._row_keys(rows)
        pos = np.minimum(np.searchsorted(table, q), table.size - 1)
        return np.where(table[pos] == q, pos, -1)

    def contains(self, face: Sequence[int]) -> bool:
        face = sorted(int(v) for v in face)
        i = len(face) - 1
        if i < 0 or i > self.k_max:
            return False
        return bool(self.index_of(i, np.array([face]))[0] >= 0)

    def facet_indices(self, i: int) -> np.ndarray:
        """``(f_i, i + 1)`` array: column ``j`` indexes the facet omitting vertex ``j``."""
        faces = self.face_array(i)
        if i == 0:
            return np.empty((faces.shape[0], 1), dtype=np.int64)
        cols = []
        for j in range(i + 1):
            sub = np.delete(faces, j, axis=1)
            cols.append(self.index_of(i - 1, sub))
        return np.stack(cols, axis=1) if cols else np.empty((0, i + 1), dtype=np.int64)

    def check(self) -> None:
        """Raise ``ValueError`` unless the stored faces form a valid complex."""
        for i in range(1, self.k_max + 1):
            arr = self.faces[i]
            if arr.shape[0] == 0:
                continue
            if arr.min() < 0 or arr.max() >= self.n:
                raise ValueError(f"vertex id out of range in dimension {i}")
            if np.any(np.diff(arr, axis=1) <= 0):
                raise ValueError(f"unsorted or repeated vertices in dimension {i}")
            if self._radix_ok(i + 1):
                keys = self.keys(i)
                if np.any(np.diff(keys) <= 0):
                    raise ValueError(f"faces of dimension {i} not sorted/unique")
            if np.any(self.facet_indices(i) < 0):
                raise ValueError(f"downward closure violated in dimension {i}")

    def is_subcomplex_of(self, other: "SimplicialComplex") -> bool:
        if self.n != other.n:
            return False
        for i in range(1, self.k_max + 1):
            rows = self.faces[i]
            if rows.shape[0] == 0:
                continue
            if i > other.k_max or np.any(other.index_of(i, rows) < 0):
                return False
        return True

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        if self.n != other.n or self.k_max != other.k_max:
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.faces, other.faces))

    def __hash__(self):
        return hash((self.n, self.k_max, tuple(self.f)))

    def truncate(self, k_max: int) -> "SimplicialComplex":
        k_max = int(k_max)
        faces = list(self.faces[: k_max + 1])
        faces += [_empty(i + 1) for i in range(len(faces), k_max + 1)]
        return SimplicialComplex(self.n, k_max, tuple(faces))

    def relabel(self, perm: Sequence[int]) -> "SimplicialComplex":
        """Vertex ``v`` becomes ``perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        if perm.shape != (self.n,) or not np.array_equal(np.sort(perm), np.arange(self.n)):
            raise ValueError("perm must be a permutation of the vertex ids")
        faces = [None] + [_normalise(perm[a], i + 1) for i, a in enumerate(self.faces) if i > 0]
        return SimplicialComplex(self.n, self.k_max, tuple(faces))

    def induced(self, vertices: Sequence[int]) -> "SimplicialComplex":
        """Subcomplex on ``vertices``, relabelled to ``0..len(vertices)-1`` in order."""
        vertices = np.asarray(sorted(int(v) for v in vertices), dtype=np.int64)
        new_id = np.full(self.n, -1, dtype=np.int64)
        new_id[vertices] = np.arange(vertices.size)
        faces: list = [None]
        for i in range(1, self.k_max + 1):
            mapped = new_id[self.faces[i]]
            faces.append(mapped[np.all(mapped >= 0, axis=1)])
        return SimplicialComplex(int(vertices.size), self.k_max, tuple(faces))


@dataclass(frozen=True)
class ProbabilityVector:
    """Retention probabilities (p_1, ..., p_K); vertices are never thinned."""

    probs: tuple

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        for p in probs:
            if not 0.0 <= p <= 1.0 or math.isnan(p):
                raise ValueError(f"probabilities must lie in [0, 1], got {p}")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def ones(cls, k: int) -> "ProbabilityVector":
        return cls((1.0,) * int(k))

    @classmethod
    def coerce(cls, rho) -> "ProbabilityVector":
        return rho if isinstance(rho, cls) else cls(tuple(rho))

    def __len__(self) -> int:
        return len(self.probs)

    def p(self, i: int) -> float:
        """p_i for ``i >= 1``; p_0 is 1."""
        if i == 0:
            return 1.0
        if not 1 <= i <= len(self.probs):
            raise IndexError(f"p_{i} not defined for a vector of length {len(self.probs)}")
        return self.probs[i - 1]


# ---------------------------------------------------------------------------
# constructors


def _upper_csr(graph_edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(graph_edges[:, 0], minlength=n) if graph_edges.size else np.zeros(n, dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, graph_edges[:, 1].copy()


def _extend_cliques(faces: np.ndarray, edge_cx: SimplicialComplex, indptr, nbrs) -> np.ndarray:
    """Extend each clique by every higher-indexed common neighbour."""
    width = faces.shape[1]
    if faces.shape[0] == 0:
        return _empty(width + 1)
    last = faces[:, -1]
    counts = indptr[last + 1] - indptr[last]
    total = int(counts.sum())
    if total == 0:
        return _empty(width + 1)
    owner = np.repeat(np.arange(faces.shape[0]), counts)
    starts = np.repeat(indptr[last], counts)
    offsets = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(counts) - counts, counts)
    cand = nbrs[starts + offsets]
    keep = np.ones(total, dtype=bool)
    for j in range(width - 1):
        pair = np.stack([faces[owner, j], cand], axis=1)
        keep &= edge_cx.index_of(1, pair) >= 0
    owner, cand = owner[keep], cand[keep]
    return np.concatenate([faces[owner], cand[:, None]], axis=1)


def build_rips(graph: GeometricGraph, k_max: int) -> SimplicialComplex:
    """Clique complex of ``graph`` truncated at dimension ``k_max``."""
    k_max = int(k_max)
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    n = graph.n
    faces: list = [None]
    if k_max >= 1:
        faces.append(graph.edges)
        edge_cx = SimplicialComplex(n, 1, (None, graph.edges))
        indptr, nbrs = _upper_csr(graph.edges, n)
        for _ in range(2, k_max + 1):
            faces.append(_extend_cliques(faces[-1], edge_cx, indptr, nbrs))
    return SimplicialComplex(n, k_max, tuple(faces))


def build_cech(
    cloud: PointCloud, r: float, k_max: int, graph: GeometricGraph | None = None
) -> SimplicialComplex:
    """Čech complex: a face is kept iff its minimum enclosing ball has radius <= r/2.

    Candidates are the cliques of G(n, r); a candidate is also required to
    have all of its facets already accepted, so the output is closed even at
    floating-point ties.
    """
    r = float(r)
    k_max = int(k_max)
    if not r > 0:
        raise ValueError("radius must be positive")
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    if graph is None:
        graph = build_graph(cloud, r)
    n = graph.n
    pts = cloud.points
    faces: list = [None]
    if k_max >= 1:
        faces.append(graph.edges)
        edge_cx = SimplicialComplex(n, 1, (None, graph.edges))
        indptr, nbrs = _upper_csr(graph.edges, n)
        for i in range(2, k_max + 1):
            cand = _extend_cliques(faces[-1], edge_cx, indptr, nbrs)
            if cand.shape[0]:
                partial = SimplicialComplex(n, i - 1, tuple(faces))
                ok = np.ones(cand.shape[0], dtype=bool)
                # the facet omitting the last vertex is the parent, already accepted
                for j in range(i):
                    ok &= partial.index_of(i - 1, np.delete(cand, j, axis=1)) >= 0
                cand = cand[ok]
            if cand.shape[0]:
                radii = batch_min_enclosing_ball_radius(pts[cand])
                cand = cand[radii <= r / 2 + CECH_TOL]
            faces.append(cand)
    return SimplicialComplex(n, k_max, tuple(faces))


def thin(complex: SimplicialComplex, rho, seed: int) -> SimplicialComplex:
    """Hierarchical thinning: keep an i-face with probability p_i when its whole
    boundary survived.

    Each face's coin is a hash of ``(seed, dimension, vertex ids)``, so equal
    seeds give coupled draws: raising any p_i never removes a face.
    """
    rho = ProbabilityVector.coerce(rho)
    if len(rho) < complex.k_max:
        raise ValueError(
            f"probability vector of length {len(rho)} cannot thin a complex with k_max={complex.k_max}"
        )
    seed = check_seed(seed)
    faces: list = [None]
    for i in range(1, complex.k_max + 1):
        rows = complex.faces[i]
        if rows.shape[0] == 0:
            faces.append(rows)
            continue
        keep = face_uniforms(seed, i, rows) < rho.p(i)
        if i >= 2 and keep.any():
            partial = SimplicialComplex(complex.n, i - 1, tuple(faces))
            for j in range(i + 1):
                sub = np.delete(rows[keep], j, axis=1)
                ok = partial.index_of(i - 1, sub) >= 0
                idx = np.flatnonzero(keep)
                keep[idx[~ok]] = False
        faces.append(rows[keep])
    return SimplicialComplex(complex.n, complex.k_max, tuple(faces))


def face_counts(complex: SimplicialComplex) -> list[int]:
    """(f_0, ..., f_{k_max})."""
    return complex.f


# ---------------------------------------------------------------------------
# standard complexes


def simplex(k: int, k_max: int | None = None) -> SimplicialComplex:
    """The full k-simplex on vertices 0..k."""
    return SimplicialComplex.from_faces(k + 1, [range(k + 1)], k_max=k if k_max is None else k_max)


def simplex_boundary(k: int, k_max: int | None = None) -> SimplicialComplex:
    """Boundary of the (k+1)-simplex: the k-sphere on k + 2 vertices."""
    facets = itertools.combinations(range(k + 2), k + 1)
    return SimplicialComplex.from_faces(k + 2, facets, k_max=k + 1 if k_max is None else k_max)


def cross_polytope(k: int, k_max: int | None = None) -> SimplicialComplex:
    """Boundary O_k of the (k+1)-dimensional cross-polytope.

    Vertex ``2*i`` is ``+e_i`` and ``2*i + 1`` is ``-e_i``; the faces are the
    vertex sets containing no antipodal pair.
    """
    facets = [
        [2 * i + s for i, s in enumerate(signs)]
        for signs in itertools.product((0, 1), repeat=k + 1)
    ]
    return SimplicialComplex.from_faces(2 * k + 2, facets, k_max=k if k_max is None else k_max)


def disjoint_union(a: SimplicialComplex, b: SimplicialComplex) -> SimplicialComplex:
    """``a`` on vertices ``0..a.n-1`` and ``b`` shifted by ``a.n``."""
    k_max = max(a.k_max, b.k_max)
    faces: list = [None]
    for i in range(1, k_max + 1):
        faces.append(np.concatenate([a.face_array(i), b.face_array(i) + a.n]))
    return SimplicialComplex(a.n + b.n, k_max, tuple(faces))


# ---------------------------------------------------------------------------
# text format: header "dim n k_max", then one face per line


def dumps(complex: SimplicialComplex) -> str:
    lines = [f"{complex.dimension} {complex.n} {complex.k_max}"]
    for i in range(complex.k_max + 1):
        lines.extend(" ".join(str(int(v)) for v in row) for row in complex.faces[i])
    return "\n".join(lines) + "\n"


def loads(text: str) -> SimplicialComplex:
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 3:
        raise ValueError("complex text must start with a 'dim n k_max' header")
    dim, n, k_max = (int(t) for t in lines[0])
    by_dim: dict[int, list[list[int]]] = {}
    for toks in lines[1:]:
        face = [int(t) for t in toks]
        by_dim.setdefault(len(face) - 1, []).append(face)
    if by_dim.get(0) and sorted(v for (v,) in by_dim[0]) != list(range(n)):
        raise ValueError("vertex lines must list 0..n-1")
    if max(by_dim, default=0) > k_max:
        raise ValueError("face dimension exceeds k_max")
    faces = [None] + [_normalise(by_dim.get(i, []), i + 1) for i in range(1, k_max + 1)]
    cx = SimplicialComplex(n, k_max, tuple(faces))
    cx.check()
    if cx.dimension != dim:
        raise ValueError(f"header dim {dim} does not match stored faces ({cx.dimension})")
    return cx


def dump(complex: SimplicialComplex, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(complex))


def load(path) -> SimplicialComplex:
    with open(path) as fh:
        return loads(fh.read())
