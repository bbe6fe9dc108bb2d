"""Norm-ordered discrete gradient vector field and its critical faces.

Vertices are ranked by increasing norm (ties by vertex id). A face ``F`` with
smallest rank ``m`` proposes the coface ``F + {a}`` where ``a`` is the
lowest-ranked vertex below ``m`` completing ``F`` to a face of the complex.
Proposals are accepted dimension by dimension unless ``F`` was already
claimed as a coface. Along any V-path the minimum rank strictly decreases,
which makes the field acyclic; this is still checked at runtime.

Internally every face is referred to by its row index in the *rank-relabelled*
complex ``matching.ranked``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from softcomplex.complex import SimplicialComplex
from softcomplex.geometry import PointCloud

__all__ = [
    "MorseMatching",
    "build_gradient_field",
    "critical_counts",
    "verify_gradient",
    "morse_boundary_ranks",
]


@dataclass(eq=False)
class MorseMatching:
    """A discrete vector field on ``complex``.

    ``up[i][f]`` is the index of the (i+1)-face paired with i-face ``f`` (or -1),
    ``down[i][f]`` the index of the (i-1)-face paired with it (or -1). Indices
    refer to ``ranked``, the complex with vertex ``v`` renamed ``rank[v]``.
    """

    complex: SimplicialComplex
    vertex_order: np.ndarray
    ranked: SimplicialComplex = field(repr=False)
    up: list = field(repr=False)
    down: list = field(repr=False)
    is_matching: bool = True
    demoted: int = 0
    _facets: dict = field(default_factory=dict, repr=False)

    @property
    def rank(self) -> np.ndarray:
        rank = np.empty_like(self.vertex_order)
        rank[self.vertex_order] = np.arange(self.vertex_order.size)
        return rank

    @property
    def k_max(self) -> int:
        return self.ranked.k_max

    def critical_mask(self, i: int) -> np.ndarray:
        return (self.up[i] < 0) & (self.down[i] < 0)

    def _original(self, i: int, idx) -> tuple[int, ...]:
        row = self.vertex_order[self.ranked.faces[i][idx]]
        return tuple(sorted(int(v) for v in row))

    @property
    def pairs(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """Matched (face, coface) pairs in original vertex ids."""
        out = []
        for i in range(self.k_max):
            for f in np.flatnonzero(self.up[i] >= 0):
                out.append((self._original(i, f), self._original(i + 1, self.up[i][f])))
        return out

    @property
    def critical(self) -> list[set[tuple[int, ...]]]:
        """Critical faces per dimension, in original vertex ids."""
        return [
            {self._original(i, f) for f in np.flatnonzero(self.critical_mask(i))}
            for i in range(self.k_max + 1)
        ]

    def facets(self, i: int) -> np.ndarray:
        if i not in self._facets:
            self._facets[i] = self.ranked.facet_indices(i)
        return self._facets[i]

    @classmethod
    def from_pairs(
        cls,
        complex: SimplicialComplex,
        pairs: Iterable[tuple[Sequence[int], Sequence[int]]],
        vertex_order: Sequence[int] | None = None,
    ) -> "MorseMatching":
        """Wrap an arbitrary, possibly invalid, list of (face, coface) pairs."""
        order = np.arange(complex.n) if vertex_order is None else np.asarray(vertex_order)
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        ranked = complex.relabel(rank)
        up = [np.full(ranked.f[i], -1, dtype=np.int64) for i in range(ranked.k_max + 1)]
        down = [np.full(ranked.f[i], -1, dtype=np.int64) for i in range(ranked.k_max + 1)]
        ok = True
        for face, coface in pairs:
            face = sorted(int(rank[v]) for v in face)
            coface = sorted(int(rank[v]) for v in coface)
            i = len(face) - 1
            if len(coface) != i + 2 or not set(face) <= set(coface) or i + 1 > ranked.k_max:
                ok = False
                continue
            fi = int(ranked.index_of(i, np.array([face]))[0])
            gi = int(ranked.index_of(i + 1, np.array([coface]))[0])
            if fi < 0 or gi < 0:
                ok = False
                continue
            if up[i][fi] >= 0 or down[i][fi] >= 0 or up[i + 1][gi] >= 0 or down[i + 1][gi] >= 0:
                ok = False
                continue
            up[i][fi] = gi
            down[i + 1][gi] = fi
        return cls(complex, order, ranked, up, down, is_matching=ok)


def _vertex_order(complex: SimplicialComplex, cloud, order) -> np.ndarray:
    if order is not None:
        order = np.asarray(order, dtype=np.int64)
        if order.shape != (complex.n,):
            raise ValueError("vertex order must list every vertex once")
        return order
    if cloud is None:
        return np.arange(complex.n, dtype=np.int64)
    norms = cloud.norms() if isinstance(cloud, PointCloud) else np.linalg.norm(np.asarray(cloud), axis=1)
    if norms.shape[0] != complex.n:
        raise ValueError(f"cloud has {norms.shape[0]} points but the complex has {complex.n} vertices")
    return np.lexsort((np.arange(complex.n), norms)).astype(np.int64)


def _flow_digraph(m: MorseMatching, i: int):
    """Arcs sigma -> sigma' between i-faces: sigma' a facet of V(sigma), sigma' != sigma."""
    src = np.flatnonzero(m.up[i] >= 0)
    if src.size == 0:
        return src, src
    fac = m.facets(i + 1)[m.up[i][src]]
    s = np.repeat(src, fac.shape[1])
    t = fac.ravel()
    keep = t != s
    return s[keep], t[keep]


def _cyclic_faces(m: MorseMatching, i: int) -> np.ndarray:
    s, t = _flow_digraph(m, i)
    nf = m.ranked.f[i]
    if s.size == 0:
        return np.empty(0, dtype=np.int64)
    g = coo_matrix((np.ones(s.size), (s, t)), shape=(nf, nf)).tocsr()
    ncomp, labels = connected_components(g, directed=True, connection="strong")
    if ncomp == nf:
        return np.empty(0, dtype=np.int64)
    sizes = np.bincount(labels, minlength=ncomp)
    return np.flatnonzero(sizes[labels] > 1)


def build_gradient_field(
    complex: SimplicialComplex,
    cloud: PointCloud | np.ndarray | None = None,
    order: Sequence[int] | None = None,
) -> MorseMatching:
    """Pair faces with cofaces following the norm order of ``cloud``.

    Without ``cloud`` or ``order`` vertices are ranked by id.
    """
    vorder = _vertex_order(complex, cloud, order)
    rank = np.empty_like(vorder)
    rank[vorder] = np.arange(vorder.size)
    ranked = complex if np.array_equal(vorder, np.arange(complex.n)) else complex.relabel(rank)
    k = ranked.k_max
    up = [np.full(ranked.f[i], -1, dtype=np.int64) for i in range(k + 1)]
    down = [np.full(ranked.f[i], -1, dtype=np.int64) for i in range(k + 1)]
    for i in range(k):
        cof = ranked.faces[i + 1]
        if cof.shape[0] == 0:
            continue
        # the only facet that can propose to G is G minus its lowest vertex
        proposer = ranked.index_of(i, cof[:, 1:])
        # rows are lexicographic, so the first coface per proposer has the lowest apex
        faces, first = np.unique(proposer, return_index=True)
        free = down[i][faces] < 0
        faces, first = faces[free], first[free]
        up[i][faces] = first
        down[i + 1][first] = faces
    m = MorseMatching(complex, vorder, ranked, up, down)
    if not _potential_decreases(m):
        for i in range(k):
            bad = _cyclic_faces(m, i)
            for f in bad:
                g = m.up[i][f]
                if g >= 0:
                    m.up[i][f] = -1
                    m.down[i + 1][g] = -1
                    m.demoted += 2
    return m


def _potential_decreases(m: MorseMatching) -> bool:
    """Certificate of acyclicity: every flow arc lowers the minimum vertex rank."""
    for i in range(m.k_max):
        s, t = _flow_digraph(m, i)
        if s.size and np.any(m.ranked.faces[i][t, 0] >= m.ranked.faces[i][s, 0]):
            return False
    return True


def critical_counts(matching: MorseMatching) -> list[int]:
    """(C_0, C_1, ..., C_{k_max})."""
    return [int(matching.critical_mask(i).sum()) for i in range(matching.k_max + 1)]


def verify_gradient(matching: MorseMatching, complex: SimplicialComplex | None = None) -> bool:
    """True iff ``matching`` is a matching of faces with cofaces and has no closed V-path.

    Acyclicity is decided per dimension pair on the digraph of V-path steps:
    a topological order exists iff every strongly connected component is a
    single face.
    """
    if complex is not None and complex != matching.complex:
        return False
    if not matching.is_matching:
        return False
    ranked = matching.ranked
    for i in range(ranked.k_max):
        src = np.flatnonzero(matching.up[i] >= 0)
        tgt = matching.up[i][src]
        if np.any(matching.down[i + 1][tgt] != src):
            return False
        if np.any(matching.down[i][src] >= 0):
            return False
        if src.size and not np.all(np.any(matching.facets(i + 1)[tgt] == src[:, None], axis=1)):
            return False
        if _cyclic_faces(matching, i).size:
            return False
    return True


# ---------------------------------------------------------------------------
# Morse complex over Z/2


def _morse_column(m: MorseMatching, i: int, beta: int, crit_pos: np.ndarray) -> int:
    """Boundary of critical i-face ``beta`` in the Morse complex, as a bitset over
    critical (i-1)-faces (bit = position in ``crit_pos`` order)."""
    up = m.up[i - 1]
    minv = m.ranked.faces[i - 1][:, 0]
    fac_lo = m.facets(i)
    chain: set[int] = set()
    heap: list[tuple[int, int]] = []

    def toggle(face: int) -> None:
        if face in chain:
            chain.remove(face)
        else:
            chain.add(face)
            if up[face] >= 0:
                heapq.heappush(heap, (-int(minv[face]), face))

    for face in fac_lo[beta]:
        toggle(int(face))
    while heap:
        _, face = heapq.heappop(heap)
        if face not in chain:
            continue
        for g in fac_lo[up[face]]:
            toggle(int(g))
    bits = 0
    for face in chain:
        pos = crit_pos[face]
        if pos >= 0:
            bits |= 1 << int(pos)
    return bits


def _flow_images(m: MorseMatching, i: int, crit_pos: np.ndarray) -> list[int]:
    """Image of every (i-1)-face under the stabilised flow, as bitsets over
    critical (i-1)-faces.

    A critical face maps to itself, a face paired downward to zero, and a face
    ``f`` paired upward to the sum of the images of the other facets of
    ``V(f)``. Those facets have a strictly smaller minimum rank, so processing
    faces by increasing minimum rank fills the table in one pass.
    """
    up = m.up[i - 1]
    nf = up.size
    images = [0] * nf
    for face in np.flatnonzero(crit_pos >= 0):
        images[face] = 1 << int(crit_pos[face])
    paired = np.flatnonzero(up >= 0)
    if paired.size:
        minv = m.ranked.faces[i - 1][paired, 0]
        paired = paired[np.argsort(minv, kind="stable")]
        cof_facets = m.facets(i)[up[paired]].tolist()
        for face, facs in zip(paired.tolist(), cof_facets):
            acc = 0
            for g in facs:
                if g != face:
                    acc ^= images[g]
            images[face] = acc
    return images


# above this many bitset bytes the flow is traced per column instead of tabulated
_FLOW_TABLE_BYTES = 1 << 28


def morse_boundary_ranks(m: MorseMatching, up_to: int) -> list[int]:
    """Ranks over Z/2 of the Morse-complex boundaries ``d_1 .. d_{up_to}``.

    Entry ``i`` of the returned list is the rank of ``d_i`` (entry 0 is 0).
    Columns are reduced on bit-packed integers; reduction of ``d_i`` stops as
    soon as the rank reaches its ceiling dim ker d_{i-1}.
    """
    ranks = [0]
    for i in range(1, up_to + 1):
        crit_hi = np.flatnonzero(m.critical_mask(i))
        crit_lo = m.critical_mask(i - 1)
        n_lo = int(crit_lo.sum())
        ceiling = min(n_lo - ranks[i - 1], crit_hi.size)
        if ceiling <= 0:
            ranks.append(0)
            continue
        crit_pos = np.full(crit_lo.size, -1, dtype=np.int64)
        crit_pos[crit_lo] = np.arange(n_lo)
        # faces touching a critical facet directly are the likeliest pivots
        touches = np.any(crit_pos[m.facets(i)[crit_hi]] >= 0, axis=1)
        ordered = np.concatenate([crit_hi[touches], crit_hi[~touches]])
        if crit_lo.size * (n_lo // 8 + 1) <= _FLOW_TABLE_BYTES:
            images = _flow_images(m, i, crit_pos)
            facets = m.facets(i)
            columns = (_xor_all(images, facets[beta]) for beta in ordered.tolist())
        else:
            columns = (_morse_column(m, i, beta, crit_pos) for beta in ordered.tolist())
        pivots: dict[int, int] = {}
        for col in columns:
            while col:
                low = col.bit_length() - 1
                if low not in pivots:
                    pivots[low] = col
                    break
                col ^= pivots[low]
            if len(pivots) == ceiling:
                break
        ranks.append(len(pivots))
    return ranks


def _xor_all(images: list[int], idx) -> int:
    acc = 0
    for j in idx:
        acc ^= images[j]
    return acc
