"""Connected components and the pattern statistics that bound Betti numbers.

Three patterns are recognised, each by exact per-component face counts:

* components isomorphic to the boundary of a (k+1)-simplex (hollow simplex),
* components isomorphic to the cross-polytope boundary ``O_k``,
* k-faces lying in components with at least ``m`` vertices.

Components are those of the 1-skeleton; isolated vertices are components of
size one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb
from typing import Iterable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from softcomplex.complex import SimplicialComplex

__all__ = [
    "ComponentTable",
    "CensusReport",
    "component_labels",
    "components",
    "count_empty_simplex_components",
    "count_cross_polytope_components",
    "count_faces_in_large_components",
    "census",
    "large_threshold",
]


def component_labels(complex: SimplicialComplex) -> tuple[int, np.ndarray]:
    """Number of components and a label per vertex.

    Labels are numbered in order of each component's smallest vertex.
    """
    n = complex.n
    e = complex.faces[1] if complex.k_max >= 1 else np.empty((0, 2), dtype=np.int64)
    g = coo_matrix((np.ones(e.shape[0], dtype=np.int8), (e[:, 0], e[:, 1])), shape=(n, n))
    return connected_components(g, directed=False)


def components(complex: SimplicialComplex) -> list[list[int]]:
    """The vertex partition, each part sorted, parts ordered by smallest vertex."""
    ncomp, labels = component_labels(complex)
    order = np.argsort(labels, kind="stable")
    bounds = np.cumsum(np.bincount(labels, minlength=ncomp))[:-1]
    return [part.tolist() for part in np.split(order, bounds)] if complex.n else []


@dataclass(frozen=True)
class ComponentTable:
    """Per-component face counts: ``counts[i][c]`` is the number of i-faces in component ``c``."""

    ncomp: int
    labels: np.ndarray
    counts: tuple

    @classmethod
    def of(cls, complex: SimplicialComplex, labels: tuple[int, np.ndarray] | None = None) -> "ComponentTable":
        ncomp, lab = component_labels(complex) if labels is None else labels
        counts = tuple(
            np.bincount(lab[complex.faces[i][:, 0]], minlength=ncomp) if complex.f[i] else np.zeros(ncomp, dtype=np.int64)
            for i in range(complex.k_max + 1)
        )
        return cls(ncomp, lab, counts)

    @property
    def sizes(self) -> np.ndarray:
        return self.counts[0]

    def matches(self, f_target: list[int]) -> np.ndarray:
        """Mask of components whose face vector is ``f_target`` padded with zeros."""
        ok = np.ones(self.ncomp, dtype=bool)
        for i, cnt in enumerate(self.counts):
            want = f_target[i] if i < len(f_target) else 0
            ok &= cnt == want
        return ok

    def empty_simplex(self, k: int) -> np.ndarray:
        return self.matches([comb(k + 2, i + 1) for i in range(k + 1)])

    def full_simplex(self, k: int) -> np.ndarray:
        return self.matches([comb(k + 2, i + 1) for i in range(k + 2)])

    def cross_polytope(self, k: int) -> np.ndarray:
        # 2k+2 vertices, all i-faces of the complement-of-perfect-matching clique
        # complex up to dimension k and nothing above; with closure this is O_k
        return self.matches([2 ** (i + 1) * comb(k + 1, i + 1) for i in range(k + 1)])

    def faces_in_large(self, k: int, m: int) -> int:
        if k >= len(self.counts):
            return 0
        return int(self.counts[k][self.sizes >= m].sum())


def _require(complex: SimplicialComplex, need: int, what: str) -> None:
    if complex.k_max < need:
        raise ValueError(f"{what} needs faces up to dimension {need}; complex has k_max={complex.k_max}")


def count_empty_simplex_components(complex: SimplicialComplex, k: int, table: ComponentTable | None = None) -> int:
    """Number of components isomorphic to the boundary of a (k+1)-simplex."""
    if k < 1:
        raise ValueError("k must be >= 1")
    _require(complex, k + 1, "empty simplex count")
    table = ComponentTable.of(complex) if table is None else table
    return int(table.empty_simplex(k).sum())


def count_cross_polytope_components(complex: SimplicialComplex, k: int, table: ComponentTable | None = None) -> int:
    """Number of components isomorphic to the cross-polytope boundary ``O_k``.

    A closed complex on 2k+2 vertices whose 1-skeleton is the complete graph
    minus a perfect matching has at most 2^(i+1) C(k+1, i+1) faces of dimension
    i, with equality exactly for ``O_k``; the face vector therefore decides it.
    The degree condition is checked explicitly as well.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _require(complex, k, "cross-polytope count")
    table = ComponentTable.of(complex) if table is None else table
    hit = table.cross_polytope(k)
    if not hit.any():
        return 0
    deg = np.bincount(complex.faces[1].ravel(), minlength=complex.n)
    in_hit = hit[table.labels]
    bad = np.unique(table.labels[in_hit & (deg != 2 * k)])
    return int(hit.sum() - bad.size)


def count_faces_in_large_components(
    complex: SimplicialComplex, k: int, m: int, table: ComponentTable | None = None
) -> int:
    """Number of k-faces whose component has at least ``m`` vertices."""
    if k < 0 or m < 1:
        raise ValueError("need k >= 0 and m >= 1")
    table = ComponentTable.of(complex) if table is None else table
    return table.faces_in_large(k, m)


def large_threshold(k: int, rule="rips") -> int:
    """Component size threshold ``m`` for f_k^{>=m}: ``k + 3`` for both models, or a custom integer."""
    if rule in ("rips", "cech"):
        return k + 3
    m = int(rule)
    if m < 1:
        raise ValueError("m must be >= 1")
    return m


@dataclass(frozen=True)
class CensusReport:
    component_sizes: dict = field(default_factory=dict)
    empty_simplex: dict = field(default_factory=dict)
    cross_polytope: dict = field(default_factory=dict)
    faces_in_large: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "component_sizes": {str(s): c for s, c in sorted(self.component_sizes.items())},
            "empty_simplex": {str(k): c for k, c in sorted(self.empty_simplex.items())},
            "cross_polytope": {str(k): c for k, c in sorted(self.cross_polytope.items())},
            "faces_in_large": {f"{k},{m}": c for (k, m), c in sorted(self.faces_in_large.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "CensusReport":
        return cls(
            {int(s): c for s, c in data["component_sizes"].items()},
            {int(k): c for k, c in data["empty_simplex"].items()},
            {int(k): c for k, c in data["cross_polytope"].items()},
            {tuple(int(t) for t in key.split(",")): c for key, c in data["faces_in_large"].items()},
        )


def census(complex: SimplicialComplex, k_list: Iterable[int], m_rule="rips") -> CensusReport:
    """All pattern counts for each ``k`` in ``k_list`` from one component pass.

    Hollow simplex counts need ``k_max >= k + 1`` and cross-polytope counts
    ``k_max >= k``; requesting a ``k`` the complex cannot support is an error.
    """
    k_list = sorted(set(int(k) for k in k_list))
    for k in k_list:
        if k < 1:
            raise ValueError("k must be >= 1")
        _require(complex, k + 1, "census")
    table = ComponentTable.of(complex)
    sizes, freq = np.unique(table.sizes, return_counts=True)
    return CensusReport(
        component_sizes={int(s): int(c) for s, c in zip(sizes, freq)},
        empty_simplex={k: count_empty_simplex_components(complex, k, table) for k in k_list},
        cross_polytope={k: count_cross_polytope_components(complex, k, table) for k in k_list},
        faces_in_large={
            (k, large_threshold(k, m_rule)): table.faces_in_large(k, large_threshold(k, m_rule))
            for k in k_list
        },
    )
