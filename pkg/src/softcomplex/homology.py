"""Simplicial homology over Z/2.

Two exact methods are available. ``"direct"`` reduces the full boundary
matrices column by column, using Python integers as bit-packed columns.
``"morse"`` first collapses the complex along an acyclic matching and reduces
the (much smaller) Morse complex instead. Both give identical ranks.
"""

from __future__ import annotations

from softcomplex.complex import SimplicialComplex
from softcomplex.morse import build_gradient_field, critical_counts, morse_boundary_ranks

__all__ = [
    "BettiVector",
    "boundary_rank",
    "betti",
    "full_betti",
    "euler_characteristic",
    "morse_inequalities_hold",
    "critical_betti_bound",
    "DIRECT_FACE_LIMIT",
]


class BettiVector(tuple):
    """Betti numbers ``(b_0, b_1, ...)``; compares equal to the plain tuple."""

    @property
    def betti(self) -> list[int]:
        return list(self)

    def __repr__(self) -> str:
        return "BettiVector(" + ", ".join(str(b) for b in self) + ")"


# below this many faces the direct reduction is cheaper than building a matching
DIRECT_FACE_LIMIT = 20000


def _gf2_rank(columns) -> int:
    pivots: dict[int, int] = {}
    for col in columns:
        while col:
            low = col.bit_length() - 1
            if low not in pivots:
                pivots[low] = col
                break
            col ^= pivots[low]
    return len(pivots)


def boundary_rank(complex: SimplicialComplex, i: int) -> int:
    """Rank over Z/2 of the boundary map from i-chains to (i-1)-chains."""
    if i <= 0 or i > complex.k_max or complex.f[i] == 0:
        return 0
    facets = complex.facet_indices(i)
    return _gf2_rank(sum(1 << int(j) for j in row) for row in facets)


def _ranks(complex: SimplicialComplex, top: int, method: str, matching=None) -> tuple[list[int], list[int]]:
    """Chain ranks ``[c_0..c_top]`` and boundary ranks ``[0, rank d_1, ..., rank d_top]``.

    For the Morse method the chain groups are spanned by critical faces.
    """
    if matching is not None and method in ("auto", "morse"):
        if matching.complex is not complex and matching.complex != complex:
            raise ValueError("matching was built on a different complex")
        return critical_counts(matching)[: top + 1], morse_boundary_ranks(matching, top)
    if method == "auto":
        method = "direct" if sum(complex.f[: top + 1]) <= DIRECT_FACE_LIMIT else "morse"
    if method == "direct":
        return list(complex.f[: top + 1]), [0] + [boundary_rank(complex, i) for i in range(1, top + 1)]
    if method == "morse":
        m = build_gradient_field(complex.truncate(top))
        return critical_counts(m), morse_boundary_ranks(m, top)
    raise ValueError(f"unknown homology method {method!r}")


def _betti_from_ranks(f: list[int], ranks: list[int], up_to: int) -> BettiVector:
    out = []
    for i in range(up_to + 1):
        nxt = ranks[i + 1] if i + 1 < len(ranks) else 0
        out.append(f[i] - ranks[i] - nxt)
    return BettiVector(out)


def betti(
    complex: SimplicialComplex, up_to: int | None = None, method: str = "auto", matching=None
) -> BettiVector:
    """Betti numbers ``(b_0, ..., b_up_to)`` of the complex over Z/2.

    ``up_to`` defaults to ``k_max - 1``, the highest degree whose homology is
    determined by the stored faces; it must not exceed that. ``method`` is
    ``"direct"``, ``"morse"`` or ``"auto"``; a precomputed gradient
    ``matching`` on ``complex`` may be supplied for the Morse route.
    """
    k = complex.k_max
    if up_to is None:
        up_to = k - 1
    if up_to < 0 or up_to > k - 1:
        raise ValueError(
            f"betti up to degree {up_to} needs faces of dimension {up_to + 1}; k_max is {k}"
        )
    if complex.n == 0:
        return BettiVector(0 for _ in range(up_to + 1))
    cells, ranks = _ranks(complex, up_to + 1, method, matching)
    return _betti_from_ranks(cells, ranks, up_to)


def full_betti(complex: SimplicialComplex, method: str = "auto", matching=None) -> BettiVector:
    """Betti numbers of the stored complex itself in every degree ``0..k_max``.

    In degree ``k_max`` this is the homology of the truncated complex, which is
    what the Euler characteristic identity refers to.
    """
    k = complex.k_max
    if complex.n == 0:
        return BettiVector(0 for _ in range(k + 1))
    cells, ranks = _ranks(complex, k, method, matching)
    return _betti_from_ranks(cells, ranks, k)


def euler_characteristic(complex: SimplicialComplex) -> int:
    """Alternating sum of face counts."""
    return int(sum((-1) ** i * c for i, c in enumerate(complex.f)))


def morse_inequalities_hold(critical: list[int], betti_numbers) -> bool:
    """Weak Morse inequalities ``C_i >= b_i`` degree by degree."""
    return all(c >= b for c, b in zip(critical, betti_numbers))


def critical_betti_bound(complex: SimplicialComplex) -> list[int]:
    """Critical counts of the id-ordered gradient, an upper bound on each b_i."""
    return critical_counts(build_gradient_field(complex))

