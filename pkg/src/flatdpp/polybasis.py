"""Multivariate monomial bases, counting formulas and Vandermonde matrices.

Monomials are ordered by total degree, then graded-lexicographically within a
degree (largest first exponent first). For d = 1 this reduces to the classical
column order 1, x, x^2, ...
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np

from .geometry import PointSet


def count_homogeneous(k: int, d: int) -> int:
    """Number of monomials of total degree exactly k in d variables."""
    if k < 0 or d < 1:
        raise ValueError("need k >= 0 and d >= 1")
    return math.comb(k + d - 1, d - 1)


def count_poly(k: int, d: int) -> int:
    """Number of monomials of total degree <= k in d variables; 0 for k = -1."""
    if d < 1:
        raise ValueError("need d >= 1")
    if k == -1:
        return 0
    if k < -1:
        raise ValueError("need k >= -1")
    return math.comb(k + d, d)


def magic_numbers(d: int, upper_bound: int) -> list[int]:
    """All dimension counts count_poly(k, d) <= upper_bound, ascending.

    These are the sample sizes at which square multivariate Vandermonde
    matrices exist, hence the sizes with universal flat limits.
    """
    if d < 1:
        raise ValueError("need d >= 1")
    out = []
    k = 0
    while True:
        p = count_poly(k, d)
        if p > upper_bound:
            break
        out.append(p)
        k += 1
    return out


def homogeneous_indices(k: int, d: int) -> Iterator[tuple[int, ...]]:
    """Multi-indices of total degree k in d variables, lexicographically descending."""
    if d == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in homogeneous_indices(k - first, d - 1):
            yield (first,) + rest


class MonomialBasis:
    """Ordered multi-indices of degree <= max_degree, with per-degree blocks."""

    def __init__(self, d: int, max_degree: int):
        if d < 1 or max_degree < 0:
            raise ValueError("need d >= 1 and max_degree >= 0")
        self.d = d
        self.max_degree = max_degree
        self.indices: list[tuple[int, ...]] = []
        self.block_offsets = [0]
        for j in range(max_degree + 1):
            self.indices.extend(homogeneous_indices(j, d))
            self.block_offsets.append(len(self.indices))
        assert len(self.indices) == count_poly(max_degree, d)

    def __len__(self) -> int:
        return len(self.indices)

    def block(self, degree: int) -> slice:
        """Slice covering the degree-`degree` block of the ordering."""
        return slice(self.block_offsets[degree], self.block_offsets[degree + 1])

    def degrees(self) -> np.ndarray:
        return np.array([sum(a) for a in self.indices], dtype=int)


def vandermonde(ps: PointSet, k: int) -> np.ndarray:
    """n x count_poly(k, d) matrix of monomials of degree <= k at the points.

    Column j evaluates the j-th basis monomial; the leading count_poly(k-1, d)
    columns coincide with vandermonde(ps, k-1).
    """
    if k < 0:
        raise ValueError("need k >= 0")
    basis = MonomialBasis(ps.d, k)
    cols = [np.prod(ps.coords ** np.asarray(alpha, dtype=float), axis=1)
            for alpha in basis.indices]
    return np.column_stack(cols)


def vandermonde_block(ps: PointSet, degree: int) -> np.ndarray:
    """The degree-`degree` homogeneous block of the Vandermonde matrix."""
    full = vandermonde(ps, degree)
    basis = MonomialBasis(ps.d, degree)
    return full[:, basis.block(degree)]


def orthonormal_basis(M: np.ndarray, rank_tol: float | None = None) -> np.ndarray:
    """Orthonormal basis Q of span(M), rank decided by a singular-value cut.

    Rank-deficient input is allowed; the default threshold is the standard
    numerical-rank rule max(n, p) * machine-eps * sigma_max.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("expected a matrix")
    n, p = M.shape
    if p == 0 or n == 0:
        return np.zeros((n, 0))
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((n, 0))
    if rank_tol is None:
        cut = max(n, p) * np.finfo(float).eps * s[0]
    else:
        cut = rank_tol * s[0]
    rank = int(np.sum(s > cut))
    return U[:, :rank]
