"""Exact samplers for extended L-ensembles via the mixture/projection route.

Varying size: the projective part (columns of Q) is included surely, each
eigenvector of Ltilde independently with probability lam/(1+lam), and the
resulting orthonormal stack feeds a chain-rule projection sampler. Fixed size:
the eigenvector subset is drawn through the elementary-symmetric-polynomial
backward recursion instead of Bernoulli draws.
"""

from __future__ import annotations

import math

import numpy as np

from .ensembles import NNP


def rng_from_seed(seed) -> np.random.Generator:
    """Deterministic generator; identical seed gives identical sample paths."""
    return np.random.default_rng(seed)


def sample_projection(U: np.ndarray, rng: np.random.Generator) -> list[int]:
    """Draw a subset of exactly m = U.shape[1] indices with P(X) = det(U_X)^2.

    Chain rule on the projection kernel P = U U^T: draw an index from the
    residual leverage (the diagonal of P), then deflate the selected
    coordinate with a rank-one downdate. The downdate zeroes the selected row
    and column exactly, so no index can repeat.
    """
    U = np.asarray(U, dtype=float)
    n, m = U.shape
    if m == 0:
        return []
    gram_err = np.max(np.abs(U.T @ U - np.eye(m)))
    if gram_err > 1e-10:
        raise ValueError(f"U is not orthonormal (max |U^T U - I| = {gram_err:.3e})")
    P = U @ U.T
    selected: list[int] = []
    for step in range(m):
        lev = np.diagonal(P).clip(min=0.0)
        cum = np.cumsum(lev)
        u = rng.random() * cum[-1]
        i = int(np.searchsorted(cum, u, side="right"))
        i = min(i, n - 1)
        selected.append(i)
        if step == m - 1:
            break
        col = P[:, i].copy()
        P = P - np.outer(col / col[i], col)
    return sorted(selected)


def _stack_basis(e: NNP, chosen: np.ndarray) -> np.ndarray:
    cols = [e.Q]
    if chosen.size:
        cols.append(e.U[:, chosen])
    B = np.hstack(cols)
    k = B.shape[1]
    if k == 0:
        return B
    # Q and the eigenvectors are orthogonal up to eigensolver round-off; fall
    # back to one QR only if that round-off ever grows noticeable.
    if np.max(np.abs(B.T @ B - np.eye(k))) > 1e-12:
        B, _ = np.linalg.qr(B)
    return B


def sample(e: NNP, rng: np.random.Generator) -> list[int]:
    """One draw from the varying-size law of the ensemble; always |X| >= p."""
    probs = e.lam / (1.0 + e.lam)
    chosen = np.flatnonzero(rng.random(e.q) < probs)
    return sample_projection(_stack_basis(e, chosen), rng)


def _log_esp_table(lam: np.ndarray, k: int) -> np.ndarray:
    """log e_l(lam_1..lam_j) for l <= k, j <= len(lam), in log space."""
    qn = lam.size
    T = np.full((k + 1, qn + 1), -math.inf)
    T[0, :] = 0.0
    for j in range(1, qn + 1):
        lg = math.log(lam[j - 1]) if lam[j - 1] > 0 else -math.inf
        T[1:, j] = np.logaddexp(T[1:, j - 1], lg + T[:-1, j - 1])
    return T


def sample_fixed(e: NNP, m: int, rng: np.random.Generator) -> list[int]:
    """One draw from the fixed-size law; |X| = m exactly, p <= m <= p + q."""
    if m < e.p or m > e.p + e.q:
        raise ValueError(
            f"fixed size m={m} outside the support [p, p+q] = [{e.p}, {e.p + e.q}]"
        )
    k = m - e.p
    chosen: list[int] = []
    if k > 0:
        T = _log_esp_table(e.lam, k)
        remaining = k
        for j in range(e.q, 0, -1):
            if remaining == 0:
                break
            if j == remaining:
                chosen.extend(range(j))
                remaining = 0
                break
            num = math.log(e.lam[j - 1]) + T[remaining - 1, j - 1]
            pr = math.exp(num - T[remaining, j]) if math.isfinite(num) else 0.0
            if rng.random() < pr:
                chosen.append(j - 1)
                remaining -= 1
    return sample_projection(_stack_basis(e, np.asarray(chosen, dtype=int)), rng)
