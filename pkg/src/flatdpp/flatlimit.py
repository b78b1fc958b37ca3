"""Limiting processes of kernel L-ensembles as the length-scale diverges.

Fixed-size ensembles of size m: the limit depends on where m sits relative to
the magic sizes (dimensions of polynomial spaces) and the kernel's smoothness
order r. Varying-size ensembles rescaled by alpha * eps^{-p}: the limit
depends on the interplay of p, r and n. Every limit is returned as a
validated extended L-ensemble plus a regime tag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ensembles import CPDViolationError, NNP, make_nnp, nnp_to_dict
from .geometry import PointSet, distance_power_matrix
from .kernels import StationaryKernel, kernel_matrix
from .polybasis import count_poly, orthonormal_basis, vandermonde, vandermonde_block
from .wronskian import schur_block, wronskian_matrix

PROJECTION_SMOOTH = "ProjectionSmooth"
NONMAGIC_WRONSKIAN = "NonMagicWronskian"
FINITE_SMOOTHNESS = "FiniteSmoothness"
FULL_SET = "FullSetAlmostSurely"
VARYING_PROJECTION = "VaryingProjection"
VARYING_WRONSKIAN = "VaryingWronskian"
VARYING_FINITE = "VaryingFiniteSmoothness"


@dataclass
class FlatLimitResult:
    """A limiting point process: regime tag, ensemble, and dispatch metadata."""

    regime: str
    process: NNP
    fixed_size: int | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        param = {
            PROJECTION_SMOOTH: "k",
            NONMAGIC_WRONSKIAN: "k",
            FINITE_SMOOTHNESS: "r",
            VARYING_PROJECTION: "l",
            VARYING_WRONSKIAN: "l",
            VARYING_FINITE: "r",
        }.get(self.regime)
        if param is None or param not in self.metadata:
            return self.regime
        val = self.metadata[param]
        if param == "r" and isinstance(val, float):
            val = int(val)
        return f"{self.regime}({param}={val})"

    def to_dict(self) -> dict:
        meta = {k: (None if v is None or (isinstance(v, float) and math.isinf(v))
                    else v)
                for k, v in self.metadata.items()}
        return {
            "regime": self.regime,
            "label": self.label,
            "fixed_size": self.fixed_size,
            "metadata": meta,
            "nnp": nnp_to_dict(self.process),
        }


def classify_fixed(d: int, r, m: int) -> tuple[str, int]:
    """Regime of the fixed-size limit: exactly one of the three cases fires.

    Returns (regime, k) where k is the polynomial degree of the regime
    (equal to r for the finite-smoothness case). Boundary sizes m equal to a
    magic number route to the projection regime.
    """
    k = 0
    while count_poly(k, d) < m:
        k += 1
    if count_poly(k, d) == m and k <= r - 1:
        return PROJECTION_SMOOTH, k
    if k <= r - 1:
        return NONMAGIC_WRONSKIAN, k
    return FINITE_SMOOTHNESS, int(r)


def _sure_full_set(n: int) -> NNP:
    return make_nnp(np.zeros((n, n)), np.eye(n))


def _projection_process(ps: PointSet, k: int) -> NNP:
    return make_nnp(np.zeros((ps.n, ps.n)), vandermonde(ps, k))


def _wronskian_process(ps: PointSet, kernel: StationaryKernel, k: int,
                       scale: float = 1.0) -> NNP:
    Wbar = schur_block(wronskian_matrix(kernel, k, ps.d))
    Vk = vandermonde_block(ps, k)
    L = scale * (Vk @ Wbar @ Vk.T)
    V = vandermonde(ps, k - 1) if k >= 1 else None
    return make_nnp(L, V)


def _check_size(ps: PointSet, m: int) -> None:
    if m < 1 or m > ps.n:
        raise ValueError(f"fixed size m={m} must satisfy 1 <= m <= n = {ps.n}")


def fixed_size_limit(ps: PointSet, kernel: StationaryKernel, m: int) -> FlatLimitResult:
    """Limit of the size-m L-ensemble of the kernel matrix at vanishing inverse scale."""
    _check_size(ps, m)
    if m == ps.n:
        # every regime degenerates to the sure full set
        return FlatLimitResult(FULL_SET, _sure_full_set(ps.n), fixed_size=m,
                               metadata={"d": ps.d, "r": kernel.smoothness, "m": m})
    return _fixed_size_dispatch(ps, kernel, m)


def _fixed_size_dispatch(ps: PointSet, kernel: StationaryKernel, m: int) -> FlatLimitResult:
    d, r = ps.d, kernel.smoothness
    regime, k = classify_fixed(d, r, m)
    meta = {"d": d, "r": r, "m": m}
    if regime == PROJECTION_SMOOTH:
        meta.update(k=k, bracket=(count_poly(k - 1, d), count_poly(k, d)))
        return FlatLimitResult(regime, _projection_process(ps, k), m, meta)
    if regime == NONMAGIC_WRONSKIAN:
        meta.update(k=k, bracket=(count_poly(k - 1, d), count_poly(k, d)))
        return FlatLimitResult(regime, _wronskian_process(ps, kernel, k), m, meta)
    r = int(r)
    L = (-1.0) ** r * distance_power_matrix(ps, 2 * r - 1)
    V = vandermonde(ps, r - 1)
    meta.update(k=r, bracket=(count_poly(r - 1, d), None))
    return FlatLimitResult(regime, make_nnp(L, V), m, meta)


def _varying_params(p: int, alpha: float):
    if p < 0 or p != int(p):
        raise ValueError("scaling exponent p must be a nonnegative integer")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return int(p), math.ceil(p / 2)


def varying_size_limit(ps: PointSet, kernel: StationaryKernel, p: int,
                       alpha: float = 1.0) -> FlatLimitResult:
    """Limit of the varying-size L-ensemble scaled by alpha * eps^{-p}."""
    p, l = _varying_params(p, alpha)
    d, r = ps.d, kernel.smoothness
    meta = {"d": d, "r": r, "p": p, "alpha": alpha, "l": l}
    half = (p + 1) / 2
    if count_poly(l - 1, d) >= ps.n or r < half:
        return FlatLimitResult(FULL_SET, _sure_full_set(ps.n), ps.n, meta)
    if r > half:
        if p % 2 == 1:
            msize = count_poly(l - 1, d)
            meta.update(m=msize)
            return FlatLimitResult(VARYING_PROJECTION,
                                   _projection_process(ps, l - 1), msize, meta)
        return FlatLimitResult(VARYING_WRONSKIAN,
                               _wronskian_process(ps, kernel, l, scale=alpha),
                               None, meta)
    # r == (p+1)/2: the first odd derivative sets both the shape and the scale
    r = int(r)
    f = kernel.coeff(2 * r - 1)
    L = alpha * f * distance_power_matrix(ps, 2 * r - 1)
    V = vandermonde(ps, r - 1)
    try:
        process = make_nnp(L, V)
    except CPDViolationError as err:
        raise CPDViolationError(
            f"the critical-scaling limit requires sign(f_{{2r-1}}) = (-1)^r, "
            f"violated by kernel '{kernel.name}' (f_{2 * r - 1} = {f:g}): {err}"
        ) from err
    return FlatLimitResult(VARYING_FINITE, process, None, meta)


def limit_size_distribution(ps: PointSet, kernel: StationaryKernel, p: int,
                            alpha: float = 1.0) -> np.ndarray:
    """Limiting distribution of |X| over 0..n for the alpha * eps^{-p} scaling.

    Computed directly from the regime formulas (point masses, or elementary
    symmetric polynomials of the projected limit matrix), independently of the
    cached ensemble spectra.
    """
    p, l = _varying_params(p, alpha)
    d, r = ps.d, kernel.smoothness
    n = ps.n
    half = (p + 1) / 2
    out = np.zeros(n + 1)
    if count_poly(l - 1, d) >= n or r < half:
        out[n] = 1.0
        return out
    if r > half and p % 2 == 1:
        out[count_poly(l - 1, d)] = 1.0
        return out
    if r > half:
        Wbar = schur_block(wronskian_matrix(kernel, l, d))
        Vl = vandermonde_block(ps, l)
        L = alpha * (Vl @ Wbar @ Vl.T)
    else:
        # here l = r = (p+1)/2
        L = alpha * kernel.coeff(p) * distance_power_matrix(ps, p)
    base = count_poly(l - 1, d)
    Q = orthonormal_basis(vandermonde(ps, l - 1)) if l >= 1 else np.zeros((n, 0))
    proj = np.eye(n) - Q @ Q.T
    w = np.linalg.eigvalsh(proj @ L @ proj)
    wmax = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and w[0] < -1e-10 * (1.0 + wmax):
        raise CPDViolationError(
            "limit size law undefined: the projected limit matrix is not PSD "
            "(requires sign(f_{2r-1}) = (-1)^r at critical scaling)"
        )
    w = np.clip(w, 0.0, None)
    w[w <= 1e-12 * wmax] = 0.0
    denom = float(np.prod(1.0 + w))
    row = np.zeros(n + 1)
    row[0] = 1.0
    for v in w:
        row[1:] = row[1:] + v * row[:-1]
    for m in range(base, n + 1):
        out[m] = row[m - base] / denom
    return out


def scaled_ensemble(ps: PointSet, kernel: StationaryKernel, eps: float,
                    p: int = 0, alpha: float = 1.0) -> NNP:
    """Pre-limit ensemble with L = alpha * eps^{-p} * kernel matrix, empty V."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    L = alpha * eps ** (-float(p)) * kernel_matrix(kernel, ps, eps)
    return make_nnp(L)


def default_ensemble(ps: PointSet, beta: int, gamma: float) -> NNP:
    """Distance-based default family: L = gamma (-1)^ceil(beta/2) D^(beta).

    beta must be a positive odd integer (the conditionally positive definite
    range); the projective part spans polynomials of degree < ceil(beta/2).
    These are exactly the critical-scaling limits of finitely smooth kernels.
    """
    if beta < 1 or beta % 2 == 0:
        raise ValueError("beta must be a positive odd integer")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    half_up = (beta + 1) // 2
    L = gamma * (-1.0) ** half_up * distance_power_matrix(ps, beta)
    V = vandermonde(ps, half_up - 1)
    return make_nnp(L, V)
