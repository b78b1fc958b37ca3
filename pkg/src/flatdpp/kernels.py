"""Stationary kernels f(||x - y||): catalog, Taylor data and matrix assembly.

A kernel is represented by its radial profile f together with the truncated
Taylor coefficients f_j = f^(j)(0)/j!. The smoothness order r is the index of
the first nonvanishing odd coefficient; it alone decides which flat-limit
regime a kernel falls into, while the even coefficients feed the Wronskian
matrices of non-universal limits.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Sequence

import mpmath as mp
import numpy as np

from .geometry import PointSet, distance_matrix

#: Default truncation order for builtin Taylor expansions.
DEFAULT_TRUNCATION = 16

#: Odd coefficients below this are treated as exact zeros.
ODD_COEFF_TOL = 1e-14

INFINITE = math.inf


def smoothness_order(taylor: Sequence[float]) -> float:
    """Smallest r >= 1 with |f_{2r-1}| > tol, or math.inf if none represented.

    A kernel whose represented odd coefficients all vanish is completely
    smooth as far as its truncation can tell.
    """
    taylor = np.asarray(taylor, dtype=float)
    if taylor.size == 0:
        raise ValueError("empty coefficient vector")
    for r in range(1, (taylor.size + 1) // 2 + 1):
        j = 2 * r - 1
        if j < taylor.size and abs(taylor[j]) > ODD_COEFF_TOL:
            return r
    return INFINITE


class StationaryKernel:
    """Radial kernel profile with cached Taylor coefficients.

    Immutable after construction. `evaluator` maps nonnegative float arrays
    to f(delta); `mp_evaluator`, when present, evaluates f at mpmath working
    precision (needed by the arbitrary-precision enumeration oracles, where
    float64 entries would cap determinant accuracy).
    """

    def __init__(self, taylor, evaluator=None, mp_evaluator=None, name="custom"):
        taylor = np.asarray(taylor, dtype=float)
        if taylor.size == 0:
            raise ValueError("kernel needs at least the constant coefficient f_0")
        self.taylor = taylor.copy()
        self.taylor.setflags(write=False)
        self.smoothness = smoothness_order(taylor)
        if math.isfinite(self.smoothness):
            r = int(self.smoothness)
            for j in range(1, 2 * r - 1, 2):
                if abs(taylor[j]) > ODD_COEFF_TOL:
                    raise ValueError("odd coefficients below the smoothness order must vanish")
        self.name = name
        self._evaluator = evaluator
        self.mp_evaluator = mp_evaluator

    def __call__(self, delta):
        """Evaluate f at delta >= 0 (scalar or array)."""
        if self._evaluator is not None:
            return self._evaluator(np.asarray(delta, dtype=float))
        return self._series(np.asarray(delta, dtype=float))

    def _series(self, delta):
        out = np.zeros_like(delta, dtype=float)
        for c in self.taylor[::-1]:
            out = out * delta + c
        return out

    def coeff(self, j: int) -> float:
        """Taylor coefficient f_j; raises if the truncation is too short."""
        if j >= self.taylor.size:
            raise ValueError(
                f"kernel '{self.name}' carries coefficients up to order "
                f"{self.taylor.size - 1}, order {j} requested"
            )
        return float(self.taylor[j])

    def eval_mp(self, delta):
        """Evaluate f at an mpmath scalar, at working precision when possible."""
        if self.mp_evaluator is not None:
            return self.mp_evaluator(delta)
        # Horner on the truncated series; accuracy capped by the float64
        # coefficients, adequate away from the deep flat regime.
        acc = mp.mpf(0)
        for c in self.taylor[::-1]:
            acc = acc * delta + mp.mpf(float(c))
        return acc

    def __repr__(self) -> str:
        return f"StationaryKernel({self.name!r}, r={self.smoothness})"


def kernel_matrix(kernel: StationaryKernel, ps: PointSet, eps: float) -> np.ndarray:
    """Kernel matrix [f(eps * ||x_i - x_j||)]; diagonal equals f(0)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return np.asarray(kernel(eps * distance_matrix(ps)), dtype=float)


# ---------------------------------------------------------------------------
# Builtin catalog. Taylor products are carried out in exact rationals, so the
# declared smoothness orders are structural, not numerical accidents.
# ---------------------------------------------------------------------------


def _exp_series(n: int) -> list[Fraction]:
    """Coefficients of exp(-x) up to order n."""
    return [Fraction((-1) ** j, math.factorial(j)) for j in range(n + 1)]


def _convolve(a: Sequence[Fraction], b: Sequence[Fraction], n: int) -> list[Fraction]:
    out = [Fraction(0)] * (n + 1)
    for i, ai in enumerate(a[: n + 1]):
        for j, bj in enumerate(b[: n + 1 - i]):
            out[i + j] += ai * bj
    return out


def _sin_plus_cos_series(n: int) -> list[Fraction]:
    """Coefficients of sin(x) + cos(x) up to order n."""
    out = []
    for j in range(n + 1):
        # cycle of signs for sin + cos: 1, 1, -1/2!, -1/3!, 1/4!, 1/5!, ...
        sign = -1 if (j % 4) in (2, 3) else 1
        out.append(Fraction(sign, math.factorial(j)))
    return out


def _builtin_table(n: int):
    e = _exp_series(n)
    gauss = [
        Fraction((-1) ** (j // 2), math.factorial(j // 2)) if j % 2 == 0 else Fraction(0)
        for j in range(n + 1)
    ]
    half_sqrt2 = math.sqrt(2.0) / 2.0
    sincos = _convolve(_sin_plus_cos_series(n), e, n)
    return {
        "gaussian": (
            [float(c) for c in gauss],
            lambda x: np.exp(-(x**2)),
            lambda x: mp.exp(-(x**2)),
        ),
        "exponential": (
            [float(c) for c in e],
            lambda x: np.exp(-x),
            lambda x: mp.exp(-x),
        ),
        "(1+d)exp(-d)": (
            [float(c) for c in _convolve([Fraction(1), Fraction(1)], e, n)],
            lambda x: (1.0 + x) * np.exp(-x),
            lambda x: (1 + x) * mp.exp(-x),
        ),
        "sin(d+pi/4)exp(-d)": (
            [half_sqrt2 * float(c) for c in sincos],
            lambda x: np.sin(x + np.pi / 4) * np.exp(-x),
            lambda x: mp.sin(x + mp.pi / 4) * mp.exp(-x),
        ),
        "(3+3d+d^2)exp(-d)": (
            [float(c) for c in _convolve([Fraction(3), Fraction(3), Fraction(1)], e, n)],
            lambda x: (3.0 + 3.0 * x + x**2) * np.exp(-x),
            lambda x: (3 + 3 * x + x**2) * mp.exp(-x),
        ),
    }


_ALIASES = {
    "gaussian": "gaussian",
    "squared-exponential": "gaussian",
    "rbf": "gaussian",
    "exponential": "exponential",
    "laplace": "exponential",
    "(1+d)exp(-d)": "(1+d)exp(-d)",
    "(1+d)e^-d": "(1+d)exp(-d)",
    "matern32": "(1+d)exp(-d)",
    "sin(d+pi/4)exp(-d)": "sin(d+pi/4)exp(-d)",
    "sin(d+pi/4)e^-d": "sin(d+pi/4)exp(-d)",
    "sinexp": "sin(d+pi/4)exp(-d)",
    "(3+3d+d^2)exp(-d)": "(3+3d+d^2)exp(-d)",
    "(3+3d+d^2)e^-d": "(3+3d+d^2)exp(-d)",
    "matern52": "(3+3d+d^2)exp(-d)",
}

#: Declared smoothness orders of the catalog, checked against the series.
BUILTIN_SMOOTHNESS = {
    "gaussian": INFINITE,
    "exponential": 1,
    "(1+d)exp(-d)": 2,
    "sin(d+pi/4)exp(-d)": 2,
    "(3+3d+d^2)exp(-d)": 3,
}

BUILTIN_NAMES = tuple(BUILTIN_SMOOTHNESS)


def _normalize_name(name: str) -> str:
    s = name.strip().lower()
    # unicode spellings used in figure captions
    for src, dst in (
        ("δ", "d"),  # delta
        ("²", "^2"),
        ("−", "-"),
        ("π", "pi"),
        ("e^{-d}", "exp(-d)"),
        ("e^{−d}", "exp(-d)"),
        (" ", ""),
        ("{", ""),
        ("}", ""),
    ):
        s = s.replace(src, dst)
    return s


def builtin_kernel(name: str, truncation: int = DEFAULT_TRUNCATION) -> StationaryKernel:
    """Kernel from the builtin catalog; accepts short and formula-style names."""
    key = _ALIASES.get(_normalize_name(name))
    if key is None:
        raise KeyError(f"unknown kernel name {name!r}; choose from {sorted(set(_ALIASES))}")
    coeffs, ev, mev = _builtin_table(truncation)[key]
    kernel = StationaryKernel(coeffs, evaluator=ev, mp_evaluator=mev, name=key)
    assert kernel.smoothness == BUILTIN_SMOOTHNESS[key]
    return kernel


def custom_kernel(coeffs: Sequence[float], evaluator: Callable | None = None,
                  name: str = "custom") -> StationaryKernel:
    """Kernel from explicit Taylor coefficients, optionally with an evaluator."""
    return StationaryKernel(coeffs, evaluator=evaluator, name=name)


def kernel_from_config(cfg) -> StationaryKernel:
    """Build a kernel from a JSON-style dict: {"name": ...} or {"coeffs": [...]}.

    A coefficient entry may set "eval": "series" (the default and only mode):
    the profile is evaluated from the truncated series itself.
    """
    if "name" in cfg:
        return builtin_kernel(cfg["name"])
    if "coeffs" in cfg:
        if cfg.get("eval", "series") != "series":
            raise ValueError("coefficient kernels only support series evaluation")
        return custom_kernel([float(c) for c in cfg["coeffs"]])
    raise ValueError("kernel config needs 'name' or 'coeffs'")
