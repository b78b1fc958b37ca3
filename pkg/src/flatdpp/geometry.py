"""Ground sets of distinct points and matrices of powered pairwise distances."""

from __future__ import annotations

import numpy as np

#: Two points closer than this (Euclidean) are considered coincident.
DISTINCT_TOL = 1e-12


class PointSet:
    """An ordered set of n pairwise-distinct points in R^d.

    Coordinates are stored as an immutable (n, d) float64 array. Every
    determinant formula downstream assumes distinct points, so coincident
    points are rejected at construction time.
    """

    def __init__(self, coords):
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2:
            raise ValueError("coords must be an (n, d) array")
        n, d = coords.shape
        if n < 1 or d < 1:
            raise ValueError("need n >= 1 points in dimension d >= 1")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        self.coords = coords.copy()
        self.coords.setflags(write=False)
        self.n = n
        self.d = d
        if n > 1:
            sq = _pairwise_sq_dists(self.coords)
            iu = np.triu_indices(n, k=1)
            dmin = float(np.sqrt(np.min(sq[iu])))
            if dmin <= DISTINCT_TOL:
                raise ValueError(
                    f"points are not pairwise distinct (min distance {dmin:.3e})"
                )

    @classmethod
    def from_csv(cls, path) -> "PointSet":
        """Read one point per row, d numeric columns, no header."""
        coords = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
        return cls(coords)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"PointSet(n={self.n}, d={self.d})"


def uniform_points(n: int, d: int, seed: int) -> PointSet:
    """n points drawn uniformly in the unit box [0, 1]^d, seeded."""
    rng = np.random.default_rng(seed)
    return PointSet(rng.uniform(size=(n, d)))


def grid_points(n: int, d: int) -> PointSet:
    """Regular grid in [0, 1]^d with at least n points (n rounded up per axis)."""
    per_axis = int(np.ceil(n ** (1.0 / d)))
    axes = [np.linspace(0.0, 1.0, per_axis) for _ in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)[:n]
    return PointSet(coords)


def _pairwise_sq_dists(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def distance_matrix(ps: PointSet) -> np.ndarray:
    """Euclidean distance matrix; each pair computed once, mirrored exactly."""
    return distance_power_matrix(ps, 1)


def distance_power_matrix(ps: PointSet, p: int) -> np.ndarray:
    """Matrix of p-th powers of pairwise Euclidean distances.

    p = 0 returns the all-ones matrix (convention 0^0 = 1). The result is
    symmetric to exact bit equality and has a zero diagonal for p >= 1.
    """
    if p < 0 or p != int(p):
        raise ValueError("power p must be a nonnegative integer")
    p = int(p)
    if p == 0:
        return np.ones((ps.n, ps.n))
    n = ps.n
    out = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    diff = ps.coords[iu[0]] - ps.coords[iu[1]]
    sq = np.einsum("ij,ij->i", diff, diff)
    if p % 2 == 0:
        vals = sq ** (p // 2)
    else:
        vals = np.sqrt(sq) ** p
    out[iu] = vals
    out += out.T
    return out
