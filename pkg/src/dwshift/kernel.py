"""RBF kernel, dense Gram matrices, and the nearest-neighbor bandwidth rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RbfKernel:
    """k(x, z) = exp(-||x - z||^2 / (2 sigma^2)); bounded by kappa^2 = 1."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def eval(self, x: np.ndarray, z: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        z = np.asarray(z, dtype=np.float64)
        if x.shape != z.shape:
            raise ValueError("kernel arguments must share dimension")
        d2 = float(np.sum((x - z) ** 2))
        return float(np.exp(-d2 / (2.0 * self.sigma**2)))

    def gram(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Gram matrix (|a| x |b|); symmetric PSD with unit diagonal when a is b."""
        a = np.atleast_2d(np.asarray(a, dtype=np.float64))
        b = np.atleast_2d(np.asarray(b, dtype=np.float64))
        if a.shape[1] != b.shape[1]:
            raise ValueError("point sets must share dimension")
        sq = (
            np.sum(a**2, axis=1)[:, None]
            + np.sum(b**2, axis=1)[None, :]
            - 2.0 * (a @ b.T)
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-sq / (2.0 * self.sigma**2))


def squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    sq = (
        np.sum(a**2, axis=1)[:, None]
        + np.sum(b**2, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return sq


def bandwidth_heuristic(instances: np.ndarray, k_nn: int = 50) -> float:
    """Mean distance from each point to its k-th nearest neighbor.

    k falls back to count-1 when fewer points are available.  All-identical
    point sets have no usable scale and raise.
    """
    X = np.atleast_2d(np.asarray(instances, dtype=np.float64))
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least 2 instances")
    if k_nn < 1:
        raise ValueError("k_nn must be >= 1")
    k = min(k_nn, n - 1)
    d2 = squared_distances(X, X)
    np.fill_diagonal(d2, np.inf)
    kth = np.partition(d2, k - 1, axis=1)[:, k - 1]
    sigma = float(np.mean(np.sqrt(kth)))
    if sigma <= 0.0:
        raise ValueError("all instances identical; bandwidth undefined")
    return sigma
