"""Shared domain types: labeled datasets, feature maps, losses, rules.

Labels are 1-based (1..k).  Feature vectors for a pair (x, y) follow a
one-hot block layout: the instance features psi(x) occupy the block of
class y and every other block is zero, so the full dimension is
k * len(psi(x)).  Both instance maps append a constant 1 so classifiers
carry a per-class intercept.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

# -log of a zero probability saturates here instead of propagating inf
LOG_LOSS_CAP = 1e6


class Loss(enum.Enum):
    ZERO_ONE = "zero-one"
    LOG = "log"


class MapKind(enum.Enum):
    IDENTITY = "identity-one-hot"
    QUADRATIC = "quadratic-one-hot"


@dataclass(frozen=True)
class LabeledSample:
    x: np.ndarray
    y: int

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        if x.ndim != 1 or not np.all(np.isfinite(x)):
            raise ValueError("sample vector must be 1-d and finite")
        object.__setattr__(self, "x", x)
        if int(self.y) < 1:
            raise ValueError(f"label must be >= 1, got {self.y}")
        object.__setattr__(self, "y", int(self.y))


@dataclass(frozen=True)
class FeatureMap:
    kind: MapKind
    dim_instance: int
    n_classes: int

    def __post_init__(self):
        if self.dim_instance < 0 or self.n_classes < 2:
            raise ValueError("need dim_instance >= 0 and n_classes >= 2")

    @property
    def instance_dim(self) -> int:
        """Length of psi(x) including the trailing constant."""
        d = self.dim_instance
        if self.kind is MapKind.IDENTITY:
            return d + 1
        return d + d * (d + 1) // 2 + 1

    @property
    def dim(self) -> int:
        """Full one-hot feature dimension m."""
        return self.n_classes * self.instance_dim

    def instance_features(self, X: np.ndarray) -> np.ndarray:
        """psi(x) rows for a matrix of instances (n, d) -> (n, instance_dim)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim_instance:
            raise ValueError(
                f"instances have dimension {X.shape[1]}, map expects {self.dim_instance}"
            )
        cols = [X]
        if self.kind is MapKind.QUADRATIC:
            d = self.dim_instance
            prods = [X[:, i] * X[:, j] for i in range(d) for j in range(i, d)]
            if prods:
                cols.append(np.stack(prods, axis=1))
        cols.append(np.ones((X.shape[0], 1)))
        return np.concatenate(cols, axis=1)


def feature(fmap: FeatureMap, x: np.ndarray, y: int) -> np.ndarray:
    """One-hot block feature vector for (x, y); zero outside block y."""
    if not 1 <= y <= fmap.n_classes:
        raise ValueError(f"label {y} outside 1..{fmap.n_classes}")
    psi = fmap.instance_features(np.asarray(x, dtype=np.float64)[None, :])[0]
    out = np.zeros(fmap.dim)
    p = fmap.instance_dim
    out[(y - 1) * p : y * p] = psi
    return out


def loss(kind: Loss, rule_probs: np.ndarray, y: int) -> float:
    """Classification loss of a probabilistic rule at label y."""
    p = np.asarray(rule_probs, dtype=np.float64)
    if p.ndim != 1 or np.any(p < -1e-9) or abs(p.sum() - 1.0) > 1e-6:
        raise ValueError("rule_probs must be a probability vector")
    if not 1 <= y <= p.size:
        raise ValueError(f"label {y} outside 1..{p.size}")
    py = float(p[y - 1])
    if kind is Loss.ZERO_ONE:
        return 1.0 - py
    if py <= 0.0:
        return LOG_LOSS_CAP
    return min(-np.log(py), LOG_LOSS_CAP)


def error_rate(predictions, truth) -> float:
    """Fraction of mismatched labels."""
    pred = np.asarray(predictions)
    true = np.asarray(truth)
    if pred.shape != true.shape or pred.size == 0:
        raise ValueError("predictions and truth must have equal nonzero length")
    return float(np.mean(pred != true))


@dataclass
class Dataset:
    """Training samples plus testing instances (labels held out for evaluation)."""

    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: Optional[np.ndarray] = None
    n_classes: int = 2

    def __post_init__(self):
        self.train_x = np.asarray(self.train_x, dtype=np.float64)
        self.train_y = np.asarray(self.train_y, dtype=np.int64)
        self.test_x = np.asarray(self.test_x, dtype=np.float64)
        if self.test_y is not None:
            self.test_y = np.asarray(self.test_y, dtype=np.int64)
        if self.train_x.ndim != 2 or self.train_x.shape[0] < 1:
            raise ValueError("train_x must be a nonempty (n, d) matrix")
        if self.test_x.ndim != 2 or self.test_x.shape[1] != self.train_x.shape[1]:
            raise ValueError("test_x must be (t, d) with d matching train_x")
        if not np.all(np.isfinite(self.train_x)) or not np.all(np.isfinite(self.test_x)):
            raise ValueError("instances must be finite")
        for arr in (self.train_y,) + ((self.test_y,) if self.test_y is not None else ()):
            if np.any(arr < 1) or np.any(arr > self.n_classes):
                raise ValueError(f"labels must lie in 1..{self.n_classes}")
        if self.train_y.shape[0] != self.train_x.shape[0]:
            raise ValueError("train_y length must match train_x")

    @property
    def n(self) -> int:
        return self.train_x.shape[0]

    @property
    def t(self) -> int:
        return self.test_x.shape[0]

    @property
    def dim(self) -> int:
        return self.train_x.shape[1]

    @classmethod
    def from_samples(cls, train, test_instances, test_labels=None, n_classes=None):
        train_x = np.stack([s.x for s in train])
        train_y = np.array([s.y for s in train], dtype=np.int64)
        test_x = np.atleast_2d(np.asarray(test_instances, dtype=np.float64))
        if n_classes is None:
            labels = train_y if test_labels is None else np.concatenate(
                [train_y, np.asarray(test_labels, dtype=np.int64)]
            )
            n_classes = int(labels.max())
        return cls(train_x, train_y, test_x, test_labels, n_classes)


@dataclass(frozen=True)
class Rule:
    """Probabilistic classification rule h(y | x, alpha)."""

    probs: Callable[[np.ndarray, float], np.ndarray]
    n_classes: int = field(default=2)

    def __call__(self, x: np.ndarray, alpha_x: float) -> np.ndarray:
        return self.probs(np.asarray(x, dtype=np.float64), float(alpha_x))
