"""Covariate-shift scenario construction.

Synthetic two-Gaussian mixtures with exactly known marginals, biased
median-split resampling of labeled pools, CSV ingestion, normalization,
a power-iteration first principal component, and Pearson feature ranking.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .core import Dataset, LabeledSample
from .rng import Stream
from .weights import MarginalModel

MIX_MEAN_1 = np.array([-1.5, 0.0])
MIX_MEAN_2 = np.array([1.5, 0.0])
MIX_VAR = 0.25  # isotropic component covariance (1/4) I


class InsufficientData(Exception):
    pass


@dataclass
class SyntheticConfig:
    delta: float
    n: int = 100
    t: int = 100
    seed: int = 0
    no_shift: bool = False  # equal 50/50 mixtures on both sides

    def __post_init__(self):
        if not 0.0 < self.delta <= 0.5:
            raise ValueError("delta must lie in (0, 0.5]")
        if self.n < 1 or self.t < 1:
            raise ValueError("need n, t >= 1")

    @property
    def train_weights(self) -> Tuple[float, float]:
        if self.no_shift:
            return 0.5, 0.5
        return 0.5 - self.delta, 0.5 + self.delta

    @property
    def test_weights(self) -> Tuple[float, float]:
        if self.no_shift:
            return 0.5, 0.5
        return 1.0 - self.delta, self.delta


@dataclass
class BiasedSamplingConfig:
    axis: str  # "feature" or "pca1"
    delta_tr: float
    delta_te: float
    n: int
    t: int
    seed: int = 0
    feature_index: int = 0  # used when axis == "feature"

    def __post_init__(self):
        if self.axis not in ("feature", "pca1"):
            raise ValueError("axis must be 'feature' or 'pca1'")
        for p in (self.delta_tr, self.delta_te):
            if not 0.0 < p <= 1.0:
                raise ValueError("acceptance probabilities must lie in (0, 1]")


@dataclass
class ShiftScenario:
    dataset: Dataset
    marginals: Optional[MarginalModel] = None
    provenance: dict = field(default_factory=dict)
    test_sampler: Optional[Callable[[int], Tuple[np.ndarray, np.ndarray]]] = None


# ---------------------------------------------------------------------------
# Synthetic mixtures
# ---------------------------------------------------------------------------


def _gauss_pdf(X, mean):
    X = np.atleast_2d(X)
    d2 = np.sum((X - mean[None, :]) ** 2, axis=1)
    norm = 1.0 / (2.0 * np.pi * MIX_VAR)
    return norm * np.exp(-d2 / (2.0 * MIX_VAR))


def synthetic_marginals(cfg: SyntheticConfig, ratio_cap: float = 1000.0) -> MarginalModel:
    w_tr = cfg.train_weights
    w_te = cfg.test_weights
    return MarginalModel(
        train_density=lambda X: w_tr[0] * _gauss_pdf(X, MIX_MEAN_1) + w_tr[1] * _gauss_pdf(X, MIX_MEAN_2),
        test_density=lambda X: w_te[0] * _gauss_pdf(X, MIX_MEAN_1) + w_te[1] * _gauss_pdf(X, MIX_MEAN_2),
        ratio_cap=ratio_cap,
    )


def synthetic_labels(X) -> np.ndarray:
    """Deterministic labels: 1 when the coordinate product is nonnegative."""
    X = np.atleast_2d(X)
    return np.where(X[:, 0] * X[:, 1] >= 0.0, 1, 2).astype(np.int64)


def _sample_mixture(stream: Stream, weights, size: int) -> np.ndarray:
    comp2 = stream.uniform(size) < weights[1]
    z = stream.normal(2 * size).reshape(size, 2) * np.sqrt(MIX_VAR)
    means = np.where(comp2[:, None], MIX_MEAN_2[None, :], MIX_MEAN_1[None, :])
    return z + means


def ratio_sup_grid(marginals: MarginalModel, extent: float = 5.0, resolution: int = 201) -> float:
    """Supremum of the density ratio over a dense square grid."""
    g = np.linspace(-extent, extent, resolution)
    xx, yy = np.meshgrid(g, g)
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
    return marginals.ratio_sup(pts)


def gen_synthetic(cfg: SyntheticConfig) -> ShiftScenario:
    """Training and testing draws with the exact marginal model attached."""
    stream = Stream(cfg.seed)
    train_x = _sample_mixture(stream.child("train"), cfg.train_weights, cfg.n)
    test_x = _sample_mixture(stream.child("test"), cfg.test_weights, cfg.t)
    ds = Dataset(
        train_x=train_x,
        train_y=synthetic_labels(train_x),
        test_x=test_x,
        test_y=synthetic_labels(test_x),
        n_classes=2,
    )
    marginals = synthetic_marginals(cfg)

    def test_sampler(size: int, _state={"count": 0}):
        sub = stream.child(f"mc-{_state['count']}")
        _state["count"] += 1
        X = _sample_mixture(sub, cfg.test_weights, size)
        return X, synthetic_labels(X)

    return ShiftScenario(
        dataset=ds,
        marginals=marginals,
        provenance={"kind": "synthetic", "delta": cfg.delta, "n": cfg.n, "t": cfg.t, "seed": cfg.seed,
                    "no_shift": cfg.no_shift},
        test_sampler=test_sampler,
    )


# ---------------------------------------------------------------------------
# Biased median-split resampling
# ---------------------------------------------------------------------------


def biased_split(pool_x, pool_y, cfg: BiasedSamplingConfig) -> ShiftScenario:
    """Accept/reject resampling around the pool median of a shift axis.

    Items above the median enter training with probability delta_tr and
    testing with delta_te (below-median complements).  Draws cycle over the
    not-yet-selected pool, so quotas are met whenever enough eligible items
    exist; train and test index sets are disjoint.
    """
    pool_x = np.atleast_2d(np.asarray(pool_x, dtype=np.float64))
    pool_y = np.asarray(pool_y, dtype=np.int64).ravel()
    size = pool_x.shape[0]
    if cfg.n + cfg.t > size:
        raise InsufficientData(f"pool of {size} cannot supply n+t={cfg.n + cfg.t}")
    if cfg.axis == "feature":
        axis_vals = pool_x[:, cfg.feature_index]
    else:
        direction = pca_first_component(pool_x)
        centered = pool_x - pool_x.mean(axis=0)
        axis_vals = centered @ direction
    above = axis_vals > np.median(axis_vals)

    stream = Stream(cfg.seed)

    def accept_probs(delta):
        return np.where(above, delta, 1.0 - delta)

    def drawn(avail_mask, count, delta, tag):
        probs = accept_probs(delta)
        # degenerate probabilities make part of the pool permanently ineligible
        eligible = avail_mask & (probs > 0.0)
        if int(eligible.sum()) < count:
            raise InsufficientData(
                f"only {int(eligible.sum())} eligible items for {count} requested ({tag})"
            )
        chosen = []
        sub = stream.child(tag)
        avail = avail_mask.copy()
        while len(chosen) < count:
            candidates = np.flatnonzero(avail & (probs > 0.0))
            pick = candidates[int(sub.integers(0, candidates.size, 1)[0])]
            if sub.uniform(1)[0] < probs[pick]:
                chosen.append(int(pick))
                avail[pick] = False
        return np.asarray(chosen, dtype=np.int64), avail

    avail = np.ones(size, dtype=bool)
    train_idx, avail = drawn(avail, cfg.n, cfg.delta_tr, "train")
    test_idx, _ = drawn(avail, cfg.t, cfg.delta_te, "test")

    ds = Dataset(
        train_x=pool_x[train_idx],
        train_y=pool_y[train_idx],
        test_x=pool_x[test_idx],
        test_y=pool_y[test_idx],
        n_classes=int(pool_y.max()),
    )
    return ShiftScenario(
        dataset=ds,
        provenance={
            "kind": "biased-sampling",
            "axis": cfg.axis,
            "feature_index": cfg.feature_index,
            "delta_tr": cfg.delta_tr,
            "delta_te": cfg.delta_te,
            "n": cfg.n,
            "t": cfg.t,
            "seed": cfg.seed,
            "train_idx": train_idx.tolist(),
            "test_idx": test_idx.tolist(),
        },
    )


# ---------------------------------------------------------------------------
# CSV ingestion and feature utilities
# ---------------------------------------------------------------------------


def load_csv(path: str, label_column: str) -> List[LabeledSample]:
    """Read a header-ful CSV into labeled samples.

    Raw label values are mapped to 1..k by sorted order.  Missing or
    unparsable cells raise with row/column diagnostics.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ValueError(f"{path}: label column {label_column!r} not in header {header}")
        label_pos = header.index(label_column)
        feature_pos = [i for i in range(len(header)) if i != label_pos]
        rows = []
        raw_labels = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}")
            vals = []
            for i in feature_pos:
                cell = row[i].strip()
                if cell == "":
                    raise ValueError(f"{path}:{line_no}: missing value in column {header[i]!r}")
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}:{line_no}: cannot parse {cell!r} in column {header[i]!r}"
                    ) from None
            cell = row[label_pos].strip()
            if cell == "":
                raise ValueError(f"{path}:{line_no}: missing label")
            rows.append(vals)
            raw_labels.append(cell)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    uniq = sorted(set(raw_labels), key=lambda v: (len(v), v))
    mapping = {v: i + 1 for i, v in enumerate(uniq)}
    return [LabeledSample(x=np.asarray(v), y=mapping[lbl]) for v, lbl in zip(rows, raw_labels)]


def samples_to_arrays(samples: List[LabeledSample]):
    X = np.stack([s.x for s in samples])
    y = np.array([s.y for s in samples], dtype=np.int64)
    return X, y


def normalize(X) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Zero-mean unit-variance per coordinate.

    Coordinates with zero spread are left unscaled; the returned std keeps
    the 0 entry as the flag for that condition.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    scale = np.where(std > 0, std, 1.0)
    return (X - mean) / scale, mean, std


def pca_first_component(X, tol: float = 1e-9, max_iter: int = 10000) -> np.ndarray:
    """First principal component by power iteration on the covariance.

    The sign is fixed so the largest-magnitude entry is positive.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Xc = X - X.mean(axis=0)
    cov = (Xc.T @ Xc) / max(X.shape[0] - 1, 1)
    d = cov.shape[0]
    v = np.ones(d) / np.sqrt(d)
    for _ in range(max_iter):
        w = cov @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            break
        w /= norm
        if float(np.linalg.norm(w - v)) < tol:
            v = w
            break
        v = w
    lead = int(np.argmax(np.abs(v)))
    if v[lead] < 0:
        v = -v
    return v


def pearson_select(X, y, top_k: int) -> np.ndarray:
    """Indices of the features most correlated (absolutely) with the labels."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    num = Xc.T @ yc
    denom = np.sqrt(np.sum(Xc**2, axis=0) * np.sum(yc**2))
    corr = np.zeros(X.shape[1])
    ok = denom > 0
    corr[ok] = np.abs(num[ok] / denom[ok])
    order = np.lexsort((np.arange(X.shape[1]), -corr))
    return order[: min(top_k, X.shape[1])]


# ---------------------------------------------------------------------------
# Locally generatable benchmark distribution
# ---------------------------------------------------------------------------


def make_ringnorm(n_samples: int, seed: int, dim: int = 20):
    """Breiman's ringnorm draw: class 1 ~ N(0, 4I), class 2 ~ N(a 1, I),
    a = 2/sqrt(dim), classes balanced by a fair coin."""
    stream = Stream(seed)
    cls2 = stream.uniform(n_samples) < 0.5
    z = stream.normal(n_samples * dim).reshape(n_samples, dim)
    a = 2.0 / np.sqrt(dim)
    X = np.where(cls2[:, None], z + a, 2.0 * z)
    y = np.where(cls2, 2, 1).astype(np.int64)
    return X, y
