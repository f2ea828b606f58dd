"""Training/testing weight estimation.

Closed-form double weights from known marginals, the joint mean-matching
QP over (beta, alpha), conventional KMM as its alpha-pinned special case,
and the single-weight baselines (reweighted, robust, flattening,
discriminative density-ratio estimation).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .kernel import RbfKernel
from .solvers import QpProblem, QpSettings, solve_qp

ROBUST_ALPHA_CAP = 1e6
DEFAULT_RATIO_CAP = 1000.0


@dataclass
class MarginalModel:
    """Marginal instance densities for train and test.

    Densities only enter through their ratio, so discriminatively estimated
    surrogates (any positive functions with the right ratio) are accepted.
    """

    train_density: Callable[[np.ndarray], np.ndarray]
    test_density: Callable[[np.ndarray], np.ndarray]
    ratio_cap: float = DEFAULT_RATIO_CAP

    def densities(self, X: np.ndarray):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        ptr = np.asarray(self.train_density(X), dtype=np.float64).ravel()
        pte = np.asarray(self.test_density(X), dtype=np.float64).ravel()
        if np.any(ptr < 0) or np.any(pte < 0):
            raise ValueError("densities must be nonnegative")
        return ptr, pte

    def ratio(self, X: np.ndarray) -> np.ndarray:
        """p_te / p_tr, capped; zero train density maps to the cap."""
        ptr, pte = self.densities(X)
        out = np.full(ptr.shape, self.ratio_cap)
        ok = ptr > 0
        out[ok] = np.minimum(pte[ok] / ptr[ok], self.ratio_cap)
        out[(~ok) & (pte == 0)] = 1.0  # both supports vanish: neutral
        return out

    def inverse_ratio(self, X: np.ndarray) -> np.ndarray:
        """p_tr / p_te, capped at the robust baseline ceiling."""
        ptr, pte = self.densities(X)
        out = np.full(ptr.shape, ROBUST_ALPHA_CAP)
        ok = pte > 0
        out[ok] = np.minimum(ptr[ok] / pte[ok], ROBUST_ALPHA_CAP)
        out[(~ok) & (ptr == 0)] = 1.0
        return out

    def ratio_sup(self, sample: np.ndarray) -> float:
        """B estimated as the max density ratio over a dense sample, capped."""
        return float(np.max(self.ratio(sample)))


@dataclass
class WeightPair:
    """Per-training-sample beta and per-testing-instance alpha weights."""

    beta: np.ndarray
    alpha: np.ndarray
    D: float = 1.0
    B: float = DEFAULT_RATIO_CAP
    alpha_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    unbounded_alpha: bool = False  # robust baseline exemption from alpha <= 1

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=np.float64).ravel()
        self.alpha = np.asarray(self.alpha, dtype=np.float64).ravel()
        if self.D < 1.0 - 1e-12:
            raise ValueError("D must be >= 1")
        if self.B <= 0:
            raise ValueError("B must be positive")
        cap = self.B / np.sqrt(self.D) + 1e-6
        if np.any(self.beta < -1e-9) or np.any(self.beta > cap):
            raise ValueError("beta outside [0, B/sqrt(D)]")
        if np.any(self.alpha < -1e-9):
            raise ValueError("alpha must be nonnegative")
        if not self.unbounded_alpha and np.any(self.alpha > 1.0 + 1e-9):
            raise ValueError("alpha must not exceed 1")


# ---------------------------------------------------------------------------
# Closed-form weights from known marginals
# ---------------------------------------------------------------------------


def exact_double_weights(
    marginals: MarginalModel,
    C: float,
    train_x: np.ndarray,
    test_x: np.ndarray,
    B: Optional[float] = None,
) -> WeightPair:
    """beta = min(ratio, C), alpha = min(C/ratio, 1); alpha*p_te == beta*p_tr.

    B defaults to the marginals' capped ratio supremum over the supplied
    points; pass the analytic value when it is known.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    train_x = np.atleast_2d(train_x)
    test_x = np.atleast_2d(test_x)
    if B is None:
        B = marginals.ratio_sup(np.concatenate([train_x, test_x], axis=0))
    B = max(float(B), 1e-12)

    def alpha_fn(X):
        ptr, pte = marginals.densities(X)
        a = np.zeros(ptr.shape)
        ok = pte > 0
        a[ok] = np.minimum(C * ptr[ok] / pte[ok], 1.0)
        return a

    def beta_fn(X):
        ptr, pte = marginals.densities(X)
        b = np.full(ptr.shape, float(C))  # outside-training-support clip
        ok = ptr > 0
        b[ok] = np.minimum(pte[ok] / ptr[ok], C)
        return b

    d_eff = (B / min(C, B)) ** 2
    return WeightPair(
        beta=beta_fn(train_x),
        alpha=alpha_fn(test_x),
        D=d_eff,
        B=B,
        alpha_fn=alpha_fn,
    )


def reweighted_weights(marginals: MarginalModel, train_x, test_x, B: Optional[float] = None) -> WeightPair:
    """Classic importance weighting: beta = density ratio, alpha = 1."""
    train_x = np.atleast_2d(train_x)
    test_x = np.atleast_2d(test_x)
    if B is None:
        B = marginals.ratio_sup(np.concatenate([train_x, test_x], axis=0))
    beta = np.minimum(marginals.ratio(train_x), B)
    pair = exact_double_weights(marginals, C=float(B), train_x=train_x, test_x=test_x, B=B)
    return WeightPair(beta=beta, alpha=np.ones(test_x.shape[0]), D=1.0, B=float(B), alpha_fn=pair.alpha_fn)


def robust_weights(marginals: MarginalModel, train_x, test_x) -> WeightPair:
    """Robust baseline: beta = 1, alpha = inverse ratio (may exceed 1)."""
    train_x = np.atleast_2d(train_x)
    test_x = np.atleast_2d(test_x)
    alpha = marginals.inverse_ratio(test_x)
    return WeightPair(
        beta=np.ones(train_x.shape[0]),
        alpha=alpha,
        D=1.0,
        B=max(1.0, DEFAULT_RATIO_CAP),
        alpha_fn=lambda X: marginals.inverse_ratio(X),
        unbounded_alpha=True,
    )


def flattening_weights(
    marginals: MarginalModel,
    gamma: float,
    variant: str,
    train_x,
    test_x=None,
    B: Optional[float] = None,
) -> WeightPair:
    """Smoothed importance weights; `variant` is "power" or "mixture"."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    train_x = np.atleast_2d(train_x)
    pts = train_x if test_x is None else np.concatenate([train_x, np.atleast_2d(test_x)], axis=0)
    if B is None:
        B = marginals.ratio_sup(pts)
    if variant == "power":
        beta = marginals.ratio(train_x) ** gamma
    elif variant == "mixture":
        ptr, pte = marginals.densities(train_x)
        denom = gamma * pte + (1.0 - gamma) * ptr
        beta = np.where(denom > 0, pte / np.where(denom > 0, denom, 1.0), 0.0)
    else:
        raise ValueError(f"unknown flattening variant {variant!r}")
    beta = np.minimum(beta, B)
    t = 1 if test_x is None else np.atleast_2d(test_x).shape[0]
    return WeightPair(beta=beta, alpha=np.ones(t), D=1.0, B=float(max(B, 1.0)))


# ---------------------------------------------------------------------------
# Discriminative density-ratio estimation
# ---------------------------------------------------------------------------


def classifier_ratio_model(
    train_x: np.ndarray,
    test_x: np.ndarray,
    cap: float = DEFAULT_RATIO_CAP,
    l2: float = 1e-2,
) -> MarginalModel:
    """Density-ratio surrogate from a regularized logistic discriminator.

    A logistic model separates training (class 0) from testing (class 1)
    instances; posterior odds corrected by the class sizes give the
    density ratio, exposed through pseudo-densities whose quotient is it.
    """
    train_x = np.atleast_2d(np.asarray(train_x, dtype=np.float64))
    test_x = np.atleast_2d(np.asarray(test_x, dtype=np.float64))
    n, t = train_x.shape[0], test_x.shape[0]
    if n < 2 or t < 2:
        raise ValueError("need at least 2 instances on each side")
    X = np.concatenate([train_x, test_x], axis=0)
    z = np.concatenate([np.zeros(n), np.ones(t)])
    Xb = np.concatenate([X, np.ones((X.shape[0], 1))], axis=1)

    def objective(w):
        logits = Xb @ w
        # log(1 + exp(x)) with the stable branch split
        softplus = np.where(logits > 0, logits + np.log1p(np.exp(-logits)), np.log1p(np.exp(logits)))
        val = float(np.sum(softplus - z * logits)) + 0.5 * l2 * float(w[:-1] @ w[:-1])
        q = 1.0 / (1.0 + np.exp(-np.clip(logits, -500, 500)))
        grad = Xb.T @ (q - z)
        grad[:-1] += l2 * w[:-1]
        return val, grad

    res = _scipy_minimize(objective, np.zeros(Xb.shape[1]), jac=True, method="L-BFGS-B")
    w = res.x

    def posterior(X_):
        X_ = np.atleast_2d(np.asarray(X_, dtype=np.float64))
        logits = np.concatenate([X_, np.ones((X_.shape[0], 1))], axis=1) @ w
        return 1.0 / (1.0 + np.exp(-np.clip(logits, -500, 500)))

    eps = 1e-12
    return MarginalModel(
        train_density=lambda X_: (1.0 - posterior(X_)) * (t / (n + t)) + eps,
        test_density=lambda X_: posterior(X_) * (n / (n + t)) + eps,
        ratio_cap=cap,
    )


def classifier_ratio_weights(train_x, test_x, cap: float = DEFAULT_RATIO_CAP) -> WeightPair:
    """Reweighted-style pair with discriminatively estimated beta."""
    model = classifier_ratio_model(train_x, test_x, cap=cap)
    beta = np.minimum(model.ratio(np.atleast_2d(train_x)), cap)
    return WeightPair(
        beta=beta,
        alpha=np.ones(np.atleast_2d(test_x).shape[0]),
        D=1.0,
        B=cap,
        alpha_fn=lambda X: np.ones(np.atleast_2d(X).shape[0]),
    )


# ---------------------------------------------------------------------------
# Mean matching in the RKHS
# ---------------------------------------------------------------------------


@dataclass
class DwKmmConfig:
    kernel: RbfKernel
    D: float = 1.0
    B: float = DEFAULT_RATIO_CAP
    epsilon: Optional[float] = None  # default (B/sqrt(D))/sqrt(n)
    qp: QpSettings = field(default_factory=lambda: QpSettings(tol=1e-9, max_iter=60000))

    def __post_init__(self):
        if self.D < 1.0:
            raise ValueError("D must be >= 1")
        if self.B <= 0:
            raise ValueError("B must be positive")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")


def _joint_gram(kernel: RbfKernel, train_x, test_x):
    pts = np.concatenate([np.atleast_2d(train_x), np.atleast_2d(test_x)], axis=0)
    return kernel.gram(pts, pts)


def _dw_kmm_problem(train_x, test_x, cfg: DwKmmConfig):
    train_x = np.atleast_2d(train_x)
    test_x = np.atleast_2d(test_x)
    n, t = train_x.shape[0], test_x.shape[0]
    K = _joint_gram(cfg.kernel, train_x, test_x)
    scale = np.concatenate([np.full(n, 1.0 / n), np.full(t, -1.0 / t)])
    H = 2.0 * (K * np.outer(scale, scale))
    box_hi = np.concatenate([np.full(n, cfg.B / np.sqrt(cfg.D)), np.ones(t)])
    eps = cfg.epsilon if cfg.epsilon is not None else (cfg.B / np.sqrt(cfg.D)) / np.sqrt(n)
    mean_vec = np.concatenate([np.full(n, 1.0 / n), np.full(t, -1.0 / t)])
    radius = (1.0 - 1.0 / np.sqrt(cfg.D)) * np.sqrt(t)
    problem = QpProblem(
        hessian=H,
        linear=np.zeros(n + t),
        lower=np.zeros(n + t),
        upper=box_hi,
        slabs=[(mean_vec, 0.0, float(eps))],
        ball=(np.ones(t), float(radius), np.arange(n, n + t)),
    )
    return problem, n, t


def dw_kmm(train_x, test_x, cfg: DwKmmConfig) -> WeightPair:
    """Joint (beta, alpha) minimizing the RKHS mean discrepancy under the
    box, mean-slack, and alpha-ball constraints."""
    problem, n, t = _dw_kmm_problem(train_x, test_x, cfg)
    result = solve_qp(problem, cfg.qp)
    z = result.z
    beta = np.clip(z[:n], 0.0, cfg.B / np.sqrt(cfg.D))
    alpha = np.clip(z[n:], 0.0, 1.0)
    return WeightPair(beta=beta, alpha=alpha, D=cfg.D, B=cfg.B)


def dw_kmm_detailed(train_x, test_x, cfg: DwKmmConfig):
    """dw_kmm plus the raw QP result, for constraint and KKT inspection."""
    problem, n, t = _dw_kmm_problem(train_x, test_x, cfg)
    result = solve_qp(problem, cfg.qp)
    z = result.z
    pair = WeightPair(
        beta=np.clip(z[:n], 0.0, cfg.B / np.sqrt(cfg.D)),
        alpha=np.clip(z[n:], 0.0, 1.0),
        D=cfg.D,
        B=cfg.B,
    )
    return pair, result, problem


def kmm(train_x, test_x, cfg: DwKmmConfig) -> WeightPair:
    """Conventional mean matching: beta only, testing weights pinned to 1.

    Assembled as the reduced QP in beta (the alpha block eliminated at 1),
    independently of the joint formulation.
    """
    train_x = np.atleast_2d(train_x)
    test_x = np.atleast_2d(test_x)
    n, t = train_x.shape[0], test_x.shape[0]
    k_tr = cfg.kernel.gram(train_x, train_x)
    k_cross = cfg.kernel.gram(train_x, test_x)
    H = 2.0 * k_tr / (n * n)
    c = -2.0 * (k_cross @ np.ones(t)) / (n * t)
    box_hi = np.full(n, cfg.B)  # conventional box: D plays no role here
    eps = cfg.epsilon if cfg.epsilon is not None else cfg.B / np.sqrt(n)
    problem = QpProblem(
        hessian=H,
        linear=c,
        lower=np.zeros(n),
        upper=box_hi,
        slabs=[(np.full(n, 1.0 / n), 1.0, float(eps))],
    )
    result = solve_qp(problem, cfg.qp)
    beta = np.clip(result.z, 0.0, cfg.B)
    return WeightPair(beta=beta, alpha=np.ones(t), D=1.0, B=cfg.B)


def rkhs_discrepancy(pair: WeightPair, train_x, test_x, kernel: RbfKernel) -> float:
    """|| (1/n) sum beta_i K(x_i) - (1/t) sum alpha_j K(x_{n+j}) ||_H."""
    train_x = np.atleast_2d(train_x)
    test_x = np.atleast_2d(test_x)
    n, t = train_x.shape[0], test_x.shape[0]
    if pair.beta.size != n or pair.alpha.size != t:
        raise ValueError("weight pair does not match the data sizes")
    K = _joint_gram(kernel, train_x, test_x)
    u = np.concatenate([pair.beta / n, -pair.alpha / t])
    val = float(u @ K @ u)
    return float(np.sqrt(max(val, 0.0)))
