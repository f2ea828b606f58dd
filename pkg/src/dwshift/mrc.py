"""Minimax-risk classifiers with double weighting.

Learning minimizes, over the parameter vector, the worst-case expected
loss against distributions whose alpha-weighted feature expectation lies
within a componentwise radius of the beta-weighted training feature mean.
The per-instance worst-case term is a prefix maximum over sorted class
scores for 0-1 loss and a log-sum-exp for log loss.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .core import FeatureMap, Loss, MapKind, Rule
from .solvers import SubgradSettings, minimize_subgradient, simplex_standard
from .weights import MarginalModel, WeightPair, exact_double_weights


@dataclass
class UncertaintySpec:
    """Feature-mean box defining the adversary's feasible set."""

    feature_mean: np.ndarray  # beta-weighted empirical mean, length m
    radius: np.ndarray  # componentwise confidence radius, length m
    alpha_values: np.ndarray  # testing weight per test instance
    feature_map: FeatureMap

    def __post_init__(self):
        self.feature_mean = np.asarray(self.feature_mean, dtype=np.float64).ravel()
        self.radius = np.asarray(self.radius, dtype=np.float64).ravel()
        self.alpha_values = np.asarray(self.alpha_values, dtype=np.float64).ravel()
        m = self.feature_map.dim
        if self.feature_mean.size != m or self.radius.size != m:
            raise ValueError("feature_mean/radius must have the map dimension")
        if np.any(self.radius < -1e-12):
            raise ValueError("radius must be nonnegative")


@dataclass
class MrcModel:
    coef: np.ndarray  # length m
    loss: Loss
    minimax_risk: float
    spec: UncertaintySpec
    D: Optional[float] = None

    def coef_matrix(self) -> np.ndarray:
        """(k, p) view of the flat coefficient vector, one row per class."""
        fm = self.spec.feature_map
        return self.coef.reshape(fm.n_classes, fm.instance_dim)

    def rule(self) -> Rule:
        return Rule(
            probs=lambda x, a: predict_probs(self, x, a),
            n_classes=self.spec.feature_map.n_classes,
        )


# ---------------------------------------------------------------------------
# Worst-case per-instance loss transforms
# ---------------------------------------------------------------------------


def _class_scores(coef: np.ndarray, psi: np.ndarray, alpha: np.ndarray, fmap: FeatureMap) -> np.ndarray:
    """Matrix of alpha-weighted class scores, shape (rows of psi, k)."""
    M = coef.reshape(fmap.n_classes, fmap.instance_dim)
    return np.asarray(alpha)[:, None] * (psi @ M.T)


def _worstcase_zero_one(scores: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Values and subgradient weights of the 0-1 worst-case transform.

    For each row, the optimum over nonempty class subsets of
    (sum of member scores - 1)/|subset| is attained by a prefix of the
    descending sort; returns (phi, W) with W holding 1/L on the optimal
    prefix members (in original class order).
    """
    t, k = scores.shape
    if k == 2:
        v1, v2 = scores[:, 0], scores[:, 1]
        vmax = np.maximum(v1, v2)
        pair_avg = 0.5 * (v1 + v2) + 0.5
        singleton = vmax >= pair_avg  # prefix of length 1 wins (ties included)
        phi = np.where(singleton, vmax, pair_avg)
        first = (v1 >= v2).astype(np.float64)
        w1 = np.where(singleton, first, 0.5)
        return phi, np.stack([w1, 1.0 - w1], axis=1)
    order = np.argsort(-scores, axis=1, kind="stable")
    sorted_scores = np.take_along_axis(scores, order, axis=1)
    csum = np.cumsum(sorted_scores, axis=1)
    sizes = np.arange(1, k + 1, dtype=np.float64)
    cand = (csum - 1.0) / sizes
    best = np.argmax(cand, axis=1)
    phi = 1.0 + cand[np.arange(t), best]
    length = (best + 1).astype(np.float64)
    member = np.arange(k)[None, :] < (best + 1)[:, None]
    w_sorted = member / length[:, None]
    weights = np.zeros_like(scores)
    np.put_along_axis(weights, order, w_sorted, axis=1)
    return phi, weights


def _worstcase_log(scores: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Values and softmax weights of the log-loss worst-case transform."""
    mx = np.max(scores, axis=1, keepdims=True)
    ex = np.exp(scores - mx)
    sm = np.sum(ex, axis=1, keepdims=True)
    phi = (mx + np.log(sm)).ravel()
    return phi, ex / sm


def worstcase_zero_one(coef, x, alpha_x: float, fmap: FeatureMap) -> float:
    """0-1 worst-case term at a single instance."""
    if alpha_x < 0:
        raise ValueError("alpha must be nonnegative")
    psi = fmap.instance_features(np.asarray(x, dtype=np.float64)[None, :])
    phi, _ = _worstcase_zero_one(_class_scores(np.asarray(coef, dtype=np.float64), psi, [alpha_x], fmap))
    return float(phi[0])


def worstcase_zero_one_bruteforce(coef, x, alpha_x: float, fmap: FeatureMap) -> float:
    """Reference enumeration over all nonempty class subsets."""
    psi = fmap.instance_features(np.asarray(x, dtype=np.float64)[None, :])
    v = _class_scores(np.asarray(coef, dtype=np.float64), psi, [alpha_x], fmap)[0]
    k = fmap.n_classes
    best = -np.inf
    for size in range(1, k + 1):
        for subset in itertools.combinations(range(k), size):
            best = max(best, (sum(v[list(subset)]) - 1.0) / size)
    return 1.0 + best


def worstcase_log(coef, x, alpha_x: float, fmap: FeatureMap) -> float:
    """Log-loss worst-case term (log-sum-exp of class scores)."""
    if alpha_x < 0:
        raise ValueError("alpha must be nonnegative")
    psi = fmap.instance_features(np.asarray(x, dtype=np.float64)[None, :])
    phi, _ = _worstcase_log(_class_scores(np.asarray(coef, dtype=np.float64), psi, [alpha_x], fmap))
    return float(phi[0])


# ---------------------------------------------------------------------------
# Feature means and the confidence-radius LP
# ---------------------------------------------------------------------------


def mean_vector(train_x, train_y, beta, fmap: FeatureMap) -> np.ndarray:
    """Beta-weighted empirical mean of the one-hot features, (1/n) sum beta_i phi_i."""
    train_x = np.atleast_2d(np.asarray(train_x, dtype=np.float64))
    train_y = np.asarray(train_y, dtype=np.int64).ravel()
    beta = np.asarray(beta, dtype=np.float64).ravel()
    n = train_x.shape[0]
    if beta.size != n or train_y.size != n:
        raise ValueError("beta/train_y length must match the training set")
    psi = fmap.instance_features(train_x)
    p, k = fmap.instance_dim, fmap.n_classes
    tau = np.zeros((k, p))
    for y in range(1, k + 1):
        mask = train_y == y
        if np.any(mask):
            tau[y - 1] = beta[mask] @ psi[mask]
    return tau.ravel() / n


def _alpha_feature_columns(psi: np.ndarray, alpha: np.ndarray, fmap: FeatureMap) -> np.ndarray:
    """Matrix (m, t*k) whose column (j, y) is alpha_j * phi(x_j, y)."""
    t = psi.shape[0]
    p, k = fmap.instance_dim, fmap.n_classes
    A = np.zeros((k * p, t * k))
    scaled = alpha[:, None] * psi
    for y in range(k):
        A[y * p : (y + 1) * p, y::k] = scaled.T
    return A


def radius_lp(A: np.ndarray, feature_mean: np.ndarray, masses: np.ndarray, k: int) -> np.ndarray:
    """Componentwise-minimal-sum radius LP over label masses.

    Minimizes the total radius subject to |A p - feature_mean| <= radius
    with p >= 0 grouped per instance into blocks of k summing to the given
    masses.  Solved in standard form from a crafted feasible basis (all
    mass on the first label, radius = |residual|), which skips phase one.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    feature_mean = np.asarray(feature_mean, dtype=np.float64).ravel()
    masses = np.asarray(masses, dtype=np.float64).ravel()
    m, n_p = A.shape
    t = masses.size
    if n_p != t * k:
        raise ValueError("column count must equal instances times classes")
    n_std = n_p + 3 * m  # p, radius, slack-upper, slack-lower
    a_std = np.zeros((t + 2 * m, n_std))
    b_std = np.zeros(t + 2 * m)
    for j in range(t):
        a_std[j, j * k : (j + 1) * k] = 1.0
        b_std[j] = masses[j]
    rows_hi = slice(t, t + m)
    rows_lo = slice(t + m, t + 2 * m)
    a_std[rows_hi, :n_p] = A
    a_std[rows_lo, :n_p] = -A
    a_std[rows_hi, n_p : n_p + m] = -np.eye(m)
    a_std[rows_lo, n_p : n_p + m] = -np.eye(m)
    a_std[rows_hi, n_p + m : n_p + 2 * m] = np.eye(m)
    a_std[rows_lo, n_p + 2 * m :] = np.eye(m)
    b_std[rows_hi] = feature_mean
    b_std[rows_lo] = -feature_mean
    c = np.zeros(n_std)
    c[n_p : n_p + m] = 1.0

    p_hat = np.zeros(n_p)
    p_hat[::k] = masses
    resid = A @ p_hat - feature_mean
    basis = [j * k for j in range(t)]
    for i in range(m):
        if resid[i] > 0:
            basis.append(n_p + i)  # radius basic against the upper row
        else:
            basis.append(n_p + m + i)  # upper slack basic
    for i in range(m):
        if resid[i] > 0:
            basis.append(n_p + 2 * m + i)  # lower slack basic
        else:
            basis.append(n_p + i)
    x, _, _, _ = simplex_standard(a_std, b_std, c, basis)
    return np.maximum(x[n_p : n_p + m], 0.0)


def select_confidence_radius(
    feature_mean: np.ndarray,
    alpha_values: np.ndarray,
    test_x: np.ndarray,
    fmap: FeatureMap,
    masses: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Smallest componentwise radius making the uncertainty set attainable.

    Solves the LP over conditional label masses p(y | x_j) >= 0 summing to
    the per-instance mass (1/t by default) whose alpha-weighted feature
    combination must land within the radius box around the feature mean.
    """
    feature_mean = np.asarray(feature_mean, dtype=np.float64).ravel()
    alpha_values = np.asarray(alpha_values, dtype=np.float64).ravel()
    test_x = np.atleast_2d(np.asarray(test_x, dtype=np.float64))
    t = test_x.shape[0]
    if t < 1:
        raise ValueError("need at least one test instance")
    psi = fmap.instance_features(test_x)
    if masses is None:
        masses = np.full(t, 1.0 / t)
    A = _alpha_feature_columns(psi, alpha_values, fmap)
    return radius_lp(A, feature_mean, np.asarray(masses, dtype=np.float64), fmap.n_classes)


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------


def _objective_oracle(feature_mean, psi, alpha, masses, loss: Loss, radius, fmap: FeatureMap):
    """Oracle for -mean'coef + sum_j mass_j * worstcase_j + radius'|coef|."""
    transform = _worstcase_zero_one if loss is Loss.ZERO_ONE else _worstcase_log
    weighted_alpha = masses * alpha
    p, k = fmap.instance_dim, fmap.n_classes

    def oracle(coef):
        scores = _class_scores(coef, psi, alpha, fmap)
        phi, w = transform(scores)
        value = float(-feature_mean @ coef + masses @ phi + radius @ np.abs(coef))
        grad_blocks = psi.T @ (w * weighted_alpha[:, None])  # (p, k)
        grad = -feature_mean + grad_blocks.T.ravel() + radius * np.sign(coef)
        return value, grad

    return oracle


def fit(
    train_x,
    train_y,
    test_x,
    pair: WeightPair,
    loss: Loss,
    fmap: FeatureMap,
    settings: Optional[SubgradSettings] = None,
    radius: Optional[np.ndarray] = None,
) -> MrcModel:
    """Learn classifier parameters from weighted training/testing data.

    Computes the beta-weighted feature mean, the confidence radius (LP,
    unless an explicit radius is supplied), and minimizes the worst-case
    objective by subgradient descent from zero.
    """
    test_x = np.atleast_2d(np.asarray(test_x, dtype=np.float64))
    t = test_x.shape[0]
    if pair.alpha.size != t:
        raise ValueError("weight pair does not match the number of test instances")
    tau = mean_vector(train_x, train_y, pair.beta, fmap)
    if radius is None:
        radius = select_confidence_radius(tau, pair.alpha, test_x, fmap)
    else:
        radius = np.asarray(radius, dtype=np.float64).ravel()
    psi = fmap.instance_features(test_x)
    masses = np.full(t, 1.0 / t)
    oracle = _objective_oracle(tau, psi, pair.alpha, masses, loss, radius, fmap)
    result = minimize_subgradient(oracle, fmap.dim, settings)
    spec = UncertaintySpec(tau, radius, pair.alpha, fmap)
    return MrcModel(coef=result.x, loss=loss, minimax_risk=result.objective, spec=spec, D=pair.D)


def fit_known_marginals(
    train_x,
    train_y,
    marginals: MarginalModel,
    D: float,
    loss: Loss,
    fmap: FeatureMap,
    B: Optional[float] = None,
    settings: Optional[SubgradSettings] = None,
) -> MrcModel:
    """Variant when no testing instances exist but the marginals are known.

    Weights come from the closed form with C = B/sqrt(D); the worst-case
    expectation over the test marginal is rewritten onto the training
    instances through the density ratio.
    """
    train_x = np.atleast_2d(np.asarray(train_x, dtype=np.float64))
    if B is None:
        B = marginals.ratio_sup(train_x)
    pair = exact_double_weights(marginals, C=B / np.sqrt(D), train_x=train_x, test_x=train_x[:1], B=B)
    tau = mean_vector(train_x, train_y, pair.beta, fmap)
    ratio = marginals.ratio(train_x)
    n = train_x.shape[0]
    masses = ratio / n
    alpha_train = pair.alpha_fn(train_x)
    radius = select_confidence_radius(tau, alpha_train, train_x, fmap, masses=masses)
    psi = fmap.instance_features(train_x)
    oracle = _objective_oracle(tau, psi, alpha_train, masses, loss, radius, fmap)
    result = minimize_subgradient(oracle, fmap.dim, settings)
    spec = UncertaintySpec(tau, radius, alpha_train, fmap)
    return MrcModel(coef=result.x, loss=loss, minimax_risk=result.objective, spec=spec, D=float(D))


def empirical_objective(model: MrcModel, test_x, alpha_values=None) -> float:
    """Recompute the fitted objective value at the stored coefficients."""
    test_x = np.atleast_2d(np.asarray(test_x, dtype=np.float64))
    alpha = model.spec.alpha_values if alpha_values is None else np.asarray(alpha_values, dtype=np.float64)
    psi = model.spec.feature_map.instance_features(test_x)
    masses = np.full(test_x.shape[0], 1.0 / test_x.shape[0])
    oracle = _objective_oracle(
        model.spec.feature_mean, psi, alpha, masses, model.loss, model.spec.radius, model.spec.feature_map
    )
    value, _ = oracle(model.coef)
    return value


# ---------------------------------------------------------------------------
# Prediction
# ---------------------------------------------------------------------------


def predict_probs(model: MrcModel, x, alpha_x: float) -> np.ndarray:
    """Probabilistic rule at one instance given its testing weight."""
    if alpha_x < 0:
        raise ValueError("alpha must be nonnegative")
    fmap = model.spec.feature_map
    psi = fmap.instance_features(np.asarray(x, dtype=np.float64)[None, :])
    return predict_probs_batch(model, psi, np.asarray([alpha_x]), features_ready=True)[0]


def predict_probs_batch(model: MrcModel, X, alpha, features_ready: bool = False) -> np.ndarray:
    fmap = model.spec.feature_map
    psi = X if features_ready else fmap.instance_features(np.atleast_2d(np.asarray(X, dtype=np.float64)))
    alpha = np.asarray(alpha, dtype=np.float64).ravel()
    scores = _class_scores(model.coef, psi, alpha, fmap)
    if model.loss is Loss.ZERO_ONE:
        phi, _ = _worstcase_zero_one(scores)
        return np.maximum(scores - phi[:, None] + 1.0, 0.0)
    phi, soft = _worstcase_log(scores)
    return soft


def predict_label(model: MrcModel, x) -> int:
    """Deterministic label: class with the largest unweighted score; ties
    break toward the smallest label index.  Independent of alpha."""
    return int(predict_labels(model, np.asarray(x, dtype=np.float64)[None, :])[0])


def predict_labels(model: MrcModel, X) -> np.ndarray:
    fmap = model.spec.feature_map
    psi = fmap.instance_features(np.atleast_2d(np.asarray(X, dtype=np.float64)))
    M = model.coef_matrix()
    return np.argmax(psi @ M.T, axis=1) + 1


# ---------------------------------------------------------------------------
# Hyperparameter selection
# ---------------------------------------------------------------------------


def default_d_grid() -> np.ndarray:
    """Default grid: the D values with 1 - 1/sqrt(D) in {0, 0.1, ..., 0.9}."""
    g = np.arange(0.0, 0.91, 0.1)
    return 1.0 / (1.0 - g) ** 2


def select_D(
    train_x,
    train_y,
    test_x,
    d_grid: Sequence[float],
    loss: Loss,
    fmap: FeatureMap,
    weight_provider: Callable[[float], WeightPair],
    settings: Optional[SubgradSettings] = None,
):
    """Fit once per grid value and keep the smallest minimax risk.

    Returns (best D, per-D risk array, best model).  Ties resolve to the
    earliest grid entry for determinism.
    """
    d_grid = list(d_grid)
    if not d_grid:
        raise ValueError("D grid must be nonempty")
    risks = []
    best_model = None
    best_idx = 0
    for i, d in enumerate(d_grid):
        pair = weight_provider(float(d))
        model = fit(train_x, train_y, test_x, pair, loss, fmap, settings=settings)
        risks.append(model.minimax_risk)
        if best_model is None or model.minimax_risk < risks[best_idx] - 1e-15:
            best_model, best_idx = model, i
    return float(d_grid[best_idx]), np.asarray(risks), best_model


# ---------------------------------------------------------------------------
# Population risk estimates and bound reports
# ---------------------------------------------------------------------------


def smallest_minimax_risk(
    sampler: Callable[[int], Tuple[np.ndarray, np.ndarray]],
    alpha_fn: Callable[[np.ndarray], np.ndarray],
    loss: Loss,
    fmap: FeatureMap,
    mc_samples: int = 100_000,
    settings: Optional[SubgradSettings] = None,
    return_coef: bool = False,
):
    """Monte Carlo estimate of the zero-radius minimax risk with exact
    expectations, using a large labeled sample from the test distribution."""
    X, y = sampler(mc_samples)
    alpha = alpha_fn(X)
    tau_inf = mean_vector(X, y, alpha, fmap)  # alpha-weighted feature mean
    psi = fmap.instance_features(X)
    masses = np.full(X.shape[0], 1.0 / X.shape[0])
    oracle = _objective_oracle(tau_inf, psi, alpha, masses, loss, np.zeros(fmap.dim), fmap)
    result = minimize_subgradient(oracle, fmap.dim, settings)
    if return_coef:
        return result.objective, result.x
    return result.objective


def mc_risk(model: MrcModel, sampler, alpha_fn, mc_samples: int = 100_000):
    """Monte Carlo test risk of the probabilistic rule; returns (risk, se)."""
    X, y = sampler(mc_samples)
    alpha = alpha_fn(X)
    probs = predict_probs_batch(model, X, alpha)
    py = probs[np.arange(X.shape[0]), np.asarray(y, dtype=np.int64) - 1]
    if model.loss is Loss.ZERO_ONE:
        values = 1.0 - py
    else:
        values = np.minimum(-np.log(np.maximum(py, 1e-300)), 1e6)
    return float(np.mean(values)), float(np.std(values, ddof=1) / np.sqrt(values.size))


def mc_alpha_feature_mean(sampler, alpha_fn, fmap: FeatureMap, mc_samples: int = 100_000):
    """MC estimate of the population alpha-weighted feature mean and its SE."""
    X, y = sampler(mc_samples)
    alpha = alpha_fn(X)
    psi = fmap.instance_features(X)
    p, k = fmap.instance_dim, fmap.n_classes
    n = X.shape[0]
    feats = np.zeros((n, k * p))
    y = np.asarray(y, dtype=np.int64)
    for cls in range(1, k + 1):
        mask = y == cls
        feats[mask, (cls - 1) * p : cls * p] = alpha[mask, None] * psi[mask]
    mean = feats.mean(axis=0)
    se = feats.std(axis=0, ddof=1) / np.sqrt(n)
    return mean, se


def population_minimax_risk(model: MrcModel, sampler, alpha_fn, mc_samples: int = 100_000):
    """MC estimate of the population objective at the fitted coefficients."""
    X, _ = sampler(mc_samples)
    alpha = alpha_fn(X)
    psi = model.spec.feature_map.instance_features(X)
    scores = _class_scores(model.coef, psi, alpha, model.spec.feature_map)
    transform = _worstcase_zero_one if model.loss is Loss.ZERO_ONE else _worstcase_log
    phi, _ = transform(scores)
    base = float(-model.spec.feature_mean @ model.coef + model.spec.radius @ np.abs(model.coef))
    return base + float(np.mean(phi)), float(np.std(phi, ddof=1) / np.sqrt(phi.size))


def bound_report(
    model: MrcModel,
    sampler,
    alpha_fn,
    mc_samples: int = 100_000,
    delta: float = 0.1,
    n_train: Optional[int] = None,
    B: Optional[float] = None,
    r_inf: Optional[float] = None,
    coef_inf: Optional[np.ndarray] = None,
    feature_sup: Optional[float] = None,
) -> dict:
    """Risk/bound comparison in synthetic mode.

    Reports the MC test risk, the population minimax risk plus the
    estimation-gap bound, and (when the zero-radius population solution is
    supplied) the exact-expectation bound and the effective-sample-size
    bound with confidence delta.
    """
    risk, risk_se = mc_risk(model, sampler, alpha_fn, mc_samples)
    e_phi, e_phi_se = mc_alpha_feature_mean(sampler, alpha_fn, model.spec.feature_map, mc_samples)
    risk_u, risk_u_se = population_minimax_risk(model, sampler, alpha_fn, mc_samples)
    gap = np.abs(model.spec.feature_mean - e_phi) - model.spec.radius
    bound1 = risk_u + float(gap @ np.abs(model.coef))
    combined_se = risk_se + risk_u_se + float(e_phi_se @ np.abs(model.coef))
    report = {
        "risk_mc": risk,
        "risk_mc_se": risk_se,
        "minimax_risk_empirical": model.minimax_risk,
        "minimax_risk_population": risk_u,
        "minimax_risk_population_se": risk_u_se,
        "bound_estimation_gap": bound1,
        "bound_estimation_gap_holds": risk <= bound1 + 3.0 * combined_se,
        "combined_se": combined_se,
    }
    if r_inf is not None and coef_inf is not None:
        diff = np.abs(model.spec.feature_mean - e_phi)
        bound2 = (
            r_inf
            + float(model.spec.radius @ (np.abs(coef_inf) - np.abs(model.coef)))
            + float(diff @ np.abs(coef_inf - model.coef))
        )
        report["smallest_minimax_risk"] = r_inf
        report["bound_exact_expectations"] = bound2
        report["bound_exact_expectations_holds"] = risk <= bound2 + 3.0 * combined_se
        if n_train is not None and B is not None and feature_sup is not None:
            d_val = model.D or 1.0
            width = feature_sup * float(np.max(np.abs(coef_inf - model.coef)))
            bound3 = r_inf + width * np.sqrt(2.0 * B * B * np.log(2.0 / delta) / (d_val * n_train))
            report["bound_effective_sample"] = bound3
            report["bound_effective_sample_holds"] = risk <= bound3 + 3.0 * combined_se
    return report


# ---------------------------------------------------------------------------
# Binary logistic baselines
# ---------------------------------------------------------------------------


def _check_binary(y):
    y = np.asarray(y, dtype=np.int64).ravel()
    if not set(np.unique(y)).issubset({1, 2}):
        raise ValueError("baselines support binary labels 1/2 only")
    return 3.0 - 2.0 * y  # map 1 -> +1, 2 -> -1


def fit_reweighted_lr(X, y, beta, max_iter: int = 500, tol: float = 1e-10) -> np.ndarray:
    """Weighted logistic regression by gradient descent with backtracking.

    Minimizes (1/n) sum beta_i log(1 + exp(-s_i x_i'mu)) for signed labels.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    s = _check_binary(y)
    beta = np.asarray(beta, dtype=np.float64).ravel()
    n = X.shape[0]

    def value_grad(mu):
        z = s * (X @ mu)
        val = float(beta @ np.where(z > 0, np.log1p(np.exp(-z)), -z + np.log1p(np.exp(z)))) / n
        sig = 1.0 / (1.0 + np.exp(np.clip(z, -500, 500)))
        grad = -(X.T @ (beta * s * sig)) / n
        return val, grad

    mu = np.zeros(X.shape[1])
    val, grad = value_grad(mu)
    step = 1.0
    for _ in range(max_iter):
        gn2 = float(grad @ grad)
        if gn2 < tol * tol:
            break
        step *= 2.0
        while step > 1e-18:
            cand = mu - step * grad
            v_new, g_new = value_grad(cand)
            if v_new <= val - 0.5 * step * gn2 * 1e-4:
                mu, val, grad = cand, v_new, g_new
                break
            step *= 0.5
        else:
            break
    return mu


def fit_robust(X, y, alpha_train, max_iter: int = 3000, step_scale: float = 1.0) -> np.ndarray:
    """Robust baseline: descend the published gradient field.

    The expectation over the training marginal is approximated by the
    training instances; the per-instance testing weight alpha enters the
    link, producing low-confidence predictions off the training support.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    s = _check_binary(y)
    alpha = np.asarray(alpha_train, dtype=np.float64).ravel()
    n = X.shape[0]
    data_term = (X.T @ s) / (2.0 * n)
    mu = np.zeros(X.shape[1])
    for k in range(1, max_iter + 1):
        z = alpha * (X @ mu)
        grad = -data_term + (X.T @ np.tanh(z / 2.0)) / (2.0 * n)
        gn = float(np.linalg.norm(grad))
        if gn < 1e-10:
            break
        mu = mu - (step_scale / np.sqrt(k)) * grad / max(gn, 1e-12)
    return mu


def robust_rule_probs(mu, x_features, alpha_x: float) -> np.ndarray:
    """Binary probabilistic rule of the robust baseline at one instance."""
    z = float(alpha_x) * float(np.asarray(x_features) @ mu)
    p1 = 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
    return np.array([p1, 1.0 - p1])


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _fmt(values) -> str:
    return " ".join(f"{float(v):.17g}" for v in np.asarray(values, dtype=np.float64).ravel())


def save_model(model: MrcModel, path: str) -> None:
    """Flat key-value text format; decimals at 17 significant digits."""
    fm = model.spec.feature_map
    lines = [
        "format = dwgcs-model-v1",
        f"loss = {model.loss.value}",
        f"feature_map = {fm.kind.value}",
        f"dim_instance = {fm.dim_instance}",
        f"n_classes = {fm.n_classes}",
        f"d_value = {_fmt([model.D]) if model.D is not None else 'none'}",
        f"minimax_risk = {_fmt([model.minimax_risk])}",
        f"coef = {_fmt(model.coef)}",
        f"feature_mean = {_fmt(model.spec.feature_mean)}",
        f"radius = {_fmt(model.spec.radius)}",
        f"alpha_values = {_fmt(model.spec.alpha_values)}",
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path: str) -> MrcModel:
    fields = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition(" = ")
            fields[key] = value
    if fields.get("format") != "dwgcs-model-v1":
        raise ValueError(f"unrecognized model format in {path}")
    fmap = FeatureMap(
        kind=MapKind(fields["feature_map"]),
        dim_instance=int(fields["dim_instance"]),
        n_classes=int(fields["n_classes"]),
    )
    vec = lambda key: np.array([float(v) for v in fields[key].split()]) if fields[key] else np.array([])
    spec = UncertaintySpec(
        feature_mean=vec("feature_mean"),
        radius=vec("radius"),
        alpha_values=vec("alpha_values"),
        feature_map=fmap,
    )
    d_value = None if fields["d_value"] == "none" else float(fields["d_value"])
    return MrcModel(
        coef=vec("coef"),
        loss=Loss(fields["loss"]),
        minimax_risk=float(fields["minimax_risk"]),
        spec=spec,
        D=d_value,
    )
