"""Fast independent-oracle checks behind the `selftest` CLI subcommand.

Each check recomputes an expected value by an independent route (hand
enumeration, brute-force grids, vertex enumeration) and asserts the
production path agrees.  The pytest suite runs deeper versions.
"""

from __future__ import annotations

import numpy as np

from .core import FeatureMap, MapKind, feature
from .kernel import RbfKernel, bandwidth_heuristic
from .mrc import worstcase_zero_one, worstcase_zero_one_bruteforce
from .rng import Stream
from .solvers import LpProblem, QpProblem, minimize_subgradient, solve_lp, solve_qp
from .weights import DwKmmConfig, MarginalModel, dw_kmm_detailed, exact_double_weights


def check_feature_blocks():
    fm = FeatureMap(MapKind.IDENTITY, 1, 2)
    assert np.allclose(feature(fm, [3.0], 1), [3, 1, 0, 0])
    assert np.allclose(feature(fm, [3.0], 2), [0, 0, 3, 1])
    fq = FeatureMap(MapKind.QUADRATIC, 2, 2)
    # hand-enumerated degree-<=2 monomials of (1, 2): 1, 2, 1, 2, 4, const 1
    assert np.allclose(feature(fq, [1.0, 2.0], 1)[:6], [1, 2, 1, 2, 4, 1])


def check_rbf_values():
    k = RbfKernel(1.0)
    assert abs(k.eval([0.0], [np.sqrt(2.0)]) - np.exp(-1.0)) < 1e-12
    assert abs(bandwidth_heuristic(np.array([[0.0], [1.0], [2.0]]), k_nn=1) - 1.0) < 1e-12


def check_worstcase_prefix_vs_bruteforce():
    stream = Stream(11)
    for k in (2, 3, 4, 5):
        fm = FeatureMap(MapKind.IDENTITY, 1, k)
        for _ in range(40):
            mu = stream.normal(fm.dim) * 2.0
            x = stream.normal(1)
            a = float(stream.uniform(1)[0]) * 2.0
            fast = worstcase_zero_one(mu, x, a, fm)
            slow = worstcase_zero_one_bruteforce(mu, x, a, fm)
            assert abs(fast - slow) < 1e-12, f"k={k}: {fast} vs {slow}"


def check_qp_grid_oracle():
    stream = Stream(3)
    A = stream.normal(16).reshape(4, 4)
    H = A @ A.T + 0.1 * np.eye(4)
    c = stream.normal(4)
    p = QpProblem(hessian=H, linear=c, lower=np.zeros(4), upper=np.ones(4))
    res = solve_qp(p)
    grid = np.linspace(0.0, 1.0, 21)
    mesh = np.stack(np.meshgrid(*([grid] * 4)), axis=-1).reshape(-1, 4)
    vals = 0.5 * np.einsum("ij,jk,ik->i", mesh, H, mesh) + mesh @ c
    assert res.objective <= vals.min() + 1e-8
    assert vals.min() - res.objective < 1e-2


def check_lp_vertex_oracle():
    from itertools import combinations

    stream = Stream(5)
    c = stream.normal(3)
    a_ub = np.vstack([stream.normal(12).reshape(4, 3), -np.eye(3)])
    b_ub = np.concatenate([np.abs(stream.normal(4)) + 0.5, np.zeros(3)])
    res = solve_lp(LpProblem(c=c, a_ub=a_ub[:4], b_ub=b_ub[:4]))
    best = np.inf
    rows = np.vstack([a_ub, np.zeros((0, 3))])
    rhs = b_ub
    for combo in combinations(range(rows.shape[0]), 3):
        sub = rows[list(combo)]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        v = np.linalg.solve(sub, rhs[list(combo)])
        if np.all(rows @ v <= rhs + 1e-9):
            best = min(best, float(c @ v))
    assert abs(res.objective - best) < 1e-7, f"{res.objective} vs {best}"


def check_subgradient_toys():
    r = minimize_subgradient(
        lambda z: (abs(z[0]), np.array([1.0 if z[0] > 0 else (-1.0 if z[0] < 0 else 0.0)])),
        1,
        x0=np.array([1.7]),
    )
    assert abs(r.x[0]) <= 1e-3
    r = minimize_subgradient(
        lambda z: (max(z[0], -2 * z[0]), np.array([1.0 if z[0] >= 0 else -2.0])),
        1,
        x0=np.array([1.3]),
    )
    assert abs(r.x[0]) <= 1e-3


def check_dw_kmm_tiny_grid():
    train = np.array([[0.0], [1.0]])
    test = np.array([[0.5], [2.0]])
    cfg = DwKmmConfig(kernel=RbfKernel(1.0), D=2.0, B=1.5)
    pair, res, prob = dw_kmm_detailed(train, test, cfg)
    grid_b = np.arange(0.0, 1.5 / np.sqrt(2.0) + 1e-9, 0.05)
    grid_a = np.arange(0.0, 1.0 + 1e-9, 0.05)
    best = np.inf
    eps = (1.5 / np.sqrt(2.0)) / np.sqrt(2.0)
    radius = (1.0 - 1.0 / np.sqrt(2.0)) * np.sqrt(2.0)
    for b1 in grid_b:
        for b2 in grid_b:
            for a1 in grid_a:
                for a2 in grid_a:
                    if abs((b1 + b2) / 2 - (a1 + a2) / 2) > eps:
                        continue
                    if (a1 - 1) ** 2 + (a2 - 1) ** 2 > radius**2:
                        continue
                    z = np.array([b1, b2, a1, a2])
                    best = min(best, prob.objective(z))
    assert res.objective <= best + 1e-9
    assert best - res.objective < 0.05


def check_exact_weight_identity():
    marg = MarginalModel(
        train_density=lambda X: np.exp(-0.5 * np.sum(X**2, axis=1)),
        test_density=lambda X: np.exp(-0.5 * np.sum((X - 1.0) ** 2, axis=1)),
    )
    stream = Stream(9)
    pts = stream.normal(40).reshape(20, 2)
    pair = exact_double_weights(marg, C=2.0, train_x=pts, test_x=pts)
    ptr, pte = marg.densities(pts)
    alpha = pair.alpha_fn(pts)
    beta = np.minimum(pte / ptr, 2.0)
    assert np.max(np.abs(alpha * pte - beta * ptr)) < 1e-12


def check_boxplot_quantiles():
    values = np.array([0.1, 0.4, 0.2, 0.9, 0.3])
    q = np.percentile(values, [0, 25, 50, 75, 100])
    srt = np.sort(values)
    for prob, expect in zip([0, 25, 50, 75, 100], q):
        h = (srt.size - 1) * prob / 100.0
        lo = int(np.floor(h))
        hi = min(lo + 1, srt.size - 1)
        manual = srt[lo] + (h - lo) * (srt[hi] - srt[lo])
        assert abs(manual - expect) < 1e-15


ALL_CHECKS = [
    ("feature-one-hot-blocks", check_feature_blocks),
    ("rbf-and-bandwidth", check_rbf_values),
    ("worstcase-zero-one-prefix-vs-bruteforce", check_worstcase_prefix_vs_bruteforce),
    ("qp-box-grid-oracle", check_qp_grid_oracle),
    ("lp-vertex-enumeration-oracle", check_lp_vertex_oracle),
    ("subgradient-toys", check_subgradient_toys),
    ("dw-kmm-tiny-grid-oracle", check_dw_kmm_tiny_grid),
    ("exact-weight-pointwise-identity", check_exact_weight_identity),
    ("boxplot-quantile-recomputation", check_boxplot_quantiles),
]
