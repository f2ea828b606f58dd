"""Convex optimization kernels: box/slab/ball QP, dense LP, subgradient descent.

The QP solver runs accelerated projected gradient with adaptive restarts;
feasible-set projections (box intersected with absolute-mean slabs and an
optional Euclidean ball on a coordinate subset) use Dykstra's algorithm.
The LP solver is a two-phase dense tableau simplex.  The subgradient
minimizer handles the nonsmooth piecewise objectives of the classifier fits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np


class InfeasibleProblem(Exception):
    pass


class UnboundedProblem(Exception):
    pass


class SolverDiverged(Exception):
    pass


# ---------------------------------------------------------------------------
# Quadratic programming
# ---------------------------------------------------------------------------


@dataclass
class QpProblem:
    """minimize 0.5 z'Hz + c'z over box [lower, upper], slabs |a'z - b| <= s,
    and optionally ||z[idx] - center|| <= radius."""

    hessian: np.ndarray
    linear: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    slabs: List[Tuple[np.ndarray, float, float]] = field(default_factory=list)
    ball: Optional[Tuple[np.ndarray, float, np.ndarray]] = None  # (center, radius, idx)

    def __post_init__(self):
        self.hessian = np.asarray(self.hessian, dtype=np.float64)
        self.linear = np.asarray(self.linear, dtype=np.float64)
        self.lower = np.asarray(self.lower, dtype=np.float64)
        self.upper = np.asarray(self.upper, dtype=np.float64)
        n = self.linear.size
        if self.hessian.shape != (n, n):
            raise ValueError("hessian/linear dimension mismatch")
        if np.max(np.abs(self.hessian - self.hessian.T)) > 1e-8:
            raise ValueError("hessian must be symmetric")
        if np.any(self.lower > self.upper + 1e-12):
            raise ValueError("empty box")

    def objective(self, z: np.ndarray) -> float:
        return float(0.5 * z @ self.hessian @ z + self.linear @ z)


@dataclass
class QpSettings:
    tol: float = 1e-6  # stop when the projected-gradient residual is below this
    max_iter: int = 20000
    jitter: float = 1e-10
    proj_tol: float = 1e-13
    proj_max_cycles: int = 1000


@dataclass
class QpResult:
    z: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool


def _project_box(z, lo, hi):
    return np.clip(z, lo, hi)


def _project_slab(z, a, b, s, a_norm2):
    v = float(a @ z)
    if v > b + s:
        return z - a * ((v - b - s) / a_norm2)
    if v < b - s:
        return z + a * ((b - s - v) / a_norm2)
    return z


def _project_ball(z, center, radius, idx):
    u = z[idx] - center
    norm = float(np.linalg.norm(u))
    if norm > radius:
        z = z.copy()
        z[idx] = center + (u * (radius / norm) if norm > 0 else 0.0)
    return z


def project_feasible(z: np.ndarray, p: QpProblem, settings: Optional[QpSettings] = None) -> np.ndarray:
    """Dykstra projection onto the intersection of the problem's constraint sets."""
    settings = settings or QpSettings()
    sets: List[Callable[[np.ndarray], np.ndarray]] = [
        lambda v: _project_box(v, p.lower, p.upper)
    ]
    for a, b, s in p.slabs:
        a = np.asarray(a, dtype=np.float64)
        an2 = float(a @ a)
        sets.append(lambda v, a=a, b=b, s=s, an2=an2: _project_slab(v, a, b, s, an2))
    if p.ball is not None:
        center, radius, idx = p.ball
        sets.append(lambda v: _project_ball(v, center, radius, idx))
    if len(sets) == 1:
        return sets[0](np.asarray(z, dtype=np.float64))

    x = np.asarray(z, dtype=np.float64).copy()
    corrections = [np.zeros_like(x) for _ in sets]
    scale = 1.0 + float(np.max(np.abs(x)))
    for _ in range(settings.proj_max_cycles):
        x_prev = x.copy()
        for i, proj in enumerate(sets):
            y = x + corrections[i]
            x_new = proj(y)
            corrections[i] = y - x_new
            x = x_new
        # x can stall for whole cycles while corrections still evolve, so a
        # small step alone does not mean convergence; demand feasibility too
        if (
            float(np.max(np.abs(x - x_prev))) < settings.proj_tol * scale
            and _constraint_violation(x, p) < 1e-9 * scale
        ):
            break
    return x


def _constraint_violation(z: np.ndarray, p: QpProblem) -> float:
    viol = max(float(np.max(p.lower - z, initial=0.0)), float(np.max(z - p.upper, initial=0.0)))
    for a, b, s in p.slabs:
        viol = max(viol, abs(float(np.asarray(a) @ z) - b) - s)
    if p.ball is not None:
        center, radius, idx = p.ball
        viol = max(viol, float(np.linalg.norm(z[idx] - center)) - radius)
    return max(viol, 0.0)


def solve_qp(p: QpProblem, settings: Optional[QpSettings] = None, z0: Optional[np.ndarray] = None) -> QpResult:
    """Accelerated projected gradient with Dykstra projections and restarts."""
    settings = settings or QpSettings()
    n = p.linear.size
    H = p.hessian + settings.jitter * np.eye(n)
    c = p.linear

    # Lipschitz constant via power iteration
    v = np.ones(n) / np.sqrt(n)
    for _ in range(60):
        w = H @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            break
        v = w / nw
    lip = max(float(v @ (H @ v)), 1e-12)

    start = np.clip(np.ones(n), p.lower, p.upper) if z0 is None else np.asarray(z0, dtype=np.float64)
    z = project_feasible(start, p, settings)
    if _constraint_violation(z, p) > 1e-6:
        raise InfeasibleProblem("could not project onto the constraint set")

    def grad(v):
        return H @ v + c

    def fobj(v):
        return float(0.5 * v @ H @ v + c @ v)

    y = z.copy()
    z_prev = z.copy()
    t_k = 1.0
    best = z.copy()
    best_f = fobj(z)
    residual = np.inf
    it = 0
    for it in range(1, settings.max_iter + 1):
        g = grad(y)
        z_new = project_feasible(y - g / lip, p, settings)
        # adaptive restart when momentum points uphill
        if float((y - z_new) @ (z_new - z_prev)) > 0.0:
            t_k = 1.0
            y = z_prev.copy()
            g = grad(y)
            z_new = project_feasible(y - g / lip, p, settings)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        y = z_new + ((t_k - 1.0) / t_next) * (z_new - z_prev)
        z_prev, t_k = z_new, t_next

        f_new = fobj(z_new)
        if f_new < best_f:
            best_f, best = f_new, z_new.copy()
        if it % 20 == 0 or it == settings.max_iter:
            residual = float(np.max(np.abs(best - project_feasible(best - grad(best), p, settings))))
            if residual <= settings.tol:
                break

    residual = float(np.max(np.abs(best - project_feasible(best - grad(best), p, settings))))
    return QpResult(
        z=best,
        objective=p.objective(best),
        kkt_residual=residual,
        iterations=it,
        converged=residual <= settings.tol,
    )


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------


@dataclass
class LpProblem:
    """minimize c'x subject to A_eq x = b_eq, A_ub x <= b_ub, x[nonneg] >= 0."""

    c: np.ndarray
    a_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    a_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    nonneg: Optional[np.ndarray] = None  # default: all variables nonnegative

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.float64)
        n = self.c.size
        for name in ("a_eq", "a_ub"):
            m = getattr(self, name)
            if m is not None:
                m = np.atleast_2d(np.asarray(m, dtype=np.float64))
                if m.shape[1] != n:
                    raise ValueError(f"{name} column count must match c")
                setattr(self, name, m)
        for aname, bname in (("a_eq", "b_eq"), ("a_ub", "b_ub")):
            a, b = getattr(self, aname), getattr(self, bname)
            if (a is None) != (b is None):
                raise ValueError(f"{aname}/{bname} must be given together")
            if b is not None:
                b = np.asarray(b, dtype=np.float64).ravel()
                if b.size != a.shape[0]:
                    raise ValueError(f"{bname} length must match {aname} rows")
                setattr(self, bname, b)
        if self.nonneg is None:
            self.nonneg = np.ones(n, dtype=bool)
        else:
            self.nonneg = np.asarray(self.nonneg, dtype=bool)
            if self.nonneg.size != n:
                raise ValueError("nonneg mask length must match c")


@dataclass
class LpResult:
    x: np.ndarray
    objective: float
    dual: np.ndarray  # multipliers for the standard-form rows
    b_std: np.ndarray  # standard-form right-hand side matching `dual`
    iterations: int


_LP_TOL = 1e-10


def _simplex(tableau, basis, block, max_iter=100000):
    """Primal simplex on [A | b] with objective row last.

    Dantzig pricing, with Bland's rule engaged during degeneracy stalls
    (and released on strict improvement) so cycling cannot occur; columns
    listed in `block` never enter.
    """
    m = tableau.shape[0] - 1
    use_bland = False
    stall = 0
    last_obj = tableau[-1, -1]
    for it in range(max_iter):
        red = tableau[-1, :-1].copy()
        red[block] = np.inf
        if use_bland:
            candidates = np.flatnonzero(red < -_LP_TOL)
            if candidates.size == 0:
                return it
            col = int(candidates[0])
        else:
            col = int(np.argmin(red))
            if red[col] >= -_LP_TOL:
                return it
        ratios = np.full(m, np.inf)
        pos = tableau[:m, col] > _LP_TOL
        ratios[pos] = tableau[:m, -1][pos] / tableau[:m, col][pos]
        if not np.any(np.isfinite(ratios)):
            raise UnboundedProblem("objective unbounded below")
        row = int(np.argmin(ratios))
        if use_bland:
            # tie-break on the smallest basis index for termination
            tied = np.flatnonzero(np.abs(ratios - ratios[row]) <= _LP_TOL * (1 + abs(ratios[row])))
            row = int(tied[np.argmin(np.asarray(basis)[tied])])
        piv = tableau[row, col]
        tableau[row] /= piv
        other = np.arange(m + 1) != row
        tableau[other] -= np.outer(tableau[other, col], tableau[row])
        basis[row] = col
        obj = tableau[-1, -1]
        if obj < last_obj - 1e-13 * (1 + abs(last_obj)):
            stall = 0
            use_bland = False
        else:
            stall += 1
            if stall > 40:
                use_bland = True
        last_obj = obj
    raise SolverDiverged("simplex iteration limit reached")


def simplex_standard(A, b, c, basis, max_iter: int = 100000):
    """Simplex on an explicit standard form min c'x, Ax = b, x >= 0,
    starting from a supplied feasible basis.

    Returns (x, objective, dual, iterations).  The caller guarantees the
    basis columns are nonsingular and the associated solution nonnegative.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).ravel()
    c = np.asarray(c, dtype=np.float64).ravel()
    m, n = A.shape
    basis = list(basis)
    B = A[:, basis]
    tab = np.zeros((m + 1, n + 1))
    rhs = np.linalg.solve(B, b)
    if np.min(rhs) < -1e-9:
        raise InfeasibleProblem("supplied basis is not primal feasible")
    tab[:m, :n] = np.linalg.solve(B, A)
    tab[:m, -1] = np.maximum(rhs, 0.0)
    tab[-1, :n] = c
    for r, col in enumerate(basis):
        tab[-1] -= c[col] * tab[r]
    it = _simplex(tab, basis, block=np.zeros(n, dtype=bool), max_iter=max_iter)
    basis_arr = np.asarray(basis)
    Bf = A[:, basis_arr]
    x = np.zeros(n)
    xb = np.linalg.solve(Bf, b)
    xb[np.abs(xb) < 1e-12] = 0.0
    x[basis_arr] = xb
    dual = np.linalg.solve(Bf.T, c[basis_arr])
    return x, float(c @ x), dual, it


def solve_lp(p: LpProblem, max_iter: int = 100000) -> LpResult:
    """Two-phase dense simplex; returns an optimal basic feasible solution."""
    n_orig = p.c.size
    free = ~p.nonneg
    n_free = int(np.count_nonzero(free))

    # standard form: nonneg vars as-is, free vars split u - v, slack per ub row
    def expand(mat):
        cols = [mat]
        if n_free:
            cols.append(-mat[:, free])
        return np.concatenate(cols, axis=1)

    blocks_a, blocks_b = [], []
    if p.a_eq is not None:
        blocks_a.append(expand(p.a_eq))
        blocks_b.append(p.b_eq.copy())
    n_ub = 0 if p.a_ub is None else p.a_ub.shape[0]
    if n_ub:
        blocks_a.append(expand(p.a_ub))
        blocks_b.append(p.b_ub.copy())
    if not blocks_a:
        raise ValueError("problem has no constraints")
    A = np.concatenate(blocks_a, axis=0)
    b = np.concatenate(blocks_b)
    m = A.shape[0]
    if n_ub:
        slack = np.zeros((m, n_ub))
        slack[m - n_ub :, :] = np.eye(n_ub)
        A = np.concatenate([A, slack], axis=1)
    c_std = np.concatenate([p.c, -p.c[free], np.zeros(n_ub)])

    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0
    n_std = A.shape[1]

    # phase 1
    tab = np.zeros((m + 1, n_std + m + 1))
    tab[:m, :n_std] = A
    tab[:m, n_std : n_std + m] = np.eye(m)
    tab[:m, -1] = b
    tab[-1, n_std : n_std + m] = 1.0
    tab[-1] -= tab[:m].sum(axis=0)  # price out the artificial basis
    basis = list(range(n_std, n_std + m))
    it1 = _simplex(tab, basis, block=np.zeros(n_std + m, dtype=bool), max_iter=max_iter)
    if tab[-1, -1] < -1e-7:
        raise InfeasibleProblem(f"phase-1 objective {-tab[-1, -1]:.3e} > 0")

    # drive lingering artificials out of the basis where possible
    keep_rows = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] >= n_std:
            pivot_cols = np.flatnonzero(np.abs(tab[r, :n_std]) > 1e-9)
            if pivot_cols.size:
                col = int(pivot_cols[0])
                tab[r] /= tab[r, col]
                other = np.arange(m + 1) != r
                tab[other] -= np.outer(tab[other, col], tab[r])
                basis[r] = col
            else:
                keep_rows[r] = False  # redundant row

    # phase 2
    row_sel = np.concatenate([keep_rows, [True]])
    tab = tab[row_sel]
    kept = int(np.count_nonzero(keep_rows))
    basis = [basis[r] for r in range(m) if keep_rows[r]]
    row_ids = np.flatnonzero(keep_rows)
    tab[-1, :] = 0.0
    tab[-1, :n_std] = c_std
    for r, col in enumerate(basis):
        tab[-1] -= c_std[col] * tab[r]
    block = np.zeros(n_std + m, dtype=bool)
    block[n_std:] = True  # artificials never re-enter
    it2 = _simplex(tab, basis, block=block, max_iter=max_iter)

    # recover a clean solution from the original standard-form columns
    x_std = np.zeros(n_std)
    basis_arr = np.asarray(basis)
    B = A[row_ids][:, basis_arr]
    xb = np.linalg.solve(B, b[row_ids])
    xb[np.abs(xb) < 1e-12] = 0.0
    x_std[basis_arr] = xb
    dual_kept = np.linalg.solve(B.T, c_std[basis_arr])
    dual = np.zeros(m)
    dual[row_ids] = dual_kept

    x = x_std[:n_orig].copy()
    if n_free:
        x[free] -= x_std[n_orig : n_orig + n_free]
    return LpResult(
        x=x,
        objective=float(p.c @ x),
        dual=dual,
        b_std=b,
        iterations=it1 + it2,
    )


# ---------------------------------------------------------------------------
# Subgradient descent
# ---------------------------------------------------------------------------


@dataclass
class SubgradSettings:
    max_iter: int = 10000
    averaging: bool = True
    step_rule: str = "nesterov-decay"  # or "constant"
    step_scale: float = 1.0
    tol: float = 0.0
    patience: int = 400  # iterations without improvement before halving the scale


@dataclass
class SubgradResult:
    x: np.ndarray
    objective: float
    iterations: int
    best_history: np.ndarray


def minimize_subgradient(
    oracle: Callable[[np.ndarray], Tuple[float, np.ndarray]],
    dim: int,
    settings: Optional[SubgradSettings] = None,
    x0: Optional[np.ndarray] = None,
) -> SubgradResult:
    """Diminishing-step subgradient descent with averaging and best tracking.

    The oracle returns (value, subgradient).  Steps decay as scale/sqrt(k)
    within a phase; the scale halves and the phase restarts from the best
    point whenever no improvement is seen for `patience` iterations.
    """
    settings = settings or SubgradSettings()
    x = np.zeros(dim) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    f, g = oracle(x)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise SolverDiverged("oracle returned a non-finite value at the start")
    best_x, best_f = x.copy(), f
    history = [best_f]
    scale = settings.step_scale
    phase_k = 0
    since_improve = 0
    avg = x.copy()
    avg_count = 1
    it = 0
    for it in range(1, settings.max_iter + 1):
        gn = float(np.linalg.norm(g))
        if gn <= 1e-15:
            break
        if settings.step_rule == "constant":
            step = scale
        else:
            step = scale / np.sqrt(phase_k + 1.0)
        x = x - (step / gn) * g
        f, g = oracle(x)
        if not np.isfinite(f) or not np.all(np.isfinite(g)):
            raise SolverDiverged(f"oracle returned a non-finite value at iteration {it}")
        phase_k += 1
        if settings.averaging:
            avg += (x - avg) / (avg_count + 1)
            avg_count += 1
        improved = f < best_f - 1e-15
        if improved:
            best_f, best_x = f, x.copy()
            since_improve = 0
        else:
            since_improve += 1
        if settings.averaging and it % 50 == 0:
            fa, _ = oracle(avg)
            if fa < best_f:
                best_f, best_x = fa, avg.copy()
                since_improve = 0
        if since_improve >= settings.patience:
            scale *= 0.5
            x = best_x.copy()
            f, g = oracle(x)
            phase_k = 0
            since_improve = 0
            avg = x.copy()
            avg_count = 1
            if scale < 1e-14:
                break
        history.append(best_f)
        if settings.tol > 0 and len(history) > 2 and history[-2] - history[-1] < settings.tol and since_improve == 0:
            pass  # tolerance applies to phase exhaustion, handled via scale floor
    return SubgradResult(x=best_x, objective=best_f, iterations=it, best_history=np.asarray(history))
