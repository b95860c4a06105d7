"""Epsilon-insensitive support vector regression with an RBF kernel, solved by SMO.

The dual is written over 2l variables (alpha, alpha*) stacked into one
vector ``beta`` with labels s = (+1,...,+1, -1,...,-1), which turns it into
the standard box-constrained form

    min 0.5 beta' Q beta + p' beta   s.t.  s' beta = 0,  0 <= beta <= C

with Q_ij = s_i s_j K(x_i, x_j). Working pairs are picked by maximal violation
plus second-order gain, the usual choice for this problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import DataError, ShapeError

TAU = 1e-12
KKT_TOL = 1e-3
MAX_ITER = 10_000_000


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """K_ij = exp(-gamma * ||a_i - b_j||^2)."""
    sq = (np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * A @ B.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


@njit(cache=True)
def _smo(K, y, C, eps, tol, max_iter):
    l = y.shape[0]
    n = 2 * l
    s = np.empty(n)
    p = np.empty(n)
    for t in range(l):
        s[t] = 1.0
        s[t + l] = -1.0
        p[t] = eps - y[t]
        p[t + l] = eps + y[t]
    beta = np.zeros(n)
    G = p.copy()
    converged = False
    it = 0
    while it < max_iter:
        # i: maximal violating index in I_up
        gmax = -np.inf
        i = -1
        for t in range(n):
            if s[t] > 0:
                if beta[t] < C and -G[t] >= gmax:
                    gmax = -G[t]
                    i = t
            else:
                if beta[t] > 0 and G[t] >= gmax:
                    gmax = G[t]
                    i = t
        gmax2 = -np.inf
        j = -1
        obj_min = np.inf
        if i >= 0:
            ki = i % l
            for t in range(n):
                kt = t % l
                q_it = s[i] * s[t] * K[ki, kt]
                if s[t] > 0:
                    if beta[t] > 0:
                        diff = gmax + G[t]
                        if G[t] >= gmax2:
                            gmax2 = G[t]
                        if diff > 0:
                            quad = K[ki, ki] + K[kt, kt] - 2.0 * s[i] * q_it
                            if quad <= 0:
                                quad = TAU
                            obj = -(diff * diff) / quad
                            if obj <= obj_min:
                                j = t
                                obj_min = obj
                else:
                    if beta[t] < C:
                        diff = gmax - G[t]
                        if -G[t] >= gmax2:
                            gmax2 = -G[t]
                        if diff > 0:
                            quad = K[ki, ki] + K[kt, kt] + 2.0 * s[i] * q_it
                            if quad <= 0:
                                quad = TAU
                            obj = -(diff * diff) / quad
                            if obj <= obj_min:
                                j = t
                                obj_min = obj
        if i < 0 or j < 0 or gmax + gmax2 < tol:
            converged = True
            break
        it += 1

        ki = i % l
        kj = j % l
        q_ij = s[i] * s[j] * K[ki, kj]
        old_i = beta[i]
        old_j = beta[j]
        if s[i] != s[j]:
            quad = K[ki, ki] + K[kj, kj] + 2.0 * q_ij
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = beta[i] - beta[j]
            beta[i] += delta
            beta[j] += delta
            if diff > 0:
                if beta[j] < 0:
                    beta[j] = 0.0
                    beta[i] = diff
            else:
                if beta[i] < 0:
                    beta[i] = 0.0
                    beta[j] = -diff
            if diff > 0:
                if beta[i] > C:
                    beta[i] = C
                    beta[j] = C - diff
            else:
                if beta[j] > C:
                    beta[j] = C
                    beta[i] = C + diff
        else:
            quad = K[ki, ki] + K[kj, kj] - 2.0 * q_ij
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            total = beta[i] + beta[j]
            beta[i] -= delta
            beta[j] += delta
            if total > C:
                if beta[i] > C:
                    beta[i] = C
                    beta[j] = total - C
            else:
                if beta[j] < 0:
                    beta[j] = 0.0
                    beta[i] = total
            if total > C:
                if beta[j] > C:
                    beta[j] = C
                    beta[i] = total - C
            else:
                if beta[i] < 0:
                    beta[i] = 0.0
                    beta[j] = total
        d_i = beta[i] - old_i
        d_j = beta[j] - old_j
        for t in range(n):
            kt = t % l
            G[t] += s[i] * s[t] * K[ki, kt] * d_i + s[j] * s[t] * K[kj, kt] * d_j

    # rho: average of s*G over free variables, else the midpoint of the bounds
    ub = np.inf
    lb = -np.inf
    n_free = 0
    sum_free = 0.0
    for t in range(n):
        yg = s[t] * G[t]
        if beta[t] >= C:
            if s[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif beta[t] <= 0:
            if s[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            n_free += 1
            sum_free += yg
    if n_free > 0:
        rho = sum_free / n_free
    else:
        rho = 0.5 * (ub + lb)
    coef = beta[:l] - beta[l:]
    return coef, -rho, it, converged


@dataclass(frozen=True)
class SvrModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray
    bias: float
    C: float
    gamma: float
    epsilon: float
    converged: bool = True
    n_iter: int = 0
    support_index: np.ndarray | None = None

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    def decision(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeError(f"expected {self.n_features} columns, got shape {X.shape}")
        if len(self.dual_coef) == 0:
            return np.full(len(X), self.bias)
        return rbf_kernel(X, self.support_vectors, self.gamma) @ self.dual_coef + self.bias


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeError("X must be 2-D with one row per target")
    if len(y) < 2:
        raise DataError("need at least 2 training rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DataError("non-finite training data")
    return X, y


def svr_fit(X, y, C: float = 1.0, gamma: float = 0.1, epsilon: float = 0.1,
            tol: float = KKT_TOL, max_iter: int = MAX_ITER) -> SvrModel:
    """Train an RBF epsilon-SVR. Stops when the maximal KKT violation drops below ``tol``."""
    X, y = _check_xy(X, y)
    if C <= 0 or gamma <= 0 or epsilon < 0:
        raise ValueError("need C > 0, gamma > 0, epsilon >= 0")
    K = rbf_kernel(X, X, gamma)
    coef, bias, n_iter, converged = _smo(K, y, float(C), float(epsilon), float(tol), int(max_iter))
    sv = np.abs(coef) > 0
    return SvrModel(
        support_vectors=X[sv].copy(),
        dual_coef=coef[sv].copy(),
        bias=float(bias),
        C=float(C),
        gamma=float(gamma),
        epsilon=float(epsilon),
        converged=bool(converged),
        n_iter=int(n_iter),
        support_index=np.flatnonzero(sv),
    )


def svr_objectives(model: SvrModel, X, y) -> tuple[float, float]:
    """(primal, dual) objective values of a fitted model on its training set.

    primal = 0.5 ||w||^2 + C sum max(0, |y - f(x)| - eps)
    dual   = -0.5 c'Kc - eps sum|c| + y'c, with c the full coefficient vector
    """
    X, y = _check_xy(X, y)
    K = rbf_kernel(X, X, model.gamma)
    if model.support_index is None:
        raise ValueError("model does not record its training rows")
    coef = np.zeros(len(y))
    coef[model.support_index] = model.dual_coef
    wnorm = float(coef @ K @ coef)
    f = K @ coef + model.bias
    primal = 0.5 * wnorm + model.C * float(np.sum(np.maximum(0.0, np.abs(y - f) - model.epsilon)))
    dual = -0.5 * wnorm - model.epsilon * float(np.sum(np.abs(coef))) + float(y @ coef)
    return primal, dual
