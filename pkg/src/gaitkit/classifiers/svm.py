"""Linear soft-margin SVM trained by SMO, combined one-vs-one.

The binary solver works on the dual

    min_a  1/2 a^T Q a - sum(a),  Q_ij = y_i y_j <x_i, x_j>,  0 <= a <= C,  y^T a = 0

and picks the maximal violating pair each step (Keerthi et al. working-set
selection). It stops when the KKT gap m(a) - M(a) drops to ``tolerance``.
"""
from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, InvalidArgument

TAU = 1e-12


@dataclass
class BinarySolution:
    alpha: np.ndarray
    w: np.ndarray
    b: float
    iterations: int
    gap: float


def smo(X, y, C=1.0, tolerance=1e-4, max_iter=100_000, pair=None) -> BinarySolution:
    """Solve one binary problem; ``y`` holds +1/-1."""
    y = np.asarray(y, dtype=float)
    n = len(y)
    K = X @ X.T
    diag = np.diag(K)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    pos = y > 0
    for it in range(max_iter + 1):
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        v = -y * grad
        i = int(np.argmax(np.where(up, v, -np.inf)))
        j = int(np.argmin(np.where(low, v, np.inf)))
        gap = v[i] - v[j]
        if gap <= tolerance:
            break
        if it == max_iter:
            raise ConvergenceError(f"SMO did not converge in {max_iter} iterations (gap {gap:.3g})", pair)
        eta = max(diag[i] + diag[j] - 2 * K[i, j], TAU)
        step = gap / eta
        step = min(step, C - alpha[i] if y[i] > 0 else alpha[i])
        step = min(step, alpha[j] if y[j] > 0 else C - alpha[j])
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        # snap to the box to keep the index sets exact
        alpha[i] = min(max(alpha[i], 0.0), C)
        alpha[j] = min(max(alpha[j], 0.0), C)
        grad += step * y * (K[:, i] - K[:, j])
    w = (alpha * y) @ X
    resid = y - X @ w
    free = (alpha > 0) & (alpha < C)
    if free.any():
        b = float(resid[free].mean())
    else:
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        b = float((resid[up].max() + resid[low].min()) / 2)
    return BinarySolution(alpha, w, b, it, float(gap))


def fit(X, y, n_classes, hp):
    if n_classes < 2:
        raise InvalidArgument("svm needs at least 2 classes")
    pairs, W, B = [], [], []
    for a in range(n_classes):
        for c in range(a + 1, n_classes):
            rows = (y == a) | (y == c)
            yy = np.where(y[rows] == a, 1.0, -1.0)
            sol = smo(X[rows], yy, hp.C, hp.tolerance, hp.max_passes * int(rows.sum()), pair=(a, c))
            pairs.append((a, c))
            W.append(sol.w)
            B.append(sol.b)
    return {"pairs": np.asarray(pairs, dtype=np.int64).reshape(-1, 2),
            "w": np.vstack(W), "b": np.asarray(B, dtype=float),
            "n_classes": np.asarray(n_classes)}


def predict(params, X):
    pairs, W, B = params["pairs"], params["w"], params["b"]
    votes = np.zeros((len(X), int(params["n_classes"])), dtype=np.int64)
    f = X @ W.T + B
    for p, (a, c) in enumerate(pairs):
        winner = np.where(f[:, p] >= 0, a, c)
        np.add.at(votes, (np.arange(len(X)), winner), 1)
    return np.argmax(votes, axis=1)
