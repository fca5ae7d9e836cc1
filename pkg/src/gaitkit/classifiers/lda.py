"""Linear discriminant analysis with a shared (pooled) covariance."""
import numpy as np

from ..errors import InvalidArgument, NumericalError

MAX_CONDITION = 1e12


def fit(X, y, n_classes, hp):
    n, d = X.shape
    counts = np.bincount(y, minlength=n_classes)
    if n_classes < 2:
        raise InvalidArgument("lda needs at least 2 classes")
    if counts.min() < 2:
        raise InvalidArgument("lda needs at least 2 rows per class")
    means = np.vstack([X[y == c].mean(axis=0) for c in range(n_classes)])
    centred = X - means[y]
    cov = centred.T @ centred / (n - n_classes) + hp.ridge * np.eye(d)
    cond = np.linalg.cond(cov)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise NumericalError(f"pooled covariance is singular (condition number {cond:.3g})")
    coef = np.linalg.solve(cov, means.T)  # (d, C): Sigma^-1 mu_c
    intercept = -0.5 * np.einsum("cd,dc->c", means, coef) + np.log(counts / n)
    return {"coef": coef, "intercept": intercept, "means": means}


def scores(params, X):
    return X @ params["coef"] + params["intercept"]


def predict(params, X):
    return np.argmax(scores(params, X), axis=1)
