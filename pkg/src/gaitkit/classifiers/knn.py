"""k-nearest neighbours with Euclidean distance and majority vote."""
import numpy as np

from ..errors import InvalidArgument

CHUNK = 256


def fit(X, y, n_classes, hp):
    if hp.k > len(X):
        raise InvalidArgument(f"k={hp.k} exceeds {len(X)} training rows")
    return {"X": X.copy(), "y": y.copy(), "k": np.asarray(hp.k), "n_classes": np.asarray(n_classes)}


def vote(neighbour_labels, n_classes):
    """Majority label; a tied vote goes to the tied label whose member is nearest."""
    counts = np.bincount(neighbour_labels, minlength=n_classes)
    tied = counts == counts.max()
    for lab in neighbour_labels:
        if tied[lab]:
            return lab


def predict(params, X):
    train_X, train_y = params["X"], params["y"]
    k, n_classes = int(params["k"]), int(params["n_classes"])
    out = np.empty(len(X), dtype=np.int64)
    for start in range(0, len(X), CHUNK):
        q = X[start:start + CHUNK]
        d2 = ((q[:, None, :] - train_X[None, :, :]) ** 2).sum(axis=2)
        # stable sort: equal distances keep training-row order
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        for r, idx in enumerate(nearest):
            out[start + r] = vote(train_y[idx], n_classes)
    return out
