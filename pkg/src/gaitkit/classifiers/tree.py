"""Binary CART tree: Gini impurity, midpoint thresholds, no pruning."""
import numpy as np


def gini(counts: np.ndarray) -> np.ndarray:
    n = counts.sum(axis=-1, keepdims=True)
    p = counts / np.where(n > 0, n, 1)
    return 1.0 - (p ** 2).sum(axis=-1)


def best_split(X, y, n_classes, min_leaf=1):
    """Return (feature, threshold, weighted_gini) or None when no split is allowed.

    Ties go to the lower feature index, then the lower threshold.
    """
    n, d = X.shape
    if n < 2:
        return None
    best = None
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), y[order]] = 1
        left = np.cumsum(onehot, axis=0)[:-1]  # row i: counts of xs[:i+1]
        right = left[-1] + onehot[-1] - left
        n_left = np.arange(1, n)
        ok = (xs[1:] != xs[:-1]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
        if not ok.any():
            continue
        score = (n_left * gini(left) + (n - n_left) * gini(right)) / n
        score = np.where(ok, score, np.inf)
        i = int(np.argmin(score))
        if best is None or score[i] < best[2]:
            lo, hi = xs[i], xs[i + 1]
            thr = lo + (hi - lo) / 2
            if not lo <= thr < hi:
                thr = lo
            best = (j, float(thr), float(score[i]))
    return best


def fit(X, y, n_classes, hp):
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(rows):
        counts = np.bincount(y[rows], minlength=n_classes)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(int(np.argmax(counts)))
        return len(feature) - 1, counts

    root, counts = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)), counts, 0)]
    while stack:
        node, rows, counts, depth = stack.pop()
        if np.count_nonzero(counts) <= 1 or len(rows) < 2 * hp.min_leaf:
            continue
        if hp.max_depth is not None and depth >= hp.max_depth:
            continue
        split = best_split(X[rows], y[rows], n_classes, hp.min_leaf)
        if split is None:
            continue
        j, thr, _ = split
        go_left = X[rows, j] <= thr
        feature[node], threshold[node] = j, thr
        lrows, rrows = rows[go_left], rows[~go_left]
        left[node], lc = new_node(lrows)
        right[node], rc = new_node(rrows)
        stack.append((right[node], rrows, rc, depth + 1))
        stack.append((left[node], lrows, lc, depth + 1))
    return {
        "feature": np.asarray(feature, dtype=np.int64),
        "threshold": np.asarray(threshold, dtype=float),
        "left": np.asarray(left, dtype=np.int64),
        "right": np.asarray(right, dtype=np.int64),
        "value": np.asarray(value, dtype=np.int64),
    }


def predict(params, X):
    feature, threshold = params["feature"], params["threshold"]
    left, right, value = params["left"], params["right"], params["value"]
    out = np.empty(len(X), dtype=np.int64)
    for r, x in enumerate(X):
        node = 0
        while feature[node] >= 0:
            node = left[node] if x[feature[node]] <= threshold[node] else right[node]
        out[r] = value[node]
    return out


def depth(params) -> int:
    def walk(node):
        if params["feature"][node] < 0:
            return 0
        return 1 + max(walk(params["left"][node]), walk(params["right"][node]))
    return walk(0)
