"""Correlation-based feature subset selection with forward best-first search.

Association between two variables is symmetric uncertainty (SU) over an
equal-width discretisation. A subset S of k features scores

    merit(S) = k * mean SU(f, class) / sqrt(k + k (k - 1) * mean SU(f, g))

which rewards class relevance and penalises redundancy inside the subset.
"""
from __future__ import annotations

import heapq
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, ShapeError
from .features import FeatureMatrix

N_BINS = 10
STALE_LIMIT = 5
# merit must beat the incumbent by more than this to reset the stale counter
IMPROVEMENT_EPS = 1e-12


@dataclass
class SelectionResult:
    selected: list
    merit: float
    visited: int
    log: list = field(default_factory=list, repr=False)  # (subset names, merit)

    def to_json(self) -> dict:
        return {"names": list(self.selected), "merit": self.merit, "visited": self.visited,
                "size": len(self.selected)}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, d: dict) -> "SelectionResult":
        return cls(list(d["names"]), float(d["merit"]), int(d["visited"]))


def discretize(x, n_bins: int = N_BINS) -> np.ndarray:
    """Equal-width bin codes over the observed range; a constant column maps to one bin."""
    x = np.asarray(x, dtype=float)
    lo, hi = x.min(), x.max()
    if hi <= lo:
        return np.zeros(len(x), dtype=int)
    codes = np.floor((x - lo) / (hi - lo) * n_bins).astype(int)
    return np.minimum(codes, n_bins - 1)


def _codes(labels) -> np.ndarray:
    _, inv = np.unique(np.asarray(labels), return_inverse=True)
    return inv.ravel()


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum())


def symmetric_uncertainty(a, b) -> float:
    """2 I(a; b) / (H(a) + H(b)) in bits for two discrete sequences; 0 if both are constant."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError(f"length mismatch: {a.shape} vs {b.shape}")
    ca, cb = _codes(a), _codes(b)
    joint = np.zeros((ca.max() + 1, cb.max() + 1))
    np.add.at(joint, (ca, cb), 1)
    ha = _entropy(joint.sum(axis=1))
    hb = _entropy(joint.sum(axis=0))
    if ha + hb == 0:
        return 0.0
    mutual = ha + hb - _entropy(joint.ravel())
    return float(np.clip(2.0 * mutual / (ha + hb), 0.0, 1.0))


class SUTable:
    """Lazily cached SU values for a feature matrix (feature-class and feature-feature)."""

    def __init__(self, m: FeatureMatrix, n_bins: int = N_BINS):
        self.names = tuple(m.names)
        self.index = {n: i for i, n in enumerate(self.names)}
        self.codes = [discretize(m.values[:, j], n_bins) for j in range(len(self.names))]
        self.class_su = np.array([symmetric_uncertainty(c, m.labels.astype(str)) for c in self.codes])
        self._ff: dict = {}

    def ff(self, i: int, j: int) -> float:
        key = (i, j) if i < j else (j, i)
        if key not in self._ff:
            self._ff[key] = 1.0 if i == j else symmetric_uncertainty(self.codes[i], self.codes[j])
        return self._ff[key]

    def merit(self, idx) -> float:
        idx = sorted(idx)
        k = len(idx)
        if k == 0:
            raise InvalidArgument("merit of an empty subset is undefined")
        r_cf = self.class_su[idx].mean()
        if k == 1:
            return float(r_cf)
        r_ff = np.mean([self.ff(i, j) for i, j in itertools.combinations(idx, 2)])
        return float(k * r_cf / np.sqrt(k + k * (k - 1) * r_ff))


def cfs_merit(subset, m: FeatureMatrix, table: SUTable | None = None) -> float:
    if len(subset) == 0:
        raise InvalidArgument("merit of an empty subset is undefined")
    table = table or SUTable(m)
    return table.merit([table.index[n] for n in subset])


def best_first_search(m: FeatureMatrix, stale_limit: int = STALE_LIMIT,
                      table: SUTable | None = None) -> SelectionResult:
    """Forward best-first search over feature subsets, starting from the empty set.

    The open list is ordered by merit (desc), then subset size (asc), then the
    sorted name tuple, which makes the search fully deterministic. Search stops
    after ``stale_limit`` consecutive expansions that fail to improve the best
    merit, or when the open list is exhausted.
    """
    if len(m.names) < 2:
        raise InvalidArgument("need at least 2 features")
    if len(set(m.labels.tolist())) < 2:
        raise InvalidArgument("need at least 2 classes")
    table = table or SUTable(m)
    names = table.names

    def key(merit, subset):
        return (-merit, len(subset), tuple(sorted(names[i] for i in subset)))

    seen = {frozenset()}
    log = []
    open_list: list = [(key(0.0, ()), frozenset())]
    best_key, best = None, None
    stale = 0
    while open_list and stale < stale_limit:
        _, subset = heapq.heappop(open_list)
        improved = False
        for j in range(len(names)):
            if j in subset:
                continue
            child = subset | {j}
            if child in seen:
                continue
            seen.add(child)
            merit = table.merit(child)
            log.append((tuple(names[i] for i in sorted(child)), merit))
            ck = key(merit, child)
            heapq.heappush(open_list, (ck, child))
            if best is None or merit > -best_key[0] + IMPROVEMENT_EPS:
                improved = True
            if best is None or ck < best_key:
                best_key, best = ck, child
        stale = 0 if improved else stale + 1
    selected = [names[i] for i in sorted(best)]
    return SelectionResult(selected, table.merit(best), len(log), log)


def exhaustive_search(m: FeatureMatrix, table: SUTable | None = None) -> SelectionResult:
    """Brute-force reference over all 2^d - 1 subsets; only sensible for small d."""
    table = table or SUTable(m)
    d = len(table.names)
    best, best_merit, log = None, -np.inf, []
    for k in range(1, d + 1):
        for idx in itertools.combinations(range(d), k):
            merit = table.merit(idx)
            log.append((tuple(table.names[i] for i in idx), merit))
            if merit > best_merit:
                best, best_merit = idx, merit
    return SelectionResult([table.names[i] for i in best], best_merit, len(log), log)
