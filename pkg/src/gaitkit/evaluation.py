"""Stratified k-fold cross-validation and confusion-matrix reporting.

Fold RNG: ``numpy.random.Generator(PCG64(seed))`` (numpy >= 1.17 stream),
one ``permutation`` call per class, classes visited in sorted label order.
Rows of each class are dealt round-robin to folds; the deal continues from
the fold where the previous class stopped so overall fold sizes stay level.
"""
from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classifiers import DISPLAY_NAMES, Hyperparams, resolve_kind, train
from .errors import GaitkitError, InvalidArgument, StratificationError
from .features import FeatureMatrix, apply_normalizer, fit_normalizer

NORMALIZE_MODES = ("per-fold", "global", "none")
FOLD_RNG = "numpy.PCG64"
TIMING_KEYS = ("train_seconds", "eval_seconds")


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


@dataclass
class EvalReport:
    classifier: str
    k: int
    seed: int
    classes: list
    confusion: np.ndarray
    train_seconds: float = 0.0
    eval_seconds: float = 0.0
    n_features: int | None = None
    feature_set: str = "all"
    models: list = field(default_factory=list, repr=False, compare=False)

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.confusion) / self.confusion.sum())

    @property
    def tpr(self) -> list:
        support = self.confusion.sum(axis=1)
        return [float(self.confusion[c, c] / s) if s else None for c, s in enumerate(support)]

    @property
    def fnr(self) -> list:
        return [None if t is None else 1.0 - t for t in self.tpr]

    @property
    def seconds(self) -> float:
        return self.train_seconds + self.eval_seconds

    def to_json(self) -> dict:
        return {
            "classifier": self.classifier,
            "k": self.k,
            "seed": self.seed,
            "feature_set": self.feature_set,
            "n_features": self.n_features,
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
            "classes": list(self.classes),
            "tpr": self.tpr,
            "fnr": self.fnr,
            "train_seconds": self.train_seconds,
            "eval_seconds": self.eval_seconds,
        }

    @classmethod
    def from_json(cls, d: dict) -> "EvalReport":
        return cls(d["classifier"], d["k"], d["seed"], list(d["classes"]),
                   np.asarray(d["confusion"], dtype=np.int64), d.get("train_seconds", 0.0),
                   d.get("eval_seconds", 0.0), d.get("n_features"), d.get("feature_set", "all"))


def make_folds(labels, k: int, seed: int) -> FoldPlan:
    if k < 2:
        raise InvalidArgument("k must be >= 2")
    labels = np.asarray(labels, dtype=object)
    rng = np.random.Generator(np.random.PCG64(seed))
    assignments = np.full(len(labels), -1, dtype=np.int64)
    nxt = 0
    for label in sorted(set(labels.tolist())):
        rows = np.flatnonzero(labels == label)
        if len(rows) < k:
            raise StratificationError(f"class {label!r} has {len(rows)} rows, fewer than k={k}", label)
        for pos, row in enumerate(rng.permutation(rows)):
            assignments[row] = (nxt + pos) % k
        nxt = (nxt + len(rows)) % k
    return FoldPlan(k, assignments, seed)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("GAITKIT_THREADS", "1")))
    except ValueError:
        return 1


def _run_fold(fold, m, kind, hp, plan, normalize_mode, global_params, select):
    train_rows, test_rows = plan.train_rows(fold), plan.test_rows(fold)
    train_m, test_m = m.take(train_rows), m.take(test_rows)
    t0 = time.perf_counter()
    if normalize_mode == "per-fold":
        params = fit_normalizer(train_m)
        train_m, test_m = apply_normalizer(train_m, params), apply_normalizer(test_m, params)
    elif normalize_mode == "global":
        train_m, test_m = apply_normalizer(train_m, global_params), apply_normalizer(test_m, global_params)
    if select is not None:
        names = select(train_m)
        train_m, test_m = train_m.select(names), test_m.select(names)
    model = train(kind, train_m, hp)
    t1 = time.perf_counter()
    pred = model.predict(test_m)
    t2 = time.perf_counter()
    return test_m.labels, pred, t1 - t0, t2 - t1, model


def cross_validate(m: FeatureMatrix, kind: str, hp: Hyperparams | None = None,
                   plan: FoldPlan | None = None, normalize_mode: str = "per-fold",
                   select=None, threads: int | None = None, keep_models: bool = False) -> EvalReport:
    """Hold out each fold once and pool all predictions into one confusion matrix.

    ``select`` is an optional callable ``FeatureMatrix -> names`` run on each
    normalised training fold (nested selection).
    """
    kind = resolve_kind(kind)
    hp = hp or Hyperparams()
    if normalize_mode not in NORMALIZE_MODES:
        raise InvalidArgument(f"normalize_mode must be one of {NORMALIZE_MODES}")
    plan = plan or make_folds(m.labels, 5, 0)
    if len(plan.assignments) != len(m):
        raise InvalidArgument("fold plan does not cover the matrix rows")
    classes = m.classes
    global_params = fit_normalizer(m) if normalize_mode == "global" else None

    def run(fold):
        try:
            return _run_fold(fold, m, kind, hp, plan, normalize_mode, global_params, select)
        except GaitkitError as exc:
            raise type(exc)(f"fold {fold}: {exc}") from exc

    threads = threads or default_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(plan.k)))
    else:
        results = [run(f) for f in range(plan.k)]

    lookup = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    train_s = eval_s = 0.0
    for truth, pred, ts, es, _ in results:
        for t, p in zip(truth, pred):
            confusion[lookup[t], lookup[p]] += 1
        train_s += ts
        eval_s += es
    report = EvalReport(kind, plan.k, plan.seed, classes, confusion, train_s, eval_s,
                        n_features=len(m.names))
    if keep_models:
        report.models = [r[4] for r in results]
    return report


# -- rendering -----------------------------------------------------------

def _pct(x) -> str:
    return "n/a" if x is None else f"{100 * x:.1f}%"


def render_report(r: EvalReport) -> str:
    lines = [f"{DISPLAY_NAMES.get(r.classifier, r.classifier)} ({r.classifier}), "
             f"{r.k}-fold CV, seed {r.seed}, {r.n_features} features",
             f"Accuracy: {_pct(r.accuracy)}   Speed (s): {r.seconds:.3f}", ""]
    width = max(6, *(len(str(c)) for c in r.classes))
    lines.append(" " * (width + 2) + "".join(f"{c:>{width + 1}}" for c in r.classes) + "     TPR     FNR")
    for c, row in enumerate(r.confusion):
        lines.append(f"{r.classes[c]:>{width}}  " + "".join(f"{v:>{width + 1}d}" for v in row)
                     + f"  {_pct(r.tpr[c]):>6}  {_pct(r.fnr[c]):>6}")
    return "\n".join(lines) + "\n"


def report_render(r: EvalReport) -> tuple:
    """(aligned text, JSON string) carrying identical numbers."""
    return render_report(r), json.dumps(r.to_json(), indent=1)


def comparison_table(reports, title: str = "") -> str:
    """One column per classifier, rows Accuracy and Speed (s)."""
    reports = list(reports)
    heads = [DISPLAY_NAMES.get(r.classifier, r.classifier) for r in reports]
    w0 = len("Speed (s)")
    widths = [max(len(h), 8) for h in heads]
    lines = [title] if title else []
    lines.append(" " * w0 + "".join(f"  {h:>{w}}" for h, w in zip(heads, widths)))
    lines.append(f"{'Accuracy':<{w0}}" + "".join(f"  {_pct(r.accuracy):>{w}}" for r, w in zip(reports, widths)))
    lines.append(f"{'Speed (s)':<{w0}}" + "".join(f"  {r.seconds:>{w}.3f}" for r, w in zip(reports, widths)))
    return "\n".join(lines) + "\n"


def comparison_json(reports) -> dict:
    reports = list(reports)
    return {
        "classifiers": [r.classifier for r in reports],
        "accuracy": {r.classifier: r.accuracy for r in reports},
        "timing": {r.classifier: {k: getattr(r, k) for k in TIMING_KEYS} for r in reports},
    }


def strip_timing(obj):
    """Drop wall-clock fields recursively; what remains is run-deterministic."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_KEYS and k != "timing"}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj
