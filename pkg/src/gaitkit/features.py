"""The 84-feature window descriptor and leakage-safe [0, 1] normalisation."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import AXES, NODES
from .errors import SchemaError, ShapeError
from .spectral import WINDOW_LEN, find_peaks, median_frequency, psd

AXIS_FEATURES = ("Max", "Min", "Mean", "Median", "StD", "MF", "PeakX1", "PeakX2",
                 "PeakY1", "PeakY2", "PeakFreq", "NumPeak", "IntegSpec")
MAGNITUDE_FEATURES = ("AM", "SqSum25", "SqSum75")


def feature_names() -> tuple:
    names = [f"{node.capitalize()}_{feat}_{axis.upper()}"
             for node in NODES for axis in AXES for feat in AXIS_FEATURES]
    names += [f"{node.capitalize()}_{feat}" for node in NODES for feat in MAGNITUDE_FEATURES]
    return tuple(names)


FEATURE_NAMES = feature_names()
N_FEATURES = len(FEATURE_NAMES)


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    label: str
    degenerate: frozenset = frozenset()
    names: tuple = FEATURE_NAMES

    def __post_init__(self):
        if len(self.values) != len(self.names):
            raise ShapeError(f"{len(self.values)} values for {len(self.names)} names")

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values.tolist()))


@dataclass(frozen=True)
class NormalizerParams:
    names: tuple
    clip_lo: np.ndarray
    clip_hi: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def to_json(self) -> dict:
        return {"names": list(self.names), "clip_lo": self.clip_lo.tolist(),
                "clip_hi": self.clip_hi.tolist(), "min": self.lo.tolist(), "max": self.hi.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "NormalizerParams":
        return cls(tuple(d["names"]), *(np.asarray(d[k], dtype=float)
                                        for k in ("clip_lo", "clip_hi", "min", "max")))


@dataclass(frozen=True)
class FeatureMatrix:
    """Rows of feature vectors sharing one column order.

    ``values`` is (n, d); ``labels`` has length n. ``groups`` optionally tags
    each row with its recording (``subject/session``).
    """

    names: tuple
    values: np.ndarray
    labels: np.ndarray
    degenerate: tuple = ()
    groups: tuple = ()
    normalization: NormalizerParams | None = None

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != len(self.names):
            raise ShapeError(f"values shape {self.values.shape} vs {len(self.names)} names")
        if len(self.labels) != len(self.values):
            raise ShapeError("label count does not match row count")

    @classmethod
    def from_arrays(cls, values, labels, names=None) -> "FeatureMatrix":
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if names is None:
            names = tuple(f"f{i}" for i in range(values.shape[1]))
        return cls(tuple(names), values, np.asarray([str(x) for x in labels], dtype=object))

    @classmethod
    def from_vectors(cls, vectors, groups=()) -> "FeatureMatrix":
        vectors = list(vectors)
        names = vectors[0].names
        for v in vectors:
            if v.names != names:
                raise SchemaError("feature vectors disagree on name order")
        return cls(names, np.vstack([v.values for v in vectors]),
                   np.asarray([v.label for v in vectors], dtype=object),
                   tuple(v.degenerate for v in vectors), tuple(groups))

    def __len__(self):
        return len(self.values)

    @property
    def classes(self) -> list:
        return sorted(set(self.labels.tolist()))

    def take(self, rows) -> "FeatureMatrix":
        rows = np.asarray(rows, dtype=int)
        return replace(self, values=self.values[rows], labels=self.labels[rows],
                       degenerate=tuple(self.degenerate[i] for i in rows) if self.degenerate else (),
                       groups=tuple(self.groups[i] for i in rows) if self.groups else ())

    def select(self, names) -> "FeatureMatrix":
        idx = [self.names.index(n) for n in names]
        norm = self.normalization
        if norm is not None:
            norm = NormalizerParams(tuple(names), norm.clip_lo[idx], norm.clip_hi[idx],
                                    norm.lo[idx], norm.hi[idx])
        return replace(self, names=tuple(names), values=self.values[:, idx], normalization=norm)

    def with_labels(self, labels) -> "FeatureMatrix":
        return replace(self, labels=np.asarray(labels, dtype=object))

    # -- serialisation -------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(self.names) + ["label"])
        for row, label in zip(self.values, self.labels):
            w.writerow([repr(float(v)) for v in row] + [label])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "FeatureMatrix":
        rows = list(csv.reader(io.StringIO(text)))
        header = rows[0]
        if header[-1] != "label":
            raise SchemaError("last CSV column must be 'label'")
        body = [r for r in rows[1:] if r]
        values = np.array([[float(v) for v in r[:-1]] for r in body], dtype=float).reshape(len(body), -1)
        return cls(tuple(header[:-1]), values, np.asarray([r[-1] for r in body], dtype=object))

    def to_json(self) -> dict:
        return {
            "names": list(self.names),
            "rows": self.values.tolist(),
            "labels": self.labels.tolist(),
            "groups": list(self.groups),
            "degenerate": [sorted(d) for d in self.degenerate],
            "normalization_params": None if self.normalization is None else self.normalization.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "FeatureMatrix":
        names = tuple(d["names"])
        values = np.asarray(d["rows"], dtype=float).reshape(len(d["rows"]), len(names))
        norm = d.get("normalization_params")
        return cls(names, values, np.asarray(d["labels"], dtype=object),
                   tuple(frozenset(x) for x in d.get("degenerate", [])),
                   tuple(d.get("groups", [])),
                   None if norm is None else NormalizerParams.from_json(norm))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def magnitude(window_node, n: int = WINDOW_LEN) -> np.ndarray:
    """Per-sample Euclidean norm sqrt(x^2 + y^2 + z^2) of an (n, 3) block."""
    a = np.asarray(window_node, dtype=float)
    if a.shape != (n, 3):
        raise ShapeError(f"expected ({n}, 3) samples, got {a.shape}")
    return np.sqrt(a[:, 0] ** 2 + a[:, 1] ** 2 + a[:, 2] ** 2)


def axis_features(axis_samples, n: int = WINDOW_LEN) -> tuple:
    """The 13 per-axis features, in AXIS_FEATURES order.

    Returns ``(values, degenerate)`` where ``degenerate`` names the features
    whose fallback fired (currently only ``MF`` on a zero-power spectrum).
    """
    x = np.asarray(axis_samples, dtype=float)
    if x.shape != (n,):
        raise ShapeError(f"expected {n} samples, got shape {x.shape}")
    std = 0.0 if np.ptp(x) == 0 else float(np.std(x))
    p = psd(x, n=n)
    mf, degenerate = median_frequency(p)
    peaks = find_peaks(p)
    (x1, y1), (x2, y2) = peaks.first_two()
    values = [x.max(), x.min(), x.mean(), np.median(x), std, mf,
              x1, x2, y1, y2, peaks.peak_freq, peaks.num_peaks, peaks.integ_spec]
    return np.asarray(values, dtype=float), ({"MF"} if degenerate else set())


def magnitude_features(window_node, n: int = WINDOW_LEN) -> np.ndarray:
    """[AM, SqSum25, SqSum75]; SqSum counts samples strictly below the percentile."""
    mag = magnitude(window_node, n)
    p25, p75 = np.percentile(mag, [25, 75])
    sq = mag ** 2
    return np.array([mag.mean(), sq[mag < p25].sum(), sq[mag < p75].sum()])


def assemble_vector(w, window_len: int = WINDOW_LEN) -> FeatureVector:
    parts, degenerate = [], set()
    for node in NODES:
        a = np.asarray(w.nodes[node], dtype=float)
        if a.shape != (window_len, 3):
            raise ShapeError(f"{node}: window shape {a.shape}, expected ({window_len}, 3)")
        for j, axis in enumerate(AXES):
            vals, deg = axis_features(a[:, j], window_len)
            parts.append(vals)
            degenerate |= {f"{node.capitalize()}_{f}_{axis.upper()}" for f in deg}
    for node in NODES:
        parts.append(magnitude_features(w.nodes[node], window_len))
    return FeatureVector(np.concatenate(parts), w.subject_id, frozenset(degenerate))


def extract_matrix(windows) -> FeatureMatrix:
    """Feature matrix of a window list; the window length is taken from the first window."""
    windows = list(windows)
    if not windows:
        raise ShapeError("no windows to extract features from")
    n = len(windows[0].nodes[NODES[0]])
    return FeatureMatrix.from_vectors([assemble_vector(w, n) for w in windows],
                                      groups=[f"{w.subject_id}/{w.session_id}" for w in windows])


# -- normalisation ------------------------------------------------------

def winsor_bounds(values: np.ndarray, lo_pct: float = 1.0, hi_pct: float = 99.0):
    """Outward nearest-rank percentiles per column.

    The lower bound rounds the rank down and the upper bound rounds it up, so
    both bounds are observed values; this makes refitting on normalised data a
    fixed point and leaves very small samples unclipped.
    """
    return (np.percentile(values, lo_pct, axis=0, method="lower"),
            np.percentile(values, hi_pct, axis=0, method="higher"))


def fit_normalizer(train: FeatureMatrix) -> NormalizerParams:
    if len(train) < 2:
        raise ShapeError("normaliser needs at least 2 rows")
    clip_lo, clip_hi = winsor_bounds(train.values)
    clipped = np.clip(train.values, clip_lo, clip_hi)
    return NormalizerParams(train.names, clip_lo, clip_hi, clipped.min(axis=0), clipped.max(axis=0))


def apply_normalizer(m: FeatureMatrix, params: NormalizerParams) -> FeatureMatrix:
    if tuple(m.names) != tuple(params.names):
        raise SchemaError("feature names differ from those the normaliser was fitted on")
    v = np.clip(m.values, params.clip_lo, params.clip_hi)
    span = params.hi - params.lo
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (v - params.lo) / safe, 0.0)
    # v lies in [clip_lo, clip_hi] == [lo, hi]; the clip only absorbs round-off
    return replace(m, values=np.clip(out, 0.0, 1.0), normalization=params)


def normalize(m: FeatureMatrix) -> FeatureMatrix:
    return apply_normalizer(m, fit_normalizer(m))
