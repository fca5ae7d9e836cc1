from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import InvalidArgument, SchemaError
from ..features import FeatureMatrix

MODEL_FORMAT = "gaitkit-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class TreeParams:
    min_leaf: int = 1
    max_depth: int | None = None


@dataclass(frozen=True)
class KnnParams:
    k: int = 1


@dataclass(frozen=True)
class LdaParams:
    ridge: float = 1e-6


@dataclass(frozen=True)
class SvmParams:
    C: float = 1.0
    tolerance: float = 1e-4
    max_passes: int = 2000  # iteration budget is max_passes * n_pair_rows


@dataclass(frozen=True)
class NbParams:
    variance_floor: float = 1e-9


@dataclass(frozen=True)
class Hyperparams:
    tree: TreeParams = field(default_factory=TreeParams)
    knn: KnnParams = field(default_factory=KnnParams)
    lda: LdaParams = field(default_factory=LdaParams)
    svm: SvmParams = field(default_factory=SvmParams)
    nb: NbParams = field(default_factory=NbParams)

    def __post_init__(self):
        if self.tree.min_leaf < 1 or (self.tree.max_depth is not None and self.tree.max_depth < 0):
            raise InvalidArgument("tree.min_leaf must be >= 1 and max_depth >= 0")
        if self.knn.k < 1:
            raise InvalidArgument("knn.k must be >= 1")
        if self.lda.ridge < 0:
            raise InvalidArgument("lda.ridge must be >= 0")
        if self.svm.C <= 0 or self.svm.tolerance <= 0 or self.svm.max_passes < 1:
            raise InvalidArgument("svm C, tolerance and max_passes must be positive")
        if self.nb.variance_floor <= 0:
            raise InvalidArgument("nb.variance_floor must be positive")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "Hyperparams":
        return cls(TreeParams(**d.get("tree", {})), KnnParams(**d.get("knn", {})),
                   LdaParams(**d.get("lda", {})), SvmParams(**d.get("svm", {})),
                   NbParams(**d.get("nb", {})))


def _encode(v):
    if isinstance(v, np.ndarray):
        return {"dtype": str(v.dtype), "shape": list(v.shape), "data": v.ravel().tolist()}
    return v


def _decode(v):
    if isinstance(v, dict) and {"dtype", "shape", "data"} <= v.keys():
        return np.asarray(v["data"], dtype=v["dtype"]).reshape(v["shape"])
    return v


@dataclass(frozen=True)
class TrainedModel:
    """An immutable fitted classifier; ``params`` holds kind-specific state."""

    kind: str
    feature_names: tuple
    classes: tuple
    hyperparams: Hyperparams
    params: dict

    def _matrix(self, X) -> np.ndarray:
        if isinstance(X, FeatureMatrix):
            if tuple(X.names) != tuple(self.feature_names):
                raise SchemaError(f"{self.kind}: input features differ from training schema")
            X = X.values
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.feature_names):
            raise SchemaError(f"{self.kind}: expected {len(self.feature_names)} features, got {X.shape[1]}")
        return X

    def predict_index(self, X) -> np.ndarray:
        from . import REGISTRY
        return REGISTRY[self.kind].predict(self.params, self._matrix(X))

    def predict(self, X) -> np.ndarray:
        classes = np.asarray(self.classes, dtype=object)
        return classes[self.predict_index(X)]

    def to_json(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": self.kind,
            "hyperparams": self.hyperparams.to_json(),
            "feature_names": list(self.feature_names),
            "classes": list(self.classes),
            "params": {k: _encode(v) for k, v in self.params.items()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, d: dict) -> "TrainedModel":
        if d.get("format") != MODEL_FORMAT or d.get("version") != MODEL_VERSION:
            raise SchemaError(f"unsupported model document {d.get('format')!r} v{d.get('version')}")
        return cls(d["kind"], tuple(d["feature_names"]), tuple(d["classes"]),
                   Hyperparams.from_json(d["hyperparams"]),
                   {k: _decode(v) for k, v in d["params"].items()})

    @classmethod
    def loads(cls, text: str) -> "TrainedModel":
        return cls.from_json(json.loads(text))


def encode_labels(m: FeatureMatrix):
    """(X, y) with y as indices into the sorted class list."""
    classes = tuple(sorted(set(m.labels.tolist())))
    lookup = {c: i for i, c in enumerate(classes)}
    y = np.fromiter((lookup[c] for c in m.labels), dtype=np.int64, count=len(m))
    return np.asarray(m.values, dtype=float), y, classes
