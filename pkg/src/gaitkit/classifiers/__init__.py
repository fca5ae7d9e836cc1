"""Five classifiers behind one train/predict contract.

Every ``train_*`` function takes a FeatureMatrix and a Hyperparams and
returns an immutable TrainedModel; labels are handled as indices into the
sorted class list, and every tie is broken towards the lowest class index.
"""
from types import SimpleNamespace

from ..errors import InvalidArgument
from ..features import FeatureMatrix
from . import knn, lda, nb, svm, tree
from .base import (Hyperparams, KnnParams, LdaParams, NbParams, SvmParams, TrainedModel,
                   TreeParams, encode_labels)

KINDS = ("decision_tree", "lda", "knn", "svm_ovo", "gaussian_nb")
SHORT_NAMES = {"tree": "decision_tree", "lda": "lda", "knn": "knn", "svm": "svm_ovo", "nb": "gaussian_nb"}
DISPLAY_NAMES = {
    "decision_tree": "Decision Tree",
    "lda": "Linear Discriminant",
    "knn": "Nearest Neighbor",
    "svm_ovo": "SVM (OvO)",
    "gaussian_nb": "Naive Bayes",
}

REGISTRY = {
    "decision_tree": SimpleNamespace(fit=lambda X, y, c, hp: tree.fit(X, y, c, hp.tree), predict=tree.predict),
    "lda": SimpleNamespace(fit=lambda X, y, c, hp: lda.fit(X, y, c, hp.lda), predict=lda.predict),
    "knn": SimpleNamespace(fit=lambda X, y, c, hp: knn.fit(X, y, c, hp.knn), predict=knn.predict),
    "svm_ovo": SimpleNamespace(fit=lambda X, y, c, hp: svm.fit(X, y, c, hp.svm), predict=svm.predict),
    "gaussian_nb": SimpleNamespace(fit=lambda X, y, c, hp: nb.fit(X, y, c, hp.nb), predict=nb.predict),
}


def resolve_kind(name: str) -> str:
    kind = SHORT_NAMES.get(name, name)
    if kind not in REGISTRY:
        raise InvalidArgument(f"unknown classifier {name!r}; choose from {sorted(SHORT_NAMES)}")
    return kind


def train(kind: str, m: FeatureMatrix, hp: Hyperparams | None = None) -> TrainedModel:
    kind = resolve_kind(kind)
    hp = hp or Hyperparams()
    if len(m) == 0:
        raise InvalidArgument(f"{kind}: empty training matrix")
    X, y, classes = encode_labels(m)
    params = REGISTRY[kind].fit(X, y, len(classes), hp)
    return TrainedModel(kind, tuple(m.names), classes, hp, params)


def train_decision_tree(m, hp=None):
    return train("decision_tree", m, hp)


def train_lda(m, hp=None):
    return train("lda", m, hp)


def train_knn(m, hp=None):
    return train("knn", m, hp)


def train_svm_ovo(m, hp=None):
    return train("svm_ovo", m, hp)


def train_gaussian_nb(m, hp=None):
    return train("gaussian_nb", m, hp)


__all__ = [
    "KINDS", "DISPLAY_NAMES", "Hyperparams", "KnnParams", "LdaParams", "NbParams", "SvmParams",
    "TreeParams", "TrainedModel", "resolve_kind", "train", "train_decision_tree", "train_lda",
    "train_knn", "train_svm_ovo", "train_gaussian_nb",
]
