import sys

import numpy as np
import pytest

from gaitkit.features import FeatureMatrix
from gaitkit.preprocess import NodeSamples, RawRecording, UniformSeries


def make_recording(t_ankle, acc_ankle, t_chest=None, acc_chest=None, subject="S1", session="s1"):
    t_chest = t_ankle if t_chest is None else t_chest
    acc_chest = acc_ankle if acc_chest is None else acc_chest
    return RawRecording(subject, session, {
        "ankle": NodeSamples(np.asarray(t_ankle, float), np.asarray(acc_ankle, float)),
        "chest": NodeSamples(np.asarray(t_chest, float), np.asarray(acc_chest, float)),
    })


def make_series(ankle, chest=None, t0=0.0):
    ankle = np.asarray(ankle, float)
    chest = ankle.copy() if chest is None else np.asarray(chest, float)
    return UniformSeries("S1", "s1", t0, {"ankle": ankle, "chest": chest})


def gaussian_blobs(rng, n_per_class, centres, scale=1.0):
    centres = np.asarray(centres, float)
    X = np.vstack([c + scale * rng.normal(size=(n_per_class, centres.shape[1])) for c in centres])
    y = np.repeat([f"C{i}" for i in range(len(centres))], n_per_class)
    return FeatureMatrix.from_arrays(X, y)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    lines = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
