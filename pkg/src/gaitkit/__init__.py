"""Accelerometer gait recognition: preprocessing, spectral features,
CFS selection, five classical classifiers and stratified k-fold evaluation."""

__version__ = "0.1.0"

SAMPLE_RATE = 50.0
WINDOW_SECONDS = 5.0
NODES = ("ankle", "chest")
AXES = ("x", "y", "z")
