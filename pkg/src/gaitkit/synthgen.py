"""Deterministic synthetic two-node gait recordings.

Each axis is a gravity offset plus three cadence harmonics plus Gaussian
noise, sampled at jittered timestamps with randomly nulled cells. Every
(subject, session, node) stream draws from its own ``SeedSequence`` built
from ``(seed, subject, session, node)``, so output does not depend on the
order in which streams are generated.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import AXES, NODES, SAMPLE_RATE
from .errors import InvalidArgument
from .preprocess import NodeSamples, RawRecording

N_HARMONICS = 3
GRAVITY = 9.81


@dataclass(frozen=True)
class SubjectProfile:
    subject_id: str
    cadence: float
    # node -> 3 axes x 3 harmonics
    amplitudes: dict
    phases: dict
    gravity_offset: dict  # node -> 3 axes
    noise_sigma: float = 0.15
    session_perturbation: float = 0.03

    def __post_init__(self):
        if self.cadence <= 0:
            raise InvalidArgument("cadence must be positive")
        if self.noise_sigma < 0:
            raise InvalidArgument("noise_sigma must be >= 0")
        for node in NODES:
            if np.any(np.asarray(self.amplitudes[node]) < 0):
                raise InvalidArgument("harmonic amplitudes must be >= 0")

    def to_json(self) -> dict:
        conv = lambda d: {k: np.asarray(v).tolist() for k, v in d.items()}
        return {**asdict(self), "amplitudes": conv(self.amplitudes), "phases": conv(self.phases),
                "gravity_offset": conv(self.gravity_offset)}

    @classmethod
    def from_json(cls, d: dict) -> "SubjectProfile":
        return cls(**d)


@dataclass(frozen=True)
class GenSpec:
    subjects: list
    sessions: int = 2
    duration: float = 160.0
    nominal_rate: float = SAMPLE_RATE
    timestamp_jitter: float = 0.1
    null_probability: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if self.duration < 10:
            raise InvalidArgument("duration must be >= 10 s")
        if not 0 <= self.null_probability < 0.2:
            raise InvalidArgument("null_probability must be in [0, 0.2)")
        if not 0 <= self.timestamp_jitter < 0.5:
            raise InvalidArgument("timestamp_jitter must be in [0, 0.5) to keep timestamps increasing")
        if self.sessions < 1 or not self.subjects:
            raise InvalidArgument("need at least one subject and one session")

    def to_json(self) -> dict:
        d = asdict(self)
        d["subjects"] = [s.to_json() for s in self.subjects]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "GenSpec":
        d = dict(d)
        d["subjects"] = [SubjectProfile.from_json(s) for s in d["subjects"]]
        return cls(**d)


def default_profiles(n_subjects: int = 4, seed: int = 0, cadences=None,
                     noise_sigma: float = 0.15, session_perturbation: float = 0.03) -> list:
    """Subjects with cadences evenly spread over 1.5-2.4 Hz and random harmonic shapes."""
    if cadences is None:
        cadences = [1.8] if n_subjects == 1 else np.linspace(1.5, 2.4, n_subjects).round(6).tolist()
    profiles = []
    for i, cadence in enumerate(cadences):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 7919, i]))
        amps, phases, grav = {}, {}, {}
        for node in NODES:
            a1 = rng.uniform(0.6, 1.6, 3)
            ratios = np.column_stack([np.ones(3), rng.uniform(0.2, 0.6, 3), rng.uniform(0.05, 0.3, 3)])
            amps[node] = (a1[:, None] * ratios).round(6).tolist()
            phases[node] = rng.uniform(0, 2 * np.pi, (3, N_HARMONICS)).round(6).tolist()
            tilt = rng.normal(0, 0.08, 3)
            g = np.array([0.0, 0.0, GRAVITY]) if node == "ankle" else np.array([0.0, GRAVITY, 0.0])
            grav[node] = (g + GRAVITY * tilt).round(6).tolist()
        profiles.append(SubjectProfile(f"S{i + 1}", float(cadence), amps, phases, grav,
                                       noise_sigma, session_perturbation))
    return profiles


def _node_stream(profile: SubjectProfile, node: str, cadence: float, amp_scale: np.ndarray,
                 spec: GenSpec, rng: np.random.Generator) -> NodeSamples:
    dt = 1.0 / spec.nominal_rate
    n = int(spec.duration * spec.nominal_rate)
    t0 = rng.uniform(0, 0.05)
    t = t0 + np.arange(n) * dt + rng.uniform(-spec.timestamp_jitter, spec.timestamp_jitter, n) * dt
    amps = np.asarray(profile.amplitudes[node]) * amp_scale
    phases = np.asarray(profile.phases[node])
    grav = np.asarray(profile.gravity_offset[node])
    h = np.arange(1, N_HARMONICS + 1)
    acc = np.empty((n, 3))
    for j in range(3):
        waves = amps[j][None, :] * np.sin(2 * np.pi * cadence * h[None, :] * t[:, None] + phases[j][None, :])
        acc[:, j] = grav[j] + waves.sum(axis=1)
    acc += rng.normal(0, 1, (n, 3)) * profile.noise_sigma
    if spec.null_probability > 0:
        acc[rng.random((n, 3)) < spec.null_probability] = np.nan
    return NodeSamples(t, acc)


def generate_one(spec: GenSpec, subject_index: int, session_index: int) -> RawRecording:
    profile = spec.subjects[subject_index]
    srng = np.random.default_rng(np.random.SeedSequence([spec.seed, subject_index, session_index]))
    jitter = profile.session_perturbation
    cadence = profile.cadence * (1 + jitter * srng.uniform(-1, 1))
    amp_scale = 1 + jitter * srng.uniform(-1, 1, (3, N_HARMONICS))
    nodes = {}
    for k, node in enumerate(NODES):
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, subject_index, session_index, k + 1]))
        nodes[node] = _node_stream(profile, node, cadence, amp_scale, spec, rng)
    return RawRecording(profile.subject_id, f"s{session_index + 1}", nodes)


def generate(spec: GenSpec) -> list:
    return [generate_one(spec, i, s) for i in range(len(spec.subjects)) for s in range(spec.sessions)]


def write_dataset(recordings, spec: GenSpec, out_dir) -> Path:
    """Write one CSV per subject/session/node plus ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for rec in recordings:
        for node in NODES:
            name = f"{rec.subject_id}_{rec.session_id}_{node}.csv"
            (out / name).write_text(rec.to_csv(node))
            files.append(name)
    manifest = {
        "files": files,
        "subjects": [s.subject_id for s in spec.subjects],
        "sessions": [f"s{i + 1}" for i in range(spec.sessions)],
        "spec": spec.to_json(),
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1) + "\n")
    return path
