"""Raw recording ingestion and conditioning.

Pipeline per subject/session: parse -> fill_nulls -> calibrate -> resample
(shared 50 Hz grid for both nodes) -> remove_mean -> segment.
"""
from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from . import AXES, NODES, SAMPLE_RATE, WINDOW_SECONDS
from .errors import ConfigError, InsufficientData, MalformedInput

CSV_COLUMNS = ("timestamp", "ax", "ay", "az")
FILENAME_RE = re.compile(r"^(?P<subject>[^_]+)_(?P<session>[^_]+)_(?P<node>ankle|chest)\.csv$")


@dataclass(frozen=True)
class NodeSamples:
    """Time-stamped tri-axial samples of one sensor node.

    ``acc`` has shape (n, 3); null cells are NaN.
    """

    t: np.ndarray
    acc: np.ndarray

    def __post_init__(self):
        if self.acc.shape != (len(self.t), 3):
            raise MalformedInput(f"acc shape {self.acc.shape} does not match {len(self.t)} timestamps")


@dataclass(frozen=True)
class RawRecording:
    subject_id: str
    session_id: str
    nodes: dict  # node name -> NodeSamples

    def __post_init__(self):
        for node in NODES:
            if node not in self.nodes:
                raise MalformedInput(f"recording {self.subject_id}/{self.session_id} lacks node {node!r}")
        for node, ns in self.nodes.items():
            if np.any(np.diff(ns.t) <= 0):
                raise MalformedInput(f"{node}: timestamps not strictly increasing")
            counts = np.sum(~np.isnan(ns.acc), axis=0)
            for axis, c in zip(AXES, counts):
                if c < 2:
                    raise InsufficientData(f"{node}.{axis}: {c} non-null samples, need >= 2")

    def to_csv(self, node: str) -> str:
        ns = self.nodes[node]
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for ti, row in zip(ns.t, ns.acc):
            cells = ["" if math.isnan(v) else repr(float(v)) for v in row]
            buf.write(f"{float(ti)!r}," + ",".join(cells) + "\n")
        return buf.getvalue()


@dataclass(frozen=True)
class CalibrationConfig:
    """Per node/axis ``(offset, scale)``; a reading r maps to (r - offset) * scale."""

    entries: dict = field(default_factory=dict)  # (node, axis) -> (offset, scale)

    def __post_init__(self):
        for key, (_, scale) in self.entries.items():
            if scale == 0:
                raise ConfigError(f"scale for {key[0]}.{key[1]} is zero")

    @classmethod
    def identity(cls) -> "CalibrationConfig":
        return cls({(n, a): (0.0, 1.0) for n in NODES for a in AXES})

    @classmethod
    def parse(cls, text: str) -> "CalibrationConfig":
        """Parse ``<node>.<axis>.offset = value`` / ``...scale = value`` lines.

        An axis mentioned with only one of the two keys gets the neutral value
        for the other (offset 0, scale 1).
        """
        raw: dict = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            m = re.match(r"^([A-Za-z]+)\.([A-Za-z]+)\.(offset|scale)\s*[=:]\s*(\S+)$", line)
            if m is None:
                raise ConfigError(f"line {lineno}: cannot parse {line!r}")
            node, axis, kind, value = m.groups()
            node, axis = node.lower(), axis.lower()
            if node not in NODES or axis not in AXES:
                raise ConfigError(f"line {lineno}: unknown node/axis {node}.{axis}")
            try:
                raw.setdefault((node, axis), {})[kind] = float(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: {value!r} is not a number") from None
        return cls({k: (v.get("offset", 0.0), v.get("scale", 1.0)) for k, v in raw.items()})

    @classmethod
    def load(cls, path) -> "CalibrationConfig":
        return cls.parse(Path(path).read_text())


@dataclass(frozen=True)
class UniformSeries:
    """Both nodes on one grid ``t0 + i / sample_rate``; ``nodes[n]`` is (N, 3)."""

    subject_id: str
    session_id: str
    t0: float
    nodes: dict
    sample_rate: float = SAMPLE_RATE

    def __len__(self):
        return len(next(iter(self.nodes.values())))

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) / self.sample_rate


@dataclass(frozen=True)
class Window:
    subject_id: str
    session_id: str
    window_index: int
    nodes: dict  # node -> (250, 3)

    @property
    def label(self) -> str:
        return self.subject_id


def _parse_cell(cell: str, what: str) -> float:
    cell = cell.strip()
    if cell == "":
        return math.nan
    try:
        return float(cell)
    except ValueError:
        raise MalformedInput(f"{what}: {cell!r} is not a number") from None


def parse_node_csv(csv_text: str, node: str = "node") -> NodeSamples:
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise MalformedInput(f"{node}: empty CSV") from None
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise MalformedInput(f"{node}: missing column(s) {missing}")
    cols = [header.index(c) for c in CSV_COLUMNS]
    t, acc = [], []
    for lineno, row in enumerate(reader, 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < len(header):
            row = row + [""] * (len(header) - len(row))
        ts = _parse_cell(row[cols[0]], f"{node} line {lineno}")
        if math.isnan(ts):
            raise MalformedInput(f"{node} line {lineno}: empty timestamp")
        t.append(ts)
        acc.append([_parse_cell(row[i], f"{node} line {lineno}") for i in cols[1:]])
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.diff(t_arr) <= 0):
        bad = int(np.argmax(np.diff(t_arr) <= 0)) + 2
        raise MalformedInput(f"{node}: non-monotonic timestamp at data row {bad}")
    return NodeSamples(t_arr, np.asarray(acc, dtype=float).reshape(-1, 3))


def parse_recording(csv_text, subject_id: str, session_id: str) -> RawRecording:
    """Build a RawRecording from CSV text.

    ``csv_text`` is either a mapping ``{node: per-node CSV}`` (the on-disk
    layout, one file per node) or a single CSV carrying an extra ``node``
    column.
    """
    if isinstance(csv_text, Mapping):
        texts = dict(csv_text)
    else:
        lines = csv_text.splitlines()
        if not lines:
            raise MalformedInput("empty CSV")
        header = [h.strip().lower() for h in lines[0].split(",")]
        if "node" not in header:
            raise MalformedInput("combined CSV lacks a 'node' column")
        ni = header.index("node")
        rest = [h for i, h in enumerate(header) if i != ni]
        per: dict = {}
        for line in lines[1:]:
            if not line.strip():
                continue
            cells = line.split(",")
            node = cells[ni].strip().lower()
            per.setdefault(node, [",".join(rest)]).append(
                ",".join(c for i, c in enumerate(cells) if i != ni))
        texts = {n: "\n".join(v) + "\n" for n, v in per.items()}
    for node in NODES:
        if node not in texts:
            raise MalformedInput(f"missing node {node!r}")
    nodes = {node: parse_node_csv(texts[node], node) for node in NODES}
    return RawRecording(subject_id, session_id, nodes)


def discover_recordings(data_dir) -> list:
    """Group ``<subject>_<session>_<node>.csv`` files into (subject, session, {node: path})."""
    groups: dict = {}
    for p in sorted(Path(data_dir).glob("*.csv")):
        m = FILENAME_RE.match(p.name)
        if m is None:
            continue
        groups.setdefault((m["subject"], m["session"]), {})[m["node"]] = p
    out = []
    for (subject, session), paths in sorted(groups.items()):
        missing = [n for n in NODES if n not in paths]
        if missing:
            raise MalformedInput(f"{subject}_{session}: missing node file(s) {missing}")
        out.append((subject, session, paths))
    return out


def load_recording(paths: Mapping, subject_id: str, session_id: str) -> RawRecording:
    return parse_recording({n: Path(p).read_text() for n, p in paths.items()}, subject_id, session_id)


def _fill_column(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    ok = ~np.isnan(v)
    if not ok.any():
        raise InsufficientData("axis has no non-null samples")
    if ok.all():
        return v.copy()
    # np.interp clamps outside the known range: constant extrapolation at the edges
    return np.interp(t, t[ok], v[ok])


def fill_nulls(rec: RawRecording) -> RawRecording:
    nodes = {}
    for node, ns in rec.nodes.items():
        acc = np.column_stack([_fill_column(ns.t, ns.acc[:, j]) for j in range(3)])
        nodes[node] = NodeSamples(ns.t.copy(), acc)
    return replace(rec, nodes=nodes)


def calibrate(rec: RawRecording, cal: CalibrationConfig | None = None) -> RawRecording:
    if cal is None:
        return rec
    nodes = {}
    for node, ns in rec.nodes.items():
        acc = ns.acc.copy()
        for j, axis in enumerate(AXES):
            if (node, axis) not in cal.entries:
                raise ConfigError(f"calibration lacks {node}.{axis}")
            offset, scale = cal.entries[(node, axis)]
            acc[:, j] = (acc[:, j] - offset) * scale
        nodes[node] = NodeSamples(ns.t.copy(), acc)
    return replace(rec, nodes=nodes)


def resample(rec: RawRecording, sample_rate: float = SAMPLE_RATE,
             min_seconds: float = WINDOW_SECONDS) -> UniformSeries:
    """Linearly interpolate every node onto one shared uniform grid.

    The grid starts at the later of the nodes' first timestamps and covers
    the span where both nodes have data.
    """
    for node, ns in rec.nodes.items():
        if np.isnan(ns.acc).any():
            raise MalformedInput(f"{node}: resample requires null-free input")
    t0 = max(float(ns.t[0]) for ns in rec.nodes.values())
    t_end = min(float(ns.t[-1]) for ns in rec.nodes.values())
    span = t_end - t0
    if span < min_seconds:
        raise InsufficientData(f"node overlap {span:.3f} s is shorter than {min_seconds} s")
    n = int(math.floor(span * sample_rate + 1e-9)) + 1
    grid = t0 + np.arange(n) / sample_rate
    nodes = {
        node: np.column_stack([np.interp(grid, ns.t, ns.acc[:, j]) for j in range(3)])
        for node, ns in rec.nodes.items()
    }
    return UniformSeries(rec.subject_id, rec.session_id, t0, nodes, sample_rate)


def remove_mean(series: UniformSeries) -> UniformSeries:
    nodes = {node: a - a.mean(axis=0) for node, a in series.nodes.items()}
    return replace(series, nodes=nodes)


def segment(series: UniformSeries, window_seconds: float = WINDOW_SECONDS) -> list:
    size = int(round(window_seconds * series.sample_rate))
    n = len(series)
    if n < size:
        raise InsufficientData(f"{n} samples is fewer than one {size}-sample window")
    return [
        Window(series.subject_id, series.session_id, w,
               {node: a[w * size:(w + 1) * size].copy() for node, a in series.nodes.items()})
        for w in range(n // size)
    ]


def preprocess_recording(rec: RawRecording, cal: CalibrationConfig | None = None,
                         sample_rate: float = SAMPLE_RATE,
                         window_seconds: float = WINDOW_SECONDS) -> list:
    """Full conditioning chain for one recording, returning its windows."""
    rec = calibrate(fill_nulls(rec), cal)
    series = remove_mean(resample(rec, sample_rate, window_seconds))
    return segment(series, window_seconds)
