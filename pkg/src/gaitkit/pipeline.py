"""Stage functions shared by the CLI and the scripts.

Every stage reads the previous stage's artifact from disk and writes its own,
so any stage can be rerun in isolation.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import AXES, NODES, SAMPLE_RATE, WINDOW_SECONDS
from .classifiers import KINDS, Hyperparams, resolve_kind
from .errors import ConfigError, GaitkitError, InvalidArgument, MalformedInput, StageError
from .evaluation import (EvalReport, comparison_json, comparison_table, cross_validate,
                         make_folds, render_report)
from .features import FeatureMatrix, extract_matrix, normalize
from .preprocess import (CalibrationConfig, Window, discover_recordings, load_recording,
                         preprocess_recording)
from .selection import SelectionResult, best_first_search

log = logging.getLogger(__name__)

WINDOW_COLUMNS = ["subject", "session", "window", "sample"] + [f"{n}_{a}" for n in NODES for a in AXES]


@dataclass
class PipelineConfig:
    out: Path = Path("gaitkit_out")
    data_dir: Path | None = None
    calibration: Path | None = None
    window_seconds: float = WINDOW_SECONDS
    sample_rate: float = SAMPLE_RATE
    k_folds: int = 5
    seed: int = 0
    normalize_mode: str = "per-fold"
    selection: str = "none"
    nested_selection: bool = False
    classifiers: tuple = KINDS
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    threads: int | None = None

    def __post_init__(self):
        self.out = Path(self.out)
        if self.data_dir is None:
            self.data_dir = self.out / "data"
        self.data_dir = Path(self.data_dir)
        n = self.window_seconds * self.sample_rate
        if abs(n - round(n)) > 1e-9 or n < 1:
            raise ConfigError("window_seconds * sample_rate must be a positive integer")
        if self.k_folds < 2:
            raise ConfigError("k_folds must be >= 2")
        if self.normalize_mode not in ("per-fold", "global"):
            raise ConfigError("normalize must be 'per-fold' or 'global'")
        if self.selection not in ("none", "cfs-bestfirst"):
            raise ConfigError("select must be 'none' or 'cfs-bestfirst'")
        self.classifiers = tuple(resolve_kind(c) for c in self.classifiers)

    @property
    def windows_path(self) -> Path:
        return self.out / "windows.csv"

    @property
    def features_csv(self) -> Path:
        return self.out / "features.csv"

    @property
    def features_json(self) -> Path:
        return self.out / "features.json"

    @property
    def selection_path(self) -> Path:
        return self.out / "selection.json"

    def reports_dir(self, feature_set: str) -> Path:
        return self.out / "reports" / feature_set


def parse_hyperparams(overrides) -> Hyperparams:
    """Apply ``group.name=value`` overrides (e.g. ``knn.k=3``) to the defaults."""
    d = Hyperparams().to_json()
    for item in overrides:
        try:
            key, value = item.split("=", 1)
            group, name = key.strip().split(".", 1)
        except ValueError:
            raise ConfigError(f"hyperparameter override {item!r} is not group.name=value") from None
        if group not in d or name not in d[group]:
            raise ConfigError(f"unknown hyperparameter {key!r}")
        value = value.strip()
        d[group][name] = None if value.lower() == "none" else json.loads(value)
    try:
        return Hyperparams.from_json(d)
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from exc


# -- windows artifact ------------------------------------------------------

def write_windows(windows, path: Path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(WINDOW_COLUMNS)
    for win in windows:
        block = np.hstack([win.nodes[n] for n in NODES])
        for i, row in enumerate(block):
            w.writerow([win.subject_id, win.session_id, win.window_index, i] + [repr(float(v)) for v in row])
    path.write_text(buf.getvalue())


def read_windows(path: Path) -> list:
    rows = list(csv.reader(io.StringIO(Path(path).read_text())))
    if rows[0] != WINDOW_COLUMNS:
        raise MalformedInput(f"{path}: unexpected window header")
    groups: dict = {}
    order = []
    for r in rows[1:]:
        key = (r[0], r[1], int(r[2]))
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append([float(v) for v in r[4:]])
    out = []
    for key in order:
        block = np.asarray(groups[key])
        out.append(Window(key[0], key[1], key[2], {n: block[:, 3 * i:3 * i + 3] for i, n in enumerate(NODES)}))
    return out


# -- stages ------------------------------------------------------------------

def stage_preprocess(cfg: PipelineConfig) -> list:
    cal = CalibrationConfig.load(cfg.calibration) if cfg.calibration else None
    found = discover_recordings(cfg.data_dir)
    if not found:
        raise MalformedInput(f"no <subject>_<session>_<node>.csv files in {cfg.data_dir}")
    windows = []
    for subject, session, paths in found:
        rec = load_recording(paths, subject, session)
        windows += preprocess_recording(rec, cal, cfg.sample_rate, cfg.window_seconds)
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_windows(windows, cfg.windows_path)
    log.info("preprocess: %d recordings -> %d windows", len(found), len(windows))
    return windows


def stage_extract(cfg: PipelineConfig, windows=None) -> FeatureMatrix:
    windows = read_windows(cfg.windows_path) if windows is None else windows
    m = extract_matrix(windows)
    cfg.out.mkdir(parents=True, exist_ok=True)
    cfg.features_csv.write_text(m.to_csv())
    cfg.features_json.write_text(m.dumps() + "\n")
    n_deg = sum(1 for d in m.degenerate if d)
    log.info("extract: %d x %d features (%d degenerate windows)", len(m), len(m.names), n_deg)
    return m


def load_features(cfg: PipelineConfig) -> FeatureMatrix:
    return FeatureMatrix.from_json(json.loads(cfg.features_json.read_text()))


def stage_select(cfg: PipelineConfig, m: FeatureMatrix | None = None) -> SelectionResult:
    m = load_features(cfg) if m is None else m
    result = best_first_search(normalize(m))
    cfg.selection_path.write_text(result.dumps() + "\n")
    log.info("select: %d features, merit %.4f, %d subsets evaluated",
             len(result.selected), result.merit, result.visited)
    return result


def _nested_selector(train_m: FeatureMatrix) -> list:
    return best_first_search(train_m).selected


def stage_evaluate(cfg: PipelineConfig, m: FeatureMatrix | None = None,
                   selection: SelectionResult | None = None, feature_set: str = "all") -> list:
    m = load_features(cfg) if m is None else m
    select = None
    if feature_set == "selected":
        if cfg.nested_selection:
            select = _nested_selector
        else:
            if selection is None:
                selection = SelectionResult.from_json(json.loads(cfg.selection_path.read_text()))
            m = m.select(selection.selected)
    plan = make_folds(m.labels, cfg.k_folds, cfg.seed)
    out_dir = cfg.reports_dir(feature_set)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = []
    for kind in cfg.classifiers:
        r = cross_validate(m, kind, cfg.hyperparams, plan, cfg.normalize_mode, select, cfg.threads)
        r.feature_set = "selected-nested" if select is not None else feature_set
        (out_dir / f"{kind}.json").write_text(json.dumps(r.to_json(), indent=1) + "\n")
        (out_dir / f"{kind}.txt").write_text(render_report(r))
        reports.append(r)
        log.info("evaluate[%s] %s: accuracy %.4f", feature_set, kind, r.accuracy)
    write_comparison(reports, cfg.out, feature_set, m)
    return reports


def _title(feature_set: str, n: int, k: int) -> str:
    what = "all features" if feature_set == "all" else f"{n} selected features"
    return f"Classification results using {what}, {k}-fold cross validation"


def write_comparison(reports, out: Path, feature_set: str, m: FeatureMatrix | None = None) -> str:
    n = len(m.names) if m is not None else (reports[0].n_features if reports else 0)
    text = comparison_table(reports, _title(feature_set, n, reports[0].k if reports else 0))
    (out / f"comparison_{feature_set}.txt").write_text(text)
    (out / f"comparison_{feature_set}.json").write_text(json.dumps(comparison_json(reports), indent=1) + "\n")
    return text


def load_reports(out: Path, feature_set: str) -> list:
    d = Path(out) / "reports" / feature_set
    by_kind = {p.stem: EvalReport.from_json(json.loads(p.read_text())) for p in d.glob("*.json")}
    return [by_kind[k] for k in KINDS if k in by_kind]


def _tagged(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (GaitkitError, OSError, ValueError) as exc:
        raise StageError(name, exc) from exc


def run(cfg: PipelineConfig) -> dict:
    """Full chain; returns {feature_set: [EvalReport]}.

    Failures are re-raised as StageError naming the stage that broke.
    """
    windows = _tagged("preprocess", stage_preprocess, cfg)
    m = _tagged("extract", stage_extract, cfg, windows)
    results = {"all": _tagged("evaluate", stage_evaluate, cfg, m, feature_set="all")}
    if cfg.selection == "cfs-bestfirst":
        sel = None if cfg.nested_selection else _tagged("select", stage_select, cfg, m)
        results["selected"] = _tagged("evaluate", stage_evaluate, cfg, m, sel, feature_set="selected")
    return results
