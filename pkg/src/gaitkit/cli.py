"""``gaitkit`` command line: synth, preprocess, extract, select, evaluate, run, report."""
from __future__ import annotations

import contextlib
import json
import logging
import sys
from pathlib import Path

import click

from . import SAMPLE_RATE, WINDOW_SECONDS
from .classifiers import KINDS
from .errors import GaitkitError, StageError
from .evaluation import comparison_table, default_threads, render_report
from .pipeline import (PipelineConfig, load_reports, parse_hyperparams, stage_evaluate, stage_extract,
                       stage_preprocess, stage_select)
from .pipeline import run as run_pipeline
from .synthgen import GenSpec, default_profiles, generate, write_dataset


@contextlib.contextmanager
def stage(name: str):
    try:
        yield
    except StageError as exc:
        click.echo(f"error [{exc.stage}]: {exc}", err=True)
        sys.exit(2)
    except (GaitkitError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        click.echo(f"error [{name}]: {exc}", err=True)
        sys.exit(2)


def out_option(f):
    return click.option("--out", type=click.Path(file_okay=False, path_type=Path), default="gaitkit_out",
                        show_default=True, help="Directory all artifacts are read from and written to.")(f)


def eval_options(f):
    opts = [
        click.option("--seed", type=int, default=0, show_default=True, help="Fold RNG seed."),
        click.option("--k-folds", type=int, default=5, show_default=True),
        click.option("--normalize", "normalize_mode", type=click.Choice(["per-fold", "global"]),
                     default="per-fold", show_default=True),
        click.option("--select", "selection", type=click.Choice(["none", "cfs-bestfirst"]),
                     default="none", show_default=True),
        click.option("--nested", is_flag=True, help="Rerun feature selection inside every training fold."),
        click.option("--classifiers", default="tree,lda,knn,svm,nb", show_default=True,
                     help="Comma-separated subset of tree,lda,knn,svm,nb."),
        click.option("--all-classifiers", is_flag=True, help="Shorthand for all five classifiers."),
        click.option("--hp", multiple=True, metavar="GROUP.NAME=VALUE",
                     help="Hyperparameter override, e.g. knn.k=3 or svm.C=10 (repeatable)."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def make_config(out, seed=0, k_folds=5, normalize_mode="per-fold", selection="none", nested=False,
                classifiers="tree,lda,knn,svm,nb", all_classifiers=False, hp=(), data_dir=None,
                calibration=None, window_seconds=WINDOW_SECONDS, sample_rate=SAMPLE_RATE) -> PipelineConfig:
    kinds = KINDS if all_classifiers else tuple(c.strip() for c in classifiers.split(",") if c.strip())
    return PipelineConfig(out=out, data_dir=data_dir, calibration=calibration, window_seconds=window_seconds,
                          sample_rate=sample_rate, k_folds=k_folds, seed=seed, normalize_mode=normalize_mode,
                          selection=selection, nested_selection=nested, classifiers=kinds,
                          hyperparams=parse_hyperparams(hp), threads=default_threads())


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def main(verbose):
    """Accelerometer gait recognition pipeline."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@out_option
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--subjects", type=int, default=4, show_default=True)
@click.option("--sessions", type=int, default=2, show_default=True)
@click.option("--duration", type=float, default=160.0, show_default=True, help="Seconds per session.")
@click.option("--noise", type=float, default=0.15, show_default=True, help="Noise sigma.")
@click.option("--session-perturbation", type=float, default=0.03, show_default=True)
@click.option("--jitter", type=float, default=0.1, show_default=True,
              help="Timestamp jitter as a fraction of the nominal interval.")
@click.option("--null-prob", type=float, default=0.02, show_default=True)
@click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Defaults to OUT/data.")
def synth(out, seed, subjects, sessions, duration, noise, session_perturbation, jitter, null_prob, data_dir):
    """Write a deterministic synthetic dataset."""
    with stage("synth"):
        profiles = default_profiles(subjects, seed, noise_sigma=noise,
                                    session_perturbation=session_perturbation)
        spec = GenSpec(profiles, sessions, duration, SAMPLE_RATE, jitter, null_prob, seed)
        target = data_dir or out / "data"
        write_dataset(generate(spec), spec, target)
        click.echo(f"wrote {subjects * sessions * 2} recordings to {target}")


def _preprocess_options(f):
    f = click.option("--sample-rate", type=float, default=SAMPLE_RATE, show_default=True)(f)
    f = click.option("--window-seconds", type=float, default=WINDOW_SECONDS, show_default=True)(f)
    f = click.option("--calibration", type=click.Path(dir_okay=False, exists=True, path_type=Path))(f)
    f = click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path), default=None,
                     help="Defaults to OUT/data.")(f)
    return f


@main.command()
@out_option
@_preprocess_options
def preprocess(out, data_dir, calibration, window_seconds, sample_rate):
    """Fill nulls, calibrate, resample, remove means and segment into windows."""
    with stage("preprocess"):
        cfg = make_config(out, data_dir=data_dir, calibration=calibration,
                          window_seconds=window_seconds, sample_rate=sample_rate)
        windows = stage_preprocess(cfg)
        click.echo(f"{len(windows)} windows -> {cfg.windows_path}")


@main.command()
@out_option
def extract(out):
    """Compute the 84-feature matrix from OUT/windows.csv."""
    with stage("extract"):
        cfg = make_config(out)
        m = stage_extract(cfg)
        click.echo(f"{len(m)} x {len(m.names)} features -> {cfg.features_json}")


@main.command()
@out_option
def select(out):
    """CFS best-first feature selection on the globally normalised matrix."""
    with stage("select"):
        cfg = make_config(out)
        result = stage_select(cfg)
        click.echo(f"selected {len(result.selected)} features (merit {result.merit:.4f}): "
                   + ", ".join(result.selected))


@main.command()
@out_option
@eval_options
def evaluate(out, **kw):
    """Cross-validate the chosen classifiers on OUT/features.json."""
    with stage("evaluate"):
        cfg = make_config(out, **kw)
        feature_set = "all" if cfg.selection == "none" else "selected"
        if feature_set == "selected" and not cfg.nested_selection and not cfg.selection_path.exists():
            stage_select(cfg)
        stage_evaluate(cfg, feature_set=feature_set)
        click.echo((out / f"comparison_{feature_set}.txt").read_text(), nl=False)


@main.command()
@out_option
@_preprocess_options
@eval_options
def run(out, data_dir, calibration, window_seconds, sample_rate, **kw):
    """Full pipeline: preprocess, extract, (select), evaluate, report."""
    with stage("config"):
        cfg = make_config(out, data_dir=data_dir, calibration=calibration,
                          window_seconds=window_seconds, sample_rate=sample_rate, **kw)
    with stage("run"):
        results = run_pipeline(cfg)
        for feature_set in results:
            click.echo((out / f"comparison_{feature_set}.txt").read_text())


@main.command()
@out_option
@click.option("--feature-set", type=click.Choice(["all", "selected"]), default="all", show_default=True)
@click.option("--detail", is_flag=True, help="Also print per-classifier confusion matrices.")
def report(out, feature_set, detail):
    """Re-render stored evaluation reports."""
    with stage("report"):
        reports = load_reports(out, feature_set)
        if not reports:
            raise FileNotFoundError(f"no reports under {out / 'reports' / feature_set}")
        click.echo(comparison_table(reports), nl=False)
        if detail:
            for r in reports:
                click.echo("\n" + render_report(r), nl=False)


if __name__ == "__main__":
    main()
