"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Lines are collected in ``RESULTS`` and echoed in the pytest terminal summary
(see conftest.py), so ``pytest tests/test_acceptance.py`` shows all eight
verdicts even under output capture.
"""
import contextlib
import json
import time

import numpy as np
import pytest

from gaitkit.classifiers import KINDS, Hyperparams, LdaParams, SvmParams, train
from gaitkit.classifiers import svm as svm_mod
from gaitkit.evaluation import cross_validate, make_folds, strip_timing
from gaitkit.features import FEATURE_NAMES, FeatureMatrix, assemble_vector, extract_matrix, normalize
from gaitkit.pipeline import PipelineConfig, run
from gaitkit.preprocess import preprocess_recording, remove_mean, resample, segment
from gaitkit.selection import best_first_search
from gaitkit.spectral import find_peaks, median_frequency, psd
from gaitkit.synthgen import GenSpec, default_profiles, generate, write_dataset
from conftest import gaussian_blobs, make_recording, make_series
from oracles import exhaustive_best_merit, kkt_violation, knn_scan, lda_oracle, nb_oracle

RESULTS = []
BENCH_SEED = 7


def _record(n, title, ok, elapsed, info):
    extra = "; ".join(f"{k}={v}" for k, v in info.items())
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} ({elapsed:.2f}s{', ' + extra if extra else ''})"
    RESULTS.append(line)
    print(line)


@contextlib.contextmanager
def criterion(n, title, budget=None):
    info = {}
    t0 = time.perf_counter()
    try:
        yield info
    except BaseException:
        _record(n, title, False, time.perf_counter() - t0, info)
        raise
    elapsed = time.perf_counter() - t0
    ok = budget is None or elapsed < budget
    _record(n, title, ok, elapsed, info)
    assert ok, f"criterion {n} took {elapsed:.1f}s, budget {budget}s"


def benchmark_spec(seed=BENCH_SEED):
    profiles = default_profiles(4, seed, cadences=[1.5, 1.8, 2.1, 2.4])
    return GenSpec(profiles, sessions=2, duration=160.0, seed=seed)


def protocol(m, seed=BENCH_SEED):
    """Global CFS on the normalised matrix, then 5-fold CV of 1-NN on the subset."""
    sel = best_first_search(normalize(m))
    plan = make_folds(m.labels, 5, seed)
    return sel, cross_validate(m.select(sel.selected), "knn", plan=plan)


def test_criterion_1_feature_count():
    with criterion(1, "84 features in canonical order on 200 synthetic windows", budget=5.0) as info:
        spec = GenSpec(default_profiles(4, 1), sessions=1, duration=251.0, seed=1)
        windows = [w for rec in generate(spec) for w in preprocess_recording(rec)]
        assert len(windows) == 200
        for w in windows:
            v = assemble_vector(w)
            assert v.names == FEATURE_NAMES and v.values.shape == (84,)
            assert np.isfinite(v.values).all()
        m = extract_matrix(windows)
        assert m.values.shape == (200, 84) and m.names == FEATURE_NAMES
        info["windows"] = len(windows)


def test_criterion_2_spectral():
    with criterion(2, "Parseval on 1000 windows, 2 Hz median frequency, strict peaks", budget=10.0) as info:
        rng = np.random.default_rng(2)
        worst, n_peaks = 0.0, 0
        for i in range(1000):
            x = rng.normal(size=250) * rng.uniform(0.1, 10) + rng.uniform(-5, 5)
            if i % 2:
                f = rng.uniform(0.2, 5)
                x += rng.uniform(0.5, 3) * np.sin(2 * np.pi * f * np.arange(250) / 50 + rng.uniform(0, 6))
            p = psd(x)
            ms = np.mean((x - x.mean()) ** 2)
            worst = max(worst, abs(p.power.sum() * p.df - ms) / ms)
            pk = find_peaks(p)
            for freq, amp in pk.peaks:
                k = int(round(freq / p.df))
                assert 1 <= k <= 25 and amp == p.power[k]
                assert p.power[k] > p.power[k - 1] and p.power[k] > p.power[k + 1]
                n_peaks += 1
        assert worst <= 1e-6
        mf, degenerate = median_frequency(psd(np.sin(2 * np.pi * 2.0 * np.arange(250) / 50)))
        assert not degenerate and abs(mf - 2.0) <= 0.2
        info.update(parseval_rel=f"{worst:.1e}", mf=mf, peaks_checked=n_peaks)


def test_criterion_3_preprocessing():
    with criterion(3, "affine resampling exact, mean removal idempotent, 1500 -> 6 windows") as info:
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(20):
            n = 600
            t = np.cumsum(rng.uniform(0.015, 0.025, n))
            a, b = rng.uniform(-3, 3, 3), rng.uniform(-10, 10, 3)
            series = resample(make_recording(t, t[:, None] * a + b))
            expected = series.times[:, None] * a + b
            worst = max(worst, float(np.max(np.abs(series.nodes["ankle"] - expected) / np.abs(expected))))
        assert worst <= 1e-9
        acc = rng.normal(size=(1500, 3)) * 4 + [0, 0, 9.81]
        once = remove_mean(make_series(acc))
        twice = remove_mean(once)
        for node in ("ankle", "chest"):
            assert np.abs(once.nodes[node].mean(axis=0)).max() <= 1e-9 * np.abs(acc).max()
            np.testing.assert_allclose(twice.nodes[node], once.nodes[node], rtol=0, atol=1e-12)
        assert len(segment(once)) == 6
        info["affine_rel"] = f"{worst:.1e}"


def test_criterion_4_selection_oracle():
    with criterion(4, "best-first merit equals exhaustive merit on 20 seeds; planted feature kept",
                   budget=30.0) as info:
        worst = 0.0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            n, d = 150, int(rng.integers(4, 13))
            y = rng.integers(0, int(rng.integers(2, 5)), n)
            X = rng.normal(size=(n, d))
            strong = rng.choice(d, max(1, d // 3), replace=False)
            X[:, strong] += y[:, None] * rng.uniform(0.2, 2.0, len(strong))
            X[:, -1] = X[:, 0] * 0.7 + rng.normal(0, 0.3, n)  # correlated copy of a column
            m = FeatureMatrix.from_arrays(X, y)
            cols = {name: m.values[:, j].tolist() for j, name in enumerate(m.names)}
            oracle = exhaustive_best_merit(cols, m.labels.tolist())
            worst = max(worst, abs(best_first_search(m).merit - oracle))
        assert worst <= 1e-9
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            y = rng.integers(0, 4, 200)
            X = rng.normal(size=(200, 11))
            X[:, 3] = y + rng.uniform(0, 0.1, 200)
            names = [f"noise{i}" for i in range(11)]
            names[3] = "perfect"
            assert "perfect" in best_first_search(FeatureMatrix.from_arrays(X, y, names)).selected
        info["max_merit_gap"] = f"{worst:.1e}"


def test_criterion_5_classifier_oracles():
    with criterion(5, "1-NN, NB, LDA, SVM and tree agree with their oracles") as info:
        rng = np.random.default_rng(5)
        for _ in range(20):
            X = rng.normal(size=(60, 4))
            y = rng.choice(list("ABCD"), 60)
            model = train("knn", FeatureMatrix.from_arrays(X, y))
            Q = rng.normal(size=(15, 4))
            assert list(model.predict(Q)) == [knn_scan(X.tolist(), list(y), q.tolist(), 1) for q in Q]

        m = gaussian_blobs(rng, 30, [[0, 0, 0], [2, 1, 0], [0, 2, 1]], scale=1.0)
        Q = rng.normal(size=(100, 3)) * 2
        nb = train("nb", m)
        assert list(nb.predict(Q)) == [nb_oracle(m.values.tolist(), m.labels.tolist(), q.tolist()) for q in Q]
        lda = train("lda", m, Hyperparams(lda=LdaParams(ridge=0.0)))
        y_idx = np.array([int(s[1]) for s in m.labels])
        assert list(lda.predict_index(Q)) == [lda_oracle(m.values, y_idx, 3, q) for q in Q]

        worst = 0.0
        for seed in range(5):
            r = np.random.default_rng(50 + seed)
            X = np.vstack([r.normal(size=(30, 3)) + 2.5, r.normal(size=(30, 3)) - 2.5])
            yy = np.r_[np.ones(30), -np.ones(30)]
            C = 1.0
            sol = svm_mod.smo(X, yy, C=C, tolerance=1e-4)
            assert np.all((sol.alpha >= 0) & (sol.alpha <= C))
            worst = max(worst, kkt_violation(sol, X, yy, C))
        assert worst <= 1e-4
        svm = train("svm", gaussian_blobs(rng, 20, [[0, 6], [6, 0], [-6, -6]]),
                    Hyperparams(svm=SvmParams(tolerance=1e-4)))
        assert len(svm.params["pairs"]) == 3

        for _ in range(10):
            X = rng.integers(-3, 4, size=(80, 3)).astype(float)
            keys = [tuple(row) for row in X]
            lab = {k: rng.choice(list("ABC")) for k in keys}
            tm = FeatureMatrix.from_arrays(X, [lab[k] for k in keys])
            assert np.all(train("tree", tm).predict(tm) == tm.labels)
        info["svm_kkt"] = f"{worst:.1e}"


def test_criterion_6_end_to_end_benchmark():
    with criterion(6, "synthetic benchmark: 1-NN+CFS >= 0.95, tree >= 0.90, permuted in [0.15, 0.35]",
                   budget=60.0) as info:
        spec = benchmark_spec()
        windows = [w for rec in generate(spec) for w in preprocess_recording(rec)]
        m = extract_matrix(windows)
        per_subject = {s: int(np.sum(m.labels == s)) for s in m.classes}
        assert len(per_subject) == 4 and min(per_subject.values()) >= 60
        plan = make_folds(m.labels, 5, BENCH_SEED)
        sel, knn_sel = protocol(m)
        knn_all = cross_validate(m, "knn", plan=plan)
        tree_all = cross_validate(m, "tree", plan=plan)
        perm = np.random.default_rng(BENCH_SEED).permutation(m.labels)
        _, control = protocol(m.with_labels(perm))
        info.update(knn_cfs=f"{knn_sel.accuracy:.3f}", knn_all=f"{knn_all.accuracy:.3f}",
                    tree_all=f"{tree_all.accuracy:.3f}", permuted=f"{control.accuracy:.3f}",
                    selected=len(sel.selected))
        assert knn_sel.accuracy >= 0.95
        assert tree_all.accuracy >= 0.90
        assert 0.15 <= control.accuracy <= 0.35
        assert knn_sel.accuracy >= knn_all.accuracy


@pytest.fixture(scope="module")
def bench_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("bench")
    spec = benchmark_spec()
    write_dataset(generate(spec), spec, root / "data")
    return root


def pipeline_view(out):
    view = {}
    for p in sorted(out.rglob("*")):
        if p.is_file():
            rel = str(p.relative_to(out))
            if p.suffix == ".json":
                view[rel] = json.dumps(strip_timing(json.loads(p.read_text())), sort_keys=True)
            elif "Speed (s)" not in p.read_text():
                view[rel] = p.read_bytes()
            else:
                view[rel] = "\n".join(ln for ln in p.read_text().splitlines() if "Speed (s)" not in ln)
    return view


def run_twice(bench_dir):
    outs = []
    for name in ("run_a", "run_b"):
        cfg = PipelineConfig(out=bench_dir / name, data_dir=bench_dir / "data", seed=BENCH_SEED,
                             selection="cfs-bestfirst", classifiers=KINDS)
        run(cfg)
        outs.append(cfg.out)
    return outs


def test_criterion_7_determinism(bench_dir):
    with criterion(7, "byte-identical artifacts apart from timing; fold invariants") as info:
        a, b = run_twice(bench_dir)
        va, vb = pipeline_view(a), pipeline_view(b)
        assert va.keys() == vb.keys() and len(va) > 10
        diff = [k for k in va if va[k] != vb[k]]
        assert not diff, diff
        for name in ("windows.csv", "features.csv", "features.json", "selection.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        labels = FeatureMatrix.from_json(json.loads((a / "features.json").read_text())).labels
        for seed in range(10):
            plan = make_folds(labels, 5, seed)
            tested = np.concatenate([plan.test_rows(f) for f in range(5)])
            assert sorted(tested.tolist()) == list(range(len(labels)))
            for label in set(labels):
                n = int(np.sum(labels == label))
                counts = [int(np.sum(labels[plan.test_rows(f)] == label)) for f in range(5)]
                assert min(counts) >= n // 5 and max(counts) <= -(-n // 5)
        info["artifacts"] = len(va)


def test_criterion_8_selected_subset_stable(bench_dir):
    with criterion(8, "CFS subset size reported and stable at fixed seed") as info:
        sizes, names = [], []
        for name in ("run_a", "run_b"):
            path = bench_dir / name / "selection.json"
            if not path.exists():
                run_twice(bench_dir)
            sel = json.loads(path.read_text())
            assert sel["size"] == len(sel["names"])
            sizes.append(sel["size"])
            names.append(sel["names"])
        text = (bench_dir / "run_a" / "comparison_selected.txt").read_text()
        assert f"using {sizes[0]} selected features" in text
        again = best_first_search(normalize(FeatureMatrix.from_json(
            json.loads((bench_dir / "run_a" / "features.json").read_text()))))
        assert sizes[0] == sizes[1] == len(again.selected)
        assert names[0] == names[1] == again.selected
        info.update(size=sizes[0], subset=",".join(names[0]))
