import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaitkit.errors import InvalidArgument, ShapeError
from gaitkit.features import FeatureMatrix
from gaitkit.selection import (SelectionResult, SUTable, best_first_search, cfs_merit, discretize,
                               symmetric_uncertainty)
from oracles import equal_width_codes, exhaustive_best_merit, merit, su

codes = st.lists(st.integers(0, 5), min_size=2, max_size=60)


def planted(rng, n=200, noise=10):
    y = rng.integers(0, 4, n)
    X = rng.normal(size=(n, noise + 1))
    X[:, 3] = y + rng.uniform(0, 0.1, n)
    names = [f"noise{i:02d}" for i in range(noise + 1)]
    names[3] = "perfect"
    return FeatureMatrix.from_arrays(X, [f"S{v}" for v in y], names)


def columns_of(m):
    return {n: m.values[:, j].tolist() for j, n in enumerate(m.names)}


def test_su_of_self_is_one(rng):
    x = rng.integers(0, 7, 100)
    assert symmetric_uncertainty(x, x) == pytest.approx(1.0)


def test_su_independent_is_small(rng):
    x, y = rng.integers(0, 5, 10_000), rng.integers(0, 5, 10_000)
    assert symmetric_uncertainty(x, y) < 0.05


def test_su_constant_is_zero(rng):
    assert symmetric_uncertainty(np.zeros(50), rng.integers(0, 3, 50)) == 0.0
    assert symmetric_uncertainty(np.zeros(5), np.ones(5)) == 0.0


def test_su_length_mismatch():
    with pytest.raises(ShapeError):
        symmetric_uncertainty([1, 2, 3], [1, 2])


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_su_symmetric_and_matches_oracle(data):
    a = data.draw(codes)
    b = data.draw(st.lists(st.integers(0, 4), min_size=len(a), max_size=len(a)))
    ab, ba = symmetric_uncertainty(a, b), symmetric_uncertainty(b, a)
    assert abs(ab - ba) <= 1e-12
    assert 0 <= ab <= 1
    assert ab == pytest.approx(su(a, b), abs=1e-12)


def test_discretize_equal_width(rng):
    x = rng.normal(size=300)
    assert discretize(x).tolist() == equal_width_codes(x.tolist())
    assert discretize(np.full(4, 2.0)).tolist() == [0, 0, 0, 0]


def test_merit_singleton_is_class_su(rng):
    m = planted(rng)
    expected = su(equal_width_codes(m.values[:, 3].tolist()), m.labels.tolist())
    assert cfs_merit(["perfect"], m) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(1.0)


def test_merit_with_duplicate_equals_singleton(rng):
    m = planted(rng)
    X = np.column_stack([m.values[:, 0], m.values[:, 0]])
    dup = FeatureMatrix.from_arrays(X, m.labels, ["f", "f_copy"])
    single = cfs_merit(["f"], dup)
    assert cfs_merit(["f", "f_copy"], dup) == pytest.approx(single, abs=1e-12)


def test_merit_random_subset_matches_formula(rng):
    m = planted(rng)
    subset = list(rng.choice(m.names, 5, replace=False))
    cols = columns_of(m)
    assert cfs_merit(subset, m) == pytest.approx(merit(subset, cols, m.labels.tolist()), abs=1e-12)
    assert cfs_merit(subset[::-1], m) == pytest.approx(cfs_merit(subset, m), abs=1e-15)


def test_merit_empty_subset():
    m = FeatureMatrix.from_arrays([[1.0], [2.0]], ["a", "b"])
    with pytest.raises(InvalidArgument):
        cfs_merit([], m)


def test_planted_feature_selected(rng):
    m = planted(rng)
    res = best_first_search(m)
    assert "perfect" in res.selected
    assert res.merit == pytest.approx(cfs_merit(res.selected, m), abs=1e-15)
    assert res.merit >= cfs_merit(["perfect"], m) - 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_best_first_matches_exhaustive_oracle(seed):
    rng = np.random.default_rng(seed)
    n, d = 120, 8
    y = rng.integers(0, 3, n)
    X = rng.normal(size=(n, d))
    X[:, :3] += y[:, None] * rng.uniform(0.3, 1.5, 3)
    m = FeatureMatrix.from_arrays(X, y)
    res = best_first_search(m)
    assert res.merit == pytest.approx(exhaustive_best_merit(columns_of(m), m.labels.tolist()), abs=1e-9)


def test_duplicated_informative_features_not_both_selected(rng):
    n = 200
    y = rng.integers(0, 4, n)
    inf = y + rng.normal(0, 0.6, n)
    X = np.column_stack([inf, inf.copy(), rng.normal(size=(n, 4))])
    m = FeatureMatrix.from_arrays(X, y, ["inf", "inf_copy", "n1", "n2", "n3", "n4"])
    res = best_first_search(m)
    assert not {"inf", "inf_copy"} <= set(res.selected)
    # the pair scores exactly its singleton, so the size tie-break drops the copy
    assert res.merit == pytest.approx(exhaustive_best_merit(columns_of(m), m.labels.tolist()), abs=1e-9)


def test_search_is_deterministic_and_audited(rng):
    m = planted(rng)
    a, b = best_first_search(m), best_first_search(m)
    assert (a.selected, a.merit, a.visited) == (b.selected, b.merit, b.visited)
    assert a.visited == len(a.log)
    assert all(a.merit >= merit_ - 1e-15 for _, merit_ in a.log)
    assert len(set(a.selected)) == len(a.selected)


def test_search_rejects_degenerate_input():
    with pytest.raises(InvalidArgument):
        best_first_search(FeatureMatrix.from_arrays(np.ones((5, 3)), ["a"] * 5))
    with pytest.raises(InvalidArgument):
        best_first_search(FeatureMatrix.from_arrays(np.ones((5, 1)), list("ababa")))


def test_result_json_round_trip(rng):
    res = best_first_search(planted(rng))
    back = SelectionResult.from_json(json.loads(res.dumps()))
    assert (back.selected, back.merit, back.visited) == (res.selected, res.merit, res.visited)


def test_su_table_reuse(rng):
    m = planted(rng)
    table = SUTable(m)
    assert best_first_search(m, table=table).selected == best_first_search(m).selected
