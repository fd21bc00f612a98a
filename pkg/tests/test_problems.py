import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maoeda.problems import (
    ProblemId,
    ProblemSpec,
    evaluate,
    front_exponent,
    read_front,
    sample_front,
    true_bounds,
    write_front,
)
from maoeda.metrics import normalize

ALL = [p.value for p in ProblemId]
BASE = ["DTLZ1", "DTLZ2", "DTLZ3", "DTLZ4"]


@pytest.mark.parametrize("name,M,k", [("dtlz1", 3, 5), ("dtlz2", 3, 10), ("dtlz4m", 8, 10), ("DTLZ1m", 15, 5)])
def test_variable_counts(name, M, k):
    spec = ProblemSpec.from_name(name, M)
    assert spec.k == k
    assert spec.n == M + k - 1


@pytest.mark.parametrize("alias", ["dtlz2m", "DTLZ2-", "dtlz2⁻", "DTLZ2M"])
def test_minus_aliases(alias):
    assert ProblemSpec.from_name(alias, 3).id is ProblemId.DTLZ2m


def test_rejects_small_M():
    with pytest.raises(ValueError):
        ProblemSpec(ProblemId.DTLZ2, 1)


def test_dtlz1_centre():
    f = evaluate(ProblemSpec(ProblemId.DTLZ1, 3), np.full(7, 0.5))
    np.testing.assert_allclose(f, [0.125, 0.125, 0.25], atol=1e-12)


def test_dtlz2_centre():
    f = evaluate(ProblemSpec(ProblemId.DTLZ2, 3), np.full(12, 0.5))
    np.testing.assert_allclose(f, [0.5, 0.5, 0.7071068], atol=1e-7)


def test_dtlz1_minus_centre():
    f = evaluate(ProblemSpec(ProblemId.DTLZ1m, 3), np.full(7, 0.5))
    np.testing.assert_allclose(f, [-0.125, -0.125, -0.25], atol=1e-12)


def test_length_mismatch_reports_lengths():
    with pytest.raises(ValueError, match="expects 12 .* got 11"):
        evaluate(ProblemSpec(ProblemId.DTLZ2, 3), np.zeros(11))


def test_nan_rejected():
    x = np.full(12, 0.5)
    x[3] = np.nan
    with pytest.raises(ValueError, match="NaN"):
        evaluate(ProblemSpec(ProblemId.DTLZ2, 3), x)


def test_batch_matches_rows():
    spec = ProblemSpec(ProblemId.DTLZ3, 5)
    X = np.random.default_rng(0).random((20, spec.n))
    F = evaluate(spec, X)
    assert F.shape == (20, 5)
    for x, f in zip(X, F):
        np.testing.assert_array_equal(evaluate(spec, x), f)


@pytest.mark.parametrize("base", BASE)
@given(data=st.data())
@settings(max_examples=25, deadline=None)
def test_minus_is_negation_and_finite(base, data):
    M = data.draw(st.integers(2, 10))
    spec = ProblemSpec(ProblemId(base), M)
    minus = ProblemSpec(ProblemId(base + "m"), M)
    x = data.draw(arrays(float, spec.n, elements=st.floats(0, 1)))
    f = evaluate(spec, x)
    assert np.all(np.isfinite(f))
    np.testing.assert_array_equal(evaluate(minus, x), -f)


@pytest.mark.parametrize("base", BASE)
@pytest.mark.parametrize("M", [2, 3, 5, 8])
def test_centre_distance_variables_land_on_front(base, M):
    spec = ProblemSpec(ProblemId(base), M)
    rng = np.random.default_rng(M)
    X = rng.random((50, spec.n))
    X[:, M - 1 :] = 0.5
    F = normalize(evaluate(spec, X), *true_bounds(spec))
    p = front_exponent(spec)
    np.testing.assert_allclose((F**p).sum(axis=1), 1.0, atol=1e-9)


def test_bounds_plain():
    lo, hi = true_bounds(ProblemSpec(ProblemId.DTLZ1, 3))
    np.testing.assert_array_equal(lo, 0)
    np.testing.assert_array_equal(hi, 0.5)
    lo, hi = true_bounds(ProblemSpec(ProblemId.DTLZ2, 5))
    np.testing.assert_array_equal(lo, np.zeros(5))
    np.testing.assert_array_equal(hi, np.ones(5))


def _dense_grid(spec, levels):
    return np.array(list(itertools.product(levels, repeat=spec.n)))


def test_bounds_dtlz2_minus_dense_grid():
    # every corner of {0, 0.5, 1}^12 is evaluated; the extremes of the minus
    # problem are attained at grid points (g maximal at x_d in {0, 1})
    spec = ProblemSpec(ProblemId.DTLZ2m, 3)
    F = evaluate(spec, _dense_grid(spec, [0.0, 0.5, 1.0]))
    lo, hi = true_bounds(spec)
    np.testing.assert_allclose(F.min(axis=0), lo, atol=1e-12)
    np.testing.assert_allclose(F.max(axis=0), hi, atol=1e-12)
    np.testing.assert_allclose(lo, -3.5)


def test_bounds_dtlz1_minus_dense_grid():
    # the multimodal g peaks off-grid, so the grid only brackets the bound
    spec = ProblemSpec(ProblemId.DTLZ1m, 3)
    levels = [0.0, 0.05, 0.5, 0.95, 1.0]
    F = evaluate(spec, _dense_grid(spec, levels))
    lo, hi = true_bounds(spec)
    assert np.all(F >= lo - 1e-9)
    assert np.all(F <= hi + 1e-12)
    np.testing.assert_allclose(F.max(axis=0), hi, atol=1e-12)
    # grid minimum within 1% of the analytic bound
    assert np.all(F.min(axis=0) <= 0.99 * lo)
    # a finer search in one distance variable gets closer still
    x = np.zeros(spec.n)
    best = 0.0
    for d in np.linspace(0.94, 0.96, 2001):
        x[spec.M - 1 :] = d
        best = min(best, evaluate(spec, x)[-1])
    assert best >= lo[-1] - 1e-9
    assert best <= 0.9999 * lo[-1]


@pytest.mark.parametrize("name", ALL)
def test_bounds_ordered(name):
    lo, hi = true_bounds(ProblemSpec.from_name(name, 4))
    assert np.all(lo <= hi)


def test_sample_front_dtlz1_single():
    f = sample_front(ProblemSpec(ProblemId.DTLZ1, 3), 1, np.random.default_rng(0))
    assert f.shape == (1, 3)
    assert abs(f.sum() - 0.5) < 1e-12
    assert np.all(f >= 0)


def test_sample_front_circle():
    f = sample_front(ProblemSpec(ProblemId.DTLZ2, 2), 3, np.random.default_rng(1))
    np.testing.assert_allclose((f**2).sum(axis=1), 1.0, atol=1e-12)


def test_sample_front_dense_sphere():
    spec = ProblemSpec(ProblemId.DTLZ2, 3)
    F = sample_front(spec, 100_000, np.random.default_rng(2))
    Fn = normalize(F, *true_bounds(spec))
    assert np.max(np.abs((Fn**2).sum(axis=1) - 1.0)) < 1e-9


def test_sample_front_simplex_uniform_marginal():
    # uniform on the 2-simplex: each normalised coordinate has mean 1/3
    F = sample_front(ProblemSpec(ProblemId.DTLZ1, 3), 60_000, np.random.default_rng(3)) / 0.5
    np.testing.assert_allclose(F.mean(axis=0), 1 / 3, atol=0.01)


def test_sample_front_minus_needs_file(tmp_path):
    spec = ProblemSpec(ProblemId.DTLZ2m, 3)
    with pytest.raises(ValueError, match="front_file"):
        sample_front(spec, 10, np.random.default_rng(0))
    pts = -np.random.default_rng(0).random((4, 3))
    path = tmp_path / "f.front"
    write_front(path, pts, spec, 7)
    assert path.read_text().splitlines()[0] == "# DTLZ2m 3 4 7"
    np.testing.assert_array_equal(sample_front(spec, 4, None, path), pts)


def test_read_front_checks_shape(tmp_path):
    path = tmp_path / "bad.front"
    path.write_text("# DTLZ2m 3 5 0\n1 2 3\n")
    with pytest.raises(ValueError):
        read_front(path)


def test_sample_front_count_positive():
    with pytest.raises(ValueError):
        sample_front(ProblemSpec(ProblemId.DTLZ2, 3), 0, np.random.default_rng(0))
