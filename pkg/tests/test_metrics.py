import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maoeda.metrics import (
    binomial_sigma,
    dispersion,
    format_cell,
    hv_exact,
    hv_monte_carlo,
    hypervolume,
    igd,
    normalize,
    rank_sum_p,
    rank_sum_test,
    sci,
)
from maoeda.problems import ProblemId, ProblemSpec, true_bounds
from oracles import enumerate_ranksum_p, inclusion_exclusion_hv

REF2 = np.array([1.1, 1.1])


def test_normalize_examples():
    lo, hi = np.zeros(3), np.full(3, 2.0)
    np.testing.assert_array_equal(normalize(lo, lo, hi), 0)
    np.testing.assert_array_equal(normalize(hi, lo, hi), 1)
    lo, hi = true_bounds(ProblemSpec(ProblemId.DTLZ1, 3))
    np.testing.assert_allclose(normalize([0.25, 0.25, 0], lo, hi), [0.5, 0.5, 0])


def test_normalize_not_clipped_and_rejects_zero_span():
    assert normalize([3.0], [0.0], [1.0])[0] == 3.0
    with pytest.raises(ValueError):
        normalize([1, 2], [0, 1], [1, 1])


def test_igd_examples():
    R = np.random.default_rng(0).random((100, 3))
    assert igd(np.vstack([R, R + 5]), R) == 0.0
    assert igd([(0.5, 0.5)], [(0, 1), (1, 0)]) == pytest.approx(0.7071068, abs=1e-7)
    assert igd(R[np.random.default_rng(1).permutation(100)], R) == 0.0
    with pytest.raises(ValueError):
        igd(np.empty((0, 2)), R[:, :2])


@given(
    S=arrays(float, (8, 3), elements=st.floats(0, 1)),
    R=arrays(float, (12, 3), elements=st.floats(0, 1)),
    shift=arrays(float, 3, elements=st.floats(-5, 5)),
)
@settings(max_examples=50, deadline=None)
def test_igd_permutation_and_translation(S, R, shift):
    base = igd(S, R)
    assert igd(S[::-1], R[::-1]) == pytest.approx(base)
    assert igd(S + shift, R + shift) == pytest.approx(base, abs=1e-9)


def test_hv_two_points():
    assert hv_exact([(0.25, 0.75), (0.75, 0.25)], REF2) == pytest.approx(0.4725, abs=1e-12)


def test_hv_point_at_ref_is_zero():
    assert hv_exact([(1.1, 1.1)], REF2) == 0.0
    assert hv_exact(np.empty((0, 2)), REF2) == 0.0


def test_hv_dominated_point_ignored():
    a = hv_exact([(0.2, 0.3)], REF2)
    assert hv_exact([(0.2, 0.3), (0.5, 0.5)], REF2) == a


def test_hv_out_of_box_excluded():
    res = hypervolume(np.array([(0.5, 0.5), (2.0, 0.1)]), fraction=False)
    assert res.excluded == 1
    assert res.value == pytest.approx(0.36)
    assert hypervolume(np.array([(0.0, 0.0)])).value == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(30))
def test_hv_exact_matches_inclusion_exclusion(seed):
    rng = np.random.default_rng(seed)
    M = int(rng.integers(2, 9))
    n = int(rng.integers(1, 11))
    # points near a sphere so most are mutually non-dominated
    P = np.abs(rng.standard_normal((n, M)))
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    P = np.round(P, 2)  # exercise ties
    ref = np.full(M, 1.1)
    assert hv_exact(P, ref) == pytest.approx(inclusion_exclusion_hv(P, ref), rel=1e-10, abs=1e-12)


@given(
    P=arrays(float, st.tuples(st.integers(1, 12), st.integers(2, 5)), elements=st.floats(0, 1.2)),
    q=arrays(float, 5, elements=st.floats(0, 1.2)),
)
@settings(max_examples=80, deadline=None)
def test_hv_monotone(P, q):
    ref = np.full(P.shape[1], 1.1)
    q = q[: P.shape[1]]
    assert hv_exact(np.vstack([P, q]), ref) >= hv_exact(P, ref) - 1e-12
    dominated = P[0] + 0.01
    assert hv_exact(np.vstack([P, dominated]), ref) == pytest.approx(hv_exact(P, ref), abs=1e-12)


def test_mc_full_box():
    rng = np.random.default_rng(0)
    est = hv_monte_carlo([(0.0, 0.0, 0.0)], np.full(3, 1.1), 10**6, rng)
    assert abs(est - 1.1**3) / 1.1**3 < 0.01


def test_mc_empty():
    assert hv_monte_carlo(np.empty((0, 2)), REF2, 100, np.random.default_rng(0)) == 0.0


def test_mc_matches_two_point_example():
    P = np.array([(0.25, 0.75), (0.75, 0.25)])
    est = hv_monte_carlo(P, REF2, 10**6, np.random.default_rng(1))
    box = 0.85 * 0.85
    sigma = binomial_sigma(0.4725 / box, box, 10**6)
    assert abs(est - 0.4725) <= 3 * sigma


def test_mc_deterministic_given_rng():
    P = np.random.default_rng(3).random((20, 4))
    ref = np.full(4, 1.1)
    a = hv_monte_carlo(P, ref, 5000, np.random.default_rng(9))
    b = hv_monte_carlo(P, ref, 5000, np.random.default_rng(9))
    assert a == b


def test_hypervolume_methods():
    P = np.random.default_rng(0).random((5, 10))
    res = hypervolume(P, rng=np.random.default_rng(0), samples=1000)
    assert res.method == "hv_mc" and res.samples == 1000
    assert 0 <= res.value <= 1
    with pytest.raises(ValueError):
        hypervolume(P)
    assert hypervolume(P[:, :4]).method == "hv_exact"


def test_ranksum_identical_equal():
    a = [0.3, 0.5, 0.7, 0.9]
    assert rank_sum_test(a, a) == "equal"
    assert rank_sum_test([1, 1, 1], [1, 1, 1]) == "equal"


def test_ranksum_three_vs_three():
    assert rank_sum_p([1, 2, 3], [4, 5, 6]) == pytest.approx(0.1)
    assert enumerate_ranksum_p([1, 2, 3], [4, 5, 6]) == pytest.approx(0.1)
    assert rank_sum_test([1, 2, 3], [4, 5, 6]) == "equal"


def test_ranksum_separated_samples():
    rng = np.random.default_rng(0)
    a = 0.9 + 0.01 * rng.standard_normal(30)
    b = 0.1 + 0.01 * rng.standard_normal(30)
    assert rank_sum_p(a, b) < 1e-6
    assert rank_sum_test(a, b) == "better"
    assert rank_sum_test(b, a) == "worse"
    # exact branch on a size-8 subsample agrees with enumeration
    p = rank_sum_p(a[:4], b[:4])
    assert p == pytest.approx(enumerate_ranksum_p(a[:4], b[:4]))
    assert p == pytest.approx(2 / 70)


@given(
    a=st.lists(st.integers(0, 6).map(float), min_size=3, max_size=8),
    b=st.lists(st.integers(0, 6).map(float), min_size=3, max_size=8),
)
@settings(max_examples=60, deadline=None)
def test_exact_p_matches_enumeration_with_ties(a, b):
    if len(set(a + b)) == 1:
        return
    assert rank_sum_p(a, b) == pytest.approx(enumerate_ranksum_p(np.array(a), np.array(b)), abs=1e-12)


@given(
    a=st.lists(st.floats(0, 1), min_size=3, max_size=25),
    b=st.lists(st.floats(0, 1), min_size=3, max_size=25),
)
@settings(max_examples=60, deadline=None)
def test_ranksum_mirror(a, b):
    mirror = {"better": "worse", "worse": "better", "equal": "equal"}
    assert rank_sum_test(b, a) == mirror[rank_sum_test(a, b)]


def test_ranksum_lower_is_better():
    assert rank_sum_test(np.arange(10.0), np.arange(10.0) + 20, higher_is_better=False) == "better"


def test_ranksum_needs_three():
    with pytest.raises(ValueError):
        rank_sum_test([1, 2], [3, 4, 5])


def test_formatting():
    assert sci(0.0012) == "1.2E-3"
    assert sci(0.021) == "2.1E-2"
    assert sci(0.0) == "0.0E+0"
    assert sci(12.0) == "1.2E+1"
    assert dispersion([1, 2, 3, 4, 5]) == pytest.approx(1.0)
    assert format_cell([0.533]) == "0.533(0.0E+0)"
    assert format_cell([0.5, 0.6, 0.7]) == "0.600(5.0E-2)"
    assert format_cell([]) == "nan"
