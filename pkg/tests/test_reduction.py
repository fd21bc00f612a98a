from unittest import mock

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maoeda import reduction
from maoeda.problems import ProblemId, ProblemSpec
from maoeda.reduction import (
    ReductionMap,
    corner_ranks,
    dump_archive,
    exclusive_l2,
    pcsea_search,
    polynomial_mutation,
    reduce_dimensions,
    sbx,
    translate_population,
)
from oracles import brute_nd_mask


@pytest.mark.parametrize("f,i,val", [((1, 2, 3), 0, 13.0), ((1, 2, 3), 2, 5.0), ((0, 0), 0, 0.0)])
def test_exclusive_l2(f, i, val):
    assert exclusive_l2(f, i) == val


def test_exclusive_l2_range():
    with pytest.raises(IndexError):
        exclusive_l2((1, 2), 2)


@given(f=arrays(float, 5, elements=st.floats(-10, 10)), i=st.integers(0, 4))
@settings(max_examples=50, deadline=None)
def test_exclusive_l2_identity(f, i):
    assert exclusive_l2(f, i) + f[i] ** 2 == pytest.approx(float(f @ f), abs=1e-9)


def test_corner_ranks_by_hand():
    F = np.array([[0.0, 1.0], [1.0, 0.0], [0.5, 0.5], [0.9, 0.9]])
    # lists: f1 -> 0,2,3,1 ; f2 -> 1,2,3,0 ; excl1 = f2^2 ; excl2 = f1^2
    np.testing.assert_array_equal(corner_ranks(F), [0, 0, 1, 2])


def test_corner_ranks_tie_uses_complement():
    # both rows have f1 = 0; the one nearer the front wins the f1 list
    F = np.array([[0.0, 2.0], [0.0, 1.0], [3.0, 0.5]])
    ranks = corner_ranks(F)
    assert ranks[1] == 0 and ranks[0] > 0


def test_variation_stays_in_box():
    rng = np.random.default_rng(0)
    X = rng.random((11, 6))
    C = polynomial_mutation(sbx(X, rng), rng, prob=1.0)
    assert C.shape == X.shape
    assert np.all((C >= 0) & (C <= 1))


def test_pcsea_dtlz2_corners():
    spec = ProblemSpec(ProblemId.DTLZ2, 3)
    arch = pcsea_search(spec, 100, 50, np.random.default_rng(42))
    for i in range(3):
        assert arch.F[:, i].min() <= 0.05
    assert arch.evaluations_used == 100 * 50 + 100
    assert arch.generations_used == 50


def test_pcsea_degenerate_budget():
    spec = ProblemSpec(ProblemId.DTLZ2, 2)
    arch = pcsea_search(spec, 4, 1, np.random.default_rng(0))
    assert 1 <= len(arch) <= 4
    assert np.all(brute_nd_mask(arch.F))
    assert arch.evaluations_used == 8


def test_pcsea_dtlz1_distance_concentrates():
    spec = ProblemSpec(ProblemId.DTLZ1, 3)
    arch = pcsea_search(spec, 100, 50, np.random.default_rng(7))
    dist = arch.X[:, spec.M - 1 :]
    assert np.median(np.abs(dist - 0.5)) < 0.1


@pytest.mark.parametrize("seed", range(3))
def test_pcsea_archive_mutually_nondominated(seed):
    spec = ProblemSpec(ProblemId.DTLZ3, 4)
    arch = pcsea_search(spec, 40, 5, np.random.default_rng(seed))
    assert np.all(brute_nd_mask(arch.F))


def test_pcsea_pop_check():
    with pytest.raises(ValueError):
        pcsea_search(ProblemSpec(ProblemId.DTLZ2, 5), 8, 1, np.random.default_rng(0))


def test_archive_dump(tmp_path):
    arch = pcsea_search(ProblemSpec(ProblemId.DTLZ2, 2), 4, 1, np.random.default_rng(0))
    dump_archive(tmp_path / "a.csv", arch)
    head = (tmp_path / "a.csv").read_text().splitlines()[0]
    assert head == ",".join([f"x{i}" for i in range(1, 12)] + ["f1", "f2"])


def test_reduce_constant_column():
    rng = np.random.default_rng(0)
    X = np.c_[rng.random(30), np.full(30, 0.7), rng.random(30)]
    rmap = reduce_dimensions(X, 0.96)
    assert 1 in rmap.removed
    assert rmap.mu[1] == pytest.approx(0.7)


def test_reduce_line():
    t = np.linspace(0, 0.4, 25)
    X = np.c_[t, 2 * t, np.full(25, 0.3)]
    rmap = reduce_dimensions(X, 0.96)
    assert rmap.removed == (2,)
    assert rmap.k == 2
    Xc = X - X.mean(axis=0)
    assert reduction.principal_subspace(Xc, 0.96).shape[1] == 1


def test_reduce_full_rank():
    X = np.random.default_rng(1).random((40, 5))
    rmap = reduce_dimensions(X, 1.0)
    assert rmap.removed == ()
    assert rmap.k == 5


def test_reduce_single_point():
    rmap = reduce_dimensions(np.tile([0.2, 0.4], (5, 1)), 0.96)
    assert rmap.degenerate
    assert rmap.k == 0


def test_reduce_arguments():
    with pytest.raises(ValueError):
        reduce_dimensions(np.zeros((1, 3)))
    with pytest.raises(ValueError):
        reduce_dimensions(np.zeros((3, 3)), 0.0)


@given(
    X=arrays(float, (12, 5), elements=st.floats(0, 1)),
    const=st.lists(st.booleans(), min_size=5, max_size=5),
)
@settings(max_examples=60, deadline=None)
def test_literal_zero_rule_keeps_varying_columns(X, const):
    X = X.copy()
    X[:, np.array(const)] = 0.5
    # the scale-aware zero test alone, without the leverage cut
    with mock.patch.object(reduction, "LEVERAGE_RTOL", 0.0):
        rmap = reduce_dimensions(X, 1.0)
    var = X.var(axis=0)
    for j in rmap.removed:
        assert var[j] < 1e-12


def test_removed_columns_meet_documented_rule():
    rng = np.random.default_rng(8)
    X = np.c_[rng.random(50), 0.5 + 1e-4 * rng.standard_normal(50), rng.random(50)]
    rmap = reduce_dimensions(X, 0.96)
    Xc = X - rmap.mu
    U = reduction.principal_subspace(Xc, 0.96)
    col = np.abs(Xc @ U @ U.T).mean(axis=0)
    for j in rmap.removed:
        assert col[j] < reduction.LEVERAGE_RTOL * col.max() or col[j] < 1e-8 * (1 + abs(rmap.mu[j]))
    assert 1 in rmap.removed


def test_round_trip_restores_removed_means():
    rng = np.random.default_rng(3)
    X = np.c_[rng.random(20), np.full(20, 0.25), rng.random(20), np.full(20, 0.9)]
    rmap = reduce_dimensions(X, 0.96)
    full = translate_population(X[:, rmap.retained] - rmap.mu[rmap.retained], rmap)
    np.testing.assert_allclose(full[:, list(rmap.removed)], X[:, list(rmap.removed)])
    np.testing.assert_allclose(full, X)


def test_translate_examples():
    rmap = ReductionMap((1,), np.array([0.0, 0.7]))
    np.testing.assert_allclose(translate_population([[0.1]], rmap), [[0.1, 0.7]])
    rmap = ReductionMap((), np.array([0.05, 0.05]))
    np.testing.assert_allclose(translate_population([[0.1, 0.2]], rmap), [[0.15, 0.25]])
    out = translate_population(np.empty((0, 2)), rmap)
    assert out.shape == (0, 2)


def test_translate_clamps_and_checks():
    rmap = ReductionMap((), np.array([0.9]))
    assert translate_population([[0.5]], rmap)[0, 0] == 1.0
    assert translate_population([[0.5]], rmap, clip=False)[0, 0] == pytest.approx(1.4)
    with pytest.raises(ValueError):
        translate_population([[0.1, 0.2]], rmap)
