import itertools
import math

import numpy as np
import pytest

from sources.custom_norm import skew_norm, weighted_lp_norm
from src.knorms import KNormFamily, masked
from src.normcore import dual_norm, parse_source
from src.oracle import maximize_linear_over_ball
from src.utils.errors import ArgumentError, UnsupportedError


def test_masked():
    np.testing.assert_array_equal(masked(np.array([1.0, 2.0, 3.0]), (1,)), [0.0, 2.0, 0.0])


@pytest.mark.parametrize("source, expected", [("l1", 5.0), ("linf", 7.0)])
def test_top_k_table_values(family, source, expected):
    y = np.array([2.0, -5.0, 1.0])
    assert family(source, 3).top_k_dual_norm(y, 2) == pytest.approx(expected)


@pytest.mark.parametrize("source", ["l1", "l2", "lp:3", "linf"])
def test_top_k_full_level_is_dual_norm(family, source, rng):
    f = family(source, 4)
    y = rng.standard_normal(4)
    assert f.top_k_dual_norm(y, 4) == pytest.approx(dual_norm(f.source, y))
    assert f.top_k_dual_norm(y, 0) == 0.0


def test_top_k_sorted_and_enumeration_paths_agree(family, rng):
    f = family("lp:1.5", 5)
    for _ in range(20):
        y = rng.standard_normal(5)
        for k in range(1, 6):
            fast = f.top_k_dual_norm(y, k, path="sorted")
            slow = f.top_k_dual_norm(y, k, path="enumerate")
            assert fast == pytest.approx(slow, rel=1e-12)


def test_top_k_support_tie_breaks_lexicographically(family):
    value, K = family("l2", 3).top_k_support(np.array([1.0, 1.0, 1.0]), 1, path="enumerate")
    assert value == pytest.approx(1.0)
    assert K == (0,)


def test_top_k_generic_path_for_weighted_norm():
    f = KNormFamily(weighted_lp_norm(2.0, [1.0, 2.0, 4.0]), 3)
    y = np.array([2.0, 2.0, 2.0])
    # dual ‖y/w‖₂: melhor par é {0, 1}
    assert f.top_k_dual_norm(y, 2) == pytest.approx(math.sqrt(4.0 + 1.0))
    assert f.top_k_support(y, 1) == (pytest.approx(2.0), (0,))


def test_top_k_argument_errors(family):
    f = family("l2", 3)
    with pytest.raises(ArgumentError):
        f.top_k_dual_norm(np.ones(3), 4)
    with pytest.raises(ArgumentError):
        f.top_k_dual_norm(np.ones(2), 1)


def test_enumeration_dimension_cap():
    f = KNormFamily(weighted_lp_norm(2.0, np.ones(13)), 13)
    with pytest.raises(UnsupportedError):
        f.top_k_dual_norm(np.ones(13), 2)


def test_top_k_profile_is_nondecreasing(family, rng):
    profile = family("lp:3", 5).top_k_profile(rng.standard_normal(5))
    assert profile[0] == 0.0
    assert np.all(np.diff(profile) >= -1e-12)


def test_top_k_profiles_vectorized_matches_rowwise(family, rng):
    for source in ("l1", "l2", "lp:3", "linf"):
        f = family(source, 4)
        Y = rng.standard_normal((6, 4))
        rows = np.vstack([f.top_k_profile(y) for y in Y])
        np.testing.assert_allclose(f.top_k_profiles(Y), rows, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("source, x, k, expected", [
    ("linf", [3, 1, 1], 2, 3.0),
    ("l2", [3, 4], 1, 7.0),
    ("l1", [3, -7, 1], 2, 11.0),
    ("l2", [3, 4, 0], 2, 5.0),
])
def test_k_support_table_values(family, source, x, k, expected):
    x = np.array(x, dtype=float)
    assert family(source, len(x)).k_support_dual_norm(x, k) == pytest.approx(expected)


def test_k_support_linf_formula(family, rng):
    f = family("linf", 5)
    for _ in range(10):
        x = rng.standard_normal(5)
        for k in range(1, 6):
            expected = max(np.abs(x).sum() / k, np.abs(x).max())
            assert f.k_support_dual_norm(x, k) == pytest.approx(expected)


def test_k_support_sparse_path(family):
    result = family("lp:3", 4).k_support_bracket(np.array([0.0, 2.0, -1.0, 0.0]), 2)
    assert result.path == "sparse"
    assert result.value == pytest.approx(parse_source("lp:3")(np.array([2.0, -1.0])))


@pytest.mark.parametrize("source", ["l2", "lp:1.5", "lp:3"])
def test_k_support_bracket_closes_between_norm_and_l1(family, source, rng):
    f = family(source, 4)
    for _ in range(5):
        x = rng.standard_normal(4)
        result = f.k_support_bracket(x, 2)
        assert result.gap <= 1e-6 * max(1.0, result.upper)
        assert f.source(x) - 1e-9 <= result.value <= np.abs(x).sum() + 1e-9


def test_k_support_dual_certificate(family, rng):
    f = family("l2", 4)
    x = rng.standard_normal(4)
    result = f.k_support_bracket(x, 2)
    y = result.dual_witness
    assert float(np.dot(x, y)) / f.top_k_dual_norm(y, 2) == pytest.approx(result.value, rel=1e-6)


def test_k_support_column_generation_for_weighted_norm(rng):
    f = KNormFamily(weighted_lp_norm(2.0, [1.0, 2.0, 0.5]), 3)
    x = rng.standard_normal(3)
    result = f.k_support_bracket(x, 2)
    assert result.gap <= 1e-6 * max(1.0, result.upper)
    assert f.source(x) - 1e-9 <= result.value
    assert result.value <= f.k_support_dual_norm(x, 1) + 1e-9


def test_k_support_zero_and_level_zero(family):
    f = family("l2", 3)
    assert f.k_support_dual_norm(np.zeros(3), 0) == 0.0
    with pytest.raises(ArgumentError):
        f.k_support_dual_norm(np.ones(3), 0)


def test_coordinate_k_dual_norm(family):
    f = family("l2", 3)
    y = np.array([2.0, -5.0, 1.0])
    assert f.coordinate_k_dual_norm(y, 2) == pytest.approx(math.sqrt(29.0))
    assert f.coordinate_k_dual_norm(y, 3) == pytest.approx(dual_norm(f.source, y))


def test_coordinate_k_matches_restricted_lq_norms(family, rng):
    f = family("lp:3", 4)
    q = 1.5
    for _ in range(3):
        y = rng.standard_normal(4)
        for k in range(1, 5):
            expected = max(np.sum(np.abs(y[list(K)]) ** q) ** (1.0 / q)
                           for size in range(1, k + 1) for K in itertools.combinations(range(4), size))
            assert f.coordinate_k_dual_norm(y, k) == pytest.approx(expected, rel=1e-12)


def skew_restricted_duals(y):
    # ⦀x⦀ = ‖Ax‖₁ com A = [[1, -1], [0, 1]]: dual ‖A^{-T}y‖∞, restrições em R_{1} e R_{2} explícitas
    return {(0,): abs(y[0]), (1,): abs(y[1]) / 2.0, (0, 1): max(abs(y[0]), abs(y[0] + y[1]))}


@pytest.mark.parametrize("y", [[0.3, -2.0], [1.0, 1.0], [-2.0, 0.5], [0.0, 3.0]])
def test_coordinate_k_for_non_monotone_source(y):
    n = skew_norm()
    f = KNormFamily(n, 2)
    y = np.array(y)
    duals = skew_restricted_duals(y)
    for k in (1, 2):
        expected = max(v for K, v in duals.items() if len(K) <= k)
        oracle = max(maximize_linear_over_ball(n, y, support=K)[0]
                     for size in range(1, k + 1) for K in itertools.combinations(range(2), size))
        assert oracle == pytest.approx(expected, rel=1e-5, abs=1e-9)
        assert f.coordinate_k_dual_norm(y, k) == pytest.approx(expected, rel=1e-5, abs=1e-9)


@pytest.mark.parametrize("source", ["l1", "l2", "lp:1.5", "lp:3", "linf"])
def test_generalized_cauchy_schwarz(family, source, rng):
    d = 4
    f = family(source, d)
    for _ in range(20):
        x, y = rng.standard_normal(d), rng.standard_normal(d)
        for k in range(1, d + 1):
            bound = f.k_support_dual_norm(x, k) * f.top_k_dual_norm(y, k)
            assert float(np.dot(x, y)) <= bound + 1e-9 * max(1.0, bound)


@pytest.mark.parametrize("source, d", [("l2", 4), ("linf", 3), ("lp:1.5", 3)])
def test_ball_nesting(family, source, d):
    report = family(source, d).ball_nesting_check(samples=100, seed=3)
    assert report.holds
    assert report.samples_used == 100
