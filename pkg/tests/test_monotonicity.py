import numpy as np
import pytest

from sources.custom_norm import skew_norm, weighted_lp_norm
from sources.lp_norm import LpNorm
from src.monotonicity import (
    Property,
    Verdict,
    check_orthant_monotonic,
    check_orthant_strictly_monotonic,
    coordinate_subspace_check,
    osm_pair_status,
    reverify_counterexample,
    strict_chain_check,
    support_preserving_dual_pair,
    verify_declared_flags,
)
from src.normcore import is_dual_pair, parse_source
from src.utils.errors import ArgumentError


@pytest.mark.parametrize("spec", ["l1", "l2", "lp:3", "linf"])
def test_lp_norms_are_orthant_monotonic(spec):
    report = check_orthant_monotonic(parse_source(spec))
    assert report.verdict == Verdict.PASSES
    assert report.method == "analytic"


@pytest.mark.parametrize("spec", ["l1", "l2", "lp:3"])
def test_finite_p_is_orthant_strictly_monotonic(spec):
    assert check_orthant_strictly_monotonic(parse_source(spec)).passes


def test_linf_is_not_orthant_strictly_monotonic():
    n = LpNorm(float("inf"))
    report = check_orthant_strictly_monotonic(n)
    assert report.verdict == Verdict.FAILS
    x, x_prime = report.counterexample
    np.testing.assert_array_equal(x, [1.0, 0.0])
    np.testing.assert_array_equal(x_prime, [1.0, 1.0])
    assert n(x) == n(x_prime) == 1.0
    assert reverify_counterexample(n, report)


def test_skew_norm_counterexample_reverifies():
    n = skew_norm()
    report = check_orthant_monotonic(n, samples=2000, seed=0)
    assert report.property == Property.OM
    assert report.verdict == Verdict.FAILS
    x, x_prime = report.counterexample
    assert np.all(np.abs(x) <= np.abs(x_prime))
    assert np.all(x * x_prime >= 0)
    assert n(x) > n(x_prime)
    assert reverify_counterexample(n, report)


def test_weighted_norm_sampling_verdicts():
    n = weighted_lp_norm(2.0, [1.0, 3.0, 0.5])
    assert check_orthant_monotonic(n, samples=500, seed=1).passes
    assert check_orthant_strictly_monotonic(n, samples=500, seed=1).passes


def test_osm_implies_om_on_same_seed():
    n = weighted_lp_norm(1.5, [2.0, 1.0])
    strict = check_orthant_strictly_monotonic(n, samples=300, seed=5)
    plain = check_orthant_monotonic(n, samples=300, seed=5)
    assert not strict.passes or plain.passes


def test_zero_samples_is_inconclusive():
    report = check_orthant_monotonic(skew_norm(), samples=0)
    assert report.verdict == Verdict.INCONCLUSIVE


def test_verify_declared_flags_for_linf():
    n = LpNorm(float("inf"))
    result = verify_declared_flags(n, samples=100, dim=3)
    assert result['consistent']
    assert result['orthant_strictly_monotonic']['observed'] == "fails"
    assert result['verified'] == {
        'orthant_monotonic': True,
        'orthant_strictly_monotonic': False,
        'dual_orthant_strictly_monotonic': True,
    }


def test_verify_declared_flags_detects_wrong_declaration():
    honest = skew_norm()
    liar = type(honest)("skew-liar", evaluate=honest.evaluate, orthant_monotonic=True, dim=2)
    result = verify_declared_flags(liar, samples=2000, dim=2)
    assert not result['orthant_monotonic']['consistent']
    assert not result['consistent']
    assert result['verified']['orthant_monotonic'] is False
    assert not hasattr(liar, "verified_flags")


@pytest.mark.parametrize("spec, expected", [
    ("l2", True), ("lp:1.5", True), ("lp:3", True), ("l1", False), ("linf", False),
])
def test_osm_pair_status(spec, expected):
    assert osm_pair_status(parse_source(spec)) is expected


def test_osm_pair_status_leaves_norm_untouched():
    n = weighted_lp_norm(2.0, [1.0, 3.0])
    before = dict(vars(n))
    assert osm_pair_status(n, dim=2, samples=200) is True
    assert osm_pair_status(n, dim=2, samples=200) is True
    assert vars(n) == before


def test_osm_pair_status_refutes_false_declaration():
    honest = skew_norm()
    liar = type(honest)("skew-osm-liar", evaluate=honest.evaluate, orthant_monotonic=True,
                        orthant_strictly_monotonic=True, dual_orthant_strictly_monotonic=True, dim=2)
    assert osm_pair_status(liar, dim=2, samples=2000) is False


@pytest.mark.parametrize("spec, u, v", [
    ("l2", [3, 4, 0], [3, 4, 0]),
    ("l1", [3, -7, 0], [1, -1, 0]),
    ("lp:3", [1, 2, 0], [1, 4, 0]),
])
def test_support_preserving_dual_pair(spec, u, v):
    n = parse_source(spec)
    u = np.array(u, dtype=float)
    result = support_preserving_dual_pair(n, u)
    assert is_dual_pair(n, u, result)
    # igual a v a menos de escala positiva
    scale = result[0] / v[0]
    assert scale > 0
    np.testing.assert_allclose(result, scale * np.array(v, dtype=float), rtol=1e-9, atol=1e-12)


def test_support_preserving_dual_pair_rejects_zero():
    with pytest.raises(ArgumentError):
        support_preserving_dual_pair(LpNorm(2.0), np.zeros(3))


def test_strict_chain_l2(family):
    report = strict_chain_check(family("l2", 3), np.array([3.0, 4.0, 0.0]))
    assert report.holds
    assert report.l0 == 2
    assert report.profile == pytest.approx([4.0, 5.0, 5.0])


def test_strict_chain_fails_for_l1_source(family):
    report = strict_chain_check(family("l1", 3), np.array([5.0, 5.0, 0.0]))
    assert not report.holds
    assert report.failing_index == 1
    assert report.failure == "strict"
    assert not report.dual_osm_declared


def test_strict_chain_dense_vectors(family, rng):
    f = family("l2", 5)
    for _ in range(10):
        y = rng.standard_normal(5)
        assert strict_chain_check(f, y).holds


@pytest.mark.parametrize("spec, strict", [("l2", True), ("l1", True), ("linf", False)])
def test_coordinate_subspace_monotonicity(spec, strict):
    report = coordinate_subspace_check(parse_source(spec), samples=300, seed=2, dim=4, strict=strict)
    assert report.holds
