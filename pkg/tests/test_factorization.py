import math

import numpy as np
import pytest

from src.capra import PhiFunction, subgradient_construct
from src.factorization import (
    Decomposition,
    L0Solver,
    conjugate_lower_bound,
    eval_L0,
    ray_lower_bound,
    rm_subdiff_coincidence_check,
    sphere_coincidence_check,
    sweep_segment,
    variational_phi_l0,
)
from src.normcore import l0
from src.utils.errors import ArgumentError


@pytest.mark.parametrize("shortcut", [True, False])
def test_eval_on_sphere_equals_phi_of_l0(family, identity, shortcut):
    result = eval_L0(family("l2", 3), identity(3), np.array([0.6, 0.8, 0.0]), shortcut=shortcut)
    assert result.value == pytest.approx(2.0, abs=1e-6)
    assert result.lower <= result.upper + 1e-12


def test_sphere_shortcut_path(family, identity):
    result = eval_L0(family("l2", 3), identity(3), np.array([0.6, 0.8, 0.0]))
    assert result.path == "sphere"
    assert result.upper == 2.0


@pytest.mark.parametrize("t", [0.1, 0.25, 0.5, 0.9, 1.0])
def test_eval_on_segment_is_linear(family, identity, t):
    result = eval_L0(family("l2", 2), identity(2), np.array([t, 0.0]), shortcut=False)
    assert result.value == pytest.approx(t, abs=1e-6)


def test_eval_outside_ball_is_infinite(family, identity):
    result = eval_L0(family("l2", 2), identity(2), np.array([3.0, 4.0]))
    assert result.value == math.inf
    assert result.path == "infeasible"


def test_eval_at_zero(family, identity):
    result = eval_L0(family("lp:3", 3), identity(3), np.zeros(3))
    assert result.value == 0.0


def test_eval_requires_factorization_hypotheses(family):
    with pytest.raises(ArgumentError):
        eval_L0(family("l2", 2), PhiFunction((1.0, 2.0, 3.0)), np.array([0.5, 0.0]))


def test_witness_decomposition_reconstructs_x(family, rng):
    f = family("lp:1.5", 3)
    phi = PhiFunction.squares(3)
    x = rng.standard_normal(3)
    x = 0.7 * x / f.source(x)
    result = eval_L0(f, phi, x, shortcut=False)
    np.testing.assert_allclose(result.witness.reconstruct(), x, atol=1e-8)
    assert result.witness.cost(f, phi) <= result.upper + 1e-6
    assert result.gap <= 1e-6 * max(1.0, result.upper)


def test_dual_witness_certifies_lower_bound(family, identity, rng):
    f = family("l2", 3)
    x = np.array([0.3, -0.2, 0.1])
    result = eval_L0(f, identity(3), x, shortcut=False)
    assert conjugate_lower_bound(f, identity(3), x, result.dual_witness) <= result.upper + 1e-9


def test_eval_is_convex_on_midpoints(family, rng):
    f = family("l2", 3)
    phi = PhiFunction.squares(3)
    for _ in range(5):
        a, b = rng.standard_normal(3), rng.standard_normal(3)
        a, b = 0.9 * a / f.source(a), 0.9 * b / f.source(b)
        mid = eval_L0(f, phi, 0.5 * (a + b), shortcut=False).value
        ends = 0.5 * (eval_L0(f, phi, a, shortcut=False).value + eval_L0(f, phi, b, shortcut=False).value)
        assert mid <= ends + 2e-6


def test_eval_is_bounded_by_phi_of_l0_in_ball(family, rng):
    f = family("lp:3", 3)
    phi = PhiFunction.identity(3)
    for _ in range(5):
        x = rng.standard_normal(3)
        x = rng.uniform(0.1, 1.0) * x / f.source(x)
        assert eval_L0(f, phi, x, shortcut=False).upper <= phi(l0(x)) + 1e-6


def test_non_monotone_source_only_brackets():
    from sources.custom_norm import skew_norm
    from src.knorms import KNormFamily

    f = KNormFamily(skew_norm(), 2)
    result = eval_L0(f, PhiFunction.identity(2), np.array([0.2, 0.1]), shortcut=False)
    assert result.lower <= result.upper + 1e-9


def test_ray_lower_bound_breakpoints():
    profile = np.array([0.0, 0.8, 1.0, 1.0])
    phi = np.array([0.0, 1.0, 2.0, 3.0])
    value, lam = ray_lower_bound(profile, phi, pairing=1.0)
    assert value == pytest.approx(2.0)
    # platô entre os pontos de quebra 5 e 10
    assert 5.0 - 1e-9 <= lam <= 10.0 + 1e-9


def test_solver_dual_value_with_certificate(family, identity):
    f = family("l2", 3)
    x = np.array([0.6, 0.8, 0.0])
    cert = subgradient_construct(f, identity(3), x)
    lower, dual = L0Solver(f, identity(3)).dual_value(x, cert.direction)
    assert lower == pytest.approx(2.0)
    assert conjugate_lower_bound(f, identity(3), x, dual) == pytest.approx(lower)


def test_decomposition_trivial():
    x = np.array([0.0, 7.0, 0.0])
    decomposition = Decomposition.trivial(x, 3)
    np.testing.assert_array_equal(decomposition.parts[0], x)
    assert not np.any(decomposition.parts[1]) and not np.any(decomposition.parts[2])


@pytest.mark.parametrize("source, x, expected", [
    ("l2", [0, 7, 0], 1.0),
    ("l2", [1, 1], 2.0),
    ("lp:3", [2, -1, 1], 3.0),
])
def test_variational_formula(family, source, x, expected):
    x = np.array(x, dtype=float)
    f = family(source, len(x))
    result = variational_phi_l0(f, PhiFunction.identity(len(x)), x)
    assert result.value == expected
    assert result.solver.upper == pytest.approx(expected, abs=1e-6)
    level = l0(x)
    np.testing.assert_array_equal(result.witness.parts[level - 1], x)


def test_variational_formula_rejects_zero(family, identity):
    with pytest.raises(ArgumentError):
        variational_phi_l0(family("l2", 2), identity(2), np.zeros(2))


def test_sphere_coincidence_identity(family, identity):
    report = sphere_coincidence_check(family("l2", 4), identity(4), samples=15, seed=1)
    assert report.holds
    assert report.max_residual <= 1e-6


def test_sphere_coincidence_squares_l1_5(family):
    report = sphere_coincidence_check(family("lp:1.5", 4), PhiFunction.squares(4), samples=10, seed=2)
    assert report.holds


def test_one_sparse_sphere_points_have_value_one(family, identity):
    f = family("lp:3", 3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = -1.0
        assert eval_L0(f, identity(3), e, shortcut=False).value == pytest.approx(1.0, abs=1e-6)


def test_rm_subdiff_member_agrees(family, identity):
    report = rm_subdiff_coincidence_check(family("l2", 3), identity(3),
                                          np.array([0.6, 0.8, 0.0]), np.array([3.0, 4.0, 0.0]))
    assert report.agree
    assert report.member and report.inequality_holds


def test_rm_subdiff_far_vector_agrees(family, identity):
    report = rm_subdiff_coincidence_check(family("l2", 3), identity(3),
                                          np.array([0.6, 0.8, 0.0]), np.array([100.0, 0.0, 0.0]))
    assert report.agree
    assert not report.member and not report.inequality_holds
    assert report.violating_probe is not None


def test_rm_subdiff_zero_dual_vector_agrees(family, identity):
    report = rm_subdiff_coincidence_check(family("l2", 2), identity(2), np.array([1.0, 0.0]), np.zeros(2))
    assert report.agree
    assert not report.member


def test_rm_subdiff_requires_sphere_point(family, identity):
    with pytest.raises(ArgumentError):
        rm_subdiff_coincidence_check(family("l2", 2), identity(2), np.array([0.5, 0.0]), np.zeros(2))


def test_rm_subdiff_requires_factorization_hypotheses(family):
    with pytest.raises(ArgumentError):
        rm_subdiff_coincidence_check(family("l2", 2), PhiFunction((1.0, 2.0, 3.0)),
                                     np.array([1.0, 0.0]), np.array([1.0, 0.0]))


def test_rm_subdiff_checks_interior_points(family, identity):
    f = family("l2", 2)
    s, y = np.array([0.6, 0.8]), np.array([3.0, 4.0])
    sphere_only = rm_subdiff_coincidence_check(f, identity(2), s, y, random_probes=0, interior_points=0)
    with_interior = rm_subdiff_coincidence_check(f, identity(2), s, y, random_probes=0, interior_points=4)
    # {0, s, ±e1, ±e2, s restrito a cada coordenada} e depois s/2 mais 4 pontos interiores
    assert sphere_only.probes == 8 + 1
    assert with_interior.probes == 8 + 1 + 4
    assert with_interior.agree and with_interior.member


def test_rm_subdiff_interior_points_respect_subgradient_inequality(family, identity):
    f = family("lp:3", 3)
    s = np.array([0.0, 1.0, 0.0])
    cert = subgradient_construct(f, identity(3), s)
    report = rm_subdiff_coincidence_check(f, identity(3), s, cert.y, random_probes=0, interior_points=8)
    assert report.member and report.inequality_holds


def test_sweep_segment_rows(family, identity):
    rows = sweep_segment(family("l2", 2), identity(2), np.array([0.0, 0.5]), np.array([1.0, 0.0]),
                         [0.0, 0.5, 1.0])
    assert [row.t for row in rows] == [0.0, 0.5, 1.0]
    assert rows[0].phi_l0 == 1.0 and rows[1].phi_l0 == 2.0
    assert rows[0].upper == pytest.approx(0.5, abs=1e-6)
    assert rows[2].upper == math.inf
