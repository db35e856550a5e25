import math

import numpy as np
import pytest

from src.factorization import eval_L0
from src.oracle import (
    Grid,
    capra_conjugate_grid,
    fenchel_conjugate_grid,
    gauge_atoms_oracle,
    l0phi_grid_oracle,
    l0phi_simplex_oracle,
)
from src.normcore import l0
from src.utils.errors import ArgumentError, UnsupportedError


def l2_rows(points):
    return np.sqrt(np.sum(points ** 2, axis=1))


def test_grid_validation():
    assert Grid(2).step == pytest.approx(0.02)
    with pytest.raises(ArgumentError):
        Grid(2, resolution=100)
    with pytest.raises(ArgumentError):
        Grid(2, radius=1.0)
    with pytest.raises(UnsupportedError):
        Grid(4)


def test_grid_contains_origin():
    points = Grid(2, resolution=11).points()
    assert np.any(np.all(points == 0.0, axis=1))


def test_fenchel_of_zero_function():
    grid = Grid(2, resolution=21)
    assert fenchel_conjugate_grid(lambda p: np.zeros(len(p)), np.zeros(2), grid) == 0.0


def test_fenchel_of_ball_indicator_is_support_function():
    grid = Grid(2)
    indicator = lambda p: np.where(l2_rows(p) <= 1.0, 0.0, math.inf)
    value = fenchel_conjugate_grid(indicator, np.array([1.0, 0.0]), grid)
    assert abs(value - 1.0) <= grid.step


def test_fenchel_of_norm_vanishes_inside_dual_ball():
    grid = Grid(2, resolution=41)
    value = fenchel_conjugate_grid(l2_rows, np.array([0.3, -0.4]), grid)
    assert value == pytest.approx(0.0, abs=1e-12)


def test_capra_conjugate_grid_of_l0(family, identity):
    f = family("l2", 2)
    grid = Grid(2, resolution=41)
    phi = identity(2)
    fvals = lambda points: np.array([phi(l0(p)) for p in points])
    y = np.array([2.0, 0.0])
    # o acoplamento só depende da direção: o máximo da grade coincide com a fórmula
    assert capra_conjugate_grid(f.source, fvals, y, grid) == pytest.approx(1.0, abs=1e-9)


def test_l0phi_grid_oracle_at_zero(family, identity):
    assert l0phi_grid_oracle(family("l2", 2), identity(2), np.zeros(2), Grid(2, resolution=21)) == 0.0


def test_l0phi_grid_oracle_is_lower_bound(family, identity):
    f = family("lp:3", 2)
    x = np.array([0.3, -0.5])
    lower = l0phi_grid_oracle(f, identity(2), x, Grid(2))
    assert lower <= eval_L0(f, identity(2), x, shortcut=False).upper + 1e-9


def test_l0phi_simplex_oracle_on_sphere(family, identity):
    value = l0phi_simplex_oracle(family("l2", 2), identity(2), np.array([0.6, 0.8]))
    assert value >= 2.0 - 0.05
    assert value <= 2.0 + 1e-9


def test_l0phi_simplex_oracle_outside_ball(family, identity):
    assert l0phi_simplex_oracle(family("l2", 2), identity(2), np.array([3.0, 4.0]), resolution=20) == math.inf


@pytest.mark.parametrize("source, x, k, expected", [
    ("l2", [3, 4], 1, 7.0),
    ("linf", [3, 1, 1], 2, 3.0),
    ("l2", [1, -2, 2], 3, 3.0),
    ("l1", [3, -7, 1], 2, 11.0),
])
def test_gauge_oracle_table_values(family, source, x, k, expected):
    x = np.array(x, dtype=float)
    result = gauge_atoms_oracle(family(source, len(x)), x, k)
    assert result.converged
    assert result.value == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("source", ["l2", "lp:3"])
def test_gauge_oracle_matches_k_support(family, source, rng):
    f = family(source, 4)
    for _ in range(3):
        x = rng.standard_normal(4)
        result = gauge_atoms_oracle(f, x, 2)
        if result.converged:
            assert result.value == pytest.approx(f.k_support_dual_norm(x, 2), rel=1e-5)


def test_gauge_oracle_errors(family):
    with pytest.raises(ArgumentError):
        gauge_atoms_oracle(family("l2", 3), np.zeros(3), 1)
    with pytest.raises(ArgumentError):
        gauge_atoms_oracle(family("l2", 3), np.ones(3), 4)
    with pytest.raises(UnsupportedError):
        gauge_atoms_oracle(family("l2", 7), np.ones(7), 2)


@pytest.mark.parametrize("source, method", [("l1", "lp-box"), ("linf", "lp-polyhedral"), ("lp:3", "slsqp")])
def test_gauge_oracle_polar_program_is_certified_lower_bound(family, rng, source, method):
    f = family(source, 3)
    x = rng.standard_normal(3)
    result = gauge_atoms_oracle(f, x, 2)
    assert result.method == method
    assert result.value <= f.k_support_bracket(x, 2).upper + 1e-9
