import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import exit_time_bisect, ray_integral_quad
from tomolab.bundle import (
    ROUNDOFF_FLOOR,
    BundleField,
    BundleGrid,
    area_identity,
    check_report,
    commutator_residuals,
    integral_function,
    observed_order,
    op_V,
    op_X,
    op_Xperp,
    pestov_terms,
    santalo_check,
)
from tomolab.grid import ImageGrid, bump_profile


@pytest.fixture(scope="module")
def grid():
    return BundleGrid(64, 32)


def bump(x1, x2, radius=0.5):
    return bump_profile((x1**2 + x2**2) / radius**2)


def test_grid_validation():
    with pytest.raises(ValueError):
        BundleGrid(7, 16)
    with pytest.raises(ValueError):
        BundleGrid(16, 2)


def test_operators_on_exact_cases(grid):
    m = grid.mask
    u = grid.from_function(lambda a, b, t: a * np.cos(t) + b * np.sin(t))
    assert np.abs(op_X(u).values[m] - 1).max() < 1e-12
    u = grid.from_function(lambda a, b, t: a * np.sin(t) - b * np.cos(t))
    assert np.abs(op_Xperp(u).values[m] - 1).max() < 1e-12
    u = grid.from_function(lambda a, b, t: np.cos(3 * t) * (1 + a))
    ref = grid.from_function(lambda a, b, t: -3 * np.sin(3 * t) * (1 + a))
    assert np.abs(op_V(u).values - ref.values).max() < 1e-11


def test_X_is_second_order_on_quadratics(grid):
    u = grid.from_function(lambda a, b, t: a * a + a * b)
    ref = grid.from_function(lambda a, b, t: (2 * a + b) * np.cos(t) + a * np.sin(t))
    assert np.abs(op_X(u).values - ref.values)[grid.mask].max() < 1e-12


def test_zero_field_has_zero_residuals(grid):
    res = commutator_residuals(grid.zeros())
    assert all(r == 0 for r, _ in res.values())


def test_linear_field_single_harmonic(grid):
    u = grid.from_function(lambda a, b, t: (2 * a - b + 0.5) * np.cos(t))
    res, ref = commutator_residuals(u)["XV-Xperp"]
    assert res < 1e-8 * max(ref, 1)


def test_commutators_on_compact_field(grid):
    u = grid.from_function(lambda a, b, t: bump(a, b) * (np.sin(t) + a * np.cos(2 * t)), compact=True)
    for name, (res, ref) in commutator_residuals(u).items():
        assert res <= ROUNDOFF_FLOOR * ref, name


def test_pestov_identity(grid):
    u = grid.from_function(lambda a, b, t: bump(a, b) * np.sin(t), compact=True)
    a, b, c, res = pestov_terms(u)
    assert abs(res) / a < 1e-10
    with pytest.raises(ValueError):
        pestov_terms(grid.from_function(lambda a, b, t: 1.0))


def test_santalo_and_area():
    g = BundleGrid(128, 64)
    lhs, rhs = santalo_check(g.from_function(lambda a, b, t: 1.0))
    assert lhs == pytest.approx(2 * np.pi**2, rel=5e-3)
    assert rhs == pytest.approx(2 * np.pi**2, rel=5e-3)
    assert area_identity(g) == pytest.approx(np.pi, rel=5e-3)


def test_santalo_with_fiber_dependence(grid):
    u = grid.from_function(lambda a, b, t: (1 + a * np.cos(t)) * np.exp(-b * b))
    lhs, rhs = santalo_check(u)
    assert lhs == pytest.approx(rhs, rel=1e-2)


def test_boundary_partition(grid):
    inward, outward, tangential, dot = grid.boundary_partition()
    total = inward.astype(int) + outward + tangential
    assert np.all(total == 1)
    assert inward.sum() == outward.sum()


def test_integral_of_one_is_exit_time(grid):
    u = integral_function(ImageGrid.from_function(lambda a, b: 1.0 + 0 * a, 64, supported=False), grid)
    x = grid.axis()
    for i, j, m in [(32, 32, 0), (10, 40, 5), (50, 20, 17)]:
        tau = exit_time_bisect((x[i], x[j]), (np.cos(grid.theta[m]), np.sin(grid.theta[m])))
        assert u.values[i, j, m] == pytest.approx(tau, abs=1e-12)


def test_integral_function_against_quadrature():
    g = BundleGrid(128, 16)
    func = lambda a, b: bump(a, b, 0.6) * (1 + 0.5 * a)
    u = integral_function(ImageGrid.from_function(func, 128), g)
    x = g.axis()
    for i, j, m in [(64, 64, 3), (40, 80, 9), (90, 30, 14)]:
        v = (np.cos(g.theta[m]), np.sin(g.theta[m]))
        tau = exit_time_bisect((x[i], x[j]), v)
        assert u.values[i, j, m] == pytest.approx(ray_integral_quad(func, (x[i], x[j]), v, tau), abs=2e-3)


def test_transport_equation():
    g = BundleGrid(128, 32)
    f = ImageGrid.from_function(lambda a, b: bump(a, b), 128)
    res = op_X(integral_function(f, g)) + BundleField.pullback(g, f)
    assert np.abs(res.values[g.support_mask]).max() < 2e-2


def test_integral_function_checks(grid):
    with pytest.raises(ValueError):
        integral_function(ImageGrid.from_function(lambda a, b: a, 32), grid)
    with pytest.raises(TypeError):
        integral_function(np.ones((64, 64)), grid)


@given(st.floats(1e-6, 1.0), st.floats(1e-6, 1.0))
def test_observed_order(coarse, ratio):
    order, floor = observed_order(coarse, coarse * ratio, 1.0, 1.0, floor=1e-12)
    assert not floor
    assert order == pytest.approx(-np.log2(ratio))


def test_floor_rule():
    assert observed_order(1e-15, 2e-15) == (float("inf"), True)


def test_check_report_is_json(grid):
    rec = json.loads(check_report("pestov", grid, 1e-3, {"VXu": 2.0}, float("inf")))
    assert set(rec) == {"check", "grid", "residual", "norm_refs", "order_estimate"}
    assert rec["order_estimate"] == "inf"
