import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import gaussian_line_integral_dr
from tomolab.bundle import BundleGrid
from tomolab.experiments import gradient_of_bump, rotated_gradient_of_bump
from tomolab.grid import ImageGrid, VectorFieldGrid
from tomolab.metrics import rel_l2
from tomolab.projector import DopplerSinogram, Sinogram, doppler_forward, sinogram_r, sinogram_theta
from tomolab.vector import (
    KernelError,
    gradient_field,
    helmholtz_decompose,
    periodic_divergence,
    periodic_helmholtz,
    potential_recover,
    rotated_gradient_field,
    solenoidal_recover,
)


def field_l2(A, B):
    num = np.sum((A.f1.values - B.f1.values) ** 2 + (A.f2.values - B.f2.values) ** 2)
    return np.sqrt(num / np.sum(B.f1.values**2 + B.f2.values**2))


@pytest.fixture(scope="module")
def grad_field():
    return gradient_of_bump(256)


def test_gradient_splits_to_itself(grad_field):
    G, b = grad_field
    parts = helmholtz_decompose(G)
    assert parts.solenoidal.magnitude().max() / G.magnitude().max() < 1e-4
    assert np.abs(parts.h.values - b.values).max() < 1e-6


def test_rotated_gradient_has_no_gradient_part():
    S, psi = rotated_gradient_of_bump(128)
    parts = helmholtz_decompose(S)
    assert parts.gradient.magnitude().max() / S.magnitude().max() < 2e-3
    assert np.abs(parts.psi.values - psi.values).max() < 1e-4


def test_parts_sum_and_divergence(rng):
    n = 64
    F = VectorFieldGrid.from_function(
        lambda a, b: (np.exp(-4 * (a * a + b * b)) * (1 + a), np.exp(-5 * (a * a + b * b)) * b * b), n
    )
    parts = helmholtz_decompose(F)
    total = parts.gradient + parts.solenoidal
    assert np.allclose(total.f1.values, F.f1.values, atol=1e-12)
    grad, sol = parts.padded
    assert np.abs(periodic_divergence(*sol, 2 / n)).max() < 1e-9


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_decomposition_is_linear(a, b):
    n = 32
    F = VectorFieldGrid.from_function(lambda x, y: (np.exp(-6 * (x * x + y * y)), 0 * x), n)
    H = VectorFieldGrid.from_function(lambda x, y: (0 * x, x * np.exp(-6 * (x * x + y * y))), n)
    comb = VectorFieldGrid(F.f1 * a + H.f1 * b, F.f2 * a + H.f2 * b)
    pa, pf, ph = helmholtz_decompose(comb), helmholtz_decompose(F), helmholtz_decompose(H)
    assert np.allclose(pa.gradient.f1.values, a * pf.gradient.f1.values + b * ph.gradient.f1.values, atol=1e-10)


def test_periodic_helmholtz_on_fourier_modes():
    m = 32
    x = 2 * np.pi * np.arange(m) / m
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    h = np.sin(2 * X1 + X2)
    f1, f2 = 2 * np.cos(2 * X1 + X2), np.cos(2 * X1 + X2)
    hh, psi, grad, sol = periodic_helmholtz(f1, f2, 2 * np.pi / m)
    assert np.allclose(hh, h, atol=1e-12)
    assert np.abs(sol[0]).max() < 1e-12 and np.abs(psi).max() < 1e-12


def test_unsupported_field_rejected():
    F = VectorFieldGrid(ImageGrid(np.ones((16, 16))), ImageGrid(np.ones((16, 16))))
    with pytest.raises(ValueError):
        helmholtz_decompose(F)


def test_finite_difference_helpers():
    h = ImageGrid.from_function(lambda a, b: 2 * a - b, 32, supported=False)
    d1, d2 = gradient_field(h)
    assert np.allclose(d1[1:-1, 1:-1], 2) and np.allclose(d2[1:-1, 1:-1], -1)
    r1, r2 = rotated_gradient_field(h)
    assert np.allclose(r1[1:-1, 1:-1], 1) and np.allclose(r2[1:-1, 1:-1], 2)


def test_solenoidal_recover_from_analytic_data():
    s, c = 0.15, (0.1, -0.1)
    r, th = sinogram_r(400), sinogram_theta(360)
    d = DopplerSinogram(gaussian_line_integral_dr(r[:, None], th[None, :], s, c))
    psi, F = solenoidal_recover(d, 128)
    ref = ImageGrid.from_function(lambda a, b: np.exp(-((a - c[0]) ** 2 + (b - c[1]) ** 2) / s**2), 128, supported=False)
    assert rel_l2(psi, ref, ref.disc_mask(0.8)) < 2e-2


def test_solenoidal_round_trip():
    S, _ = rotated_gradient_of_bump(128)
    _, R = solenoidal_recover(doppler_forward(S, 200, 180), 128)
    assert field_l2(R, S) < 0.05


def test_solenoidal_recover_type():
    with pytest.raises(TypeError):
        solenoidal_recover(np.zeros((4, 4)))
    # a plain sinogram is accepted as Doppler data by value
    solenoidal_recover(Sinogram(np.zeros((16, 8))), 16)


def test_potential_recover():
    G, b = gradient_of_bump(128)
    h = potential_recover(G, BundleGrid(128, 32))
    assert rel_l2(h, b) < 0.01


def test_potential_recover_rejects_solenoidal():
    S, _ = rotated_gradient_of_bump(64)
    with pytest.raises(KernelError):
        potential_recover(S, BundleGrid(64, 16))
