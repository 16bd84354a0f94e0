import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import (
    disc_line_integral,
    gaussian_backprojection,
    gaussian_line_integral,
    gaussian_line_integral_dr,
    line_integral_quad,
)
from tomolab.grid import ImageGrid, VectorFieldGrid, make_phantom
from tomolab.projector import (
    DopplerSinogram,
    Sinogram,
    backproject,
    doppler_forward,
    intensities_to_sinogram,
    normal_operator,
    read_sinogram_csv,
    sinogram_r,
    sinogram_theta,
    write_sinogram_csv,
    xray_forward,
)


def test_lattices():
    r = sinogram_r(4)
    assert np.allclose(r, [-0.75, -0.25, 0.25, 0.75])
    assert np.allclose(sinogram_theta(4), [0, np.pi / 2, np.pi, 3 * np.pi / 2])


def test_gaussian_line_integrals():
    s = 0.25
    f = make_phantom("gaussian", {"center": [0.1, -0.05], "sigma": s}, 128)
    g = xray_forward(f, 80, 24)
    exact = gaussian_line_integral(g.r[:, None], g.theta[None, :], s, (0.1, -0.05))
    assert np.abs(g.values - exact).max() / exact.max() < 2e-3


def test_disc_chords():
    f = make_phantom("disc", {"center": [0.2, 0.1], "radius": 0.4}, 256)
    g = xray_forward(f, 100, 16)
    exact = disc_line_integral(g.r[:, None], g.theta[None, :], 0.4, (0.2, 0.1))
    assert np.linalg.norm(g.values - exact) / np.linalg.norm(exact) < 1e-2


def test_line_integral_quadrature_oracle():
    func = lambda a, b: np.exp(-((a - 0.1) ** 2 + 3 * b**2)) * (1 + a * b)
    f = ImageGrid.from_function(func, 256)
    g = xray_forward(f, 20, 8)
    for i, j in [(3, 1), (10, 4), (15, 7)]:
        # the lattice image is truncated near the circle, so integrate only inside it
        ref = line_integral_quad(lambda a, b: func(a, b) * (a * a + b * b < (1 - 4 / 256) ** 2), g.r[i], g.theta[j])
        assert g.values[i, j] == pytest.approx(ref, abs=2e-3)


def test_unsupported_input_rejected():
    f = ImageGrid(np.ones((16, 16)))
    with pytest.raises(ValueError, match="support"):
        xray_forward(f, 8, 8)


def test_step_bounds():
    f = make_phantom("disc", {"radius": 0.3}, 32)
    with pytest.raises(ValueError):
        xray_forward(f, 8, 8, step=0.1)


def test_opposite_lines_agree():
    f = make_phantom("sum", {"terms": [("disc", {"center": [0.3, 0.0], "radius": 0.2}), ("gaussian", {"center": [-0.2, 0.3], "sigma": 0.1})]}, 64)
    g = xray_forward(f, 50, 40)
    # (r, theta) and (-r, theta + pi) are the same line
    assert np.allclose(g.values[::-1, np.r_[20:40, 0:20]], g.values, atol=1e-12)


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_linearity(a, b):
    f1 = make_phantom("disc", {"center": [0.2, 0.0], "radius": 0.3}, 32)
    f2 = make_phantom("gaussian", {"center": [-0.2, 0.1], "sigma": 0.2}, 32)
    lhs = xray_forward(f1 * a + f2 * b, 20, 12).values
    rhs = a * xray_forward(f1, 20, 12).values + b * xray_forward(f2, 20, 12).values
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_backprojection_of_gaussian_sinogram():
    s = 0.2
    n_r, n_t = 400, 120
    r, th = sinogram_r(n_r), sinogram_theta(n_t)
    g = Sinogram(gaussian_line_integral(r[:, None], th[None, :], s))
    b = backproject(g, 32)
    x = b.axis()
    for i, j in [(16, 16), (20, 10), (5, 25)]:
        assert b.values[i, j] == pytest.approx(gaussian_backprojection(x[i], x[j], s), rel=1e-3)


def test_normal_operator_kernel():
    f = make_phantom("bump", {"radius": 0.06, "amplitude": 1.0}, 128)
    mass = f.integral()
    out = normal_operator(f, 128, 256)
    rho = out.radius()
    ring = (rho > 0.3) & (rho < 0.6)
    ratio = out.values[ring] / (2 * mass / rho[ring])
    assert np.abs(ratio - 1).max() < 0.03


def test_adjointness_approximately(rng):
    f = make_phantom("gaussian", {"center": [0.1, 0.2], "sigma": 0.2}, 64)
    h = Sinogram(rng.standard_normal((64, 64)) * np.sqrt(np.clip(1 - sinogram_r(64) ** 2, 0, None))[:, None])
    lhs = np.sum(xray_forward(f, 64, 64).values * h.values) * (2 / 64) * (2 * np.pi / 64)
    rhs = np.sum(f.values * backproject(h, 64).values) * (2 / 64) ** 2
    assert lhs == pytest.approx(rhs, rel=2e-2)


def test_evaluate_hits_nodes_and_interpolates():
    r, th = sinogram_r(10), sinogram_theta(8)
    g = Sinogram(np.add.outer(r, np.cos(th)))
    assert np.allclose(g.evaluate(r[:, None], th[None, :]), g.values)
    mid = 0.5 * (r[3] + r[4])
    assert g.evaluate(mid, th[2]) == pytest.approx(0.5 * (g.values[3, 2] + g.values[4, 2]))


def test_beer_lambert():
    I = Sinogram(np.full((4, 4), np.exp(-2.0)))
    assert np.allclose(intensities_to_sinogram(1.0, I).values, 2.0)
    with pytest.raises(ValueError):
        intensities_to_sinogram(1.0, np.zeros((4, 4)))
    with pytest.raises(ValueError):
        intensities_to_sinogram(1.0, np.full((4, 4), 2.0))


def test_sinogram_csv(tmp_path, rng):
    g = Sinogram(rng.standard_normal((6, 4)), 0.01)
    write_sinogram_csv(g, tmp_path / "g.csv")
    back = read_sinogram_csv(tmp_path / "g.csv")
    assert np.array_equal(back.values, g.values) and back.step == g.step
    text = (tmp_path / "g.csv").read_text().replace("6 4 0.16666666666666666", "6 4 0.2")
    (tmp_path / "bad.csv").write_text(text)
    with pytest.raises(ValueError):
        read_sinogram_csv(tmp_path / "bad.csv")


def test_doppler_of_gradient_vanishes():
    def grad(a, b):
        q = np.exp(-(a * a + b * b) / 0.04)
        return -2 * a / 0.04 * q, -2 * b / 0.04 * q

    F = VectorFieldGrid.from_function(grad, 256)
    d = doppler_forward(F, 100, 36)
    assert isinstance(d, DopplerSinogram)
    assert np.abs(d.values).max() / F.magnitude().max() < 1e-4


def test_doppler_sign_convention():
    # Doppler data of (-d2 psi, d1 psi) is the r-derivative of the X-ray data of psi
    s, c = 0.15, (0.1, -0.1)

    def rot(a, b):
        q = np.exp(-((a - c[0]) ** 2 + (b - c[1]) ** 2) / s**2)
        d1, d2 = -2 * (a - c[0]) / s**2 * q, -2 * (b - c[1]) / s**2 * q
        return -d2, d1

    F = VectorFieldGrid.from_function(rot, 256)
    d = doppler_forward(F, 120, 24)
    exact = gaussian_line_integral_dr(d.r[:, None], d.theta[None, :], s, c)
    assert np.abs(d.values - exact).max() / np.abs(exact).max() < 2e-3
