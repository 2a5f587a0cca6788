import math

import numpy as np
import pytest
from scipy.special import roots_jacobi

from sobstab.extremals import Extremal, profile_deriv, profile_value
from sobstab.fields import (
    ExtremalField,
    Profile,
    SumField,
    ZonalField,
    ZonalHarmonic,
    perturbed_extremal,
    spherical_eigenvalue,
)


def _jacobi_sphere(n, nmu=200):
    alpha = (n - 3) / 2.0
    mu, wmu = roots_jacobi(nmu, alpha, alpha)
    omega = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
    omega_n2 = omega / float(np.sum(wmu))
    return mu, wmu * omega_n2


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("l", [0, 1, 2, 3])
def test_harmonic_normalization(n, l):
    mu, w = _jacobi_sphere(n)
    y = ZonalHarmonic(l, n)
    assert float(w @ y.value(mu) ** 2) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("n", [3, 4])
def test_harmonics_orthogonal(n):
    mu, w = _jacobi_sphere(n)
    for la, lb in ((0, 1), (0, 2), (1, 2), (1, 3)):
        ya, yb = ZonalHarmonic(la, n), ZonalHarmonic(lb, n)
        assert abs(float(w @ (ya.value(mu) * yb.value(mu)))) < 1e-12


def test_harmonic_derivative_fd():
    y = ZonalHarmonic(2, 4)
    mu = np.linspace(-0.9, 0.9, 13)
    h = 1e-6
    fd = (y.value(mu + h) - y.value(mu - h)) / (2.0 * h)
    assert np.allclose(y.deriv(mu), fd, rtol=1e-7)


def test_harmonic_rejects_negative_degree():
    with pytest.raises(ValueError):
        ZonalHarmonic(-1, 4)
    with pytest.raises(ValueError):
        spherical_eigenvalue(-2, 4)


@pytest.mark.parametrize(
    "l,n,expect_mu,expect_mult",
    [(0, 4, 0.0, 1), (1, 4, 3.0, 4), (2, 4, 8.0, 9), (2, 3, 6.0, 5), (3, 3, 12.0, 7)],
)
def test_spherical_eigenvalues(l, n, expect_mu, expect_mult):
    mu, mult = spherical_eigenvalue(l, n)
    assert mu == expect_mu
    assert mult == expect_mult


def _gauss_profile():
    return Profile(
        f=lambda r: np.exp(-(r**2) / 2.0),
        df=lambda r: -r * np.exp(-(r**2) / 2.0),
        name="gauss",
    )


@pytest.mark.parametrize("l", [0, 1, 2])
def test_zonal_field_gradient_fd(params, l):
    fld = ZonalField([(_gauss_profile(), l)], params.n, center=0.4)
    z = np.array([0.3, -0.8, 1.2])
    rho = np.array([0.5, 0.9, 0.2])
    _, gz, grho = fld.value_and_grad(z, rho)
    h = 1e-6
    fd_z = (fld.value(z + h, rho) - fld.value(z - h, rho)) / (2.0 * h)
    fd_rho = (fld.value(z, rho + h) - fld.value(z, rho - h)) / (2.0 * h)
    assert np.allclose(gz, fd_z, rtol=1e-6, atol=1e-10)
    assert np.allclose(grho, fd_rho, rtol=1e-6, atol=1e-10)


def test_extremal_field_matches_profile(params):
    e = Extremal.axial(1.3, 0.7, 0.2, params.n)
    fld = ExtremalField(params, e)
    z, rho = 0.9, 0.4
    r = math.hypot(z - 0.2, rho)
    val, gz, grho = fld.value_and_grad(np.array(z), np.array(rho))
    assert float(val) == pytest.approx(float(profile_value(params, e, r)), rel=1e-14)
    dv = float(profile_deriv(params, e, r))
    assert float(gz) == pytest.approx(dv * (z - 0.2) / r, rel=1e-13)
    assert float(grho) == pytest.approx(dv * rho / r, rel=1e-13)


def test_sum_field_linearity(params):
    e = Extremal()
    base = ExtremalField(params, e)
    bump = ZonalField([(_gauss_profile(), 0)], params.n)
    s = SumField([(2.0, base), (-0.5, bump)])
    z = np.array([0.7])
    rho = np.array([0.3])
    v, gz, gr = s.value_and_grad(z, rho)
    vb, gbz, gbr = base.value_and_grad(z, rho)
    vp, gpz, gpr = bump.value_and_grad(z, rho)
    assert np.allclose(v, 2.0 * vb - 0.5 * vp, rtol=1e-14)
    assert np.allclose(gz, 2.0 * gbz - 0.5 * gpz, rtol=1e-14)
    assert np.allclose(gr, 2.0 * gbr - 0.5 * gpr, rtol=1e-14)


def test_perturbed_extremal_structure(params):
    phi = ZonalField([(_gauss_profile(), 0)], params.n)
    u = perturbed_extremal(params, Extremal(), 0.1, phi)
    z = np.array([1.1])
    rho = np.array([0.0])
    base = ExtremalField(params, Extremal())
    assert float(u.value(z, rho)[0]) == pytest.approx(
        float(base.value(z, rho)[0]) + 0.1 * float(phi.value(z, rho)[0]), rel=1e-14
    )


def test_field_regular_on_axis(params):
    # rho = 0 with z != 0: the mu = +/-1 axis, where the angular terms degenerate
    fld = ZonalField([(_gauss_profile(), 1)], params.n)
    v, gz, gr = fld.value_and_grad(np.array([0.5, -0.5]), np.array([0.0, 0.0]))
    assert np.all(np.isfinite(v)) and np.all(np.isfinite(gz)) and np.all(np.isfinite(gr))
