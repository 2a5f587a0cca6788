import math

import numpy as np
import pytest

from sobstab.quadrature import (
    IntegrandEvaluationError,
    QuadratureConstructionError,
    build_rule,
    integrate_zonal,
    reference_beta_integral,
)


def test_build_rule_validates_count(params):
    with pytest.raises(ValueError):
        build_rule(params, count=32)


def test_build_rule_detects_bad_cutoff(params):
    # a tiny rmax cannot reproduce the reference tail integral
    with pytest.raises(QuadratureConstructionError):
        build_rule(params, rmax=2.0)


def test_reference_beta_integral_oracle(params):
    from scipy.integrate import quad

    # integrate in s = log r so the power-law tail decays exponentially
    val = quad(
        lambda s: math.exp(params.n * s) * (1 + math.exp(s) ** params.pprime) ** (-params.n),
        -40.0,
        40.0,
        limit=400,
    )[0]
    assert reference_beta_integral(params) == pytest.approx(val, rel=1e-10)


def test_radial_gaussian_moment(params, rule):
    # int_0^inf r^{n-1} e^{-r^2} dr = Gamma(n/2)/2
    got = rule.integrate(rule.nodes ** (params.n - 1) * np.exp(-rule.nodes**2))
    assert got == pytest.approx(math.gamma(params.n / 2.0) / 2.0, rel=1e-9)


def test_zonal_gaussian_full_space(params, rule):
    got = integrate_zonal(rule, lambda r, mu: np.exp(-(r**2)), params)
    assert got == pytest.approx(math.pi ** (params.n / 2.0), rel=1e-9)


def test_zonal_second_angular_moment(params, rule):
    # int e^{-|x|^2} (x1/|x|)^2 dx = pi^{n/2} / n by symmetry
    got = integrate_zonal(rule, lambda r, mu: np.exp(-(r**2)) * mu**2, params)
    assert got == pytest.approx(math.pi ** (params.n / 2.0) / params.n, rel=1e-9)


def test_zonal_odd_moment_vanishes(params, rule):
    got = integrate_zonal(rule, lambda r, mu: np.exp(-(r**2)) * mu, params)
    assert abs(got) < 1e-14


def test_radial_only_integrand_broadcasts(params, rule):
    grid = rule.zonal_grid(params)
    vals = np.exp(-grid.R**2)  # shape (nr, 1)
    assert grid.integrate(vals) == pytest.approx(math.pi ** (params.n / 2.0), rel=1e-9)


def test_non_finite_integrand_reported(params, rule):
    grid = rule.zonal_grid(params)
    vals = np.zeros((grid.r.size, grid.nmu))
    vals[3, 5] = np.nan
    with pytest.raises(IntegrandEvaluationError):
        grid.integrate(vals)


def test_zonal_grid_cached(params, rule):
    assert rule.zonal_grid(params) is rule.zonal_grid(params)


def test_points_center_shift(params, rule):
    grid = rule.zonal_grid(params)
    z0, rho0 = grid.points()
    z1, rho1 = grid.points(center=2.5)
    assert np.allclose(z1 - z0, 2.5)
    assert np.array_equal(rho0, rho1)
