import math

import pytest
from scipy.integrate import quad

from sobstab.params import (
    ParameterDomainError,
    Params,
    normalization_kappa0,
    sharp_constant,
    sphere_area,
)

PAIRS = [(3, 2.0), (4, 2.0), (4, 2.5), (5, 3.0), (5, 2.0)]


def test_sphere_area_low_dimensions():
    assert sphere_area(2) == pytest.approx(2.0 * math.pi, rel=1e-14)
    assert sphere_area(3) == pytest.approx(4.0 * math.pi, rel=1e-14)
    assert sphere_area(4) == pytest.approx(2.0 * math.pi**2, rel=1e-14)


@pytest.mark.parametrize("n,p", [(3, 1.9), (3, 3.0), (4, 4.0), (2, 2.0), (1, 0.5)])
def test_domain_rejection(n, p):
    with pytest.raises(ParameterDomainError):
        sharp_constant(n, p)


def test_non_integer_dimension_rejected():
    with pytest.raises(ParameterDomainError):
        Params.make(3.5, 2.0)


def _radial_integral(dens, n):
    # substitute r = e^s; power-law tails become exponential decay in s
    val, err = quad(
        lambda s: dens(math.exp(s)) * math.exp(n * s), -40.0, 40.0,
        limit=400, epsabs=0.0, epsrel=1e-12,
    )
    assert err < 1e-11 * abs(val)
    return val


@pytest.mark.parametrize("n,p", PAIRS)
def test_sharp_constant_matches_independent_rayleigh(n, p):
    # independent oracle: adaptive quadrature of the explicit radial profile
    pp = p / (p - 1.0)
    m = (n - p) / p
    pstar = n * p / (n - p)
    omega = sphere_area(n)

    def dens_grad(r):
        dv = m * pp * r ** (pp - 1.0) * (1.0 + r**pp) ** (-m - 1.0)
        return dv**p

    def dens_val(r):
        return (1.0 + r**pp) ** (-m * pstar)

    energy = omega * _radial_integral(dens_grad, n)
    mass = omega * _radial_integral(dens_val, n)
    rayleigh = (energy / mass ** (p / pstar)) ** (1.0 / p)
    assert sharp_constant(n, p) == pytest.approx(rayleigh, rel=1e-9)


@pytest.mark.parametrize("n,p", PAIRS)
def test_kappa0_normalizes_lpstar_mass(n, p):
    pp = p / (p - 1.0)
    m = (n - p) / p
    pstar = n * p / (n - p)
    k0 = normalization_kappa0(n, p)
    mass = sphere_area(n) * _radial_integral(
        lambda r: (k0 * (1.0 + r**pp) ** (-m)) ** pstar, n
    )
    assert mass == pytest.approx(1.0, rel=1e-9)


def test_params_derived_fields(params):
    assert params.pstar == pytest.approx(
        params.n * params.p / (params.n - params.p), rel=1e-15
    )
    assert params.pprime == pytest.approx(params.p / (params.p - 1.0), rel=1e-15)
    assert params.Sp == pytest.approx(params.S**params.p, rel=1e-14)
    assert params.alpha1 == pytest.approx((params.p - 1.0) * params.Sp, rel=1e-14)
    assert params.alpha2 == pytest.approx((params.pstar - 1.0) * params.Sp, rel=1e-14)
    assert params.alpha1 < params.alpha2
    assert params.omega == pytest.approx(sphere_area(params.n), rel=1e-15)


def test_params_frozen(params):
    with pytest.raises(Exception):
        params.p = 3.0
