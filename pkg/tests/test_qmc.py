import numpy as np
import pytest

from sobstab.extremals import v1_deriv, v1_value
from sobstab.params import Params
from sobstab.qmc import SampleEvaluationError, qmc_integrate


def _value_density(params):
    def f(x):
        r = np.linalg.norm(x, axis=1)
        return v1_value(params, r) ** params.pstar

    return f


def test_value_density_integrates_to_one(params):
    # kappa0 is chosen so the bubble has unit L^{p*} mass
    val, err = qmc_integrate(_value_density(params), params, samples=1 << 14)
    assert err < 1e-12
    assert val == pytest.approx(1.0, abs=1e-10)


def test_gradient_density_integrates_to_sharp_power(params):
    def f(x):
        r = np.linalg.norm(x, axis=1)
        return np.abs(v1_deriv(params, r)) ** params.p

    val, err = qmc_integrate(f, params, samples=1 << 14, density="gradient")
    assert err < 1e-12
    assert val == pytest.approx(params.Sp, rel=1e-10)


def test_crossed_density_estimate(params):
    # value integrand under the gradient density: a genuine QMC estimate
    val, err = qmc_integrate(
        _value_density(params), params, samples=1 << 15, density="gradient"
    )
    assert err > 0
    assert abs(val - 1.0) < max(6.0 * err, 5e-3)


def test_deterministic_given_seed(params):
    # crossed density so the per-sample ratio is not identically 1
    kw = dict(samples=1 << 14, density="gradient")
    a = qmc_integrate(_value_density(params), params, seed=3, **kw)
    b = qmc_integrate(_value_density(params), params, seed=3, **kw)
    assert a == b
    c = qmc_integrate(_value_density(params), params, seed=4, **kw)
    assert c != a


def test_input_validation(params):
    with pytest.raises(ValueError):
        qmc_integrate(_value_density(params), params, samples=512)
    with pytest.raises(ValueError):
        qmc_integrate(_value_density(params), params, density="uniform")
    big = Params.make(8, 2.5)
    with pytest.raises(ValueError):
        qmc_integrate(_value_density(big), big)


def test_non_finite_sample_reported(params):
    def bad(x):
        out = np.ones(x.shape[0])
        out[7] = np.inf
        return out

    with pytest.raises(SampleEvaluationError):
        qmc_integrate(bad, params)
