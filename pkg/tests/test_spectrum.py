import math

import numpy as np
import pytest

from sobstab.extremals import Extremal, dlam_profile, profile_value
from sobstab.fields import ExtremalField, Profile, ZonalField
from sobstab.spectrum import (
    DecayFitError,
    MeshSpec,
    alpha3,
    build_channel,
    count_zeros,
    decay_fit,
    expansion_consistency,
    mode_projections,
    polar_apply,
    second_variation,
    solve_channel,
)


def test_mesh_spec_validation():
    with pytest.raises(ValueError):
        MeshSpec(rmin=1.0, rmax=0.5)
    with pytest.raises(ValueError):
        MeshSpec(elements=4)
    spec = MeshSpec(elements=100)
    assert spec.refined().elements == 200
    r = spec.r_nodes()
    assert r[0] == pytest.approx(spec.rmin, rel=1e-12)
    assert r[-1] == pytest.approx(spec.rmax, rel=1e-12)


def test_known_eigenvalues(params, channel_pairs):
    pairs = channel_pairs(0, 2)
    assert pairs[0].alpha == pytest.approx(params.alpha1, rel=1e-3)
    assert pairs[1].alpha == pytest.approx(params.alpha2, rel=1e-3)
    pair1 = channel_pairs(1, 1)[0]
    assert pair1.alpha == pytest.approx(params.alpha2, rel=1e-3)


def test_eigenvalue_ordering_and_normalization(params, channel_pairs, rule):
    pairs = channel_pairs(0, 3)
    alphas = [p.alpha for p in pairs]
    assert alphas == sorted(alphas)
    # FEM normalization: unit mass against the v^{p*-2} weight
    from sobstab.functionals import weighted_mass

    phi = ZonalField([(pairs[0].profile(), 0)], params.n)
    assert weighted_mass(Extremal(), phi, params, rule) == pytest.approx(1.0, rel=1e-3)


def test_eigenfunction_matches_known_mode(params, channel_pairs, mesh):
    # first l=0 mode is v itself up to normalization; check w-weighted correlation
    r = mesh.r_nodes()
    pair = channel_pairs(0, 1)[0]
    v = profile_value(params, Extremal(), r)
    # trapezoid in s = log r, with the r ds Jacobian folded into the weight
    w = v ** (params.pstar - 2.0) * r**params.n
    s = np.log(r)
    dot = np.trapezoid(w * pair.f * v, s)
    na = math.sqrt(np.trapezoid(w * pair.f**2, s))
    nb = math.sqrt(np.trapezoid(w * v**2, s))
    assert dot / (na * nb) > 0.999


def test_zero_counts_follow_oscillation(channel_pairs):
    pairs = channel_pairs(0, 3)
    assert [p.zeros for p in pairs] == [0, 1, 2]
    assert channel_pairs(1, 1)[0].zeros == 0


def test_solve_channel_validates_k(params, mesh):
    with pytest.raises(ValueError):
        solve_channel(build_channel(params, 0, mesh), 0, params)


def test_alpha3_gap_positive(params, mesh):
    a3, l3, gap = alpha3(params, mesh)
    assert a3 > params.alpha2
    assert gap > 1e-3
    assert l3 in (0, 1, 2)


def test_count_zeros():
    assert count_zeros(np.array([1.0, 2.0, 1.0])) == 0
    assert count_zeros(np.array([1.0, -1.0, 1.0])) == 2
    assert count_zeros(np.array([1.0, 1e-12, -1.0])) == 1
    assert count_zeros(np.array([0.0, 0.0])) == 0


def test_decay_fit_recovers_power_law():
    r = np.geomspace(1.0, 1e4, 200)
    f = 3.0 * r**-1.75
    assert decay_fit(f, (20.0, 2e3), mesh=r) == pytest.approx(1.75, abs=1e-10)


def test_decay_fit_rejects_bad_windows():
    r = np.geomspace(1.0, 1e4, 200)
    f = r**-2.0
    with pytest.raises(ValueError):
        decay_fit(f, (1.0, 100.0), mesh=r)
    with pytest.raises(DecayFitError):
        decay_fit(np.where(r < 100, f, -f), (50.0, 500.0), mesh=r)
    with pytest.raises(DecayFitError):
        decay_fit(f, (100.0, 101.0), mesh=r)
    with pytest.raises(ValueError):
        decay_fit(f, (20.0, 200.0))


def test_eigenpair_profile_interpolates(channel_pairs, mesh):
    pair = channel_pairs(0, 1)[0]
    prof = pair.profile()
    r = mesh.r_nodes()
    assert np.allclose(prof.f(r[::50]), pair.f[::50], rtol=1e-10, atol=1e-12)
    # derivative consistent with finite differences away from the ends
    rr = 2.7
    h = 1e-5
    fd = (prof.f(rr + h) - prof.f(rr - h)) / (2.0 * h)
    assert float(prof.df(rr)) == pytest.approx(float(fd), rel=1e-5)
    assert float(prof.f(mesh.rmax * 10)) == 0.0


def test_polar_apply_reduces_to_laplacian_at_p2(params_p2):
    # at p = 2 the anisotropy drops and the operator is the plain Laplacian
    prof = Profile(
        f=lambda r: np.exp(-r),
        df=lambda r: -np.exp(-r),
        d2f=lambda r: np.exp(-r),
    )
    l, r = 2, 1.3
    n = params_p2.n
    mu = l * (l + n - 2)
    expect = math.exp(-r) * (1.0 - (n - 1) / r) - mu / r**2 * math.exp(-r)
    got = polar_apply(prof, l, r, params_p2)
    assert got == pytest.approx(expect, rel=1e-12)


def test_polar_apply_validation(params):
    prof = Profile(f=lambda r: r, df=lambda r: 1.0)
    with pytest.raises(ValueError):
        polar_apply(prof, 0, 1.0, params)  # missing second derivative
    prof2 = Profile(f=lambda r: r, df=lambda r: 1.0, d2f=lambda r: 0.0)
    with pytest.raises(ValueError):
        polar_apply(prof2, 0, -1.0, params)


def test_second_variation_degenerate_on_dilation(params, rule):
    e = Extremal()
    from sobstab.extremals import dlam_profile_deriv

    dil = ZonalField(
        [(Profile(
            f=lambda r: dlam_profile(params, e, r),
            df=lambda r: dlam_profile_deriv(params, e, r)), 0)],
        params.n,
    )
    from sobstab.functionals import a_form

    sv = second_variation(dil, params, rule)
    scale = params.p * a_form(e, dil, dil, params, rule)
    assert abs(sv) <= 1e-4 * scale


def test_expansion_consistency_validation(params, rule):
    phi = ZonalField(
        [(Profile(f=lambda r: np.exp(-(r**2)), df=lambda r: -2 * r * np.exp(-(r**2))), 0)],
        params.n,
    )
    with pytest.raises(ValueError):
        expansion_consistency(phi, params, rule, [0.01, 0.02])
    with pytest.raises(ValueError):
        expansion_consistency(phi, params, rule, [0.5, 0.2, 0.1])


def test_mode_projections_tiny_for_pure_extremal(params, coarse_rule, mesh):
    u = ExtremalField(params, Extremal())
    b1, b2, a_en, lhs, rhs = mode_projections(
        u, Extremal(), params, mesh, coarse_rule
    )
    assert b1 < 1e-12 and b2 < 1e-12
    assert a_en < 1e-12
    assert lhs <= rhs + 1e-12
