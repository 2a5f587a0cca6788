"""Zonal test functions: radial profiles times axisymmetric spherical harmonics.

All fields live in meridian-plane coordinates (z, rho): z along the common
zonal axis, rho >= 0 the distance to it. Centers are axial scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import eval_gegenbauer, gammaln

from .extremals import Extremal, profile_deriv, profile_value
from .params import Params

_TINY_R = 1e-300


class ZonalHarmonic:
    """L^2(S^{n-1})-normalized zonal spherical harmonic of degree l."""

    def __init__(self, l: int, n: int):
        if l < 0:
            raise ValueError("degree l must be >= 0")
        self.l = l
        self.n = n
        self.mu_eigenvalue = float(l * (l + n - 2))
        nu = (n - 2) / 2.0
        self._nu = nu
        if l == 0:
            self._norm = 1.0 / math.sqrt(sphere_area_cached(n))
        else:
            # int_-1^1 C_l^nu(x)^2 (1-x^2)^{nu-1/2} dx, times omega_{n-2}
            log_sq = (
                math.log(math.pi)
                + (1.0 - 2.0 * nu) * math.log(2.0)
                + gammaln(l + 2.0 * nu)
                - gammaln(l + 1.0)
                - math.log(l + nu)
                - 2.0 * gammaln(nu)
            )
            omega_n2 = 2.0 * math.pi ** ((n - 1) / 2.0) / math.gamma((n - 1) / 2.0)
            self._norm = 1.0 / math.sqrt(omega_n2 * math.exp(log_sq))

    def value(self, mu):
        if self.l == 0:
            return np.full_like(np.asarray(mu, dtype=float), self._norm)
        return self._norm * eval_gegenbauer(self.l, self._nu, mu)

    def deriv(self, mu):
        """d/dmu, using d/dx C_l^nu = 2 nu C_{l-1}^{nu+1}."""
        mu = np.asarray(mu, dtype=float)
        if self.l == 0:
            return np.zeros_like(mu)
        return self._norm * 2.0 * self._nu * eval_gegenbauer(self.l - 1, self._nu + 1.0, mu)


def sphere_area_cached(n: int) -> float:
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def spherical_eigenvalue(l: int, n: int) -> tuple[float, int]:
    """Laplace-Beltrami eigenvalue l(l+n-2) on S^{n-1} and its multiplicity."""
    if l < 0:
        raise ValueError("degree l must be >= 0")
    if l < 2:
        mult = 1 if l == 0 else n
    else:
        mult = math.comb(n + l - 1, l) - math.comb(n + l - 3, l - 2)
    return float(l * (l + n - 2)), mult


@dataclass
class Profile:
    """Radial profile with an analytic (or fitted) derivative."""

    f: Callable
    df: Callable
    name: str = ""
    d2f: Callable | None = None

    def __call__(self, r):
        return self.f(r)


class ZonalField:
    """Finite sum of profile(r) * Y_l(cos theta) terms about an axial center."""

    def __init__(self, terms: Sequence[tuple[Profile, int]], n: int, center: float = 0.0):
        self.terms = [(prof, int(l)) for prof, l in terms]
        self.n = n
        self.center = float(center)
        self._harmonics = [ZonalHarmonic(l, n) for _, l in self.terms]

    def value_and_grad(self, z, rho):
        """Field value and meridian gradient (d/dz, d/drho) at points (z, rho)."""
        z = np.asarray(z, dtype=float)
        rho = np.asarray(rho, dtype=float)
        dz = z - self.center
        r = np.maximum(np.hypot(dz, rho), _TINY_R)
        mu = dz / r
        u = np.zeros(np.broadcast_shapes(z.shape, rho.shape))
        uz = np.zeros_like(u)
        urho = np.zeros_like(u)
        for (prof, _), Y in zip(self.terms, self._harmonics):
            fv = np.asarray(prof.f(r), dtype=float)
            fd = np.asarray(prof.df(r), dtype=float)
            Yv = Y.value(mu)
            Yd = Y.deriv(mu)
            u += fv * Yv
            uz += fd * Yv * mu + fv * Yd * (1.0 - mu**2) / r
            urho += fd * Yv * rho / r - fv * Yd * mu * rho / r**2
        return u, uz, urho

    def value(self, z, rho):
        return self.value_and_grad(z, rho)[0]


class ExtremalField:
    """A member of the extremal family viewed as an axial field."""

    def __init__(self, params: Params, e: Extremal):
        self.params = params
        self.e = e
        self.center = e.y_axial()
        self.n = params.n

    def value_and_grad(self, z, rho):
        z = np.asarray(z, dtype=float)
        rho = np.asarray(rho, dtype=float)
        dz = z - self.center
        r = np.maximum(np.hypot(dz, rho), _TINY_R)
        u = profile_value(self.params, self.e, r)
        du = profile_deriv(self.params, self.e, r)
        return u, du * dz / r, du * rho / r

    def value(self, z, rho):
        return self.value_and_grad(z, rho)[0]


class SumField:
    """Linear combination of fields (shared axis)."""

    def __init__(self, pieces: Sequence[tuple[float, object]]):
        self.pieces = list(pieces)
        self.n = self.pieces[0][1].n

    def value_and_grad(self, z, rho):
        u = uz = urho = 0.0
        for coef, fld in self.pieces:
            v, gz, grho = fld.value_and_grad(z, rho)
            u = u + coef * v
            uz = uz + coef * gz
            urho = urho + coef * grho
        return u, uz, urho

    def value(self, z, rho):
        return self.value_and_grad(z, rho)[0]


def extremal_zonal_field(params: Params, e: Extremal) -> ExtremalField:
    return ExtremalField(params, e)


def perturbed_extremal(params: Params, e: Extremal, eps: float, phi) -> SumField:
    """u = c v_{lam,y} + eps * phi."""
    return SumField([(1.0, ExtremalField(params, e)), (eps, phi)])
