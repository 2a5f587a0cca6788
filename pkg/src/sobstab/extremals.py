"""The Talenti bubble family, its derivatives, and the p-Laplace residual."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import Params


@dataclass(frozen=True)
class Extremal:
    """One member c * lam^{n/p*} v1(lam (x - y)) of the extremal family."""

    c: float = 1.0
    lam: float = 1.0
    y: tuple = ()

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"scale lam must be positive, got {self.lam}")

    @classmethod
    def axial(cls, c: float, lam: float, y_axial: float, n: int) -> "Extremal":
        """Extremal centered on the zonal axis (first coordinate)."""
        return cls(c=c, lam=lam, y=(float(y_axial),) + (0.0,) * (n - 1))

    def y_axial(self) -> float:
        """Signed axial offset; raises if the center is off-axis."""
        if not self.y:
            return 0.0
        off = self.y[1:]
        if any(abs(v) > 0 for v in off):
            raise ValueError(f"extremal center {self.y} is off the zonal axis")
        return self.y[0]


# -- radial profile of v1 and its first two derivatives ----------------------


def v1_value(params: Params, r):
    r = np.asarray(r, dtype=float)
    m = (params.n - params.p) / params.p
    return params.kappa0 * (1.0 + r**params.pprime) ** (-m)


def v1_deriv(params: Params, r):
    r = np.asarray(r, dtype=float)
    m = (params.n - params.p) / params.p
    pp = params.pprime
    return -params.kappa0 * m * pp * r ** (pp - 1.0) * (1.0 + r**pp) ** (-m - 1.0)


def v1_deriv2(params: Params, r):
    r = np.asarray(r, dtype=float)
    m = (params.n - params.p) / params.p
    pp = params.pprime
    t = r**pp
    return (
        -params.kappa0
        * m
        * pp
        * r ** (pp - 2.0)
        * (1.0 + t) ** (-m - 2.0)
        * ((pp - 1.0) * (1.0 + t) - (m + 1.0) * pp * t)
    )


def profile_value(params: Params, e: Extremal, r):
    """Radial profile of c v_{lam,y} as a function of distance to the center."""
    scale = e.c * e.lam ** (params.n / params.pstar)
    return scale * v1_value(params, e.lam * np.asarray(r, dtype=float))


def profile_deriv(params: Params, e: Extremal, r):
    scale = e.c * e.lam ** (params.n / params.pstar + 1.0)
    return scale * v1_deriv(params, e.lam * np.asarray(r, dtype=float))


def profile_deriv2(params: Params, e: Extremal, r):
    scale = e.c * e.lam ** (params.n / params.pstar + 2.0)
    return scale * v1_deriv2(params, e.lam * np.asarray(r, dtype=float))


def dlam_profile(params: Params, e: Extremal, r):
    """Radial profile of the scale tangent field d/dlam (c v_{lam,y})."""
    r = np.asarray(r, dtype=float)
    z = e.lam * r
    scale = e.c * e.lam ** (params.n / params.pstar - 1.0)
    return scale * ((params.n / params.pstar) * v1_value(params, z) + z * v1_deriv(params, z))


def dlam_profile_deriv(params: Params, e: Extremal, r):
    r = np.asarray(r, dtype=float)
    z = e.lam * r
    scale = e.c * e.lam ** (params.n / params.pstar)
    return scale * (
        (params.n / params.pstar + 1.0) * v1_deriv(params, z) + z * v1_deriv2(params, z)
    )


# -- pointwise evaluation in R^n ---------------------------------------------


def evaluate_extremal(params: Params, e: Extremal, x):
    """Value and gradient of c v_{lam,y} at a point x in R^n.

    The gradient points along (x - y) and vanishes at the center.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(e.y if e.y else np.zeros_like(x), dtype=float)
    d = x - y
    r = float(np.linalg.norm(d))
    value = float(profile_value(params, e, r))
    if r == 0.0:
        return value, np.zeros_like(d)
    grad = float(profile_deriv(params, e, r)) * d / r
    return value, grad


def tangent_fields(params: Params, e: Extremal, x):
    """(d/dlam, d/dy^i, value) of c v_{lam,y} at x; spans the tangent space
    together with the value itself."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(e.y if e.y else np.zeros_like(x), dtype=float)
    d = x - y
    r = float(np.linalg.norm(d))
    value = float(profile_value(params, e, r))
    d_lambda = float(dlam_profile(params, e, r))
    if r == 0.0:
        d_y = np.zeros_like(d)
    else:
        # translation: d/dy^i = -d/dx^i
        d_y = -float(profile_deriv(params, e, r)) * d / r
    return d_lambda, d_y, value


def p_laplace_residual(params: Params, e: Extremal, r: float) -> float:
    """-Delta_p v - S^p v^{p*-1} on the radial profile, at radius r > 0.

    Uses the radial form Delta_p v = (p-1)|v'|^{p-2} v'' + (n-1)/r |v'|^{p-2} v'
    with analytic derivatives. Identically zero (to roundoff) for c = 1.
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    if e.c <= 0:
        raise ValueError("the Euler-Lagrange identity is stated for positive amplitude")
    p, n = params.p, params.n
    v = float(profile_value(params, e, r))
    dv = float(profile_deriv(params, e, r))
    d2v = float(profile_deriv2(params, e, r))
    absdv = abs(dv)
    delta_p = (p - 1.0) * absdv ** (p - 2.0) * d2v + (n - 1.0) / r * absdv ** (p - 2.0) * dv
    return -delta_p - params.Sp * v ** (params.pstar - 1.0)


def p_laplace_relative_residual(params: Params, e: Extremal, r: float) -> float:
    """|residual| normalized by the source term S^p v^{p*-1}."""
    v = float(profile_value(params, e, r))
    return abs(p_laplace_residual(params, e, r)) / (params.Sp * v ** (params.pstar - 1.0))
