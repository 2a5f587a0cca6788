"""Deficit, anisotropic gradient form, distance to the extremal family with
its minimization, orthogonality residuals, asymmetry, interpolation estimate,
and the consolidated stability report."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .extremals import (
    Extremal,
    dlam_profile,
    dlam_profile_deriv,
    profile_deriv,
    profile_deriv2,
    profile_value,
)
from .fields import ExtremalField, SumField
from .params import Params
from .quadrature import QuadratureRule

_CENTER_EXCLUSION = 1e-8
_MULTISTART_LAYOUT = (
    (0.0, 0.0), (-1.5, 0.0), (1.5, 0.0), (0.0, -1.5),
    (0.0, 1.5), (-1.5, -1.5), (1.5, 1.5), (-1.5, 1.5),
)


class MinimizationError(RuntimeError):
    """No start converged; carries the best point found so far."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def _center_of(e: Extremal) -> float:
    return e.y_axial() if e.y else 0.0


def grad_p_norm(u, params: Params, rule: QuadratureRule) -> float:
    """int |grad u|^p by zonal quadrature."""
    grid = rule.zonal_grid(params)
    z, rho = grid.points()
    _, gz, grho = u.value_and_grad(z, rho)
    return grid.integrate((gz * gz + grho * grho) ** (params.p / 2.0))


def lpstar_norm(u, params: Params, rule: QuadratureRule) -> float:
    """L^{p*} norm by zonal quadrature."""
    grid = rule.zonal_grid(params)
    z, rho = grid.points()
    val = u.value(z, rho)
    return grid.integrate(np.abs(val) ** params.pstar) ** (1.0 / params.pstar)


def deficit(u, params: Params, rule: QuadratureRule) -> float:
    """delta(u) = int |grad u|^p - S^p (int |u|^{p*})^{p/p*}."""
    grid = rule.zonal_grid(params)
    z, rho = grid.points()
    val, gz, grho = u.value_and_grad(z, rho)
    energy = grid.integrate((gz * gz + grho * grho) ** (params.p / 2.0))
    mass = grid.integrate(np.abs(val) ** params.pstar)
    return float(energy - params.Sp * mass ** (params.p / params.pstar))


def weighted_mass(e: Extremal, phi, params: Params, rule: QuadratureRule) -> float:
    """int |v|^{p*-2} phi^2 for the extremal's weight."""
    grid = rule.zonal_grid(params)
    z, rho = grid.points(center=_center_of(e))
    val = phi.value(z, rho)
    wgt = profile_value(params, e, grid.R) ** (params.pstar - 2.0)
    return float(grid.integrate(wgt * val * val))


def a_form(e: Extremal, u1, u2, params: Params, rule: QuadratureRule) -> float:
    """int |grad v|^{p-2} grad u1 . grad u2
       + (p-2) int |grad v|^{p-2} (d_r u1)(d_r u2),
    radial direction taken about the extremal's center."""
    grid = rule.zonal_grid(params)
    center = _center_of(e)
    z, rho = grid.points(center=center)
    _, g1z, g1r = u1.value_and_grad(z, rho)
    if u2 is u1:
        g2z, g2r = g1z, g1r
    else:
        _, g2z, g2r = u2.value_and_grad(z, rho)
    wgt = np.abs(profile_deriv(params, e, grid.R)) ** (params.p - 2.0)
    mu, s = grid.MU, grid.SIN
    rad1 = g1z * mu + g1r * s
    rad2 = g2z * mu + g2r * s
    dots = g1z * g2z + g1r * g2r
    return float(grid.integrate(wgt * (dots + (params.p - 2.0) * rad1 * rad2)))


def difference_field(params: Params, u, e: Extremal) -> SumField:
    """u minus the extremal, as a field."""
    return SumField([(1.0, u), (-1.0, ExtremalField(params, e))])


def plain_form(e: Extremal, diff, params: Params, rule: QuadratureRule) -> float:
    """int |grad v|^{p-2} |grad diff|^2 (the isotropic comparison form)."""
    grid = rule.zonal_grid(params)
    z, rho = grid.points(center=_center_of(e))
    _, gz, grho = diff.value_and_grad(z, rho)
    wgt = np.abs(profile_deriv(params, e, grid.R)) ** (params.p - 2.0)
    return float(grid.integrate(wgt * (gz * gz + grho * grho)))


def distance_energy(u, lam: float, y_axial: float, params: Params,
                    rule: QuadratureRule, c: float | None = None) -> float:
    """int A_{cv}[grad u - grad cv, grad u - grad cv] with c pinned to the
    L^{p*} norm of u unless given."""
    if c is None:
        c = lpstar_norm(u, params, rule)
    e = Extremal.axial(c, lam, y_axial, params.n)
    diff = difference_field(params, u, e)
    return a_form(e, diff, diff, params, rule)


def minimize_distance(u, params: Params, rule: QuadratureRule,
                      multistarts: int = 8, tol: float = 1e-8,
                      search_rule: QuadratureRule | None = None):
    """Simplex descent over (log lambda, y_axial) from a fixed start layout.

    Returns (d2, minimizer). Winner chosen by (energy, start index) so ties
    resolve deterministically. A coarser search_rule may drive the descent;
    the returned energy is always evaluated with the full rule.
    """
    c = lpstar_norm(u, params, rule)
    opt_rule = search_rule or rule

    def energy(x):
        return distance_energy(u, math.exp(x[0]), x[1], params, opt_rule, c=c)

    results = []
    any_converged = False
    for i in range(multistarts):
        start = _MULTISTART_LAYOUT[i % len(_MULTISTART_LAYOUT)]
        res = minimize(energy, np.array(start), method="Nelder-Mead",
                       options={"xatol": tol, "fatol": tol * tol, "maxiter": 2000})
        any_converged = any_converged or bool(res.success)
        results.append((float(res.fun), i, res.x))
    best_fun, _, best_x = min(results, key=lambda t: (t[0], t[1]))
    minimizer = Extremal.axial(c, math.exp(best_x[0]), float(best_x[1]), params.n)
    if search_rule is not None:
        best_fun = distance_energy(u, minimizer.lam, minimizer.y_axial(), params, rule, c=c)
    if not any_converged:
        raise MinimizationError(
            f"no start converged after 2000 iterations; best energy {best_fun:.6g}",
            best=(best_fun, minimizer),
        )
    return float(best_fun), minimizer


def orthogonality_residuals(u, minimizer: Extremal, params: Params,
                            rule: QuadratureRule, kappa: float = 0.1,
                            c_volume: float = 1.0):
    """Residuals of the first-order optimality identities at the minimizer.

    With eps phi = u - v and int |grad phi|^p = 1, returns
    (r_lambda, r_y, r_volume_lhs, r_volume_rhs):
      r_lambda: LHS - RHS of the dilation constraint,
      r_y: same for the axial translation constraint,
      r_volume_lhs / r_volume_rhs: the two sides of the volume-constraint
        bound at the given kappa, with c_volume standing in for the
        inequality-derived constant.
    All four are 0 when u coincides with the extremal.
    """
    p, pstar = params.p, params.pstar
    v = minimizer
    diff = difference_field(params, u, v)
    eps_p = grad_p_norm(diff, params, rule)
    if eps_p < 1e-28:
        return 0.0, 0.0, 0.0, 0.0
    eps = eps_p ** (1.0 / p)

    grid = rule.zonal_grid(params)
    center = _center_of(v)
    z, rho = grid.points(center=center)
    dval, dgz, dgr = diff.value_and_grad(z, rho)
    # phi = diff / eps
    pval, pgz, pgr = dval / eps, dgz / eps, dgr / eps

    r = grid.R
    mu, s = grid.MU, grid.SIN
    vv = profile_value(params, v, r)
    dv = profile_deriv(params, v, r)
    d2v = profile_deriv2(params, v, r)
    dlam = dlam_profile(params, v, r)
    dlam_d = dlam_profile_deriv(params, v, r)
    adv = np.abs(dv)
    gphi2 = pgz * pgz + pgr * pgr
    dr_phi = pgz * mu + pgr * s
    wstar = vv ** (pstar - 2.0)
    c1 = (p - 2.0) / (2.0 * (pstar - 1.0) * params.Sp)

    # dilation direction is radial: grad(dlam) . grad(phi) = dlam' * dr_phi
    lhs_lam = eps * grid.integrate(wstar * dlam * pval)
    rhs_lam = eps * eps * c1 * (
        grid.integrate(gphi2 * adv ** (p - 4.0) * dv * dlam_d)
        + (p - 2.0) * grid.integrate(gphi2 * adv ** (p - 4.0) * dv * dlam_d)
    )

    # axial translation: value -v' mu; gradient -v'' mu rhat - v'(e_z - mu rhat)/r
    dy_val = -dv * mu
    dyg_z = -d2v * mu * mu - dv * (1.0 - mu * mu) / r
    dyg_r = -d2v * mu * s + dv * mu * s / r
    lhs_y = eps * grid.integrate(wstar * dy_val * pval)
    # grad v is radial, so grad v . grad(d_y v) = v' * d_r(d_y v) = v' * (-v'' mu)
    term1 = grid.integrate(gphi2 * adv ** (p - 4.0) * dv * (-d2v * mu))
    term2 = (p - 2.0) * grid.integrate(gphi2 * adv ** (p - 4.0) * dv * (-d2v * mu))
    # d_y rhat has meridian components (-(s^2), mu s)/r; excluded near the center
    mask = (r > _CENTER_EXCLUSION).astype(float)
    dyr_z = -(s * s) / r
    dyr_r = mu * s / r
    term3 = 2.0 * grid.integrate(
        mask * adv ** (p - 2.0) * dr_phi * (pgz * dyr_z + pgr * dyr_r)
    )
    rhs_y = eps * eps * c1 * (term1 + term2 + term3)

    vol_lhs = abs(eps * grid.integrate(wstar * vv * pval))
    phi_mass = grid.integrate(wstar * pval * pval)
    phi_pstar = grid.integrate(np.abs(pval) ** pstar)
    vol_rhs = (eps * eps * (pstar - 1.0 + kappa) / 2.0 * phi_mass
               + c_volume * eps ** pstar * phi_pstar)
    return float(lhs_lam - rhs_lam), float(lhs_y - rhs_y), float(vol_lhs), float(vol_rhs)


def asymmetry_lambda(u, params: Params, rule: QuadratureRule,
                     multistarts: int = 8, tol: float = 1e-8) -> float:
    """Normalized infimal L^{p*} distance to the extremal family, matching
    L^{p*} volumes; same (log lambda, y_axial) search as minimize_distance."""
    norm = lpstar_norm(u, params, rule)
    total = norm ** params.pstar
    grid = rule.zonal_grid(params)

    def objective(x):
        e = Extremal.axial(norm, math.exp(x[0]), float(x[1]), params.n)
        z, rho = grid.points()
        val = u.value(z, rho) - ExtremalField(params, e).value(z, rho)
        return grid.integrate(np.abs(val) ** params.pstar) / total

    results = []
    for i in range(multistarts):
        start = _MULTISTART_LAYOUT[i % len(_MULTISTART_LAYOUT)]
        res = minimize(objective, np.array(start), method="Nelder-Mead",
                       options={"xatol": tol, "fatol": tol * tol, "maxiter": 2000})
        results.append((float(res.fun), i))
    return float(min(results)[0])


def interpolation_deficit_check(u, v: Extremal, t: float, params: Params,
                                rule: QuadratureRule, norm_tol: float = 1e-6):
    """Deficit of the interpolant against the convexity bound.

    lhs = delta(t u + (1-t) v); rhs = t delta(u) + S^p p ||v||^{p-1} ||u - v||_{p*}.
    Requires matched L^{p*} norms.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    norm_u = lpstar_norm(u, params, rule)
    norm_v = abs(v.c)  # extremal profiles are unit-normalized in L^{p*}
    if abs(norm_u - norm_v) > norm_tol * max(norm_u, norm_v):
        raise ValueError(
            f"L^{{p*}} norms differ: u has {norm_u:.6g}, extremal has {norm_v:.6g}"
        )
    interp = SumField([(t, u), (1.0 - t, ExtremalField(params, v))])
    lhs = deficit(interp, params, rule)
    dist = lpstar_norm(difference_field(params, u, v), params, rule)
    rhs = t * deficit(u, params, rule) + params.Sp * params.p * norm_v ** (params.p - 1.0) * dist
    return float(lhs), float(rhs)


@dataclass(frozen=True)
class StabilityConfig:
    """Report thresholds; all empirical, none claimed sharp."""

    c1: float = 0.1
    C2: float = 10.0
    C3: float = 10.0
    c_star: float = 0.1
    C_star: float = 10.0
    multistarts: int = 8
    tol: float = 1e-8


@dataclass
class StabilityReport:
    deficit: float
    dist2: float
    grad_p_dist: float
    lpstar_dist: float
    regime_ratio: float
    minimizer: Extremal
    bound2_residual: float
    boundP_residual: float
    main_ratio: float
    regime: str
    sandwich_low: float = 0.0
    sandwich_high: float = 0.0


def stability_report(u, params: Params, rule: QuadratureRule,
                     config: StabilityConfig | None = None,
                     search_rule: QuadratureRule | None = None) -> StabilityReport:
    """Minimize the distance and assemble every reported stability quantity."""
    cfg = config or StabilityConfig()
    dlt = deficit(u, params, rule)
    d2, vhat = minimize_distance(u, params, rule, cfg.multistarts, cfg.tol,
                                 search_rule=search_rule)
    diff = difference_field(params, u, vhat)
    gp = grad_p_norm(diff, params, rule)
    lps = lpstar_norm(diff, params, rule)
    plain = plain_form(vhat, diff, params, rule)
    ratio = d2 / gp if gp > 0 else 0.0
    if gp > 0 and ratio >= cfg.C_star:
        regime = "gradient-dominated"
    elif gp > 0 and ratio <= cfg.c_star:
        regime = "distance-dominated"
    elif gp > 0:
        regime = "middle"
    else:
        regime = "degenerate"
    norm_u = lpstar_norm(u, params, rule)
    denom = dlt + norm_u ** (params.p - 1.0) * lps
    main_ratio = gp / denom if denom > 0 else 0.0
    return StabilityReport(
        deficit=float(dlt),
        dist2=float(d2),
        grad_p_dist=float(gp),
        lpstar_dist=float(lps),
        regime_ratio=float(ratio),
        minimizer=vhat,
        bound2_residual=float(dlt - cfg.c1 * d2 + cfg.C2 * gp),
        boundP_residual=float(dlt + cfg.C3 * d2 - 0.25 * gp),
        main_ratio=float(main_ratio),
        regime=regime,
        sandwich_low=float(plain),
        sandwich_high=float((params.p - 1.0) * plain),
    )
