"""Finite element solver for the radial eigenvalue channels of the weighted
linearized operator, plus the spectral quantities built on top of it: the
third eigenvalue and gap, oscillation counts, decay exponents, the weighted
Poincare constant, the polar form of the operator, and the second-variation
expansion of the deficit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.sparse import diags
from scipy.sparse.linalg import eigsh
from scipy.special import roots_legendre

from .extremals import Extremal, profile_deriv, profile_value
from .fields import Profile, ZonalField, ZonalHarmonic, spherical_eigenvalue
from .params import Params
from .quadrature import QuadratureRule

__all__ = [
    "MeshSpec",
    "SLChannel",
    "EigenPair",
    "EigenSolveError",
    "MeshInadequacyError",
    "DecayFitError",
    "build_channel",
    "solve_channel",
    "alpha3",
    "count_zeros",
    "decay_fit",
    "polar_apply",
    "poincare_min_rayleigh",
    "second_variation",
    "expansion_consistency",
    "mode_projections",
    "spherical_eigenvalue",
]


class EigenSolveError(RuntimeError):
    """The generalized eigensolve failed to converge."""


class MeshInadequacyError(EigenSolveError):
    """Richardson pair (mesh, 2x mesh) disagrees beyond the advertised tolerance."""


class DecayFitError(ValueError):
    """The requested fit window is unusable (sign change or too few nodes)."""


@dataclass(frozen=True)
class MeshSpec:
    """Uniform mesh in s = log r over [log rmin, log rmax]."""

    rmin: float = 1e-6
    rmax: float = 1e4
    elements: int = 3000

    def __post_init__(self):
        if not (0 < self.rmin < self.rmax):
            raise ValueError("need 0 < rmin < rmax")
        if self.elements < 8:
            raise ValueError("need at least 8 elements")

    def s_nodes(self) -> np.ndarray:
        return np.linspace(math.log(self.rmin), math.log(self.rmax), self.elements + 1)

    def r_nodes(self) -> np.ndarray:
        return np.exp(self.s_nodes())

    def refined(self) -> "MeshSpec":
        return replace(self, elements=2 * self.elements)


@dataclass
class SLChannel:
    """One angular channel of the linearized eigenproblem in weak form
    int P f' g' + int Q f g = alpha int w f g on (0, R]."""

    mu: float
    P: object
    Q: object
    w: object
    mesh: np.ndarray
    spec: MeshSpec
    l: int = 0


def build_channel(params: Params, l: int, spec: MeshSpec | None = None,
                  lam: float = 1.0, plain: bool = False) -> SLChannel:
    """Coefficients about the extremal scaled by lam.

    P = (p-1)|v'|^{p-2} r^{n-1}, Q = mu r^{n-3}|v'|^{p-2}, w = v^{p*-2} r^{n-1}.
    With plain=True the (p-1) factor on P is dropped, which turns the
    anisotropic gradient form into the plain |grad v|^{p-2}-weighted one.
    """
    spec = spec or MeshSpec()
    mu = float(spherical_eigenvalue(l, params.n)[0])
    e = Extremal(c=1.0, lam=float(lam))
    p, n = params.p, params.n
    gfac = 1.0 if plain else (p - 1.0)

    def P(r):
        dv = np.abs(profile_deriv(params, e, r))
        return gfac * dv ** (p - 2.0) * r ** (n - 1.0)

    def Q(r):
        dv = np.abs(profile_deriv(params, e, r))
        return mu * r ** (n - 3.0) * dv ** (p - 2.0)

    def w(r):
        return profile_value(params, e, r) ** (params.pstar - 2.0) * r ** (n - 1.0)

    return SLChannel(mu=mu, P=P, Q=Q, w=w, mesh=spec.r_nodes(), spec=spec, l=int(l))


def _assemble(channel: SLChannel):
    """P1 stiffness/mass pencil in s = log r; essential 0 at the last node."""
    s = np.log(channel.mesh)
    h = s[1] - s[0]
    xg, wg = roots_legendre(4)
    # quad points per element, shape (elements, 4)
    mid = 0.5 * (s[:-1] + s[1:])
    sq = mid[:, None] + 0.5 * h * xg[None, :]
    wq = 0.5 * h * wg[None, :]
    rq = np.exp(sq)
    cP = channel.P(rq) / rq
    cQ = channel.Q(rq) * rq
    cw = channel.w(rq) * rq
    n0 = 0.5 * (1.0 - xg)[None, :]
    n1 = 0.5 * (1.0 + xg)[None, :]

    def mass_blocks(c):
        m00 = np.sum(wq * c * n0 * n0, axis=1)
        m01 = np.sum(wq * c * n0 * n1, axis=1)
        m11 = np.sum(wq * c * n1 * n1, axis=1)
        return m00, m01, m11

    kint = np.sum(wq * cP, axis=1) / (h * h)
    q00, q01, q11 = mass_blocks(cQ)
    w00, w01, w11 = mass_blocks(cw)

    nn = channel.mesh.size
    a_diag = np.zeros(nn)
    a_off = np.zeros(nn - 1)
    m_diag = np.zeros(nn)
    m_off = np.zeros(nn - 1)
    a_diag[:-1] += kint + q00
    a_diag[1:] += kint + q11
    a_off += -kint + q01
    m_diag[:-1] += w00
    m_diag[1:] += w11
    m_off += w01
    # homogeneous essential condition at r = rmax: drop the last node
    A = diags([a_off[:-1], a_diag[:-1], a_off[:-1]], [-1, 0, 1], format="csc")
    M = diags([m_off[:-1], m_diag[:-1], m_off[:-1]], [-1, 0, 1], format="csc")
    return A, M


@dataclass
class EigenPair:
    """One computed eigenvalue with its nodal eigenfunction on the mesh,
    normalized int w f^2 = 1 and sign-fixed positive near the inner end."""

    alpha: float
    f: np.ndarray
    zeros: int
    decay_beta: float
    mesh: np.ndarray = field(repr=False, default=None)

    def profile(self) -> Profile:
        """Cubic-spline radial profile; constant below the mesh, zero above."""
        s = np.log(self.mesh)
        spl = CubicSpline(s, self.f, extrapolate=False)
        dspl = spl.derivative()
        lo, hi = s[0], s[-1]
        f_lo = float(self.f[0])

        def f(r):
            r = np.asarray(r, dtype=float)
            sv = np.log(np.maximum(r, 1e-300))
            out = spl(np.clip(sv, lo, hi))
            out = np.where(sv < lo, f_lo, out)
            return np.where(sv > hi, 0.0, out)

        def df(r):
            r = np.asarray(r, dtype=float)
            sv = np.log(np.maximum(r, 1e-300))
            inside = (sv >= lo) & (sv <= hi)
            out = np.where(inside, dspl(np.clip(sv, lo, hi)) / r, 0.0)
            return out

        return Profile(f=f, df=df, name=f"mode(alpha={self.alpha:.6g})")


def count_zeros(f: np.ndarray, tol_frac: float = 1e-8) -> int:
    """Interior sign changes, ignoring nodes below tol_frac * max|f|."""
    f = np.asarray(f, dtype=float)
    cut = tol_frac * np.max(np.abs(f))
    kept = f[np.abs(f) > cut]
    if kept.size < 2:
        return 0
    signs = np.sign(kept)
    return int(np.sum(signs[:-1] != signs[1:]))


def decay_fit(f, window: tuple[float, float], mesh: np.ndarray | None = None) -> float:
    """Least-squares far-field exponent beta, fitting |f| ~ r^{-beta} on window.

    Accepts an EigenPair (mesh carried along) or a plain value array with mesh.
    """
    if hasattr(f, "mesh") and hasattr(f, "f"):
        mesh, f = f.mesh, f.f
    if mesh is None:
        raise ValueError("decay_fit needs a mesh for plain arrays")
    r = np.asarray(mesh, dtype=float)
    vals = np.asarray(f, dtype=float)
    r_a, r_b = window
    if r_a < 10.0:
        raise ValueError("fit window must start in the far field (r_a >= 10)")
    keep = (r >= r_a) & (r <= r_b)
    if np.count_nonzero(keep) < 4:
        raise DecayFitError(f"window ({r_a:g}, {r_b:g}) contains too few mesh nodes")
    y = vals[keep]
    if np.min(y) < 0 < np.max(y):
        raise DecayFitError(
            f"window ({r_a:g}, {r_b:g}) contains a sign change; choose a later window"
        )
    y = np.abs(y)
    if np.any(y == 0.0):
        raise DecayFitError("window touches the truncation zero; choose an earlier window")
    slope = np.polyfit(np.log(r[keep]), np.log(y), 1)[0]
    return float(-slope)


def _auto_decay(mesh: np.ndarray, f: np.ndarray, tol_frac: float = 1e-8) -> float:
    """Decay exponent over a window placed after the last sign change."""
    cut = tol_frac * np.max(np.abs(f))
    idx = np.nonzero(np.abs(f) > cut)[0]
    fz = f[idx]
    flips = np.nonzero(np.sign(fz[:-1]) != np.sign(fz[1:]))[0]
    r_last = mesh[idx[flips[-1] + 1]] if flips.size else mesh[0]
    r_a = max(10.0, 3.0 * r_last)
    r_b = min(mesh[-1] / 10.0, r_a * 100.0)
    if r_b <= 3.0 * r_a:
        return float("nan")
    try:
        return decay_fit(f, (r_a, r_b), mesh=mesh)
    except (DecayFitError, ValueError):
        return float("nan")


def solve_channel(channel: SLChannel, k: int, params: Params,
                  check_mesh: bool = False, tol: float = 1e-3) -> list[EigenPair]:
    """First k eigenpairs of the channel, ascending; deterministic start vector."""
    if k < 1:
        raise ValueError("k must be >= 1")
    A, M = _assemble(channel)
    sigma = 0.5 * params.alpha1
    v0 = np.ones(A.shape[0])
    try:
        vals, vecs = eigsh(A, k=k, M=M, sigma=sigma, which="LM", v0=v0)
    except Exception as exc:  # ArpackNoConvergence and factorization failures
        raise EigenSolveError(f"channel mu={channel.mu:g} eigensolve failed: {exc}") from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    # The inner nodes carry negligible weighted mass, and there the computed
    # eigenvector is dominated by roundoff seeding the singular homogeneous
    # solution (which grows toward rmin). Locate the first node where the
    # cumulative mass becomes meaningful and rebuild the vector below it from
    # the regular small-r behavior f ~ r^l.
    mass_diag = M.diagonal()
    cum = np.cumsum(mass_diag)
    inner = int(np.searchsorted(cum, 1e-13 * cum[-1]))
    pairs = []
    for j in range(k):
        f = np.append(vecs[:, j], 0.0)
        f = f / math.sqrt(float(f[:-1] @ (M @ f[:-1])))
        if inner > 0:
            f[:inner] = f[inner] * (channel.mesh[:inner] / channel.mesh[inner]) ** channel.l
        lead = np.nonzero(np.abs(f) > 1e-3 * np.max(np.abs(f)))[0][0]
        if f[lead] < 0:
            f = -f
        pairs.append(EigenPair(
            alpha=float(vals[j]),
            f=f,
            zeros=count_zeros(f),
            decay_beta=_auto_decay(channel.mesh, f),
            mesh=channel.mesh,
        ))
    if check_mesh:
        fine = SLChannel(channel.mu, channel.P, channel.Q, channel.w,
                         channel.spec.refined().r_nodes(), channel.spec.refined())
        fine_pairs = solve_channel(fine, k, params, check_mesh=False, tol=tol)
        for a, b in zip(pairs, fine_pairs):
            rel = abs(a.alpha - b.alpha) / abs(b.alpha)
            if rel > 10.0 * tol:
                raise MeshInadequacyError(
                    f"mesh doubling moved alpha={a.alpha:.6g} by {rel:.2e} rel "
                    f"(> 10 x tol={tol:g}); refine the mesh"
                )
    return pairs


def alpha3(params: Params, spec: MeshSpec | None = None,
           check_l3: bool = False) -> tuple[float, int, float]:
    """Third eigenvalue above the two known ones: min over the candidates
    (third of l=0, second of l=1, first of l=2). Returns (alpha3, l, gap)."""
    spec = spec or MeshSpec()
    candidates = []
    for l, k in ((0, 3), (1, 2), (2, 1)):
        pairs = solve_channel(build_channel(params, l, spec), k, params)
        candidates.append((pairs[k - 1].alpha, l))
    a3, l3 = min(candidates)
    if check_l3:
        first_l3 = solve_channel(build_channel(params, 3, spec), 1, params)[0].alpha
        if first_l3 < a3:
            raise EigenSolveError("l=3 channel undercuts the l<=2 candidates")
    gap = a3 / params.alpha2 - 1.0
    return float(a3), int(l3), float(gap)


def poincare_min_rayleigh(params: Params, spec: MeshSpec | None = None,
                          lmax: int = 2) -> float:
    """Minimum over channels l = 0..lmax of the first eigenvalue of the plain
    |grad v|^{p-2}-weighted gradient form against the v^{p*-2} mass form."""
    spec = spec or MeshSpec()
    best = math.inf
    for l in range(lmax + 1):
        pairs = solve_channel(build_channel(params, l, spec, plain=True), 1, params)
        best = min(best, pairs[0].alpha)
    return float(best)


def polar_apply(profile: Profile, l: int, r: float, params: Params,
                e: Extremal | None = None) -> float:
    """Radial factor of div(A grad(f Y_l)) at radius r for the anisotropic
    weight A = (p-2)|grad v|^{p-2} rhat x rhat + |grad v|^{p-2} Id:

        (p-1)|v'|^{p-2} f'' + (p-1)(n-1)/r |v'|^{p-2} f'
        - mu/r^2 |v'|^{p-2} f + (p-1)(p-2)|v'|^{p-4} v' v'' f'
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    if profile.d2f is None:
        raise ValueError("polar_apply needs a profile with a second derivative")
    e = e or Extremal()
    p, n = params.p, params.n
    mu = float(spherical_eigenvalue(l, n)[0])
    dv = float(profile_deriv(params, e, r))
    from .extremals import profile_deriv2
    d2v = float(profile_deriv2(params, e, r))
    adv = abs(dv)
    f = float(profile.f(r))
    df = float(profile.df(r))
    d2f = float(profile.d2f(r))
    return (
        (p - 1.0) * adv ** (p - 2.0) * d2f
        + (p - 1.0) * (n - 1.0) / r * adv ** (p - 2.0) * df
        - mu / (r * r) * adv ** (p - 2.0) * f
        + (p - 1.0) * (p - 2.0) * adv ** (p - 4.0) * dv * d2v * df
    )


def second_variation(phi: ZonalField, params: Params, rule: QuadratureRule,
                     e: Extremal | None = None) -> float:
    """Second-variation value p a(grad phi, grad phi) - S^p p (p*-1) int v^{p*-2} phi^2.

    For an eigenmode of eigenvalue alpha this equals p (alpha - alpha2) <phi, phi>
    in the weighted inner product. The ordinary Taylor coefficient of the
    deficit at order eps^2 is half of this value.
    """
    from .functionals import a_form, weighted_mass
    e = e or Extremal()
    p = params.p
    energy = a_form(e, phi, phi, params, rule)
    mass = weighted_mass(e, phi, params, rule)
    return p * energy - params.Sp * p * (params.pstar - 1.0) * mass


def expansion_consistency(phi: ZonalField, params: Params, rule: QuadratureRule,
                          eps_list, e: Extremal | None = None):
    """Fit the order of the deficit remainder beyond its quadratic model.

    R(eps) = |delta(v + eps phi) - eps^2 Q(phi)| with Q = second_variation / 2,
    the true eps^2 Taylor coefficient. The deficit of the unperturbed extremal
    (zero analytically) is evaluated with the same rule and subtracted, so the
    rule's truncation bias cancels instead of flooring R. Returns
    (fitted_order, [(eps, R)]).
    """
    from .functionals import deficit
    from .fields import ExtremalField, perturbed_extremal
    eps_list = sorted(float(t) for t in eps_list)
    if len(eps_list) < 3:
        raise ValueError("need at least 3 epsilon values")
    if eps_list[0] <= 0 or eps_list[-1] > 0.1:
        raise ValueError("epsilon values must lie in (0, 0.1]")
    e = e or Extremal()
    quad = 0.5 * second_variation(phi, params, rule, e)
    baseline = deficit(ExtremalField(params, e), params, rule)
    points = []
    for eps in eps_list:
        u = perturbed_extremal(params, e, eps, phi)
        r_eps = abs(deficit(u, params, rule) - baseline - eps * eps * quad)
        points.append((eps, r_eps))
    logs = [(math.log(t), math.log(max(rr, 1e-300))) for t, rr in points]
    xs = np.array([a for a, _ in logs])
    ys = np.array([b for _, b in logs])
    order = float(np.polyfit(xs, ys, 1)[0])
    return order, points


def mode_projections(u: ZonalField, minimizer: Extremal, params: Params,
                     spec: MeshSpec | None = None, rule: QuadratureRule | None = None,
                     kappa: float = 0.1, c_bound: float = 1.0):
    """Squared projections of u - v onto the first two eigenspaces, plus the
    anisotropic energy of the difference and the mass-vs-energy check pair.

    Returns (beta1sq, beta2sq, a_energy, check_lhs, check_rhs) where
    check_lhs = int v^{p*-2} (u-v)^2 and
    check_rhs = (1+2 kappa)/alpha3 a_energy + c_bound int |grad(u-v)|^p.
    """
    from .functionals import a_form, difference_field, grad_p_norm, weighted_mass
    from .quadrature import build_rule
    spec = spec or MeshSpec()
    rule = rule or build_rule(params)
    v = minimizer
    diff = difference_field(params, u, v)
    grid = rule.zonal_grid(params)
    z, rho = grid.points(center=v.y_axial() if v.y else 0.0)
    dval, _, _ = _field_values(diff, z, rho)
    wgt = profile_value(params, v, grid.R) ** (params.pstar - 2.0)

    pairs0 = solve_channel(build_channel(params, 0, spec), 2, params)
    pairs1 = solve_channel(build_channel(params, 1, spec), 1, params)
    y0 = ZonalHarmonic(0, params.n)
    y1 = ZonalHarmonic(1, params.n)

    def project(pair, harmonic):
        prof = pair.profile()
        mode_vals = prof.f(grid.R) * harmonic.value(grid.MU)
        return grid.integrate(wgt * dval * mode_vals)

    beta1 = project(pairs0[0], y0)
    beta2_lam = project(pairs0[1], y0)
    beta2_y = project(pairs1[0], y1)
    a_energy = a_form(v, diff, diff, params, rule)
    check_lhs = weighted_mass(v, diff, params, rule)
    alpha3_val = alpha3(params, spec)[0]
    eps_p = grad_p_norm(diff, params, rule)
    check_rhs = (1.0 + 2.0 * kappa) / alpha3_val * a_energy + c_bound * eps_p
    return (
        float(beta1 ** 2),
        float(beta2_lam ** 2 + beta2_y ** 2),
        float(a_energy),
        float(check_lhs),
        float(check_rhs),
    )


def _field_values(fld, z, rho):
    val, gz, grho = fld.value_and_grad(z, rho)
    return val, gz, grho
