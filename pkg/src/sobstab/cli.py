"""Command-line driver: computes and reports the verification tables.

Exit codes: 0 all checks pass, 1 at least one check fails, 2 bad usage or
configuration.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .extremals import Extremal, v1_deriv, v1_value
from .fields import ExtremalField, SumField
from .inequalities import (
    GridSpec,
    InequalitySpec,
    required_constant,
    verify_constant,
    volume_corrected_perturbation,
)
from .params import Params
from .quadrature import build_rule
from .report import (
    AMPLITUDES,
    KAPPA_GRID,
    ConfigError,
    RunConfig,
    fmt,
    make_config,
    parse_config_file,
    perturbation_family,
    radial_rule,
    render_csv,
    render_json,
    render_svg,
)

SUBCOMMANDS = ("constants", "spectrum", "poincare", "inequalities",
               "stability", "expansion", "interpolate")


def _mesh_spec(config: RunConfig):
    from .spectrum import MeshSpec
    return MeshSpec(rmin=config.rmin, rmax=config.rmax, elements=config.mesh_elements)


def cmd_constants(params: Params, config: RunConfig):
    rule = radial_rule(params, config)
    r = rule.nodes
    energy = rule.integrate(np.abs(v1_deriv(params, r)) ** params.p
                            * r ** (params.n - 1)) * params.omega
    mass = rule.integrate(v1_value(params, r) ** params.pstar
                          * r ** (params.n - 1)) * params.omega
    rayleigh = energy / mass ** (params.p / params.pstar)
    rel = abs(rayleigh - params.Sp) / params.Sp
    columns = ["quantity", "value"]
    rows = [
        ("S", params.S),
        ("kappa0", params.kappa0),
        ("S^p", params.Sp),
        ("alpha1", params.alpha1),
        ("alpha2", params.alpha2),
        ("rayleigh_quotient", rayleigh),
        ("rayleigh_rel_error", rel),
    ]
    checks = [("rayleigh-vs-sharp-constant", rel < 1e-6, f"rel={fmt(rel)}")]
    return columns, rows, checks, None


def cmd_spectrum(params: Params, config: RunConfig):
    from .spectrum import alpha3, build_channel, solve_channel
    spec = _mesh_spec(config)
    columns = ["l", "k", "alpha", "zeros", "decay_beta"]
    rows = []
    checks = []
    known = {(0, 1): params.alpha1, (0, 2): params.alpha2, (1, 1): params.alpha2}
    for l, kmax in ((0, 5), (1, 2), (2, 1)):
        pairs = solve_channel(build_channel(params, l, spec), kmax, params)
        for k, pair in enumerate(pairs, start=1):
            rows.append((l, k, pair.alpha, pair.zeros, pair.decay_beta))
            if (l, k) in known:
                rel = abs(pair.alpha - known[l, k]) / known[l, k]
                checks.append((f"alpha(l={l},k={k})", rel < config.tol_eigen,
                               f"rel={fmt(rel)}"))
    a3, l3, gap = alpha3(params, spec)
    rows.append(("alpha3", l3, a3, -1, float("nan")))
    checks.append(("spectral-gap", gap > 1e-3, f"gap={gap:.4g}"))
    svg = render_svg(
        [(f"l={l}", [float(k) for _, k, *_ in
                     [row for row in rows[:-1] if row[0] == l]],
          [row[2] for row in rows[:-1] if row[0] == l]) for l in (0, 1, 2)],
        title="channel eigenvalues",
    )
    return columns, rows, checks, svg


def cmd_poincare(params: Params, config: RunConfig):
    from .spectrum import poincare_min_rayleigh
    spec = _mesh_spec(config)
    value = poincare_min_rayleigh(params, spec)
    target = params.alpha2 / (params.p - 1.0)
    columns = ["quantity", "value"]
    rows = [
        ("min_rayleigh", value),
        ("proof_constant", target),
        ("floor_alpha1_over_p_minus_1", params.alpha1 / (params.p - 1.0)),
    ]
    checks = [("poincare-constant", value >= target * (1.0 - 1e-3),
               f"min={fmt(value)} target={fmt(target)}")]
    return columns, rows, checks, None


def cmd_inequalities(params: Params, config: RunConfig):
    columns = ["id", "kappa", "required_C", "tested_C", "verified"]
    rows = []
    checks = []
    for pid in ("num1", "num2", "num3", "num4", "num4_reverse"):
        kappas = KAPPA_GRID if pid in ("num2", "num4", "num4_reverse") else (None,)
        for kappa in kappas:
            spec = InequalitySpec(pid, params.p, params.n, kappa)
            c_req = required_constant(spec, GridSpec())
            c_test = 1.05 * c_req if c_req > 0 else 0.0
            bad = verify_constant(spec, c_test, seed=config.seed)
            ok = bad is None
            rows.append((pid, float("nan") if kappa is None else kappa,
                         c_req, c_test, ok))
            label = pid if kappa is None else f"{pid}(kappa={kappa})"
            checks.append((label, ok, "pass" if ok else f"counterexample={bad}"))
    return columns, rows, checks, None


def cmd_stability(params: Params, config: RunConfig):
    from .functionals import StabilityConfig, stability_report
    rule = radial_rule(params, config)
    search = build_rule(params, count=max(config.quad_count // 2, 256), rmax=1e6)
    cfg = StabilityConfig(multistarts=config.multistarts, tol=1e-6)
    family = perturbation_family(params, rule, _mesh_spec(config))
    columns = ["family", "epsilon", "deficit", "dist2", "grad_p_dist",
               "lpstar_dist", "regime_ratio", "regime", "main_ratio",
               "lambda_hat", "y_hat"]
    rows = []
    checks = []
    worst_deficit = 0.0
    worst_ratio = 0.0
    sandwich_failures = []
    for name, phi in family:
        for eps in AMPLITUDES:
            u = SumField([(1.0, ExtremalField(params, Extremal())), (eps, phi)])
            rep = stability_report(u, params, rule, cfg, search_rule=search)
            rows.append((name, eps, rep.deficit, rep.dist2, rep.grad_p_dist,
                         rep.lpstar_dist, rep.regime_ratio, rep.regime,
                         rep.main_ratio, rep.minimizer.lam,
                         rep.minimizer.y_axial()))
            worst_deficit = min(worst_deficit, rep.deficit)
            worst_ratio = max(worst_ratio, rep.main_ratio)
            sandwich_ok = (rep.sandwich_low <= rep.dist2 * (1 + 1e-9) + 1e-12
                           and rep.dist2 <= rep.sandwich_high * (1 + 1e-9) + 1e-12)
            if not sandwich_ok:
                sandwich_failures.append(f"{name}@{eps:g}")
    checks.append(("deficit-nonnegative", worst_deficit >= -1e-6,
                   f"min_deficit={fmt(worst_deficit)}"))
    checks.append(("sandwich", not sandwich_failures,
                   "all rows" if not sandwich_failures else
                   "failed: " + ";".join(sandwich_failures)))
    checks.append(("main-ratio-finite", bool(np.isfinite(worst_ratio)),
                   f"C_report={fmt(worst_ratio)}"))
    svg = render_svg(
        [(name, list(AMPLITUDES),
          [row[2] for row in rows if row[0] == name]) for name, _ in family],
        title="deficit vs amplitude",
    )
    return columns, rows, checks, svg


def cmd_expansion(params: Params, config: RunConfig):
    from .spectrum import expansion_consistency
    rule = radial_rule(params, config)
    family = perturbation_family(params, rule, _mesh_spec(config))
    spectral = dict(family)["spectral"]
    order, points = expansion_consistency(spectral, params, rule, AMPLITUDES)
    target = min(3.0, params.p) - 0.2
    columns = ["epsilon", "remainder"]
    rows = [(eps, r) for eps, r in points]
    rows.append(("fitted_order", order))
    checks = [("remainder-order", order >= target,
               f"order={order:.3f} target>={target:.3f}")]
    svg = render_svg([("remainder", [e for e, _ in points], [r for _, r in points])],
                     title="expansion remainder")
    return columns, rows, checks, svg


def cmd_interpolate(params: Params, config: RunConfig):
    from .functionals import interpolation_deficit_check
    rule = radial_rule(params, config)
    family = perturbation_family(params, rule, _mesh_spec(config))
    spectral = dict(family)["spectral"]
    e = Extremal()
    u = volume_corrected_perturbation(params, e, spectral, 1e-2, rule)
    columns = ["t", "lhs", "rhs", "slack"]
    rows = []
    all_ok = True
    for t in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9):
        lhs, rhs = interpolation_deficit_check(u, e, t, params, rule)
        rows.append((t, lhs, rhs, rhs - lhs))
        all_ok = all_ok and lhs <= rhs + 1e-9
    checks = [("interpolation-bound", all_ok, "lhs <= rhs for all t")]
    return columns, rows, checks, None


_RUNNERS = {
    "constants": cmd_constants,
    "spectrum": cmd_spectrum,
    "poincare": cmd_poincare,
    "inequalities": cmd_inequalities,
    "stability": cmd_stability,
    "expansion": cmd_expansion,
    "interpolate": cmd_interpolate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sobstab",
        description="Numerical verification of sharp Sobolev stability quantities.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--n", type=int, default=None)
    parser.add_argument("--p", type=float, default=None)
    parser.add_argument("--mesh", type=int, default=None, dest="mesh_elements")
    parser.add_argument("--rmax", type=float, default=None)
    parser.add_argument("--quad", type=int, default=None, dest="quad_count")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--tol-eigen", type=float, default=None, dest="tol_eigen")
    parser.add_argument("--out", type=str, default=None)
    parser.add_argument("--format", choices=("csv", "json"), default=None,
                        dest="out_format")
    parser.add_argument("--plot", action="store_true", default=None)
    parser.add_argument("--config", type=str, default=None)
    return parser


def run(subcommand: str, config: RunConfig, out: str | None = None) -> int:
    params = Params.make(config.n, config.p)
    columns, rows, checks, svg = _RUNNERS[subcommand](params, config)
    render = render_csv if config.out_format == "csv" else render_json
    text = render(subcommand, columns, rows, checks)
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        if config.plot and svg is not None:
            with open(out + ".svg", "w", encoding="utf-8", newline="\n") as fh:
                fh.write(svg)
    else:
        sys.stdout.write(text)
    return 0 if all(ok for _, ok, _ in checks) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        overrides = {k: getattr(args, k) for k in
                     ("n", "p", "mesh_elements", "rmax", "quad_count", "seed",
                      "tol_eigen", "out_format", "plot")}
        config = make_config(file_values, overrides)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(args.subcommand, config, args.out)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
