"""Run configuration, the bundled perturbation families, and report writers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields as dc_fields

import numpy as np

from .extremals import Extremal, dlam_profile, dlam_profile_deriv, v1_deriv, v1_deriv2
from .fields import Profile, SumField, ZonalField, ZonalHarmonic
from .params import Params
from .quadrature import QuadratureRule, build_rule

AMPLITUDES = (1e-1, 3e-2, 1e-2, 3e-3)
KAPPA_GRID = (0.5, 0.1, 0.01)
CSV_VERSION = "sobstab-csv-v1"


class ConfigError(ValueError):
    """Bad configuration file or option value."""


@dataclass
class RunConfig:
    n: int = 4
    p: float = 2.5
    mesh_elements: int = 3000
    rmax: float = 1e4
    rmin: float = 1e-6
    quad_count: int = 512
    seed: int = 0
    tol_eigen: float = 1e-3
    tol_quad: float = 1e-8
    multistarts: int = 8
    out_format: str = "csv"
    plot: bool = False

    def __post_init__(self):
        if self.mesh_elements < 500:
            raise ConfigError("mesh_elements must be >= 500")
        for name in ("tol_eigen", "tol_quad", "rmax", "rmin"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.out_format not in ("csv", "json"):
            raise ConfigError("out_format must be csv or json")


_CONFIG_TYPES = {f.name: f.type for f in dc_fields(RunConfig)}
_BOOL_TRUE = ("1", "true", "yes", "on")
_BOOL_FALSE = ("0", "false", "no", "off")


def parse_config_file(path: str) -> dict:
    """key = value lines, # comments; values coerced to the RunConfig field type."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _CONFIG_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _coerce(key, val)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def _coerce(key: str, val: str):
    kind = _CONFIG_TYPES[key]
    if kind in (int, "int"):
        return int(val)
    if kind in (float, "float"):
        return float(val)
    if kind in (bool, "bool"):
        low = val.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ValueError(f"not a boolean: {val!r}")
    return val


def make_config(file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    merged = {}
    merged.update(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**merged)


def normalized_field(phi, params: Params, rule: QuadratureRule) -> SumField:
    """Scale so int |grad phi|^p = 1."""
    from .functionals import grad_p_norm
    norm = grad_p_norm(phi, params, rule)
    if norm <= 0:
        raise ValueError("cannot normalize a gradient-free field")
    return SumField([(norm ** (-1.0 / params.p), phi)])


def _compact_bump() -> Profile:
    def f(r):
        r = np.asarray(r, dtype=float)
        inside = (r > 0.0) & (r < 1.0)
        rr = np.where(inside, r, 0.5)
        return np.where(inside, rr ** 3 * (1.0 - rr) ** 3, 0.0)

    def df(r):
        r = np.asarray(r, dtype=float)
        inside = (r > 0.0) & (r < 1.0)
        rr = np.where(inside, r, 0.5)
        return np.where(inside, 3.0 * rr ** 2 * (1.0 - rr) ** 2 * (1.0 - 2.0 * rr), 0.0)

    return Profile(f=f, df=df, name="compact-bump")


def _heavy_tail(beta: float) -> Profile:
    def f(r):
        r = np.asarray(r, dtype=float)
        return r * (1.0 + r * r) ** (-(beta + 1.0) / 2.0)

    def df(r):
        r = np.asarray(r, dtype=float)
        return (1.0 + r * r) ** (-(beta + 3.0) / 2.0) * (1.0 - beta * r * r)

    return Profile(f=f, df=df, name="heavy-tail")


def perturbation_family(params: Params, rule: QuadratureRule,
                        spec=None) -> list[tuple[str, object]]:
    """The bundled perturbation directions, each normalized int |grad phi|^p = 1.

    dilation and translation span the tangent space of the extremal family;
    the spectral direction is the first mode above it; the two bumps probe a
    localized and a slowly decaying direction.
    """
    from .spectrum import MeshSpec, alpha3, build_channel, solve_channel
    e = Extremal()
    dil = ZonalField([(Profile(
        f=lambda r: dlam_profile(params, e, r),
        df=lambda r: dlam_profile_deriv(params, e, r),
        name="dilation"), 0)], params.n)
    y1 = ZonalHarmonic(1, params.n)
    scale1 = float(y1.value(np.array(1.0)))
    tra = ZonalField([(Profile(
        f=lambda r: -v1_deriv(params, r) / scale1,
        df=lambda r: -v1_deriv2(params, r) / scale1,
        name="translation"), 1)], params.n)
    spec = spec or MeshSpec()
    a3, l3, _ = alpha3(params, spec)
    k3 = {0: 3, 1: 2, 2: 1}[l3]
    pair = solve_channel(build_channel(params, l3, spec), k3, params)[k3 - 1]
    spectral = ZonalField([(pair.profile(), l3)], params.n)
    bump = ZonalField([(_compact_bump(), 0)], params.n)
    beta = (params.n - params.p) / (params.p - 1.0)
    tail = ZonalField([(_heavy_tail(beta), 0)], params.n)
    named = [
        ("dilation", dil),
        ("translation", tra),
        ("spectral", spectral),
        ("compact-bump", bump),
        ("heavy-tail", tail),
    ]
    return [(name, normalized_field(phi, params, rule)) for name, phi in named]


def fmt(x) -> str:
    """Scientific notation with 12 significant digits for report floats."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.11e}"
    return str(x)


def render_csv(subcommand: str, columns: list[str], rows: list[tuple],
               checks: list[tuple[str, bool, str]]) -> str:
    lines = [f"# {CSV_VERSION} subcommand={subcommand} schema={'|'.join(columns)}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(fmt(x) for x in row))
    for name, ok, detail in checks:
        lines.append(f"# check,{name},{'PASS' if ok else 'FAIL'},{detail}")
    return "\n".join(lines) + "\n"


def render_json(subcommand: str, columns: list[str], rows: list[tuple],
                checks: list[tuple[str, bool, str]]) -> str:
    payload = {
        "version": CSV_VERSION,
        "subcommand": subcommand,
        "columns": columns,
        "rows": [[fmt(x) for x in row] for row in rows],
        "checks": [{"name": n, "status": "PASS" if ok else "FAIL", "detail": d}
                   for n, ok, d in checks],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def render_svg(series: list[tuple[str, list[float], list[float]]],
               title: str = "", width: int = 640, height: int = 480) -> str:
    """Log-log polyline plot as standalone SVG text."""
    pad = 60.0
    pts = [(x, y) for _, xs, ys in series for x, y in zip(xs, ys)
           if x > 0 and y > 0]
    if not pts:
        raise ValueError("nothing positive to plot on log axes")
    lx = [math.log10(x) for x, _ in pts]
    ly = [math.log10(y) for _, y in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0

    def sx(x):
        return pad + (math.log10(x) - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (math.log10(y) - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ("#1b6ca8", "#c84b31", "#2d6a4f", "#7b2cbf", "#b07d12")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" '
        f'font-family="monospace">{title}</text>',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" '
        f'height="{height - 2 * pad}" fill="none" stroke="#444"/>',
    ]
    for i, (name, xs, ys) in enumerate(series):
        color = colors[i % len(colors)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}"
                          for x, y in zip(xs, ys) if x > 0 and y > 0)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}"/>')
        parts.append(f'<text x="{pad + 6}" y="{pad + 18 + 16 * i}" fill="{color}" '
                     f'font-family="monospace" font-size="12">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def radial_rule(params: Params, config: RunConfig) -> QuadratureRule:
    """Rule for whole-space integrals of extremal-type tails.

    Radial quadrature is cheap, so the outer cutoff is pushed to at least 1e8;
    the slowest tails (~ r^{-(n-1)/(p-1)}) then contribute below 1e-7.
    """
    return build_rule(params, count=max(config.quad_count, 512),
                      rmax=max(config.rmax, 1e8))
