"""Randomly shifted low-discrepancy integration over R^n with importance sampling."""

from __future__ import annotations

import numpy as np
from scipy.special import betaincinv, ndtri
from scipy.stats import qmc as scipy_qmc

from .extremals import v1_deriv, v1_value
from .params import Params

_DENSITIES = ("value", "gradient")


class SampleEvaluationError(RuntimeError):
    """An integrand produced a non-finite value at a QMC sample."""


def _radial_from_uniform(params: Params, u: np.ndarray, density: str) -> np.ndarray:
    """Inverse-CDF sampling of the radius under the chosen importance density.

    Both densities reduce, through t = r^{p'}, to a Beta law for t/(1+t):
      value density  v1^{p*}:        Beta(n/p', n - n/p')
      gradient density |grad v1|^p/S^p: Beta(n/p' + 1, n - n/p' - 1)
    """
    a = params.n / params.pprime
    b = params.n - a
    if density == "gradient":
        a, b = a + 1.0, b - 1.0
    x = betaincinv(a, b, u)
    x = np.clip(x, 1e-15, 1.0 - 1e-15)
    t = x / (1.0 - x)
    return t ** (1.0 / params.pprime)


def _density_value(params: Params, r: np.ndarray, density: str) -> np.ndarray:
    if density == "gradient":
        return np.abs(v1_deriv(params, r)) ** params.p / params.Sp
    return v1_value(params, r) ** params.pstar


def qmc_integrate(
    integrand,
    params: Params,
    samples: int = 1 << 14,
    seed: int = 0,
    density: str = "value",
    shifts: int = 8,
) -> tuple[float, float]:
    """Integrate integrand(points) over R^n; returns (value, stderr).

    Sobol points with `shifts` independent random shifts; the standard error
    is estimated across the shift replicates. Deterministic given seed.
    """
    if samples < (1 << 12):
        raise ValueError("samples must be >= 4096")
    if density not in _DENSITIES:
        raise ValueError(f"density must be one of {_DENSITIES}")
    if params.n > 6:
        raise ValueError("QMC integration is restricted to n <= 6")
    n = params.n
    m = samples // shifts
    sobol = scipy_qmc.Sobol(d=n + 1, scramble=False)
    base = sobol.random(m)
    rng = np.random.default_rng(seed)
    shift_vectors = rng.random((shifts, n + 1))
    means = np.empty(shifts)
    for k in range(shifts):
        u = (base + shift_vectors[k]) % 1.0
        u = np.clip(u, 1e-12, 1.0 - 1e-12)
        r = _radial_from_uniform(params, u[:, 0], density)
        gauss = ndtri(u[:, 1:])
        norms = np.linalg.norm(gauss, axis=1)
        norms = np.maximum(norms, 1e-300)
        x = gauss * (r / norms)[:, None]
        q = _density_value(params, r, density)
        f = np.asarray(integrand(x), dtype=float)
        if not np.all(np.isfinite(f)):
            bad = x[~np.isfinite(f)][0]
            raise SampleEvaluationError(f"non-finite integrand value at x={bad}")
        means[k] = float(np.mean(f / q))
    value = float(np.mean(means))
    stderr = float(np.std(means, ddof=1) / np.sqrt(shifts))
    return value, stderr
