"""Problem parameters and closed-form constants of the sharp Sobolev inequality."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import betaln, gammaln


class ParameterDomainError(ValueError):
    """Raised when (n, p) falls outside 2 <= p < n, n >= 2."""


def _check_domain(n: int, p: float) -> None:
    if int(n) != n or n < 2:
        raise ParameterDomainError(f"dimension n must be an integer >= 2, got {n}")
    if not (2.0 <= p < n):
        raise ParameterDomainError(f"exponent p must satisfy 2 <= p < n, got p={p}, n={n}")


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1} in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def sharp_constant(n: int, p: float) -> float:
    """Best constant S in ||grad u||_p >= S ||u||_{p*}.

    Closed form: sqrt(pi) * n^{1/p} * ((n-p)/(p-1))^{(p-1)/p}
    * (Gamma(n/p) Gamma(1+n-n/p) / (Gamma(1+n/2) Gamma(n)))^{1/n}.
    """
    _check_domain(n, p)
    log_gamma_ratio = (
        gammaln(n / p) + gammaln(1.0 + n - n / p) - gammaln(1.0 + n / 2.0) - gammaln(n)
    ) / n
    return (
        math.sqrt(math.pi)
        * n ** (1.0 / p)
        * ((n - p) / (p - 1.0)) ** ((p - 1.0) / p)
        * math.exp(log_gamma_ratio)
    )


def normalization_kappa0(n: int, p: float) -> float:
    """Amplitude kappa0 making the standard bubble have unit L^{p*} norm.

    The p*-th power of the bubble integrates to
    kappa0^{p*} * omega_{n-1} * (1/p') * B(n/p', n - n/p'), so kappa0 is the
    (-1/p*)-th power of the bracketed factor.
    """
    _check_domain(n, p)
    pprime = p / (p - 1.0)
    pstar = n * p / (n - p)
    log_integral = (
        math.log(sphere_area(n)) - math.log(pprime) + betaln(n / pprime, n - n / pprime)
    )
    return math.exp(-log_integral / pstar)


@dataclass(frozen=True)
class Params:
    """All derived constants for a fixed (n, p). Immutable; safe to share."""

    n: int
    p: float
    pstar: float
    pprime: float
    S: float
    Sp: float
    kappa0: float
    alpha1: float
    alpha2: float

    @classmethod
    def make(cls, n: int, p: float) -> "Params":
        _check_domain(n, p)
        p = float(p)
        pstar = n * p / (n - p)
        S = sharp_constant(n, p)
        Sp = S**p
        return cls(
            n=int(n),
            p=p,
            pstar=pstar,
            pprime=p / (p - 1.0),
            S=S,
            Sp=Sp,
            kappa0=normalization_kappa0(n, p),
            alpha1=(p - 1.0) * Sp,
            alpha2=(pstar - 1.0) * Sp,
        )

    @property
    def omega(self) -> float:
        """Surface measure of S^{n-1}."""
        return sphere_area(self.n)
