"""Numerical tools for sharp Sobolev stability: extremal profiles, spectral
analysis of the weighted linearization, distance functionals, and scans of
the elementary pointwise inequalities behind the quantitative bounds."""

from .params import ParameterDomainError, Params, sharp_constant, sphere_area

__all__ = [
    "ParameterDomainError",
    "Params",
    "sharp_constant",
    "sphere_area",
]

__version__ = "1.0.0"
