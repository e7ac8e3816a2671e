"""Radial Gaussian integrals used by the co-volume and the Λ bound."""

import math

import numpy as np
from scipy import special

SQRT_HALF_PI = math.sqrt(math.pi / 2.0)


def radial_integral(r, n):
    """G_n(r) = integral_0^r exp(-t^2/2) t^(n-1) dt.

    Closed forms for n = 2, 3; regularized lower incomplete gamma otherwise.
    """
    r = np.asarray(r, dtype=float)
    if n == 2:
        return -np.expm1(-0.5 * r * r)
    if n == 3:
        return SQRT_HALF_PI * special.erf(r / math.sqrt(2.0)) - r * np.exp(-0.5 * r * r)
    return radial_integral_total(n) * special.gammainc(0.5 * n, 0.5 * r * r)


def radial_integral_total(n):
    """G_n(infinity) = 2^(n/2 - 1) Gamma(n/2)."""
    return 2.0 ** (0.5 * n - 1.0) * math.gamma(0.5 * n)


def radial_density(r, n):
    """Derivative of G_n: r^(n-1) exp(-r^2/2)."""
    r = np.asarray(r, dtype=float)
    return r ** (n - 1) * np.exp(-0.5 * r * r)


def sphere_area(n):
    """Hausdorff (n-1)-measure of the unit sphere in R^n."""
    return 2.0 * math.pi ** (0.5 * n) / math.gamma(0.5 * n)


def gauss_normalizer(n):
    return (2.0 * math.pi) ** (-0.5 * n)
