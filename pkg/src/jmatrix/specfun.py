"""Special-function kernel.

Orthogonal polynomials (Laguerre, Gegenbauer) by three-term recurrence,
terminating Gauss and confluent (Kummer) hypergeometric series with a
cancellation guard, Riccati-Bessel/Neumann pairs and log-gamma.

All routines are pure functions of their arguments.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from .errors import DomainError


class PrecisionWarning(UserWarning):
    """Raised (as a warning) when a series suffers uncorrectable cancellation."""


#: largest tolerated ratio between the biggest series term and the result
CANCELLATION_LIMIT = 1e8


@dataclass(frozen=True)
class PolyEval:
    """Value of a polynomial and (optionally) its derivative."""

    value: float
    derivative: Optional[float] = None


def log_gamma(x: float) -> float:
    """Natural logarithm of the gamma function for positive real ``x``."""
    if not np.isfinite(x) or x <= 0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    # libm lgamma is accurate to a few ulp on the positive axis
    return math.lgamma(x)


# ---------------------------------------------------------------- polynomials


def laguerre_table(nmax: int, alpha: float, x) -> np.ndarray:
    """Return ``L_n^{(alpha)}(x)`` for n = 0..nmax, shape ``(nmax+1,) + x.shape``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = 1.0 + alpha - x
    for n in range(1, nmax):
        out[n + 1] = ((2 * n + 1 + alpha - x) * out[n] - (n + alpha) * out[n - 1]) / (n + 1)
    return out


def laguerre(n: int, alpha: float, x: float) -> PolyEval:
    """Generalized Laguerre polynomial and its derivative.

    The derivative uses ``d/dx L_n^{(a)} = -L_{n-1}^{(a+1)}``.
    """
    if n < 0:
        raise DomainError("laguerre: n must be non-negative")
    if not np.isfinite(x):
        raise DomainError("laguerre: non-finite argument")
    val = float(laguerre_table(n, alpha, x)[n])
    der = 0.0 if n == 0 else -float(laguerre_table(n - 1, alpha + 1.0, x)[n - 1])
    return PolyEval(val, der)


def gegenbauer_table(nmax: int, lam: float, x) -> np.ndarray:
    """Return ``C_n^{(lam)}(x)`` for n = 0..nmax."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = 2.0 * lam * x
    for n in range(1, nmax):
        out[n + 1] = (2.0 * (n + lam) * x * out[n] - (n + 2.0 * lam - 1.0) * out[n - 1]) / (n + 1)
    return out


def gegenbauer(n: int, lam: float, x: float) -> float:
    """Gegenbauer polynomial ``C_n^{(lam)}(x)``."""
    if n < 0:
        raise DomainError("gegenbauer: n must be non-negative")
    if not np.isfinite(x):
        raise DomainError("gegenbauer: non-finite argument")
    return float(gegenbauer_table(n, lam, x)[n])


# -------------------------------------------------------------- hypergeometric


def _exact_poly_sum(a: int, b: float, c: float, x: float) -> float:
    # floats are dyadic rationals, so this sum is exact in the given inputs
    fb, fc, fx = Fraction(b), Fraction(c), Fraction(x)
    term = Fraction(1)
    total = Fraction(1)
    for j in range(-a):
        term = term * (a + j) * (fb + j) * fx / ((fc + j) * (j + 1))
        total += term
    return float(total)


def gauss_2f1_terminating(a: int, b: float, c: float, x: float,
                          cancellation_limit: float = CANCELLATION_LIMIT) -> float:
    """Terminating Gauss series ``2F1(a, b; c; x)`` with ``a`` a non-positive integer.

    The |a|+1 terms are summed in double precision; when the largest term
    exceeds the result by more than ``cancellation_limit`` the sum is redone
    in exact rational arithmetic.
    """
    if a != int(a) or a > 0:
        raise DomainError("gauss_2f1_terminating: a must be a non-positive integer")
    a = int(a)
    for j in range(-a):
        if c + j == 0:
            raise DomainError("gauss_2f1_terminating: c hits a pole before termination")
    term = 1.0
    total = 1.0
    biggest = 1.0
    for j in range(-a):
        term *= (a + j) * (b + j) * x / ((c + j) * (j + 1))
        total += term
        biggest = max(biggest, abs(term))
    if biggest > cancellation_limit * abs(total) or total == 0.0:
        return _exact_poly_sum(a, b, c, x)
    return total


def _kummer_series(a: float, b: float, x: float, max_terms: int = 10000) -> Tuple[float, float]:
    """Plain double-precision series; returns (sum, largest |term|)."""
    term = 1.0
    total = 1.0
    biggest = 1.0
    for j in range(max_terms):
        if a + j == 0:
            break
        term *= (a + j) * x / ((b + j) * (j + 1))
        total += term
        biggest = max(biggest, abs(term))
        if abs(term) < 1e-17 * abs(total) and j > abs(a) + abs(x):
            break
    return total, biggest


def _kummer_exact(a: float, b: float, x: float, max_terms: int = 20000) -> float:
    fa, fb, fx = Fraction(a), Fraction(b), Fraction(x)
    term = Fraction(1)
    total = Fraction(1)
    for j in range(max_terms):
        if fa + j == 0:
            return float(total)
        term = term * (fa + j) * fx / ((fb + j) * (j + 1))
        total += term
        if j > abs(a) + abs(x) + 2:
            # beyond this point terms decrease geometrically with ratio < q
            q = abs((a + j + 1) * x / ((b + j + 1) * (j + 2)))
            if q < 1 and abs(term) * q / (1 - q) < 1e-18 * abs(total):
                return float(total)
    raise DomainError("kummer_1f1: series did not converge")


def kummer_1f1(a: float, b: float, x: float, *, exact_fallback: bool = True,
               return_info: bool = False, cancellation_limit: float = CANCELLATION_LIMIT):
    """Confluent hypergeometric function ``1F1(a; b; x)``.

    Strategy: direct series; if the estimated cancellation (largest term over
    result) exceeds ``cancellation_limit`` (default 1e8) try the Kummer transform
    ``e^x 1F1(b-a; b; -x)``; if that is no better, resum exactly with
    rational arithmetic (or warn when ``exact_fallback`` is off).

    With ``return_info`` a tuple ``(value, cancellation, method)`` is returned.
    """
    if b <= 0 and b == int(b):
        raise DomainError("kummer_1f1: b must not be a non-positive integer")
    val, big = _kummer_series(a, b, x)
    canc = big / abs(val) if val != 0 else np.inf
    method = "series"
    if canc > cancellation_limit:
        tval, tbig = _kummer_series(b - a, b, -x)
        tcanc = tbig / abs(tval) if tval != 0 else np.inf
        if tcanc < canc:
            val, canc, method = math.exp(x) * tval, tcanc, "kummer"
    if canc > cancellation_limit:
        if exact_fallback:
            val, method = _kummer_exact(a, b, x), "exact"
            canc = 1.0
        else:
            warnings.warn(f"1F1({a}; {b}; {x}): cancellation {canc:.1e}", PrecisionWarning)
    if return_info:
        return val, canc, method
    return val


# ------------------------------------------------------------ Riccati functions


def _riccati_j_miller(l: int, x: np.ndarray) -> np.ndarray:
    """Downward (Miller) recurrence for x*j_l(x), used where l > x."""
    start = l + 20 + int(math.sqrt(40.0 * (l + 1)))
    f_hi = np.zeros_like(x)
    f = np.full_like(x, 1e-250)
    keep = np.zeros((l + 1,) + x.shape)
    for m in range(start, 0, -1):
        f_hi, f = f, (2 * m + 1) / x * f - f_hi
        if m - 1 <= l:
            keep[m - 1] = f
        scale = np.maximum(np.abs(f), 1.0)
        if np.any(scale > 1e200):
            f, f_hi, keep = f / scale, f_hi / scale, keep / scale
    j0 = np.sin(x)
    j1 = np.sin(x) / x - np.cos(x)
    use0 = np.abs(j0) >= np.abs(j1)
    return np.where(use0, keep[l] * j0 / keep[0], keep[l] * j1 / keep[1])


def riccati_bessel_table(lmax: int, x) -> Tuple[np.ndarray, np.ndarray]:
    """Riccati-Bessel ``jhat_l = x j_l(x)`` and Riccati-Neumann ``nhat_l = x y_l(x)``.

    Conventions: ``jhat_0 = sin x``, ``nhat_0 = -cos x``, so that
    ``jhat_l nhat_l' - jhat_l' nhat_l = 1``. Returns arrays for l = 0..lmax.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("riccati_bessel_pair: x must be positive")
    if x.ndim == 0:
        j, n = riccati_bessel_table(lmax, x[None])
        return j[:, 0], n[:, 0]
    j = np.empty((lmax + 1,) + x.shape)
    n = np.empty_like(j)
    j[0], n[0] = np.sin(x), -np.cos(x)
    if lmax >= 1:
        j[1] = np.sin(x) / x - np.cos(x)
        n[1] = -np.cos(x) / x - np.sin(x)
    for l in range(1, lmax):
        n[l + 1] = (2 * l + 1) / x * n[l] - n[l - 1]
        j[l + 1] = (2 * l + 1) / x * j[l] - j[l - 1]
    # upward recurrence for jhat is unstable where l > x
    for l in range(2, lmax + 1):
        mask = x < l
        if np.any(mask):
            j[l][mask] = _riccati_j_miller(l, x[mask])
    return j, n


def riccati_bessel_pair(l: int, x):
    """Return ``(jhat_l(x), nhat_l(x))``; see :func:`riccati_bessel_table`."""
    if l < 0:
        raise DomainError("riccati_bessel_pair: l must be non-negative")
    j, n = riccati_bessel_table(l, x)
    if np.ndim(x) == 0:
        return float(j[l]), float(n[l])
    return j[l], n[l]


def riccati_bessel_derivs(l: int, x):
    """Derivatives ``(jhat_l', nhat_l')`` via ``f_l' = f_{l-1} - (l/x) f_l``."""
    x = np.asarray(x, dtype=float)
    j, n = riccati_bessel_table(l + 1, x)
    # f_l' = -f_{l+1} + (l+1)/x f_l holds for l >= 0
    dj = (l + 1) / x * j[l] - j[l + 1]
    dn = (l + 1) / x * n[l] - n[l + 1]
    return dj, dn
