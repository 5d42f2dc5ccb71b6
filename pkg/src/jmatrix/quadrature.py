"""Adaptive Gauss-Legendre panel quadrature for matrix-valued integrands.

A panel set on ``[0, R]`` (split at user breakpoints) is refined by doubling
the number of panels until every entry of the integrated matrix changes by
less than ``rtol`` relative to the largest entry.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import NumericalError

_ORDER = 24


@lru_cache(maxsize=8)
def _gl(order: int):
    return np.polynomial.legendre.leggauss(order)


def panel_nodes(edges: np.ndarray, order: int = _ORDER):
    """Nodes and weights of a composite Gauss-Legendre rule on given panel edges."""
    x, w = _gl(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + half * (x[None, :] + 1.0)).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def _edges(points: Sequence[float], panels_per_unit: int) -> np.ndarray:
    out = []
    for a, b in zip(points[:-1], points[1:]):
        n = max(1, panels_per_unit)
        out.append(np.linspace(a, b, n + 1)[:-1])
    out.append([points[-1]])
    return np.concatenate(out)


@dataclass
class QuadratureReport:
    """Diagnostics of an adaptive run."""

    panels: int
    change: float
    converged: bool


def adaptive_matrix_integral(integrand: Callable[[np.ndarray, np.ndarray], np.ndarray],
                             points: Sequence[float], rtol: float = 1e-11,
                             start_panels: int = 8, max_doublings: int = 8,
                             return_report: bool = False):
    """Integrate a matrix-valued function over ``[points[0], points[-1]]``.

    Parameters
    ----------
    integrand : callable
        ``integrand(nodes, weights)`` returns the weighted sum (a matrix) for a
        given quadrature rule; this keeps the inner loop in numpy.
    points : sequence of float
        Ascending breakpoints; discontinuities must be listed here.
    rtol : float
        Convergence threshold on ``max|Δ| / max|entry|``.
    """
    points = [float(p) for p in points]
    n = start_panels
    prev = integrand(*panel_nodes(_edges(points, n)))
    change = np.inf
    for _ in range(max_doublings):
        n *= 2
        cur = integrand(*panel_nodes(_edges(points, n)))
        scale = max(np.max(np.abs(cur)), 1e-300)
        change = float(np.max(np.abs(cur - prev)) / scale)
        prev = cur
        if change < rtol:
            if return_report:
                return cur, QuadratureReport(n, change, True)
            return cur
    raise NumericalError(f"panel quadrature did not converge (last relative change {change:.2e})")
