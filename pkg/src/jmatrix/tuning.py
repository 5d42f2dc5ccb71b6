"""Oracle-free choice of the basis scale λ.

λ is a nonlinear variational parameter of the truncated problem. The rule
implemented here:

1. evaluate δ_N(λ) and δ_{N-1}(λ) on a log-spaced λ grid;
2. keep the grid points where δ_N is stationary in λ (sign change of the
   forward differences);
3. among those, pick the point where ``|δ_N - δ_{N-1}|`` is smallest.

If δ_N has no stationary point on the grid, step 3 runs over the whole grid.
Nothing in the selection uses a reference phase shift.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, NumericalError

DEFAULT_SCALES = tuple(float(x) for x in np.geomspace(0.7, 14.0, 32))


@dataclass(frozen=True)
class ScaleChoice:
    """Selected λ and the scan behind it.

    ``deltas`` and ``deltas_prev`` hold δ_N and δ_{N-1} (unwrapped modulo π)
    on ``scales``; entries are NaN where the evaluation failed.
    """

    scale: float
    tan_delta: float
    tan_delta_prev: float
    stationary: bool
    scales: np.ndarray
    deltas: np.ndarray
    deltas_prev: np.ndarray

    @property
    def n_stability(self) -> float:
        """``|δ_N - δ_{N-1}|`` at the chosen scale."""
        i = int(np.argmin(np.abs(self.scales - self.scale)))
        return float(abs(self.deltas[i] - self.deltas_prev[i]))


def _unwrap(delta: np.ndarray) -> np.ndarray:
    out = delta.copy()
    ok = np.isfinite(out)
    if np.any(ok):
        out[ok] = np.unwrap(out[ok], period=math.pi)
    return out


def tune_scale(evaluate: Callable[[float], Tuple[float, float]],
               scales: Optional[Sequence[float]] = None) -> ScaleChoice:
    """Pick λ from a grid.

    Parameters
    ----------
    evaluate : callable
        ``evaluate(scale) -> (tan δ_N, tan δ_{N-1})``. Numerical failures
        (e.g. a Harris pole) should raise :class:`NumericalError`; such grid
        points are skipped.
    scales : sequence of float, optional
        Ascending positive grid (default :data:`DEFAULT_SCALES`).
    """
    lam = np.asarray(DEFAULT_SCALES if scales is None else scales, dtype=float)
    if lam.ndim != 1 or lam.size < 3 or np.any(lam <= 0) or np.any(np.diff(lam) <= 0):
        raise DomainError("scales must be an ascending positive grid of at least 3 points")
    tn = np.full(lam.size, np.nan)
    tp = np.full(lam.size, np.nan)
    for i, s in enumerate(lam):
        try:
            tn[i], tp[i] = evaluate(float(s))
        except NumericalError:
            continue
    ok = np.isfinite(tn) & np.isfinite(tp)
    if not np.any(ok):
        raise NumericalError("no scale on the grid gave a finite phase shift")
    dn = _unwrap(np.arctan(tn))
    dp = np.arctan(tp)
    # put δ_{N-1} on the same branch as δ_N
    dp = dp + math.pi * np.round((dn - dp) / math.pi)
    d = np.diff(dn)
    cand = [i for i in range(1, lam.size - 1)
            if ok[i - 1] and ok[i] and ok[i + 1] and d[i - 1] * d[i] < 0]
    stationary = bool(cand)
    if not cand:
        cand = list(np.flatnonzero(ok))
    i = min(cand, key=lambda j: abs(dn[j] - dp[j]))
    return ScaleChoice(float(lam[i]), float(tn[i]), float(tp[i]), stationary, lam, dn, dp)
