"""Laguerre and Gaussian L² basis sets and their kinetic-balance partners.

Conventions (x = λr):

* Laguerre: ``phi_n = x^{l+1} exp(-x/2) L_n^{(2l+1)}(x)``
* Gaussian: ``phi_n = x^{l+1} exp(-x²/2) L_n^{(l+1/2)}(x²)``

The small-component partners are ``psi_n = (κ/r + d/dr) phi_n``. Both
overlap matrices are available in closed form (tridiagonal, or diagonal for
the Gaussian ``<phi|phi>``); :func:`overlaps_quadrature` recomputes them
independently for cross-validation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, NumericalError
from .quadrature import adaptive_matrix_integral, panel_nodes
from .specfun import laguerre_table

LAGUERRE = "laguerre"
GAUSSIAN = "gaussian"
KINDS = (LAGUERRE, GAUSSIAN)


def l_of_kappa(kappa: int) -> int:
    """Orbital quantum number for a Dirac quantum number κ."""
    if kappa == 0 or int(kappa) != kappa:
        raise DomainError("kappa must be a non-zero integer")
    return int(kappa) if kappa > 0 else -int(kappa) - 1


@dataclass(frozen=True)
class BasisSpec:
    """Basis family, angular channel, scale λ and truncation N.

    Parameters
    ----------
    kind : {"laguerre", "gaussian"}
    kappa : int
        Dirac quantum number. For non-relativistic work use
        :meth:`from_l`, which picks ``kappa = -(l+1)``.
    scale : float
        λ, inverse length.
    n_max : int
        Truncation N (number of interior basis functions).
    """

    kind: str
    kappa: int
    scale: float
    n_max: int

    def __post_init__(self):
        kind = str(self.kind).lower()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise DomainError(f"unknown basis kind {self.kind!r}")
        l_of_kappa(self.kappa)
        if not (self.scale > 0 and np.isfinite(self.scale)):
            raise DomainError("basis scale must be positive")
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise DomainError("n_max must be an integer >= 2")

    @classmethod
    def from_l(cls, kind: str, l: int, scale: float, n_max: int) -> "BasisSpec":
        if l < 0 or int(l) != l:
            raise DomainError("l must be a non-negative integer")
        return cls(kind, -(int(l) + 1), scale, n_max)

    @property
    def l(self) -> int:
        return l_of_kappa(self.kappa)

    def with_(self, **changes) -> "BasisSpec":
        vals = dict(kind=self.kind, kappa=self.kappa, scale=self.scale, n_max=self.n_max)
        vals.update(changes)
        return BasisSpec(**vals)


# ---------------------------------------------------------------- evaluation


def _tables(spec: BasisSpec, r, nmax: int):
    """Return (phi, dphi/dr), each of shape (nmax+1, len(r))."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0):
        raise DomainError("basis functions are evaluated at r > 0")
    lam, l = spec.scale, spec.l
    x = lam * r
    if spec.kind == LAGUERRE:
        pref = x ** (l + 1) * np.exp(-0.5 * x)
        L = laguerre_table(nmax, 2 * l + 1, x)
        dL = laguerre_table(max(nmax - 1, 0), 2 * l + 2, x)
        phi = pref * L
        dphi = ((l + 1) / x - 0.5) * phi
        dphi[1:] -= pref * dL[: nmax]
    else:
        y = x * x
        pref = x ** (l + 1) * np.exp(-0.5 * y)
        L = laguerre_table(nmax, l + 0.5, y)
        dL = laguerre_table(max(nmax - 1, 0), l + 1.5, y)
        phi = pref * L
        dphi = ((l + 1) / x - x) * phi
        dphi[1:] -= 2.0 * x * pref * dL[: nmax]
    return phi, lam * dphi


def phi_second_derivative(spec: BasisSpec, r, nmax: Optional[int] = None) -> np.ndarray:
    """``d² phi_n / dr²`` from the Laguerre derivative identities (no ODE used)."""
    nmax = spec.n_max if nmax is None else nmax
    r = np.atleast_1d(np.asarray(r, dtype=float))
    lam, l = spec.scale, spec.l
    x = lam * r
    n = nmax
    if spec.kind == LAGUERRE:
        a, y = 2 * l + 1, x
        q = (l + 1) / x - 0.5
        p2 = q * q - (l + 1) / x ** 2
    else:
        a, y = l + 0.5, x * x
        q = (l + 1) / x - x
        p2 = q * q - (l + 1) / x ** 2 - 1.0
    L0 = laguerre_table(n, a, y)
    L1 = np.zeros_like(L0)
    L2 = np.zeros_like(L0)
    L1[1:] = -laguerre_table(max(n - 1, 0), a + 1, y)[:n]
    if n >= 2:
        L2[2:] = laguerre_table(n - 2, a + 2, y)[: n - 1]
    if spec.kind == LAGUERRE:
        dL, d2L = L1, L2
    else:
        dL, d2L = 2 * x * L1, 2 * L1 + 4 * x * x * L2
    pref = x ** (l + 1) * (np.exp(-0.5 * x) if spec.kind == LAGUERRE else np.exp(-0.5 * x * x))
    return lam ** 2 * pref * (p2 * L0 + 2 * q * dL + d2L)


def phi_table(spec: BasisSpec, r, nmax: Optional[int] = None) -> np.ndarray:
    """``phi_n(r)`` for n = 0..nmax (default N) on the points ``r``."""
    nmax = spec.n_max if nmax is None else nmax
    return _tables(spec, r, nmax)[0]


def psi_table(spec: BasisSpec, r, nmax: Optional[int] = None) -> np.ndarray:
    """``psi_n(r) = (κ/r + d/dr) phi_n(r)``, analytic derivative."""
    nmax = spec.n_max if nmax is None else nmax
    r = np.atleast_1d(np.asarray(r, dtype=float))
    phi, dphi = _tables(spec, r, nmax)
    return spec.kappa / r * phi + dphi


def _index(n) -> int:
    if int(n) != n or n < 0:
        raise DomainError("basis index must be a non-negative integer")
    return int(n)


def _scalar(n, r, table):
    out = table[n]
    return float(out[0]) if np.ndim(r) == 0 else out


def phi(spec: BasisSpec, n: int, r):
    """Large-component basis function ``phi_n(r)``."""
    n = _index(n)
    return _scalar(n, r, phi_table(spec, r, n))


def phi_prime(spec: BasisSpec, n: int, r):
    """``d phi_n / dr``."""
    n = _index(n)
    return _scalar(n, r, _tables(spec, r, n)[1])


def psi(spec: BasisSpec, n: int, r):
    """Kinetic-balance partner ``psi_n(r)``."""
    n = _index(n)
    return _scalar(n, r, psi_table(spec, r, n))


def _dual_factor(spec: BasisSpec, n: np.ndarray) -> np.ndarray:
    l = spec.l
    if spec.kind == LAGUERRE:
        lg = np.array([math.lgamma(k + 1) - math.lgamma(k + 2 * l + 2) for k in n])
    else:
        lg = np.array([math.log(2.0) + math.lgamma(k + 1) - math.lgamma(k + l + 1.5) for k in n])
    return spec.scale * np.exp(lg)


def phibar_table(spec: BasisSpec, r, nmax: Optional[int] = None) -> np.ndarray:
    """Biorthonormal partners ``phibar_n`` with ``<phibar_m|phi_n> = δ_mn``.

    Laguerre: ``λ n!/Γ(n+2l+2) (λr)^{-1} phi_n``; Gaussian:
    ``2λ n!/Γ(n+l+3/2) phi_n``.
    """
    nmax = spec.n_max if nmax is None else nmax
    r = np.atleast_1d(np.asarray(r, dtype=float))
    tab = phi_table(spec, r, nmax)
    fac = _dual_factor(spec, np.arange(nmax + 1))[:, None]
    if spec.kind == LAGUERRE:
        return fac * tab / (spec.scale * r)
    return fac * tab


def phibar(spec: BasisSpec, n: int, r):
    n = _index(n)
    return _scalar(n, r, phibar_table(spec, r, n))


def support_radius(spec: BasisSpec, nmax: Optional[int] = None, tol: float = 1e-16) -> float:
    """Radius beyond which every ``phi_n^2`` (n ≤ nmax) is below ``tol`` of its peak."""
    nmax = spec.n_max if nmax is None else nmax
    l = spec.l
    if spec.kind == LAGUERRE:
        xmax = 4.0 * nmax + 2 * l + 80.0
    else:
        xmax = math.sqrt(4.0 * nmax + 2 * l + 3) + 12.0
    for _ in range(8):
        x = np.linspace(xmax / 4000, xmax, 4000)
        tab = phi_table(spec, x / spec.scale, nmax)
        peak = np.max(np.abs(tab), axis=1, keepdims=True)
        big = np.any(np.abs(tab) > math.sqrt(tol) * peak, axis=0)
        last = np.nonzero(big)[0][-1]
        if last < len(x) - 2:
            break
        xmax *= 1.5
    else:
        raise NumericalError("support radius search did not terminate")
    return float(x[last + 1] / spec.scale)


def psibar_table(spec: BasisSpec, r, nmax: Optional[int] = None, order: int = 24) -> np.ndarray:
    """Duals ``psibar_n`` solving ``(κ/r - d/dr) psibar_n = phibar_n``.

    For κ > 0: ``psibar = r^κ ∫_r^∞ t^{-κ} phibar dt``; for κ < 0:
    ``psibar = -r^{-(l+1)} ∫_0^r t^{l+1} phibar dt``. Both integrals are done
    by Gauss-Legendre panels between the (sorted) evaluation points, and the
    rule is checked against one with doubled panels.
    """
    nmax = spec.n_max if nmax is None else nmax
    r = np.atleast_1d(np.asarray(r, dtype=float))
    order_idx = np.argsort(r)
    rs = r[order_idx]
    R = max(support_radius(spec, nmax), rs[-1] * 1.01)
    kappa = spec.kappa
    h = 0.25 / spec.scale

    def run(refine):
        edges = [0.0]
        for b in list(rs) + [R]:
            a = edges[-1]
            m = max(1, int(math.ceil(refine * (b - a) / h)))
            edges.extend(np.linspace(a, b, m + 1)[1:])
        edges = np.array(edges)
        nodes, w = panel_nodes(edges, order)
        if kappa > 0:
            f = nodes ** (-float(kappa)) * phibar_table(spec, nodes, nmax)
        else:
            f = nodes ** (spec.l + 1.0) * phibar_table(spec, nodes, nmax)
        per_panel = (f * w).reshape(nmax + 1, len(edges) - 1, order).sum(axis=2)
        cum = np.concatenate([np.zeros((nmax + 1, 1)), np.cumsum(per_panel, axis=1)], axis=1)
        # indices of the evaluation points among the edges
        pos = np.searchsorted(edges, rs)
        if kappa > 0:
            integral = cum[:, -1:] - cum[:, pos]
            return rs ** float(kappa) * integral
        return -rs ** (-(spec.l + 1.0)) * cum[:, pos]

    coarse, fine = run(1), run(2)
    scale = np.max(np.abs(fine), axis=1, keepdims=True)
    if np.max(np.abs(fine - coarse) / np.maximum(scale, 1e-300)) > 1e-9:
        raise NumericalError("psibar quadrature not converged")
    out = np.empty_like(fine)
    out[:, order_idx] = fine
    return out


def psibar(spec: BasisSpec, n: int, r):
    n = _index(n)
    return _scalar(n, r, psibar_table(spec, r, n))


def biorthonormality_matrix(spec: BasisSpec, size: int, form: str = "derivative",
                            panels: int = 160) -> np.ndarray:
    """``B_mn = ∫ [(κ/r - d/dr) psibar_m] phi_n dr`` for m, n < size (ideally δ_mn).

    ``form="derivative"`` differentiates the numerically integrated duals
    with a 5-point central stencil; ``form="parts"`` integrates by parts to
    ``∫ psibar_m psi_n dr`` (both boundary terms vanish).
    """
    if form not in ("derivative", "parts"):
        raise DomainError("form must be 'derivative' or 'parts'")
    nmax = size - 1
    R = support_radius(spec, nmax + 2)
    nodes, w = panel_nodes(np.linspace(0.0, R, panels + 1))
    pb = psibar_table(spec, nodes, nmax)
    if form == "parts":
        dual = pb
        right = psi_table(spec, nodes, nmax)
    else:
        h = np.minimum(1e-3 / spec.scale, 0.25 * nodes)
        pts = np.concatenate([nodes - 2 * h, nodes - h, nodes + h, nodes + 2 * h])
        vals = psibar_table(spec, pts, nmax).reshape(nmax + 1, 4, len(nodes))
        d = (vals[:, 0] - 8 * vals[:, 1] + 8 * vals[:, 2] - vals[:, 3]) / (12 * h)
        dual = spec.kappa / nodes * pb - d
        right = phi_table(spec, nodes, nmax)
    return (dual * w) @ right.T


# ------------------------------------------------------------------ overlaps


@dataclass(frozen=True)
class OverlapMatrices:
    """``s_phi = <phi_m|phi_n>`` and ``s_psi = <psi_m|psi_n>`` for m, n = 0..N.

    The extra row/column (index N) carries the boundary entries used by the
    tangent formulas.
    """

    s_phi: np.ndarray
    s_psi: np.ndarray

    def __post_init__(self):
        for a in (self.s_phi, self.s_psi):
            a.setflags(write=False)


def _ratio(n: np.ndarray, shift: float) -> np.ndarray:
    # Γ(n + shift) / n!
    return np.exp([math.lgamma(k + shift) - math.lgamma(k + 1) for k in n])


def overlaps(spec: BasisSpec, size: Optional[int] = None) -> OverlapMatrices:
    """Closed-form overlap matrices of dimension ``size`` (default N+1)."""
    size = spec.n_max + 1 if size is None else size
    lam, l = spec.scale, spec.l
    n = np.arange(size)
    s = np.zeros((size, size))
    t = np.zeros((size, size))
    if spec.kind == LAGUERRE:
        g = _ratio(n, 2 * l + 2)
        s[n, n] = 2 * (n + l + 1) * g / lam
        t[n, n] = 0.25 * lam * 2 * (n + l + 1) * g
        # (n, n+1) entries: column n+1 carries Γ(n+2l+3)/n!
        up = g[:-1] * (n[:-1] + 2 * l + 2)
        s[n[:-1], n[:-1] + 1] = -up / lam
        t[n[:-1], n[:-1] + 1] = 0.25 * lam * up
    else:
        g = 0.5 * _ratio(n, l + 1.5)
        s[n, n] = g / lam
        t[n, n] = lam * g * (2 * n + l + 1.5)
        t[n[:-1], n[:-1] + 1] = lam * g[:-1] * (n[:-1] + l + 1.5)
    s = np.triu(s) + np.triu(s, 1).T
    t = np.triu(t) + np.triu(t, 1).T
    return OverlapMatrices(s, t)


def overlaps_quadrature(spec: BasisSpec, size: Optional[int] = None, rtol: float = 1e-11):
    """Overlaps by adaptive panel quadrature (independent of the closed forms).

    Returns ``(s_phi, s_psi, s_kin)`` where ``s_kin = <phi_m|(-d²+l(l+1)/r²) phi_n>``
    is obtained from the analytic second derivative.
    """
    size = spec.n_max + 1 if size is None else size
    nmax = size - 1
    R = support_radius(spec, nmax)
    l = spec.l

    def second_derivative(r):
        return phi_second_derivative(spec, r, nmax)

    def integrand(nodes, w):
        ph = phi_table(spec, nodes, nmax)
        ps = psi_table(spec, nodes, nmax)
        kin = -second_derivative(nodes) + l * (l + 1) / nodes ** 2 * ph
        return np.stack([(ph * w) @ ph.T, (ps * w) @ ps.T, (ph * w) @ kin.T])

    out = adaptive_matrix_integral(integrand, [0.0, R], rtol=rtol)
    return out[0], out[1], out[2]
