"""Reference phase shifts by direct integration of the radial equations.

* :func:`schrodinger_phase_shift` -- Numerov on a uniform grid with series
  start, a jump correction at square-well edges and grid halving until
  converged.
* :func:`dirac_phase_shift` -- adaptive Runge-Kutta (DOP853) for the coupled
  radial Dirac system.
* :func:`squarewell_tan_delta_analytic` -- textbook s-wave closed form.

Both integrators match the large component to ``A jhat_l(kr) + B(-nhat_l(kr))``
at two radii beyond the potential's range and return ``tan δ = B/A``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, NumericalError
from .potential import SQUARE_WELL, PotentialModel, evaluate
from .specfun import riccati_bessel_pair


@dataclass(frozen=True)
class GridParams:
    """Integration controls.

    Attributes
    ----------
    h : float or None
        Initial Numerov step (default from k and the potential's range).
    tol : float
        Required change under grid halving (Numerov) or under a ten-fold
        tightening of ``rtol`` (Dirac).
    max_refine : int
        Grid halvings allowed before giving up.
    rtol : float
        Relative tolerance of the adaptive Dirac integrator.
    r0 : float
        Starting radius for the Dirac integration.
    match_offset : float
        Extra distance (in units of 1/k) between the potential's range and R1.
    """

    h: Optional[float] = None
    tol: float = 1e-8
    max_refine: int = 8
    rtol: float = 1e-10
    r0: float = 1e-6
    match_offset: float = 1.0


def _match(l: int, k: float, r1: float, u1: float, r2: float, u2: float):
    j1, n1 = riccati_bessel_pair(l, k * r1)
    j2, n2 = riccati_bessel_pair(l, k * r2)
    # u = A jhat + B (-nhat)
    m = np.array([[j1, -n1], [j2, -n2]])
    A, B = np.linalg.solve(m, np.array([u1, u2]))
    return A, B


def _match_radii(model: PotentialModel, k: float, gp: GridParams):
    r1 = model.cutoff() + gp.match_offset / k
    # quarter wavelength apart keeps the 2x2 system well conditioned
    r2 = r1 + 0.5 * math.pi / k
    return r1, r2


def _numerov(model: PotentialModel, l: int, E: float, h: float, r_end: float):
    """Integrate u'' = f u on r = 0, h, ..., returns (r, u)."""
    n = int(math.ceil(r_end / h)) + 1
    r = np.arange(n) * h
    r[0] = 1.0  # placeholder, never used in f
    with np.errstate(divide="ignore"):
        V = evaluate(model, r)
    V[0] = model.value_at_origin()
    jump_idx = None
    if model.kind == SQUARE_WELL and not model.is_free:
        jump_idx = int(round(model.range_ / h))
        # the grid is chosen so the edge is a node; use the mean value there
        V[jump_idx] = 0.5 * model.V0
    r[0] = 0.0
    f = np.empty(n)
    f[1:] = l * (l + 1) / r[1:] ** 2 + 2.0 * (V[1:] - E)
    f[0] = 0.0
    u = np.zeros(n)
    a2 = (model.value_at_origin() - E) / (2 * l + 3)
    u[1] = h ** (l + 1) * (1 + a2 * h * h)
    u[2] = (2 * h) ** (l + 1) * (1 + a2 * 4 * h * h)
    w = 1.0 - h * h * f / 12.0
    jump_dv = -model.V0
    if jump_idx is not None:
        # one-sided values of f at the edge for the neighbouring steps
        fj = l * (l + 1) / r[jump_idx] ** 2
        w_in = 1.0 - h * h * (fj + 2.0 * (model.V0 - E)) / 12.0
        w_out = 1.0 - h * h * (fj - 2.0 * E) / 12.0
    special = set() if jump_idx is None else {jump_idx - 1, jump_idx, jump_idx + 1}
    # summed form: y = w u, dy_{n+1} = dy_n + h² f_n u_n keeps round-off O(eps N)
    h2 = h * h
    y_prev, y = w[1] * u[1], w[2] * u[2]
    dy = y - y_prev
    for i in range(2, n - 1):
        if i in special:
            wm, w0, wp = w[i - 1], w[i], w[i + 1]
            if i + 1 == jump_idx:
                wp = w_in
            elif i - 1 == jump_idx:
                wm = w_out
            u[i + 1] = ((12.0 - 10.0 * w0) * u[i] - wm * u[i - 1]) / wp
            if i == jump_idx:
                du = (3 * u[i] - 4 * u[i - 1] + u[i - 2]) / (2 * h)
                # missing h³/12 · [u'''] with [u'''] = 2[V] u'(a)
                u[i + 1] += h ** 3 / 12.0 * 2.0 * jump_dv * du / wp
            y_new = w[i + 1] * u[i + 1]
            dy = y_new - y
            y = y_new
        else:
            dy += h2 * f[i] * u[i]
            y += dy
            u[i + 1] = y / w[i + 1]
        if abs(u[i + 1]) > 1e250:
            u[: i + 2] *= 1e-250
            y *= 1e-250
            dy *= 1e-250
    return r, u


def schrodinger_phase_shift(model: PotentialModel, l: int, energy: float,
                            grid_params: Optional[GridParams] = None,
                            return_angle: bool = False):
    """tan δ_l for the radial Schrödinger equation (ħ = m = 1).

    The grid step is halved until successive values differ by less than
    ``grid_params.tol`` (relative to max(1, |tan δ|)).
    """
    if not energy > 0:
        raise DomainError("scattering energy must be positive")
    gp = grid_params or GridParams()
    if model.is_free:
        return (0.0, 0.0) if return_angle else 0.0
    k = math.sqrt(2.0 * energy)
    r1, r2 = _match_radii(model, k, gp)
    h = gp.h
    if h is None:
        h = min(0.02, 0.05 / k, 0.02 / math.sqrt(abs(model.V0) + 1e-300))
    if model.kind == SQUARE_WELL:
        h = model.range_ / math.ceil(model.range_ / h)
    prev = None
    for _ in range(gp.max_refine + 1):
        i1, i2 = int(round(r1 / h)), int(round(r2 / h))
        r, u = _numerov(model, l, energy, h, r2 + 2 * h)
        A, B = _match(l, k, r[i1], u[i1], r[i2], u[i2])
        if prev is not None:
            tan_p, tan_c = prev[1] / prev[0], B / A
            if abs(tan_c - tan_p) <= gp.tol * max(1.0, abs(tan_c)):
                tan = (16.0 * tan_c - tan_p) / 15.0 if math.isfinite(tan_c) else tan_c
                if return_angle:
                    return tan, _fold(math.atan2(B, A))
                return tan
        prev = (A, B)
        h *= 0.5
    raise NumericalError("Numerov grid refinement did not converge")


def _fold(delta: float) -> float:
    if delta > 0.5 * math.pi:
        delta -= math.pi
    elif delta <= -0.5 * math.pi:
        delta += math.pi
    return delta


def _dirac_rhs(model, kappa, E, c2, c):
    def rhs(r, y):
        F, G = y
        V = evaluate(model, r) if r > 0 else model.value_at_origin()
        return [-(kappa / r) * F + (E + c2 - V) / c * G,
                (kappa / r) * G + (c2 - E + V) / c * F]
    return rhs


def _dirac_once(model, kappa, l, E, c, mass, r0, r1, r2, rtol):
    c2 = mass * c * c
    V0 = model.value_at_origin()
    if kappa < 0:
        F0 = r0 ** (l + 1)
        G0 = (V0 - (E - c2)) / (c * (2 * l + 3)) * r0 ** (l + 2)
    else:
        G0 = r0 ** kappa
        F0 = (E + c2 - V0) / (c * (2 * kappa + 1)) * r0 ** (kappa + 1)
    edges = [r0] + [b for b in model.breakpoints() if r0 < b < r1] + [r1, r2]
    y = np.array([F0, G0])
    out = {}
    rhs = _dirac_rhs(model, kappa, E, c2, c)
    for a, b in zip(edges[:-1], edges[1:]):
        sol = solve_ivp(rhs, (a, b), y, method="DOP853", rtol=rtol, atol=1e-30 + 1e-14 * rtol * np.max(np.abs(y)))
        if sol.status != 0:
            raise NumericalError(f"Dirac integration failed: {sol.message}")
        y = sol.y[:, -1]
        out[b] = y[0]
    return out[r1], out[r2]


def dirac_phase_shift(model: PotentialModel, kappa: int, kin, grid_params: Optional[GridParams] = None,
                      return_angle: bool = False):
    """tan δ̃ for the radial Dirac equation with a scalar potential in both diagonals.

    ``kin`` is a :class:`~jmatrix.rel_solver.Kinematics` (or any object with
    ``energy``, ``c``, ``mass`` and ``ktilde``).
    """
    from .basis import l_of_kappa

    gp = grid_params or GridParams()
    if not kin.energy > 0:
        raise DomainError("scattering energy must be positive")
    if model.is_free:
        return (0.0, 0.0) if return_angle else 0.0
    l = l_of_kappa(kappa)
    kt = kin.ktilde
    E = kin.energy + kin.mass * kin.c ** 2
    r1, r2 = _match_radii(model, kt, gp)
    vals = []
    for rtol in (gp.rtol, gp.rtol / 10.0):
        u1, u2 = _dirac_once(model, kappa, l, E, kin.c, kin.mass, gp.r0, r1, r2, rtol)
        vals.append(_match(l, kt, r1, u1, r2, u2))
    (A0, B0), (A, B) = vals
    t0, t = B0 / A0, B / A
    if abs(t - t0) > gp.tol * max(1.0, abs(t)):
        raise NumericalError(f"Dirac integration not converged ({abs(t - t0):.1e})")
    if return_angle:
        return t, _fold(math.atan2(B, A))
    return t


def squarewell_tan_delta_analytic(V0: float, a: float, l: int = 0, energy: float = 1.0) -> float:
    """s-wave closed form, ``K = sqrt(k² - 2V0)`` inside the well."""
    if l != 0:
        raise DomainError("closed form implemented for l = 0 only")
    if not energy > 0:
        raise DomainError("scattering energy must be positive")
    k = math.sqrt(2.0 * energy)
    K2 = k * k - 2.0 * V0
    if K2 <= 0:
        raise DomainError("energy below the barrier top: K² ≤ 0")
    K = math.sqrt(K2)
    ka, Ka = k * a, K * a
    num = k * math.cos(ka) * math.sin(Ka) - K * math.sin(ka) * math.cos(Ka)
    den = k * math.sin(ka) * math.sin(Ka) + K * math.cos(ka) * math.cos(Ka)
    return num / den
