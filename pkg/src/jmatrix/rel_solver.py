"""Relativistic J-matrix solver for the radial Dirac equation.

Spinor basis: large components ``phi_n``, small components
``psi_n = (κ/r + d/dr) phi_n`` (kinetic balance). With ``S_rel =
diag(<phi|phi>, <psi|psi>)`` the free relativistic Jacobi matrix is
``ℐ = M - (E/c) S_rel`` where

    M = [[ m c <phi|phi> ,   <psi|psi>      ],
         [ <psi|psi>     , -m c <psi|psi>   ]]

and a scalar potential adds ``<phi|V|phi>/c`` and ``<psi|V|psi>/c`` to the
diagonal blocks (ħ = 1). From the 2N×2N Harris problem the Green elements

    𝒢^{ss'}_{N-1,N-1}(E) = Σ_i c Γ^s_{N-1,i} Γ^{s'}_{N-1,i} / (E_i - E)

give the tangent with the non-relativistic ``J_{N,N-1}`` and free
coefficients evaluated at the relativistic wave number k̃:

    t̃_N = -(s_{N-1} + (2ε/k̃) 𝒢^{++} J s_N) / (c_{N-1} + (2ε/k̃) 𝒢^{++} J c_N).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import linalg as sla

from .basis import BasisSpec, overlaps, phi_table, psi_table
from .errors import ConsistencyError, DomainError, MatrixError, PoleError
from .freewave import WaveCoefficients, sine_cosine_coefficients
from .linalg import refine_eigenpairs, sym_generalized_eigen
from .nonrel_solver import (DEFAULT_POLE_GUARD, HarrisSpectrum, NonRelSolver, _spectrum, leading_blocks,
                            angle_form)
from .potential import PotentialModel, potential_blocks
from .tuning import ScaleChoice, tune_scale

DEFAULT_C = 137.035999
#: gap above which :func:`rel_tan_delta` raises
DEFAULT_CONSISTENCY_TOL = 1e-5


@dataclass(frozen=True)
class Kinematics:
    """Energy bookkeeping for a Dirac particle of mass ``mass``.

    ``energy`` is the kinetic energy ℰ; ``total`` is ``E = ℰ + m c²``.
    """

    energy: float
    c: float = DEFAULT_C
    mass: float = 1.0

    @property
    def rest(self) -> float:
        return self.mass * self.c ** 2

    @property
    def total(self) -> float:
        return self.energy + self.rest

    @property
    def rest_energy_offset(self) -> float:
        return self.total

    @property
    def eps(self) -> float:
        # sqrt((E - mc²)/(E + mc²)) without the cancellation
        return math.sqrt(self.energy / (self.energy + 2.0 * self.rest))

    @property
    def ktilde(self) -> float:
        return math.sqrt(self.energy * (self.energy + 2.0 * self.rest)) / self.c


def kinematics(mass: float, c: float, nonrel_energy: float) -> Kinematics:
    """Validated :class:`Kinematics`."""
    if not (mass > 0 and c > 0):
        raise DomainError("mass and c must be positive")
    if not nonrel_energy > 0:
        raise DomainError("relativistic scattering requires ℰ > 0")
    return Kinematics(float(nonrel_energy), float(c), float(mass))


@dataclass(frozen=True)
class RelJacobiBlocks:
    """Energy-independent parts of the relativistic Jacobi matrix.

    ``size`` spinor indices (0..size-1) are stored; ``m_matrix`` and ``s_rel``
    are 2·size square, ordered (large indices, then small indices).
    """

    s_phi: np.ndarray
    s_psi: np.ndarray
    c: float
    mass: float

    @property
    def size(self) -> int:
        return self.s_phi.shape[0]

    @property
    def m_matrix(self) -> np.ndarray:
        mc = self.mass * self.c
        return np.block([[mc * self.s_phi, self.s_psi], [self.s_psi, -mc * self.s_psi]])

    @property
    def s_rel(self) -> np.ndarray:
        z = np.zeros_like(self.s_phi)
        return np.block([[self.s_phi, z], [z, self.s_psi]])

    def full(self, total_energy: float) -> np.ndarray:
        """ℐ(E) = M - (E/c) S_rel."""
        return self.m_matrix - total_energy / self.c * self.s_rel

    def block(self, m: int, n: int, kin: Kinematics) -> np.ndarray:
        """2×2 block ``[[-k̃ε S, T], [T, -(k̃/ε) T]]`` of ℐ at (m, n)."""
        ke, kre = kin.ktilde * kin.eps, kin.ktilde / kin.eps
        S, T = self.s_phi[m, n], self.s_psi[m, n]
        return np.array([[-ke * S, T], [T, -kre * T]])


def rel_jacobi_blocks(spec: BasisSpec, c: float = DEFAULT_C, mass: float = 1.0,
                      size: Optional[int] = None) -> RelJacobiBlocks:
    ov = overlaps(spec, size)
    return RelJacobiBlocks(ov.s_phi, ov.s_psi, float(c), float(mass))


def assemble_rel_system(spec: BasisSpec, model: PotentialModel, kin: Kinematics, vblocks=None):
    """Return ``(M + V, S_rel)``, both 2N×2N, for the truncated problem."""
    N = spec.n_max
    blocks = rel_jacobi_blocks(spec, kin.c, kin.mass, N)
    if vblocks is None:
        vblocks = potential_blocks(model, spec, with_psi=True)
    mv = blocks.m_matrix.copy()
    mv[:N, :N] += vblocks.v_phi / kin.c
    mv[N:, N:] += vblocks.v_psi / kin.c
    return mv, blocks.s_rel


def rel_harris_spectrum(m_plus_v: np.ndarray, s_rel: np.ndarray, c: float) -> HarrisSpectrum:
    """Generalized eigenpairs with eigenvalues reported as total energies ``c·e_i``."""
    h = _spectrum(m_plus_v, s_rel)
    return HarrisSpectrum(c * h.energies, h.gamma, h.dimension, h.residual)


def scaled_pencil(s_phi: np.ndarray, s_psi: np.ndarray, vblocks, c: float, mass: float):
    """Rest-shifted pencil with the small component scaled by c.

    With ``x = (a, b/c)`` the problem ``(M + V - mc S_rel) x = (ℰ/c) S_rel x``
    becomes ``A y = ℰ B y`` where

        A = [[V_phi, T], [T, -2m T + V_psi/c²]],   B = diag(S, T/c²),

    whose entries are all of kinetic scale, so no mc² cancellation occurs.
    """
    n = s_phi.shape[0]
    a = np.block([[vblocks.v_phi, s_psi], [s_psi, -2.0 * mass * s_psi + vblocks.v_psi / c ** 2]])
    z = np.zeros((n, n))
    b = np.block([[s_phi, z], [z, s_psi / c ** 2]])
    return a, b


def _refined_spectrum(a: np.ndarray, b: np.ndarray, n: int, c: float):
    """Kinetic levels ℰ_i and eigenvectors of the scaled pencil.

    The dense solve resolves the upper branch only to ``eps·2mc²`` (the lower
    branch sits near -2mc²); inverse iteration with a shift one energy unit
    below the upper branch plus Rayleigh-Ritz restores relative accuracy.
    """
    res = sym_generalized_eigen(a, b)
    upper = np.arange(n, 2 * n)
    shift = res.eigenvalues[n] - 1.0
    res = refine_eigenpairs(a, b, res, upper, shift)
    resid = float(np.max(res.residuals(a, b)))
    return res.eigenvalues, res.eigenvectors, resid


@dataclass(frozen=True)
class RelPhaseShiftResult:
    """Relativistic tangent and diagnostics.

    ``tan_delta_alt`` is the tangent obtained from 𝒢^{-+} instead of 𝒢^{++};
    ``consistency_gap`` is ``|𝒢^{-+} - (ε/k̃)𝒢^{++}| / |(ε/k̃)𝒢^{++}|``.
    """

    energy: float
    ktilde: float
    tan_delta_tilde: float
    delta: float
    g_pp: float
    g_mp: float
    consistency_gap: float
    tan_delta_alt: float
    pole_proximity: float
    residual: float

    @property
    def tan_delta(self) -> float:
        return self.tan_delta_tilde


class RelSolver:
    """Energy-independent set-up for (basis, potential, c, mass).

    One 2N-dimensional eigensolve serves every energy.
    """

    def __init__(self, spec: BasisSpec, model: PotentialModel, c: float = DEFAULT_C,
                 mass: float = 1.0, pole_guard: float = DEFAULT_POLE_GUARD,
                 consistency_tol: Optional[float] = DEFAULT_CONSISTENCY_TOL,
                 check_coefficients: bool = True, vblocks=None):
        if not (c > 0 and mass > 0):
            raise DomainError("mass and c must be positive")
        self.spec, self.model = spec, model
        self.c, self.mass = float(c), float(mass)
        self.pole_guard = pole_guard
        self.consistency_tol = consistency_tol
        self.check_coefficients = check_coefficients
        N = spec.n_max
        self.overlaps = overlaps(spec, N + 1)
        self.vblocks = potential_blocks(model, spec, with_psi=True) if vblocks is None else vblocks
        ref = Kinematics(1.0, self.c, self.mass)
        self.m_plus_v, self.s_rel = assemble_rel_system(spec, model, ref, self.vblocks)
        S, T = self.overlaps.s_phi[:N, :N], self.overlaps.s_psi[:N, :N]
        self._a, self._b = scaled_pencil(S, T, self.vblocks, self.c, self.mass)
        levels, y, resid = _refined_spectrum(self._a, self._b, N, self.c)
        # back to unscaled spinor coefficients: small components divided by c
        gamma = y.copy()
        gamma[N:] /= self.c
        self.kinetic_levels = levels
        self.kinetic_levels.setflags(write=False)
        self.spectrum = HarrisSpectrum(levels + self.mass * self.c ** 2, gamma, 2 * N, resid)

    def kinematics(self, energy: float) -> Kinematics:
        return kinematics(self.mass, self.c, energy)

    def _denominators(self, energy: float) -> np.ndarray:
        """``E_i - E`` from kinetic energies, with the pole guard applied."""
        diff = self.kinetic_levels - energy
        i = int(np.argmin(np.abs(diff)))
        if abs(diff[i]) < self.pole_guard:
            raise PoleError(f"energy {energy} within {abs(diff[i]):.2e} of Harris level "
                            f"{self.spectrum.energies[i]}", nearest=float(self.spectrum.energies[i]),
                            gap=float(abs(diff[i])))
        return diff

    def green(self, energy: float, s: str = "+", s2: str = "+") -> float:
        """𝒢^{s s2}_{N-1,N-1} at kinetic energy ℰ (total E = ℰ + mc²)."""
        N = self.spec.n_max
        g = self.spectrum.gamma
        row = N - 1 if s == "+" else 2 * N - 1
        col = N - 1 if s2 == "+" else 2 * N - 1
        return float(self.c * np.sum(g[row] * g[col] / self._denominators(energy)))

    def green_matrix(self, energy: float) -> np.ndarray:
        """Full 2N×2N 𝒢 at kinetic energy ℰ from the spectral sum."""
        g = self.spectrum.gamma
        return self.c * (g / self._denominators(energy)[None, :]) @ g.T

    def boundary_j(self, k: float) -> float:
        N = self.spec.n_max
        return float(0.5 * self.overlaps.s_psi[N, N - 1] - 0.5 * k * k * self.overlaps.s_phi[N, N - 1])

    def coefficients(self, kt: float, n_extra: int = 0) -> WaveCoefficients:
        return sine_cosine_coefficients(self.spec, kt, self.spec.n_max + n_extra,
                                        check=self.check_coefficients)

    def tan_delta(self, energy: float, coeffs: Optional[WaveCoefficients] = None) -> RelPhaseShiftResult:
        N = self.spec.n_max
        kin = self.kinematics(energy)
        kt, eps, E = kin.ktilde, kin.eps, kin.total
        wc = self.coefficients(kt) if coeffs is None else coeffs
        gpp = self.green(energy, "+", "+")
        gmp = self.green(energy, "-", "+")
        jb = self.boundary_j(kt)
        geff = 2.0 * eps / kt * gpp
        num = -(wc.s[N - 1] + geff * jb * wc.s[N])
        den = wc.c[N - 1] + geff * jb * wc.c[N]
        tan, delta = angle_form(num, den)
        g_alt = 2.0 * gmp
        tan_alt, _ = angle_form(-(wc.s[N - 1] + g_alt * jb * wc.s[N]), wc.c[N - 1] + g_alt * jb * wc.c[N])
        ref = eps / kt * gpp
        if ref != 0:
            gap = abs(gmp - ref) / abs(ref)
        else:
            gap = 0.0 if gmp == 0 else math.inf
        prox = float(np.min(np.abs(self.kinetic_levels - energy)))
        res = RelPhaseShiftResult(float(energy), kt, tan, delta, gpp, gmp, float(gap), tan_alt,
                                  prox, self.spectrum.residual)
        if self.consistency_tol is not None and gap > self.consistency_tol:
            err = ConsistencyError(
                f"G-+ and (eps/k~)G++ differ by {gap:.2e} (relative) at energy {energy}")
            err.result = res
            raise err
        return res

    def interior_coefficients(self, energy: float, result: Optional[RelPhaseShiftResult] = None,
                              coeffs: Optional[WaveCoefficients] = None):
        """Solve the 2N interior rows; tail coefficients ``(s_n + t̃ c_n)(1, ε/k̃)``."""
        N = self.spec.n_max
        kin = self.kinematics(energy)
        kt, eps, E = kin.ktilde, kin.eps, kin.total
        wc = self.coefficients(kt) if coeffs is None else coeffs
        res = self.tan_delta(energy, wc) if result is None else result
        t = res.tan_delta_tilde
        xN = wc.s[N] + t * wc.c[N]
        S, T = self.overlaps.s_phi, self.overlaps.s_psi
        rhs = np.zeros(2 * N)
        # couplings of rows N-1 (large and small) to the tail element N
        rhs[N - 1] = -(-kt * eps * S[N - 1, N] * xN + T[N - 1, N] * eps / kt * xN)
        rhs[2 * N - 1] = -(T[N - 1, N] * xN - kt / eps * T[N - 1, N] * eps / kt * xN)
        # scaled system (A - ℰB) y = c·D·rhs with d = D y, D = diag(1, 1/c)
        rhs[N:] /= self.c
        try:
            y = sla.solve(self._a - energy * self._b, self.c * rhs, assume_a="sym")
        except (sla.LinAlgError, ValueError) as exc:
            raise MatrixError(f"interior spinor system singular: {exc}") from exc
        y[N:] /= self.c
        return y, wc, res

    def reconstruct(self, energy: float, r_grid, n_tail: int = 1000):
        """Large and small radial components ``(F, G)`` on ``r_grid``."""
        N = self.spec.n_max
        n_tail = max(n_tail, N + 1)
        kin = self.kinematics(energy)
        wc = sine_cosine_coefficients(self.spec, kin.ktilde, n_tail, check=self.check_coefficients)
        res = self.tan_delta(energy, wc)
        d, _, _ = self.interior_coefficients(energy, res, wc)
        tail = wc.s[N:] + res.tan_delta_tilde * wc.c[N:]
        big = np.concatenate([d[:N], tail])
        small = np.concatenate([d[N:], kin.eps / kin.ktilde * tail])
        F = big @ phi_table(self.spec, r_grid, n_tail)
        G = small @ psi_table(self.spec, r_grid, n_tail)
        return F, G


def rel_tan_delta(spec: BasisSpec, model: PotentialModel, kin: Kinematics,
                  pole_guard: float = DEFAULT_POLE_GUARD,
                  consistency_tol: Optional[float] = DEFAULT_CONSISTENCY_TOL) -> RelPhaseShiftResult:
    """One-shot relativistic tangent at the kinetic energy ``kin.energy``."""
    solver = RelSolver(spec, model, kin.c, kin.mass, pole_guard, consistency_tol)
    return solver.tan_delta(kin.energy)


def reconstruct_spinor(spec: BasisSpec, model: PotentialModel, kin: Kinematics, r_grid,
                       n_tail: int = 1000, consistency_tol: Optional[float] = None):
    return RelSolver(spec, model, kin.c, kin.mass,
                     consistency_tol=consistency_tol).reconstruct(kin.energy, r_grid, n_tail)


@dataclass(frozen=True)
class LimitRow:
    c: float
    tan_rel: float
    tan_nonrel: float
    gap: float
    green_ratio_gap: float


def nonrel_limit_scan(spec: BasisSpec, model: PotentialModel, energy: float,
                      c_values: Sequence[float], mass: float = 1.0,
                      consistency_tol: Optional[float] = None) -> List[LimitRow]:
    """Rows ``(c, t̃_N, t_N, |t̃_N - t_N|, |(2ε/k̃)𝒢^{++} - g|/|g|)``.

    Potential blocks and the non-relativistic tangent are computed once.
    """
    c_values = [float(c) for c in c_values]
    if any(c <= 0 for c in c_values) or any(b <= a for a, b in zip(c_values, c_values[1:])):
        raise DomainError("c_values must be positive and ascending")
    nr = NonRelSolver(spec, model)
    t_nr = nr.tan_delta(energy)
    vb = potential_blocks(model, spec, with_psi=True)
    rows = []
    for c in c_values:
        rs = RelSolver(spec, model, c, mass, consistency_tol=consistency_tol, vblocks=vb)
        r = rs.tan_delta(energy)
        kin = rs.kinematics(energy)
        geff = 2.0 * kin.eps / kin.ktilde * r.g_pp
        g = t_nr.green
        ratio = abs(geff - g) / abs(g) if g != 0 else abs(geff)
        rows.append(LimitRow(c, r.tan_delta_tilde, t_nr.tan_delta,
                             abs(r.tan_delta_tilde - t_nr.tan_delta), ratio))
    return rows


def tune_rel_scale(spec: BasisSpec, model: PotentialModel, kin: Kinematics, scales=None,
                   pole_guard: float = DEFAULT_POLE_GUARD) -> ScaleChoice:
    """λ for ``spec.n_max`` by the stationarity rule of :mod:`jmatrix.tuning`.

    The consistency check is off during the scan; apply it to the final run.
    """
    N = spec.n_max
    if N < 3:
        raise DomainError("scale tuning needs n_max >= 3")

    def evaluate(scale):
        sp = spec.with_(scale=scale)
        vb = potential_blocks(model, sp, with_psi=True)
        t = RelSolver(sp, model, kin.c, kin.mass, pole_guard, None, False, vb)
        t1 = RelSolver(sp.with_(n_max=N - 1), model, kin.c, kin.mass, pole_guard, None, False,
                       leading_blocks(vb, N - 1))
        return t.tan_delta(kin.energy).tan_delta_tilde, t1.tan_delta(kin.energy).tan_delta_tilde

    return tune_scale(evaluate, scales)
