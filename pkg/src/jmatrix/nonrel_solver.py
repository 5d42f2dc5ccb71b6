"""Non-relativistic J-matrix solver.

The potential is replaced by its N×N projection. The Harris problem
``(T + V) Γ = ℰ S Γ`` (``T = ½<psi|psi>``, ``S = <phi|phi>``, ``ΓᵀSΓ = I``)
is solved once; for each energy the Green element

    g(ℰ) = Σ_i Γ²_{N-1,i} / (ℰ_i - ℰ)

enters the tangent

    tan δ_N = -(s_{N-1} + g J_{N,N-1} s_N) / (c_{N-1} + g J_{N,N-1} c_N).

Units: ħ = m = 1, ``k = sqrt(2ℰ)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg as sla

from .basis import BasisSpec, overlaps, phi_table
from .errors import DomainError, MatrixError, PoleError
from .freewave import WaveCoefficients, jacobi_matrix, sine_cosine_coefficients
from .linalg import sym_generalized_eigen
from .potential import PotentialBlocks, PotentialModel, potential_blocks
from .tuning import ScaleChoice, tune_scale

DEFAULT_POLE_GUARD = 1e-10


@dataclass(frozen=True)
class HarrisSpectrum:
    """Eigenpairs of the truncated Hamiltonian, shared by all energies."""

    energies: np.ndarray
    gamma: np.ndarray
    dimension: int
    residual: float = 0.0

    def __post_init__(self):
        self.energies.setflags(write=False)
        self.gamma.setflags(write=False)


@dataclass(frozen=True)
class PhaseShiftResult:
    """Eq.-14-type tangent in angle form plus diagnostics."""

    energy: float
    k: float
    tan_delta: float
    delta: float
    pole_proximity: float
    residual: float
    green: float = float("nan")
    numerator: float = float("nan")
    denominator: float = float("nan")


def angle_form(numerator: float, denominator: float):
    """``(tan δ, δ)`` with δ folded into (-π/2, π/2] via atan2."""
    delta = math.atan2(numerator, denominator)
    if delta > 0.5 * math.pi:
        delta -= math.pi
    elif delta <= -0.5 * math.pi:
        delta += math.pi
    tan = numerator / denominator if denominator != 0 else math.copysign(math.inf, numerator)
    return tan, delta


def wave_number(energy: float, mass: float = 1.0) -> float:
    if not energy > 0:
        raise DomainError("scattering energy must be positive")
    return math.sqrt(2.0 * mass * energy)


def _spectrum(a: np.ndarray, b: np.ndarray) -> HarrisSpectrum:
    res = sym_generalized_eigen(a, b)
    resid = float(np.max(res.residuals(a, b)))
    return HarrisSpectrum(np.array(res.eigenvalues), np.array(res.eigenvectors), a.shape[0], resid)


def harris_spectrum(spec: BasisSpec, model: PotentialModel, vblocks=None) -> HarrisSpectrum:
    """Harris eigenpairs of ``T + V`` against ``<phi|phi>`` in the N-dimensional space."""
    N = spec.n_max
    ov = overlaps(spec, N)
    if vblocks is None:
        vblocks = potential_blocks(model, spec, with_psi=False)
    a = 0.5 * ov.s_psi + vblocks.v_phi
    return _spectrum(a, ov.s_phi)


def green_element(h: HarrisSpectrum, energy: float, pole_guard: float = DEFAULT_POLE_GUARD,
                  row: Optional[int] = None, col: Optional[int] = None) -> float:
    """Spectral sum ``Σ_i Γ_{row,i} Γ_{col,i} / (ℰ_i - ℰ)`` (default row = col = N-1)."""
    row = h.dimension - 1 if row is None else row
    col = row if col is None else col
    gap = np.abs(h.energies - energy)
    i = int(np.argmin(gap))
    if gap[i] < pole_guard:
        raise PoleError(f"energy {energy} within {gap[i]:.2e} of Harris level {h.energies[i]}",
                        nearest=float(h.energies[i]), gap=float(gap[i]))
    return float(np.sum(h.gamma[row] * h.gamma[col] / (h.energies - energy)))


class NonRelSolver:
    """Energy-independent set-up for one (basis, potential) pair.

    Overlaps, potential matrix and the Harris spectrum are computed once;
    :meth:`tan_delta` is then cheap and safe to call from several threads.
    """

    def __init__(self, spec: BasisSpec, model: PotentialModel,
                 pole_guard: float = DEFAULT_POLE_GUARD, check_coefficients: bool = True,
                 vblocks=None):
        self.spec = spec
        self.model = model
        self.pole_guard = pole_guard
        self.check_coefficients = check_coefficients
        N = spec.n_max
        self.overlaps = overlaps(spec, N + 1)
        self.vblocks = potential_blocks(model, spec, with_psi=False) if vblocks is None else vblocks
        self.spectrum = harris_spectrum(spec, model, self.vblocks)

    def coefficients(self, k: float, n_extra: int = 0) -> WaveCoefficients:
        return sine_cosine_coefficients(self.spec, k, self.spec.n_max + n_extra,
                                        check=self.check_coefficients)

    def boundary_j(self, k: float) -> float:
        N = self.spec.n_max
        return float(0.5 * self.overlaps.s_psi[N, N - 1] - 0.5 * k * k * self.overlaps.s_phi[N, N - 1])

    def green(self, energy: float) -> float:
        return green_element(self.spectrum, energy, self.pole_guard)

    def tan_delta(self, energy: float, coeffs: Optional[WaveCoefficients] = None) -> PhaseShiftResult:
        N = self.spec.n_max
        k = wave_number(energy)
        wc = self.coefficients(k) if coeffs is None else coeffs
        g = self.green(energy)
        jb = self.boundary_j(k)
        num = -(wc.s[N - 1] + g * jb * wc.s[N])
        den = wc.c[N - 1] + g * jb * wc.c[N]
        tan, delta = angle_form(num, den)
        prox = float(np.min(np.abs(self.spectrum.energies - energy)))
        return PhaseShiftResult(float(energy), k, tan, delta, prox, self.spectrum.residual,
                                g, num, den)

    def interior_coefficients(self, energy: float, result: Optional[PhaseShiftResult] = None,
                              coeffs: Optional[WaveCoefficients] = None):
        """Solve the N interior rows for ``a_n`` given the tail ``s_n + t c_n``."""
        N = self.spec.n_max
        k = wave_number(energy)
        wc = self.coefficients(k) if coeffs is None else coeffs
        res = self.tan_delta(energy, wc) if result is None else result
        t = res.tan_delta
        a = 0.5 * self.overlaps.s_psi[:N, :N] + self.vblocks.v_phi - energy * self.overlaps.s_phi[:N, :N]
        rhs = np.zeros(N)
        rhs[N - 1] = -self.boundary_j(k) * (wc.s[N] + t * wc.c[N])
        try:
            lu = sla.lu_factor(a, check_finite=True)
        except (ValueError, sla.LinAlgError) as exc:
            raise MatrixError(f"interior system singular: {exc}") from exc
        if np.any(np.diag(lu[0]) == 0):
            raise MatrixError("interior system singular")
        return sla.lu_solve(lu, rhs), wc, res

    def reconstruct(self, energy: float, r_grid, n_tail: int = 1000) -> np.ndarray:
        """Radial wavefunction: interior ``a_n`` plus the free tail up to ``n_tail``."""
        N = self.spec.n_max
        n_tail = max(n_tail, N + 1)
        k = wave_number(energy)
        wc = sine_cosine_coefficients(self.spec, k, n_tail, check=self.check_coefficients)
        res = self.tan_delta(energy, wc)
        a, _, _ = self.interior_coefficients(energy, res, wc)
        x = np.concatenate([a, wc.s[N:] + res.tan_delta * wc.c[N:]])
        return x @ phi_table(self.spec, r_grid, n_tail)


def tan_delta(spec: BasisSpec, model: PotentialModel, energy: float,
              pole_guard: float = DEFAULT_POLE_GUARD) -> PhaseShiftResult:
    """One-shot tangent of the phase shift at a single energy."""
    return NonRelSolver(spec, model, pole_guard).tan_delta(energy)


def reconstruct_wavefunction(spec: BasisSpec, model: PotentialModel, energy: float,
                             r_grid, n_tail: int = 1000) -> np.ndarray:
    """Wavefunction of the truncated-potential problem on ``r_grid``."""
    return NonRelSolver(spec, model).reconstruct(energy, r_grid, n_tail)


def leading_blocks(vb: PotentialBlocks, n: int) -> PotentialBlocks:
    """Potential blocks of the first ``n`` basis functions (same λ)."""
    return PotentialBlocks(np.array(vb.v_phi[:n, :n]), np.array(vb.v_psi[:n, :n]))


def tune_nonrel_scale(spec: BasisSpec, model: PotentialModel, energy: float,
                      scales=None, pole_guard: float = DEFAULT_POLE_GUARD) -> ScaleChoice:
    """λ for ``spec.n_max`` by the stationarity rule of :mod:`jmatrix.tuning`."""
    N = spec.n_max
    if N < 3:
        raise DomainError("scale tuning needs n_max >= 3")

    def evaluate(scale):
        sp = spec.with_(scale=scale)
        vb = potential_blocks(model, sp, with_psi=False)
        t = NonRelSolver(sp, model, pole_guard, False, vb).tan_delta(energy).tan_delta
        t1 = NonRelSolver(sp.with_(n_max=N - 1), model, pole_guard, False,
                          leading_blocks(vb, N - 1)).tan_delta(energy).tan_delta
        return t, t1

    return tune_scale(evaluate, scales)
