"""Dense symmetric-definite generalized eigenproblem ``A x = e B x``.

Backed by LAPACK through :mod:`scipy.linalg`: Cholesky ``B = L Lᵀ``, a
standard symmetric solve of ``L⁻¹ A L⁻ᵀ`` and back-substitution.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import MatrixError


@dataclass(frozen=True)
class GeneralizedEigenResult:
    """Ascending eigenvalues and B-orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def residuals(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Per-column ``|A Γ_i - e_i B Γ_i|`` relative to ``‖A‖``."""
        g = self.eigenvectors
        r = a @ g - (b @ g) * self.eigenvalues[None, :]
        return np.linalg.norm(r, axis=0) / max(np.linalg.norm(a, 2), 1e-300)


def _check_symmetric(m: np.ndarray, name: str):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise MatrixError(f"{name} must be square")
    if not np.all(np.isfinite(m)):
        raise MatrixError(f"{name} has non-finite entries")
    scale = max(np.max(np.abs(m)), 1e-300)
    if np.max(np.abs(m - m.T)) > 1e-12 * scale:
        raise MatrixError(f"{name} is not symmetric")


def cholesky(b: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, raising :class:`MatrixError` if B is not SPD."""
    try:
        return sla.cholesky(b, lower=True)
    except sla.LinAlgError as exc:
        raise MatrixError(f"matrix is not positive definite: {exc}") from exc


def sym_generalized_eigen(a, b) -> GeneralizedEigenResult:
    """Full spectrum of the symmetric-definite pencil ``(A, B)``.

    Returns eigenvectors normalized to ``Γᵀ B Γ = I``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_symmetric(a, "a")
    _check_symmetric(b, "b")
    if a.shape != b.shape:
        raise MatrixError("a and b differ in shape")
    diag = np.diag(b)
    if np.any(diag <= 0):
        raise MatrixError("matrix is not positive definite: non-positive diagonal")
    # equilibrate first: basis normalizations grow like n^(2l+1)
    d = 1.0 / np.sqrt(diag)
    a_s = a * d[:, None] * d[None, :]
    b_s = b * d[:, None] * d[None, :]
    L = cholesky(b_s)
    # C = L^{-1} A L^{-T}
    tmp = sla.solve_triangular(L, a_s, lower=True)
    c = sla.solve_triangular(L, tmp.T, lower=True).T
    c = 0.5 * (c + c.T)
    w, y = sla.eigh(c)
    g = d[:, None] * sla.solve_triangular(L.T, y, lower=False)
    return GeneralizedEigenResult(w, g)


def refine_eigenpairs(a, b, res: GeneralizedEigenResult, index, shift: float,
                      steps: int = 3) -> GeneralizedEigenResult:
    """Sharpen a cluster of eigenpairs by block inverse iteration and Rayleigh-Ritz.

    Useful when the spectrum spans many orders of magnitude (the absolute
    error of a dense solve is ``eps·‖A‖``): iteration with
    ``(A - shift·B)⁻¹B`` followed by the projected pencil recovers the
    selected pairs to relative accuracy, provided ``shift`` lies closer to
    the cluster than to the rest of the spectrum.

    Parameters
    ----------
    index : array of int
        Columns of ``res`` to refine.
    shift : float
        Must not coincide with an eigenvalue.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    index = np.asarray(index, dtype=int)
    try:
        lu = sla.lu_factor(a - shift * b, check_finite=True)
    except (ValueError, sla.LinAlgError) as exc:
        raise MatrixError(f"shifted pencil singular: {exc}") from exc
    x = np.array(res.eigenvectors[:, index])
    for _ in range(steps):
        x = sla.lu_solve(lu, b @ x)
        x /= np.sqrt(np.einsum("ij,ij->j", x, b @ x))[None, :]
    ar = x.T @ a @ x
    br = x.T @ b @ x
    try:
        w, z = sla.eigh(0.5 * (ar + ar.T), 0.5 * (br + br.T))
    except sla.LinAlgError as exc:
        raise MatrixError(f"Rayleigh-Ritz step failed: {exc}") from exc
    vals = np.array(res.eigenvalues)
    vecs = np.array(res.eigenvectors)
    vals[index] = w
    vecs[:, index] = x @ z
    order = np.argsort(vals, kind="stable")
    return GeneralizedEigenResult(vals[order], vecs[:, order])
