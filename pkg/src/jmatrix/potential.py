"""Short-range model potentials and their basis matrix elements."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .basis import BasisSpec, phi_table, psi_table, support_radius
from .errors import ConfigError, DomainError
from .quadrature import adaptive_matrix_integral

SQUARE_WELL = "square_well"
EXPONENTIAL = "exponential"
GAUSSIAN_WELL = "gaussian"
POTENTIAL_KINDS = (SQUARE_WELL, EXPONENTIAL, GAUSSIAN_WELL)
_NEGLIGIBLE = 1e-16

_ALIASES = {
    "squarewell": SQUARE_WELL, "square_well": SQUARE_WELL, "square": SQUARE_WELL,
    "exponential": EXPONENTIAL, "exp": EXPONENTIAL,
    "gaussian": GAUSSIAN_WELL, "gauss": GAUSSIAN_WELL,
}
_PARAMS = {
    SQUARE_WELL: ("V0", "a"),
    EXPONENTIAL: ("V0", "mu"),
    GAUSSIAN_WELL: ("V0", "w"),
}


@dataclass(frozen=True)
class PotentialModel:
    """A local potential that vanishes faster than ``1/r²``.

    * square well: ``V = V0`` for ``r < a``, 0 beyond
    * exponential: ``V = V0 exp(-mu r)``
    * Gaussian: ``V = V0 exp(-(r/w)²)``

    ``V0 = 0`` gives the free problem for every kind.
    """

    kind: str
    V0: float
    range_: float

    def __post_init__(self):
        kind = _ALIASES.get(str(self.kind).lower().replace("-", "_"))
        if kind is None:
            raise ConfigError(f"potential kind {self.kind!r} is not an admissible short-range model")
        object.__setattr__(self, "kind", kind)
        if not np.isfinite(self.V0):
            raise ConfigError("V0 must be finite")
        if not (self.range_ > 0 and np.isfinite(self.range_)):
            raise ConfigError(f"{_PARAMS[kind][1]} must be positive")

    @classmethod
    def square_well(cls, V0: float, a: float) -> "PotentialModel":
        return cls(SQUARE_WELL, V0, a)

    @classmethod
    def exponential(cls, V0: float, mu: float) -> "PotentialModel":
        return cls(EXPONENTIAL, V0, mu)

    @classmethod
    def gaussian(cls, V0: float, w: float) -> "PotentialModel":
        return cls(GAUSSIAN_WELL, V0, w)

    @classmethod
    def free(cls) -> "PotentialModel":
        return cls(SQUARE_WELL, 0.0, 1.0)

    @classmethod
    def from_params(cls, kind: str, params: Dict[str, float]) -> "PotentialModel":
        key = _ALIASES.get(str(kind).lower().replace("-", "_"))
        if key is None:
            raise ConfigError(f"potential kind {kind!r} is not an admissible short-range model")
        names = _PARAMS[key]
        missing = [n for n in names if n not in params]
        if missing:
            raise ConfigError(f"potential.params missing {missing}")
        extra = set(params) - set(names)
        if extra:
            raise ConfigError(f"potential.params has unknown keys {sorted(extra)}")
        return cls(key, float(params[names[0]]), float(params[names[1]]))

    @property
    def params(self) -> Dict[str, float]:
        a, b = _PARAMS[self.kind]
        return {a: self.V0, b: self.range_}

    @property
    def is_free(self) -> bool:
        return self.V0 == 0.0

    def value_at_origin(self) -> float:
        return self.V0

    def breakpoints(self):
        """Interior discontinuities of V."""
        return [self.range_] if self.kind == SQUARE_WELL else []

    def cutoff(self) -> float:
        """Radius beyond which ``|V| < 1e-16 |V0|`` (exactly 0 for the square well)."""
        if self.kind == SQUARE_WELL:
            return self.range_
        if self.kind == EXPONENTIAL:
            return -math.log(_NEGLIGIBLE) / self.range_
        return self.range_ * math.sqrt(-math.log(_NEGLIGIBLE))

    def __call__(self, r):
        return evaluate(self, r)


def evaluate(model: PotentialModel, r):
    """V(r) in energy units."""
    rr = np.asarray(r, dtype=float)
    if np.any(rr <= 0):
        raise DomainError("potential is evaluated at r > 0")
    if model.kind == SQUARE_WELL:
        out = np.where(rr < model.range_, model.V0, 0.0)
    elif model.kind == EXPONENTIAL:
        out = model.V0 * np.exp(-model.range_ * rr)
    else:
        out = model.V0 * np.exp(-(rr / model.range_) ** 2)
    return float(out) if np.ndim(r) == 0 else out


@dataclass(frozen=True)
class PotentialBlocks:
    """``v_phi = <phi_m|V|phi_n>`` and ``v_psi = <psi_m|V|psi_n>``, m, n < N."""

    v_phi: np.ndarray
    v_psi: np.ndarray

    def __post_init__(self):
        for a in (self.v_phi, self.v_psi):
            a.setflags(write=False)


def integration_radius(model: PotentialModel, spec: BasisSpec, nmax: int) -> float:
    """Upper limit where either the basis weight or the potential is negligible."""
    return min(model.cutoff(), support_radius(spec, nmax))


def potential_blocks(model: PotentialModel, spec: BasisSpec, rtol: float = 1e-10,
                     size: Optional[int] = None, with_psi: bool = True) -> PotentialBlocks:
    """Matrix elements of V by adaptive Gauss-Legendre panels.

    Panels are split at the square-well edge so the integrand is smooth on
    every panel.
    """
    n = spec.n_max if size is None else size
    if model.is_free:
        z = np.zeros((n, n))
        return PotentialBlocks(z, z.copy())
    R = integration_radius(model, spec, n - 1)
    points = [0.0] + [b for b in model.breakpoints() if b < R] + [R]
    if model.kind == SQUARE_WELL:
        points = [0.0, R]   # the well edge is the upper limit itself

    def integrand(nodes, w):
        vw = evaluate(model, nodes) * w
        ph = phi_table(spec, nodes, n - 1)
        out = [(ph * vw) @ ph.T]
        if with_psi:
            ps = psi_table(spec, nodes, n - 1)
            out.append((ps * vw) @ ps.T)
        return np.stack(out)

    res = adaptive_matrix_integral(integrand, points, rtol=rtol)
    vphi = 0.5 * (res[0] + res[0].T)
    vpsi = 0.5 * (res[1] + res[1].T) if with_psi else np.zeros_like(vphi)
    return PotentialBlocks(vphi, vpsi)
