import math

import numpy as np
import pytest
from scipy import integrate

from jmatrix.basis import GAUSSIAN, LAGUERRE, BasisSpec, phi_table, psi_table
from jmatrix.errors import ConfigError, DomainError
from jmatrix.potential import PotentialModel, evaluate, potential_blocks


def test_evaluate_examples():
    sw = PotentialModel.square_well(-1.0, 2.0)
    assert evaluate(sw, 1.0) == -1.0 and evaluate(sw, 3.0) == 0.0
    ex = PotentialModel.exponential(-1.0, 1.0)
    assert evaluate(ex, 1e-14) == pytest.approx(-1.0, abs=1e-13)
    assert ex.value_at_origin() == -1.0
    g = PotentialModel.gaussian(-1.0, 1.0)
    assert evaluate(g, 1.0) == pytest.approx(-math.exp(-1.0), rel=1e-15)
    assert np.allclose(g(np.array([1.0, 2.0])), [-math.exp(-1), -math.exp(-4)])


def test_model_validation():
    with pytest.raises(ConfigError):
        PotentialModel("coulomb", -1.0, 1.0)
    with pytest.raises(ConfigError):
        PotentialModel.square_well(-1.0, 0.0)
    with pytest.raises(ConfigError):
        PotentialModel.from_params("exponential", {"V0": -1.0})
    with pytest.raises(ConfigError):
        PotentialModel.from_params("exponential", {"V0": -1.0, "mu": 1.0, "a": 2.0})
    m = PotentialModel.from_params("gaussian", {"V0": -2.0, "w": 0.5})
    assert m.params == {"V0": -2.0, "w": 0.5}
    with pytest.raises(DomainError):
        evaluate(m, 0.0)


def test_free_blocks_are_zero(kind):
    sp = BasisSpec.from_l(kind, 1, 1.0, 12)
    vb = potential_blocks(PotentialModel.free(), sp)
    assert not np.any(vb.v_phi) and not np.any(vb.v_psi)


@pytest.mark.parametrize("model", [PotentialModel.square_well(-1.0, 1.0), PotentialModel.exponential(-2.0, 1.0),
                                   PotentialModel.gaussian(-1.5, 0.7)])
def test_blocks_symmetric_and_attractive(kind, model):
    sp = BasisSpec(kind, -2, 1.4, 15)
    vb = potential_blocks(model, sp)
    for m in (vb.v_phi, vb.v_psi):
        assert np.max(np.abs(m - m.T)) == 0.0
        assert np.all(np.diag(m) < 0)


def test_square_well_vs_simpson():
    """10k-interval composite Simpson on [0, a] (the integrand is smooth there)."""
    sp = BasisSpec.from_l(LAGUERRE, 0, 1.0, 10)
    model = PotentialModel.square_well(-1.0, 1.0)
    vb = potential_blocks(model, sp)
    r = np.linspace(0.0, 1.0, 10001)
    r[0] = 1e-300
    ph = phi_table(sp, r, 9)
    ps = psi_table(sp, r[1:], 9)
    ref = np.array([[integrate.simpson(-ph[m] * ph[n], x=r) for n in range(10)] for m in range(10)])
    assert np.max(np.abs(vb.v_phi - ref)) <= 1e-9 * np.max(np.abs(ref))
    # ψ_n is finite at the origin for κ=-1 (ψ_0 ∝ r)
    ref_psi = np.array([[integrate.simpson(-ps[m] * ps[n], x=r[1:]) for n in range(10)] for m in range(10)])
    # first node dropped: compare at the quadrature-error level of the shortened rule
    assert np.max(np.abs(vb.v_psi - ref_psi)) <= 1e-6 * np.max(np.abs(ref_psi))


@pytest.mark.parametrize("model", [PotentialModel.exponential(-2.0, 1.0), PotentialModel.gaussian(-1.0, 1.3)])
def test_smooth_blocks_vs_quad(kind, model):
    sp = BasisSpec.from_l(kind, 1, 1.2, 8)
    vb = potential_blocks(model, sp)

    def f(r):
        r = max(r, 1e-300)
        ph = phi_table(sp, r, 7)[:, 0]
        return model.V0 * math.exp(-model.range_ * r if model.kind == "exponential"
                                   else -(r / model.range_) ** 2) * np.outer(ph, ph)

    ref = integrate.quad_vec(f, 0.0, 80.0, epsabs=1e-15, epsrel=1e-13, limit=4000)[0]
    assert np.max(np.abs(vb.v_phi - ref)) <= 1e-9 * np.max(np.abs(ref))


def test_tighter_quadrature_changes_nothing(kind):
    sp = BasisSpec.from_l(kind, 0, 1.0, 20)
    model = PotentialModel.exponential(-2.0, 1.0)
    a = potential_blocks(model, sp, rtol=1e-10)
    b = potential_blocks(model, sp, rtol=1e-13)
    for x, y in ((a.v_phi, b.v_phi), (a.v_psi, b.v_psi)):
        assert np.max(np.abs(x - y)) <= 1e-9 * np.max(np.abs(y))
