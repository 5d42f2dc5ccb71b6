import math

import numpy as np
import pytest

from jmatrix.errors import DomainError
from jmatrix.oracle import (GridParams, _match, _numerov, dirac_phase_shift, schrodinger_phase_shift,
                            squarewell_tan_delta_analytic)
from jmatrix.potential import PotentialModel
from jmatrix.rel_solver import kinematics

SW = PotentialModel.square_well(-1.0, 1.0)
EXP = PotentialModel.exponential(-2.0, 1.0)


def hand_square_well(V0, a, E):
    k = math.sqrt(2 * E)
    K = math.sqrt(k * k - 2 * V0)
    # match u = sin(Kr) to A sin(kr) + B cos(kr) at r = a
    A = math.sin(K * a) * math.sin(k * a) + K / k * math.cos(K * a) * math.cos(k * a)
    B = math.sin(K * a) * math.cos(k * a) - K / k * math.cos(K * a) * math.sin(k * a)
    return B / A


def test_analytic_examples():
    assert squarewell_tan_delta_analytic(0.0, 1.0, 0, 0.7) == pytest.approx(0.0, abs=1e-16)
    val = squarewell_tan_delta_analytic(-1.0, 1.0, 0, 0.5)
    assert val == pytest.approx(hand_square_well(-1.0, 1.0, 0.5), rel=1e-14)
    # ka = π: Born limit, tan δ ∝ -V0 > 0 for an attractive well
    E = 0.5 * math.pi ** 2
    t1 = squarewell_tan_delta_analytic(-1e-6, 1.0, 0, E)
    t2 = squarewell_tan_delta_analytic(-2e-6, 1.0, 0, E)
    assert t1 > 0 and t2 / t1 == pytest.approx(2.0, rel=1e-5)


def test_analytic_domain():
    with pytest.raises(DomainError):
        squarewell_tan_delta_analytic(2.0, 1.0, 0, 0.5)
    with pytest.raises(DomainError):
        squarewell_tan_delta_analytic(-1.0, 1.0, 1, 0.5)
    with pytest.raises(DomainError):
        squarewell_tan_delta_analytic(-1.0, 1.0, 0, 0.0)


def test_free_is_zero():
    assert schrodinger_phase_shift(PotentialModel.free(), 0, 0.5) == 0.0
    assert dirac_phase_shift(PotentialModel.free(), -1, kinematics(1.0, 137.035999, 0.5)) == 0.0


@pytest.mark.parametrize("E", [0.1, 0.5, 1.0, 2.0, 5.0])
@pytest.mark.parametrize("V0,a", [(-1.0, 1.0), (-5.0, 2.0), (0.3, 1.5)])
def test_numerov_vs_analytic(E, V0, a):
    if E <= V0:
        pytest.skip("below barrier")
    model = PotentialModel.square_well(V0, a)
    assert schrodinger_phase_shift(model, 0, E) == pytest.approx(
        squarewell_tan_delta_analytic(V0, a, 0, E), rel=1e-8, abs=1e-8)


def test_numerov_order():
    E, l = 0.5, 0
    k = math.sqrt(2 * E)
    exact = squarewell_tan_delta_analytic(-1.0, 1.0, 0, E)
    r1, r2 = 3.0, 3.0 + 0.5 * math.pi / k
    errs = []
    for h in (1 / 20, 1 / 40, 1 / 80):
        r, u = _numerov(SW, l, E, h, r2 + 2 * h)
        i1, i2 = int(round(r1 / h)), int(round(r2 / h))
        A, B = _match(l, k, r[i1], u[i1], r[i2], u[i2])
        errs.append(abs(B / A - exact))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 3.8)


@pytest.mark.parametrize("model,l,E", [(SW, 0, 0.5), (EXP, 0, 1.0), (EXP, 1, 0.1), (EXP, 2, 2.0)])
def test_matching_radius_independence(model, l, E):
    t0 = schrodinger_phase_shift(model, l, E)
    t1 = schrodinger_phase_shift(model, l, E, GridParams(match_offset=6.0))
    assert abs(t1 - t0) <= 1e-7 * max(1.0, abs(t0))


def test_grid_refinement_converged():
    t0 = schrodinger_phase_shift(EXP, 1, 1.0)
    t1 = schrodinger_phase_shift(EXP, 1, 1.0, GridParams(tol=1e-10))
    assert abs(t1 - t0) <= 1e-8 * max(1.0, abs(t0))


@pytest.mark.parametrize("kappa", [-1, 1, -2, 2])
@pytest.mark.parametrize("model,E", [(SW, 0.5), (EXP, 1.0)])
def test_dirac_nonrel_limit(kappa, model, E):
    from jmatrix.basis import l_of_kappa
    t_s = schrodinger_phase_shift(model, l_of_kappa(kappa), E)
    t_d = dirac_phase_shift(model, kappa, kinematics(1.0, 1e5, E))
    assert abs(t_d - t_s) <= 1e-6 * max(1.0, abs(t_s))


@pytest.mark.parametrize("kappa", [-1, 1])
@pytest.mark.parametrize("E", [0.1, 0.5, 1.0])
def test_dirac_self_consistency(kappa, E):
    kin = kinematics(1.0, 137.035999, E)
    t0 = dirac_phase_shift(SW, kappa, kin)
    t1 = dirac_phase_shift(SW, kappa, kin, GridParams(rtol=1e-12))
    assert abs(t1 - t0) <= 1e-8 * max(1.0, abs(t0))
    t2 = dirac_phase_shift(SW, kappa, kin, GridParams(match_offset=6.0))
    assert abs(t2 - t0) <= 1e-7 * max(1.0, abs(t0))


def test_dirac_relativistic_shift_is_small_and_nonzero():
    kin = kinematics(1.0, 137.035999, 0.5)
    t_s = schrodinger_phase_shift(SW, 0, 0.5)
    t_d = dirac_phase_shift(SW, -1, kin)
    assert 1e-8 < abs(t_d - t_s) < 1e-3


def test_return_angle():
    t, d = schrodinger_phase_shift(SW, 0, 0.5, return_angle=True)
    assert math.tan(d) == pytest.approx(t, rel=1e-8)
    assert -math.pi / 2 < d <= math.pi / 2
    t, d = dirac_phase_shift(SW, -1, kinematics(1.0, 137.0, 0.5), return_angle=True)
    assert math.tan(d) == pytest.approx(t, rel=1e-8)
