import math

import numpy as np
import pytest

from jmatrix.errors import DomainError, NumericalError, PoleError
from jmatrix.tuning import DEFAULT_SCALES, tune_scale


def test_default_grid():
    assert len(DEFAULT_SCALES) == 32
    assert DEFAULT_SCALES[0] == pytest.approx(0.7) and DEFAULT_SCALES[-1] == pytest.approx(14.0)


def test_picks_most_stable_stationary_point():
    # δ_N has extrema at λ≈2 and λ≈6; δ_{N-1} agrees best near λ≈6
    def evaluate(lam):
        d = 0.3 * math.sin(lam)
        return math.tan(d), math.tan(d + 0.01 * abs(lam - 6.0))

    grid = np.linspace(0.5, 9.0, 60)
    ch = tune_scale(evaluate, grid)
    assert ch.stationary
    assert abs(ch.scale - 1.5 * math.pi) < 0.2
    assert ch.n_stability == pytest.approx(abs(ch.deltas[np.argmin(abs(grid - ch.scale))]
                                               - ch.deltas_prev[np.argmin(abs(grid - ch.scale))]))


def test_monotone_falls_back_to_whole_grid():
    ch = tune_scale(lambda lam: (math.tan(0.1 * lam), math.tan(0.1 * lam + 0.05 / lam)), [1.0, 2.0, 4.0, 8.0])
    assert not ch.stationary and ch.scale == 8.0


def test_branch_unwrapping():
    # δ crosses π/2: tan jumps sign but the unwrapped δ is smooth
    def evaluate(lam):
        d = 1.4 + 0.05 * lam
        return math.tan(d), math.tan(d - 1e-3)

    ch = tune_scale(evaluate, np.linspace(1, 10, 10))
    assert np.all(np.diff(ch.deltas) > 0)
    assert np.allclose(ch.deltas - ch.deltas_prev, 1e-3)


def test_failed_points_are_skipped():
    def evaluate(lam):
        if lam < 3:
            raise PoleError("pole")
        return math.tan(0.1 * (lam - 5) ** 2), math.tan(0.1 * (lam - 5) ** 2)

    ch = tune_scale(evaluate, np.arange(1.0, 10.0))
    assert np.isnan(ch.deltas[0]) and ch.scale == 5.0

    with pytest.raises(NumericalError):
        tune_scale(lambda lam: (_ for _ in ()).throw(PoleError("x")), [1.0, 2.0, 3.0])


@pytest.mark.parametrize("grid", [[1.0, 2.0], [1.0, -2.0, 3.0], [3.0, 2.0, 1.0]])
def test_grid_validation(grid):
    with pytest.raises(DomainError):
        tune_scale(lambda lam: (0.0, 0.0), grid)
