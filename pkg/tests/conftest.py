import numpy as np
import pytest
from scipy import integrate, special

from jmatrix.basis import GAUSSIAN, LAGUERRE


def ref_phi(kind, l, lam, n, r):
    """Basis function from scipy.special, independent of jmatrix.specfun."""
    x = lam * np.asarray(r, dtype=float)
    if kind == LAGUERRE:
        return x ** (l + 1) * np.exp(-0.5 * x) * special.eval_genlaguerre(n, 2 * l + 1, x)
    return x ** (l + 1) * np.exp(-0.5 * x * x) * special.eval_genlaguerre(n, l + 0.5, x * x)


def quad_inf(f, breaks=(), limit=400):
    """∫_0^∞ f by scipy.integrate.quad, split at the given points."""
    pts = [0.0] + sorted(breaks)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-12, limit=limit)[0]
    total += integrate.quad(f, pts[-1], np.inf, epsabs=1e-14, epsrel=1e-12, limit=limit)[0]
    return total


@pytest.fixture(params=[LAGUERRE, GAUSSIAN])
def kind(request):
    return request.param


# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
