import numpy as np
import pytest

from flcboot import DesignMatrices

# criterion id -> (passed, detail); filled in by test_acceptance
ACCEPTANCE = {}


def record(criterion, passed, detail):
    ACCEPTANCE[criterion] = (bool(passed), detail)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {key}: {detail}")


def random_design(rng, N=None, p=None, r=None, r0=None):
    """A generic full-rank design with at least one tested column and df_den >= 1."""
    N = N or int(rng.integers(8, 41))
    p = int(rng.integers(1, 4)) if p is None else p
    r = int(rng.integers(1, max(2, min(8, N - p - 1)))) if r is None else r
    r0 = int(rng.integers(0, r)) if r0 is None else r0
    X = np.column_stack([np.ones(N), rng.standard_normal((N, p - 1))]) if p else np.zeros((N, 0))
    Z = rng.standard_normal((N, r))
    return DesignMatrices(rng.standard_normal(N), X, Z, r0)


def ols_rss(A, v):
    """Residual sum of squares from numpy's SVD-based least squares (independent of our QR)."""
    if A.shape[1] == 0:
        return float(v @ v)
    coef = np.linalg.lstsq(A, v, rcond=None)[0]
    resid = v - A @ coef
    return float(resid @ resid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
