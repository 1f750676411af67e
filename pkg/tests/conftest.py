import numpy as np
import pytest

from rboost.datasets import make_blobs, make_separable, make_two_gaussians


def _se(z, w):
    mean = (z * w).sum() / w.sum()
    return ((z - mean) ** 2 * w).sum()


def direct_se(z, w):
    """Weighted squared error around the weighted mean, computed literally."""
    return float(_se(np.asarray(z, dtype=float), np.asarray(w, dtype=float)))


def brute_force_splits(X, z, w, min_leaf=1):
    """Every admissible split with its direct-SE gain.

    Independent of the tree code: sorts each column itself and scores each
    cut by SE_T - (SE_L + SE_R) from weighted means. The subtraction cancels
    badly when the gain is small next to SE_T, so it runs in extended
    precision.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    z = np.asarray(z, dtype=np.longdouble)
    w = np.asarray(w, dtype=np.longdouble)
    se_total = _se(z, w)
    out = []
    n = len(z)
    for d in range(X.shape[1]):
        vals = np.unique(X[:, d])
        for a, b in zip(vals[:-1], vals[1:]):
            left = X[:, d] <= a
            nl = int(left.sum())
            if nl < min_leaf or n - nl < min_leaf:
                continue
            if w[left].sum() <= 0 or w[~left].sum() <= 0:
                continue
            gain = se_total - _se(z[left], w[left]) - _se(z[~left], w[~left])
            out.append((float(gain), d, (a + b) / 2, nl))
    return out


@pytest.fixture(scope="session")
def separable3():
    return make_separable(n_samples=200, n_classes=3, seed=0)


@pytest.fixture(scope="session")
def blobs4():
    return make_blobs(n_samples=500, n_classes=4, seed=1)


@pytest.fixture(scope="session")
def two_gaussians():
    return make_two_gaussians(n_samples=1500, seed=2)


# one summary line per acceptance criterion, shown at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
