import numpy as np
import pytest

from blockpinv.linalg import rel_diff


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def assert_rel_close(X, Y, tol=1e-8):
    """Relative Frobenius agreement, the metric used throughout the package."""
    err = rel_diff(np.asarray(X), np.asarray(Y))
    assert err <= tol, f"relative difference {err:.3e} exceeds {tol:.1e}"


def frac_matrix(rows):
    """Nested lists of ints/strings such as "2/3" to a complex array."""
    from fractions import Fraction

    return np.array([[float(Fraction(x)) for x in row] for row in rows], dtype=np.complex128)
