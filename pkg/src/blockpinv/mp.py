"""Weighted Moore-Penrose machinery.

``X = A^dag_{MN}`` is the unique matrix with

    A X A = A,   X A X = X,   (M A X)^* = M A X,   (N X A)^* = N X A

for Hermitian positive definite ``M`` (row space of ``A``) and ``N`` (column
space of ``A``). The reference computation here never uses any block formula:
it reduces to an unweighted pseudoinverse through the weight square roots.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ._config import DEFAULT_TOLERANCES, Tolerances
from .exceptions import PreconditionError, ValidationError
from .linalg import (
    _cutoff,
    _svd,
    as_matrix,
    as_weight,
    eye,
    pinv,
    rel_residual,
)


class PenroseResiduals(NamedTuple):
    """Relative Frobenius violations of the four weighted Penrose equations."""

    r1: float  # A X A - A
    r2: float  # X A X - X
    r3: float  # M A X - (M A X)^*
    r4: float  # N X A - (N X A)^*

    @property
    def max(self) -> float:
        return max(self)

    def ok(self, tol=DEFAULT_TOLERANCES.num_tol) -> bool:
        return self.max <= tol

    def as_dict(self):
        return self._asdict()


def _weights_for(A, M, N, tols):
    m, n = A.shape
    return as_weight(M, m, "M", tols), as_weight(N, n, "N", tols)


def weighted_adjoint(T, M=None, N=None, tols: Tolerances = DEFAULT_TOLERANCES):
    """Adjoint ``N^{-1} T^* M`` of ``T`` between the weighted spaces.

    ``M`` weights the codomain (rows of ``T``), ``N`` the domain (columns).
    """
    T = as_matrix(T, "T")
    M, N = _weights_for(T, M, N, tols)
    return N.inverse @ T.conj().T @ M.value


def weighted_pinv_oracle(A, M=None, N=None, rank_rtol=None, atol=0.0,
                         tols: Tolerances = DEFAULT_TOLERANCES):
    """Reference ``A^dag_{MN}`` via ``N^{-1/2} pinv(M^{1/2} A N^{-1/2}) M^{1/2}``.

    The numerical rank is decided on ``A`` itself (rank does not depend on the
    weights), so ill-conditioned weights cannot promote rounding noise in the
    scaled matrix to a spurious singular value. ``atol`` is an absolute floor
    on the singular values of ``A``.
    """
    A = as_matrix(A)
    M, N = _weights_for(A, M, N, tols)
    m, n = A.shape
    if A.size == 0:
        return np.zeros((n, m), dtype=np.complex128)
    rank_rtol = tols.rank_rtol if rank_rtol is None else rank_rtol
    s = np.linalg.svd(A, compute_uv=False)
    r = int(np.count_nonzero(s > _cutoff(s, A.shape, rank_rtol, atol)))
    if r == 0:
        return np.zeros((n, m), dtype=np.complex128)
    scaled = M.sqrt @ A @ N.sqrt_inverse
    U, sigma, Vh = _svd(scaled)
    core = (Vh[:r].conj().T / sigma[:r]) @ U[:, :r].conj().T
    return N.sqrt_inverse @ core @ M.sqrt


def _conformable(A, X):
    A = as_matrix(A, "A")
    X = as_matrix(X, "X")
    if X.shape != A.shape[::-1]:
        raise ValidationError(f"X has shape {X.shape}, expected {A.shape[::-1]} for A of shape {A.shape}")
    return A, X


def verify_penrose(A, X, M=None, N=None, tols: Tolerances = DEFAULT_TOLERANCES) -> PenroseResiduals:
    """Measure how far ``X`` is from ``A^dag_{MN}``."""
    A, X = _conformable(A, X)
    M, N = _weights_for(A, M, N, tols)
    floor = tols.pd_tol
    AX = A @ X
    XA = X @ A
    MAX = M.value @ AX
    NXA = N.value @ XA
    return PenroseResiduals(
        rel_residual(AX @ A - A, A, floor),
        rel_residual(XA @ X - X, X, floor),
        rel_residual(MAX - MAX.conj().T, MAX, floor),
        rel_residual(NXA - NXA.conj().T, NXA, floor),
    )


def is_13_inverse(A, X, tols: Tolerances = DEFAULT_TOLERANCES):
    """Check ``A X A = A`` and ``(A X)^* = A X``.

    Returns ``(ok, (r1, r3))`` with relative residuals.
    """
    A, X = _conformable(A, X)
    AX = A @ X
    r1 = rel_residual(AX @ A - A, A, tols.pd_tol)
    r3 = rel_residual(AX - AX.conj().T, AX, tols.pd_tol)
    return (r1 <= tols.num_tol and r3 <= tols.num_tol), (r1, r3)


def pinv_via_13(A, X13, tols: Tolerances = DEFAULT_TOLERANCES):
    """``A^dag = A^* X13`` for any (1,3)-inverse ``X13`` of ``A A^*``."""
    A = as_matrix(A)
    gram = A @ A.conj().T
    ok, (r1, r3) = is_13_inverse(gram, X13, tols)
    if not ok:
        raise PreconditionError(
            "X13 is not a (1,3)-inverse of A A^*",
            residuals={"AXA-A": r1, "(AX)^*-AX": r3},
            stage="pinv_via_13",
        )
    return A.conj().T @ as_matrix(X13, "X13")


def characterization_check(A, X, M=None, N=None, tols: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Alternative test for ``X = A^dag_{MN}``.

    ``A^* M A X = A^* M`` together with ``range(N X)`` inside ``range(A^*)``;
    the inclusion is tested by annihilation under ``I - A^dag A``.
    """
    A, X = _conformable(A, X)
    M, N = _weights_for(A, M, N, tols)
    AhM = A.conj().T @ M.value
    normal = rel_residual(AhM @ A @ X - AhM, AhM, tols.pd_tol)
    NX = N.value @ X
    off_range = eye(A.shape[1]) - pinv(A, tols.rank_rtol) @ A
    inclusion = rel_residual(off_range @ NX, NX, tols.pd_tol)
    return normal <= tols.num_tol and inclusion <= tols.num_tol
