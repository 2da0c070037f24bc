"""Changing the column-space weight of a weighted pseudoinverse.

For fixed ``A`` and ``M``,

    R = I + (I - A^dag_{M,N1} A) N1^{-1} (N2 - N1)

is invertible and ``A^dag_{M,N2} = R^{-1} A^dag_{M,N1}``.
"""

from __future__ import annotations

from ._config import DEFAULT_TOLERANCES, Tolerances
from .linalg import as_matrix, as_weight, eye, solve_checked
from .mp import weighted_pinv_oracle


def _prepare(A, M, N1, N2, tols):
    A = as_matrix(A)
    m, n = A.shape
    return (A, as_weight(M, m, "M", tols), as_weight(N1, n, "N1", tols),
            as_weight(N2, n, "N2", tols))


def reweight_operator(A, M=None, N1=None, N2=None, *, A_pinv=None, atol=0.0,
                      tols: Tolerances = DEFAULT_TOLERANCES):
    """Return ``R_{M;N1,N2}``.

    ``A_pinv`` may supply a precomputed ``A^dag_{M,N1}``; otherwise the
    reference oracle is used (``atol`` is forwarded to its rank decision).
    """
    A, M, N1, N2 = _prepare(A, M, N1, N2, tols)
    if A_pinv is None:
        A_pinv = weighted_pinv_oracle(A, M, N1, atol=atol, tols=tols)
    n = A.shape[1]
    return eye(n) + (eye(n) - A_pinv @ A) @ N1.inverse @ (N2.value - N1.value)


def reweight_pinv(A, M=None, N1=None, N2=None, *, atol=0.0, tols: Tolerances = DEFAULT_TOLERANCES):
    """``A^dag_{M,N2}`` obtained from ``A^dag_{M,N1}`` as ``R^{-1} A^dag_{M,N1}``."""
    A, M, N1, N2 = _prepare(A, M, N1, N2, tols)
    A_pinv = weighted_pinv_oracle(A, M, N1, atol=atol, tols=tols)
    R = reweight_operator(A, M, N1, N2, A_pinv=A_pinv, tols=tols)
    return solve_checked(R, A_pinv, tols, stage="R_{M;N1,N2}")
