"""Dense complex-matrix foundation.

Every matrix is a 2-D ``complex128`` ndarray. Real input is embedded with zero
imaginary part. Residuals use the Frobenius norm throughout.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from ._config import DEFAULT_TOLERANCES, Tolerances
from .exceptions import (
    IllConditionedWarning,
    NotPositiveDefiniteError,
    NumericalError,
    ValidationError,
)

EPS = np.finfo(np.float64).eps

# Rounding noise in a matrix formed from products/differences is bounded by
# roughly n * eps * (sum of the norms of the terms); singular values below
# this floor carry no information and are truncated.
FORMATION_SLACK = 16.0


def as_matrix(x, name="A") -> np.ndarray:
    """Coerce ``x`` to a finite 2-D complex128 array."""
    if isinstance(x, Weight):
        return x.value
    try:
        arr = np.asarray(x, dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: not a numeric matrix ({exc})", field=name) from None
    if arr.ndim != 2:
        raise ValidationError(f"{name}: expected a 2-D matrix, got ndim={arr.ndim}", field=name)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name}: entries must be finite", field=name)
    return arr


def adjoint(A) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(A).conj().T


def fro(A) -> float:
    return float(np.linalg.norm(A)) if np.size(A) else 0.0


def rel_residual(diff, ref, floor=DEFAULT_TOLERANCES.pd_tol) -> float:
    """``|diff|_F / |ref|_F``, or the absolute norm when ``|ref|_F < floor``."""
    d = fro(diff)
    r = fro(ref)
    return d / r if r >= floor else d


def rel_diff(X, Y, floor=DEFAULT_TOLERANCES.pd_tol) -> float:
    """Relative Frobenius distance of ``X`` from the reference ``Y``."""
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    if X.shape != Y.shape:
        raise ValidationError(f"shape mismatch {X.shape} vs {Y.shape}")
    return rel_residual(X - Y, Y, floor)


def noise_floor(scale, n) -> float:
    """Absolute singular-value floor for a matrix formed at magnitude ``scale``."""
    return FORMATION_SLACK * max(int(n), 1) * EPS * float(scale)


def check_shape(A, shape, name):
    want = tuple(shape)
    if A.shape != want:
        raise ValidationError(f"{name}: expected shape {want}, got {A.shape}", field=name)


def default_rank_rtol(shape) -> float:
    return max(shape) * EPS if len(shape) and max(shape) else EPS


def _cutoff(s, shape, rank_rtol, atol):
    if rank_rtol is None:
        rank_rtol = default_rank_rtol(shape)
    if rank_rtol < 0:
        raise ValidationError("rank_rtol must be nonnegative", field="rank_rtol")
    smax = s[0] if s.size else 0.0
    return max(rank_rtol * smax, atol)


def _svd(A):
    try:
        return np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}", stage="svd") from None


def numerical_rank(A, rank_rtol=None, atol=0.0) -> int:
    A = as_matrix(A)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.count_nonzero(s > _cutoff(s, A.shape, rank_rtol, atol)))


def pinv(A, rank_rtol=None, atol=0.0, rank=None) -> np.ndarray:
    """Moore-Penrose inverse by SVD.

    Singular values at or below ``max(rank_rtol * s_max, atol)`` are treated
    as zero. ``rank`` forces the number of retained singular values instead.
    """
    A = as_matrix(A)
    m, n = A.shape
    if A.size == 0:
        return np.zeros((n, m), dtype=np.complex128)
    U, s, Vh = _svd(A)
    if rank is None:
        r = int(np.count_nonzero(s > _cutoff(s, A.shape, rank_rtol, atol)))
    else:
        r = min(int(rank), s.size)
    if r == 0:
        return np.zeros((n, m), dtype=np.complex128)
    return (Vh[:r].conj().T / s[:r]) @ U[:, :r].conj().T


def _hermitian_part(W, name, herm_tol):
    W = as_matrix(W, name)
    if W.shape[0] != W.shape[1]:
        raise ValidationError(f"{name}: weight must be square, got {W.shape}", field=name)
    skew = rel_residual(W - W.conj().T, W)
    if skew > herm_tol:
        raise ValidationError(
            f"{name}: not Hermitian (relative skew {skew:.3e} > {herm_tol:g})", field=name
        )
    return (W + W.conj().T) / 2


def _eig_pd(H, name, pd_tol):
    w, V = np.linalg.eigh(H)
    if w.size and w[0] <= pd_tol:
        raise NotPositiveDefiniteError(
            f"{name}: not positive definite (smallest eigenvalue {w[0]:.3e})", field=name
        )
    return w, V


def sqrt_pd(W, herm_tol=DEFAULT_TOLERANCES.herm_tol, pd_tol=DEFAULT_TOLERANCES.pd_tol):
    """Principal square root of a Hermitian positive definite matrix."""
    if isinstance(W, Weight):
        return W.sqrt
    H = _hermitian_part(W, "W", herm_tol)
    if H.size == 0:
        return H
    w, V = _eig_pd(H, "W", pd_tol)
    return (V * np.sqrt(w)) @ V.conj().T


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class Weight:
    """A validated Hermitian positive definite matrix with cached factors.

    Attributes ``value``, ``inverse``, ``chol`` (lower Cholesky factor),
    ``sqrt`` and ``sqrt_inverse`` are read-only arrays.
    """

    __slots__ = ("value", "inverse", "chol", "sqrt", "sqrt_inverse", "name")

    def __init__(self, value, *, herm_tol=DEFAULT_TOLERANCES.herm_tol,
                 pd_tol=DEFAULT_TOLERANCES.pd_tol, name="W"):
        H = _hermitian_part(value, name, herm_tol)
        n = H.shape[0]
        if n == 0:
            L = inv = root = root_inv = H
        else:
            try:
                L = np.linalg.cholesky(H)
            except np.linalg.LinAlgError:
                raise NotPositiveDefiniteError(
                    f"{name}: not positive definite (Cholesky failed)", field=name
                ) from None
            pivots = np.abs(np.diag(L)) ** 2
            if pivots.min() <= pd_tol:
                raise NotPositiveDefiniteError(
                    f"{name}: not positive definite (Cholesky pivot {pivots.min():.3e})",
                    field=name,
                )
            w, V = _eig_pd(H, name, pd_tol)
            inv = scipy.linalg.cho_solve((L, True), np.eye(n, dtype=np.complex128))
            inv = (inv + inv.conj().T) / 2
            root = (V * np.sqrt(w)) @ V.conj().T
            root_inv = (V / np.sqrt(w)) @ V.conj().T
        for attr, arr in (("value", H), ("inverse", inv), ("chol", L),
                          ("sqrt", root), ("sqrt_inverse", root_inv)):
            object.__setattr__(self, attr, _frozen(arr))
        object.__setattr__(self, "name", name)

    def __setattr__(self, key, value):
        raise AttributeError("Weight is immutable")

    @classmethod
    def identity(cls, n) -> Weight:
        return cls(np.eye(n), name="I")

    @property
    def n(self) -> int:
        return self.value.shape[0]

    @property
    def shape(self):
        return self.value.shape

    def __array__(self, dtype=None, copy=None):
        return np.array(self.value, dtype=dtype)

    def __repr__(self):
        return f"Weight(n={self.n}, name={self.name!r})"


def as_weight(W, n=None, name="W", tols: Tolerances = DEFAULT_TOLERANCES) -> Weight:
    """Accept ``None`` (identity of size ``n``), a :class:`Weight`, or an array."""
    if W is None:
        if n is None:
            raise ValidationError(f"{name}: size needed for the default identity weight", field=name)
        return Weight.identity(n)
    if not isinstance(W, Weight):
        W = Weight(W, herm_tol=tols.herm_tol, pd_tol=tols.pd_tol, name=name)
    if n is not None and W.n != n:
        raise ValidationError(f"{name}: expected a {n}x{n} weight, got {W.n}x{W.n}", field=name)
    return W


def derived_weight(X, stage, tols: Tolerances = DEFAULT_TOLERANCES) -> Weight:
    """Build a weight from an intermediate quantity; failure is numerical, not user error."""
    try:
        return Weight(X, herm_tol=tols.herm_tol, pd_tol=tols.pd_tol, name=stage)
    except ValidationError as exc:
        raise NumericalError(f"{stage}: {exc}", stage=stage) from None


def solve_pd(W, B) -> np.ndarray:
    """Solve ``W.value @ X = B`` with the cached Cholesky factor."""
    W = as_weight(W)
    B = as_matrix(B, "B")
    if B.shape[0] != W.n:
        raise ValidationError(f"solve_pd: weight is {W.n}x{W.n} but B has {B.shape[0]} rows")
    if B.size == 0:
        return np.zeros(B.shape, dtype=np.complex128)
    return scipy.linalg.cho_solve((W.chol, True), B)


def solve_checked(R, B, tols: Tolerances = DEFAULT_TOLERANCES, stage="solve") -> np.ndarray:
    """LU solve for an operator that is invertible in exact arithmetic.

    Warns above ``tols.cond_warn`` and raises above ``tols.cond_limit``.
    """
    R = as_matrix(R, stage)
    B = as_matrix(B, "B")
    if R.size == 0:
        return np.zeros((0, B.shape[1]), dtype=np.complex128)
    cond = float(np.linalg.cond(R))
    if not np.isfinite(cond) or cond > tols.cond_limit:
        raise NumericalError(f"{stage}: operator is numerically singular (cond={cond:.3e})", stage=stage)
    if cond > tols.cond_warn:
        warnings.warn(f"{stage}: condition number {cond:.3e}", IllConditionedWarning, stacklevel=2)
    return scipy.linalg.lu_solve(scipy.linalg.lu_factor(R), B)


def block_diag(*blocks) -> np.ndarray:
    return scipy.linalg.block_diag(*[as_matrix(b) for b in blocks]).astype(np.complex128)


def eye(n) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)
