"""scikit-learn style wrappers around :func:`blockpinv.solvers.weighted_pinv`.

``WeightedPinv`` learns ``A^dag_{MN}`` of an operator ``A`` and maps samples
``b`` (rows of the input) to the weighted minimum-norm least-squares solution
``x = A^dag_{MN} b``. ``WeightedLeastSquares`` treats ``X`` as a design matrix
and fits ``coef_ = X^dag_{MN} y``: the coefficients minimising
``||X c - y||_M`` with the smallest ``||c||_N`` among minimisers.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._config import DEFAULT_TOLERANCES, Tolerances
from .exceptions import ValidationError
from .linalg import as_matrix, numerical_rank
from .mp import verify_penrose
from .solvers import METHODS, weighted_pinv


def _tolerances(rank_rtol):
    return DEFAULT_TOLERANCES if rank_rtol is None else Tolerances(rank_rtol=rank_rtol)


def _real_if_close(Z):
    """Drop an identically zero imaginary part so real problems stay real."""
    return Z.real.copy() if not np.any(Z.imag) else Z


def _check_method(method):
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}; choose from {', '.join(METHODS)}", field="method")


class WeightedPinv(TransformerMixin, BaseEstimator):
    """Weighted Moore-Penrose inverse as a fitted transformer.

    Parameters
    ----------
    M, N : array_like or None
        Hermitian positive definite weights of the codomain (rows of ``A``)
        and domain (columns of ``A``). ``None`` is the identity.
    method : str
        Any name from :data:`blockpinv.solvers.METHODS`.
    split : int or tuple of int or None
        Partition point required by the block methods.
    rank_rtol : float or None
        Relative singular-value cutoff.

    Attributes
    ----------
    pinv_ : ndarray of shape (n, m)
    residuals_ : PenroseResiduals
    rank_ : int
    """

    def __init__(self, M=None, N=None, method="oracle", split=None, rank_rtol=None):
        self.M = M
        self.N = N
        self.method = method
        self.split = split
        self.rank_rtol = rank_rtol

    def fit(self, A, y=None):
        _check_method(self.method)
        tols = _tolerances(self.rank_rtol)
        A = as_matrix(A, "A")
        self.operator_ = A
        self.pinv_ = weighted_pinv(A, self.M, self.N, self.method, self.split, tols)
        self.residuals_ = verify_penrose(A, self.pinv_, self.M, self.N, tols)
        self.rank_ = numerical_rank(A, self.rank_rtol)
        self.n_features_in_ = A.shape[0]
        return self

    def transform(self, B):
        """Rows ``b`` of ``B`` (length ``m``) to ``A^dag_{MN} b`` (length ``n``)."""
        check_is_fitted(self, "pinv_")
        B = as_matrix(B, "B")
        if B.shape[1] != self.pinv_.shape[1]:
            raise ValidationError(f"B has {B.shape[1]} columns; expected {self.pinv_.shape[1]}", field="B")
        return _real_if_close(B @ self.pinv_.T)

    def inverse_transform(self, X):
        """Apply the fitted operator: rows ``x`` to ``A x``."""
        check_is_fitted(self, "pinv_")
        X = as_matrix(X, "X")
        return _real_if_close(X @ self.operator_.T)


class WeightedLeastSquares(RegressorMixin, BaseEstimator):
    """Minimum ``N``-norm solution of the ``M``-weighted least-squares problem.

    Parameters
    ----------
    M : array_like or None
        Sample weight operator (``n_samples`` square). Overridden by
        ``sample_weight`` in :meth:`fit`, which means ``M = diag(sample_weight)``.
    N : array_like or None
        Coefficient metric (``n_features`` square) selecting among minimisers.
    method, split, rank_rtol
        As for :class:`WeightedPinv`.
    """

    def __init__(self, M=None, N=None, method="oracle", split=None, rank_rtol=None):
        self.M = M
        self.N = N
        self.method = method
        self.split = split
        self.rank_rtol = rank_rtol

    def fit(self, X, y, sample_weight=None):
        _check_method(self.method)
        X = as_matrix(X, "X")
        y = np.asarray(y)
        one_target = y.ndim == 1
        Y = as_matrix(y.reshape(-1, 1) if one_target else y, "y")
        if Y.shape[0] != X.shape[0]:
            raise ValidationError(f"X has {X.shape[0]} samples but y has {Y.shape[0]}", field="y")
        M = self.M
        if sample_weight is not None:
            w = np.asarray(sample_weight, dtype=float)
            if w.shape != (X.shape[0],) or not np.all(w > 0):
                raise ValidationError("sample_weight must be positive with one entry per sample",
                                      field="sample_weight")
            M = np.diag(w)
        pinv_ = weighted_pinv(X, M, self.N, self.method, self.split, _tolerances(self.rank_rtol))
        coef = _real_if_close(pinv_ @ Y)
        self.coef_ = coef[:, 0] if one_target else coef
        self.rank_ = numerical_rank(X, self.rank_rtol)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(f"X has {X.shape[1]} features; expected {self.n_features_in_}", field="X")
        return _real_if_close(X @ self.coef_)
