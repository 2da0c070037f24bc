"""Random problem generators with controlled rank and conditioning."""

from __future__ import annotations

import numpy as np

from .block1x2 import Partition1x2
from .block2x2 import Partition2x2
from .linalg import pinv


def _unitary(rng, n, r, complex_=True):
    G = rng.standard_normal((n, r))
    if complex_:
        G = G + 1j * rng.standard_normal((n, r))
    Q, R = np.linalg.qr(G)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_matrix(rng, m, n, rank=None, cond=1e2, scale=1.0, complex_=True):
    """``m x n`` matrix of exact rank ``rank`` (default full) with singular values in ``[scale/cond, scale]``."""
    r = min(m, n) if rank is None else min(int(rank), m, n)
    if r == 0:
        return np.zeros((m, n), dtype=np.complex128)
    s = scale * np.logspace(0.0, -np.log10(cond), r)
    rng.shuffle(s)
    return (_unitary(rng, m, r, complex_) * s) @ _unitary(rng, n, r, complex_).conj().T


def random_weight(rng, n, cond=1e2, complex_=True):
    """Hermitian PD matrix with eigenvalues spread log-uniformly over ``[1, cond]``."""
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    lam = np.exp(rng.uniform(0.0, np.log(cond), n))
    lam[0], lam[-1] = 1.0, cond if n > 1 else 1.0
    Q = _unitary(rng, n, n, complex_)
    W = (Q * lam) @ Q.conj().T
    return (W + W.conj().T) / 2


def random_partition1x2(rng, m, p, q, rank_a=None, rank_ab=None, cond=1e2, weight_cond=1e2,
                        complex_=True):
    """Random ``(A, B)`` with PD weights; ``rank_ab`` controls the rank of ``[A | B]``."""
    if rank_ab is None:
        AB = np.hstack([random_matrix(rng, m, p, rank_a, cond, complex_=complex_),
                        random_matrix(rng, m, q, None, cond, complex_=complex_)])
    else:
        AB = random_matrix(rng, m, p + q, rank_ab, cond, complex_=complex_)
    M = random_weight(rng, m, weight_cond, complex_)
    N = random_weight(rng, p + q, weight_cond, complex_)
    return Partition1x2.from_weights(AB[:, :p], AB[:, p:], M, N)


def random_partition2x2(rng, k1, k2, h1, h2, rank=None, cond=1e2, weights=False,
                        weight_cond=1e2, complex_=True):
    A = random_matrix(rng, k1 + k2, h1 + h2, rank, cond, complex_=complex_)
    M = N = None
    if weights:
        M = random_weight(rng, k1 + k2, weight_cond, complex_)
        N = random_weight(rng, h1 + h2, weight_cond, complex_)
    return Partition2x2.split(A, k1, h1, M, N)


def special_case_partition(rng, k1, k2, h1, h2, rank11=None, cond=1e2, complex_=True):
    """Blocks built so that ``A12`` lies in ``range(A11)`` and ``A21`` in ``range(A11^*)``."""
    A11 = random_matrix(rng, k1, h1, rank11, cond, complex_=complex_)
    A11d = pinv(A11)
    G = random_matrix(rng, k1, h2, None, cond, complex_=complex_)
    H = random_matrix(rng, k2, h1, None, cond, complex_=complex_)
    A12 = A11 @ A11d @ G
    A21 = H @ A11d @ A11
    A22 = random_matrix(rng, k2, h2, None, cond, complex_=complex_)
    return Partition2x2(A11, A12, A21, A22)


def positive_partition(rng, rows, k1, k2, cond=1e2, complex_=True):
    """``A = G^* G`` for a random ``rows x (k1+k2)`` factor ``G``."""
    G = random_matrix(rng, rows, k1 + k2, None, cond, complex_=complex_)
    A = G.conj().T @ G
    A = (A + A.conj().T) / 2
    return Partition2x2.split(A, k1, k1)
