"""Weighted pseudoinverses of a row of two blocks ``(A, B)``.

The operator is ``[A | B]`` acting on a split domain with weight

    N = [[N1, L], [L^*, N2]]

and codomain weight ``M``. Four representations are provided, all returning
the stacked inverse ``[X1; X2]`` (``X1`` has ``A``'s column count of rows).
Inner weighted pseudoinverses of ``A`` and of

    C = (I - A A^dag_{M,N1}) B

come from the reference oracle, so each formula is checked on its own.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from ._config import DEFAULT_TOLERANCES, Tolerances
from .exceptions import ValidationError
from .linalg import (
    Weight,
    as_matrix,
    as_weight,
    check_shape,
    derived_weight,
    eye,
    fro,
    noise_floor,
    solve_checked,
)
from .mp import weighted_pinv_oracle
from .reweight import reweight_operator


class BlockColumn(NamedTuple):
    """A stacked inverse together with its two row blocks."""

    X: np.ndarray
    X1: np.ndarray
    X2: np.ndarray


def _stack(X1, X2):
    return BlockColumn(np.vstack([X1, X2]), X1, X2)


@dataclass(frozen=True, eq=False)
class Partition1x2:
    """Blocks ``A`` (m x p), ``B`` (m x q) and conformable weights.

    ``N1`` defaults to the identity, ``L`` to zero and ``N2`` to the
    identity. ``a_floor`` is an absolute singular-value floor for ``A`` when
    ``A`` is itself a computed quantity carrying rounding noise.
    """

    A: np.ndarray
    B: np.ndarray
    M: Weight | np.ndarray | None = None
    N1: Weight | np.ndarray | None = None
    L: np.ndarray | None = None
    N2: np.ndarray | None = None
    tols: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)
    a_floor: float = 0.0

    def __post_init__(self):
        set_ = object.__setattr__
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        if A.shape[0] != B.shape[0]:
            raise ValidationError(f"A has {A.shape[0]} rows but B has {B.shape[0]}")
        m, p = A.shape
        q = B.shape[1]
        set_(self, "A", A)
        set_(self, "B", B)
        set_(self, "M", as_weight(self.M, m, "M", self.tols))
        set_(self, "N1", as_weight(self.N1, p, "N1", self.tols))
        L = np.zeros((p, q), dtype=np.complex128) if self.L is None else as_matrix(self.L, "L")
        check_shape(L, (p, q), "L")
        N2 = eye(q) if self.N2 is None else as_matrix(self.N2, "N2")
        check_shape(N2, (q, q), "N2")
        set_(self, "L", L)
        set_(self, "N2", N2)
        # validates that the assembled N is PD, which makes S(N) PD as well
        self.N
        self.SN

    @classmethod
    def from_weights(cls, A, B, M=None, N=None, tols=DEFAULT_TOLERANCES, **kw):
        """Build from a full domain weight ``N`` of size ``p + q``."""
        A = as_matrix(A, "A")
        p = A.shape[1]
        if N is None:
            return cls(A, B, M, tols=tols, **kw)
        N = as_weight(N, p + as_matrix(B, "B").shape[1], "N", tols).value
        return cls(A, B, M, N[:p, :p], N[:p, p:], N[p:, p:], tols=tols, **kw)

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def p(self):
        return self.A.shape[1]

    @property
    def q(self):
        return self.B.shape[1]

    @cached_property
    def AB(self) -> np.ndarray:
        return np.hstack([self.A, self.B])

    @cached_property
    def N(self) -> Weight:
        full = np.block([[self.N1.value, self.L], [self.L.conj().T, self.N2]])
        return as_weight(full, name="N", tols=self.tols)

    @cached_property
    def SN(self) -> Weight:
        """Schur complement ``N2 - L^* N1^{-1} L``."""
        S = self.N2 - self.L.conj().T @ self.N1.inverse @ self.L
        return as_weight(S, name="S(N)", tols=self.tols)

    @cached_property
    def A_pinv(self) -> np.ndarray:
        return weighted_pinv_oracle(self.A, self.M, self.N1, atol=self.a_floor, tols=self.tols)

    @cached_property
    def C(self) -> np.ndarray:
        return (eye(self.m) - self.A @ self.A_pinv) @ self.B

    @cached_property
    def c_floor(self) -> float:
        """Rounding floor for the singular values of ``C``."""
        scale = fro(self.B) * (1.0 + fro(self.A) * fro(self.A_pinv))
        return noise_floor(scale, max(self.m, self.p, self.q))

    @cached_property
    def D(self) -> np.ndarray:
        return self.A_pinv @ self.B

    @cached_property
    def _off_range_scaled(self) -> np.ndarray:
        """``(I - A^dag A) N1^{-1}``."""
        return (eye(self.p) - self.A_pinv @ self.A) @ self.N1.inverse

    def c_pinv(self, W: Weight) -> np.ndarray:
        return weighted_pinv_oracle(self.C, self.M, W, atol=self.c_floor, tols=self.tols)

    def split(self, X) -> BlockColumn:
        X = as_matrix(X, "X")
        return _stack(X[: self.p], X[self.p:])


def complement_c(p: Partition1x2) -> np.ndarray:
    """``C = (I - A A^dag_{M,N1}) B``; satisfies ``C^* M A = 0``."""
    return p.C


def wpinv_1x2_thm32(p: Partition1x2) -> BlockColumn:
    """``(A, C)^dag_{MN}`` with ``C = complement_c(p)``.

    Uses the PD operator ``S = N2 - L^* (I - A^dag A) N1^{-1} L`` and
    ``U = C^dag_{MS} - (I - C^dag_{MS} C) S^{-1} L^* A^dag``.
    """
    Ad, Lh = p.A_pinv, p.L.conj().T
    S = derived_weight(p.N2 - Lh @ p._off_range_scaled @ p.L, "S", p.tols)
    Cd = p.c_pinv(S)
    U = Cd - (eye(p.q) - Cd @ p.C) @ S.inverse @ Lh @ Ad
    return _stack(Ad - p._off_range_scaled @ p.L @ U, U)


def wpinv_1x2_via_thm32(p: Partition1x2) -> BlockColumn:
    """``(A, B)^dag_{MN}`` by mapping the ``(A, C)`` formula back.

    With ``T = [[I, -D], [0, I]]`` one has ``(A, B) T = (A, C)``, so
    ``(A, B)^dag_{MN} = T (A, C)^dag_{M, T^* N T}``.
    """
    D = p.D
    T = np.block([[eye(p.p), -D], [np.zeros((p.q, p.p)), eye(p.q)]])
    Nt = T.conj().T @ p.N.value @ T
    inner = Partition1x2(p.A, p.C, p.M, p.N1, Nt[: p.p, p.p:], Nt[p.p:, p.p:],
                         tols=p.tols, a_floor=p.a_floor)
    # (A, C) has the same complement as (A, B); reuse the sharper floor
    object.__setattr__(inner, "c_floor", max(inner.c_floor, p.c_floor))
    return _stack(*_split_rows(T @ wpinv_1x2_thm32(inner).X, p.p))


def _split_rows(X, k):
    return X[:k], X[k:]


@dataclass(frozen=True)
class Thm33Parts:
    D: np.ndarray
    S_tilde: np.ndarray
    C: np.ndarray
    C_pinv: np.ndarray
    U_tilde: np.ndarray
    result: BlockColumn


def _s_tilde(p: Partition1x2) -> Weight:
    D, Lh = p.D, p.L.conj().T
    Dh = D.conj().T
    St = (p.N2 - Lh @ p._off_range_scaled @ p.L
          + Dh @ p.N1.value @ D - Dh @ p.L - Lh @ D)
    return derived_weight(St, "S~", p.tols)


def thm33_parts(p: Partition1x2) -> Thm33Parts:
    """All intermediates of the ``D``/``S~``/``U~`` representation."""
    Ad, D = p.A_pinv, p.D
    St = _s_tilde(p)
    Cd = p.c_pinv(St)
    coupling = (D.conj().T @ p.N1.value - p.L.conj().T) @ Ad
    Ut = Cd + (eye(p.q) - Cd @ p.C) @ St.inverse @ coupling
    X1 = Ad - (D + p._off_range_scaled @ p.L) @ Ut
    return Thm33Parts(D, St.value, p.C, Cd, Ut, _stack(X1, Ut))


def wpinv_1x2_thm33(p: Partition1x2) -> BlockColumn:
    """``(A, B)^dag_{MN}`` via ``D = A^dag B`` and the modified Schur operator ``S~``."""
    return thm33_parts(p).result


def wpinv_1x2_unified(p: Partition1x2, N3=None) -> BlockColumn:
    """``(A, B)^dag_{MN}`` expressed through ``C^dag_{M,N3}`` for any PD ``N3``.

    ``N3`` defaults to ``S(N)``. The result does not depend on ``N3``.
    """
    N3 = p.SN if N3 is None else as_weight(N3, p.q, "N3", p.tols)
    Ad, D = p.A_pinv, p.D
    St = _s_tilde(p)
    Cd3 = p.c_pinv(N3)
    R = reweight_operator(p.C, p.M, N3, St, A_pinv=Cd3, tols=p.tols)
    rhs = Cd3 + (eye(p.q) - Cd3 @ p.C) @ N3.inverse @ (D.conj().T @ p.N1.value - p.L.conj().T) @ Ad
    V = solve_checked(R, rhs, p.tols, stage="R_{M;N3,S~}")
    return _stack(Ad - (D + p._off_range_scaled @ p.L) @ V, V)


@dataclass(frozen=True)
class XuParts:
    Sigma: np.ndarray
    Y: np.ndarray
    Omega: np.ndarray
    result: BlockColumn


def xu_parts(p: Partition1x2) -> XuParts:
    Ad = p.A_pinv
    N1inv_L = p.N1.inverse @ p.L
    Sigma = Ad @ (p.B - p.A @ N1inv_L)
    Cd = p.c_pinv(p.SN)
    Y = (eye(p.q) - Cd @ p.C) @ p.SN.inverse
    Y_SigmaH_N1 = Y @ Sigma.conj().T @ p.N1.value
    K = eye(p.q) + Y_SigmaH_N1 @ Sigma
    Omega = solve_checked(K, Y_SigmaH_N1 @ Ad + Cd, p.tols, stage="I+Y Sigma^* N1 Sigma")
    return XuParts(Sigma, Y, Omega, _stack(Ad - (Sigma + N1inv_L) @ Omega, Omega))


def wpinv_1x2_xu(p: Partition1x2) -> BlockColumn:
    """``(A, B)^dag_{MN}`` via ``Sigma = A^dag (B - A N1^{-1} L)`` and ``S(N)``."""
    return xu_parts(p).result


METHODS_1X2 = {
    "thm32": wpinv_1x2_via_thm32,
    "thm33": wpinv_1x2_thm33,
    "unified": wpinv_1x2_unified,
    "xu": wpinv_1x2_xu,
}
