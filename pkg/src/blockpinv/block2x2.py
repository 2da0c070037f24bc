"""Pseudoinverses of 2x2 block matrices.

    A = [[A11, A12],
         [A21, A22]]      A11: k1 x h1,  A22: k2 x h2

Unweighted routes: the special case (range conditions on ``A12``/``A21``),
the positive semidefinite case, and the general case through ``E = A A^*``.
The weighted route transforms ``A`` into a block matrix ``B`` acting between
block-diagonally weighted spaces, applies the general formula there with
weighted adjoints, and maps the result back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._config import DEFAULT_TOLERANCES, Tolerances
from .block1x2 import Partition1x2, thm33_parts
from .exceptions import NumericalError, PreconditionError, ValidationError
from .linalg import (
    Weight,
    as_matrix,
    as_weight,
    block_diag,
    derived_weight,
    eye,
    fro,
    noise_floor,
    pinv,
    rel_diff,
    rel_residual,
    solve_checked,
)
from .mp import weighted_adjoint, weighted_pinv_oracle


@dataclass(frozen=True, eq=False)
class Partition2x2:
    """Four conformable blocks plus optional full weights ``M`` and ``N``.

    ``M`` is ``(k1+k2)``-square (row side), ``N`` is ``(h1+h2)``-square.
    """

    A11: np.ndarray
    A12: np.ndarray
    A21: np.ndarray
    A22: np.ndarray
    M: Weight | np.ndarray | None = None
    N: Weight | np.ndarray | None = None
    tols: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)

    def __post_init__(self):
        set_ = object.__setattr__
        blocks = {name: as_matrix(getattr(self, name), name) for name in ("A11", "A12", "A21", "A22")}
        k1, h1 = blocks["A11"].shape
        k2, h2 = blocks["A22"].shape
        want = {"A12": (k1, h2), "A21": (k2, h1)}
        for name, shape in want.items():
            if blocks[name].shape != shape:
                raise ValidationError(f"{name}: expected shape {shape}, got {blocks[name].shape}", field=name)
        for name, value in blocks.items():
            set_(self, name, value)
        if self.M is not None:
            set_(self, "M", as_weight(self.M, k1 + k2, "M", self.tols))
        if self.N is not None:
            set_(self, "N", as_weight(self.N, h1 + h2, "N", self.tols))

    @classmethod
    def split(cls, A, k1, h1, M=None, N=None, tols=DEFAULT_TOLERANCES):
        """Partition an assembled matrix after row ``k1`` and column ``h1``."""
        A = as_matrix(A)
        if not (0 <= k1 <= A.shape[0] and 0 <= h1 <= A.shape[1]):
            raise ValidationError(f"split point ({k1}, {h1}) outside a {A.shape} matrix")
        return cls(A[:k1, :h1], A[:k1, h1:], A[k1:, :h1], A[k1:, h1:], M, N, tols)

    @classmethod
    def from_weight_blocks(cls, A11, A12, A21, A22, M11, M12, M22, N11, N12, N22,
                           tols=DEFAULT_TOLERANCES):
        M11, M12, M22, N11, N12, N22 = (as_matrix(x, n) for x, n in zip(
            (M11, M12, M22, N11, N12, N22), ("M11", "M12", "M22", "N11", "N12", "N22")))
        M = np.block([[M11, M12], [M12.conj().T, M22]])
        N = np.block([[N11, N12], [N12.conj().T, N22]])
        return cls(A11, A12, A21, A22, M, N, tols)

    @property
    def k1(self):
        return self.A11.shape[0]

    @property
    def k2(self):
        return self.A22.shape[0]

    @property
    def h1(self):
        return self.A11.shape[1]

    @property
    def h2(self):
        return self.A22.shape[1]

    @property
    def weighted(self) -> bool:
        return self.M is not None or self.N is not None

    @cached_property
    def A(self) -> np.ndarray:
        return np.block([[self.A11, self.A12], [self.A21, self.A22]])

    @cached_property
    def Mw(self) -> Weight:
        return as_weight(self.M, self.k1 + self.k2, "M", self.tols)

    @cached_property
    def Nw(self) -> Weight:
        return as_weight(self.N, self.h1 + self.h2, "N", self.tols)

    @cached_property
    def SM(self) -> Weight:
        """``M22 - M12^* M11^{-1} M12``."""
        M, k = self.Mw.value, self.k1
        S = M[k:, k:] - M[:k, k:].conj().T @ np.linalg.solve(M[:k, :k], M[:k, k:]) if k else M
        return as_weight(S, name="S(M)", tols=self.tols)

    @cached_property
    def SN(self) -> Weight:
        """``N22 - N12^* N11^{-1} N12``."""
        N, h = self.Nw.value, self.h1
        S = N[h:, h:] - N[:h, h:].conj().T @ np.linalg.solve(N[:h, :h], N[:h, h:]) if h else N
        return as_weight(S, name="S(N)", tols=self.tols)

    def blocks_of(self, X):
        """Split an ``(h1+h2) x (k1+k2)`` inverse into its four blocks."""
        X = as_matrix(X, "X")
        h, k = self.h1, self.k1
        return X[:h, :k], X[:h, k:], X[h:, :k], X[h:, k:]


def _a11_pinv(p: Partition2x2, atol=0.0):
    return pinv(p.A11, p.tols.rank_rtol, atol)


def schur_a(p: Partition2x2, A11_pinv=None) -> np.ndarray:
    """``S(A) = A22 - A21 A11^dag A12``."""
    A11d = _a11_pinv(p) if A11_pinv is None else A11_pinv
    return p.A22 - p.A21 @ A11d @ p.A12


def _schur_floor(p: Partition2x2, A11d):
    scale = fro(p.A22) + fro(p.A21) * fro(A11d) * fro(p.A12)
    return noise_floor(scale, max(p.k1 + p.k2, p.h1 + p.h2))


def f_factors(p: Partition2x2, A11_pinv=None):
    """``F1 = [-A11^dag A12; I]`` and ``F2 = (-A21 A11^dag, I)``."""
    A11d = _a11_pinv(p) if A11_pinv is None else A11_pinv
    F1 = np.vstack([-A11d @ p.A12, eye(p.h2)])
    F2 = np.hstack([-p.A21 @ A11d, eye(p.k2)])
    return F1, F2


def special_case_residuals(p: Partition2x2, A11_pinv=None):
    """Relative residuals of ``(I - A11 A11^dag) A12 = 0`` and ``A21 (I - A11^dag A11) = 0``."""
    A11d = _a11_pinv(p) if A11_pinv is None else A11_pinv
    floor = p.tols.pd_tol
    r12 = rel_residual(p.A12 - p.A11 @ (A11d @ p.A12), p.A12, floor)
    r21 = rel_residual(p.A21 - (p.A21 @ A11d) @ p.A11, p.A21, floor)
    return {"(I-A11 A11^dag)A12": r12, "A21(I-A11^dag A11)": r21}


@dataclass(frozen=True)
class SpecialCaseParts:
    A11_pinv: np.ndarray
    S: np.ndarray
    F1: np.ndarray
    F2: np.ndarray
    S_g: np.ndarray
    X_L: np.ndarray
    X_R: np.ndarray
    pinv: np.ndarray


def _special_case(p: Partition2x2, hermitian=False, a11_floor=0.0) -> SpecialCaseParts:
    A11d = _a11_pinv(p, a11_floor)
    S = schur_a(p, A11d)
    F1, F2 = f_factors(p, A11d)
    if hermitian:
        F2 = F1.conj().T
    G1 = F1.conj().T @ F1          # F1^* F1, PD
    G2 = F2 @ F2.conj().T          # F2 F2^*, PD
    W1 = derived_weight(G1, "F1^*F1", p.tols)
    W2 = derived_weight(G2, "F2 F2^*", p.tols)
    S_g = weighted_pinv_oracle(S, W2.inverse, W1, atol=_schur_floor(p, A11d), tols=p.tols)
    F1_pinv = W1.inverse @ F1.conj().T
    F2_pinv = F2.conj().T @ W2.inverse
    n, m = p.h1 + p.h2, p.k1 + p.k2
    X_L = eye(n) - F1 @ (eye(p.h2) - S_g @ S) @ F1_pinv
    X_R = eye(m) - F2_pinv @ (eye(p.k2) - S @ S_g) @ F2
    D = block_diag(A11d, np.zeros((p.h2, p.k2)))
    X = X_L @ D @ X_R + F1 @ S_g @ F2
    return SpecialCaseParts(A11d, S, F1, F2, S_g, X_L, X_R, X)


def pinv_2x2_special(p: Partition2x2) -> np.ndarray:
    """``A^dag = X_L diag(A11^dag, 0) X_R + F1 S(A)^g F2``.

    Valid when ``(I - A11 A11^dag) A12 = 0`` and ``A21 (I - A11^dag A11) = 0``;
    otherwise :class:`PreconditionError` carries both residuals.
    """
    residuals = special_case_residuals(p)
    if max(residuals.values()) > p.tols.num_tol:
        raise PreconditionError("range conditions of the special case do not hold",
                                residuals=residuals, stage="special-case preconditions")
    return _special_case(p).pinv


def _check_psd(p: Partition2x2):
    A = p.A
    if A.shape[0] != A.shape[1] or p.k1 != p.h1:
        raise ValidationError("positive case needs a square matrix partitioned symmetrically")
    skew = rel_residual(A - A.conj().T, A)
    if skew > p.tols.herm_tol:
        raise ValidationError(f"A is not Hermitian (relative skew {skew:.3e})", field="A")
    if A.size:
        lam = np.linalg.eigvalsh((A + A.conj().T) / 2)
        if lam[0] < -p.tols.pd_tol * max(1.0, abs(lam[-1])):
            raise ValidationError(f"A is not positive semidefinite (eigenvalue {lam[0]:.3e})", field="A")


def _inv13(parts: SpecialCaseParts, p: Partition2x2):
    D = block_diag(parts.A11_pinv, np.zeros((p.h2, p.k2)))
    return D @ parts.X_R + parts.F1 @ parts.S_g @ parts.F1.conj().T


def pinv_2x2_positive(p: Partition2x2):
    """Pseudoinverse and a (1,3)-inverse of a Hermitian PSD block matrix.

    Returns ``(pinv, inv13)``.
    """
    _check_psd(p)
    dim = p.k1 + p.k2
    parts = _special_case(p, hermitian=True, a11_floor=noise_floor(fro(p.A), dim))
    return parts.pinv, _inv13(parts, p)


def pinv_2x2_general(p: Partition2x2) -> np.ndarray:
    """``A^dag = A^* E^{(1,3)}`` with ``E = A A^*`` partitioned by rows.

    ``E^{(1,3)}`` is the PSD-case (1,3)-inverse of ``E``; no hypothesis on
    the blocks of ``A`` is needed.
    """
    A = p.A
    k1 = p.k1
    E = A @ A.conj().T
    E11, E12, E22 = E[:k1, :k1], E[:k1, k1:], E[k1:, k1:]
    pe = Partition2x2(E11, E12, E12.conj().T, E22, tols=p.tols)
    floor = noise_floor(fro(A) ** 2, max(A.shape))
    parts = _special_case(pe, hermitian=True, a11_floor=floor)
    return A.conj().T @ _inv13(parts, pe)


@dataclass(frozen=True)
class Wmp2x2Trace:
    """Every intermediate of the weighted 2x2 pipeline."""

    a: np.ndarray
    b: np.ndarray
    SM: np.ndarray
    SN: np.ndarray
    B11: np.ndarray
    B12: np.ndarray
    B21: np.ndarray
    B22: np.ndarray
    B_sharp: np.ndarray
    E11: np.ndarray
    E12: np.ndarray
    E21: np.ndarray
    E22: np.ndarray
    E11_dag: np.ndarray
    F1E: np.ndarray
    F1E_sharp: np.ndarray
    F1E_sharp_F1E: np.ndarray
    SE: np.ndarray
    Z1: np.ndarray
    Z2: np.ndarray
    Z3: np.ndarray
    SE_g: np.ndarray
    T: np.ndarray
    D: np.ndarray
    S_tilde: np.ndarray
    C: np.ndarray
    U_tilde: np.ndarray
    F1E_sharp_dag: np.ndarray
    XRE: np.ndarray
    Bdag11: np.ndarray
    Bdag12: np.ndarray
    Bdag21: np.ndarray
    Bdag22: np.ndarray
    result: np.ndarray

    def as_dict(self):
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


class _Stage:
    """Re-raise numerical failures tagged with the pipeline stage."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, NumericalError) and exc.stage is None:
            exc.stage = self.name
        if exc is not None and isinstance(exc, ValidationError):
            raise NumericalError(f"stage {self.name}: {exc}", stage=self.name) from exc
        return False


def wpinv_2x2(p: Partition2x2):
    """``A^dag_{MN}`` of a 2x2 block matrix with 2x2-partitioned weights.

    Returns ``(result, trace)``. Missing weights are taken as identities.
    """
    tols = p.tols
    k1, k2, h1, h2 = p.k1, p.k2, p.h1, p.h2
    M, N = p.Mw.value, p.Nw.value
    M11 = derived_weight(M[:k1, :k1], "M11", tols)
    N11 = derived_weight(N[:h1, :h1], "N11", tols)
    SM, SN = p.SM, p.SN
    dim = max(k1 + k2, h1 + h2)

    with _Stage("B blocks"):
        a = N11.inverse @ N[:h1, h1:]
        b = M11.inverse @ M[:k1, k1:]
        B11 = p.A11 + b @ p.A21
        B12 = p.A12 + b @ p.A22 - p.A11 @ a - b @ p.A21 @ a
        B21 = p.A21
        B22 = p.A22 - p.A21 @ a
        B = np.block([[B11, B12], [B21, B22]])
        WM = block_diag(M11.value, SM.value)       # Z3
        WN = block_diag(N11.value, SN.value)
        B_sharp = weighted_adjoint(B, WM, WN, tols)

    with _Stage("E = B B#"):
        E = B @ B_sharp
        E11, E12, E21, E22 = E[:k1, :k1], E[:k1, k1:], E[k1:, :k1], E[k1:, k1:]
        e_scale = fro(B) * fro(B_sharp)
        E11_dag = weighted_pinv_oracle(E11, M11, M11, atol=noise_floor(e_scale, dim), tols=tols)

    with _Stage("F1(E)"):
        F1E = np.vstack([-E11_dag @ E12, eye(k2)])
        F1E_sharp = weighted_adjoint(F1E, WM, SM, tols)
        G = F1E_sharp @ F1E

    with _Stage("S(E)^g"):
        SE = E22 - E21 @ E11_dag @ E12
        Z1 = derived_weight(SM.value @ G, "Z1", tols)
        Z2 = derived_weight(SM.value @ np.linalg.inv(G), "Z2", tols)
        se_scale = fro(E22) + fro(E21) * fro(E11_dag) * fro(E12)
        SE_g = weighted_pinv_oracle(SE, Z2, Z1, atol=noise_floor(se_scale, dim), tols=tols)

    with _Stage("(F1(E)#)^dag via the 1x2 D/S~ representation"):
        T = F1E_sharp[:, :k1]
        # T = -S(M)^{-1} (E11^dag E12)^* M11 inherits the rounding of that product
        t_scale = fro(SM.inverse) * fro(E11_dag) * fro(E12) * fro(M11.value)
        t_floor = noise_floor(t_scale, dim)
        sub = Partition1x2(T, eye(k2), SM, M11, np.zeros((k1, k2)), SM.value,
                           tols=tols, a_floor=t_floor)
        parts = thm33_parts(sub)
        F1E_sharp_dag = parts.result.X
        reference = weighted_pinv_oracle(F1E_sharp, SM, WM, tols=tols)
        gap = rel_diff(F1E_sharp_dag, reference, tols.pd_tol)
        if gap > tols.cmp_tol:
            raise NumericalError(f"1x2 representation disagrees with the oracle (rel diff {gap:.3e})")

    with _Stage("X_R(E) and B^dag"):
        XRE = eye(k1 + k2) - F1E_sharp_dag @ (eye(k2) - SE @ SE_g) @ F1E_sharp
        inner = block_diag(E11_dag, np.zeros((k2, k2))) @ XRE + F1E @ SE_g @ F1E_sharp
        Bdag = B_sharp @ inner
        Bd11, Bd12, Bd21, Bd22 = Bdag[:h1, :k1], Bdag[:h1, k1:], Bdag[h1:, :k1], Bdag[h1:, k1:]

    with _Stage("reassembly"):
        X11 = Bd11 - a @ Bd21
        X12 = Bd11 @ b + Bd12 - a @ Bd21 @ b - a @ Bd22
        X21 = Bd21
        X22 = Bd21 @ b + Bd22
        result = np.block([[X11, X12], [X21, X22]])

    trace = Wmp2x2Trace(
        a=a, b=b, SM=SM.value, SN=SN.value,
        B11=B11, B12=B12, B21=B21, B22=B22, B_sharp=B_sharp,
        E11=E11, E12=E12, E21=E21, E22=E22, E11_dag=E11_dag,
        F1E=F1E, F1E_sharp=F1E_sharp, F1E_sharp_F1E=G, SE=SE,
        Z1=Z1.value, Z2=Z2.value, Z3=WM, SE_g=SE_g,
        T=T, D=parts.D, S_tilde=parts.S_tilde, C=parts.C, U_tilde=parts.U_tilde,
        F1E_sharp_dag=F1E_sharp_dag, XRE=XRE,
        Bdag11=Bd11, Bdag12=Bd12, Bdag21=Bd21, Bdag22=Bd22, result=result,
    )
    return result, trace


METHODS_2X2 = ("special", "positive", "general", "weighted")
