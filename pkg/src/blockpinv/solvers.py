"""Single entry point dispatching to every representation."""

from __future__ import annotations

import numpy as np

from ._config import DEFAULT_TOLERANCES, Tolerances
from .block1x2 import METHODS_1X2, Partition1x2, wpinv_1x2_unified
from .block2x2 import Partition2x2, pinv_2x2_general, pinv_2x2_positive, pinv_2x2_special, wpinv_2x2
from .exceptions import ValidationError
from .linalg import as_matrix, as_weight, pinv
from .mp import weighted_pinv_oracle
from .reweight import reweight_pinv

UNWEIGHTED_2X2 = {
    "special": pinv_2x2_special,
    "positive": lambda p: pinv_2x2_positive(p)[0],
    "general": pinv_2x2_general,
}

METHODS = ("oracle", "svd", "reweight", *METHODS_1X2, *UNWEIGHTED_2X2, "weighted")


def _column_split(split, n):
    if split is None or isinstance(split, (tuple, list)):
        raise ValidationError("1x2 methods need an integer column split", field="split")
    p = int(split)
    if not 0 <= p <= n:
        raise ValidationError(f"column split {p} outside 0..{n}", field="split")
    return p


def _block_split(split):
    if split is None or not isinstance(split, (tuple, list)) or len(split) != 2:
        raise ValidationError("2x2 methods need a (row, column) split", field="split")
    return int(split[0]), int(split[1])


def _is_identity(W):
    return W is None or np.allclose(as_matrix(W), np.eye(as_matrix(W).shape[0]), rtol=0, atol=0)


def weighted_pinv(A, M=None, N=None, method="oracle", split=None,
                  tols: Tolerances = DEFAULT_TOLERANCES):
    """``A^dag_{MN}`` by the named method.

    ``split`` is the column count of the first block for the 1x2 methods
    (``thm32``, ``thm33``, ``unified``, ``xu``) and ``(k1, h1)`` for the 2x2
    methods. ``special``, ``positive``, ``general`` and ``svd`` are unweighted
    and reject non-identity weights.
    """
    A = as_matrix(A)
    m, n = A.shape
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}; choose from {', '.join(METHODS)}", field="method")
    if method in ("svd", *UNWEIGHTED_2X2) and not (_is_identity(M) and _is_identity(N)):
        raise ValidationError(f"method {method!r} computes the unweighted inverse; drop M and N", field="method")
    if method == "oracle":
        return weighted_pinv_oracle(A, M, N, tols=tols)
    if method == "svd":
        return pinv(A, tols.rank_rtol)
    if method == "reweight":
        return reweight_pinv(A, M, None, as_weight(N, n, "N", tols), tols=tols)
    if method in METHODS_1X2:
        p = _column_split(split, n)
        part = Partition1x2.from_weights(A[:, :p], A[:, p:], M, N, tols=tols)
        if method == "unified":
            return wpinv_1x2_unified(part).X
        return METHODS_1X2[method](part).X
    k1, h1 = _block_split(split)
    part = Partition2x2.split(A, k1, h1, M, N, tols=tols)
    if method == "weighted":
        return wpinv_2x2(part)[0]
    return UNWEIGHTED_2X2[method](part)
