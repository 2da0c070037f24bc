"""The published 4x4 worked example: inputs and every printed intermediate.

All values are exact rationals; they are rendered to double only when
compared against a computed trace.
"""

from __future__ import annotations

from fractions import Fraction as F

import numpy as np

from .block2x2 import Partition2x2

GOLDEN_ATOL = 1e-10


def _f(rows):
    return [[F(x) for x in row] for row in rows]


def _diag(*blocks):
    n = sum(len(b) for b in blocks)
    out = [[F(0)] * n for _ in range(n)]
    k = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                out[k + i][k + j] = x
        k += len(b)
    return out


M = _f([[2, 0, 1, 0], [0, 1, 0, 0], [1, 0, 1, 0], [0, 0, 0, 1]])
N = _f([[2, 1, 1, 0], [1, 2, 0, 0], [1, 0, 1, 0], [0, 0, 0, 1]])
A11 = _f([[1, 0], [0, 0]])
A12 = _f([[1, -1], [1, 3]])
A21 = _f([[0, -2], [0, 0]])
A22 = _f([[0, 2], [0, 0]])

M11 = _f([[2, 0], [0, 1]])
N11 = _f([[2, 1], [1, 2]])
SM = _f([["1/2", 0], [0, 1]])
SN = _f([["1/3", 0], [0, 1]])

#: printed intermediates keyed by the field names of ``Wmp2x2Trace``
GOLDEN = {
    "SM": SM,
    "SN": SN,
    "B11": _f([[1, -1], [0, 0]]),
    "B12": _f([[0, 0], [1, 3]]),
    "B21": _f([[0, -2], [0, 0]]),
    "B22": _f([["-2/3", 2], [0, 0]]),
    "B_sharp": _f([[2, 0, "1/3", 0], [-2, 0, "-2/3", 0], [0, 3, -1, 0], [0, 3, 1, 0]]),
    "E11": _f([[4, 0], [0, 12]]),
    "E12": _f([[1, 0], [2, 0]]),
    "E21": _f([[4, 4], [0, 0]]),
    "E22": _f([[4, 0], [0, 0]]),
    "E11_dag": _f([["1/4", 0], [0, "1/12"]]),
    "F1E": _f([["-1/4", 0], ["-1/6", 0], [1, 0], [0, 1]]),
    "F1E_sharp": _f([[-1, "-1/3", 1, 0], [0, 0, 0, 1]]),
    "F1E_sharp_F1E": _f([["47/36", 0], [0, 1]]),
    "SE": _f([["7/3", 0], [0, 0]]),
    "Z1": _f([["47/72", 0], [0, 1]]),
    "Z2": _f([["18/47", 0], [0, 1]]),
    "Z3": _diag(M11, SM),
    "SE_g": _f([["3/7", 0], [0, 0]]),
    "T": _f([[-1, "-1/3"], [0, 0]]),
    "D": _f([["-9/11", 0], ["-6/11", 0]]),
    "S_tilde": _f([["47/22", 0], [0, 1]]),
    "C": _f([[0, 0], [0, 1]]),
    "U_tilde": _f([["36/47", 0], [0, 1]]),
    "F1E_sharp_dag": _f([["-9/47", 0], ["-6/47", 0], ["36/47", 0], [0, 1]]),
    "XRE": _diag(_f([[1]]), _f([[1]]), _f([[1]]), _f([[0]])),
    "Bdag11": _f([["4/7", "1/42"], ["-3/7", "1/42"]]),
    "Bdag12": _f([["-1/14", 0], ["-1/14", 0]]),
    "Bdag21": _f([["9/14", "13/28"], ["-3/14", "5/28"]]),
    "Bdag22": _f([["-9/14", 0], ["3/14", 0]]),
    "result": _f([
        ["1/7", "-2/7", "3/7", 0],
        ["-3/14", "5/28", "-11/28", 0],
        ["9/14", "13/28", "-9/28", 0],
        ["-3/14", "5/28", "3/28", 0],
    ]),
}


def to_array(rows) -> np.ndarray:
    """Render an exact rational matrix to complex doubles."""
    return np.array([[float(x) for x in row] for row in rows], dtype=np.complex128).reshape(
        len(rows), len(rows[0]) if rows else 0)


def example_partition(tols=None) -> Partition2x2:
    """The example's ``A`` blocks with its full weights ``M`` and ``N``."""
    kw = {} if tols is None else {"tols": tols}
    return Partition2x2(*(to_array(x) for x in (A11, A12, A21, A22)),
                        M=to_array(M), N=to_array(N), **kw)


def compare_trace(trace, atol=GOLDEN_ATOL):
    """Max absolute deviation of each traced intermediate from its golden value.

    Returns ``{name: (max_abs_err, ok)}`` in the golden order.
    """
    values = trace.as_dict() if hasattr(trace, "as_dict") else trace
    out = {}
    for name, gold in GOLDEN.items():
        got = np.asarray(values[name])
        want = to_array(gold)
        err = float(np.max(np.abs(got - want))) if got.shape == want.shape else float("inf")
        out[name] = (err, err <= atol)
    return out
