from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

ENV_PREFIX = "BLOCKPINV_"


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every routine.

    rank_rtol
        Relative singular-value cutoff for pseudoinverses. ``None`` means
        ``max(rows, cols) * eps`` of the matrix being inverted.
    herm_tol
        Relative Frobenius bound on ``W - W*`` for weights.
    pd_tol
        Absolute floor on Cholesky pivots and eigenvalues of weights; also the
        norm below which residuals are reported as absolute.
    num_tol
        Bound on the relative Penrose/identity residuals.
    cmp_tol
        Bound on the relative difference between two computations of the
        same inverse.
    cond_warn, cond_limit
        Condition numbers at which an exactly-invertible operator triggers a
        warning, and an error.
    """

    rank_rtol: float | None = None
    herm_tol: float = 1e-10
    pd_tol: float = 1e-12
    num_tol: float = 1e-8
    cmp_tol: float = 1e-8
    cond_warn: float = 1e12
    cond_limit: float = 1e15

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is not None and not value >= 0:
                raise ValueError(f"tolerance {f.name} must be nonnegative, got {value!r}")

    def with_overrides(self, **overrides) -> Tolerances:
        """Return a copy with the non-``None`` overrides applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @classmethod
    def from_env(cls, environ=None) -> Tolerances:
        """Read ``BLOCKPINV_RANK_RTOL``, ``BLOCKPINV_NUM_TOL``, ... from the environment."""
        environ = os.environ if environ is None else environ
        values = {}
        for f in fields(cls):
            raw = environ.get(ENV_PREFIX + f.name.upper())
            if raw is not None and raw.strip():
                try:
                    values[f.name] = float(raw)
                except ValueError:
                    raise ValueError(f"{ENV_PREFIX + f.name.upper()}={raw!r} is not a number") from None
        return cls(**values)


DEFAULT_TOLERANCES = Tolerances()
