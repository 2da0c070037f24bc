"""Weighted Moore-Penrose inverses of partitioned complex matrices."""

from ._config import DEFAULT_TOLERANCES, Tolerances
from .block1x2 import (
    BlockColumn,
    Partition1x2,
    complement_c,
    wpinv_1x2_thm32,
    wpinv_1x2_thm33,
    wpinv_1x2_unified,
    wpinv_1x2_via_thm32,
    wpinv_1x2_xu,
)
from .block2x2 import (
    Partition2x2,
    Wmp2x2Trace,
    f_factors,
    pinv_2x2_general,
    pinv_2x2_positive,
    pinv_2x2_special,
    schur_a,
    wpinv_2x2,
)
from .exceptions import (
    BlockPinvError,
    IllConditionedWarning,
    NotPositiveDefiniteError,
    NumericalError,
    PreconditionError,
    ValidationError,
)
from .linalg import Weight, adjoint, pinv, solve_pd, sqrt_pd
from .mp import (
    PenroseResiduals,
    characterization_check,
    is_13_inverse,
    pinv_via_13,
    verify_penrose,
    weighted_adjoint,
    weighted_pinv_oracle,
)
from .reweight import reweight_operator, reweight_pinv
from .solvers import METHODS, weighted_pinv
from .estimator import WeightedLeastSquares, WeightedPinv
from .io import ProblemFile, load_problem, save_problem

__version__ = "0.1.0"
