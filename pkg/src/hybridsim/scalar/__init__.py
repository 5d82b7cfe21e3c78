"""Generic scalars and the three gradient engines."""
from hybridsim.scalar.dual import Dual
from hybridsim.scalar.gradient import (
    EvaluationError,
    GradientMode,
    GradientRequest,
    evaluate_gradient,
    value_and_gradient,
)
from hybridsim.scalar.ops import (
    cos,
    elu,
    exp,
    fabs,
    is_plain,
    log,
    select,
    sin,
    smax0,
    sqrt,
    tanh,
    value,
)
from hybridsim.scalar.tape import Tape, TapeError, Var, tape_backward

__all__ = [
    "Dual", "EvaluationError", "GradientMode", "GradientRequest", "Tape", "TapeError",
    "Var", "cos", "elu", "evaluate_gradient", "exp", "fabs", "is_plain", "log",
    "select", "sin", "smax0", "sqrt", "tanh", "tape_backward", "value",
    "value_and_gradient",
]
