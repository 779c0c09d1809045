from .dual import Dual, jacobian_dual
from .expression import parse, tokenize
from .maps import (
    DifferentiableMap,
    expression_strings,
    jacobian_fd,
    mixed_close,
    mixed_error,
    parse_expression_map,
)
from .newton import (
    LocalDiffeo,
    NewtonResult,
    newton_invert,
    newton_solve,
    parametrized_newton,
)

__all__ = [
    "Dual",
    "jacobian_dual",
    "parse",
    "tokenize",
    "DifferentiableMap",
    "expression_strings",
    "jacobian_fd",
    "mixed_close",
    "mixed_error",
    "parse_expression_map",
    "LocalDiffeo",
    "NewtonResult",
    "newton_invert",
    "newton_solve",
    "parametrized_newton",
]
