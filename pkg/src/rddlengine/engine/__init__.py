"""Expression evaluation, sampling and matrix algebra."""
from .evaluator import EvalContext, compile_expr, evaluate
from .matrix import det, inverse
from .rng import RandomSource

__all__ = ["EvalContext", "compile_expr", "evaluate", "det", "inverse",
           "RandomSource"]
