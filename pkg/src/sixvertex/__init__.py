"""Higher-spin six-vertex model: exact R-matrices, Q-operators and functional relations."""

from .scalars import ConvergenceError, Context, DomainError, PoleError
from .weights import Weight

__all__ = ["Context", "Weight", "PoleError", "ConvergenceError", "DomainError"]
__version__ = "0.1.0"
