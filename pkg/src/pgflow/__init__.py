"""pgflow: a numerical laboratory for projected gradient flows."""

__version__ = "0.1.0"

from .errors import DivergenceError, InvalidInputError, UnsupportedObjectiveError

__all__ = [
    "DivergenceError",
    "InvalidInputError",
    "UnsupportedObjectiveError",
    "__version__",
]
