"""Noncontextuality-inequality violations of states prepared by measurement."""
from importlib.resources import files

from .inequality import Inequality, chsh, kcbs, parse_inequality, validate_normalization
from .operators import ObservableTuple, QuantumState

__version__ = "0.1.0"


def shipped_inequality_text(name: str) -> str:
    """Text of a bundled inequality file (``chsh`` or ``kcbs``)."""
    return files(__package__).joinpath("data", f"{name}.ineq").read_text(encoding="utf-8")


__all__ = [
    "Inequality",
    "ObservableTuple",
    "QuantumState",
    "chsh",
    "kcbs",
    "parse_inequality",
    "shipped_inequality_text",
    "validate_normalization",
]
