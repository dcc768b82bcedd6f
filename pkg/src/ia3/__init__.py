"""Interference-alignment workbench for the 3-user MxN MIMO interference channel.

Builds precoding schemes (zero-forcing, nullspace intersection, chained
alignment with depth parameter), certifies them by rank and leakage, and
evaluates the exact rational DoF bounds and planner that go with them.
"""

__version__ = "0.1.0"

from .errors import (
    InfeasibleError,
    InvalidInputError,
    NotCertifiableError,
    RegimeError,
)

__all__ = [
    "__version__",
    "InvalidInputError",
    "RegimeError",
    "InfeasibleError",
    "NotCertifiableError",
]
