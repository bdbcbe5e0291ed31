"""Numerical toolkit for free and first-order interacting QED fields written as integral-kernel operators.

Layers, bottom up: Dirac algebra, momentum and space-time test functions, plane-wave
field kernels, a Wick-product engine over kernel products, first-order interacting
fields with the order-2 tree term, and a truncated Fock space used as a brute-force
oracle.  ``qftk.cli`` drives the invariant suites in ``qftk.suites``.
"""

from .config import ChronoConfig, FockConfig, PairQuadrature, RunConfig, load_config
from .errors import ClassViolation, QuadratureError, SingularSymbolError, SpanError

__all__ = [
    "ChronoConfig",
    "ClassViolation",
    "FockConfig",
    "PairQuadrature",
    "QuadratureError",
    "RunConfig",
    "SingularSymbolError",
    "SpanError",
    "load_config",
]
__version__ = "0.1.0"
