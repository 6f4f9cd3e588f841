"""Determinantal point process samplers, conditional kernels, Fredholm
determinants, and random-matrix eigenvalue statistics."""

__version__ = "0.1.0"

from . import aztec, airyproc, fredholm, kernels, linalg, rmtstats, samplers, specfun
from .errors import RmtDppError

__all__ = [
    "RmtDppError",
    "__version__",
    "airyproc",
    "aztec",
    "fredholm",
    "kernels",
    "linalg",
    "rmtstats",
    "samplers",
    "specfun",
]
