"""Exception types raised by the numerical routines and samplers."""


class RmtDppError(Exception):
    """Base class for all library-specific failures."""


class PivotTooSmall(RmtDppError):
    """Elimination pivot below tolerance; the outcome is (near-)deterministic."""

    def __init__(self, magnitude):
        super().__init__(f"pivot magnitude {magnitude:.3e} below tolerance")
        self.magnitude = magnitude


class SingularPinnedBlock(RmtDppError):
    """The pinned diagonal block (K_AA - shift*I) is numerically singular."""


class ZeroRow(RmtDppError):
    """Row selected for a Householder reflection has (near-)zero norm."""


class Singular(RmtDppError):
    """Matrix is numerically singular (pivot underflow in the LU sweep)."""


class NoConvergence(RmtDppError):
    """Iteration failed to converge; `best` carries the last value seen."""

    def __init__(self, message, best=None, order=None):
        super().__init__(message)
        self.best = best
        self.order = order


class UnsupportedOrder(RmtDppError):
    """Bessel order outside the supported (non-negative integer) set."""


class SingularGram(RmtDppError):
    """Gram matrix of the pin locations is numerically singular."""


class ResolventSingular(RmtDppError):
    """I - A is numerically singular; the resolvent trace is undefined."""


class InvalidMarginal(RmtDppError):
    """A diagonal entry left [0, 1] beyond tolerance during sampling."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ForcedImpossible(RmtDppError):
    """A forced outcome has (near-)zero probability under the current kernel."""


class NotOrthonormal(RmtDppError):
    """Input columns are not orthonormal to the required tolerance."""


class SpectrumOutOfRange(RmtDppError):
    """Kernel eigenvalues leave [0, 1] beyond tolerance."""


class NotProjection(RmtDppError):
    """Kernel fails the K @ K = K projection test."""


class NumericalBreakdown(RmtDppError):
    """Sampler state degraded beyond repair (rank deficiency mid-stream)."""


class SingularKasteleyn(RmtDppError):
    """Kasteleyn matrix inversion failed; indicates an internal bug."""


class MalformedTiling(RmtDppError):
    """Path stitching branched or left dominoes unconsumed."""


class DeadEnd(RmtDppError):
    """No candidate domino observed `in`; must not occur for valid kernels."""


class NoEigenvalueFound(RmtDppError):
    """A whole time block observed `out`; the path cannot be recorded there."""

    def __init__(self, time):
        super().__init__(f"no eigenvalue found in the block at t={time}")
        self.time = time
