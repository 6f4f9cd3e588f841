"""Special functions and quadrature rules.

Airy Ai / Ai', integer-order Bessel J with derivative, normalized Hermite
oscillator wavefunctions, and Gauss-Legendre rules on (-1, 1).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.special


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on (-1, 1): ascending nodes, positive weights."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray


@lru_cache(maxsize=128)
def gauss_legendre(m):
    """Return the m-point Gauss-Legendre rule, exact up to degree 2m - 1.

    Rules are cached; the returned arrays are read-only.
    """
    if m < 1:
        raise ValueError("quadrature order must be >= 1")
    nodes, weights = np.polynomial.legendre.leggauss(m)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(m, nodes, weights)


def airy(x):
    """Evaluate (Ai(x), Ai'(x)).

    Accepts scalars or arrays; underflows to 0 deep in the right tail.
    """
    ai, aip, _, _ = scipy.special.airy(x)
    return ai, aip


def hermite_phi(j, x):
    """Oscillator wavefunction phi_j(x) = exp(-x^2/2) H_j(x) / (2^j sqrt(pi) j!)^(1/2).

    Uses the normalized three-term recurrence
    phi_{j+1} = x sqrt(2/(j+1)) phi_j - sqrt(j/(j+1)) phi_{j-1},
    which keeps every intermediate bounded (no overflow for large j).
    """
    if j < 0:
        raise ValueError("wavefunction index must be >= 0")
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.pi ** (-0.25) * np.exp(-0.5 * x * x)
    for k in range(j):
        prev, cur = cur, x * np.sqrt(2.0 / (k + 1)) * cur - np.sqrt(k / (k + 1)) * prev
    return cur if cur.ndim else float(cur)


def hermite_phi_stack(n, x):
    """Stack [phi_0(x), ..., phi_{n-1}(x)] along a new leading axis."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n,) + x.shape)
    prev = np.zeros_like(x)
    cur = np.pi ** (-0.25) * np.exp(-0.5 * x * x)
    for k in range(n):
        out[k] = cur
        prev, cur = cur, x * np.sqrt(2.0 / (k + 1)) * cur - np.sqrt(k / (k + 1)) * prev
    return out


def bessel_j(alpha, x):
    """Evaluate (J_alpha(x), J_alpha'(x)) for non-negative integer order."""
    from .errors import UnsupportedOrder

    if alpha < 0 or int(alpha) != alpha:
        raise UnsupportedOrder(f"order {alpha!r} unsupported; need a non-negative integer")
    alpha = int(alpha)
    j = scipy.special.jv(alpha, x)
    jp = scipy.special.jvp(alpha, x, 1)
    return j, jp
