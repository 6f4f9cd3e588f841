"""Dense linear algebra primitives for the samplers and Fredholm machinery.

Elimination (Schur) steps and block Schur complements are written out
explicitly since the observation index doubles as the pivot; determinants,
solves and the symmetric eigensolver delegate to LAPACK.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    NoConvergence,
    PivotTooSmall,
    Singular,
    SingularPinnedBlock,
    ZeroRow,
)

#: Pivots below this magnitude signal a (near-)deterministic observation.
PIVOT_TOL = 1e-12


def as_matrix(a, *, square=False, real=False):
    """Validate and return a 2-D array: finite entries, optionally square/real."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if real and np.iscomplexobj(a):
        raise ValueError("expected a real matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return a


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


def schur_step(a, i, shift=0.0):
    """One elimination step with pivot a[i, i] - shift.

    Returns a copy where a[r, c] -= a[r, i] * a[i, c] / pivot for r, c != i
    and row/column i are zeroed out (consumed).  No pivoting: the caller's
    observation index *is* the pivot.
    """
    a = as_matrix(a, square=True).astype(np.result_type(a, float)).copy()
    return schur_step_inplace(a, i, shift)


def schur_step_inplace(a, i, shift=0.0):
    """In-place variant of :func:`schur_step`; returns its argument."""
    p = a[i, i] - shift
    if abs(p) < PIVOT_TOL:
        raise PivotTooSmall(abs(p))
    col = a[:, i].copy()
    row = a[i, :].copy()
    a -= np.outer(col, row) / p
    a[i, :] = 0.0
    a[:, i] = 0.0
    return a


def block_schur(a, pinned, shift=0.0):
    """Schur complement K_BB - K_BA (K_AA - shift I)^-1 K_AB on the complement B.

    Equals iterated `schur_step` over the pinned indices in any order.
    """
    a = as_matrix(a, square=True)
    n = a.shape[0]
    pinned = sorted(set(int(i) for i in pinned))
    if any(i < 0 or i >= n for i in pinned):
        raise ValueError("pinned index out of range")
    keep = [i for i in range(n) if i not in pinned]
    block = a[np.ix_(pinned, pinned)] - shift * np.eye(len(pinned), dtype=a.dtype)
    try:
        lu, piv = scipy.linalg.lu_factor(block, check_finite=False)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularPinnedBlock(str(exc)) from exc
    d = np.abs(np.diag(lu))
    if d.min() <= 1e-13 * max(d.max(), 1.0):
        raise SingularPinnedBlock(
            f"pinned block pivot ratio {d.min():.3e}/{d.max():.3e}"
        )
    x = scipy.linalg.lu_solve((lu, piv), a[np.ix_(pinned, keep)], check_finite=False)
    return a[np.ix_(keep, keep)] - a[np.ix_(keep, pinned)] @ x


def householder_compress(y, row):
    """Right-multiply Y by an orthogonal Q so row `row` becomes (||row||, 0, ..., 0).

    Orthonormal columns stay orthonormal and all row norms are preserved.
    """
    y = as_matrix(y, real=True).astype(float)
    v = y[row].copy()
    nrm = np.linalg.norm(v)
    if nrm < 1e-14:
        raise ZeroRow(f"row {row} has norm {nrm:.3e}")
    sign = 1.0 if v[0] >= 0 else -1.0
    w = v.copy()
    w[0] += sign * nrm
    beta = 2.0 / (w @ w)
    out = y - beta * np.outer(y @ w, w)
    # The reflection lands the row on -sign * ||v|| e1; flip column 1 to get +.
    out[:, 0] *= -sign
    return out


def sym_eigen(a):
    """Eigendecomposition of a real symmetric matrix, values ascending.

    Asymmetry up to 1e-12 * ||A|| is symmetrized away; larger asymmetry is an
    error.  Tridiagonalization plus implicitly shifted QL runs inside LAPACK.
    """
    a = as_matrix(a, square=True, real=True).astype(float)
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > 1e-12 * scale:
        raise ValueError("matrix is not symmetric to working tolerance")
    a = 0.5 * (a + a.T)
    try:
        values, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigensolver failed: {exc}") from exc
    return EigenDecomposition(values=values, vectors=vectors)


def _lu(a):
    a = as_matrix(a, square=True)
    try:
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise Singular(str(exc)) from exc
    return lu, piv


def lu_det(a):
    """Determinant via partially pivoted LU, sign tracked through the swaps."""
    lu, piv = _lu(a)
    d = np.diag(lu)
    if np.abs(d).min() < 1e-300:
        raise Singular("pivot underflow in LU determinant")
    swaps = int(np.sum(piv != np.arange(len(piv))))
    det = np.prod(d) * (-1.0) ** swaps
    return det if np.iscomplexobj(lu) else float(det)


def lu_solve(a, b):
    """Solve A X = B with partial pivoting."""
    lu, piv = _lu(a)
    if np.abs(np.diag(lu)).min() < 1e-300:
        raise Singular("pivot underflow in LU solve")
    b = np.asarray(b)
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
