"""Exact DPP samplers.

Four routines cover the kernel taxonomy: orthogonal projection
(`sample_ortho_proj`), Hermitian via eigendecomposition + projection mixture
(`sample_hermitian`), general kernels through Bernoulli observations and
rank-one Schur updates (`sample_general` / `DppState`), and non-Hermitian
projections through categorical draws with the same updates
(`sample_nonherm_proj`).  `IncrementalObserver` provides the lazily grown
LU state used for partial sampling against on-demand kernel entries.
"""

import numpy as np
import scipy.linalg

from .errors import (
    DeadEnd,
    ForcedImpossible,
    InvalidMarginal,
    NotOrthonormal,
    NotProjection,
    NumericalBreakdown,
    SpectrumOutOfRange,
)
from .linalg import PIVOT_TOL, as_matrix, householder_compress, sym_eigen

#: diagonal entries may leave [0, 1] by at most this much for valid kernels
MARGINAL_TOL = 1e-9


def make_rng(seed):
    """Counter-based generator (Philox) for a 64-bit seed; fully reproducible."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def spawn_rng(seed, stream):
    """Independent stream `stream` of `seed`; Philox key layout (seed, stream)."""
    return np.random.Generator(
        np.random.Philox(key=np.array([seed, stream], dtype=np.uint64))
    )


def _real_marginal(value, tol):
    """Validated Bernoulli parameter from a possibly-complex diagonal entry."""
    if np.iscomplexobj(value):
        if abs(value.imag) > 1e-9:
            raise InvalidMarginal(
                f"diagonal entry has imaginary part {value.imag:.3e}"
            )
        value = value.real
    value = float(value)
    if value < -tol or value > 1.0 + tol:
        raise InvalidMarginal(f"diagonal entry {value!r} outside [0, 1]")
    return min(max(value, 0.0), 1.0)


def _draw_outcome(p, force, rng):
    """Bernoulli(p) with forcing; near-deterministic p short-circuits the draw."""
    if force == "in":
        if p <= PIVOT_TOL:
            raise ForcedImpossible(f"cannot force inclusion at probability {p:.3e}")
        return True
    if force == "out":
        if 1.0 - p <= PIVOT_TOL:
            raise ForcedImpossible(f"cannot force exclusion at probability {p:.3e}")
        return False
    if force not in (None, "none"):
        raise ValueError(f"unknown force value {force!r}")
    if p < PIVOT_TOL:
        return False
    if 1.0 - p < PIVOT_TOL:
        return True
    return bool(rng.random() < p)


class DppState:
    """Mutable sampling state: working kernel copy, consumed set, observation log."""

    def __init__(self, kernel, rng, *, tol=MARGINAL_TOL):
        kernel = as_matrix(kernel, square=True)
        self.working = kernel.astype(
            complex if np.iscomplexobj(kernel) else float, copy=True
        )
        self.rng = rng
        self.tol = tol
        self.consumed = np.zeros(kernel.shape[0], dtype=bool)
        self.log = []

    def observe(self, i, force="none"):
        """Observe index i; returns True for `in`.  Updates the working kernel.

        Outcome `in` applies the Schur step with pivot K[i, i]; `out` shifts
        the pivot by -1 first (conditioning on exclusion).
        """
        i = int(i)
        if self.consumed[i]:
            raise ValueError(f"index {i} was already observed")
        try:
            p = _real_marginal(self.working[i, i], self.tol)
        except InvalidMarginal as exc:
            raise InvalidMarginal(str(exc), step=i) from exc
        outcome = _draw_outcome(p, force, self.rng)
        pivot = self.working[i, i] - (0.0 if outcome else 1.0)
        if abs(pivot) < PIVOT_TOL:
            # Degenerate complement; the conditional law of the rest is unchanged.
            self.working[i, :] = 0.0
            self.working[:, i] = 0.0
        else:
            col = self.working[:, i].copy()
            row = self.working[i, :].copy()
            self.working -= np.outer(col, row) / pivot
            self.working[i, :] = 0.0
            self.working[:, i] = 0.0
        self.consumed[i] = True
        self.log.append((i, outcome, force in ("in", "out")))
        return outcome


def sample_general(kernel, rng, order=None):
    """Sample from a general (possibly non-Hermitian) DPP by LU observations.

    `order` fixes the observation sequence; any order yields the same law.
    Returns the sorted array of included indices.
    """
    kernel = as_matrix(kernel, square=True)
    n = kernel.shape[0]
    if order is None:
        order = range(n)
    state = DppState(kernel, rng)
    return np.array(
        sorted(i for i in order if state.observe(i)), dtype=np.intp
    )


def sample_ortho_proj(y, rng):
    """Sample from the projection DPP with kernel Y Y^T, Y orthonormal columns.

    Draws exactly r = #columns indices: categorical on squared row norms,
    then a Householder compression and a column drop.
    """
    y = as_matrix(y, real=True).astype(float, copy=True)
    n, r = y.shape
    if r:
        gram = y.T @ y
        if np.abs(gram - np.eye(r)).max() > 1e-10:
            raise NotOrthonormal("columns of Y are not orthonormal to 1e-10")
    picked = []
    for step in range(r):
        remaining = r - step
        norms = np.einsum("ij,ij->i", y, y)
        cum = np.cumsum(np.maximum(norms, 0.0))
        j = int(np.searchsorted(cum, rng.random() * remaining))
        j = min(j, n - 1)
        picked.append(j)
        y = householder_compress(y, j)[:, 1:]
    return np.array(sorted(picked), dtype=np.intp)


def sample_hermitian(kernel, rng):
    """Sample from a Hermitian DPP: Bernoulli thinning of the eigenvalues,
    then the orthogonal-projection sampler on the retained eigenvectors."""
    eig = sym_eigen(kernel)
    lam = eig.values
    if lam.min() < -MARGINAL_TOL or lam.max() > 1.0 + MARGINAL_TOL:
        raise SpectrumOutOfRange(
            f"eigenvalues in [{lam.min():.3e}, {lam.max():.3e}] leave [0, 1]"
        )
    mask = rng.random(lam.size) < np.clip(lam, 0.0, 1.0)
    if not mask.any():
        return np.array([], dtype=np.intp)
    return sample_ortho_proj(eig.vectors[:, mask], rng)


def sample_nonherm_proj(kernel, rng):
    """Sample from a (possibly non-Hermitian, complex) projection DPP.

    Per step: categorical draw with P(j) = K[j, j] / (remaining rank), then
    the rank-one update K -= K[:, j] K[j, :] / K[j, j].
    """
    kernel = as_matrix(kernel, square=True)
    work = kernel.astype(complex, copy=True)
    n = work.shape[0]
    scale = max(1.0, float(np.abs(work).max()))
    if np.abs(work @ work - work).max() > 1e-8 * scale:
        raise NotProjection("kernel fails K @ K = K within 1e-8")
    diag = np.diagonal(work)
    if np.abs(diag.imag).max() > 1e-10:
        raise NotProjection("projection kernel has non-real diagonal entries")
    if diag.real.min() < -MARGINAL_TOL or diag.real.max() > 1.0 + MARGINAL_TOL:
        raise NotProjection("diagonal entries leave [0, 1]")
    rank = int(round(float(np.trace(work).real)))
    picked = []
    for step in range(rank):
        remaining = rank - step
        d = np.diagonal(work).real
        if d.max() < PIVOT_TOL:
            raise NumericalBreakdown(f"rank deficiency at step {step}")
        cum = np.cumsum(np.clip(d, 0.0, None))
        j = int(np.searchsorted(cum, rng.random() * remaining))
        j = min(j, n - 1)
        pivot = work[j, j]
        if abs(pivot) < PIVOT_TOL:
            raise NumericalBreakdown(f"zero pivot drawn at step {step}")
        col = work[:, j].copy()
        row = work[j, :].copy()
        work -= np.outer(col, row) / pivot
        work[j, :] = 0.0
        work[:, j] = 0.0
        picked.append(j)
    return np.array(sorted(picked), dtype=np.intp)


def sample_gue_positions(n, rng, *, m=None, half_width=None):
    """Sample the N-point GUE spectrum via its projection DPP.

    The rank-N oscillator-wavefunction kernel is discretized on a
    Gauss-Legendre grid wide enough that quadrature orthonormality holds to
    1e-10; returned values are the drawn node positions.
    """
    from .specfun import gauss_legendre, hermite_phi_stack

    half_width = half_width or (np.sqrt(2.0 * n) + 6.0)
    m = m or max(256, 8 * n)
    rule = gauss_legendre(m)
    x = half_width * rule.nodes
    w = half_width * rule.weights
    y = (hermite_phi_stack(n, x) * np.sqrt(w)).T
    idx = sample_ortho_proj(y, rng)
    return x[idx]


class IncrementalObserver:
    """Observation state over on-demand kernel entries, grown lazily.

    Maintains the unpivoted LU factorization of the observed principal block
    (with exclusion shifts folded into the pivots), so the marginal of a new
    index costs two triangular solves against the current factors.  Working
    state is O(observations^2) regardless of the full kernel size.
    """

    def __init__(self, entry_fn, rng, *, dtype=complex, tol=MARGINAL_TOL):
        self.entry = entry_fn
        self.rng = rng
        self.tol = tol
        self.dtype = dtype
        self.keys = []
        self.log = []
        cap = 16
        self._lower = np.zeros((cap, cap), dtype=dtype)
        self._upper = np.zeros((cap, cap), dtype=dtype)

    def _grow(self, need):
        cap = self._lower.shape[0]
        if need <= cap:
            return
        new_cap = max(need, 2 * cap)
        for name in ("_lower", "_upper"):
            old = getattr(self, name)
            fresh = np.zeros((new_cap, new_cap), dtype=self.dtype)
            fresh[: old.shape[0], : old.shape[1]] = old
            setattr(self, name, fresh)

    def _factors(self, j):
        t = len(self.keys)
        kcol = np.array([self.entry(o, j) for o in self.keys], dtype=self.dtype)
        krow = np.array([self.entry(j, o) for o in self.keys], dtype=self.dtype)
        if t:
            ucol = scipy.linalg.solve_triangular(
                self._lower[:t, :t], kcol, lower=True, unit_diagonal=True,
                check_finite=False,
            )
            lrow = scipy.linalg.solve_triangular(
                self._upper[:t, :t].T, krow, lower=True, check_finite=False
            )
        else:
            ucol = kcol
            lrow = krow
        marginal = self.entry(j, j) - lrow @ ucol
        return marginal, ucol, lrow

    def marginal(self, j):
        """Inclusion probability of index j given all observations so far."""
        marginal, _, _ = self._factors(j)
        return _real_marginal(marginal, self.tol)

    def observe(self, j, force="none"):
        """Observe index j (never seen before); returns True for `in`."""
        if j in self.keys:
            raise ValueError(f"index {j} was already observed")
        marginal, ucol, lrow = self._factors(j)
        p = _real_marginal(marginal, self.tol)
        outcome = _draw_outcome(p, force, self.rng)
        pivot = marginal - (0.0 if outcome else 1.0)
        if abs(pivot) < PIVOT_TOL:
            # Unreachable for valid kernels: the short-circuit in _draw_outcome
            # pairs near-0/1 marginals with the non-degenerate branch.
            raise NumericalBreakdown(f"degenerate pivot {pivot!r} at index {j}")
        t = len(self.keys)
        self._grow(t + 1)
        self._lower[t, :t] = lrow
        self._lower[t, t] = 1.0
        self._upper[:t, t] = ucol
        self._upper[t, t] = pivot
        self.keys.append(j)
        self.log.append((j, outcome, force in ("in", "out")))
        return outcome

    def observe_first_in(self, candidates, force=None):
        """Observe candidates in order until one comes up `in`; return it.

        Raises DeadEnd if every candidate observes `out`.
        """
        for j in candidates:
            if self.observe(j):
                return j
        raise DeadEnd(f"all of {list(candidates)} observed out")
