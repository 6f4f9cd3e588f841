"""Sampling the largest-eigenvalue process from the extended Airy block kernel,
two-time Fredholm determinants, and a matrix-level GUE diffusion reference.

The multitime kernel on a grid of times t_1 < ... < t_n and a truncated,
cell-discretized eigenvalue window assembles blocks
K^ext_{t_j, t_k}(x_a, x_b) * dx.  A path sample observes each time block from
the top cell downward until the first inclusion, records that cell midpoint,
and jumps to the next block, leaving everything below unobserved.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NoEigenvalueFound
from .fredholm import discretize, right_infinite
from .kernels import airy_kernel, extended_airy_kernel
from .linalg import PIVOT_TOL, lu_det, sym_eigen
from .samplers import _draw_outcome, _real_marginal


@dataclass(frozen=True)
class MultitimeGrid:
    """Ascending observation times and a cell discretization of the window."""

    times: tuple
    x_lo: float = -5.0
    x_hi: float = 2.5
    m_cells: int = 150

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if sorted(set(times)) != list(times):
            raise ValueError("times must be strictly ascending")
        if self.m_cells < 16:
            raise ValueError("need at least 16 cells")
        if not self.x_lo < self.x_hi:
            raise ValueError("need x_lo < x_hi")
        object.__setattr__(self, "times", times)

    @property
    def dx(self):
        return (self.x_hi - self.x_lo) / self.m_cells

    @property
    def midpoints(self):
        """Cell midpoints in ascending order."""
        return self.x_lo + (np.arange(self.m_cells) + 0.5) * self.dx

    @property
    def dimension(self):
        return len(self.times) * self.m_cells


@dataclass(frozen=True)
class BlockKernel:
    """Discretized multitime kernel; block (j, k) couples times t_j and t_k."""

    grid: MultitimeGrid
    matrix: np.ndarray = field(repr=False)


def build_block_kernel(grid):
    """Assemble the n_times x n_times block matrix of K^ext * dx.

    Blocks depend on the time difference only, so one kernel per distinct gap
    is evaluated and reused.
    """
    xs = grid.midpoints
    m = grid.m_cells
    times = grid.times
    n = len(times)
    cache = {}

    def block(tj, tk):
        gap = tj - tk
        if gap not in cache:
            cache[gap] = extended_airy_kernel(tj, tk).eval_grid(xs, xs) * grid.dx
        return cache[gap]

    out = np.empty((n * m, n * m))
    for j, tj in enumerate(times):
        for k, tk in enumerate(times):
            out[j * m : (j + 1) * m, k * m : (k + 1) * m] = block(tj, tk)
    return BlockKernel(grid=grid, matrix=out)


@dataclass(frozen=True)
class ProcessPath:
    """Largest-eigenvalue positions aligned with the grid times."""

    times: tuple
    values: tuple

    def to_csv(self, seed=None):
        lines = []
        if seed is not None:
            lines.append(f"# seed={seed}")
        lines.append("t,value")
        for t, v in zip(self.times, self.values):
            lines.append(f"{t:.17g},{v:.17g}")
        return "\n".join(lines) + "\n"


def sample_airy_path(grid, rng, kernel=None, *, tol=1e-7):
    """Sample one path of the largest-eigenvalue process on `grid`.

    Within each time block cells are observed from the top down until the
    first inclusion; the remaining cells of the block stay unobserved (valid
    under arbitrary observation order).  `kernel` may carry a prebuilt
    BlockKernel to amortize assembly over many samples.
    """
    if kernel is None:
        kernel = build_block_kernel(grid)
    work = kernel.matrix.copy()
    m = grid.m_cells
    xs = grid.midpoints
    values = []
    for j, t in enumerate(grid.times):
        found = None
        for a in range(m - 1, -1, -1):
            idx = j * m + a
            p = _real_marginal(work[idx, idx], tol)
            if _draw_outcome(p, "none", rng):
                pivot = work[idx, idx]
                found = xs[a]
            else:
                pivot = work[idx, idx] - 1.0
            if abs(pivot) >= PIVOT_TOL:
                col = work[:, idx].copy()
                row = work[idx, :].copy()
                work -= np.outer(col, row) / pivot
            work[idx, :] = 0.0
            work[:, idx] = 0.0
            if found is not None:
                break
        if found is None:
            raise NoEigenvalueFound(t)
        values.append(found)
    return ProcessPath(times=grid.times, values=tuple(values))


def two_time_prob(t_gap, s1, s2, m):
    """P(A(t) <= s1, A(t + t_gap) <= s2) via the 2x2-block Fredholm determinant.

    At t_gap = 0 the block operator degenerates (the off-diagonal branch picks
    up a delta); the probability is then the one-time CDF at min(s1, s2).
    """
    if m < 10:
        raise ValueError("need at least 10 nodes per block")
    t_gap = float(t_gap)
    if t_gap == 0.0:
        op = discretize(airy_kernel(), right_infinite(min(s1, s2)), m)
        return float(lu_det(np.eye(m) - op.a))
    k_same = airy_kernel()
    op1 = discretize(k_same, right_infinite(s1), m)
    op2 = discretize(k_same, right_infinite(s2), m)
    k12 = extended_airy_kernel(0.0, t_gap)  # row time earlier: s < t branch
    k21 = extended_airy_kernel(t_gap, 0.0)
    b12 = k12.eval_grid(op1.points, op2.points) * np.outer(op1.sqw, op2.sqw)
    b21 = k21.eval_grid(op2.points, op1.points) * np.outer(op2.sqw, op1.sqw)
    full = np.block([[op1.a, b12], [b21, op2.a]])
    return float(lu_det(np.eye(2 * m) - full))


def _gue(n, rng):
    """GUE draw with density ~ exp(-tr H^2): E H_ii^2 = E|H_ij|^2 = 1/2."""
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / (2.0 * np.sqrt(2.0))


def simulate_dbm(n, times, rng):
    """Largest-eigenvalue path of a stationary GUE diffusion, edge-rescaled.

    The matrix evolves by the exact Ornstein-Uhlenbeck transition
    H(t + dt) = rho H(t) + sqrt(1 - rho^2) G, rho = exp(-dt), whose marginals
    are GUE at every time; `times` are edge (Airy) units, converted to matrix
    time through the N^(-1/3) clock.  Returned values are
    sqrt(2) N^(1/6) (lambda_max(N^(-1/3) t) - sqrt(2N)).
    """
    if n < 2:
        raise ValueError("need matrix size >= 2")
    times = [float(t) for t in times]
    if sorted(times) != times:
        raise ValueError("times must be ascending")
    h = _gue(n, rng)
    phys = [t * n ** (-1.0 / 3.0) for t in times]
    values = []
    prev = phys[0]
    for i, tp in enumerate(phys):
        if i > 0:
            rho = np.exp(-(tp - prev))
            if rho < 1.0:
                h = rho * h + np.sqrt(1.0 - rho * rho) * _gue(n, rng)
            prev = tp
        lam_max = sym_eigen(_hermitian_to_real(h)).values[-1]
        values.append(np.sqrt(2.0) * n ** (1.0 / 6.0) * (lam_max - np.sqrt(2.0 * n)))
    return ProcessPath(times=tuple(times), values=tuple(values))


def _hermitian_to_real(h):
    """Real symmetric matrix with the same spectrum as the Hermitian h."""
    # [[Re, -Im], [Im, Re]] has each eigenvalue of h twice; the top one matches.
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])
