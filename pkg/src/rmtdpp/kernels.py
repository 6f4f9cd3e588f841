"""Correlation kernels as callable objects, plus the pinned (conditional) kernel.

Every kernel supports vectorized evaluation `K(x, y)` with numpy
broadcasting, a stable diagonal `K.diag(x)`, and grid assembly
`K.eval_grid(xs, ys)`.  Kernels in Christoffel-Darboux ratio form switch to
a second-order Taylor expansion around the diagonal for |x - y| < DIAG_EPS,
where the ratio loses precision like 1/|x - y|.
"""

import numpy as np
import scipy.linalg

from .errors import SingularGram
from .specfun import airy, bessel_j, gauss_legendre, hermite_phi_stack

#: Below this separation, ratio-form kernels use the diagonal Taylor branch.
DIAG_EPS = 1e-4


class KernelFn:
    """Callable kernel K(x, y) with a safe diagonal evaluation."""

    label = "kernel"

    def __call__(self, x, y):
        raise NotImplementedError

    def diag(self, x):
        raise NotImplementedError

    def eval_grid(self, xs, ys):
        """Kernel matrix [K(xs_i, ys_j)]; subclasses may override for speed."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        return self(xs[:, None], ys[None, :])


def _split_eval(x, y, far_fn, near_fn):
    """Evaluate with `far_fn` where |x - y| >= DIAG_EPS and `near_fn` elsewhere."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    bx, by = np.broadcast_arrays(x, y)
    scalar = bx.ndim == 0
    bx = np.atleast_1d(bx).ravel()
    by = np.atleast_1d(by).ravel()
    out = np.empty(bx.shape)
    near = np.abs(bx - by) < DIAG_EPS
    far = ~near
    if far.any():
        out[far] = far_fn(bx[far], by[far])
    if near.any():
        out[near] = near_fn(bx[near], by[near])
    if scalar:
        return float(out[0])
    return out.reshape(np.broadcast_shapes(x.shape, y.shape))


def _cd_taylor(w1, w3, delta):
    # Midpoint expansion of (F(x)G(y) - G(x)F(y))/(x - y); odd orders vanish.
    return -w1 - delta * delta * w3


class AiryKernel(KernelFn):
    """K(x, y) = (Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y)."""

    label = "airy"

    def _ratio(self, x, y):
        ax, apx = airy(x)
        ay, apy = airy(y)
        return (ax * apy - apx * ay) / (x - y)

    def _near(self, x, y):
        m = 0.5 * (x + y)
        delta = 0.5 * (y - x)
        a, ap = airy(m)
        w1 = m * a * a - ap * ap
        # W3 = (F G''' - F''' G)/6 - (F' G'' - F'' G')/2 with F=Ai, G=Ai'.
        w3 = -a * ap / 3.0 + (2.0 / 3.0) * m * (m * a * a - ap * ap)
        return _cd_taylor(w1, w3, delta)

    def __call__(self, x, y):
        return _split_eval(x, y, self._ratio, self._near)

    def diag(self, x):
        x = np.asarray(x, dtype=float)
        a, ap = airy(x)
        out = ap * ap - x * a * a
        return float(out) if out.ndim == 0 else out


class SineKernel(KernelFn):
    """K(x, y) = sin(pi (x - y)) / (pi (x - y)); translation invariant."""

    label = "sine"

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.sinc(x - y)
        return float(out) if out.ndim == 0 else out

    def diag(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 if x.ndim == 0 else np.ones_like(x)


class HermiteKernel(KernelFn):
    """Finite-N oscillator kernel sum_{j<N} phi_j(x) phi_j(y).

    Off the diagonal the Christoffel-Darboux ratio
    sqrt(N/2) (phi_N(x) phi_{N-1}(y) - phi_{N-1}(x) phi_N(y)) / (x - y)
    is used; at and near the diagonal the plain sum, which is exact and
    cancellation-free.
    """

    label = "hermite"

    def __init__(self, n):
        if n < 1:
            raise ValueError("kernel size N must be >= 1")
        self.n = int(n)
        self.label = f"hermite[{self.n}]"

    def _ratio(self, x, y):
        stack_x = hermite_phi_stack(self.n + 1, x)
        stack_y = hermite_phi_stack(self.n + 1, y)
        num = stack_x[self.n] * stack_y[self.n - 1] - stack_x[self.n - 1] * stack_y[self.n]
        return np.sqrt(self.n / 2.0) * num / (x - y)

    def _near(self, x, y):
        sx = hermite_phi_stack(self.n, x)
        sy = hermite_phi_stack(self.n, y)
        return np.sum(sx * sy, axis=0)

    def __call__(self, x, y):
        return _split_eval(x, y, self._ratio, self._near)

    def diag(self, x):
        x = np.asarray(x, dtype=float)
        s = hermite_phi_stack(self.n, x)
        out = np.sum(s * s, axis=0)
        return float(out) if out.ndim == 0 else out


class BesselKernel(KernelFn):
    """Hard-edge kernel on (0, inf)^2 for integer order alpha.

    K(x, y) = [J_a(u) v J_a'(v) - u J_a'(u) J_a(v)] / (2 (x - y)) with
    u = sqrt(x), v = sqrt(y).  The diagonal is
    [J_a^2 - J_{a+1} J_{a-1}] / 4 (alpha >= 1) and [J_0^2 + J_1^2] / 4 for
    alpha = 0.  The near-diagonal branch expands the ratio in t = sqrt(x),
    where the kernel is Christoffel-Darboux in F = J_a(t), G = t J_a'(t).
    """

    label = "bessel"

    def __init__(self, alpha):
        from .errors import UnsupportedOrder

        if alpha < 0 or int(alpha) != alpha:
            raise UnsupportedOrder(f"order {alpha!r} unsupported")
        self.alpha = int(alpha)
        self.label = f"bessel[{self.alpha}]"

    def _ratio(self, x, y):
        u = np.sqrt(x)
        v = np.sqrt(y)
        ju, jpu = bessel_j(self.alpha, u)
        jv_, jpv = bessel_j(self.alpha, v)
        return (ju * v * jpv - u * jpu * jv_) / (2.0 * (x - y))

    def _near(self, x, y):
        a2 = float(self.alpha * self.alpha)
        u = np.sqrt(np.maximum(x, 0.0))
        v = np.sqrt(np.maximum(y, 0.0))
        t = 0.5 * (u + v)
        t = np.maximum(t, 1e-150)  # x = y = 0 exactly; kernel value is 0 there
        delta = 0.5 * (v - u)
        j, jp = bessel_j(self.alpha, t)
        # Derivative stack of F = J(t), G = t J'(t) from the Bessel ODE.
        w1 = -t * ((1.0 - a2 / (t * t)) * j * j + jp * jp)
        f0, f1 = j, jp
        f2 = -jp / t - (1.0 - a2 / (t * t)) * j
        f3 = jp * ((2.0 + a2) / t**2 - 1.0) + j * (1.0 / t - 3.0 * a2 / t**3)
        g0 = t * jp
        g1 = -(t - a2 / t) * j
        g2 = -(1.0 + a2 / (t * t)) * j - (t - a2 / t) * jp
        g3 = jp * (-1.0 - 3.0 * a2 / t**2) + j * (
            t - 2.0 * a2 / t + (2.0 * a2 + a2 * a2) / t**3
        )
        w3 = (f0 * g3 - f3 * g0) / 6.0 - (f1 * g2 - f2 * g1) / 2.0
        return _cd_taylor(w1, w3, delta) / (4.0 * t)

    def __call__(self, x, y):
        return _split_eval(x, y, self._ratio, self._near)

    def diag(self, x):
        x = np.asarray(x, dtype=float)
        t = np.sqrt(x)
        if self.alpha == 0:
            j0, _ = bessel_j(0, t)
            j1, _ = bessel_j(1, t)
            out = (j0 * j0 + j1 * j1) / 4.0
        else:
            ja, _ = bessel_j(self.alpha, t)
            jm, _ = bessel_j(self.alpha - 1, t)
            jp_, _ = bessel_j(self.alpha + 1, t)
            out = (ja * ja - jp_ * jm) / 4.0
        return float(out) if out.ndim == 0 else out


class PinnedKernel(KernelFn):
    """Kernel conditioned on points existing at the pin locations.

    eval(x, y) = K(x, y) - k_x G^{-1} k_y with k_x = (K(x, s_1), ..., K(x, s_m))
    and G the Gram block [K(s_i, s_j)], held as a pivoted LU factorization.
    Rows and columns through every pin vanish identically.
    """

    label = "pinned"

    def __init__(self, base, pins):
        pins = np.atleast_1d(np.asarray(pins, dtype=float))
        if pins.ndim != 1 or pins.size == 0:
            raise ValueError("pins must be a non-empty 1-D sequence")
        if np.unique(pins).size != pins.size:
            raise SingularGram("pins must be distinct")
        self.base = base
        self.pins = pins
        gram = base.eval_grid(pins, pins)
        np.fill_diagonal(gram, base.diag(pins))
        try:
            lu, piv = scipy.linalg.lu_factor(gram, check_finite=False)
        except (scipy.linalg.LinAlgError, ValueError) as exc:
            raise SingularGram(str(exc)) from exc
        d = np.abs(np.diag(lu))
        if not np.all(np.isfinite(d)) or d.min() <= 1e-12 * max(d.max(), 1e-300):
            raise SingularGram(
                f"Gram condition estimate beyond 1e12 for pins {pins.tolist()}"
            )
        self._gram_lu = (lu, piv)
        self.label = f"pinned({base.label}; m={pins.size})"

    def _solve(self, rhs):
        return scipy.linalg.lu_solve(self._gram_lu, rhs, check_finite=False)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(x.shape, y.shape)
        bx = np.broadcast_to(x, shape).ravel()
        by = np.broadcast_to(y, shape).ravel()
        base = np.atleast_1d(np.asarray(self.base(bx, by), dtype=float))
        kx = self.base(bx[:, None], self.pins[None, :])
        ky = self.base(self.pins[None, :], by[:, None])
        corr = np.einsum("sp,ps->s", kx, self._solve(ky.T))
        out = base - corr
        if shape == ():
            return float(out[0])
        return out.reshape(shape)

    def diag(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        bx = np.atleast_1d(x).ravel()
        base = np.atleast_1d(self.base.diag(bx))
        kx = self.base(bx[:, None], self.pins[None, :])
        ky = self.base(self.pins[None, :], bx[:, None])
        corr = np.einsum("sp,ps->s", kx, self._solve(ky.T))
        out = base - corr
        return float(out[0]) if scalar else out.reshape(x.shape)

    def eval_grid(self, xs, ys):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        base = self.base.eval_grid(xs, ys)
        kx = self.base(xs[:, None], self.pins[None, :])
        ky = self.base(self.pins[:, None], ys[None, :])
        return base - kx @ self._solve(ky)


def hermite_kernel(n):
    """Finite-GUE kernel of size N."""
    return HermiteKernel(n)


def airy_kernel():
    """Soft-edge kernel."""
    return AiryKernel()


def sine_kernel():
    """Bulk kernel with mean spacing 1."""
    return SineKernel()


def bessel_kernel(alpha):
    """Hard-edge kernel with integer parameter alpha."""
    return BesselKernel(alpha)


def condition_on(base, pins):
    """Condition `base` on points existing at `pins` (Schur-complement kernel)."""
    return PinnedKernel(base, pins)


class ExtendedAiryKernel(KernelFn):
    """Two-time extension of the Airy kernel.

    For s >= t:  integral over lambda in (0, inf) of
                 exp(-lambda (s - t)) Ai(x + lambda) Ai(y + lambda);
    for s < t:   minus the same integral over (-inf, 0).
    Evaluation precomputes quadrature offsets o_q and signed coefficients c_q
    so that K(x, y) = sum_q c_q Ai(x + o_q) Ai(y + o_q).
    """

    label = "ext-airy"

    #: nodes per unit interval for the truncated s < t branch
    NODES_PER_UNIT = 80
    #: nodes for the algebraically mapped s >= t branch
    NODES_HALFLINE = 80

    def __init__(self, s, t):
        self.s = float(s)
        self.t = float(t)
        gap = self.s - self.t
        if gap == 0.0:
            raise ValueError("use airy_kernel() for equal times")
        if gap > 0:
            # lambda = sigma / (1 - sigma) on sigma in (0, 1)
            rule = gauss_legendre(self.NODES_HALFLINE)
            sigma = 0.5 * (rule.nodes + 1.0)
            w = 0.5 * rule.weights
            lam = sigma / (1.0 - sigma)
            jac = 1.0 / (1.0 - sigma) ** 2
            self.offsets = lam
            self.coeffs = w * jac * np.exp(-lam * gap)
        else:
            # mu = -lambda on (0, Lambda), truncated where exp(-mu (t-s)) <= 1e-16
            width = -gap
            lam_max = max(1, int(np.ceil(37.0 / width)))
            rule = gauss_legendre(self.NODES_PER_UNIT)
            base = 0.5 * (rule.nodes + 1.0)
            mu = (np.arange(lam_max)[:, None] + base[None, :]).ravel()
            w = np.broadcast_to(0.5 * rule.weights, (lam_max, rule.order)).ravel()
            self.offsets = -mu
            self.coeffs = -w * np.exp(-mu * width)
        self.label = f"ext-airy[{self.s}->{self.t}]"

    def _sum(self, xs, ys):
        # K = (AX * c) @ AY.T with AX[i, q] = Ai(xs_i + o_q)
        ax, _ = airy(xs[:, None] + self.offsets[None, :])
        ay, _ = airy(ys[:, None] + self.offsets[None, :])
        return (ax * self.coeffs) @ ay.T

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(x.shape, y.shape)
        bx = np.broadcast_to(x, shape).ravel()
        by = np.broadcast_to(y, shape).ravel()
        ax, _ = airy(bx[:, None] + self.offsets[None, :])
        ay, _ = airy(by[:, None] + self.offsets[None, :])
        out = np.einsum("sq,q,sq->s", ax, self.coeffs, ay)
        if shape == ():
            return float(out[0])
        return out.reshape(shape)

    def diag(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        bx = np.atleast_1d(x).ravel()
        ax, _ = airy(bx[:, None] + self.offsets[None, :])
        out = np.einsum("sq,q->s", ax * ax, self.coeffs)
        return float(out[0]) if scalar else out.reshape(x.shape)

    def eval_grid(self, xs, ys):
        return self._sum(np.asarray(xs, float), np.asarray(ys, float))


def extended_airy_kernel(s, t):
    """Extended Airy kernel at time pair (s, t); equal times give the Airy kernel."""
    if float(s) == float(t):
        return airy_kernel()
    return ExtendedAiryKernel(s, t)
