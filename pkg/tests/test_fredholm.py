import numpy as np
import pytest

from rmtdpp.errors import NoConvergence, ResolventSingular
from rmtdpp.fredholm import (
    adaptive,
    discretize,
    finite,
    fredholm_det,
    left_infinite,
    resolvent_trace,
    right_infinite,
)
from rmtdpp.kernels import KernelFn, airy_kernel, condition_on, sine_kernel
from rmtdpp.specfun import hermite_phi


class ZeroKernel(KernelFn):
    label = "zero"

    def __call__(self, x, y):
        return np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y)))

    def diag(self, x):
        return np.zeros(np.shape(x))


class RankOne(KernelFn):
    """K(x, y) = phi_0(x) phi_0(y); the single eigenvalue on J is int_J phi_0^2."""

    label = "rank-one"

    def __call__(self, x, y):
        return hermite_phi(0, x) * hermite_phi(0, y)

    def diag(self, x):
        return hermite_phi(0, x) ** 2


class TestTransforms:
    def test_finite_linear(self):
        iv = finite(-1.5, 2.5)
        x, dx = iv.transform(np.array([-1.0, 0.0, 1.0]))
        assert x == pytest.approx([-1.5, 0.5, 2.5])
        assert dx == pytest.approx([2.0, 2.0, 2.0])

    def test_finite_sqrt_left(self):
        iv = finite(0.0, 4.0, sqrt_left=True)
        x, dx = iv.transform(np.array([-1.0, 0.0, 1.0]))
        assert x == pytest.approx([0.0, 1.0, 4.0])
        assert np.all(dx >= 0)

    def test_right_infinite_monotone(self):
        iv = right_infinite(2.0, scale=7.0)
        u = np.linspace(-0.999, 0.999, 50)
        x, dx = iv.transform(u)
        assert x[0] > 2.0
        assert np.all(np.diff(x) > 0)
        assert np.all(dx > 0)

    def test_left_infinite_monotone(self):
        iv = left_infinite(-1.0)
        u = np.linspace(-0.999, 0.999, 50)
        x, dx = iv.transform(u)
        assert x[-1] < -1.0
        assert np.all(np.diff(x) > 0)
        assert np.all(dx > 0)

    def test_finite_requires_order(self):
        with pytest.raises(ValueError):
            finite(2.0, 1.0)


class TestDiscretize:
    def test_zero_kernel(self):
        op = discretize(ZeroKernel(), finite(0.0, 1.0), 10)
        assert np.all(op.a == 0.0)

    def test_sine_diagonal_is_weights(self):
        op = discretize(sine_kernel(), finite(0.0, 1.0), 5)
        assert np.diagonal(op.a) == pytest.approx(op.sqw**2)

    def test_airy_symmetric(self):
        op = discretize(airy_kernel(), right_infinite(0.0), 30)
        assert np.abs(op.a - op.a.T).max() < 1e-12

    def test_points_inside(self):
        op = discretize(airy_kernel(), right_infinite(-3.0), 20)
        assert np.all(op.points > -3.0)
        assert np.all(op.sqw > 0)


class TestFredholmDet:
    def test_zero_kernel(self):
        assert fredholm_det(ZeroKernel(), finite(0.0, 1.0), 10) == 1.0

    def test_rank_one_full_mass(self):
        # int over (-8, 8) of phi_0^2 is 1 to well below 1e-10
        val = fredholm_det(RankOne(), finite(-8.0, 8.0), 60)
        assert val == pytest.approx(0.0, abs=1e-10)

    def test_airy_far_right_tail(self):
        # trace bound: int_6^inf K(x,x) dx ~ 4e-12, so det = 1 - O(trace)
        assert fredholm_det(airy_kernel(), right_infinite(6.0), 40) == pytest.approx(
            1.0, abs=1e-10
        )

    def test_value_in_unit_interval(self):
        val = fredholm_det(airy_kernel(), right_infinite(-3.0), 60)
        assert -1e-8 <= val <= 1 + 1e-8

    def test_scale_invariance(self):
        vals = [
            fredholm_det(airy_kernel(), right_infinite(-2.0, scale=c), 40)
            for c in (5.0, 10.0, 20.0)
        ]
        assert max(vals) - min(vals) < 1e-9

    def test_exponential_convergence(self):
        ref = fredholm_det(airy_kernel(), right_infinite(0.0), 200)
        errs = [
            abs(fredholm_det(airy_kernel(), right_infinite(0.0), m) - ref)
            for m in (10, 20, 40)
        ]
        assert errs[1] < 0.1 * errs[0] or errs[1] < 1e-13
        assert errs[2] < 0.1 * errs[1] or errs[2] < 1e-13


class TestResolventTrace:
    def test_zero_kernel(self):
        assert resolvent_trace(ZeroKernel(), finite(0.0, 1.0), 10) == 0.0

    def test_rank_one_half_line(self):
        # c = int_0^inf phi_0^2 = 1/2 so tr (I-K)^{-1} K = c/(1-c) = 1
        val = resolvent_trace(RankOne(), right_infinite(0.0), 80)
        assert val == pytest.approx(1.0, abs=1e-9)

    def test_airy_tail(self):
        assert abs(resolvent_trace(airy_kernel(), right_infinite(6.0), 40)) < 1e-10

    def test_matches_eigenvalue_sum(self):
        op = discretize(airy_kernel(), right_infinite(-1.0), 50)
        lam = np.linalg.eigvalsh(op.a)
        expected = np.sum(lam / (1.0 - lam))
        got = resolvent_trace(airy_kernel(), right_infinite(-1.0), 50)
        assert got == pytest.approx(expected, abs=1e-8)

    def test_singular_resolvent(self):
        class UnitRankOne(KernelFn):
            label = "unit"

            def __call__(self, x, y):
                # eigenvalue exactly 1 on (0, 1): K(x, y) = 1
                return np.ones(np.broadcast_shapes(np.shape(x), np.shape(y)))

            def diag(self, x):
                return np.ones(np.shape(x))

        with pytest.raises(ResolventSingular):
            resolvent_trace(UnitRankOne(), finite(0.0, 1.0), 20)


class TestAdaptive:
    def test_constant_returns_immediately(self):
        value, order = adaptive(lambda m: 3.25, m0=10, rtol=1e-12)
        assert value == 3.25
        assert order == 20

    def test_airy_det_converges(self):
        fn = lambda m: fredholm_det(airy_kernel(), right_infinite(0.0), m)
        value, order = adaptive(fn, m0=20, rtol=1e-10)
        assert abs(fn(20) - value) < 1e-9
        assert order <= 80

    def test_oscillating_stub_fails(self):
        with pytest.raises(NoConvergence) as err:
            adaptive(lambda m: float(int(np.log2(m)) % 2), m0=16, rtol=1e-10)
        assert err.value.best is not None

    def test_vector_convergence(self):
        fn = lambda m: np.array([1.0, 2.0 + 4.0 ** -np.log2(m)])
        value, order = adaptive(fn, m0=8, rtol=1e-6)
        assert value[0] == 1.0

    def test_rtol_floor(self):
        with pytest.raises(ValueError):
            adaptive(lambda m: 1.0, m0=8, rtol=1e-15)


def test_pinned_kernel_det_derivative_consistency():
    # d/ds det(I - K|_(s,inf)) = K(s,s) det(I - K^(s)|_(s,inf))
    k = airy_kernel()
    for s in (-2.0, 0.0):
        h = 1e-4
        fd = (
            fredholm_det(k, right_infinite(s + h), 60)
            - fredholm_det(k, right_infinite(s - h), 60)
        ) / (2 * h)
        pinned = k.diag(s) * fredholm_det(condition_on(k, [s]), right_infinite(s), 60)
        assert fd == pytest.approx(pinned, abs=2e-6)
