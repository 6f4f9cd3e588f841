import numpy as np
import pytest

from rmtdpp.errors import UnsupportedOrder
from rmtdpp.specfun import airy, bessel_j, gauss_legendre, hermite_phi


def test_airy_at_zero():
    ai, aip = airy(0.0)
    assert ai == pytest.approx(0.355028053887817, abs=1e-14)
    assert aip == pytest.approx(-0.258819403792807, abs=1e-14)


@pytest.mark.parametrize("x", [-5.0, 0.0, 5.0])
def test_airy_ode_residual(x):
    # Ai'' = x Ai via second central differences
    h = 1e-3
    second = (airy(x + h)[0] - 2 * airy(x)[0] + airy(x - h)[0]) / h**2
    assert abs(second - x * airy(x)[0]) < 1e-6


def test_airy_ode_residual_grid():
    xs = np.linspace(-10.0, 10.0, 50)
    h = 1e-3
    second = (airy(xs + h)[0] - 2 * airy(xs)[0] + airy(xs - h)[0]) / h**2
    assert np.abs(second - xs * airy(xs)[0]).max() < 1e-5


def test_airy_right_asymptotic():
    x = 10.0
    zeta = 2.0 / 3.0 * x**1.5
    leading = np.exp(-zeta) / (2.0 * np.sqrt(np.pi) * x**0.25)
    assert airy(x)[0] / leading == pytest.approx(1.0, rel=1e-2)


def test_airy_underflows_far_right():
    ai, _ = airy(150.0)
    assert ai == 0.0


def test_hermite_phi_values():
    assert hermite_phi(0, 0.0) == pytest.approx(np.pi ** -0.25, abs=1e-15)
    assert hermite_phi(1, 0.0) == 0.0


@pytest.mark.parametrize("j", [0, 5, 20])
def test_hermite_phi_normalized(j):
    rule = gauss_legendre(200)
    x = 12.0 * rule.nodes
    w = 12.0 * rule.weights
    assert np.dot(w, hermite_phi(j, x) ** 2) == pytest.approx(1.0, abs=1e-10)


def test_hermite_phi_orthonormal_pairs():
    rule = gauss_legendre(400)
    x = 14.0 * rule.nodes
    w = 14.0 * rule.weights
    stack = np.array([hermite_phi(j, x) for j in range(11)])
    gram = (stack * w) @ stack.T
    assert np.abs(gram - np.eye(11)).max() < 1e-9


def test_hermite_phi_large_order_no_overflow():
    vals = hermite_phi(10_000, np.array([-200.0, 0.0, 13.7, 200.0]))
    assert np.all(np.isfinite(vals))


def test_bessel_values():
    j, jp = bessel_j(0, 0.0)
    assert (j, jp) == (1.0, 0.0)
    j, jp = bessel_j(1, 0.0)
    assert j == 0.0
    assert jp == pytest.approx(0.5, abs=1e-15)


def test_bessel_rejects_fractional_order():
    with pytest.raises(UnsupportedOrder):
        bessel_j(0.5, 1.0)


@pytest.mark.parametrize("x", [1.0, 10.0])
def test_bessel_ode_residual(x):
    h = 1e-4
    j = lambda t: bessel_j(0, t)[0]
    jpp = (j(x + h) - 2 * j(x) + j(x - h)) / h**2
    jp = bessel_j(0, x)[1]
    assert abs(x**2 * jpp + x * jp + x**2 * j(x)) < 1e-6


@pytest.mark.parametrize("alpha", [1, 2])
@pytest.mark.parametrize("x", [0.5, 5.0, 20.0])
def test_bessel_recurrence(alpha, x):
    lhs = bessel_j(alpha - 1, x)[0] + bessel_j(alpha + 1, x)[0]
    assert lhs == pytest.approx(2 * alpha / x * bessel_j(alpha, x)[0], abs=1e-9)


def test_gauss_legendre_m1_m2():
    r1 = gauss_legendre(1)
    assert r1.nodes.tolist() == [0.0]
    assert r1.weights.tolist() == [2.0]
    r2 = gauss_legendre(2)
    assert np.allclose(r2.nodes, [-1 / np.sqrt(3), 1 / np.sqrt(3)], atol=1e-15)
    assert np.allclose(r2.weights, [1.0, 1.0], atol=1e-15)


def test_gauss_legendre_degree_exactness():
    r = gauss_legendre(20)
    # exact for x^38 (integral 2/39), measurably wrong for x^40
    assert np.dot(r.weights, r.nodes**38) == pytest.approx(2.0 / 39.0, abs=1e-13)
    assert abs(np.dot(r.weights, r.nodes**40) - 2.0 / 41.0) > 1e-12


@pytest.mark.parametrize("m", [3, 17, 64, 257, 512])
def test_gauss_legendre_structure(m):
    r = gauss_legendre(m)
    assert np.all(np.diff(r.nodes) > 0)
    assert np.all(r.weights > 0)
    assert np.sum(r.weights) == pytest.approx(2.0, abs=1e-13)
    assert np.allclose(r.nodes, -r.nodes[::-1], atol=1e-14)
    assert np.allclose(r.weights, r.weights[::-1], atol=1e-14)
