import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sieve_spectra.arith import shared_cache
from sieve_spectra.kernel import (
    I0,
    bump,
    build_weight,
    conv_power,
    fourier_pm,
    mellin_W,
    renyi_closed_form,
)
from sieve_spectra.quadrature import QuadratureError, adaptive_gl, integrate_pieces

# Frozen from the substitution route below and cross-checked by adaptive quadrature.
INTEGRAL0_M5 = 1.3434183917795106


@pytest.fixture(scope="module")
def W():
    return build_weight(5)


def test_closed_form_values():
    assert conv_power(2)(0.0) == pytest.approx(2.0)
    assert conv_power(3)(0.0) == pytest.approx(3.0)
    assert conv_power(5)(0.0) == pytest.approx(115 / 12, abs=1e-14)


@pytest.mark.parametrize("m", range(1, 10))
def test_mass_and_support(m):
    f = conv_power(m)
    assert f.integral() == Fraction(2) ** m
    assert f(m + 0.01) == 0.0 and f(-m - 0.01) == 0.0


@pytest.mark.parametrize("m", range(1, 9))
def test_recursion_matches_alternating_sum(m):
    t = np.linspace(-m - 1, m + 1, 400)  # avoids the jumps at integers when m = 1
    np.testing.assert_allclose(conv_power(m)(t), renyi_closed_form(m, t), atol=1e-10)


@pytest.mark.parametrize("m", [3, 4, 5, 6])
def test_smoothness_at_breakpoints(m):
    f = conv_power(m)
    for order in range(m - 1):
        for b in f.breakpoints:
            x = float(b)
            assert abs(f(x - 1e-9) - f(x + 1e-9)) < 1e-6
        f = f.derivative()


@settings(max_examples=50, deadline=None)
@given(st.floats(-6, 6))
def test_even(t):
    assert conv_power(5)(t) == pytest.approx(conv_power(5)(-t), abs=1e-13)


def test_bump_mass_and_fourier():
    p = bump(5)
    assert p.integral() == 1
    assert abs(fourier_pm(5, 0.0)) == pytest.approx(1.0)
    for u in (1.0, -1.0, 3.7, -3.7, 10.0, -10.0):
        assert abs(fourier_pm(5, u)) <= 1.0
    bps = [float(b) for b in p.breakpoints]
    quad = integrate_pieces(lambda t: p(t) * np.exp(-2j * np.pi * 1.3 * t), bps, tol=1e-13)
    assert abs(fourier_pm(5, 1.3) - quad) < 1e-9


def test_weight_support_and_endpoints(W):
    assert W(0.9) == 0.0 and W(2.1) == 0.0
    assert W(1.0) == pytest.approx(0.0, abs=1e-14)
    assert W(2.0) == pytest.approx(0.0, abs=1e-14)
    np.testing.assert_allclose(W.breakpoints, [1, 10 / 9, 5 / 4, 10 / 7, 5 / 3, 2])


def test_weight_rejects_low_order():
    with pytest.raises(ValueError):
        build_weight(4)


def test_integral0_two_routes(W):
    # int_1^2 p(1/t)/t dt equals int_{1/2}^1 p(u)/u du
    p = W.pm
    edges = sorted(float(b) for b in p.breakpoints if 0.5 <= b <= 1)
    direct = integrate_pieces(lambda u: p(u) / u, [0.5] + edges + [1.0], tol=1e-13)
    assert direct == pytest.approx(INTEGRAL0_M5, abs=1e-12)
    assert W.integral0 == pytest.approx(INTEGRAL0_M5, abs=1e-12)


def test_J_is_one(W):
    # J = int W(t)/t dt = int p(u) du = 1
    assert W.J == pytest.approx(1.0, abs=1e-12)


def test_plateau_constant(W):
    assert W.plateau == pytest.approx(0.816, abs=1e-3)


def test_I0(W):
    cache = shared_cache(10**5)
    assert I0(W, cache, 1e4) == pytest.approx(W.plateau, abs=0.01)
    # Q = 1: single term q = 2 with W(2) = 0
    assert I0(W, cache, 1) == pytest.approx(cache.phi[2] * float(W(2.0)) / 2, abs=1e-15)
    assert I0(W.scaled(0.0), cache, 50) == 0.0


def test_mellin(W):
    assert mellin_W(W, 0) == pytest.approx(W.J, abs=1e-10)
    assert mellin_W(W, 1) == pytest.approx(W.integral0, abs=1e-10)
    near = abs(mellin_W(W, 9 / 8 + 10j)) * (1 + abs(9 / 8 + 10j)) ** 4
    far = abs(mellin_W(W, 9 / 8 + 40j)) * (1 + abs(9 / 8 + 40j)) ** 4
    assert far <= 10 * max(near, 1.0)


def test_derivative_of_uW(W):
    u = np.linspace(1.05, 1.95, 7)
    h = 1e-6
    fd = ((u + h) * W(u + h) - (u - h) * W(u - h)) / (2 * h)
    np.testing.assert_allclose(W.d_uW(u), fd, atol=1e-5)


def test_adaptive_quadrature():
    assert adaptive_gl(np.cos, 0.0, math.pi / 2) == pytest.approx(1.0, abs=1e-13)
    with pytest.raises(QuadratureError):
        adaptive_gl(lambda x: np.sign(x - 0.3) * np.abs(x - 0.3) ** -0.9, 0.0, 1.0, tol=1e-14, max_depth=4)
