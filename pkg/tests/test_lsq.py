import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sieve_spectra.arith import shared_cache
from sieve_spectra.kernel import I0, build_weight
from sieve_spectra.lsq import (
    ComplexSequence,
    SieveParams,
    delta_bilinear,
    delta_decomposition,
    delta_symbol,
    exp_sum,
    farey_sums,
    precise_rhs,
    prime_support_check,
    raw_form,
    smoothed_form,
    vic_remainder,
)
from sieve_spectra.sequences import SequenceSpec, generate_sequence


@pytest.fixture(scope="module")
def W():
    return build_weight(5)


@pytest.fixture(scope="module")
def cache():
    return shared_cache(10**5)


def signs(N, seed):
    return generate_sequence(SequenceSpec("random_signs", N, seed))


def delta_oracle(cache, W, Q, v):
    total = 0.0
    top = math.floor(2 * Q)
    for c in range(1, top + 1):
        for d in range(1, top // c + 1):
            if v % d == 0:
                total += cache.mu[c] * float(W(c * d / Q)) / c
    return total


def test_sequence_container():
    phi = ComplexSequence.of([1, 2j, 3])
    assert phi.N == 3
    assert phi.norm2() == pytest.approx(14.0)
    with pytest.raises(ValueError):
        ComplexSequence(4, np.ones(3))
    A = phi.autocorrelation()
    assert A[0] == pytest.approx(14.0)
    assert A[2] == pytest.approx(3 * 1)


def test_exp_sum_examples():
    phi = ComplexSequence.of(np.arange(1, 6) * (1 + 0.5j))
    assert exp_sum(phi, 0.0) == pytest.approx(np.sum(phi.values))
    spike = generate_sequence(SequenceSpec("spike", 10, extra={"k": 4}))
    assert exp_sum(spike, 0.37) == pytest.approx(np.exp(2j * np.pi * 4 * 0.37))


def test_parseval():
    phi = generate_sequence(SequenceSpec("random_complex", 50, 3))
    K = 4 * phi.N
    alpha = np.arange(K) / K
    mean = float(np.mean(np.abs(exp_sum(phi, alpha)) ** 2))
    assert mean == pytest.approx(phi.norm2(), abs=1e-10)


def test_farey_routes_agree():
    phi = generate_sequence(SequenceSpec("random_complex", 37, 5))
    for q in (1, 6, 13, 40):
        np.testing.assert_allclose(farey_sums(phi, q, "dft"), farey_sums(phi, q, "direct"), atol=1e-11)


def test_raw_form_examples(cache):
    one = ComplexSequence.of([1.0])
    assert raw_form(one, 5) == pytest.approx(sum(cache.phi[q] for q in range(6, 11)))
    assert raw_form(ComplexSequence.of(np.zeros(10)), 5) == 0.0


def test_classical_large_sieve():
    N, Q = 200, 30
    for s in range(50):
        phi = signs(N, s)
        assert raw_form(phi, Q) <= (N + 4 * Q * Q - 1) * phi.norm2()


def test_smoothed_form_examples(W, cache):
    spike = generate_sequence(SequenceSpec("spike", 20, extra={"k": 7}))
    Q = 15
    want = sum(float(W(q / Q)) * cache.phi[q] / q for q in range(16, 31))
    assert smoothed_form(spike, W, Q) == pytest.approx(want, abs=1e-12)
    assert smoothed_form(spike, W, Q) / Q == pytest.approx(I0(W, cache, Q) * spike.norm2(), abs=1e-12)
    assert smoothed_form(signs(20, 1), W.scaled(0.0), Q) == 0.0


def test_bilinear_equivalence(W, cache):
    for s in range(5):
        phi = generate_sequence(SequenceSpec("random_complex", 40, s))
        direct = smoothed_form(phi, W, 25, method="direct")
        assert smoothed_form(phi, W, 25) == pytest.approx(direct, abs=1e-9)
        assert delta_bilinear(phi, cache, W, 25) == pytest.approx(direct, abs=1e-8)


def test_delta_symbol_oracle(W, cache):
    for v in range(0, 41):
        assert delta_symbol(cache, W, 10, v) == pytest.approx(delta_oracle(cache, W, 10, v), abs=1e-13)
    assert delta_symbol(cache, W.scaled(0.0), 10, 6) == 0.0


def test_delta_at_one(W, cache):
    # only d = 1 divides v = 1
    Q = 10
    want = sum(cache.mu[c] * float(W(c / Q)) / c for c in range(1, 21))
    assert delta_symbol(cache, W, Q, 1) == pytest.approx(want, abs=1e-14)


def test_delta_identity_flagship(W, cache):
    params = SieveParams(Q=20, H=3, C=4, E=4)
    for v in range(-50, 51):
        pieces = delta_decomposition(cache, W, 20, params, v)
        assert pieces.total() == pytest.approx(delta_symbol(cache, W, 20, v), abs=1e-9)
    zero = delta_decomposition(cache, W, 20, params, 0)
    diag = sum(
        cache.mu[c] * float(W(c * d / 20)) / c for c in range(1, 5) for d in range(1, 41) if 20 < c * d <= 40
    )
    assert zero.L0 == pytest.approx(diag, abs=1e-13)


@settings(max_examples=25, deadline=None)
@given(
    st.integers(6, 18),
    st.integers(1, 5),
    st.integers(1, 5),
    st.sampled_from([0.5, 1, 2, 3.5]),
    st.integers(-40, 40),
)
def test_delta_identity_property(Q, C, E, H, v):
    W = build_weight(5)
    cache = shared_cache(10**5)
    if E > min(Q, 2 * Q / C):
        return
    pieces = delta_decomposition(cache, W, Q, SieveParams(Q=Q, H=H, C=C, E=E), v)
    assert pieces.total() == pytest.approx(delta_symbol(cache, W, Q, v), abs=1e-9)


def test_sieve_params_validation():
    with pytest.raises(ValueError):
        SieveParams(Q=0.5)
    with pytest.raises(ValueError):
        SieveParams(Q=10, H=0.25)
    with pytest.raises(ValueError):
        SieveParams(Q=10, C=8, E=5).check_split()


def test_precise_trivial_cases(W, cache):
    phi = signs(30, 2)
    assert precise_rhs(phi, W, cache, 40, 0.5) == pytest.approx(I0(W, cache, 40) * phi.norm2())
    zero = ComplexSequence.of(np.zeros(30))
    assert precise_rhs(zero, W, cache, 40, 4) == 0.0


def test_precise_routes_agree(W, cache):
    phi = signs(24, 4)
    direct = precise_rhs(phi, W, cache, 12, 3)
    # The cut-off error of the frequency route shrinks slowly with U (about 8e-4 |phi|^2 at U = 800).
    fourier = precise_rhs(phi, W, cache, 12, 3, method="fourier", U=800)
    assert fourier == pytest.approx(direct, abs=1e-3 * phi.norm2())


def test_precise_residual_vanishes_for_large_H(W, cache):
    # The h-sum reproduces the whole off-diagonal part of the smoothed form as H grows.
    phi = signs(30, 7)
    Q = 15
    lhs = delta_bilinear(phi, cache, W, Q) / Q
    gaps = [abs(lhs - precise_rhs(phi, W, cache, Q, H)) / phi.norm2() for H in (2, 16, 32)]
    assert gaps[-1] < gaps[0]
    assert gaps[-1] < 1e-3


def test_vic_remainder(cache):
    assert vic_remainder(ComplexSequence.of(np.zeros(40)), 2, 10) == 0.0
    alt = ComplexSequence.of([(-1) ** n for n in range(1, 41)])
    spread = signs(40, 3)
    assert vic_remainder(alt, 2, 10) >= vic_remainder(spread, 2, 10)


def test_prime_support_examples():
    N = 10**4
    primes = generate_sequence(SequenceSpec("prime_indicator", N))
    assert prime_support_check(primes, 50, N).pass_
    p = int(primes.indices[np.abs(primes.values) > 0][0])
    spike = generate_sequence(SequenceSpec("spike", N, extra={"k": p}))
    rep = prime_support_check(spike, 50, N)
    assert rep.pass_
    assert rep.lhs == pytest.approx(sum(shared_cache(100).phi[q] for q in range(1, 51)), abs=1e-8)
    zero = ComplexSequence.of(np.zeros(N))
    assert prime_support_check(zero, 50, N).lhs == 0.0


def test_prime_support_preconditions():
    N = 10**4
    with pytest.raises(ValueError):
        prime_support_check(generate_sequence(SequenceSpec("spike", N, extra={"k": 6})), 50, N)
    with pytest.raises(ValueError):
        prime_support_check(ComplexSequence.of(np.zeros(N)), 200, N)
