import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sieve_spectra.arith import (
    build_arith_cache,
    character_table,
    e,
    gauss_sum,
    phi_C_ratio,
    ramanujan_sum,
    reduced_residues,
    shared_cache,
)


def brute_phi(n):
    return sum(1 for a in range(1, n + 1) if math.gcd(a, n) == 1)


def brute_mu(n):
    k, out, p = n, 1, 2
    while p * p <= k:
        if k % p == 0:
            k //= p
            if k % p == 0:
                return 0
            out = -out
        p += 1
    return -out if k > 1 else out


def test_base_case():
    c = build_arith_cache(1)
    assert c.phi[1] == 1 and c.mu[1] == 1


def test_small_values():
    c = build_arith_cache(100)
    assert c.phi[12] == 4
    assert c.mu[30] == -1
    assert c.omega[30] == 3


def test_tables_against_brute_force():
    c = build_arith_cache(3000)
    for n in range(1, 3001):
        assert c.phi[n] == brute_phi(n)
        assert c.mu[n] == brute_mu(n)


def test_tables_read_only_and_divisors():
    c = build_arith_cache(100)
    with pytest.raises(ValueError):
        c.phi[3] = 7
    assert list(c.divisors(36)) == [1, 2, 3, 4, 6, 9, 12, 18, 36]


def test_large_cofactor_fixup():
    c = build_arith_cache(200_000)
    for n in (199_999, 199_966, 2 * 99_991, 3 * 65_537):
        assert c.phi[n] == brute_phi(n)


def test_shared_cache_grows():
    assert shared_cache(5000).limit >= 5000


def test_ramanujan_examples():
    assert ramanujan_sum(7, 0) == pytest.approx(6.0, abs=1e-12)
    for v in (-3, 0, 1, 17):
        assert ramanujan_sum(1, v) == pytest.approx(1.0, abs=1e-12)
    assert ramanujan_sum(6, 3) == pytest.approx(-2.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 60), st.integers(-200, 200))
def test_ramanujan_divisor_formula(h, v):
    # c_h(v) = sum over d | gcd(h, v) of mu(h/d) d
    g = math.gcd(h, v) if v else h
    want = sum(brute_mu(h // d) * d for d in range(1, g + 1) if g % d == 0 and h % d == 0)
    assert ramanujan_sum(h, v) == pytest.approx(want, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), st.integers(-50, 50))
def test_ramanujan_multiplicative(h1, h2, v):
    if math.gcd(h1, h2) != 1:
        return
    assert ramanujan_sum(h1 * h2, v) == pytest.approx(ramanujan_sum(h1, v) * ramanujan_sum(h2, v), abs=1e-8)


def test_reduced_residues():
    assert list(reduced_residues(1)) == [0]
    assert list(reduced_residues(12)) == [1, 5, 7, 11]


@pytest.mark.parametrize("h", [1, 2, 4, 5, 8, 12, 15, 16])
def test_character_orthogonality(h):
    t = character_table(h)
    units = reduced_residues(h)
    assert t.count == len(units)
    X = t.values[:, units]
    np.testing.assert_allclose(X @ X.conj().T, t.count * np.eye(t.count), atol=1e-10)
    np.testing.assert_allclose(t.values[0, units], 1.0)


def test_character_table_small_cases():
    assert character_table(1).count == 1
    assert character_table(1).values[0, 0] == pytest.approx(1.0)
    t4 = character_table(4)
    assert t4.count == 2
    np.testing.assert_allclose(sorted(t4.values[:, 3].real), [-1.0, 1.0], atol=1e-12)


@pytest.mark.parametrize("h", [5, 12, 20])
def test_characters_multiplicative(h):
    t = character_table(h)
    for i in range(t.count):
        for a in range(h):
            for b in range(h):
                assert abs(t.values[i, a * b % h] - t.values[i, a] * t.values[i, b]) < 1e-10


def test_gauss_sum_examples():
    t5 = character_table(5)
    for i in range(1, t5.count):
        assert abs(gauss_sum(t5, i, 1)) == pytest.approx(math.sqrt(5), abs=1e-12)
    assert gauss_sum(character_table(6), 0, 0) == pytest.approx(2.0, abs=1e-12)


def test_gauss_sum_direct_sum():
    h = 12
    t = character_table(h)
    for i in range(t.count):
        for b in range(h):
            want = sum(t.values[i, a] * np.exp(2j * np.pi * a * b / h) for a in range(h) if math.gcd(a, h) == 1)
            assert abs(gauss_sum(t, i, b) - want) < 1e-12


def test_phi_C_ratio():
    c = build_arith_cache(100)
    assert phi_C_ratio(c, 6, 1) == pytest.approx(1.0)
    assert phi_C_ratio(c, 6, 6) == pytest.approx(1 / 3)
    assert phi_C_ratio(c, 1, 17) == pytest.approx(1.0)


def test_e_is_periodic():
    np.testing.assert_allclose(e(np.array([0.25, 1.25])), [1j, 1j], atol=1e-15)
