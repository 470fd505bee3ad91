"""Number-theoretic primitives: totient, Moebius, Ramanujan sums, characters."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TWO_PI = 2.0 * math.pi
CHARACTER_CAP = 512


def e(x):
    """exp(2 pi i x), with x reduced mod 1 first to keep the argument small."""
    x = np.asarray(x, dtype=float)
    return np.exp(1j * TWO_PI * np.mod(x, 1.0))


def _small_primes(bound: int) -> np.ndarray:
    if bound < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(bound + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(bound) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.nonzero(is_p)[0]


@dataclass(frozen=True)
class ArithCache:
    """Sieved tables of phi, mu and omega on 0..limit (index 0 unused).

    The arrays are read-only views; share one cache across threads freely.
    """

    limit: int
    phi: np.ndarray
    mu: np.ndarray
    omega: np.ndarray

    def divisors(self, n: int) -> list[int]:
        n = abs(int(n))
        if n == 0:
            raise ValueError("0 has infinitely many divisors")
        small, large = [], []
        for d in range(1, math.isqrt(n) + 1):
            if n % d == 0:
                small.append(d)
                if d * d != n:
                    large.append(n // d)
        return small + large[::-1]

    def require(self, n: int) -> None:
        if n > self.limit:
            raise ValueError(f"arithmetic cache holds n <= {self.limit}, need {n}")


def build_arith_cache(limit: int) -> ArithCache:
    """Tabulate phi, mu, omega up to ``limit``.

    Primes up to sqrt(limit) are sieved out slice by slice; whatever cofactor
    survives is a single prime above sqrt(limit) and is handled in one pass.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    n = np.arange(limit + 1, dtype=np.int64)
    phi = n.copy()
    rem = n.copy()
    mu = np.ones(limit + 1, dtype=np.int8)
    omega = np.zeros(limit + 1, dtype=np.int8)
    for p in _small_primes(math.isqrt(limit)):
        p = int(p)
        phi[p::p] -= phi[p::p] // p
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
        omega[p::p] += 1
        pk = p
        while pk <= limit:
            rem[pk::pk] //= p
            pk *= p
    big = rem > 1
    phi[big] -= phi[big] // rem[big]
    mu[big] *= -1
    omega[big] += 1
    mu[0] = 0
    phi[0] = 0
    for arr in (phi, mu, omega):
        arr.setflags(write=False)
    return ArithCache(limit=limit, phi=phi, mu=mu, omega=omega)


@lru_cache(maxsize=None)
def _shared_cache(limit: int) -> ArithCache:
    return build_arith_cache(limit)


def shared_cache(limit: int) -> ArithCache:
    """Process-wide cache with limit rounded up to a power of two."""
    size = 1 << max(10, int(limit - 1).bit_length())
    return _shared_cache(size)


def reduced_residues(h: int) -> np.ndarray:
    if h == 1:
        return np.array([0])
    a = np.arange(h)
    return a[np.gcd(a, h) == 1]


def ramanujan_sum(h: int, v: int) -> float:
    """c_h(v) = sum of e(av/h) over reduced residues a mod h, by direct summation."""
    if h < 1:
        raise ValueError("modulus must be >= 1")
    a = reduced_residues(h)
    total = e(a * (int(v) % h) / h).sum()
    if abs(total.imag) > 1e-12 * max(1, h):
        raise ArithmeticError(f"c_{h}({v}) has imaginary part {total.imag}")
    return float(total.real)


@lru_cache(maxsize=4096)
def _ramanujan_row(h: int) -> np.ndarray:
    a = reduced_residues(h)
    v = np.arange(h)
    row = e(np.outer(v, a) % h / h).sum(axis=1).real
    row.setflags(write=False)
    return row


def ramanujan_row(h: int) -> np.ndarray:
    """Values c_h(v) for v = 0..h-1."""
    return _ramanujan_row(int(h))


def ramanujan_values(h: int, v) -> np.ndarray:
    return ramanujan_row(h)[np.mod(np.asarray(v, dtype=np.int64), h)]


@dataclass(frozen=True)
class CharacterTable:
    """All Dirichlet characters mod h as a phi(h) x h value table.

    Row 0 is the principal character. Non-units carry the value 0.
    """

    modulus: int
    values: np.ndarray

    @property
    def count(self) -> int:
        return self.values.shape[0]


def _order_in(g: int, subgroup: set[int], h: int) -> int:
    k, x = 1, g
    while x not in subgroup:
        x = x * g % h
        k += 1
    return k


def character_table(h: int, cap: int = CHARACTER_CAP) -> CharacterTable:
    """Build the character table by growing the unit group one generator at a time.

    At each step an element g outside the current subgroup H is adjoined; if k
    is the least exponent with g^k in H, every character of H extends in k
    ways, chi(g) being any k-th root of chi(g^k).
    """
    if h < 1:
        raise ValueError("modulus must be >= 1")
    if h > cap:
        raise ValueError(f"modulus {h} exceeds character cap {cap}")
    units = [int(a) for a in reduced_residues(h)]
    one = 1 % h
    # Each character stored as a dict unit -> phase in [0, 1).
    elements = [one]
    chars: list[dict[int, float]] = [{one: 0.0}]
    for g in units:
        if g in set(elements):
            continue
        sub = set(elements)
        k = _order_in(g, sub, h)
        gk = pow(g, k, h)
        new_elements = []
        for j in range(k):
            gj = pow(g, j, h)
            new_elements.extend(gj * x % h for x in elements)
        extended = []
        for chi in chars:
            base = chi[gk] / k
            for r in range(k):
                phase_g = (base + r / k) % 1.0
                ext = {}
                for j in range(k):
                    gj = pow(g, j, h)
                    for x in elements:
                        ext[gj * x % h] = (j * phase_g + chi[x]) % 1.0
                extended.append(ext)
        elements = new_elements
        chars = extended
    values = np.zeros((len(chars), h), dtype=complex)
    for i, chi in enumerate(chars):
        for a, ph in chi.items():
            values[i, a] = e(ph)
    values.setflags(write=False)
    return CharacterTable(modulus=h, values=values)


def gauss_sum(table: CharacterTable, chi_index: int, n) -> np.ndarray | complex:
    """tau_h(chi, n) = sum over b mod h of chi(b) e(bn/h)."""
    h = table.modulus
    if not 0 <= chi_index < table.count:
        raise IndexError(f"character index {chi_index} out of range")
    n_arr = np.asarray(n, dtype=np.int64)
    b = np.arange(h)
    phases = e(np.multiply.outer(n_arr % h, b) % h / h)
    out = phases @ table.values[chi_index]
    return complex(out) if n_arr.ndim == 0 else out


def phi_C_ratio(cache: ArithCache, n: int, C: int) -> float:
    """Sum of mu(d)/d over divisors d <= C of n; equals phi(n)/n once C >= n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(sum(int(cache.mu[d]) / d for d in cache.divisors(n) if d <= C))


def phi_C_table(cache: ArithCache, limit: int, C: int | None) -> np.ndarray:
    """Array r with r[n] = phi_C(n)/n for 1 <= n <= limit; C=None means phi(n)/n."""
    cache.require(limit)
    if C is None or C >= limit:
        r = np.zeros(limit + 1)
        r[1:] = cache.phi[1 : limit + 1] / np.arange(1, limit + 1)
        return r
    r = np.zeros(limit + 1)
    for d in range(1, C + 1):
        m = int(cache.mu[d])
        if m:
            r[d::d] += m / d
    return r
