"""Seeded test sequences.

The generator is xorshift64* (Vigna 2016), seeded through one splitmix64 step:

    x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27   (all mod 2^64)
    output = x * 0x2545F4914F6CDD1D mod 2^64

Uniform doubles take the top 53 output bits times 2^-53. Random signs use the
top output bit (1 -> -1). Any language with 64-bit unsigned arithmetic can
reproduce these streams bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lsq import ComplexSequence

MASK = (1 << 64) - 1
KINDS = ("random_signs", "random_complex", "spike", "progression", "prime_indicator", "eigen_pullback")


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed: int):
        self.state = splitmix64(int(seed) & MASK) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK

    def uniform(self) -> float:
        """Double in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    def sign(self) -> int:
        return -1 if self.next_u64() >> 63 else 1


@dataclass(frozen=True)
class SequenceSpec:
    """Recipe for a test sequence; ``extra`` holds kind-specific parameters.

    spike: k. progression: modulus, residue. eigen_pullback: tau_over_h, h,
    ell, chi, M, m.
    """

    kind: str
    N: int
    seed: int = 0
    extra: dict = field(default_factory=dict)


def _primes_from(lo: float, N: int) -> np.ndarray:
    sieve = np.ones(N + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(N) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    n = np.nonzero(sieve)[0]
    return n[n >= lo]


def generate_sequence(request: SequenceSpec) -> ComplexSequence:
    N = request.N
    if N < 1:
        raise ValueError("N must be >= 1")
    kind, extra = request.kind, request.extra
    if kind == "random_signs":
        rng = XorShift64Star(request.seed)
        values = np.array([rng.sign() for _ in range(N)], dtype=complex)
    elif kind == "random_complex":
        rng = XorShift64Star(request.seed)
        flat = np.array([2.0 * rng.uniform() - 1.0 for _ in range(2 * N)])
        values = flat[0::2] + 1j * flat[1::2]
    elif kind == "spike":
        k = int(extra.get("k", 1))
        if not 1 <= k <= N:
            raise ValueError(f"spike position {k} outside 1..{N}")
        values = np.zeros(N, dtype=complex)
        values[k - 1] = 1.0
    elif kind == "progression":
        q = int(extra.get("modulus", 2))
        r = int(extra.get("residue", 0))
        if q < 1:
            raise ValueError("modulus must be >= 1")
        n = np.arange(1, N + 1)
        values = (n % q == r % q).astype(complex)
    elif kind == "prime_indicator":
        # Primes p >= sqrt(N): no prime factor below sqrt(N), as the restricted-support bound needs.
        values = np.zeros(N, dtype=complex)
        values[_primes_from(math.sqrt(N), N) - 1] = 1.0
    elif kind == "eigen_pullback":
        from .arith import character_table
        from .kernel import build_weight
        from .localspec import nystrom_spectrum, pullback
        from .transform import TransformConfig

        h = int(extra.get("h", 1))
        spectrum = nystrom_spectrum(
            build_weight(int(extra.get("m", 5))),
            TransformConfig(quad_tol=1e-8),
            float(extra.get("tau_over_h", 1.0)) * h,
            h,
            int(extra.get("M", 400)),
            int(extra.get("ell", 1)),
        )
        vec = pullback(spectrum, character_table(h), N, h, int(extra.get("ell", 1)), int(extra.get("chi", 0)))
        values = vec.values
    else:
        raise ValueError(f"unknown sequence kind {kind!r}; expected one of {KINDS}")
    return ComplexSequence(N, values)
