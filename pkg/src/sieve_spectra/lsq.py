"""Exponential sums and the large-sieve quadratic forms, raw and smoothed."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .arith import ArithCache, e, ramanujan_row, ramanujan_values, reduced_residues
from .kernel import I0, WeightKernel
from .report import CheckReport
from .transform import TransformConfig, w_hat_star_nodes, w_star_lattice


@dataclass(frozen=True)
class ComplexSequence:
    """phi_1..phi_N stored at values[0..N-1]; implicitly zero elsewhere."""

    N: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.N,):
            raise ValueError(f"expected {self.N} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def of(cls, values) -> "ComplexSequence":
        v = np.asarray(values, dtype=complex)
        return cls(v.size, v)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(1, self.N + 1)

    def norm2(self) -> float:
        """Sum of |phi_n|^2."""
        return float(np.sum(np.abs(self.values) ** 2))

    def dot(self, other: "ComplexSequence") -> complex:
        """[phi, psi]_N = (1/N) sum phi_n conj(psi_n)."""
        return complex(np.vdot(other.values, self.values) / self.N)

    def autocorrelation(self) -> np.ndarray:
        """A[v] = sum_n phi_{n+v} conj(phi_n) for v = 0..N-1."""
        x = self.values
        full = np.correlate(x, x, mode="full")
        return full[self.N - 1 :]


@dataclass(frozen=True)
class SieveParams:
    Q: float
    H: float = 1.0
    C: int = 1
    E: int = 1
    U: Optional[float] = None

    def __post_init__(self):
        if self.Q < 1:
            raise ValueError("Q must be >= 1")
        if self.H < 0.5:
            raise ValueError("H must be >= 1/2")
        if self.C < 1 or self.E < 1:
            raise ValueError("C and E must be >= 1")

    def check_split(self) -> None:
        if self.E > min(self.Q, 2 * self.Q / self.C):
            raise ValueError(f"need E <= min(Q, 2Q/C); got E={self.E}, Q={self.Q}, C={self.C}")


def exp_sum(phi: ComplexSequence, alpha):
    """S(phi, alpha) = sum phi_n e(n alpha), direct O(N) per point."""
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    n = phi.indices
    out = e(np.mod(np.outer(np.mod(a, 1.0), n), 1.0)) @ phi.values
    return complex(out[0]) if np.ndim(alpha) == 0 else out


def farey_sums(phi: ComplexSequence, q: int, method: str = "dft") -> np.ndarray:
    """S(phi, a/q) for all reduced residues a mod q.

    "dft" folds phi mod q and uses one FFT; "direct" sums e(na/q) per a.
    """
    a = reduced_residues(q)
    if method == "direct":
        n = phi.indices
        return e(np.outer(a, n) % q / q) @ phi.values
    if method != "dft":
        raise ValueError(f"unknown method {method!r}")
    folded = np.zeros(q, dtype=complex)
    np.add.at(folded, phi.indices % q, phi.values)
    return (np.fft.ifft(folded) * q)[a]


def _q_range(Q: float) -> range:
    return range(math.floor(Q) + 1, math.floor(2 * Q) + 1)


def raw_form(phi: ComplexSequence, Q: float, method: str = "dft") -> float:
    """Sum over Q < q <= 2Q and reduced a mod q of |S(phi, a/q)|^2."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    return float(sum(np.sum(np.abs(farey_sums(phi, q, method)) ** 2) for q in _q_range(Q)))


def smoothed_form(phi: ComplexSequence, kernel: WeightKernel, Q: float, method: str = "dft") -> float:
    """Sum over q of W(q/Q)/q times the Farey sum of |S|^2 at modulus q (not divided by Q)."""
    total = 0.0
    for q in _q_range(Q):
        w = float(kernel(q / Q))
        if w != 0.0:
            total += w / q * float(np.sum(np.abs(farey_sums(phi, q, method)) ** 2))
    return total


def _ranges(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flatten the integer ranges [lo_i, hi_i] into (owner index, value) pairs."""
    count = np.maximum(hi - lo + 1, 0)
    owner = np.repeat(np.arange(lo.size), count)
    offset = np.arange(count.sum()) - np.repeat(np.cumsum(count) - count, count)
    return owner, lo[owner] + offset


def delta_symbol(cache: ArithCache, kernel: WeightKernel, Q: float, v: int) -> float:
    """Sum over c, d with d | v of mu(c) W(cd/Q)/c; every d counts when v = 0."""
    top = math.floor(2 * Q)
    cache.require(top)
    v = abs(int(v))
    if v:
        d = np.array([x for x in cache.divisors(v) if x <= top], dtype=np.int64)
    else:
        d = np.arange(1, top + 1, dtype=np.int64)
    if d.size == 0:
        return 0.0
    lo = np.maximum(np.ceil(Q / d), 1).astype(np.int64)
    owner, c = _ranges(lo, top // d)
    mu = cache.mu[c].astype(float)
    return float(np.sum(mu / c * kernel(c * d[owner] / Q)))


class DeltaPieces(NamedTuple):
    L0: float
    U: float
    Usharp: float
    L: float
    Lsharp: float

    def total(self) -> float:
        return self.L0 + self.U + self.Usharp + self.L + self.Lsharp


def _complement_weight(cache, kernel, Q, e_: int, c_lo: int, c_hi: int) -> float:
    """Sum over c in [c_lo, c_hi] and f >= 1 of mu(c) W(c e f / Q)/(c e f)."""
    total = 0.0
    for c in range(c_lo, c_hi + 1):
        mu = int(cache.mu[c])
        if mu == 0:
            continue
        f = np.arange(max(1, math.ceil(Q / (c * e_))), math.floor(2 * Q / (c * e_)) + 1)
        if f.size:
            total += mu * float(np.sum(kernel(c * e_ * f / Q) / (c * e_ * f)))
    return total


def delta_decomposition(cache: ArithCache, kernel: WeightKernel, Q: float, params: SieveParams, v: int) -> DeltaPieces:
    """Split Delta(v) into diagonal, small-e, large-e, small-h and large-h parts."""
    params.check_split()
    C, E, H = params.C, params.E, params.H
    top = math.floor(2 * Q)
    cache.require(max(top, C))
    v = abs(int(v))

    L0 = 0.0
    if v == 0:
        for c in range(1, C + 1):
            mu = int(cache.mu[c])
            if mu:
                d = np.arange(max(1, math.ceil(Q / c)), top // c + 1)
                L0 += mu / c * float(np.sum(kernel(c * d / Q)))

    U = 0.0
    for e_ in range(1, E + 1):
        U -= ramanujan_row(e_)[v % e_] * _complement_weight(cache, kernel, Q, e_, 1, C)

    Us = 0.0
    for e_ in range(E + 1, top + 1):
        if (C + 1) * e_ > top:
            break
        Us += ramanujan_row(e_)[v % e_] * _complement_weight(cache, kernel, Q, e_, C + 1, top // e_)

    L = Ls = 0.0
    if v:
        for c in range(1, C + 1):
            mu = int(cache.mu[c])
            if mu == 0:
                continue
            for g in range(max(1, math.ceil(c * v / (2 * Q))), math.floor(c * v / Q) + 1):
                w = mu / (g * c) * float(kernel(c * v / (g * Q)))
                if w == 0.0:
                    continue
                for h in cache.divisors(g):
                    term = w * ramanujan_row(h)[v % h]
                    if h <= H:
                        L += term
                    else:
                        Ls += term
    return DeltaPieces(L0, U, Us, L, Ls)


def delta_bilinear(phi: ComplexSequence, cache: ArithCache, kernel: WeightKernel, Q: float) -> float:
    """Sum over m, n of phi_m conj(phi_n) Delta(m - n)."""
    A = phi.autocorrelation()
    deltas = np.array([delta_symbol(cache, kernel, Q, v) for v in range(phi.N)])
    return float(deltas[0] * A[0].real + 2.0 * np.sum(deltas[1:] * A[1:].real))


_PROFILES: dict = {}


def _wstar_profile(kernel: WeightKernel, cfg: TransformConfig, hQ: float, count: int) -> np.ndarray:
    """W*(v/(hQ)) for v = 1..count, memoised since it does not depend on phi."""
    key = (kernel.m, kernel.amplitude, float(hQ), cfg.quad_tol, cfg.series_cap)
    have = _PROFILES.get(key)
    if have is None or have.size < count:
        have = w_star_lattice(kernel, cfg, 1.0 / hQ, count)
        _PROFILES[key] = have
    return have[:count]


def precise_rhs(
    phi: ComplexSequence,
    kernel: WeightKernel,
    cache: ArithCache,
    Q: float,
    H: float,
    method: str = "direct",
    cfg: Optional[TransformConfig] = None,
    U: float = 50.0,
) -> float:
    """I0(W) |phi|^2 minus the h-sum over h <= H.

    Each h contributes 1/(hQ) times the reduced-residue sum of the integral of
    W-hat-star(u) |S(phi, a/h + u/(hQ))|^2 du. "direct" evaluates this
    exactly in space as 1/(hQ) sum_{m,n} phi_m conj(phi_n) W*(|m-n|/(hQ)) c_h(m-n);
    "fourier" integrates over |u| <= U against W-hat-star.
    """
    if H < 0.5:
        raise ValueError("H must be >= 1/2")
    cfg = cfg or TransformConfig(quad_tol=1e-8)
    base = I0(kernel, cache, Q) * phi.norm2()
    if phi.N == 0 or not np.any(phi.values):
        return base
    hs = range(1, math.floor(H) + 1)
    total = 0.0
    if method == "direct":
        A = phi.autocorrelation()
        v = np.arange(1, phi.N)
        for h in hs:
            wstar = _wstar_profile(kernel, cfg, h * Q, phi.N - 1)
            total += 2.0 * float(np.sum(A[1:].real * wstar * ramanujan_values(h, v))) / (h * Q)
    elif method == "fourier":
        nodes, weights, values = w_hat_star_nodes(kernel, cache, U)
        for h in hs:
            acc = 0.0
            for a in reduced_residues(h):
                s_plus = exp_sum(phi, a / h + nodes / (h * Q))
                s_minus = exp_sum(phi, a / h - nodes / (h * Q))
                acc += float(np.sum(weights * values * (np.abs(s_plus) ** 2 + np.abs(s_minus) ** 2)))
            total += acc / (h * Q)
    else:
        raise ValueError(f"unknown method {method!r}")
    return base - total


def vic_remainder(phi: ComplexSequence, H: float, Q: float) -> float:
    """Sum over h <= H of (N + hQ)/(h Q^2) times the largest residue-class energy

    max over windows u < n <= v with v < u + 2hQ of sum_c |sum_{n = c mod h} phi_n|^2.
    """
    N = phi.N
    total = 0.0
    for h in range(1, math.floor(H) + 1):
        n = phi.indices
        contrib = np.zeros((h, N + 1), dtype=complex)
        contrib[n % h, n] = phi.values
        prefix = np.cumsum(contrib, axis=1)
        span = math.ceil(2 * h * Q) - 1
        best = 0.0
        for u in range(0, N):
            vmax = min(u + span, N)
            if vmax <= u:
                continue
            diff = prefix[:, u + 1 : vmax + 1] - prefix[:, u : u + 1]
            best = max(best, float(np.max(np.sum(np.abs(diff) ** 2, axis=0))))
        total += (N + h * Q) / (h * Q**2) * best
    return total


def least_prime_factor(n: int) -> int:
    if n < 2:
        return n
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            return p
    return n


def prime_support_check(phi: ComplexSequence, Q0: float, N: int) -> CheckReport:
    """Farey energy up to Q0 against 7 N log(Q0)/log(N) |phi|^2 for sequences

    supported on integers free of prime factors below sqrt(N).
    """
    if N < 100:
        raise ValueError("need N >= 100")
    if Q0 > math.sqrt(N):
        raise ValueError("need Q0 <= sqrt(N)")
    if phi.N > N:
        raise ValueError("sequence longer than N")
    root = math.sqrt(N)
    for n in phi.indices[np.abs(phi.values) > 0]:
        if n > 1 and least_prime_factor(int(n)) < root:
            raise ValueError(f"phi_{n} != 0 but {n} has a prime factor below sqrt(N)")
    lhs = sum(float(np.sum(np.abs(farey_sums(phi, q)) ** 2)) for q in range(1, math.floor(Q0) + 1))
    rhs = 7.0 * N * math.log(Q0) / math.log(N) * phi.norm2()
    return CheckReport.inequality("prime_support", {"N": N, "Q0": Q0}, lhs, rhs)
