"""Exact piecewise-polynomial kernels: box-spline powers, the bump p_m and W(m; t)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .arith import ArithCache, e
from .quadrature import integrate_pieces

MAX_POWER = 12
MIN_ORDER = 5

Poly = tuple  # ascending Fraction coefficients


def _padd(p: Sequence[Fraction], q: Sequence[Fraction], sign: int = 1) -> tuple:
    n = max(len(p), len(q))
    out = [Fraction(0)] * n
    for i, c in enumerate(p):
        out[i] += c
    for i, c in enumerate(q):
        out[i] += sign * c
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out)


def _pint(p: Sequence[Fraction], const: Fraction = Fraction(0)) -> tuple:
    """Antiderivative vanishing at 0, plus a constant."""
    return (const,) + tuple(c / (k + 1) for k, c in enumerate(p))


def _peval(p: Sequence[Fraction], u: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * u + c
    return acc


def _pshift(p: Sequence[Fraction], a: Fraction) -> tuple:
    """Coefficients of q(t) = p(t - a)."""
    out = [Fraction(0)] * len(p)
    for k, c in enumerate(p):
        for j in range(k + 1):
            out[j] += c * math.comb(k, j) * (-a) ** (k - j)
    return tuple(out)


@dataclass(frozen=True)
class PiecewisePoly:
    """Piecewise polynomial, zero outside [breakpoints[0], breakpoints[-1]].

    Piece i is stored in the local variable u = t - breakpoints[i] with exact
    rational coefficients; float copies are derived for evaluation.
    """

    breakpoints: tuple
    pieces: tuple
    smoothness: int = -1
    even: bool = False

    def __post_init__(self):
        if len(self.breakpoints) != len(self.pieces) + 1:
            raise ValueError("need one more breakpoint than pieces")

    @property
    def support(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @cached_property
    def _bp(self) -> np.ndarray:
        return np.array([float(b) for b in self.breakpoints])

    @cached_property
    def _coef(self) -> np.ndarray:
        deg = max(len(p) for p in self.pieces)
        out = np.zeros((len(self.pieces), deg))
        for i, p in enumerate(self.pieces):
            out[i, : len(p)] = [float(c) for c in p]
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        bp = self._bp
        idx = np.clip(np.searchsorted(bp, t, side="right") - 1, 0, len(self.pieces) - 1)
        inside = (t >= bp[0]) & (t <= bp[-1])
        u = t - bp[idx]
        coef = self._coef[idx]
        acc = np.zeros_like(t)
        for k in range(coef.shape[-1] - 1, -1, -1):
            acc = acc * u + coef[..., k]
        return np.where(inside, acc, 0.0)

    def derivative(self) -> "PiecewisePoly":
        pieces = tuple(tuple(k * c for k, c in enumerate(p))[1:] or (Fraction(0),) for p in self.pieces)
        return PiecewisePoly(self.breakpoints, pieces, self.smoothness - 1, False)

    def integral(self) -> Fraction:
        total = Fraction(0)
        for a, b, p in zip(self.breakpoints[:-1], self.breakpoints[1:], self.pieces):
            total += _peval(_pint(p), b - a)
        return total

    def absolute_piece(self, i: int) -> tuple:
        """Piece i rewritten as a polynomial in t itself."""
        return _pshift(self.pieces[i], self.breakpoints[i])

    def affine(self, scale: Fraction, shift: Fraction, factor: Fraction) -> "PiecewisePoly":
        """t -> factor * f(scale * t + shift), scale > 0."""
        scale, shift, factor = Fraction(scale), Fraction(shift), Fraction(factor)
        if scale <= 0:
            raise ValueError("scale must be positive")
        bps = tuple((b - shift) / scale for b in self.breakpoints)
        pieces = tuple(tuple(factor * c * scale**k for k, c in enumerate(p)) for p in self.pieces)
        return PiecewisePoly(bps, pieces, self.smoothness, False)


def _box_convolve(f: PiecewisePoly) -> PiecewisePoly:
    """f * 1_[-1,1]: g(t) = F(t+1) - F(t-1) with F the antiderivative of f.

    Breakpoints of f are spaced by 2, so on a new interval [c, c+2] both
    t+1 and t-1 stay inside single pieces of F that start at c+1 and c-1.
    """
    lo, hi = f.breakpoints[0], f.breakpoints[-1]
    start: dict[Fraction, tuple] = {}
    acc = Fraction(0)
    for a, b, p in zip(f.breakpoints[:-1], f.breakpoints[1:], f.pieces):
        antider = _pint(p, acc)
        start[a] = antider
        acc = _peval(antider, b - a)
    total = acc

    def F_from(x: Fraction) -> tuple:
        if x < lo:
            return (Fraction(0),)
        if x >= hi:
            return (total,)
        return start[x]

    bps = tuple(lo - 1 + 2 * k for k in range(len(f.breakpoints) + 1))
    pieces = tuple(_padd(F_from(c + 1), F_from(c - 1), -1) for c in bps[:-1])
    return PiecewisePoly(bps, pieces, f.smoothness + 1, True)


@lru_cache(maxsize=None)
def conv_power(m: int) -> PiecewisePoly:
    """m-fold convolution power of the indicator of [-1, 1], by recursion."""
    if not 1 <= m <= MAX_POWER:
        raise ValueError(f"m must lie in 1..{MAX_POWER}, got {m}")
    f = PiecewisePoly((Fraction(-1), Fraction(1)), ((Fraction(1),),), -1, True)
    for _ in range(m - 1):
        f = _box_convolve(f)
    return f


def renyi_closed_form(m: int, t) -> np.ndarray:
    """Alternating binomial sum for the same convolution power (independent cross-check)."""
    t = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    x = m + t
    for j in range(m + 1):
        base = x - 2 * j
        term = (-1) ** j * math.comb(m, j) * np.where(base > 0, base, 0.0) ** (m - 1)
        out += np.where(2 * j <= x, term, 0.0)
    return np.where(t <= m, out / math.factorial(m - 1), 0.0)


def bump(m: int) -> PiecewisePoly:
    """p_m(t) = (4m / 2^m) 1^{*m}(4mt - 3m): unit mass on [1/2, 1]."""
    return conv_power(m).affine(Fraction(4 * m), Fraction(-3 * m), Fraction(4 * m, 2**m))


def fourier_pm(m: int, u):
    """Closed form of integral p_m(t) e(-ut) dt.

    e(-3u/4) times the m-th power of sin(pi u / 2m) / (pi u / 2m).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    u = np.asarray(u, dtype=float)
    return e(-0.75 * u) * np.sinc(u / (2 * m)) ** m


@dataclass(frozen=True)
class WeightKernel:
    """W(m; t) = p_m(1/t)/t on 1 <= |t| <= 2, extended evenly, times ``amplitude``."""

    m: int
    pm: PiecewisePoly
    J: float
    integral0: float
    amplitude: float = 1.0
    dpm: PiecewisePoly = field(repr=False, default=None)

    def __call__(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        inside = (t >= 1.0) & (t <= 2.0)
        s = np.where(inside, t, 1.0)
        return np.where(inside, self.amplitude * self.pm(1.0 / s) / s, 0.0)

    def d_uW(self, u):
        """Derivative of u W(u) for u > 0, which is -p_m'(1/u)/u^2."""
        u = np.asarray(u, dtype=float)
        inside = (u >= 1.0) & (u <= 2.0)
        s = np.where(inside, u, 1.0)
        return np.where(inside, -self.amplitude * self.dpm(1.0 / s) / s**2, 0.0)

    @cached_property
    def breakpoints(self) -> tuple[float, ...]:
        """Points of [1, 2] where W switches polynomial piece (in 1/t)."""
        return tuple(sorted(1.0 / float(b) for b in self.pm.breakpoints))

    def scaled(self, factor: float) -> "WeightKernel":
        return replace(
            self,
            amplitude=self.amplitude * factor,
            J=self.J * factor,
            integral0=self.integral0 * factor,
        )

    @property
    def plateau(self) -> float:
        """(6/pi^2) times the integral of W over (0, inf)."""
        return 6.0 / math.pi**2 * self.integral0


@lru_cache(maxsize=None)
def build_weight(m: int = 5) -> WeightKernel:
    if m < MIN_ORDER:
        raise ValueError(f"W(m; t) needs m >= {MIN_ORDER} for C^3 regularity, got {m}")
    if m > MAX_POWER:
        raise ValueError(f"m must be <= {MAX_POWER}")
    pm = bump(m)
    proto = WeightKernel(m=m, pm=pm, J=float("nan"), integral0=float("nan"), dpm=pm.derivative())
    bps = proto.breakpoints
    J = integrate_pieces(lambda u: proto(u) / u, bps, tol=1e-12)
    integral0 = integrate_pieces(proto, bps, tol=1e-12)
    return replace(proto, J=float(J), integral0=float(integral0))


def I0(kernel: WeightKernel, cache: ArithCache, Q: float) -> float:
    """Sum of phi(q) W(q/Q) / (q Q) over Q < q <= 2Q."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    lo, hi = math.floor(Q) + 1, math.floor(2 * Q)
    cache.require(hi)
    q = np.arange(lo, hi + 1)
    return float(np.sum(cache.phi[lo : hi + 1] * kernel(q / Q) / q) / Q)


def mellin_W(kernel: WeightKernel, s: complex, tol: float = 1e-10) -> complex:
    """Integral of W(t) t^(s-1) over (0, inf), which is supported on [1, 2]."""
    s = complex(s)
    val = integrate_pieces(lambda t: kernel(t) * np.power(t, s - 1), kernel.breakpoints, tol=tol)
    return complex(val)
