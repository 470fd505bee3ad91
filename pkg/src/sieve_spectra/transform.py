"""Transform chain built on W: sharp/flat sums, W-tilde, the Moebius-twisted W*, and its Fourier side."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .arith import ArithCache, phi_C_table, shared_cache
from .kernel import WeightKernel
from .quadrature import QuadratureError, gl_rule


class AccuracyError(ArithmeticError):
    """Series cap reached before the truncation bound met the tolerance."""

    def __init__(self, message: str, bound: float):
        super().__init__(f"{message} (bound {bound:.3e})")
        self.bound = bound


@dataclass(frozen=True)
class TransformConfig:
    """Knobs for the transform chain.

    C is the Moebius truncation (None means the full series), series_N the
    minimum number of series terms, series_cap the hard ceiling.
    """

    C: Optional[int] = None
    series_N: int = 1
    quad_tol: float = 1e-9
    cache: Optional[ArithCache] = None
    series_cap: int = 10**7

    def __post_init__(self):
        if self.series_N < 1:
            raise ValueError("series_N must be >= 1")
        if self.quad_tol <= 0:
            raise ValueError("quad_tol must be positive")
        if self.C is not None and self.C < 1:
            raise ValueError("C must be >= 1")

    def arith(self, limit: int) -> ArithCache:
        if self.cache is not None and self.cache.limit >= limit:
            return self.cache
        return shared_cache(limit)


def w_sharp(kernel: WeightKernel, y) -> np.ndarray | float:
    """Sum over k >= 1 of W(y/k)/k; only k in [y/2, y] contribute."""
    y_arr = np.abs(np.atleast_1d(np.asarray(y, dtype=float)))
    lo = np.maximum(np.ceil(y_arr / 2), 1).astype(np.int64)
    hi = np.floor(y_arr).astype(np.int64)
    count = np.maximum(hi - lo + 1, 0)
    owner = np.repeat(np.arange(y_arr.size), count)
    offset = np.arange(count.sum()) - np.repeat(np.cumsum(count) - count, count)
    k = (lo[owner] + offset).astype(float)
    out = np.zeros(y_arr.size)
    np.add.at(out, owner, kernel(y_arr[owner] / k) / k)
    return float(out[0]) if np.ndim(y) == 0 else out


def w_flat(kernel: WeightKernel, z: float) -> float:
    """Sum over f >= 1 of W(zf)/f; only f in [1/z, 2/z] contribute."""
    if z <= 0:
        raise ValueError("z must be positive")
    f = np.arange(max(1, math.ceil(1 / z)), math.floor(2 / z) + 1)
    return float(np.sum(kernel(z * f) / f))


def _sawtooth_panels(kernel: WeightKernel, z: float) -> np.ndarray:
    k = np.arange(math.ceil(z / 2), math.floor(z) + 1)
    cuts = z / k[k > 0]
    edges = np.concatenate([cuts[(cuts > 1) & (cuts < 2)], kernel.breakpoints])
    return np.unique(edges)


def _w_tilde_quad(kernel: WeightKernel, z: float, n: int) -> float:
    edges = _sawtooth_panels(kernel, z)
    x, w = gl_rule(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    u = 0.5 * (a + b) + half * x
    # Fractional part taken per panel: floor(z/u) is constant on each one.
    kk = np.floor(z / (0.5 * (a + b)))
    frac = z / u - kk
    vals = frac * kernel.d_uW(u)
    return float(np.sum(vals * half * w) / z)


def w_tilde(kernel: WeightKernel, z: float, tol: float = 1e-10) -> float:
    """(1/|z|) times the integral of {z/u}(uW'(u) + W(u)) over u > 0.

    Equals J for |z| <= 1. Otherwise Gauss-Legendre on panels cut at every
    jump u = z/k of the sawtooth, with a 12- vs 24-point convergence test.
    """
    z = abs(float(z))
    if z <= 1:
        return kernel.J
    coarse = _w_tilde_quad(kernel, z, 12)
    fine = _w_tilde_quad(kernel, z, 24)
    if abs(fine - coarse) > tol:
        raise QuadratureError(f"W-tilde quadrature at z={z}", abs(fine - coarse))
    return fine


def mobius_partial(cache: ArithCache, C: int, power: int = 1) -> float:
    c = np.arange(1, C + 1)
    return float(np.sum(cache.mu[1 : C + 1] / c.astype(float) ** power))


def w_star_C(kernel: WeightKernel, cfg: TransformConfig, z, route: str = "sum"):
    """Sum over c <= C of mu(c)/c W-tilde(cz).

    route="sum" uses W-tilde = J - W-sharp (a finite sum); route="quadrature"
    integrates every W-tilde(cz) directly.
    """
    if cfg.C is None:
        raise ValueError("w_star_C needs a finite C")
    C = cfg.C
    cache = cfg.arith(C)
    c = np.arange(1, C + 1)
    mu = cache.mu[1 : C + 1].astype(float)
    keep = mu != 0
    c, mu = c[keep], mu[keep]
    zs = np.abs(np.atleast_1d(np.asarray(z, dtype=float)))
    out = np.empty(zs.size)
    for i, zi in enumerate(zs):
        if route == "sum":
            tilde = kernel.J - w_sharp(kernel, c * zi)
        elif route == "quadrature":
            tilde = np.array([w_tilde(kernel, ci * zi, tol=cfg.quad_tol) for ci in c])
        else:
            raise ValueError(f"unknown route {route!r}")
        out[i] = np.sum(mu / c * tilde)
    return float(out[0]) if np.ndim(z) == 0 else out


def w_star_star_C(kernel: WeightKernel, cfg: TransformConfig, z):
    """W*_C(z) minus its value at 0, J times the partial Moebius sum."""
    base = kernel.J * mobius_partial(cfg.arith(cfg.C), cfg.C)
    return w_star_C(kernel, cfg, z) - base


def w_tilde_decay_constant(kernel: WeightKernel, x_max: float = 200.0, points: int = 4000) -> float:
    """Sampled sup of x^2 |W-tilde(x)| over 1 <= x <= x_max."""
    x = np.linspace(1.0, x_max, points)
    return float(np.max(x**2 * np.abs(kernel.J - w_sharp(kernel, x))))


def w_star_C_tail(K: float, C: int, z: float) -> float:
    """Bound on |W* - W*_C|(z) from |W-tilde(x)| <= K/x^2 and sum_{c>C} c^-3 <= 1/(2C^2)."""
    return K / (2.0 * C**2 * z**2)


def series_bound(m: int, z: float, N: int) -> float:
    """Tail of the phi(n)/n series after N terms: 2 (2m/(pi z))^m / ((m-1) N^(m-1))."""
    return 2.0 * (2.0 * m / (math.pi * z)) ** m / ((m - 1) * float(N) ** (m - 1))


def series_terms(m: int, z: float, tol: float) -> int:
    return math.ceil((2.0 * (2.0 * m / (math.pi * z)) ** m / ((m - 1) * tol)) ** (1.0 / (m - 1)))


def _series_sum(kernel: WeightKernel, ratio: np.ndarray, z: float, N: int) -> float:
    n = np.arange(1, N + 1, dtype=float)
    m = kernel.m
    phase = np.mod(0.75 * n * z, 1.0)
    terms = ratio[1 : N + 1] * np.cos(2 * math.pi * phase) * np.sinc(n * z / (2 * m)) ** m
    return -2.0 * kernel.amplitude * float(np.sum(terms))


def w_star_series(kernel: WeightKernel, cfg: TransformConfig, z: float) -> tuple[float, float]:
    """W*(z) from its phi(n)/n cosine series; returns (value, truncation bound).

    The number of terms is driven by the explicit tail bound, never by
    inspecting the tail, and is capped by cfg.series_cap.
    """
    if z <= 0:
        raise ValueError("series route needs z > 0")
    need = max(cfg.series_N, series_terms(kernel.m, z, cfg.quad_tol / max(kernel.amplitude, 1e-300)))
    N = min(need, cfg.series_cap)
    bound = abs(kernel.amplitude) * series_bound(kernel.m, z, N)
    if need > cfg.series_cap and bound >= cfg.quad_tol:
        raise AccuracyError(f"series cap {cfg.series_cap} too small at z={z}", bound)
    cache = cfg.arith(N)
    ratio = phi_C_table(cache, N, None)
    return _series_sum(kernel, ratio, z, N), bound


def w_star(kernel: WeightKernel, cfg: TransformConfig, z) -> np.ndarray:
    """Vectorised W*(z) (full Moebius sum) via the series; W*(0) = 0."""
    zs = np.abs(np.atleast_1d(np.asarray(z, dtype=float)))
    out = np.zeros(zs.size)
    pos = zs > 0
    if not np.any(pos):
        return out
    tol = cfg.quad_tol / max(abs(kernel.amplitude), 1e-300)
    needs = np.array([max(cfg.series_N, series_terms(kernel.m, zi, tol)) for zi in zs[pos]])
    top = int(min(needs.max(), cfg.series_cap))
    worst = max(series_bound(kernel.m, zi, min(ni, cfg.series_cap)) for zi, ni in zip(zs[pos], needs))
    if needs.max() > cfg.series_cap and abs(kernel.amplitude) * worst >= cfg.quad_tol:
        raise AccuracyError(f"series cap {cfg.series_cap} too small at z={zs[pos].min()}", worst)
    ratio = phi_C_table(cfg.arith(top), top, None)
    vals = [_series_sum(kernel, ratio, zi, int(min(ni, cfg.series_cap))) for zi, ni in zip(zs[pos], needs)]
    out[pos] = vals
    return out


def w_star_lattice(kernel: WeightKernel, cfg: TransformConfig, step: float, count: int) -> np.ndarray:
    """W*(v * step) for v = 1..count, sharing one table of series terms.

    Every argument n * v * step sits on the lattice k * step, so the cosine
    and sinc factors are tabulated once per k and gathered per v.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if count < 1:
        return np.zeros(0)
    m = kernel.m
    tol = cfg.quad_tol / max(abs(kernel.amplitude), 1e-300)
    v = np.arange(1, count + 1)
    needs = np.array([max(cfg.series_N, series_terms(m, vi * step, tol)) for vi in v])
    if needs[0] > cfg.series_cap:
        worst = abs(kernel.amplitude) * series_bound(m, step, cfg.series_cap)
        if worst >= cfg.quad_tol:
            raise AccuracyError(f"series cap {cfg.series_cap} too small at z={step}", worst)
    needs = np.minimum(needs, cfg.series_cap)
    top_n = int(needs.max())
    ratio = phi_C_table(cfg.arith(top_n), top_n, None)
    top_k = int(np.max(needs * v))
    k = np.arange(top_k + 1, dtype=float)
    table = np.cos(2 * math.pi * np.mod(0.75 * k * step, 1.0)) * np.sinc(k * step / (2 * m)) ** m
    out = np.empty(count)
    for i, (vi, ni) in enumerate(zip(v, needs)):
        out[i] = -2.0 * np.dot(ratio[1 : ni + 1], table[vi : vi * ni + 1 : vi])
    return kernel.amplitude * out


def plateau(kernel: WeightKernel, cache: ArithCache | None = None, C: int | None = None) -> float:
    """Constant value of the Fourier transform of W*_C on |u| <= 1/2.

    Integral of W over (0, inf) times the sum of mu(c)/c^2 over c <= C
    (6/pi^2 when C is None).
    """
    if C is None:
        return kernel.plateau
    return kernel.integral0 * mobius_partial(cache, C, power=2)


def w_hat_star(kernel: WeightKernel, cache: ArithCache, u, C: int | None = None):
    """Fourier transform of W* (or of W*_C when C is given) at u != 0.

    Plateau minus (1/|u|) sum over |u| <= n <= 2|u| of phi_C(n)/n W(n/|u|).
    """
    us = np.abs(np.atleast_1d(np.asarray(u, dtype=float)))
    top = int(math.floor(2 * us.max())) if us.size else 0
    cache.require(max(top, 1))
    ratio = phi_C_table(cache, max(top, 1), C)
    base = plateau(kernel, cache, C)
    out = np.full(us.size, base)
    for i, ui in enumerate(us):
        if ui <= 0.5:
            continue
        n = np.arange(math.ceil(ui), math.floor(2 * ui) + 1)
        out[i] = base - np.sum(ratio[n] * kernel(n / ui)) / ui
    return float(out[0]) if np.ndim(u) == 0 else out


def w_hat_star_nodes(kernel: WeightKernel, cache: ArithCache, U: float, n: int = 8):
    """Gauss nodes/weights on [0, U] with W-hat-star values.

    Panels are cut at u = 1/2 and at every u = n/b where a term W(n/u)
    crosses a breakpoint b of W, so the integrand is smooth on each panel.
    """
    ns = np.arange(1, math.floor(2 * U) + 1)
    kinks = np.concatenate([ns / b for b in kernel.breakpoints])
    edges = np.unique(np.concatenate([[0.0, 0.5, U], kinks[kinks < U]]))
    x, w = gl_rule(n)
    top = int(math.floor(2 * U)) + 1
    ratio = phi_C_table(cache, top, None)
    base = kernel.plateau
    nodes, weights, values = [], [], []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        u = 0.5 * (a + b) + half * x
        if b <= 0.5:
            vals = np.full(n, base)
        else:
            ns = np.arange(max(1, math.ceil(a)), math.floor(2 * b) + 1)
            grid = ns[None, :] / u[:, None]
            vals = base - (kernel(grid) * ratio[ns][None, :]).sum(axis=1) / u
        nodes.append(u)
        weights.append(half * w)
        values.append(vals)
    return np.concatenate(nodes), np.concatenate(weights), np.concatenate(values)


def w_star_fourier(kernel: WeightKernel, cache: ArithCache, z, U: float = 400.0, n: int = 8):
    """W*(z) by truncated Fourier inversion: 2 times the integral over [0, U] of W-hat-star(u) cos(2 pi u z)."""
    nodes, weights, values = w_hat_star_nodes(kernel, cache, U, n)
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.array([2.0 * np.sum(weights * values * np.cos(2 * math.pi * np.mod(nodes * zi, 1.0))) for zi in zs])
    return float(out[0]) if np.ndim(z) == 0 else out
