"""Gauss-Legendre rules, fixed and adaptive, over lists of smooth pieces."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np


class QuadratureError(ArithmeticError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (achieved residual {residual:.3e})")
        self.residual = residual


@lru_cache(maxsize=64)
def gl_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(edges, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of an n-point rule on every panel [edges[i], edges[i+1]]."""
    edges = np.asarray(edges, dtype=float)
    x, w = gl_rule(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x
    weights = half * w
    return nodes.ravel(), weights.ravel()


def fixed_gl(f: Callable, edges, n: int = 16):
    """Composite n-point rule; f must accept an array of nodes."""
    nodes, weights = panel_nodes(edges, n)
    return np.dot(f(nodes), weights)


def adaptive_gl(
    f: Callable,
    a: float,
    b: float,
    tol: float = 1e-12,
    n: int = 20,
    max_depth: int = 40,
):
    """Adaptive bisection comparing an n-point rule with its two halves.

    Works for real or complex vectorised integrands. Raises QuadratureError
    if some subinterval cannot reach the tolerance within max_depth halvings.
    """
    x, w = gl_rule(n)

    def rule(lo, hi):
        half = 0.5 * (hi - lo)
        return half * np.dot(f(0.5 * (lo + hi) + half * x), w)

    total = 0.0
    worst = 0.0
    stack = [(a, b, rule(a, b), 0)]
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = rule(lo, mid), rule(mid, hi)
        err = abs(left + right - whole)
        local_tol = tol * max(1.0, (hi - lo) / max(b - a, 1e-300))
        if err <= local_tol or depth >= max_depth:
            if err > local_tol:
                worst = max(worst, err)
            total += left + right
        else:
            stack.append((mid, hi, right, depth + 1))
            stack.append((lo, mid, left, depth + 1))
    if worst > 0:
        raise QuadratureError("adaptive Gauss-Legendre did not converge", worst)
    return total


def integrate_pieces(f: Callable, breakpoints: Sequence[float], tol: float = 1e-12, n: int = 20):
    """Adaptive rule on each interval between consecutive breakpoints."""
    bps = sorted(set(float(t) for t in breakpoints))
    return sum(adaptive_gl(f, lo, hi, tol=tol / max(1, len(bps) - 1), n=n) for lo, hi in zip(bps[:-1], bps[1:]))
