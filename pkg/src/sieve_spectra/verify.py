"""Verification suites: every identity and inequality as a list of CheckReport records.

Tolerances follow two tiers. Exact identities use absolute tolerances near 1e-8
or tighter. Discretisation identities use K/M with K frozen at calibration, so
at the default M = 400 they reproduce the documented thresholds. Asymptotic
statements become ladder checks on ensemble statistics.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .arith import character_table, ramanujan_sum, shared_cache
from .kernel import I0, build_weight, conv_power, fourier_pm, mellin_W, renyi_closed_form
from .localspec import (
    GridFunction,
    base_vectors,
    bessel_bound,
    character_sum_sides,
    fourier_eig_bounds,
    gamma_adjoint,
    gamma_embed,
    gram_matrix,
    grid_spectral_sides,
    kernel_integrals,
    lowerbound_scan,
    mercer_check,
    midpoints,
    nystrom_spectrum,
    padded_length,
    project_pure,
    pullback,
    spectral_identity,
    _operator,
)
from .lsq import (
    ComplexSequence,
    SieveParams,
    delta_bilinear,
    delta_decomposition,
    delta_symbol,
    least_prime_factor,
    precise_rhs,
    prime_support_check,
    smoothed_form,
    vic_remainder,
)
from .quadrature import integrate_pieces
from .report import CheckReport
from .sequences import SequenceSpec, XorShift64Star, generate_sequence
from .transform import (
    TransformConfig,
    mobius_partial,
    series_bound,
    w_flat,
    w_hat_star,
    w_sharp,
    w_star,
    w_star_C,
    w_star_fourier,
    w_star_series,
    w_tilde,
)

__all__ = [
    "CheckReport",
    "SequenceSpec",
    "generate_sequence",
    "DEFAULTS",
    "SUITES",
    "BudgetExceeded",
    "resolve_config",
    "run_suite",
    "reports_to_json",
]

EXACT_TOL = 1e-8
# Discretisation constants K in tol = K / M, frozen at M = 400.
SQUARES_K = 0.04
MERCER_K = 0.2

DEFAULTS: dict = {
    "m": 5,
    "seed": 1,
    "points": 100,
    "delta_Q": 20,
    "delta_C": 4,
    "delta_E": 4,
    "delta_H": 3,
    "delta_vmax": 50,
    "bilinear_N": 40,
    "bilinear_Q": 25,
    "bilinear_count": 20,
    "M": 400,
    "tau_over_h": (0.25, 1.0, 4.0),
    "mercer_L": (5, 20),
    "squares_K": 1600,
    "eig_tol": 1e-6,
    "charsum_h": (2, 12),
    "isometry_N": 400,
    "isometry_h": 3,
    "adjoint_N": 100,
    "adjoint_h": 4,
    "ladder_N": 16,
    "ladder_count": 10,
    "ladder_exponents": (5, 9),
    "precise_N": 300,
    "precise_Q": 150,
    "precise_H": (0.5, 1, 2, 4, 8, 16),
    "precise_count": 20,
    "gram_N": 20000,
    "gram_tau": 1.0,
    "gram_hmax": 4,
    "gram_L": 3,
    "gram_tol": 0.05,
    "scan_N": 200,
    "scan_Q": (0.5, 1, 2, 5, 10, 20),
    "identity_N": 60,
    "identity_Q": 30,
    "identity_H": 2,
    "identity_L": 10,
    "primes_N": 10000,
    "primes_Q0": (10, 50, 100),
    "budget": None,
}


class BudgetExceeded(RuntimeError):
    pass


def _coerce(key: str, value):
    default = DEFAULTS[key]
    if not isinstance(value, str):
        return tuple(value) if isinstance(default, tuple) else value
    text = value.strip()
    if key == "budget":
        text = text.rstrip("s")
        return None if text.lower() in ("", "none") else float(text)
    if isinstance(default, tuple):
        kind = type(default[0])
        return tuple(kind(float(x)) if kind is int else kind(x) for x in text.split(",") if x.strip())
    if isinstance(default, int):
        return int(float(text))
    return float(text)


def resolve_config(config: Optional[dict] = None) -> dict:
    """Defaults overlaid with ``config``; string values are parsed by the default's type."""
    out = dict(DEFAULTS)
    for key, value in (config or {}).items():
        if key not in DEFAULTS:
            raise ValueError(f"unknown config key {key!r}")
        out[key] = _coerce(key, value)
    return out


def _random_points(seed: int, count: int, lo: float, hi: float) -> np.ndarray:
    rng = XorShift64Star(seed)
    return np.array([lo + (hi - lo) * rng.uniform() for _ in range(count)])


def _signs(N: int, seed: int) -> ComplexSequence:
    return generate_sequence(SequenceSpec("random_signs", N, seed))


def _kernel(cfg: dict):
    return build_weight(int(cfg["m"]))


# ---------------------------------------------------------------- transforms


def _piecewise_even(pieces: list[tuple[float, Callable]], t: np.ndarray) -> np.ndarray:
    """Evaluate an even function given as (upper |t| bound, formula) pairs."""
    a = np.abs(t)
    out = np.zeros_like(a)
    lo = 0.0
    for hi, f in pieces:
        mask = (a >= lo) & (a <= hi)
        out[mask] = f(a[mask])
        lo = hi
    return out


CLOSED_FORMS = {
    2: [(2.0, lambda a: 2 - a)],
    3: [(1.0, lambda a: 3 - a**2), (3.0, lambda a: (3 - a) ** 2 / 2)],
    5: [
        (1.0, lambda a: (115 - 30 * a**2 + 3 * a**4) / 12),
        (3.0, lambda a: (55 + 10 * a - 30 * a**2 + 10 * a**3 - a**4) / 6),
        (5.0, lambda a: (625 - 500 * a + 150 * a**2 - 20 * a**3 + a**4) / 24),
    ],
}


def check_closed_forms(cfg: dict) -> list[CheckReport]:
    out = []
    for m, pieces in CLOSED_FORMS.items():
        t = _random_points(cfg["seed"] + m, cfg["points"], -m - 0.5, m + 0.5)
        got = conv_power(m)(t)
        want = _piecewise_even(pieces, t)
        out.append(
            CheckReport.equality(
                f"closed_form_m{m}", {"m": m, "points": len(t)}, float(np.max(np.abs(got - want))), 0.0, 1e-12,
                "max deviation of the convolution recursion from the closed form",
            )
        )
    out.append(
        CheckReport.equality("closed_form_m5_at_0", {"m": 5}, float(conv_power(5)(0.0)), float(Fraction(115, 12)), 1e-12)
    )
    for m in range(1, 9):
        t = _random_points(cfg["seed"] + 100 + m, cfg["points"], -m - 0.5, m + 0.5)
        dev = float(np.max(np.abs(conv_power(m)(t) - renyi_closed_form(m, t))))
        out.append(CheckReport.equality("renyi_sum", {"m": m}, dev, 0.0, 1e-10, "alternating binomial sum"))
    return out


def check_kernel_constants(cfg: dict) -> list[CheckReport]:
    k = _kernel(cfg)
    cache = shared_cache(10**5)
    pm = k.pm
    mass = integrate_pieces(lambda t: pm(t), [float(b) for b in pm.breakpoints], tol=1e-13)
    quad = integrate_pieces(
        lambda t: pm(t) * np.exp(-2j * np.pi * 1.3 * t), [float(b) for b in pm.breakpoints], tol=1e-13
    )
    return [
        CheckReport.equality("plateau_constant", {"m": k.m}, k.plateau, 0.816, 1e-3, "(6/pi^2) int_0^inf W"),
        CheckReport.equality("bump_mass", {"m": k.m}, mass, 1.0, 1e-12),
        CheckReport.equality("bump_fourier_at_0", {"m": k.m}, abs(fourier_pm(k.m, 0.0)), 1.0, 1e-15),
        CheckReport.equality(
            "bump_fourier_quadrature", {"m": k.m, "u": 1.3}, abs(fourier_pm(k.m, 1.3) - quad), 0.0, 1e-9,
            "closed form against Gauss-Legendre",
        ),
        CheckReport.equality("mellin_at_0", {"m": k.m}, mellin_W(k, 0.0).real, k.J, 1e-9, "Mellin at 0 is J"),
        CheckReport.equality("mellin_at_1", {"m": k.m}, mellin_W(k, 1.0).real, k.integral0, 1e-9),
        CheckReport.equality(
            "I0_large_Q", {"m": k.m, "Q": 10**4}, I0(k, cache, 1e4), k.plateau, 0.01, "I0 tends to the plateau"
        ),
    ]


def check_transform_chain(cfg: dict) -> list[CheckReport]:
    k = _kernel(cfg)
    cache = shared_cache(10**5)
    tc = TransformConfig(quad_tol=1e-9)
    out = [
        CheckReport.equality("w_sharp_single", {"y": 1.5}, float(w_sharp(k, 1.5)), float(k(1.5)), 1e-14),
        CheckReport.equality("w_sharp_two_terms", {"y": 3.0}, float(w_sharp(k, 3.0)), float(k(1.5)) / 2, 1e-14),
        CheckReport.equality("w_flat_small_z", {"z": 1e-3}, w_flat(k, 1e-3), k.J, 0.01, "J + O(z)"),
        CheckReport.equality("w_tilde_plateau", {"z": 0.7}, w_tilde(k, 0.7), k.J, 1e-12),
        CheckReport.equality("w_tilde_even", {"z": 5.3}, w_tilde(k, -5.3), w_tilde(k, 5.3), 1e-12),
    ]
    ys = np.array([1.3, 2.7, 4.1, 9.9])
    dev = max(abs(k.J - float(w_sharp(k, y)) - w_tilde(k, y)) for y in ys)
    out.append(
        CheckReport.equality("w_tilde_two_routes", {"y": ys.tolist()}, dev, 0.0, 1e-9, "quadrature against J - W#")
    )
    small = TransformConfig(C=10)
    out.append(
        CheckReport.equality(
            "w_star_C_at_0", {"C": 10}, float(w_star_C(k, small, 0.0)), k.J * mobius_partial(cache, 10), 1e-12
        )
    )
    value, bound = w_star_series(k, TransformConfig(quad_tol=1e-8), 1.0)
    out.append(
        CheckReport.equality(
            "series_vs_moebius", {"z": 1.0, "C": 2000}, value, float(w_star_C(k, TransformConfig(C=2000), 1.0)), 1e-4,
            f"series truncation bound {bound:.2e}",
        )
    )
    out.append(
        CheckReport.equality(
            "series_bound_formula", {"z": 1.0, "N": 100}, series_bound(5, 1.0, 100),
            2 * (10 / math.pi) ** 5 / (4 * 100**4), 1e-15,
        )
    )
    zs = np.array([0.5, 1.0, 2.0])
    inv = w_star_fourier(k, cache, zs, U=800)
    ser = w_star(k, tc, zs)
    out.append(
        CheckReport.equality(
            "fourier_inversion", {"z": zs.tolist(), "U": 800}, float(np.max(np.abs(inv - ser))), 0.0, 1e-6,
            "frequency cut-off U; error decays like 1/U",
        )
    )
    hat = w_hat_star(k, cache, np.array([0.0, 0.3, 0.8, 1.0]))
    out += [
        CheckReport.equality("w_hat_plateau", {"u": 0.3}, hat[1], k.plateau, 1e-12),
        CheckReport.equality("w_hat_first_step", {"u": 0.8}, hat[2], k.plateau - float(k(1.25)) / 0.8, 1e-12),
        CheckReport.equality("w_hat_one_equals_zero", {"u": 1.0}, hat[3], hat[0], 1e-12),
    ]
    return out


# --------------------------------------------------------------------- delta


def _delta_oracle(cache, kernel, Q: float, v: int) -> float:
    """Plain double loop over c and d."""
    total = 0.0
    top = math.floor(2 * Q)
    for c in range(1, top + 1):
        mu = int(cache.mu[c])
        if mu == 0:
            continue
        for d in range(1, top // c + 1):
            if v % d == 0:
                total += mu * float(kernel(c * d / Q)) / c
    return total


def check_delta_identity(cfg: dict) -> list[CheckReport]:
    k = _kernel(cfg)
    cache = shared_cache(10**5)
    Q = cfg["delta_Q"]
    out = []
    for C, E, H in ((cfg["delta_C"], cfg["delta_E"], cfg["delta_H"]), (1, 1, 1)):
        params = SieveParams(Q=Q, H=H, C=C, E=E)
        worst = 0.0
        worst_oracle = 0.0
        for v in range(-cfg["delta_vmax"], cfg["delta_vmax"] + 1):
            total = delta_decomposition(cache, k, Q, params, v).total()
            oracle = _delta_oracle(cache, k, Q, abs(v))
            worst = max(worst, abs(delta_symbol(cache, k, Q, v) - total))
            worst_oracle = max(worst_oracle, abs(oracle - total))
        p = {"Q": Q, "C": C, "E": E, "H": H, "vmax": cfg["delta_vmax"]}
        out.append(CheckReport.equality("delta_decomposition", p, worst, 0.0, 1e-9, "max over |v| of |Delta - pieces|"))
        out.append(CheckReport.equality("delta_oracle", p, worst_oracle, 0.0, 1e-9, "double-loop oracle vs pieces"))
    return out


def check_bilinear(cfg: dict) -> list[CheckReport]:
    k = _kernel(cfg)
    cache = shared_cache(10**5)
    N, Q = cfg["bilinear_N"], cfg["bilinear_Q"]
    worst = 0.0
    for s in range(cfg["bilinear_count"]):
        phi = generate_sequence(SequenceSpec("random_complex", N, cfg["seed"] + s))
        worst = max(worst, abs(smoothed_form(phi, k, Q) - delta_bilinear(phi, cache, k, Q)))
    return [
        CheckReport.equality(
            "bilinear_equivalence", {"N": N, "Q": Q, "count": cfg["bilinear_count"]}, worst, 0.0, EXACT_TOL,
            "max over seeded phi of |smoothed form - sum phi_m conj(phi_n) Delta(m-n)|",
        )
    ]


# ------------------------------------------------------------------- precise


def _ladder_reports(check_id: str, params: dict, table: np.ndarray, label: str) -> list[CheckReport]:
    """table[i, j]: residual of sequence i at ladder step j. Asserts ensemble max and mean decrease."""
    per_phi = int(np.sum(np.all(np.diff(table, axis=1) < 0, axis=1)))
    out = []
    for stat, values in (("max", table.max(axis=0)), ("mean", table.mean(axis=0))):
        rise = float(np.max(np.maximum(np.diff(values), 0.0)))
        notes = (
            f"ensemble {stat} along {label}: {', '.join(f'{x:.3e}' for x in values)}; "
            f"{per_phi}/{table.shape[0]} sequences individually monotone; residual is the largest increase"
        )
        out.append(CheckReport(f"{check_id}_{stat}", dict(params), float(values[0]), float(values[-1]), rise, 0.0,
                               rise <= 0.0, notes))
    return out


def check_large_q_ladder(cfg: dict) -> list[CheckReport]:
    k = _kernel(cfg)
    cache = shared_cache(10**5)
    N = cfg["ladder_N"]
    lo, hi = cfg["ladder_exponents"]
    ratios = [N * 2**j for j in range(lo, hi + 1)]
    cache.require(2 * max(ratios))
    table = np.zeros((cfg["ladder_count"], len(ratios)))
    for i in range(cfg["ladder_count"]):
        phi = _signs(N, cfg["seed"] + i)
        for j, Q in enumerate(ratios):
            table[i, j] = abs(delta_bilinear(phi, cache, k, Q) / (Q * I0(k, cache, Q) * phi.norm2()) - 1)
    return _ladder_reports("large_q_ladder", {"N": N, "Q_over_N": [2**j for j in range(lo, hi + 1)]}, table, "Q/N")


def check_precise_ladder(cfg: dict) -> list[CheckReport]:
    k = _kernel(cfg)
    cache = shared_cache(10**5)
    N, Q, Hs = cfg["precise_N"], cfg["precise_Q"], cfg["precise_H"]
    table = np.zeros((cfg["precise_count"], len(Hs)))
    for i in range(cfg["precise_count"]):
        phi = _signs(N, cfg["seed"] + i)
        lhs = smoothed_form(phi, k, Q) / Q
        for j, H in enumerate(Hs):
            table[i, j] = abs(lhs - precise_rhs(phi, k, cache, Q, H)) / phi.norm2()
    return _ladder_reports("precise_ladder", {"N": N, "Q": Q, "H": list(Hs)}, table, "H")


def check_remainder_functional(cfg: dict) -> list[CheckReport]:
    N, Q = cfg["precise_N"], cfg["precise_Q"]
    out = []
    for H in (1, 2, 4):
        phi = _signs(N, cfg["seed"])
        value = vic_remainder(phi, H, Q)
        out.append(CheckReport("vic_remainder", {"N": N, "Q": Q, "H": H}, value, float("inf"), 0.0, float("inf"),
                               True, "measurement only; implied constant unspecified"))
    return out


# ------------------------------------------------------------------ spectrum


def _spectrum(cfg: dict, ratio: float):
    return nystrom_spectrum(_kernel(cfg), TransformConfig(quad_tol=1e-8), ratio, 1, cfg["M"], cfg["M"])


def check_spectrum(cfg: dict, ratio: float) -> list[CheckReport]:
    k = _kernel(cfg)
    cache = shared_cache(10**5)
    M = cfg["M"]
    spectrum = _spectrum(cfg, ratio)
    lam = spectrum.all_eigenvalues
    p = {"tau_over_h": ratio, "M": M}
    ints = kernel_integrals(k, ratio, cfg["squares_K"])
    out = [
        CheckReport.equality("trace", p, float(np.trace(spectrum.matrix)), 0.0, 1e-14, "diagonal is V(0) = 0"),
        CheckReport.equality("eigenvalue_sum", p, float(np.sum(lam)), 0.0, 1e-12),
        CheckReport.equality(
            "sum_of_squares", p, float(np.sum(lam**2)), ints.weighted_square, SQUARES_K / M,
            f"rhs by trapezoid on {cfg['squares_K']} cells; tolerance {SQUARES_K}/M",
        ),
    ]
    ell = np.arange(1, lam.size + 1)
    bound = math.sqrt(2 * ints.square) / np.sqrt(ell)
    excess = float(np.max(np.abs(lam) - bound))
    out.append(CheckReport.inequality("eigenvalue_decay", p, float(np.max(np.abs(lam) * np.sqrt(ell))),
                                      math.sqrt(2 * ints.square), 0.0, f"max excess over the bound {excess:.3e}"))
    for L in cfg["mercer_L"]:
        out.append(mercer_check(spectrum, L, MERCER_K / M))
    out.append(fourier_eig_bounds(spectrum, k, cache, ratio, 1, cfg["eig_tol"]))
    both = bool(lam.max() > 0 > lam.min())
    out.append(CheckReport.inequality("mixed_signs", p, 0.0 if both else 1.0, 0.0, 0.0,
                                      "lhs is 0 when positive and negative eigenvalues both occur"))
    return out


def check_character_sums(cfg: dict) -> list[CheckReport]:
    lo, hi = cfg["charsum_h"]
    out = []
    N = 60
    for h in range(lo, hi + 1):
        phi = generate_sequence(SequenceSpec("random_complex", N, cfg["seed"] + h))
        G = _random_points(cfg["seed"] + 1000 + h, N, -1.0, 1.0)
        chi_side, a_side = character_sum_sides(phi, G, character_table(h))
        out.append(CheckReport.equality("character_sum_identity", {"h": h, "N": N}, chi_side, a_side, 1e-9))
    return out


def check_embedding(cfg: dict) -> list[CheckReport]:
    out = []
    N, h = cfg["isometry_N"], cfg["isometry_h"]
    Np = padded_length(N)
    phi = generate_sequence(SequenceSpec("random_complex", N, cfg["seed"]))
    psi = generate_sequence(SequenceSpec("random_complex", N, cfg["seed"] + 1))
    M = 2 * Np
    lhs = gamma_embed(phi, h, M).inner(gamma_embed(psi, h, M))
    rhs = N / Np * phi.dot(psi)
    out.append(CheckReport.equality("embedding_isometry", {"N": N, "h": h, "M": M}, abs(lhs - rhs), 0.0, 1e-9,
                                    "|<Gamma phi, Gamma psi> - (N/N')[phi, psi]_N|"))
    N, h = cfg["adjoint_N"], cfg["adjoint_h"]
    Np = padded_length(N)
    M = 3 * Np
    phi = generate_sequence(SequenceSpec("random_complex", N, cfg["seed"] + 2))
    back = gamma_adjoint(gamma_embed(phi, h, M), N)
    dev = float(np.max(np.abs(back.values - N / Np * phi.values)))
    out.append(CheckReport.equality("adjoint_composition", {"N": N, "h": h, "M": M}, dev, 0.0, 1e-9))
    rng = XorShift64Star(cfg["seed"] + 3)
    raw = np.array([[rng.uniform() - 0.5 + 1j * (rng.uniform() - 0.5) for _ in range(M)] for _ in range(h)])
    F = GridFunction(h, M, raw)
    adj = abs(gamma_embed(phi, h, M).inner(F) - phi.dot(gamma_adjoint(F, N)))
    out.append(CheckReport.equality("adjointness", {"N": N, "h": h, "M": M}, adj, 0.0, 1e-9))
    for hh in (1, 2, 6, 12):
        rng = XorShift64Star(cfg["seed"] + 10 + hh)
        F = GridFunction(hh, 64, np.array([[rng.uniform() - 0.5 for _ in range(64)] for _ in range(hh)]))
        P = project_pure(F)
        dev = float(np.max(np.abs(project_pure(P).values - P.values)))
        out.append(CheckReport.equality("projector_idempotent", {"h": hh}, dev, 0.0, 1e-11))
    spectrum = nystrom_spectrum(_kernel(cfg), TransformConfig(quad_tol=1e-8), 1.0, 6, 64, 1)
    rng = XorShift64Star(cfg["seed"] + 99)
    F = GridFunction(6, 64, np.array([[rng.uniform() - 0.5 for _ in range(64)] for _ in range(6)]))
    dev = float(np.max(np.abs(project_pure(_operator(spectrum, F)).values - _operator(spectrum, project_pure(F)).values)))
    out.append(CheckReport.equality("projector_commutes", {"h": 6, "M": 64}, dev, 0.0, 1e-10))
    table = character_table(6)
    base = base_vectors(table)
    gram = base.conj() @ base.T / 6
    out.append(CheckReport.equality("base_orthonormal", {"h": 6}, float(np.max(np.abs(gram - np.eye(len(base))))),
                                    0.0, 1e-12))
    return out


# -------------------------------------------------------------------- global


def _pullback_family(cfg: dict):
    k = _kernel(cfg)
    tc = TransformConfig(quad_tol=1e-8)
    family = []
    for h in range(1, cfg["gram_hmax"] + 1):
        spectrum = nystrom_spectrum(k, tc, cfg["gram_tau"], h, cfg["M"], cfg["gram_L"])
        table = character_table(h)
        for ell in range(1, cfg["gram_L"] + 1):
            for chi in range(table.count):
                family.append(pullback(spectrum, table, cfg["gram_N"], h, ell, chi))
    return family


def check_gram(cfg: dict) -> list[CheckReport]:
    family = _pullback_family(cfg)
    G = gram_matrix(family)
    dev = float(np.max(np.abs(G - np.eye(len(family)))))
    p = {"N": cfg["gram_N"], "tau": cfg["gram_tau"], "hmax": cfg["gram_hmax"], "L": cfg["gram_L"],
         "family": len(family)}
    out = [CheckReport.inequality("near_orthonormal", p, dev, cfg["gram_tol"], 0.0,
                                  "max |Gram - I|; threshold calibrated once and frozen")]
    worst = 0.0
    for s in range(20):
        phi = _signs(cfg["gram_N"], cfg["seed"] + s)
        rep = bessel_bound(phi, family)
        worst = max(worst, rep.lhs - rep.rhs)
    out.append(CheckReport.inequality("bessel", {"N": cfg["gram_N"], "count": 20}, worst, 0.0, 1e-12,
                                      "largest lhs - rhs over seeded phi"))
    g1 = family[0].sequence()
    tight = bessel_bound(g1, family)
    out.append(CheckReport("bessel_tight", {"N": cfg["gram_N"]}, tight.lhs, tight.rhs, 0.0, float("inf"), True,
                           f"ratio {tight.lhs / tight.rhs:.6f} for phi equal to the first pullback; recorded"))
    return out


def check_identity_harness(cfg: dict) -> list[CheckReport]:
    k = _kernel(cfg)
    cache = shared_cache(10**5)
    phi = _signs(cfg["identity_N"], cfg["seed"])
    rep = spectral_identity(phi, k, cache, cfg["identity_Q"], cfg["identity_H"], cfg["identity_L"])
    out = [rep]
    h = 3
    spectrum = nystrom_spectrum(k, TransformConfig(quad_tol=1e-8), 1.0, h, 64, 1)
    F = GridFunction(h, 64, gamma_embed(_signs(20, cfg["seed"]), h, 64).values)
    direct, expansion = grid_spectral_sides(project_pure(F), spectrum, character_table(h))
    out.append(CheckReport.equality("grid_spectral_theorem", {"h": h, "M": 64}, direct, expansion, 1e-10))
    return out


def check_lowerbound(cfg: dict) -> list[CheckReport]:
    k = _kernel(cfg)
    cache = shared_cache(10**5)
    N = cfg["scan_N"]
    seqs = [
        ("random_signs", _signs(N, cfg["seed"])),
        ("random_complex", generate_sequence(SequenceSpec("random_complex", N, cfg["seed"]))),
        ("progression", generate_sequence(SequenceSpec("progression", N, extra={"modulus": 6, "residue": 1}))),
        ("eigen_pullback", generate_sequence(SequenceSpec("eigen_pullback", N, extra={"tau_over_h": 1.0, "h": 2}))),
    ]
    rows, fits = lowerbound_scan(k, cache, N, [f * N for f in cfg["scan_Q"]], seqs)
    low = min(r["ratio"] for r in rows)
    notes = "; ".join(f"{name} slope {fits.get(name, float('nan')):.4f}" for name, _ in seqs)
    return [CheckReport.inequality("lowerbound_positive", {"N": N, "Q_over_N": list(cfg["scan_Q"])}, -low, 0.0,
                                   0.0, f"lhs is minus the smallest ratio; {notes}")]


# -------------------------------------------------------------------- primes


def check_primes(cfg: dict) -> list[CheckReport]:
    N = cfg["primes_N"]
    phi = generate_sequence(SequenceSpec("prime_indicator", N))
    out = [prime_support_check(phi, Q0, N) for Q0 in cfg["primes_Q0"]]
    root = math.isqrt(N)
    support = phi.indices[np.abs(phi.values) > 0]
    audit = min(least_prime_factor(int(n)) for n in support)
    out.append(CheckReport.inequality("prime_support_audit", {"N": N}, -audit, -root, 0.0,
                                      "least prime factor over the support is at least sqrt(N)"))
    p = int(support[0])
    spike = generate_sequence(SequenceSpec("spike", N, extra={"k": p}))
    out.append(prime_support_check(spike, 50, N))
    return out


def check_ramanujan(cfg: dict) -> list[CheckReport]:
    return [
        CheckReport.equality("ramanujan_at_0", {"h": 7}, ramanujan_sum(7, 0), 6.0, 1e-12),
        CheckReport.equality("ramanujan_c6_3", {"h": 6, "v": 3}, ramanujan_sum(6, 3), -2.0, 1e-12),
    ]


def _per_ratio(ratio: float) -> Callable[[dict], list[CheckReport]]:
    return lambda cfg: check_spectrum(cfg, ratio)


def _spectrum_checks(cfg: dict) -> list[tuple[str, Callable]]:
    return [(f"spectrum_{r}", _per_ratio(r)) for r in cfg["tau_over_h"]] + [
        ("character_sums", check_character_sums),
        ("embedding", check_embedding),
    ]


SUITES: dict[str, Callable[[dict], list[tuple[str, Callable]]]] = {
    "transforms": lambda cfg: [
        ("closed_forms", check_closed_forms),
        ("kernel_constants", check_kernel_constants),
        ("transform_chain", check_transform_chain),
        ("ramanujan", check_ramanujan),
    ],
    "delta": lambda cfg: [("delta_identity", check_delta_identity), ("bilinear", check_bilinear)],
    "precise": lambda cfg: [("large_q", check_large_q_ladder), ("precise", check_precise_ladder), ("remainder", check_remainder_functional)],
    "spectrum": _spectrum_checks,
    "global": lambda cfg: [
        ("gram", check_gram),
        ("identity", check_identity_harness),
        ("lowerbound", check_lowerbound),
    ],
    "primes": lambda cfg: [("primes", check_primes)],
}


def _threads() -> int:
    raw = os.environ.get("SIEVE_SPECTRA_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def run_suite(suite_id: str, config: Optional[dict] = None) -> list[CheckReport]:
    """Run every check of one suite (or "all") and merge reports in registration order.

    Raises BudgetExceeded when a check outlives config["budget"] seconds.
    """
    cfg = resolve_config(config)
    if suite_id == "all":
        return [r for s in SUITES for r in run_suite(s, cfg)]
    if suite_id not in SUITES:
        raise ValueError(f"unknown suite {suite_id!r}; expected one of {sorted(SUITES)} or 'all'")
    checks = SUITES[suite_id](cfg)
    budget = cfg["budget"]

    def timed(item):
        name, fn = item
        start = time.monotonic()
        reports = fn(cfg)
        elapsed = time.monotonic() - start
        if budget is not None and elapsed > budget:
            raise BudgetExceeded(f"check {name} took {elapsed:.1f} s, budget {budget} s")
        return reports

    with ThreadPoolExecutor(max_workers=min(_threads(), len(checks))) as pool:
        results = list(pool.map(timed, checks))
    return [r for group in results for r in group]


def reports_to_json(reports: list[CheckReport]) -> str:
    body = {
        "all_pass": all(r.pass_ for r in reports),
        "count": len(reports),
        "reports": [r.to_dict() for r in reports],
    }
    return json.dumps(body, indent=2) + "\n"
