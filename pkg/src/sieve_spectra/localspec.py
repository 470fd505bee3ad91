"""Local spaces Z/h x [0,1]: embeddings, Ramanujan projectors and difference-operator spectra."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .arith import ArithCache, CharacterTable, character_table, e, gauss_sum, ramanujan_values, reduced_residues
from .kernel import I0, WeightKernel
from .lsq import ComplexSequence, farey_sums, raw_form, smoothed_form
from .report import CheckReport
from .transform import TransformConfig, w_hat_star, w_star_lattice

SPECTRUM_TOL = 1e-8


def padded_length(N: int) -> int:
    """N' = N + ceil(sqrt(N))."""
    return N + math.isqrt(N - 1) + 1 if N > 0 else 0


def midpoints(M: int) -> np.ndarray:
    return (np.arange(1, M + 1) - 0.5) / M


@dataclass(frozen=True)
class GridFunction:
    """F(b, y_j) for residues b = 1..h (row b-1) and midpoint nodes y_j = (j - 1/2)/M."""

    h: int
    M: int
    values: np.ndarray

    def inner(self, other: "GridFunction") -> complex:
        """(1/h) sum_b (1/M) sum_j F conj(G)."""
        return complex(np.vdot(other.values, self.values) / (self.h * self.M))

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self).real, 0.0))


def gamma_embed(phi: ComplexSequence, h: int, M: int) -> GridFunction:
    """Step-function embedding: row b, node y gets phi at b + h * floor(N' y / h)."""
    N = phi.N
    Np = padded_length(N)
    if h > Np - N:
        raise ValueError(f"need h <= N' - N = {Np - N}, got h={h}")
    y = midpoints(M)
    block = np.floor(Np * y / h).astype(np.int64)
    n = np.arange(1, h + 1)[:, None] + h * block[None, :]
    padded = np.concatenate([[0.0], phi.values, np.zeros(max(0, int(n.max()) - N))])
    return GridFunction(h, M, padded[n].astype(complex))


def gamma_adjoint(F: GridFunction, N: int) -> ComplexSequence:
    """(N/h) times the integral of F(sigma(n), y) over the window of n.

    The window of n is [(n - sigma(n))/N', (n - sigma(n) + h)/N'), sigma(n) in 1..h.
    """
    h, M = F.h, F.M
    Np = padded_length(N)
    if M * h < Np:
        raise ValueError(f"grid of {M} nodes cannot resolve windows of width {h}/{Np}")
    y = midpoints(M)
    n = np.arange(1, N + 1)
    sigma = (n - 1) % h + 1
    lo = (n - sigma) / Np
    hi = (n - sigma + h) / Np
    first = np.searchsorted(y, lo, side="left")
    last = np.searchsorted(y, hi, side="left")
    csum = np.concatenate([np.zeros((h, 1), dtype=complex), np.cumsum(F.values, axis=1)], axis=1)
    rows = sigma - 1
    integral = (csum[rows, last] - csum[rows, first]) / M
    return ComplexSequence(N, N / h * integral)


@lru_cache(maxsize=256)
def _projector(h: int) -> np.ndarray:
    b = np.arange(1, h + 1)
    P = ramanujan_values(h, b[:, None] - b[None, :]) / h
    P.setflags(write=False)
    return P


def project_pure(F: GridFunction) -> GridFunction:
    """(1/h) sum_c c_h(b - c) F(c, y): projection onto the reduced-residue part."""
    return GridFunction(F.h, F.M, _projector(F.h) @ F.values)


def pure_embed(phi: ComplexSequence, h: int, M: int) -> GridFunction:
    return project_pure(gamma_embed(phi, h, M))


def base_vectors(table: CharacterTable) -> np.ndarray:
    """Rows chi: tau_h(chi, b)/sqrt(phi(h)) for b = 1..h; orthonormal under (1/h) sum_b."""
    h = table.modulus
    b = np.arange(1, h + 1)
    rows = [gauss_sum(table, i, b) for i in range(table.count)]
    return np.array(rows) / math.sqrt(table.count)


def difference_samples(kernel: WeightKernel, cfg: TransformConfig, tau_over_h: float, K: int) -> np.ndarray:
    """V(k/K) = W*(tau k/(h K)) for k = 0..K, with V(0) = 0."""
    return np.concatenate([[0.0], w_star_lattice(kernel, cfg, tau_over_h / K, K)])


@dataclass(frozen=True)
class KernelIntegrals:
    """Integrals of V(y) = W*(tau y/h) over [0, 1] from a fine trapezoid lattice."""

    weighted_square: float  # 2 * int V^2 (1 - y)
    square: float  # int V^2
    weighted_abs: float  # 2 * int |V| (1 - y)
    variation: float  # int_{-1}^{1} |V'|


def kernel_integrals(kernel: WeightKernel, tau_over_h: float, K: int = 1600, tol: float = 1e-6) -> KernelIntegrals:
    V = difference_samples(kernel, TransformConfig(quad_tol=tol), tau_over_h, K)
    y = np.arange(K + 1) / K
    w = np.full(K + 1, 1.0 / K)
    w[[0, -1]] *= 0.5
    return KernelIntegrals(
        weighted_square=2.0 * float(np.sum(w * V**2 * (1 - y))),
        square=float(np.sum(w * V**2)),
        weighted_abs=2.0 * float(np.sum(w * np.abs(V) * (1 - y))),
        variation=2.0 * float(np.sum(np.abs(np.diff(V)))),
    )


@dataclass(frozen=True)
class Spectrum:
    """Top-|lambda| eigenpairs of the midpoint Nystrom matrix (1/M) V(y_i - y_j).

    eigenfunctions[l] holds G_l at the nodes, normalised so (1/M) sum G^2 = 1.
    all_eigenvalues keeps the full list for trace and Frobenius checks.
    """

    tau_over_h: float
    M: int
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    kernel_samples: np.ndarray
    all_eigenvalues: np.ndarray
    profile: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return self.kernel_samples / self.M


def nystrom_spectrum(
    kernel: WeightKernel,
    cfg: TransformConfig,
    tau: float,
    h: int,
    M: int,
    L: int,
) -> Spectrum:
    if M < 64:
        raise ValueError("need M >= 64")
    if not 1 <= L <= M:
        raise ValueError(f"need 1 <= L <= M, got L={L}")
    ratio = tau / h
    profile = difference_samples(kernel, cfg, ratio, M)
    idx = np.arange(M)
    samples = profile[np.abs(idx[:, None] - idx[None, :])]
    lam, vec = np.linalg.eigh(samples / M)
    order = np.lexsort((np.arange(M), -np.abs(lam)))
    lam, vec = lam[order], vec[:, order]
    G = vec.T * math.sqrt(M)
    for row in G:
        nz = np.nonzero(np.abs(row) > 1e-8 * np.max(np.abs(row)))[0]
        if nz.size and row[nz[0]] < 0:
            row *= -1
    return Spectrum(ratio, M, lam[:L].copy(), G[:L].copy(), samples, lam, profile)


def _operator(spectrum: Spectrum, F: GridFunction) -> GridFunction:
    return GridFunction(F.h, F.M, F.values @ spectrum.matrix.T)


def mercer_check(spectrum: Spectrum, L: int, slack: float = 5e-4) -> CheckReport:
    """max |V(y_i - y_j) - sum_{l <= L} lambda_l G_l(y_i) G_l(y_j)| against |lambda_{L+1}| + slack."""
    if L >= len(spectrum.eigenvalues):
        raise ValueError("need L < number of computed eigenpairs")
    G = spectrum.eigenfunctions[:L]
    approx = (G.T * spectrum.eigenvalues[:L]) @ G if L else np.zeros_like(spectrum.kernel_samples)
    lhs = float(np.max(np.abs(spectrum.kernel_samples - approx)))
    rhs = float(abs(spectrum.eigenvalues[L]))
    return CheckReport.inequality(
        "mercer", {"tau_over_h": spectrum.tau_over_h, "M": spectrum.M, "L": L}, lhs, rhs, slack, f"slack {slack}"
    )


def v_hat(kernel: WeightKernel, cache: ArithCache, tau_over_h: float, u) -> np.ndarray:
    """Fourier transform of V(y) = W*(tau y/h): (h/tau) W-hat-star(u h/tau)."""
    scale = 1.0 / tau_over_h
    return scale * np.atleast_1d(w_hat_star(kernel, cache, np.asarray(u, dtype=float) * scale))


def v_hat_range(kernel: WeightKernel, cache: ArithCache, tau_over_h: float, u_max: float = 1e3) -> tuple[float, float]:
    """Min and max of V-hat over |u| <= u_max.

    W-hat-star never exceeds its plateau (W >= 0), so the max is the plateau.
    The min is searched on a fine grid where the dip lives and a coarser one beyond.
    """
    scale = 1.0 / tau_over_h
    top = u_max * scale
    fine = np.linspace(0.5, min(20.0, top), 20001)
    coarse = np.arange(20.0, top, 0.1) if top > 20 else np.zeros(0)
    vals = w_hat_star(kernel, cache, np.concatenate([fine, coarse]))
    return scale * float(np.min(vals)), scale * kernel.plateau


def fourier_eig_bounds(
    spectrum: Spectrum,
    kernel: WeightKernel,
    cache: ArithCache,
    tau: float,
    h: int,
    tol: float = 1e-6,
    u_max: float = 1e3,
) -> CheckReport:
    """All eigenvalues inside [min V-hat - tol, max V-hat + tol] (Rayleigh quotient bound)."""
    lo, hi = v_hat_range(kernel, cache, tau / h, u_max)
    lam = spectrum.all_eigenvalues
    excess = max(float(np.max(lam)) - hi, lo - float(np.min(lam)), 0.0)
    paper_bracket = bool(np.all(lam >= -lo) and np.all(lam <= hi))
    notes = (
        f"lambda in [{lam.min():.6g}, {lam.max():.6g}], V-hat in [{lo:.6g}, {hi:.6g}]; "
        f"bracket [-min, max] holds: {paper_bracket}"
    )
    return CheckReport(
        "eigenvalue_interval",
        {"tau_over_h": tau / h, "M": spectrum.M},
        float(np.max(np.abs(lam))),
        max(hi, -lo),
        excess,
        tol,
        excess <= tol,
        notes,
    )


@dataclass(frozen=True)
class PullbackVector:
    h: int
    ell: int
    chi_index: int
    N: int
    tau_over_h: float
    values: np.ndarray

    def sequence(self) -> ComplexSequence:
        return ComplexSequence(self.N, self.values)


def interpolate_eigenfunction(spectrum: Spectrum, ell: int, t: np.ndarray) -> np.ndarray:
    """Linear interpolation of G_ell between midpoint nodes, constant beyond the end nodes."""
    return np.interp(t, midpoints(spectrum.M), spectrum.eigenfunctions[ell - 1])


def pullback(spectrum: Spectrum, table: CharacterTable, N: int, h: int, ell: int, chi_index: int) -> PullbackVector:
    """g(n) = tau_h(chi, n)/sqrt(phi(h)) * G_ell(n/N) for n = 1..N."""
    if table.modulus != h:
        raise ValueError("character table modulus differs from h")
    if not 1 <= ell <= len(spectrum.eigenvalues):
        raise ValueError(f"eigenfunction index {ell} not computed")
    n = np.arange(1, N + 1)
    tau_row = gauss_sum(table, chi_index, np.arange(h))
    values = tau_row[n % h] / math.sqrt(table.count) * interpolate_eigenfunction(spectrum, ell, n / N)
    return PullbackVector(h, ell, chi_index, N, spectrum.tau_over_h, values)


def gram_matrix(family: Sequence[PullbackVector]) -> np.ndarray:
    """[g_i, g_j]_N for the whole family."""
    X = np.array([g.values for g in family])
    return (X @ X.conj().T) / family[0].N


def bessel_bound(phi: ComplexSequence, family: Sequence[PullbackVector]) -> CheckReport:
    """Selberg's form of Bessel: sum_i |[phi, g_i]|^2 / sum_j |[g_i, g_j]| <= [phi, phi]."""
    G = gram_matrix(family)
    X = np.array([g.values for g in family])
    proj = X.conj() @ phi.values / phi.N
    lhs = float(np.sum(np.abs(proj) ** 2 / np.sum(np.abs(G), axis=1)))
    rhs = phi.norm2() / phi.N
    return CheckReport.inequality("bessel", {"N": phi.N, "family": len(family)}, lhs, rhs, 1e-12)


def character_sum_sides(phi: ComplexSequence, G_values: np.ndarray, table: CharacterTable) -> tuple[float, float]:
    """Character side and reduced-residue side of the Gauss-sum/Farey identity.

    Sum over chi of |sum_n phi_n tau_h(chi, n) G_n|^2 / phi(h), and
    sum over a mod* h of |sum_n phi_n G_n e(na/h)|^2.
    """
    h = table.modulus
    x = phi.values * G_values
    n = phi.indices
    chi_side = 0.0
    for i in range(table.count):
        tau_n = gauss_sum(table, i, np.arange(h))[n % h]
        chi_side += abs(np.dot(x, tau_n)) ** 2
    chi_side /= table.count
    a = reduced_residues(h)
    a_side = float(np.sum(np.abs(e(np.outer(a, n) % h / h) @ x) ** 2))
    return float(chi_side), a_side


def grid_spectral_sides(F: GridFunction, spectrum: Spectrum, table: CharacterTable) -> tuple[float, float]:
    """<F, V F> against the full eigen-expansion over all M eigenpairs and all characters."""
    direct = _operator(spectrum, F).inner(F).real
    base = base_vectors(table)
    lam_all, vec = np.linalg.eigh(spectrum.matrix)
    G = vec.T * math.sqrt(spectrum.M)
    # <F, Base_chi (x) G_l> = (1/h)(1/M) sum_b sum_j F(b,j) conj(Base_chi(b)) G_l(j)
    coeff = base.conj() @ F.values @ G.T / (F.h * F.M)
    expansion = float(np.sum(lam_all[None, :] * np.abs(coeff) ** 2))
    return float(direct), expansion


@dataclass
class SpectralIdentityResult:
    lhs: float
    operator_form: float
    eigen_form: float
    direct_parts: dict


def spectral_identity(
    phi: ComplexSequence,
    kernel: WeightKernel,
    cache: ArithCache,
    Q: float,
    H: float,
    L: int,
    M: Optional[int] = None,
    cfg: Optional[TransformConfig] = None,
) -> CheckReport:
    """Three readings of the smoothed form divided by Q.

    (i) the smoothed form itself; (ii) I0 |phi|^2 - N sum_h (tau/h) <Pure phi, V Pure phi>
    on the grid; (iii) I0 |phi|^2 - (1/N) sum_h (tau/h) sum_{l <= L} lambda_l
    sum_{a mod* h} |sum_n phi_n G_l(n/N) e(na/h)|^2. Residuals are reported, not asserted.
    """
    cfg = cfg or TransformConfig(quad_tol=SPECTRUM_TOL)
    N = phi.N
    Np = padded_length(N)
    M = M or Np * max(1, math.ceil(400 / Np))
    tau = N / Q
    lhs = smoothed_form(phi, kernel, Q) / Q
    base = I0(kernel, cache, Q) * phi.norm2()
    op_sum = 0.0
    eig_sum = 0.0
    exact = {}
    for h in range(1, math.floor(H) + 1):
        spectrum = nystrom_spectrum(kernel, cfg, tau, h, M, min(L, M))
        F = pure_embed(phi, h, M)
        table = character_table(h)
        op_term = _operator(spectrum, F).inner(F).real
        op_sum += tau / h * op_term
        direct, expansion = grid_spectral_sides(F, spectrum, table)
        exact[f"grid_spectral_h{h}"] = abs(direct - expansion)
        for ell in range(1, min(L, M) + 1):
            G_vals = interpolate_eigenfunction(spectrum, ell, phi.indices / N)
            chi_side, a_side = character_sum_sides(phi, G_vals, table)
            exact[f"charsum_h{h}_l{ell}"] = abs(chi_side - a_side)
            eig_sum += tau / h * spectrum.eigenvalues[ell - 1] * a_side
    operator_form = base - N * op_sum
    eigen_form = base - eig_sum / N
    worst_exact = max(exact.values()) if exact else 0.0
    notes = (
        f"operator form {operator_form:.12g}; eigen form {eigen_form:.12g}; "
        f"|lhs - operator| {abs(lhs - operator_form):.3e}; |lhs - eigen| {abs(lhs - eigen_form):.3e}; "
        f"worst exact sub-identity residual {worst_exact:.3e}"
    )
    return CheckReport(
        "spectral_identity",
        {"N": N, "Q": Q, "H": H, "L": L, "M": M},
        lhs,
        operator_form,
        abs(lhs - operator_form),
        float("inf"),
        True,
        notes,
    )


def lowerbound_scan(
    kernel: WeightKernel,
    cache: ArithCache,
    N: int,
    Q_grid: Iterable[float],
    sequences: Sequence[tuple[str, ComplexSequence]],
) -> tuple[list[dict], dict]:
    """raw_form / (Q^2 |phi|^2) against N/Q, plus a least-squares slope of log(ratio) on N/Q per sequence."""
    rows = []
    fits = {}
    Qs = list(Q_grid)
    for label, phi in sequences:
        norm = phi.norm2()
        if norm == 0:
            raise ValueError(f"sequence {label} is identically zero")
        xs, ys = [], []
        for Q in Qs:
            ratio = raw_form(phi, Q) / (Q * Q * norm)
            rows.append({"sequence": label, "N": N, "Q": Q, "N_over_Q": N / Q, "ratio": ratio})
            if ratio > 0:
                xs.append(N / Q)
                ys.append(math.log(ratio))
        if len(xs) >= 2:
            fits[label] = float(np.polyfit(xs, ys, 1)[0])
    return rows, fits


def rows_to_csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)
