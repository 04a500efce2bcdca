"""Brute-force checks that share no code path with the hypergeometric route.

* The finite section P_n C_phi P_n in the monomial basis.  Column k holds
  the first n Taylor coefficients of phi^k.  Its largest singular value
  squared is a lower bound for ||C_phi||^2 that increases with n.
* Direct summation of the norm-equation series from the closed-form tau
  iterates and the maps psi and chi.  This checks the hypergeometric
  identity, and bisection on it recovers the norm for real d.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import moebius as mb
from .errors import ComplexDUnsupported, NoConvergence, PoleInDisk
from .moebius import MoebiusMap, QdForm
from .normcalc import d_is_real, hypergeometric_params
from .specialfn import Method, SeriesEvaluation, f21_series, sum_ratio_series

log = logging.getLogger(__name__)

KEY_SERIES_MAX_TERMS = 200_000
DEFAULT_ORACLE_N = 512


@dataclass(frozen=True)
class TruncatedOperatorMatrix:
    n: int
    entries: np.ndarray


@dataclass(frozen=True)
class PowerIterationResult:
    value: float
    iterations: int
    converged: bool


def taylor_coeffs(phi: MoebiusMap, n: int) -> np.ndarray:
    """First n Taylor coefficients of phi at 0."""
    if n < 1:
        raise ValueError("n must be positive")
    out = np.zeros(n, dtype=complex)
    if phi.is_affine:
        out[0] = phi.b / phi.d
        if n > 1:
            out[1] = phi.a / phi.d
        return out
    a, b, c, d = phi.coefficients
    if abs(d / c) <= 1:
        raise PoleInDisk("pole {!r} lies in the closed disk".format(-d / c))
    k = np.arange(n)
    out[:] = (b * c - a * d) / (c * d) * (-c / d) ** k
    out[0] += a / c
    return out


def operator_matrix(phi: MoebiusMap, n: int) -> TruncatedOperatorMatrix:
    coeffs = taylor_coeffs(phi, n)
    m = np.zeros((n, n), dtype=complex)
    col = np.zeros(n, dtype=complex)
    col[0] = 1
    for k in range(n):
        m[:, k] = col
        col = np.convolve(col, coeffs)[:n]
    return TruncatedOperatorMatrix(n, m)


def power_iteration(m: TruncatedOperatorMatrix, tol: float = 1e-13, max_iter: int = 50_000,
                    seed: int = 0) -> PowerIterationResult:
    """Largest eigenvalue of M^* M.

    Runs from the normalized all-ones vector, then once more from a seeded
    random vector, and keeps the larger Rayleigh quotient.  Convergence
    means the relative change of the Rayleigh quotient stayed below ``tol``
    on two consecutive steps.
    """
    a = m.entries
    rng = np.random.default_rng(seed)
    starts = [np.ones(m.n, dtype=complex), rng.standard_normal(m.n) + 1j * rng.standard_normal(m.n)]
    best = PowerIterationResult(0.0, 0, False)
    total = 0
    for v in starts:
        v = v / np.linalg.norm(v)
        rho = 0.0
        calm = 0
        ok = False
        for it in range(1, max_iter + 1):
            w = a @ v
            rho_new = float(np.vdot(w, w).real)
            v = a.conj().T @ w
            nv = np.linalg.norm(v)
            if nv == 0:
                rho = rho_new
                ok = True
                break
            v /= nv
            calm = calm + 1 if abs(rho_new - rho) <= tol * rho_new else 0
            rho = rho_new
            if calm >= 2:
                ok = True
                break
        total += it
        if rho > best.value:
            best = PowerIterationResult(rho, total, ok)
        elif rho == best.value:
            best = PowerIterationResult(rho, total, best.converged or ok)
    if not best.converged:
        log.warning("power iteration stopped at max_iter=%d without converging", max_iter)
    return PowerIterationResult(best.value, total, best.converged)


def truncated_norm_sq(m: TruncatedOperatorMatrix, tol: float = 1e-13, max_iter: int = 50_000) -> float:
    return power_iteration(m, tol, max_iter).value


# --------------------------------------------------------- series oracle


def _tau_orbit(qd: QdForm, b: float, z0: complex, k: np.ndarray) -> np.ndarray:
    kb = k * b
    return ((1 - kb) * z0 + kb) / (-kb * z0 + 1 + kb)


def key_series_lhs(qd: QdForm, x: float, k_max: int = KEY_SERIES_MAX_TERMS,
                   tol: float = 1e-14) -> SeriesEvaluation:
    """sum_k chi(w_k) prod_{m<k} psi(w_m) x^{k+1}, w_k = tau^[k](phi(0))."""
    if not 0 < x < qd.q:
        raise ValueError("x must lie in (0, q)")
    phi = mb.from_qd(qd)
    b = mb.b_param(qd)
    z0 = mb.apply(phi, 0)
    ca, cb, cc, cd = (v.conjugate() for v in phi.coefficients)
    det = phi.determinant.conjugate()

    def chi(w):
        return cc / (-ca * w + cc)

    def psi(w):
        return det * w / ((ca * w - cc) * (-cb * w + cd))

    def ratio(k):
        w_k = _tau_orbit(qd, b, z0, k)
        w_next = _tau_orbit(qd, b, z0, k + 1)
        return chi(w_next) * psi(w_k) / chi(w_k) * x

    first = mb.chi_at(phi, z0) * x
    value, used, ok = sum_ratio_series(first, ratio, tol, k_max)
    return SeriesEvaluation(value, used, ok, Method.DirectSeries)


def identity_residual(qd: QdForm, x: float) -> float:
    """|series - (1 - 2F1(alpha, beta; delta; x/q))|."""
    lhs = key_series_lhs(qd, x)
    p = hypergeometric_params(qd)
    rhs = f21_series(p.alpha, p.beta, p.delta, x / qd.q)
    if not (lhs.converged and rhs.converged):
        raise NoConvergence("identity check did not converge")
    return abs(lhs.value - (1 - rhs.value))


def bisect_norm_direct(qd: QdForm, tol: float = 1e-14) -> Optional[float]:
    """Largest Lambda with series(1/Lambda) = 1, by scanning and bisection.

    Returns None when no solution exists in the admissible range.
    """
    if not d_is_real(qd):
        raise ComplexDUnsupported("the series has complex coefficients for complex d")
    phi = mb.from_qd(qd)
    p0 = abs(mb.apply(phi, 0))
    upper = (1 + p0) / (1 - p0)
    q = qd.q
    if upper * q <= 1:
        return None

    def h(x):
        ev = key_series_lhs(qd, x)
        if not ev.converged:
            raise NoConvergence("series did not converge at x = {!r}".format(x), ev)
        return ev.value.real - 1

    # y = x/q runs from 1/(q upper) toward 1 geometrically in 1 - y
    y_lo = 1 / (q * upper)
    prev = y_lo * q
    if h(prev) >= 0:
        # root at the upper bound itself
        return 1 / prev
    gap = 1 - y_lo
    found = None
    while gap > 1e-4:
        gap *= 0.8
        x = q * (1 - gap)
        try:
            value = h(x)
        except NoConvergence:
            break
        if value >= 0:
            found = (prev, x)
            break
        prev = x
    if found is None:
        return None
    lo, hi = found
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if h(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return 2 / (lo + hi)

