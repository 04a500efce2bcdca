"""Complex gamma, Pochhammer symbols and the Gauss function 2F1.

Only the regions the norm equation needs are covered: the power series in
the unit disk, Pfaff/Euler transformations for real arguments in (0, 1),
and the large-negative-argument behaviour of G(t) = 2F1(alpha, conj(alpha);
delta; t) through the two-term connection formula at infinity (complex
alpha) or the logarithmic expansion about 1 (real alpha, delta = alpha +
beta).

Series are summed in vectorized chunks.  A series stops once three
consecutive terms satisfy |term| <= tol * |partial sum|, and the terms that
were used are then added with ``math.fsum`` so that alternating series near
a root keep their digits.
"""

from __future__ import annotations

import cmath
import enum
import logging
import math
import os
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np

from .errors import (
    NoConvergence,
    ParameterPole,
    PoleOfGamma,
    RealAlphaUnsupported,
)

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-14
DEFAULT_MAX_TERMS = 100_000
PFAFF_MAX_TERMS = 500_000
T_BARNES = 50.0
POLE_TOL = 1e-12
IMAG_RESIDUAL_TOL = 1e-8
# a double result whose term moduli exceed its natural scale by more than
# this factor is recomputed in arbitrary precision
COND_MAX = 1e6
FALLBACK_DPS = 30

# Lanczos approximation, g = 7, nine coefficients (relative error ~1e-15
# for Re z >= 1/2).
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def max_terms_cap(default: int) -> int:
    """Series cap, overridable through ``COPNORM_MAX_TERMS``."""
    raw = os.environ.get("COPNORM_MAX_TERMS")
    if raw is None or raw.strip() == "":
        return default
    value = int(raw)
    if value < 1:
        raise ValueError("COPNORM_MAX_TERMS must be a positive integer")
    return value


class Method(enum.Enum):
    DirectSeries = "DirectSeries"
    PfaffMapped = "PfaffMapped"
    BarnesLargeArg = "BarnesLargeArg"
    LogConnection = "LogConnection"
    ArbitraryPrecision = "ArbitraryPrecision"


@dataclass(frozen=True)
class SeriesEvaluation:
    """A series value with diagnostics.

    The represented number is ``value * exp(log_scale)``; a nonzero scale
    is used only when that number falls outside the double range.
    ``abs_sum`` is the sum of term moduli, in the units of ``value``.
    """

    value: complex
    terms_used: int
    converged: bool
    method: Method
    log_scale: float = 0.0
    abs_sum: float = 0.0
    cancellation: float = 1.0

    @property
    def unscaled(self) -> complex:
        return self.value * math.exp(self.log_scale) if self.log_scale else self.value


@dataclass(frozen=True)
class HypergeometricParams:
    """Parameters (alpha, beta, delta) of the norm equation.

    ``delta`` is real and positive, and ``delta - beta == conj(alpha)``.
    """

    alpha: complex
    beta: complex
    delta: float

    def __post_init__(self):
        alpha, beta, delta = complex(self.alpha), complex(self.beta), complex(self.delta)
        scale = 1 + abs(delta)
        if abs(delta.imag) > 1e-10 * scale or delta.real <= 0:
            raise ValueError("delta must be real and positive, got {!r}".format(delta))
        if abs(delta - beta - alpha.conjugate()) > 1e-10 * scale:
            raise ValueError("delta - beta must equal conj(alpha)")
        for name, v in (("alpha", alpha), ("beta", beta), ("delta", delta)):
            if _near_nonpositive_integer(v):
                raise ParameterPole("{} = {!r} is zero or a negative integer".format(name, v))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "delta", delta.real)

    @property
    def alpha_is_real(self) -> bool:
        return abs(self.alpha.imag) <= 1e-10 * (1 + abs(self.alpha))


def _near_nonpositive_integer(z: complex, tol: float = POLE_TOL) -> bool:
    z = complex(z)
    n = round(z.real)
    return n <= 0 and abs(z - n) <= tol


# ------------------------------------------------------------------ gamma


def _log_sin_pi(z: complex) -> complex:
    """log(sin(pi z)) without overflow for large |Im z|."""
    if abs(z.imag) < 20:
        return cmath.log(cmath.sin(math.pi * z))
    if z.imag < 0:
        return _log_sin_pi(z.conjugate()).conjugate()
    # sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z}), |e^{2 i pi z}| tiny
    return -1j * math.pi * z + cmath.log(1 - cmath.exp(2j * math.pi * z)) + cmath.log(0.5j)


def _wrap(z: complex) -> complex:
    im = math.remainder(z.imag, 2 * math.pi)
    if im == -math.pi:
        im = math.pi
    return complex(z.real, im)


def _log_gamma_right(z: complex) -> complex:
    z = z - 1
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def log_gamma(z: complex) -> complex:
    """Principal value of log Gamma(z), imaginary part in (-pi, pi]."""
    z = complex(z)
    if _near_nonpositive_integer(z):
        raise PoleOfGamma("Gamma has a pole at {!r}".format(z))
    if z.real < 0.5:
        value = math.log(math.pi) - _log_sin_pi(z) - _log_gamma_right(1 - z)
    else:
        value = _log_gamma_right(z)
    return _wrap(value)


def gamma(z: complex) -> complex:
    return cmath.exp(log_gamma(z))


def rgamma(z: complex) -> complex:
    """1/Gamma(z), zero at the poles."""
    if _near_nonpositive_integer(z):
        return 0j
    return cmath.exp(-log_gamma(z))


def digamma(z: complex) -> complex:
    z = complex(z)
    if _near_nonpositive_integer(z):
        raise PoleOfGamma("digamma has a pole at {!r}".format(z))
    if z.real < 0.5:
        return digamma(1 - z) - math.pi / cmath.tan(math.pi * z)
    shift = 0j
    while abs(z) < 10:
        shift -= 1 / z
        z += 1
    w2 = 1 / (z * z)
    tail = w2 * (1 / 12 - w2 * (1 / 120 - w2 * (1 / 252 - w2 * (1 / 240 - w2 * (1 / 132)))))
    return shift + cmath.log(z) - 0.5 / z - tail


def pochhammer(z: complex, k: int) -> complex:
    """Rising factorial (z)_k."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    acc = 1 + 0j
    z = complex(z)
    for j in range(k):
        acc *= z + j
    return acc


# ------------------------------------------------------------- summation

_FIRST_CHUNK = 32
_MAX_CHUNK = 1 << 15


class ScaledSum(NamedTuple):
    """A series sum held as ``mantissa * exp(log_scale)``.

    ``abs_sum`` is the sum of the term moduli on the same scale.
    ``cancellation`` is abs_sum over the larger of |sum| and |first term|:
    about 1 for a benign series, large when digits were lost.
    """

    mantissa: complex
    log_scale: float
    abs_sum: float
    terms_used: int
    converged: bool
    cancellation: float = 1.0


_SAFE_MAX = 1e280


def _log_chunk(m, r):
    """Terms m, m r_0, m r_0 r_1, ... as (log moduli, unit phases)."""
    mod = np.abs(r[:-1])
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = np.log(mod)
        ph = np.where(mod > 0, r[:-1] / np.where(mod > 0, mod, 1), 0)
    lt = np.concatenate([[math.log(abs(m))], math.log(abs(m)) + np.cumsum(lr)])
    phase = np.concatenate([[m / abs(m)], (m / abs(m)) * np.cumprod(ph)])
    return lt, phase


def sum_ratio_series_scaled(
    first: complex,
    ratio: Callable[[np.ndarray], np.ndarray],
    tol: float,
    max_terms: int,
    real: bool = False,
) -> ScaledSum:
    """Sum t_0 + t_1 + ... with t_{k+1} = t_k * ratio(k), keeping a log scale.

    ``ratio`` receives a float array of indices and returns the ratios
    elementwise.  The series stops after three consecutive terms with
    |t_k| <= tol * |partial sum|.  Chunks whose terms would overflow are
    rebuilt in log form and everything is rescaled, so terms far beyond the
    double range are handled.
    """
    dtype = float if real else complex
    term = dtype(first)
    scale = 0.0
    partial = dtype(0)
    run = 0
    chunks: List[Tuple[np.ndarray, float]] = []
    k0 = 0
    size = _FIRST_CHUNK
    converged = False
    while k0 < max_terms and term != 0:
        m = min(size, max_terms - k0)
        r = np.asarray(ratio(np.arange(k0, k0 + m, dtype=float)), dtype=dtype)
        if not np.all(np.isfinite(r)):
            raise ValueError("non-finite term ratio")
        terms = np.empty(m, dtype=dtype)
        terms[0] = term
        with np.errstate(over="ignore", invalid="ignore"):
            if m > 1:
                terms[1:] = term * np.cumprod(r[:-1])
            nxt = terms[-1] * r[-1]
        if not (np.all(np.isfinite(terms)) and np.max(np.abs(terms)) < _SAFE_MAX
                and abs(nxt) < _SAFE_MAX):
            lt, phase = _log_chunk(term, np.append(r, 0))
            shift = float(np.max(lt))
            terms = (np.exp(lt[:-1] - shift) * phase[:-1]).astype(dtype)
            nxt = terms[-1] * r[-1]
            partial = partial * math.exp(-shift)
            scale += shift
        partials = partial + np.cumsum(terms)
        abs_p = np.abs(partials)
        # a partial sum that underflowed after rescaling says nothing yet
        small = (np.abs(terms) <= tol * abs_p) & (abs_p > 0)
        stop = _first_run_of_three(small, run)
        if stop is not None:
            chunks.append((terms[: stop + 1], scale))
            k0 += stop + 1
            converged = True
            break
        chunks.append((terms, scale))
        run = _trailing_run(small, run)
        partial = partials[-1]
        term = nxt
        k0 += m
        size = min(2 * size, _MAX_CHUNK)
    if term == 0 and not converged:
        converged = True
    parts = [c * math.exp(sc - scale) for c, sc in chunks]
    all_terms = np.concatenate(parts) if parts else np.zeros(0, dtype=dtype)
    if real:
        value = complex(math.fsum(all_terms.tolist()))
    else:
        value = complex(math.fsum(all_terms.real.tolist()), math.fsum(all_terms.imag.tolist()))
    abs_sum = float(np.sum(np.abs(all_terms)))
    ref = max(abs(value), abs(first) * math.exp(-scale))
    cancel = abs_sum / ref if ref > 0 else 1.0
    return ScaledSum(value, scale, abs_sum, k0, converged, cancel)


def sum_ratio_series(
    first: complex,
    ratio: Callable[[np.ndarray], np.ndarray],
    tol: float,
    max_terms: int,
    real: bool = False,
):
    """Unscaled form of :func:`sum_ratio_series_scaled`.

    Returns ``(value, terms_used, converged)``; ``value`` is real when
    ``real`` is set.
    """
    res = sum_ratio_series_scaled(first, ratio, tol, max_terms, real)
    value = res.mantissa * math.exp(res.log_scale) if res.log_scale else res.mantissa
    return (value.real if real else value), res.terms_used, res.converged


def _first_run_of_three(small: np.ndarray, carry: int) -> Optional[int]:
    pre = min(carry, 2)
    ext = np.concatenate([np.ones(pre, dtype=int), small.astype(int)])
    if ext.size < 3:
        return None
    window = ext[2:] + ext[1:-1] + ext[:-2]
    hits = np.flatnonzero(window == 3)
    if hits.size == 0:
        return None
    return int(hits[0]) + 2 - pre


def _trailing_run(small: np.ndarray, carry: int) -> int:
    if small.all():
        return carry + small.size
    return int(small.size - 1 - np.flatnonzero(~small)[-1])


# ------------------------------------------------------------------- 2F1


def f21_series(a, b, c, z, tol: float = DEFAULT_TOL, max_terms: Optional[int] = None) -> SeriesEvaluation:
    """Partial sum of the defining power series of 2F1(a, b; c; z), |z| < 1.

    Any z is accepted when a or b is a nonpositive integer, since the
    series is then a polynomial.  A cap hit is reported through
    ``converged=False``, not an exception.
    """
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    if _near_nonpositive_integer(c):
        raise ParameterPole("c = {!r} is a nonpositive integer".format(c))
    terminating = _near_nonpositive_integer(a) or _near_nonpositive_integer(b)
    if abs(z) >= 1 and not terminating:
        raise ValueError("series needs |z| < 1, got {!r}".format(z))
    if max_terms is None:
        max_terms = max_terms_cap(DEFAULT_MAX_TERMS)

    def ratio(k):
        return (a + k) * (b + k) / ((c + k) * (k + 1)) * z

    res = sum_ratio_series_scaled(1.0, ratio, tol, max_terms)
    return SeriesEvaluation(res.mantissa, res.terms_used, res.converged, Method.DirectSeries,
                            res.log_scale, res.abs_sum, res.cancellation)


def f21_pfaff(a, b, c, x: float, tol: float = DEFAULT_TOL, max_terms: Optional[int] = None) -> SeriesEvaluation:
    """2F1(a, b; c; x) for 0 < x < 1 from (1-x)^{-a} 2F1(a, c-b; c; x/(x-1)).

    For x >= 1/2 the mapped argument leaves the disk; Pfaff is applied a
    second time (to the other numerator parameter), which lands back at x
    as Euler's form (1-x)^{c-a-b} 2F1(c-a, c-b; c; x).
    """
    if not 0 < x < 1:
        raise ValueError("x must lie in (0, 1), got {!r}".format(x))
    a, b, c = complex(a), complex(b), complex(c)
    log1mx = math.log1p(-x)
    u = x / (x - 1)
    if u > -1:
        inner = f21_series(a, c - b, c, u, tol, max_terms)
        factor = cmath.exp(-a * log1mx)
    else:
        if max_terms is None:
            max_terms = max_terms_cap(PFAFF_MAX_TERMS)
        inner = f21_series(c - a, c - b, c, x, tol, max_terms)
        factor = cmath.exp((c - a - b) * log1mx)
    return SeriesEvaluation(factor * inner.unscaled, inner.terms_used, inner.converged, Method.PfaffMapped)


def barnes_coefficient(params: HypergeometricParams) -> complex:
    """A + iB = Gamma(conj a - a) Gamma(delta) / (Gamma(conj a) Gamma(delta - a))."""
    al, de = params.alpha, params.delta
    return cmath.exp(
        log_gamma(al.conjugate() - al)
        + log_gamma(de)
        - log_gamma(al.conjugate())
        - log_gamma(de - al)
    )


def _barnes_scaled(params: HypergeometricParams, log_s: float, tol: float, max_terms: int):
    """s^{Re alpha} G(-s) via the connection formula at infinity, s = e^{log_s}.

    Both conjugate terms are evaluated independently; the imaginary part of
    their sum is the symmetry residual.
    """
    al, de = params.alpha, params.delta
    inv_t = -math.exp(-log_s)
    total = 0j
    abs_total = 0.0
    ref = 0.0
    used = 0
    ok = True
    for a in (al, al.conjugate()):
        ab = a.conjugate()
        pref = cmath.exp(
            log_gamma(ab - a) + log_gamma(de) - log_gamma(ab) - log_gamma(de - a)
        )
        inner = f21_series(a, 1 - de + a, 1 - ab + a, inv_t, tol, max_terms)
        # s^{-a} s^{x} = e^{-i Im(a) log s}
        total += pref * cmath.exp(-1j * a.imag * log_s) * inner.unscaled
        abs_total += abs(pref) * inner.abs_sum * math.exp(inner.log_scale)
        ref += abs(pref * inner.unscaled)
        used += inner.terms_used
        ok = ok and inner.converged
    # the two terms may cancel near a zero of G; only loss inside them counts
    cancel = abs_total / max(abs(total), ref) if ref > 0 else 1.0
    return total, cancel, used, ok


def f21_barnes_large_neg(params: HypergeometricParams, t: float, tol: float = DEFAULT_TOL,
                         max_terms: Optional[int] = None) -> SeriesEvaluation:
    """G(t) = 2F1(alpha, conj(alpha); delta; t) for t < -1 and non-real alpha."""
    if abs(params.alpha.imag) < 1e-12:
        raise RealAlphaUnsupported("the connection formula needs alpha - conj(alpha) non-integer")
    if not t < -1:
        raise ValueError("t must be below -1, got {!r}".format(t))
    if max_terms is None:
        max_terms = max_terms_cap(DEFAULT_MAX_TERMS)
    log_s = math.log(-t)
    scaled, cancel, used, ok = _barnes_scaled(params, log_s, tol, max_terms)
    value, scale = _folded(scaled, -params.alpha.real * log_s)
    return SeriesEvaluation(value, used, ok, Method.BarnesLargeArg, scale, cancel * abs(value), cancel)


def _log_connection_scaled(params: HypergeometricParams, log1p_s: float, tol: float, max_terms: int):
    """2F1(a, b; a + b; x) for real a, b with 1 - x = e^{-log1p_s}.

    Logarithmic expansion about x = 1; converges in powers of 1 - x.
    Returns ``(mantissa, log_scale, terms_used, converged)`` with the
    gamma prefactor carried in log form.
    """
    a = params.alpha.real
    b = params.delta - a
    w = math.exp(-log1p_s)
    lead = log_gamma(a + b) - log_gamma(a) - log_gamma(b)
    sign = math.copysign(1.0, math.cos(lead.imag))
    h = 2 * digamma(1).real - digamma(a).real - digamma(b).real + log1p_s
    coeff = 1.0
    terms = []
    run = 0
    partial = 0.0
    n = 0
    ok = False
    while n < max_terms:
        term = coeff * h
        terms.append(term)
        partial += term
        run = run + 1 if abs(term) <= tol * abs(partial) else 0
        if run >= 3:
            ok = True
            n += 1
            break
        h += 2 / (n + 1) - 1 / (a + n) - 1 / (b + n)
        coeff *= (a + n) * (b + n) / (n + 1) ** 2 * w
        n += 1
    total = math.fsum(terms)
    ref = max(abs(total), abs(terms[0])) if terms else 0.0
    cancel = math.fsum(abs(v) for v in terms) / ref if ref > 0 else 1.0
    return sign * total, lead.real, n, ok, cancel


def _folded(value: complex, log_scale: float) -> Tuple[complex, float]:
    """Fold the scale into the value when the product is a normal double."""
    if value == 0:
        return value, 0.0
    mag = math.log(abs(value)) + log_scale
    if -700 < mag < 700:
        return value / abs(value) * math.exp(mag), 0.0
    return value, log_scale


def g_real_eval(params: HypergeometricParams, t: float, tol: float = DEFAULT_TOL,
                max_terms: Optional[int] = None, fallback: bool = True) -> SeriesEvaluation:
    """G(t) = 2F1(alpha, conj(alpha); delta; t) for t <= 0, with diagnostics.

    The result may carry a log scale (see :class:`SeriesEvaluation`); its
    ``value`` is then a positive multiple of G(t).  When the double
    precision route fails to converge or cancels too much, the value is
    recomputed in arbitrary precision unless ``fallback`` is off, in which
    case NoConvergence is raised.
    """
    t = float(t)
    if t > 0:
        raise ValueError("G is only evaluated for t <= 0")
    try:
        ev = _g_double(params, t, tol, max_terms)
    except (NoConvergence, OverflowError) as exc:
        if not fallback:
            raise
        reason = str(exc)
    else:
        if ev.cancellation <= COND_MAX:
            return ev
        if not fallback:
            raise NoConvergence("{} lost too many digits to cancellation".format(ev.method.value), ev)
        reason = "cancellation"
    log.debug("G(%r): %s; switching to arbitrary precision", t, reason)
    sign, log_abs = _g_arbitrary(params, t=t)
    value, scale = _folded(complex(sign), log_abs)
    return SeriesEvaluation(value, 0, True, Method.ArbitraryPrecision, scale, abs(value), 1.0)


def _g_double(params: HypergeometricParams, t: float, tol: float,
              max_terms: Optional[int]) -> SeriesEvaluation:
    al, de = params.alpha, params.delta
    if t == 0:
        return SeriesEvaluation(1 + 0j, 1, True, Method.DirectSeries, 0.0, 1.0, 1.0)
    if t >= -T_BARNES:
        # the series in t alternates and cancels badly for large parameters;
        # the mapped argument x stays in (0, 50/51]
        x = t / (t - 1)
        if max_terms is None:
            max_terms = max_terms_cap(PFAFF_MAX_TERMS)
        inner = f21_series(al, params.beta, de, x, tol, max_terms)
        l1 = math.log1p(-t)
        phase = cmath.exp(-1j * al.imag * l1)
        value, scale = _folded(phase * inner.value, inner.log_scale - al.real * l1)
        ratio = abs(value / (phase * inner.value)) if inner.value != 0 else 0.0
        return _checked(SeriesEvaluation(value, inner.terms_used, inner.converged, Method.PfaffMapped,
                                         scale, inner.abs_sum * ratio, inner.cancellation))
    if max_terms is None:
        max_terms = max_terms_cap(DEFAULT_MAX_TERMS)
    if params.alpha_is_real:
        log1p_s = math.log1p(-t)
        mant, lead, used, ok, cancel = _log_connection_scaled(params, log1p_s, tol, max_terms)
        value, scale = _folded(complex(mant), lead - al.real * log1p_s)
        return _checked(SeriesEvaluation(value, used, ok, Method.LogConnection, scale,
                                         cancel * abs(value), cancel))
    return _checked(f21_barnes_large_neg(params, t, tol, max_terms))


def _g_arbitrary(params: HypergeometricParams, t: Optional[float] = None,
                 log_s: Optional[float] = None) -> Tuple[float, float]:
    """(sign, log|G|) at t, or at t = -e^{log_s}, in arbitrary precision."""
    import mpmath

    with mpmath.workdps(FALLBACK_DPS):
        arg = -mpmath.exp(log_s) if log_s is not None else mpmath.mpf(t)
        al = mpmath.mpc(params.alpha.real, params.alpha.imag)
        de = mpmath.mpf(params.delta)
        forms = [lambda: mpmath.hyp2f1(al, mpmath.conj(al), de, arg)]
        if arg >= -T_BARNES:
            x = arg / (arg - 1)
            forms.append(lambda: (1 - arg) ** (-al) * mpmath.hyp2f1(al, de - mpmath.conj(al), de, x,
                                                                    maxterms=10**6))
        v = None
        for form in forms:
            try:
                v = form()
                break
            except (mpmath.libmp.libhyper.NoConvergence, ValueError):
                continue
        if v is None:
            raise NoConvergence("arbitrary precision evaluation failed at t = {}".format(arg))
        v = mpmath.re(v)
        if v == 0:
            return 0.0, 0.0
        return float(mpmath.sign(v)), float(mpmath.log(abs(v)))


def g_real(params: HypergeometricParams, t: float, tol: float = DEFAULT_TOL,
           max_terms: Optional[int] = None) -> float:
    """G(t) as a float; underflows to 0 or overflows to inf outside the double range."""
    return g_real_eval(params, t, tol, max_terms).unscaled.real


def g_sign(params: HypergeometricParams, t: float, tol: float = DEFAULT_TOL) -> float:
    """A positive multiple of G(t) that is finite and nonzero whenever G is."""
    return g_real_eval(params, t, tol).value.real


def g_sign_precise(params: HypergeometricParams, t: float) -> float:
    """Sign of G(t) from the arbitrary precision route only."""
    return _g_arbitrary(params, t=t)[0]


def g_sign_far(params: HypergeometricParams, log_s: float, tol: float = DEFAULT_TOL) -> float:
    """A positive multiple of G(-s), s = e^{log_s}, finite for any s > T_BARNES.

    The factor s^{-Re alpha} (or (1+s)^{-alpha}) and any gamma prefactor
    of fixed sign are dropped so that the sign of G stays computable long
    after G itself underflows.
    """
    if log_s <= math.log(T_BARNES):
        raise ValueError("far evaluation needs s > T_BARNES")
    max_terms = max_terms_cap(DEFAULT_MAX_TERMS)
    try:
        if params.alpha_is_real:
            log1p_s = log_s + math.log1p(math.exp(-log_s))
            value, _, _, ok, cancel = _log_connection_scaled(params, log1p_s, tol, max_terms)
            good = ok
        else:
            cvalue, cancel, _, ok = _barnes_scaled(params, log_s, tol, max_terms)
            good = ok and abs(cvalue.imag) <= IMAG_RESIDUAL_TOL * (1 + abs(cvalue))
            value = cvalue.real
        if good and cancel <= COND_MAX:
            return value
    except OverflowError:
        pass
    log.debug("far G at ln s = %r: switching to arbitrary precision", log_s)
    return _g_arbitrary(params, log_s=log_s)[0]


def _checked(ev: SeriesEvaluation) -> SeriesEvaluation:
    if not ev.converged:
        raise NoConvergence(
            "{} hit the cap after {} terms".format(ev.method.value, ev.terms_used), ev
        )
    v = ev.value
    # 1 + |G| expressed in the units of ``value``
    unit = math.exp(-ev.log_scale) if ev.log_scale > -700 else math.inf
    if abs(v.imag) > IMAG_RESIDUAL_TOL * (unit + abs(v)):
        raise NoConvergence("imaginary residual {!r} too large".format(v.imag), ev)
    return ev
