"""Norms, essential norms and classification flags of C_phi on H^2.

For a tangent, non-affine, non-automorphic symbol the map is rotated so that
it fixes 1 and written in (q, d) form.  Then ||C_phi||_e^2 = 1/q, and
||C_phi||^2 > 1/q exactly when 2F1(alpha, beta; delta; y) vanishes for some
y in (0, 1).  After a Pfaff transformation that is a sign change of the real
function G(t) = 2F1(alpha, conj(alpha); delta; t) on t < 0 with
y = t/(t - 1).  The root closest to zero gives the largest
Lambda = 1/(q y), which is the squared norm.
"""

from __future__ import annotations

import cmath
import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import mpmath
import numpy as np

from . import moebius as mb
from .errors import (
    AutomorphismBoundary,
    DegenerateR,
    MissingQdForm,
    NoConvergence,
    NonrealD,
    NotSelfMap,
    OutOfScope,
    SearchExhausted,
    UnsupportedExactNorm,
)
from .moebius import MapClass, MoebiusMap, QdForm, Tag
from .specialfn import (
    T_BARNES,
    HypergeometricParams,
    Method,
    barnes_coefficient,
    g_real_eval,
    g_sign,
    g_sign_far,
    g_sign_precise,
)

log = logging.getLogger(__name__)

GRID_RATIO = 1.25
GRID_POINTS = 60
T_MAX = 1e5
LOG_S_MAX = 700.0
ROOT_RTOL = 1e-11
TOL_MATCH = 1e-8
TOL_REAL_D = 1e-10
TOL_BOUNDS = 1e-9
RADIAL_BITS = 20


class CohypoStatus(enum.Enum):
    Normal = "Normal"
    Cosubnormal = "Cosubnormal"
    NotCohyponormal = "NotCohyponormal"
    OutOfScope = "OutOfScope"


@dataclass(frozen=True)
class NormRoot:
    """Root of G closest to zero, with the norm it determines.

    ``log_s`` is log(-t_root); it stays meaningful when the root is so far
    out that x_root rounds to 1.
    """

    t_root: float
    x_root: float
    lam: float
    log_s: float


@dataclass(frozen=True)
class NormReport:
    map_class: MapClass
    qd: Optional[QdForm]
    hyper: Optional[HypergeometricParams]
    norm_sq: float
    ess_norm_sq: float
    spectral_radius_sq: float
    extremally_noncompact: bool
    fast: bool
    s_star_equals_norm: Optional[bool]
    cohypo_status: CohypoStatus
    root: Optional[Tuple[float, float]]
    phi0: complex
    affine: bool


def d_is_real(qd: QdForm) -> bool:
    return abs(qd.d.imag) < TOL_REAL_D * (1 + abs(qd.d))


# ------------------------------------------------------ essential norm etc.


def _phi0(phi: MoebiusMap) -> complex:
    return mb.apply(phi, 0)


def cowen_affine_norm_sq(s: complex, t: complex) -> float:
    """Squared norm of C_phi for phi(z) = s z + t."""
    s2, t2 = abs(s) ** 2, abs(t) ** 2
    if abs(s) + abs(t) > 1 + 1e-12:
        raise NotSelfMap("|s| + |t| = {!r} exceeds 1".format(abs(s) + abs(t)))
    inner = max((1 - s2 + t2) ** 2 - 4 * t2, 0.0)
    return 2 / (1 + s2 - t2 + math.sqrt(inner))


def _affine_st(phi: MoebiusMap) -> Tuple[complex, complex]:
    return phi.a / phi.d, phi.b / phi.d


def _automorphism_norm_sq(phi: MoebiusMap) -> float:
    p = abs(_phi0(phi))
    return (1 + p) / (1 - p)


def essential_norm_sq(cls: MapClass, phi: MoebiusMap, qd: Optional[QdForm] = None) -> float:
    tag = cls.tag
    if tag in (Tag.ConstantMap, Tag.StrictlyInside):
        return 0.0
    if tag is Tag.Automorphism:
        return _automorphism_norm_sq(phi)
    if tag is Tag.AffineSelfMap:
        if mb.sup_norm(phi) < 1 - mb.TOL_CLASSIFY:
            return 0.0
        return cowen_affine_norm_sq(*_affine_st(phi))
    if qd is None:
        raise MissingQdForm("tangent maps need their qd form")
    return 1 / qd.q


def _denjoy_wolff(phi: MoebiusMap) -> Optional[Tuple[complex, complex]]:
    """(a, phi'(a)) for a boundary Denjoy-Wolff point, None if it is interior."""
    pts = mb.fixed_points(phi)
    if not pts:
        return None  # identity
    inside = [p for p in pts if abs(p) < 1 - 1e-9]
    if inside:
        return None
    on_circle = [p for p in pts if abs(abs(p) - 1) <= 1e-9]
    best = None
    for p in on_circle:
        deriv = mb.derivative_at(phi, p)
        if abs(deriv) <= 1 + 1e-9 and (best is None or abs(deriv) < abs(best[1])):
            best = (p / abs(p), deriv)
    return best


def spectral_radius_sq(cls: MapClass, phi: MoebiusMap, qd: Optional[QdForm] = None) -> float:
    tag = cls.tag
    if tag in (Tag.ConstantMap, Tag.StrictlyInside):
        return 1.0
    if tag is Tag.TangentNonAffineNonAuto:
        if qd is None:
            raise MissingQdForm("tangent maps need their qd form")
        zeta, eta = mb.tangency_point(phi)
        if abs(zeta - eta) > 1e-9 or qd.q > 1:
            # no boundary fixed point with phi' <= 1: Denjoy-Wolff point is interior
            return 1.0
        return 1 / qd.q
    dw = _denjoy_wolff(phi)
    if dw is None:
        return 1.0
    return 1 / abs(dw[1])


# --------------------------------------------------- hypergeometric route


def hypergeometric_params(qd: QdForm, tol: float = 1e-12) -> HypergeometricParams:
    b = mb.b_param(qd)
    if b <= tol:
        raise AutomorphismBoundary("b = {!r}: the map is an automorphism".format(b))
    q, d = qd.q, qd.d
    den = q * b * abs(1 + d) ** 2
    return HypergeometricParams((1 + d) / den, (d + d * d.conjugate()) / den, 1 / (q * b))


def extremal_noncompactness(qd: QdForm) -> bool:
    return d_is_real(qd) and qd.d.real > 1


def is_fast(qd: QdForm) -> bool:
    return d_is_real(qd) and qd.d.real > 0


def _grid(params: HypergeometricParams):
    """Scan points t_j = -(1.25^j - 1), subdivided when G oscillates fast.

    Far out, G ~ s^{-Re a} cos(Im(a) log s + const); the log-spacing is kept
    below an eighth of that period.
    """
    y = abs(params.alpha.imag)
    step = math.log(GRID_RATIO)
    sub = 1
    if y > 0:
        sub = min(64, max(1, math.ceil(step * 8 * y / (2 * math.pi))))
    pts = []
    prev = 0.0
    for j in range(1, GRID_POINTS + 1):
        nxt = GRID_RATIO ** j - 1
        for i in range(1, sub + 1):
            # geometric subdivision of (prev, nxt] in 1 + s
            s = (1 + prev) * ((1 + nxt) / (1 + prev)) ** (i / sub) - 1
            pts.append(-s)
        prev = nxt
    return pts


def _bisect_t(params, lo, hi, g_lo, g_hi, tol_t):
    """Root of G in [lo, hi] (lo < hi <= 0) with g_lo <= 0 < g_hi."""
    while hi - lo > tol_t * (1 + abs(lo)):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = g_sign(params, mid)
        if g_mid > 0:
            hi, g_hi = mid, g_mid
        else:
            lo, g_lo = mid, g_mid
            if g_mid == 0:
                return mid
    # secant polish, kept only if it stays inside the bracket
    t = hi - g_hi * (hi - lo) / (g_hi - g_lo) if g_hi != g_lo else 0.5 * (lo + hi)
    if lo <= t <= hi:
        g_t = g_sign(params, t)
        if abs(g_t) < min(abs(g_lo), abs(g_hi)):
            return t
    return lo if abs(g_lo) < abs(g_hi) else hi


def _polish(params, t, lo, hi, slope):
    """Re-bisect in arbitrary precision when rounding noise blurs the root.

    The noise in G is about eps times the sum of term moduli; divided by the
    slope of G it bounds how far the double precision root can be off.
    """
    ev = g_real_eval(params, t)
    if ev.method is Method.ArbitraryPrecision or ev.log_scale or slope == 0:
        return t
    width = 64 * 2.0 ** -52 * ev.abs_sum / abs(slope)
    goal = ROOT_RTOL * abs(t) * (1 + abs(t))
    if width <= goal:
        return t
    log.debug("root at t = %r uncertain by %.3g; polishing", t, width)
    a, b = max(lo, t - 4 * width), min(hi, t + 4 * width)
    if not (g_sign_precise(params, a) <= 0 < g_sign_precise(params, b)):
        a, b = lo, hi
    while b - a > goal:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if g_sign_precise(params, mid) > 0:
            b = mid
        else:
            a = mid
    return 0.5 * (a + b)


def _bisect_log_s(params, lo, hi, tol):
    """Root of L -> G(-e^L) with G > 0 at lo and G <= 0 at hi."""
    for _ in range(200):
        if hi - lo <= tol * (1 + abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if g_sign_far(params, mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _root_from_t(qd: QdForm, t: float) -> NormRoot:
    s = -t
    x = s / (1 + s)
    return NormRoot(t, x, 1 / (qd.q * x), math.log(s) if s > 0 else -math.inf)


def solve_norm_equation(qd: QdForm, tol: float = 1e-13) -> Optional[NormRoot]:
    """Largest root t < 0 of G, i.e. the largest Lambda solving the norm equation.

    Returns None when G keeps its sign and the map is extremally
    non-compact.  Raises SearchExhausted when no sign change is found but a
    root must exist.
    """
    params = hypergeometric_params(qd)
    expect_root = not extremal_noncompactness(qd)
    prev_t, prev_g = 0.0, 1.0
    for t in _grid(params):
        if t < -T_BARNES and params.alpha_is_real and not expect_root:
            # positive coefficients: G > 0 everywhere, nothing to find out here
            break
        try:
            g = g_sign(params, t)
        except NoConvergence as exc:
            # a root could hide behind a point that cannot be evaluated
            raise SearchExhausted("G cannot be evaluated at t = {!r}: {}".format(t, exc)) from exc
        if g <= 0:
            if g == 0:
                root_t = t
            else:
                root_t = _bisect_t(params, t, prev_t, g, prev_g, tol)
                root_t = _polish(params, root_t, t, prev_t, (prev_g - g) / (prev_t - t))
            return _root_from_t(qd, root_t)
        prev_t, prev_g = t, g
    if not expect_root:
        return None
    return _far_search(qd, params, -prev_t, tol)


def _far_search(qd: QdForm, params: HypergeometricParams, s_start: float, tol: float) -> NormRoot:
    """Scan log s beyond the grid using the large-argument expansions."""
    y = abs(params.alpha.imag)
    step = math.log(GRID_RATIO)
    if y > 0:
        step = min(step, 2 * math.pi / (8 * y))
    lo = max(math.log(max(s_start, T_BARNES + 1)), math.log(T_BARNES) + 1e-9)
    if g_sign_far(params, lo) <= 0:
        raise SearchExhausted("G changed sign inside the grid but the scan missed it")
    while lo < LOG_S_MAX:
        hi = min(lo + step, LOG_S_MAX)
        if g_sign_far(params, hi) <= 0:
            log_s = _bisect_log_s(params, lo, hi, tol)
            s = math.exp(log_s)
            x = 1 / (1 + math.exp(-log_s))
            lam = (1 + math.exp(-log_s)) / qd.q
            return NormRoot(-s, x, lam, log_s)
        lo = hi
    return _asymptotic_root(qd, params)


def _asymptotic_root(qd: QdForm, params: HypergeometricParams) -> NormRoot:
    """First zero of G(-s) beyond s = e^LOG_S_MAX.

    There the connection series equal 1 in double precision, so G(-s) is a
    positive multiple of cos(arg A - Im(alpha) ln s) and its zeros are
    explicit.  Lambda then agrees with 1/q to machine precision.
    """
    y = params.alpha.imag
    if y == 0:
        raise SearchExhausted("no sign change of G up to s = e^{:.0f}".format(LOG_S_MAX))
    theta = cmath.phase(barnes_coefficient(params))
    if y < 0:
        y, theta = -y, -theta
    k = math.floor((LOG_S_MAX * y - theta - math.pi / 2) / math.pi) + 1
    log_s = (theta + math.pi / 2 + k * math.pi) / y
    log.warning("norm-equation root at ln s = %.6g; Lambda equals 1/q to machine precision", log_s)
    t = -math.exp(log_s) if log_s < 709 else -math.inf
    return NormRoot(t, 1 / (1 + math.exp(-log_s)), (1 + math.exp(-log_s)) / qd.q, log_s)


# ------------------------------------------------------- Cowen-Kriete etc.


def cowen_kriete_params(qd: QdForm, tol: float = 1e-12) -> Tuple[float, float]:
    if not d_is_real(qd):
        raise NonrealD("d = {!r} is not real".format(qd.d))
    q, d = qd.q, qd.d.real
    den = d - q - q * d
    if abs(den) < tol:
        raise DegenerateR("d - q - qd vanishes")
    return 1 / den, q


def cowen_kriete_map(r: float, s: float) -> MoebiusMap:
    return MoebiusMap(r + s, 1 - s, r * (1 - s), 1 + s * r)


def _rotate_fix(phi: MoebiusMap, a: complex) -> MoebiusMap:
    """conj(a) phi(a z): unitarily similar to phi, fixes 1 when phi fixes a."""
    if a == 1:
        return phi
    e = a.conjugate()
    return MoebiusMap(e * phi.a * a, e * phi.b, phi.c * a, phi.d)


def cohyponormality_status(phi: MoebiusMap) -> CohypoStatus:
    cls = mb.classify(phi)
    if phi.is_affine and abs(phi.b) <= 1e-12 * phi.scale and abs(phi.a / phi.d) <= 1 + 1e-12:
        return CohypoStatus.Normal
    if cls.tag is Tag.ConstantMap and abs(_phi0(phi)) <= 1e-15:
        return CohypoStatus.Normal
    if cls.tag in (Tag.ConstantMap, Tag.StrictlyInside):
        # interior Denjoy-Wolff point and not normal
        return CohypoStatus.NotCohyponormal
    if cls.tag is Tag.TangentNonAffineNonAuto:
        normalized, zeta, eta = mb.normalize_fix_one(phi)
        if abs(zeta - eta) > mb.TOL_CLASSIFY:
            return CohypoStatus.NotCohyponormal
        qd = mb.qd_form(normalized)
        if qd.q >= 1:
            return CohypoStatus.NotCohyponormal
        if extremal_noncompactness(qd):
            try:
                r, s = cowen_kriete_params(qd)
            except DegenerateR:
                return CohypoStatus.OutOfScope
            if 0 < r <= 1 and 0 < s < 1:
                return CohypoStatus.Cosubnormal
            return CohypoStatus.OutOfScope
        return CohypoStatus.NotCohyponormal
    dw = _denjoy_wolff(phi)
    if dw is None or abs(dw[1]) >= 1 - 1e-12:
        # interior DW point, or parabolic: r(C_phi) = 1 < ||C_phi||
        return CohypoStatus.NotCohyponormal
    a, deriv = dw
    rot = _rotate_fix(phi, a)
    s = abs(deriv)
    if cls.tag is Tag.AffineSelfMap:
        return CohypoStatus.Cosubnormal if rot == cowen_kriete_map(0, s) else CohypoStatus.OutOfScope
    # hyperbolic automorphism
    if rot == cowen_kriete_map(1, s):
        return CohypoStatus.Cosubnormal
    if abs(_automorphism_norm_sq(phi) - 1 / s) > TOL_MATCH * (1 / s):
        return CohypoStatus.NotCohyponormal
    return CohypoStatus.OutOfScope


# --------------------------------------------------------------- S* stuff


def _ratio(phi: MoebiusMap, w: np.ndarray) -> np.ndarray:
    fw = (phi.a * w + phi.b) / (phi.c * w + phi.d)
    return (1 - np.abs(w) ** 2) / (1 - np.abs(fw) ** 2)


def _polar_sup(phi: MoebiusMap, n: int) -> float:
    # radii stop at 1 - 2^-20: closer in, 1 - |w|^2 keeps too few digits
    theta = 2 * np.pi * np.arange(n) / n
    radii = 1 - 2.0 ** (-RADIAL_BITS * np.arange(n) / n)
    w = radii[:, None] * np.exp(1j * theta)[None, :]
    return float(np.max(_ratio(phi, w)))


def _golden_max(f, lo, hi, iters=80):
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    best = max(fc, fd, f(lo), f(hi))
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
        best = max(best, fc, fd)
    return best


def _ray_ratio(phi: MoebiusMap, zeta: complex, u: float) -> float:
    """The kernel ratio at w = (1 - e^{-u}) zeta, in extended precision."""
    with mpmath.workdps(40):
        h = mpmath.exp(-u)
        w = (1 - h) * mpmath.mpc(zeta.real, zeta.imag)
        a, b, c, d = (mpmath.mpc(v.real, v.imag) for v in phi.coefficients)
        fw = (a * w + b) / (c * w + d)
        return float(h * (2 - h) / (1 - abs(fw) ** 2))


def s_star_sq_estimate(phi: MoebiusMap, grid_n: int = 64) -> float:
    """Lower estimate of sup_w (1 - |w|^2)/(1 - |phi(w)|^2) = (S*_phi)^2.

    The supremum is taken over nested polar grids of sizes 16, 32, ... up to
    ``grid_n`` (so the value never decreases with ``grid_n``), plus a
    golden-section search along the ray toward the tangency preimage.
    """
    if grid_n < 16:
        raise ValueError("grid_n must be at least 16")
    sizes = []
    m = 16
    while m <= grid_n:
        sizes.append(m)
        m *= 2
    if sizes[-1] != grid_n:
        sizes.append(grid_n)
    best = max(_polar_sup(phi, m) for m in sizes)
    try:
        zeta, _ = mb.tangency_point(phi)
    except mb.NotTangent:
        return best

    def along_ray(u):
        return _ray_ratio(phi, zeta, u)

    return max(best, _golden_max(along_ray, 0.0, 30.0), along_ray(30.0))


def s_star_equals_norm(report: NormReport) -> bool:
    if report.affine:
        return True
    if abs(report.phi0) == 0:
        # ||C_phi|| = 1 and the kernel at 0 already gives 1
        return True
    if report.ess_norm_sq == 0:
        raise OutOfScope("compact non-affine symbols are not decided here")
    return report.extremally_noncompact


# ------------------------------------------------------------- assembly


def norm_sq(phi: MoebiusMap) -> NormReport:
    cls = mb.classify(phi)
    p0 = _phi0(phi)
    qd = hyper = None
    root = None
    fast = False
    if cls.tag is Tag.ConstantMap:
        value = 1 / (1 - abs(p0) ** 2)
        ess = 0.0
    elif cls.tag is Tag.StrictlyInside:
        if not phi.is_affine:
            raise UnsupportedExactNorm(
                "exact norm unknown for compact non-affine symbols; use the matrix oracle"
            )
        value = cowen_affine_norm_sq(*_affine_st(phi))
        ess = 0.0
    elif cls.tag is Tag.AffineSelfMap:
        value = ess = cowen_affine_norm_sq(*_affine_st(phi))
        fast = True
    elif cls.tag is Tag.Automorphism:
        value = ess = _automorphism_norm_sq(phi)
    else:
        normalized, _, _ = mb.normalize_fix_one(phi)
        qd = mb.qd_form(normalized)
        hyper = hypergeometric_params(qd)
        ess = 1 / qd.q
        found = solve_norm_equation(qd)
        if found is None:
            value = ess
        else:
            value = found.lam
            root = (found.t_root, found.x_root)
        fast = is_fast(qd)
    spec = spectral_radius_sq(cls, phi, qd)
    if qd is not None:
        # a far root leaves Lambda - 1/q below any usable tolerance
        extremal = root is None
    else:
        extremal = abs(value - ess) <= TOL_MATCH * value
    report = NormReport(
        map_class=cls,
        qd=qd,
        hyper=hyper,
        norm_sq=value,
        ess_norm_sq=ess,
        spectral_radius_sq=spec,
        extremally_noncompact=extremal,
        fast=fast,
        s_star_equals_norm=None,
        cohypo_status=cohyponormality_status(phi),
        root=root,
        phi0=p0,
        affine=phi.is_affine,
    )
    try:
        flag = s_star_equals_norm(report)
    except OutOfScope:
        flag = None
    return replace(report, s_star_equals_norm=flag)
