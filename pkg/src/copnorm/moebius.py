"""Linear fractional self-maps of the unit disk.

Maps are stored as four complex coefficients of z -> (az + b)/(cz + d) and
compared projectively.  Besides evaluation and the group operations, this
module classifies self-maps of the disk, locates the boundary tangency pair
of a tangent map, rotates it so that it fixes 1, and converts between a map
fixing 1 and its ``(q, d)`` normal form

    phi(z) = ((1 + q + q d) z + (d - q - q d)) / (z + d),   q = phi'(1) > 0.

The auxiliary maps sigma, psi, chi and the closed-form iterates of
tau = phi o sigma used by the norm equation live here as well.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import (
    AffineInput,
    DegenerateMap,
    NonrealDerivative,
    NotFixingOne,
    NotSelfMap,
    NotTangent,
    PoleAtInput,
    PoleInDisk,
    SelfMapViolation,
)

TOL_DEGENERATE = 1e-12
TOL_PROJECTIVE = 1e-10
TOL_CLASSIFY = 1e-10
TOL_AFFINE = 1e-12


def _is_finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


@dataclass(frozen=True, eq=False)
class MoebiusMap:
    """The map z -> (a z + b) / (c z + d).

    Constant maps (``a d - b c == 0``) are representable because the norm
    report handles them, but every operation that needs an invertible map
    raises :class:`DegenerateMap` on them.  Equality is projective.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        coeffs = tuple(complex(v) for v in (self.a, self.b, self.c, self.d))
        if not all(_is_finite(v) for v in coeffs):
            raise DegenerateMap("coefficients must be finite")
        if abs(coeffs[2]) == 0 and abs(coeffs[3]) == 0:
            raise DegenerateMap("denominator vanishes identically")
        for name, v in zip("abcd", coeffs):
            object.__setattr__(self, name, v)

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def affine(cls, s: complex, t: complex) -> "MoebiusMap":
        """z -> s z + t."""
        return cls(s, t, 0, 1)

    @property
    def coefficients(self) -> Tuple[complex, complex, complex, complex]:
        return (self.a, self.b, self.c, self.d)

    @property
    def scale(self) -> float:
        return max(abs(v) for v in self.coefficients)

    def normalized(self) -> "MoebiusMap":
        """Divide by the largest-modulus coefficient (first one on ties)."""
        coeffs = self.coefficients
        k = max(range(4), key=lambda i: abs(coeffs[i]))
        return MoebiusMap(*(v / coeffs[k] for v in coeffs))

    @property
    def determinant(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def is_constant(self) -> bool:
        s = self.scale
        return abs(self.determinant) / (s * s) <= TOL_DEGENERATE

    @property
    def is_affine(self) -> bool:
        return abs(self.c) / self.scale < TOL_AFFINE

    def __call__(self, z: complex) -> complex:
        return apply(self, z)

    def __eq__(self, other):
        if not isinstance(other, MoebiusMap):
            return NotImplemented
        return projectively_equal(self, other)

    __hash__ = None

    def __repr__(self):
        return "MoebiusMap(a={!r}, b={!r}, c={!r}, d={!r})".format(*self.coefficients)


def projectively_equal(f: MoebiusMap, g: MoebiusMap, tol: float = TOL_PROJECTIVE) -> bool:
    fc, gc = f.coefficients, g.coefficients
    k = max(range(4), key=lambda i: abs(fc[i]))
    if abs(gc[k]) <= TOL_DEGENERATE * g.scale:
        return False
    return all(abs(x / fc[k] - y / gc[k]) <= tol for x, y in zip(fc, gc))


class Tag(enum.Enum):
    ConstantMap = "ConstantMap"
    AffineSelfMap = "AffineSelfMap"
    Automorphism = "Automorphism"
    StrictlyInside = "StrictlyInside"
    TangentNonAffineNonAuto = "TangentNonAffineNonAuto"


class AutomorphismKind(enum.Enum):
    Elliptic = "Elliptic"
    Parabolic = "Parabolic"
    Hyperbolic = "Hyperbolic"


@dataclass(frozen=True)
class MapClass:
    tag: Tag
    subtag: Optional[AutomorphismKind] = None

    def __post_init__(self):
        if (self.tag is Tag.Automorphism) != (self.subtag is not None):
            raise ValueError("subtag is required exactly for automorphisms")

    def __str__(self):
        if self.subtag is None:
            return self.tag.value
        return "{}({})".format(self.tag.value, self.subtag.value)


@dataclass(frozen=True)
class QdForm:
    """Normal form of a non-affine self-map fixing 1; ``q`` is phi'(1)."""

    q: float
    d: complex

    def __post_init__(self):
        q, d = float(self.q), complex(self.d)
        if not (q > 0 and math.isfinite(q)):
            raise SelfMapViolation("q must be positive, got {!r}".format(q))
        if not (_is_finite(d) and abs(d) > 1):
            raise SelfMapViolation("|d| must exceed 1, got {!r}".format(d))
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "d", d)

    @property
    def self_map_margin(self) -> float:
        """Re((d-1)/(d+1)) - q; nonnegative exactly for self-maps."""
        return ((self.d - 1) / (self.d + 1)).real - self.q


# ---------------------------------------------------------------- basics


def apply(phi: MoebiusMap, z: complex) -> complex:
    den = phi.c * z + phi.d
    if abs(den) <= TOL_DEGENERATE * phi.scale:
        raise PoleAtInput("z = {!r} is a pole".format(z))
    return (phi.a * z + phi.b) / den


def compose(outer: MoebiusMap, inner: MoebiusMap) -> MoebiusMap:
    """outer o inner."""
    if outer.is_constant or inner.is_constant:
        raise DegenerateMap("cannot compose a constant map")
    a1, b1, c1, d1 = outer.coefficients
    a2, b2, c2, d2 = inner.coefficients
    return MoebiusMap(
        a1 * a2 + b1 * c2,
        a1 * b2 + b1 * d2,
        c1 * a2 + d1 * c2,
        c1 * b2 + d1 * d2,
    )


def inverse(phi: MoebiusMap) -> MoebiusMap:
    if phi.is_constant:
        raise DegenerateMap("constant map has no inverse")
    return MoebiusMap(phi.d, -phi.b, -phi.c, phi.a)


def derivative_at(phi: MoebiusMap, z: complex) -> complex:
    den = phi.c * z + phi.d
    if abs(den) <= TOL_DEGENERATE * phi.scale:
        raise PoleAtInput("z = {!r} is a pole".format(z))
    return phi.determinant / (den * den)


def fixed_points(phi: MoebiusMap) -> Tuple[complex, ...]:
    """Finite fixed points; the identity returns an empty tuple."""
    f = phi.normalized()
    a, b, c, d = f.coefficients
    if f.is_affine:
        if abs(d - a) <= TOL_DEGENERATE:
            return ()
        return (b / (d - a),)
    disc = cmath.sqrt((d - a) ** 2 + 4 * b * c)
    # pick the numerically stable pairing of the quadratic roots
    s = -(d - a)
    if abs(s + disc) < abs(s - disc):
        disc = -disc
    z1 = (s + disc) / (2 * c)
    z2 = -b / (c * z1) if z1 != 0 else (s - disc) / (2 * c)
    return (z1, z2)


# ---------------------------------------------------------- image geometry


def image_disk(phi: MoebiusMap) -> Tuple[complex, float]:
    """Center and radius of phi(D); sup |phi| on D is |center| + radius.

    Solving |phi^{-1}(w)| < 1 for w gives the disk in closed form, which
    stays accurate when the image is tiny.
    """
    if phi.is_constant:
        v = phi.b / phi.d if abs(phi.d) > abs(phi.c) else phi.a / phi.c
        return v, 0.0
    if phi.is_affine:
        return phi.b / phi.d, abs(phi.a / phi.d)
    f = phi.normalized()
    a, b, c, d = f.coefficients
    if abs(d) <= abs(c) * (1 + TOL_DEGENERATE):
        raise PoleInDisk("pole {!r} lies in the closed disk".format(-phi.d / phi.c))
    den = (abs(d) - abs(c)) * (abs(d) + abs(c))
    return (b * d.conjugate() - a * c.conjugate()) / den, abs(f.determinant) / den


def sup_norm(phi: MoebiusMap) -> float:
    center, radius = image_disk(phi)
    return abs(center) + radius


def _automorphism_kind(phi: MoebiusMap) -> AutomorphismKind:
    pts = fixed_points(phi)
    if len(pts) < 2:
        # rotations and the identity fix 0
        return AutomorphismKind.Elliptic
    z1, z2 = pts
    if abs(z1 - z2) <= 1e-7:
        return AutomorphismKind.Parabolic
    if abs(abs(z1) - 1) <= TOL_CLASSIFY and abs(abs(z2) - 1) <= TOL_CLASSIFY:
        return AutomorphismKind.Hyperbolic
    return AutomorphismKind.Elliptic


def classify(phi: MoebiusMap, tol: float = TOL_CLASSIFY) -> MapClass:
    if phi.is_constant:
        center, _ = image_disk(phi)
        if abs(center) >= 1:
            raise NotSelfMap("constant value {!r} is not in the disk".format(center))
        return MapClass(Tag.ConstantMap)
    try:
        center, radius = image_disk(phi)
    except PoleInDisk as exc:
        raise NotSelfMap(str(exc)) from exc
    sup = abs(center) + radius
    if sup > 1 + tol:
        raise NotSelfMap("sup |phi| = {!r} exceeds 1".format(sup))
    if abs(sup - 1) <= tol and abs(radius - 1) <= tol:
        return MapClass(Tag.Automorphism, _automorphism_kind(phi))
    if sup < 1 - tol:
        return MapClass(Tag.StrictlyInside)
    if phi.is_affine:
        return MapClass(Tag.AffineSelfMap)
    return MapClass(Tag.TangentNonAffineNonAuto)


def tangency_point(phi: MoebiusMap, tol: float = TOL_CLASSIFY) -> Tuple[complex, complex]:
    """The unique pair (zeta, eta) of unit-circle points with phi(zeta) = eta."""
    center, radius = image_disk(phi)
    if abs(abs(center) + radius - 1) > tol:
        raise NotTangent("image disk does not touch the unit circle")
    if abs(center) <= tol:
        raise NotTangent("automorphisms touch the circle everywhere")
    eta = center * (1 + radius / abs(center))
    eta /= abs(eta)
    zeta = apply(inverse(phi), eta)
    zeta /= abs(zeta)
    return _snap_one(zeta), _snap_one(eta)


def _snap_one(z: complex) -> complex:
    return 1 + 0j if abs(z - 1) < 1e-14 else z


def normalize_fix_one(phi: MoebiusMap) -> Tuple[MoebiusMap, complex, complex]:
    """Return (z -> conj(eta) phi(zeta z), zeta, eta)."""
    zeta, eta = tangency_point(phi)
    if zeta == 1 and eta == 1:
        return phi, zeta, eta
    e = eta.conjugate()
    return MoebiusMap(e * phi.a * zeta, e * phi.b, phi.c * zeta, phi.d), zeta, eta


# ---------------------------------------------------------------- qd form


def qd_form(phi: MoebiusMap, tol: float = TOL_CLASSIFY) -> QdForm:
    if phi.is_affine:
        raise AffineInput("affine maps have no qd form")
    a, b, d = phi.a / phi.c, phi.b / phi.c, phi.d / phi.c
    if abs(1 + d) <= TOL_DEGENERATE:
        raise NotFixingOne("1 is a pole")
    if abs((a + b) / (1 + d) - 1) > tol:
        raise NotFixingOne("phi(1) = {!r}".format((a + b) / (1 + d)))
    q = (a * d - b) / (1 + d) ** 2
    if abs(q.imag) > tol * max(1.0, abs(q)):
        raise NonrealDerivative("phi'(1) = {!r}".format(q))
    if q.real <= 0 or abs(d) <= 1:
        raise NotSelfMap("q = {!r}, d = {!r} violate the normal form".format(q.real, d))
    qd = QdForm(q.real, d)
    if qd.self_map_margin < -tol:
        raise NotSelfMap("Re((d-1)/(d+1)) < q")
    return qd


def from_qd(qd: QdForm, tol: float = TOL_CLASSIFY) -> MoebiusMap:
    if qd.self_map_margin < -tol:
        raise SelfMapViolation(
            "Re((d-1)/(d+1)) = {!r} < q = {!r}".format(qd.self_map_margin + qd.q, qd.q)
        )
    q, d = qd.q, qd.d
    return MoebiusMap(1 + q + q * d, d - q - q * d, 1, d)


def b_param(qd: QdForm) -> float:
    """Half the translation length of the half-plane model of tau."""
    q, d = qd.q, qd.d
    w = abs(1 + d) ** 2
    return (abs(d) ** 2 - q * w - 1) / (q * w)


# ---------------------------------------------------------- auxiliary maps


def sigma_map(phi: MoebiusMap) -> MoebiusMap:
    a, b, c, d = (v.conjugate() for v in phi.coefficients)
    return MoebiusMap(a, -c, -b, d)


def psi_at(phi: MoebiusMap, z: complex) -> complex:
    a, b, c, d = (v.conjugate() for v in phi.coefficients)
    den = (a * z - c) * (-b * z + d)
    if abs(den) <= TOL_DEGENERATE * phi.scale ** 2:
        raise PoleAtInput("psi has a pole at {!r}".format(z))
    return (a * d - b * c) * z / den


def chi_at(phi: MoebiusMap, z: complex) -> complex:
    a, c = phi.a.conjugate(), phi.c.conjugate()
    den = -a * z + c
    if abs(den) <= TOL_DEGENERATE * phi.scale:
        raise PoleAtInput("chi has a pole at {!r}".format(z))
    return c / den


def tau_iterate(qd: QdForm, k: int, z: complex) -> complex:
    """k-fold iterate of tau, a translation by 2kb in the half-plane model."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    kb = k * b_param(qd)
    den = -kb * z + 1 + kb
    if abs(den) <= TOL_DEGENERATE:
        raise PoleAtInput("tau^[{}] has a pole at {!r}".format(k, z))
    return ((1 - kb) * z + kb) / den


# ------------------------------------------------------------ theta family

_BASE = MoebiusMap(0, 2, -1, 3)  # 2/(3 - z)


def theta_family(theta: float) -> MoebiusMap:
    """Rotations of 2/(3 - z) onto the disk |w - 3/4| = 1/4 that fix 1.

    The member is  w -> e^{-i theta} (phi(lam z) - 3/4) + 3/4  with the
    unimodular lam = phi^{-1}((3 + e^{i theta})/4), so theta = 0 gives
    2/(3 - z) and theta = pi gives (3z + 5)/(2z + 6).
    """
    rot = cmath.exp(-1j * theta)
    lam = apply(inverse(_BASE), (3 + rot.conjugate()) / 4)
    inner = MoebiusMap(lam, 0, 0, 1)
    outer = MoebiusMap(rot, 0.75 * (1 - rot), 0, 1)
    return compose(outer, compose(_BASE, inner))
