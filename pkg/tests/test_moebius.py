import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copnorm import moebius as mb
from copnorm.errors import (
    AffineInput,
    DegenerateMap,
    NotFixingOne,
    NotSelfMap,
    NotTangent,
    PoleAtInput,
    PoleInDisk,
    SelfMapViolation,
)
from copnorm.moebius import AutomorphismKind, MoebiusMap, QdForm

PHI = MoebiusMap(0, 2, -1, 3)  # 2/(3 - z)
PHI_PI = MoebiusMap(1.5, 2.5, 1, 3)
PHI_HALF_PI = MoebiusMap(15 + 15j, -31 + 33j, 20, -36 + 48j)


@st.composite
def qd_forms(draw, real_d=None):
    """Valid (q, d) with q in (0, 1] and |d| in (1, 10]."""
    is_real = draw(st.booleans()) if real_d is None else real_d
    r = draw(st.floats(1.05, 10.0))
    if is_real:
        d = complex(draw(st.sampled_from([-1.0, 1.0])) * r)
    else:
        d = cmath.rect(r, draw(st.floats(0.05, 2 * math.pi - 0.05)))
    qmax = ((d - 1) / (d + 1)).real
    if qmax <= 1e-3:
        d = complex(abs(d) + 1.5)
        qmax = ((d - 1) / (d + 1)).real
    q = draw(st.floats(0.01, 0.99)) * min(qmax, 1.0)
    return QdForm(q, d)


interior = st.builds(
    lambda r, a: cmath.rect(r, a), st.floats(0, 0.95), st.floats(0, 2 * math.pi)
)


# ------------------------------------------------------------- basics


def test_compose_with_inverse_is_identity():
    assert mb.compose(PHI_HALF_PI, mb.inverse(PHI_HALF_PI)) == MoebiusMap.identity()


def test_derivative_of_base_map_at_one():
    assert mb.derivative_at(PHI, 1) == pytest.approx(0.5, abs=1e-15)


def test_inverse_of_affine():
    assert mb.inverse(MoebiusMap.affine(0.5, 0.5)) == MoebiusMap.affine(2, -1)


def test_projective_equality_ignores_scaling():
    assert MoebiusMap(1, 2, 3, 4) == MoebiusMap(2j, 4j, 6j, 8j)
    assert MoebiusMap(1, 2, 3, 4) != MoebiusMap(1, 2, 3, 5)


def test_degenerate_inputs():
    with pytest.raises(DegenerateMap):
        MoebiusMap(1, 1, 0, 0)
    with pytest.raises(DegenerateMap):
        mb.inverse(MoebiusMap(1, 2, 2, 4))
    with pytest.raises(PoleAtInput):
        mb.apply(PHI, 3)


# ------------------------------------------------------------ classify


@pytest.mark.parametrize(
    "phi, expected",
    [
        (MoebiusMap.affine(0.5, 0), "StrictlyInside"),
        (PHI, "TangentNonAffineNonAuto"),
        (MoebiusMap(1, 0.5, 0.5, 1), "Automorphism(Hyperbolic)"),
        (MoebiusMap.identity(), "Automorphism(Elliptic)"),
        (MoebiusMap.affine(1j, 0), "Automorphism(Elliptic)"),
        (MoebiusMap.affine(0.5, 0.5), "AffineSelfMap"),
        (MoebiusMap(0, 0.5, 0, 1), "ConstantMap"),
        (MoebiusMap(2 - 1j, 1j, -1j, 2 + 1j), "Automorphism(Parabolic)"),
    ],
)
def test_classify_examples(phi, expected):
    assert str(mb.classify(phi)) == expected


@pytest.mark.parametrize(
    "phi", [MoebiusMap.affine(1, 1), MoebiusMap(1, 0, 2, 1), MoebiusMap(0, 2, 0, 1)]
)
def test_classify_rejects_non_self_maps(phi):
    with pytest.raises(NotSelfMap):
        mb.classify(phi)


def test_parabolic_has_double_boundary_fixed_point():
    phi = MoebiusMap(2 - 1j, 1j, -1j, 2 + 1j)
    pts = mb.fixed_points(phi)
    assert len(pts) == 2
    assert abs(pts[0] - 1) < 1e-7 and abs(pts[1] - 1) < 1e-7
    assert mb.classify(phi).subtag is AutomorphismKind.Parabolic


# ------------------------------------------------------------ image disk


def test_image_disk_examples():
    c, r = mb.image_disk(MoebiusMap.affine(0.5, 0))
    assert c == 0 and r == 0.5
    for phi in (PHI, mb.theta_family(1.3)):
        c, r = mb.image_disk(phi)
        assert abs(c - 0.75) < 1e-12 and abs(r - 0.25) < 1e-12


def test_image_disk_pole_in_disk():
    with pytest.raises(PoleInDisk):
        mb.image_disk(MoebiusMap(1, 0, 2, 1))


# -------------------------------------------------------------- tangency


def test_tangency_of_maps_fixing_one():
    for phi in (PHI, PHI_PI):
        zeta, eta = mb.tangency_point(phi)
        assert zeta == 1 and eta == 1


def test_tangency_with_rotated_input():
    phi = MoebiusMap(0, 2, -1j, 3)  # 2/(3 - i z)
    zeta, eta = mb.tangency_point(phi)
    assert abs(mb.apply(phi, zeta) - eta) < 1e-12
    assert abs(zeta + 1j) < 1e-12 and abs(eta - 1) < 1e-12


def test_tangency_rejects_strictly_inside():
    with pytest.raises(NotTangent):
        mb.tangency_point(MoebiusMap.affine(0.5, 0))


def test_normalize_fix_one():
    assert mb.normalize_fix_one(PHI) == (PHI, 1, 1)
    normalized, zeta, eta = mb.normalize_fix_one(MoebiusMap(0, 2, 1, 3))  # 2/(3+z)
    assert abs(zeta + 1) < 1e-12 and abs(eta - 1) < 1e-12
    assert abs(mb.apply(normalized, 1) - 1) < 1e-12


def test_rotation_conjugate_has_same_qd():
    u, v = cmath.exp(0.7j), cmath.exp(-2.1j)
    phi = PHI_HALF_PI
    rotated = MoebiusMap(v * phi.a * u, v * phi.b, phi.c * u, phi.d)
    base = mb.qd_form(phi)
    qd = mb.qd_form(mb.normalize_fix_one(rotated)[0])
    assert abs(qd.q - base.q) < 1e-10 and abs(qd.d - base.d) < 1e-10


@settings(max_examples=60, deadline=None)
@given(qd_forms(), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_tangency_residual(qd, a, b):
    phi = mb.from_qd(qd)
    u, v = cmath.exp(1j * a), cmath.exp(1j * b)
    rotated = MoebiusMap(v * phi.a * u, v * phi.b, phi.c * u, phi.d)
    zeta, eta = mb.tangency_point(rotated)
    assert abs(mb.apply(rotated, zeta) - eta) < 1e-12
    assert abs(abs(zeta) - 1) + abs(abs(eta) - 1) < 1e-12


# --------------------------------------------------------------- qd form


@pytest.mark.parametrize(
    "phi, q, d",
    [
        (MoebiusMap(0, 1, -1, 2), 1.0, -2.0),
        (PHI, 0.5, -3.0),
        (PHI_PI, 0.125, 3.0),
    ],
)
def test_qd_form_examples(phi, q, d):
    qd = mb.qd_form(phi)
    assert qd.q == pytest.approx(q, abs=1e-14)
    assert qd.d == pytest.approx(d, abs=1e-14)


def test_from_qd_examples():
    assert mb.from_qd(QdForm(1, -2)) == MoebiusMap(0, 1, -1, 2)
    assert mb.from_qd(QdForm(0.125, 3)) == PHI_PI


def test_qd_form_errors():
    with pytest.raises(AffineInput):
        mb.qd_form(MoebiusMap.affine(0.5, 0.5))
    with pytest.raises(NotFixingOne):
        mb.qd_form(MoebiusMap(0, 2, 1, 3))
    with pytest.raises(SelfMapViolation):
        mb.from_qd(QdForm(0.9, 3))


@settings(max_examples=200, deadline=None)
@given(qd_forms())
def test_qd_round_trip(qd):
    back = mb.qd_form(mb.from_qd(qd))
    assert abs(back.q - qd.q) < 1e-12 * max(1, qd.q)
    assert abs(back.d - qd.d) < 1e-12 * abs(qd.d)
    phi = mb.from_qd(qd)
    assert abs(mb.apply(phi, 1) - 1) < 1e-12
    assert abs(mb.derivative_at(phi, 1) - qd.q) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(1.05, 10.0), st.floats(0, 2 * math.pi))
def test_self_map_criterion_matches_image_disk(q, r, a):
    qd = QdForm(q, cmath.rect(r, a))
    phi = MoebiusMap(1 + q + q * qd.d, qd.d - q - q * qd.d, 1, qd.d)
    margin = qd.self_map_margin
    if abs(margin) < 1e-6:
        return
    try:
        sup = mb.sup_norm(phi)
    except PoleInDisk:
        assert margin < 0
        return
    # tangent at 1, so the map stays in the disk iff its image disk has radius < 1
    assert (margin > 0) == (sup <= 1 + 1e-9)


# ------------------------------------------------------------------- b


def test_b_param_examples():
    assert mb.b_param(QdForm(1, -2)) == pytest.approx(2, abs=1e-14)
    assert mb.b_param(QdForm(0.5, -3)) == pytest.approx(3, abs=1e-14)
    d = 2 + 1j
    edge = QdForm(((d - 1) / (d + 1)).real, d)
    assert abs(mb.b_param(edge)) < 1e-14


@settings(max_examples=200, deadline=None)
@given(qd_forms())
def test_b_nonnegative(qd):
    assert mb.b_param(qd) >= -1e-14


# ------------------------------------------------------ auxiliary maps


def test_chi_and_psi_at_zero():
    assert mb.chi_at(PHI_HALF_PI, 0) == 1
    assert mb.psi_at(PHI_HALF_PI, 0) == 0


@settings(max_examples=100, deadline=None)
@given(qd_forms(), interior)
def test_tau_is_phi_after_sigma(qd, z):
    phi = mb.from_qd(qd)
    direct = mb.apply(phi, mb.apply(mb.sigma_map(phi), z))
    assert abs(mb.tau_iterate(qd, 1, z) - direct) < 1e-12 * max(1, abs(direct))


@settings(max_examples=100, deadline=None)
@given(qd_forms(), st.integers(0, 40), st.integers(0, 40), interior)
def test_tau_semigroup(qd, j, k, z):
    lhs = mb.tau_iterate(qd, j + k, z)
    rhs = mb.tau_iterate(qd, j, mb.tau_iterate(qd, k, z))
    assert abs(lhs - rhs) < 1e-10


def test_tau_examples():
    qd = QdForm(1, -2)
    assert mb.tau_iterate(qd, 0, 0.3 + 0.1j) == 0.3 + 0.1j
    assert mb.tau_iterate(qd, 1, 0) == pytest.approx(2 / 3, abs=1e-15)
    with pytest.raises(ValueError):
        mb.tau_iterate(qd, -1, 0)


@pytest.mark.parametrize("qd", [QdForm(0.125, 3), QdForm(1, -2), mb.qd_form(PHI_HALF_PI)])
def test_tau_orbit_of_phi0_closed_form(qd):
    q, d = qd.q, qd.d
    b = mb.b_param(qd)
    phi = mb.from_qd(qd)
    z = w = mb.apply(phi, 0)
    for k in range(51):
        closed = 1 - q * (1 + d) / (d + q * b * (1 + d) * k)
        assert abs(mb.tau_iterate(qd, k, z) - closed) < 1e-12
        assert abs(w - closed) < 1e-10
        w = mb.apply(phi, mb.apply(mb.sigma_map(phi), w))


# ---------------------------------------------------------- theta family


def test_theta_family_anchors():
    assert mb.theta_family(0) == PHI
    assert mb.theta_family(math.pi) == PHI_PI
    assert mb.theta_family(math.pi / 2) == PHI_HALF_PI


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * math.pi))
def test_theta_family_fixes_one_on_the_small_disk(theta):
    phi = mb.theta_family(theta)
    assert abs(mb.apply(phi, 1) - 1) < 1e-12
    c, r = mb.image_disk(phi)
    assert abs(c - 0.75) < 1e-12 and abs(r - 0.25) < 1e-12
