"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines are printed even
when output capture is on.
"""

import cmath
import csv
import io
import math
import random
import time

import numpy as np
import pytest

from copnorm import cli
from copnorm import moebius as mb
from copnorm import normcalc as nc
from copnorm import oracle
from copnorm import specialfn as sf
from copnorm.moebius import MoebiusMap
from copnorm.normcalc import CohypoStatus

PHI_HALF_PI = MoebiusMap(15 + 15j, -31 + 33j, 20, -36 + 48j)
PHI_PI = MoebiusMap(1.5, 2.5, 1, 3)
PHI = MoebiusMap(0, 2, -1, 3)


@pytest.fixture
def verdict(capsys):
    """Print one PASS/FAIL line, then fail the test if any check failed."""

    def emit(number, title, checks, elapsed=None):
        ok = all(passed for passed, _ in checks)
        bad = [what for passed, what in checks if not passed]
        timing = "" if elapsed is None else " [{:.2f} s]".format(elapsed)
        line = "criterion {:>2}: {} {}{}".format(number, "PASS" if ok else "FAIL", title, timing)
        if bad:
            line += " (" + "; ".join(bad) + ")"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return emit


def timed(fn):
    start = time.perf_counter()
    value = fn()
    return value, time.perf_counter() - start


def test_criterion_01_half_pi(verdict):
    code, elapsed = timed(lambda: cli.cmd_norm(PHI_HALF_PI, cli.RunConfig(output_format="json")))
    report = nc.norm_sq(PHI_HALF_PI)
    verdict(1, "phi_(pi/2): norm_sq 3.3764 +- 5e-4, ess_norm_sq 3.2", [
        (code[0] == 0, "exit code {}".format(code[0])),
        (abs(report.norm_sq - 3.3764) <= 5e-4, "norm_sq {!r}".format(report.norm_sq)),
        (abs(report.ess_norm_sq - 3.2) <= 1e-12, "ess_norm_sq {!r}".format(report.ess_norm_sq)),
        (elapsed < 1.0, "runtime {:.2f} s".format(elapsed)),
    ], elapsed)


def test_criterion_02_phi_pi(verdict):
    report, elapsed = timed(lambda: nc.norm_sq(PHI_PI))
    verdict(2, "phi_pi: norm_sq = ess_norm_sq = 8, extremal, fast", [
        (abs(report.norm_sq - 8) <= 1e-10, "norm_sq {!r}".format(report.norm_sq)),
        (abs(report.ess_norm_sq - 8) <= 1e-10, "ess_norm_sq {!r}".format(report.ess_norm_sq)),
        (report.extremally_noncompact, "not extremally noncompact"),
        (report.fast, "not fast"),
        (elapsed < 1.0, "runtime {:.2f} s".format(elapsed)),
    ], elapsed)


def test_criterion_03_dichotomy_battery(verdict):
    forms = cli.sample_qd_forms(random.Random(0), 100, 100)

    def run():
        wrong = []
        for qd in forms:
            root = nc.solve_norm_equation(qd)
            expect_root = not (nc.d_is_real(qd) and qd.d.real > 1)
            if (root is not None) != expect_root:
                wrong.append(qd)
        return wrong

    wrong, elapsed = timed(run)
    real = sum(1 for f in forms if f.d.imag == 0)
    verdict(3, "200 qd forms: root exactly when not d > 1", [
        (len(forms) == 200 and real == 100, "sample has {} forms, {} real".format(len(forms), real)),
        (all(f.self_map_margin >= 0 and 1 < abs(f.d) < 10 for f in forms), "sample outside range"),
        (not wrong, "{} disagreements, first {!r}".format(len(wrong), wrong[:1])),
        (elapsed < 30, "runtime {:.2f} s".format(elapsed)),
    ], elapsed)


def test_criterion_04_identity_certification(verdict):
    forms = cli.sample_qd_forms(random.Random("identity"), 25, 25)

    def run():
        worst = 0.0
        for qd in forms:
            for x in (qd.q / 10, qd.q / 4, 2 * qd.q / 5):
                worst = max(worst, oracle.identity_residual(qd, x))
        return worst

    worst, elapsed = timed(run)
    verdict(4, "identity residual below 1e-9 on 50 forms x 3 points", [
        (len(forms) == 50, "sample size {}".format(len(forms))),
        (worst < 1e-9, "worst residual {:.3g}".format(worst)),
        (elapsed < 30, "runtime {:.2f} s".format(elapsed)),
    ], elapsed)


def test_criterion_05_oracle_convergence(verdict):
    def run():
        out = {}
        for name, phi in (("phi_(pi/2)", PHI_HALF_PI), ("2/(3-z)", PHI)):
            exact = nc.norm_sq(phi).norm_sq
            values = [oracle.truncated_norm_sq(oracle.operator_matrix(phi, n)) for n in (64, 128, 256, 512)]
            out[name] = (exact, values)
        return out

    out, elapsed = timed(run)
    checks = []
    for name, (exact, values) in out.items():
        checks.append((all(b >= a for a, b in zip(values, values[1:])), "{} not monotone {}".format(name, values)))
        checks.append((all(v <= exact + 1e-6 for v in values), "{} above norm".format(name)))
        checks.append((values[-1] >= 0.98 * exact, "{} ratio {:.4f}".format(name, values[-1] / exact)))
    checks.append((elapsed < 60, "runtime {:.2f} s".format(elapsed)))
    verdict(5, "finite sections monotone, below the norm, within 2% at n = 512", checks, elapsed)


def test_criterion_06_sweep(verdict):
    def run():
        return cli.cmd_sweep_theta(cli.RunConfig(sweep_points=180, output_format="csv"))

    (code, text), elapsed = timed(run)
    rows = list(csv.DictReader(io.StringIO(text)))
    ok_rows = [r for r in rows if not r["error"]]
    ess_err = max(abs(float(r["ess_norm_sq"]) - 16 / (5 + 3 * math.cos(float(r["theta"])))) for r in ok_rows)
    q_min = min(float(r["Q"]) for r in ok_rows)
    near_pi = min(rows, key=lambda r: abs(float(r["theta"]) - math.pi))
    verdict(6, "180-point sweep: ess formula, Q >= 1, Q(pi) = 1", [
        (code == 0 and len(rows) == 180, "exit {}, {} rows".format(code, len(rows))),
        (len(ok_rows) == 180, "{} failed rows".format(180 - len(ok_rows))),
        (ess_err <= 1e-10, "ess error {:.3g}".format(ess_err)),
        (q_min >= 1, "min Q {!r}".format(q_min)),
        (not near_pi["error"] and abs(float(near_pi["Q"]) - 1) <= 1e-8, "Q near pi {}".format(near_pi["Q"])),
        (elapsed < 120, "runtime {:.2f} s".format(elapsed)),
    ], elapsed)


def test_criterion_07_affine_cross_check(verdict):
    checks = []
    for s, t in ((0.5, 0.5), (0.25, 0.5)):
        exact = nc.cowen_affine_norm_sq(s, t)
        matrix = oracle.truncated_norm_sq(oracle.operator_matrix(MoebiusMap.affine(s, t), 512))
        checks.append((matrix <= exact + 1e-12 and matrix >= 0.98 * exact,
                       "z*{}+{}: matrix {!r}, formula {!r}".format(s, t, matrix, exact)))
    for s in (0.5, 0.9j, cmath.exp(0.3j)):
        checks.append((nc.cowen_affine_norm_sq(s, 0) == 1, "phi(0) = 0 with s = {}".format(s)))
    verdict(7, "affine formula vs finite sections; phi(0) = 0 gives 1", checks)


def test_criterion_08_special_functions(verdict):
    rng = np.random.default_rng(8)
    checks = []
    worst_rec = worst_ref = 0.0
    for _ in range(400):
        z = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
        if min(abs(z + n) for n in range(7)) < 1e-3 or min(abs(z - n) for n in range(1, 7)) < 1e-3:
            continue
        g1 = sf.gamma(z + 1)
        worst_rec = max(worst_rec, abs(g1 - z * sf.gamma(z)) / abs(g1))
        ref = math.pi / cmath.sin(math.pi * z)
        worst_ref = max(worst_ref, abs(sf.gamma(z) * sf.gamma(1 - z) - ref) / abs(ref))
    checks.append((worst_rec < 1e-9, "recurrence {:.3g}".format(worst_rec)))
    checks.append((worst_ref < 1e-9, "reflection {:.3g}".format(worst_ref)))

    worst_pfaff = 0.0
    for _ in range(200):
        a, b, c = (cmath.rect(rng.uniform(0.1, 3), rng.uniform(0, 2 * math.pi)) for _ in range(3))
        if min(abs(c + n) for n in range(4)) < 0.1:
            continue
        x = rng.uniform(0.01, 0.45)
        direct = sf.f21_series(a, b, c, x)
        mapped = sf.f21_pfaff(a, b, c, x)
        scale = max(abs(direct.value), direct.abs_sum * 1e-6)
        worst_pfaff = max(worst_pfaff, abs(direct.value - mapped.value) / scale)
    checks.append((worst_pfaff < 1e-9, "Pfaff {:.3g}".format(worst_pfaff)))

    p = nc.hypergeometric_params(mb.QdForm(1, -2))
    a, b, de = p.alpha.real, p.beta.real, p.delta
    limit = (sf.gamma(de) / (sf.gamma(a) * sf.gamma(b))).real
    gaps = []
    for k in range(4, 9):
        x = 1 - 10.0 ** -k
        t = x / (x - 1)
        f = sf.g_real(p, t) * (1 - t) ** a
        gaps.append(abs(f / -math.log1p(-x) / limit - 1))
    checks.append((all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:])) and gaps[-1] < 0.05,
                   "Gauss limit gaps {}".format(["{:.3g}".format(g) for g in gaps])))
    verdict(8, "gamma recurrence and reflection, Pfaff, Gauss limit", checks)


def test_criterion_09_cohyponormality(verdict):
    table = [
        ("phi_pi", PHI_PI, CohypoStatus.Cosubnormal),
        ("1/(2-z)", MoebiusMap(0, 1, -1, 2), CohypoStatus.NotCohyponormal),
        ("z/2", MoebiusMap.affine(0.5, 0), CohypoStatus.Normal),
        ("iz", MoebiusMap.affine(1j, 0), CohypoStatus.Normal),
        ("-0.3z", MoebiusMap.affine(-0.3, 0), CohypoStatus.Normal),
    ]
    checks = []
    for name, phi, expected in table:
        got = nc.cohyponormality_status(phi)
        checks.append((got is expected, "{} gave {}".format(name, got.value)))
    verdict(9, "cohyponormality table", checks)


def test_criterion_10_anchored_sweep_rows(verdict):
    checks = []
    for theta, ess, norm in ((0.0, 2.0, None), (math.pi / 2, 3.2, 3.3764), (math.pi, 8.0, 8.0)):
        r = nc.norm_sq(mb.theta_family(theta))
        checks.append((abs(r.ess_norm_sq - ess) < 1e-10, "ess at {:.4g}".format(theta)))
        if norm is not None:
            tol = 1e-10 if norm == 8.0 else 5e-4
            checks.append((abs(r.norm_sq - norm) <= tol, "norm at {:.4g}: {!r}".format(theta, r.norm_sq)))
        checks.append((r.norm_sq >= r.ess_norm_sq, "Q < 1 at {:.4g}".format(theta)))
    verdict(10, "sweep anchors at theta = 0, pi/2, pi (no closed form for Q)", checks)
