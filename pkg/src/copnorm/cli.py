"""Command-line interface.

Commands::

    copnorm classify A B C D          class, tangency pair, qd form, image disk
    copnorm norm A B C D              full norm report
    copnorm sweep-theta               rotated family sweep, one CSV row per angle
    copnorm oracle A B C D            matrix and series cross-checks, PASS/FAIL
    copnorm selfcheck                 invariant suites with pass counts

Coefficients are a, b, c, d of (az + b)/(cz + d), each written as ``re``,
``re+imi`` or ``re-imi`` without spaces, e.g. ``-36+48i``.

Exit codes: 0 success, 1 failure, 2 not a self-map, 3 parse error,
4 oracle FAIL.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import logging
import math
import random
import re
import sys
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import moebius as mb
from . import oracle
from . import specialfn as sf
from .errors import CopnormError, NotSelfMap, NotTangent
from .moebius import MoebiusMap, QdForm, Tag
from .normcalc import NormReport, extremal_noncompactness, norm_sq, solve_norm_equation

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_NOT_SELF_MAP = 2
EXIT_PARSE = 3
EXIT_ORACLE_FAIL = 4

FORMATS = ("json", "csv", "text")

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_REAL = re.compile(r"[+-]?{n}".format(n=_NUM))
_FULL = re.compile(r"(?P<re>[+-]?{n})(?P<im>[+-](?:{n})?)i".format(n=_NUM))
_IMAG = re.compile(r"(?P<im>[+-]?(?:{n})?)i".format(n=_NUM))


class ParseError(ValueError):
    pass


def _imag_part(text: str) -> float:
    if text in ("", "+"):
        return 1.0
    if text == "-":
        return -1.0
    return float(text)


def parse_complex(token: str) -> complex:
    """Parse ``re``, ``re+imi``, ``re-imi``, ``imi`` or ``i``."""
    token = token.strip()
    if _REAL.fullmatch(token):
        return complex(float(token), 0.0)
    m = _FULL.fullmatch(token)
    if m:
        return complex(float(m.group("re")), _imag_part(m.group("im")))
    m = _IMAG.fullmatch(token)
    if m:
        return complex(0.0, _imag_part(m.group("im")))
    raise ParseError("cannot parse complex number {!r}".format(token))


# ------------------------------------------------------------ config


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = 1e-12
    oracle_n: int = oracle.DEFAULT_ORACLE_N
    sweep_points: int = 180
    output_format: str = "text"
    seed: int = 0

    def __post_init__(self):
        if not 1e-15 < self.tolerance < 1e-3:
            raise ParseError("tolerance must lie in (1e-15, 1e-3), got {!r}".format(self.tolerance))
        if not 16 <= self.oracle_n <= 8192:
            raise ParseError("oracle-n must lie in [16, 8192], got {!r}".format(self.oracle_n))
        if self.sweep_points < 2:
            raise ParseError("points must be at least 2, got {!r}".format(self.sweep_points))
        if self.output_format not in FORMATS:
            raise ParseError("unknown format {!r}".format(self.output_format))


# ------------------------------------------------------- serialization


def format_float(x: float) -> str:
    """17 significant digits; enough to round-trip any double."""
    x = float(x)
    if x == 0:
        return "0"  # JSON has no negative zero that survives a round trip
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps(obj) -> str:
    """Canonical JSON: key order as given, floats at 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join("{}: {}".format(json.dumps(k), dumps(v)) for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError("cannot serialize {!r}".format(type(obj)))


def _cx(z: complex) -> List[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def report_to_dict(r: NormReport) -> Dict:
    return {
        "map_class": str(r.map_class),
        "qd": None if r.qd is None else {"q": r.qd.q, "d": _cx(r.qd.d)},
        "hyper": None if r.hyper is None else {
            "alpha": _cx(r.hyper.alpha),
            "beta": _cx(r.hyper.beta),
            "delta": float(r.hyper.delta),
        },
        "norm_sq": float(r.norm_sq),
        "ess_norm_sq": float(r.ess_norm_sq),
        "spectral_radius_sq": float(r.spectral_radius_sq),
        "extremally_noncompact": bool(r.extremally_noncompact),
        "fast": bool(r.fast),
        "s_star_equals_norm": r.s_star_equals_norm,
        "cohypo_status": r.cohypo_status.value,
        "root": None if r.root is None else {"t_root": float(r.root[0]), "x_root": float(r.root[1])},
        "phi0": _cx(r.phi0),
        "affine": bool(r.affine),
    }


def _text_value(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v).lower() if v is not None else "-"
    if isinstance(v, float):
        return format(v, ".6g")
    if isinstance(v, list) and len(v) == 2 and all(isinstance(u, float) for u in v):
        z = complex(v[0], v[1])
        return format(z.real, ".6g") if z.imag == 0 else "{:.6g}{:+.6g}i".format(z.real, z.imag)
    if isinstance(v, dict):
        return ", ".join("{}={}".format(k, _text_value(u)) for k, u in v.items())
    return str(v)


def to_text(d: Dict) -> str:
    width = max(len(k) for k in d)
    return "\n".join("{:<{w}}  {}".format(k, _text_value(v), w=width) for k, v in d.items())


def _render(payload: Dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(payload)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(payload))
        w.writerow([_csv_cell(v) for v in payload.values()])
        return buf.getvalue().rstrip("\n")
    return to_text(payload)


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, (dict, list)):
        return dumps(v)
    if v is None:
        return ""
    return str(v).lower() if isinstance(v, bool) else str(v)


# ------------------------------------------------------------ commands


def cmd_classify(phi: MoebiusMap, config: RunConfig) -> Tuple[int, str]:
    cls = mb.classify(phi)
    center, radius = mb.image_disk(phi)
    out: Dict = {"map_class": str(cls), "tangency": None, "qd": None,
                 "image_center": _cx(center), "image_radius": float(radius)}
    if cls.tag in (Tag.TangentNonAffineNonAuto, Tag.AffineSelfMap):
        try:
            zeta, eta = mb.tangency_point(phi)
            out["tangency"] = {"zeta": _cx(zeta), "eta": _cx(eta)}
        except NotTangent:
            pass
    if cls.tag is Tag.TangentNonAffineNonAuto:
        qd = mb.qd_form(mb.normalize_fix_one(phi)[0])
        out["qd"] = {"q": qd.q, "d": _cx(qd.d)}
    return EXIT_OK, _render(out, config.output_format)


def cmd_norm(phi: MoebiusMap, config: RunConfig) -> Tuple[int, str]:
    return EXIT_OK, _render(report_to_dict(norm_sq(phi)), config.output_format)


SWEEP_COLUMNS = ("theta", "ess_norm_sq", "norm_sq", "Q", "error")


def sweep_rows(points: int) -> List[Dict]:
    """One row per angle theta_j = 2 pi j / (points - 1), in order."""
    rows = []
    for j in range(points):
        theta = 2 * math.pi * j / (points - 1)
        try:
            r = norm_sq(mb.theta_family(theta))
            rows.append({"theta": theta, "ess_norm_sq": r.ess_norm_sq, "norm_sq": r.norm_sq,
                         "Q": math.sqrt(r.norm_sq / r.ess_norm_sq), "error": ""})
        except CopnormError as exc:
            log.warning("sweep row theta=%r failed: %s", theta, exc)
            rows.append({"theta": theta, "ess_norm_sq": None, "norm_sq": None, "Q": None,
                         "error": "{}: {}".format(type(exc).__name__, exc)})
    return rows


def render_sweep(rows: List[Dict], fmt: str) -> str:
    if fmt == "json":
        return dumps(rows)
    if fmt == "text":
        lines = ["{:>10} {:>12} {:>12} {:>10}  {}".format(*SWEEP_COLUMNS)]
        for r in rows:
            vals = [format(r[k], ".6g") if r[k] is not None else "-" for k in SWEEP_COLUMNS[1:4]]
            lines.append("{:>10.6g} {:>12} {:>12} {:>10}  {}".format(r["theta"], *vals, r["error"]))
        return "\n".join(lines)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([format(r["theta"], ".12f")]
                   + ["" if r[k] is None else format_float(r[k]) for k in SWEEP_COLUMNS[1:4]]
                   + [r["error"]])
    return buf.getvalue().rstrip("\n")


def cmd_sweep_theta(config: RunConfig) -> Tuple[int, str]:
    rows = sweep_rows(config.sweep_points)
    ok = sum(1 for r in rows if not r["error"])
    code = EXIT_OK if ok >= 0.95 * len(rows) else EXIT_FAIL
    return code, render_sweep(rows, config.output_format)


def oracle_report(phi: MoebiusMap, config: RunConfig) -> Dict:
    """Matrix values at n/4, n/2, n, identity residuals, and the verdict."""
    report = norm_sq(phi)
    exact = report.norm_sq
    tol = config.tolerance
    sizes = [config.oracle_n // 4, config.oracle_n // 2, config.oracle_n]
    values = [oracle.truncated_norm_sq(oracle.operator_matrix(phi, n)) for n in sizes]
    residuals = []
    if report.qd is not None:
        q = report.qd.q
        residuals = [oracle.identity_residual(report.qd, x) for x in (q / 10, q / 4, 2 * q / 5)]
    slack = max(tol, 1e-12)
    checks = {
        "monotone": all(b >= a * (1 - slack) for a, b in zip(values, values[1:])),
        "lower_bound": all(v <= exact * (1 + tol) + 1e-6 for v in values),
        "identity": all(r < max(1e-9, tol) for r in residuals),
    }
    return {
        "norm_sq": exact,
        "sizes": sizes,
        "truncated_norm_sq": values,
        "ratio": values[-1] / exact,
        "identity_residuals": residuals,
        "checks": checks,
        "verdict": "PASS" if all(checks.values()) else "FAIL",
    }


def cmd_oracle(phi: MoebiusMap, config: RunConfig) -> Tuple[int, str]:
    out = oracle_report(phi, config)
    code = EXIT_OK if out["verdict"] == "PASS" else EXIT_ORACLE_FAIL
    if config.output_format == "text":
        lines = ["norm_sq        {:.6g}".format(out["norm_sq"])]
        for n, v in zip(out["sizes"], out["truncated_norm_sq"]):
            lines.append("oracle n={:<5} {:.6g}".format(n, v))
        for r in out["identity_residuals"]:
            lines.append("identity       {:.3g}".format(r))
        lines.append(out["verdict"])
        return code, "\n".join(lines)
    return code, _render(out, config.output_format)


# ----------------------------------------------------------- selfcheck


def sample_qd_forms(rng: random.Random, n_real: int, n_complex: int) -> List[QdForm]:
    """Random self-map qd forms.

    Real d alternates between (-10, -1) and (1, 10); complex d has modulus
    uniform in (1, 10) and uniform argument.  q is uniform below the
    self-map bound (|d|^2 - 1)/|1 + d|^2.
    """
    out = []
    for i in range(n_real):
        d = complex(rng.uniform(-10, -1) if i % 2 == 0 else rng.uniform(1, 10))
        out.append(QdForm(rng.uniform(0, ((d - 1) / (d + 1)).real), d))
    while len(out) < n_real + n_complex:
        d = cmath.rect(rng.uniform(1, 10), rng.uniform(0, 2 * math.pi))
        qmax = ((d - 1) / (d + 1)).real
        if qmax <= 0:
            continue
        q = rng.uniform(0, qmax)
        if q <= 0:
            continue
        out.append(QdForm(q, d))
    return out


Suite = Callable[[random.Random, float], List[Tuple[bool, str]]]


def _suite_gamma(rng: random.Random, tol: float) -> List[Tuple[bool, str]]:
    bound = max(1e-9, tol)
    out = []
    for _ in range(40):
        z = complex(rng.uniform(-15, 15), rng.uniform(-15, 15))
        rec = abs(sf.gamma(z + 1) - z * sf.gamma(z)) / abs(z * sf.gamma(z))
        refl = abs(sf.gamma(z) * sf.gamma(1 - z) * cmath.sin(math.pi * z) / math.pi - 1)
        out.append((rec < bound and refl < bound, "z={!r} recurrence={:.3g} reflection={:.3g}".format(z, rec, refl)))
    return out


def _suite_pfaff(rng: random.Random, tol: float) -> List[Tuple[bool, str]]:
    bound = max(1e-9, tol)
    out = []
    for _ in range(30):
        a = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        b = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        c = rng.uniform(0.5, 6)
        x = rng.uniform(0.05, 0.45)
        direct = sf.f21_series(a, b, c, x).value
        mapped = sf.f21_pfaff(a, b, c, x).value
        err = abs(direct - mapped) / max(1.0, abs(direct))
        out.append((err < bound, "a={!r} b={!r} c={!r} x={!r} err={:.3g}".format(a, b, c, x, err)))
    return out


def _suite_identity(rng: random.Random, tol: float) -> List[Tuple[bool, str]]:
    bound = max(1e-9, tol)
    out = []
    for qd in sample_qd_forms(rng, 5, 5):
        for x in (qd.q / 10, qd.q / 4, 2 * qd.q / 5):
            try:
                r = oracle.identity_residual(qd, x)
                out.append((r < bound, "{!r} x={!r} residual={:.3g}".format(qd, x, r)))
            except CopnormError as exc:
                out.append((False, "{!r} x={!r}: {}".format(qd, x, exc)))
    return out


def _suite_roundtrip(rng: random.Random, tol: float) -> List[Tuple[bool, str]]:
    out = []
    for qd in sample_qd_forms(rng, 10, 10):
        phi = mb.from_qd(qd)
        back = mb.qd_form(phi)
        ok = abs(back.q - qd.q) <= 1e-10 * (1 + qd.q) and abs(back.d - qd.d) <= 1e-10 * (1 + abs(qd.d))
        ident = mb.compose(phi, mb.inverse(phi))
        ok = ok and mb.projectively_equal(ident, MoebiusMap.identity())
        out.append((ok, "{!r} -> {!r}".format(qd, back)))
    return out


def _suite_dichotomy(rng: random.Random, tol: float) -> List[Tuple[bool, str]]:
    out = []
    for qd in sample_qd_forms(rng, 20, 20):
        try:
            root = solve_norm_equation(qd)
            ok = (root is None) == extremal_noncompactness(qd)
            out.append((ok, "{!r} root={!r}".format(qd, root)))
        except CopnormError as exc:
            out.append((False, "{!r}: {}".format(qd, exc)))
    return out


SUITES: Dict[str, Suite] = {
    "gamma_identities": _suite_gamma,
    "pfaff_agreement": _suite_pfaff,
    "identity_residual": _suite_identity,
    "round_trips": _suite_roundtrip,
    "dichotomy": _suite_dichotomy,
}


def run_selfcheck(config: RunConfig) -> Dict[str, List[Tuple[bool, str]]]:
    results = {}
    for name, suite in SUITES.items():
        # each suite gets its own stream so suites stay independent
        rng = random.Random("{}:{}".format(config.seed, name))
        results[name] = suite(rng, config.tolerance)
    return results


def cmd_selfcheck(config: RunConfig) -> Tuple[int, str, str]:
    results = run_selfcheck(config)
    summary = {name: {"passed": sum(ok for ok, _ in cases), "total": len(cases)} for name, cases in results.items()}
    failures = ["{}: {}".format(name, msg) for name, cases in results.items() for ok, msg in cases if not ok]
    if config.output_format == "text":
        body = "\n".join("{:<18} {}/{}".format(k, v["passed"], v["total"]) for k, v in summary.items())
    else:
        body = _render_nested(summary, config.output_format)
    return (EXIT_FAIL if failures else EXIT_OK), body, "\n".join(failures)


def _render_nested(summary: Dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(summary)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "passed", "total"])
    for k, v in summary.items():
        w.writerow([k, v["passed"], v["total"]])
    return buf.getvalue().rstrip("\n")


# ---------------------------------------------------------------- main


class _Parser(argparse.ArgumentParser):
    """Argument errors exit with the parse-error code."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let tokens such as -36+48i through as positionals
        self._negative_number_matcher = re.compile(r"^-(?:{n})?(?:[+-](?:{n})?)?i?$".format(n=_NUM))

    def error(self, message):
        self.print_usage(sys.stderr)
        print("{}: error: {}".format(self.prog, message), file=sys.stderr)
        sys.exit(EXIT_PARSE)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-12, help="check tolerance, in (1e-15, 1e-3)")
    common.add_argument("--oracle-n", type=int, default=oracle.DEFAULT_ORACLE_N, help="largest finite section")
    common.add_argument("--points", type=int, default=180, help="sweep points")
    common.add_argument("--format", choices=FORMATS, default=None, help="output format")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    common.add_argument("--out", default=None, help="write output to FILE instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = _Parser(prog="copnorm", description="Norms of composition operators with linear fractional symbols.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, helptext in (("classify", "classify a map"), ("norm", "norm report"), ("oracle", "cross-check a norm")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("coeffs", nargs=4, metavar="COEF", help="a b c d of (az+b)/(cz+d)")
    sub.add_parser("sweep-theta", parents=[common], help="sweep the rotated family")
    sub.add_parser("selfcheck", parents=[common], help="run invariant suites")
    return p


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    default_fmt = "csv" if args.command == "sweep-theta" else "text"
    try:
        config = RunConfig(args.tol, args.oracle_n, args.points, args.format or default_fmt, args.seed)
        phi = None
        if args.command in ("classify", "norm", "oracle"):
            phi = MoebiusMap(*[parse_complex(t) for t in args.coeffs])
    except (ParseError, CopnormError) as exc:
        print("copnorm: error: {}".format(exc), file=sys.stderr)
        return EXIT_PARSE
    start = time.perf_counter()
    try:
        if args.command == "classify":
            code, text = cmd_classify(phi, config)
        elif args.command == "norm":
            code, text = cmd_norm(phi, config)
        elif args.command == "oracle":
            code, text = cmd_oracle(phi, config)
        elif args.command == "sweep-theta":
            code, text = cmd_sweep_theta(config)
        else:
            code, text, failures = cmd_selfcheck(config)
            if failures:
                print(failures, file=sys.stderr)
    except NotSelfMap as exc:
        print("copnorm: not a self-map: {}".format(exc), file=sys.stderr)
        return EXIT_NOT_SELF_MAP
    except CopnormError as exc:
        print("copnorm: {}: {}".format(type(exc).__name__, exc), file=sys.stderr)
        return EXIT_FAIL
    log.info("%s finished in %.2f s", args.command, time.perf_counter() - start)
    _emit(text, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
