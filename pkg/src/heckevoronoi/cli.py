"""Command-line driver: ``python -m heckevoronoi <subcommand> ...``.

Exit status is 0 when every check is within tolerance, 2 when some check
fails and 1 on usage, configuration or input errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .arith import divisor_counts, is_prime, kronecker_symbol
from .characters import lambda_coefficients, make_dirichlet, make_hecke
from .delta_method import DeltaParams, delta_eval
from .errors import HeckeVoronoiError
from .gauss_sums import ArithPartParams, arithmetic_part_brute, arithmetic_part_closed, gauss_grid_check
from .lfunc import DEFAULT_TERMS, dirichlet_series, euler_product, growth_scan
from .oscillatory import (
    PhasePair,
    SmoothBump,
    poisson_check,
    stationary_phase_main,
    w_dagger_quadrature,
    w_dagger_stationary,
)
from .quadfield import IdealLatticeBasis, classify_prime, make_field, split_root
from .voronoi import VoronoiInstance, verify

SCHEMA_VERSION = 1
DAGGER_CONST = 10.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class Report:
    command: str
    results: list
    tol: Optional[float] = None
    passed: int = 0
    failed: int = 0
    max_error: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def check(self, ok: bool, err: Optional[float] = None):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
        if err is not None and math.isfinite(err):
            self.max_error = err if self.max_error is None else max(self.max_error, err)

    @property
    def schema(self) -> str:
        return f"heckevoronoi/{self.command}/v{SCHEMA_VERSION}"

    def summary(self) -> dict:
        out = {"checks": self.passed + self.failed, "passed": self.passed, "failed": self.failed,
               "max_error": self.max_error, "tol": self.tol}
        out.update(self.extra)
        return out


def _env_int(name: str, default: int) -> int:
    return int(os.environ.get(name, default))


def _env_float(name: str, default: float) -> float:
    return float(os.environ.get(name, default))


def _int_list(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


# ----------------------------------------------------------------------------
# parser

def _add_character(p: argparse.ArgumentParser):
    p.add_argument("--D", type=int, default=1, help="squarefree D > 0 for Q(sqrt(-D))")
    p.add_argument("--p", type=int, default=13, help="split conductor prime")
    p.add_argument("--k", type=int, default=2, help="index of chi: chi(g^j) = e(k j/(p-1))")
    p.add_argument("--r", type=int, default=2, help="infinity weight")
    p.add_argument("--extension", type=int, default=0, help="choice of root for the class phase")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="heckevoronoi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"heckevoronoi {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key=value file mirroring the flags (flags win)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=["json", "csv"], help="output format")
    common.add_argument("--seed", type=int, default=_env_int("HV_SEED", 0))
    common.add_argument("--timing", action="store_true", help="include wall time (breaks byte equality)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("field-info", parents=[common], help="field invariants and class representatives")
    p.add_argument("--D", type=int, default=1)
    p.add_argument("--p", type=int, help="optional prime to classify")

    p = sub.add_parser("coeffs", parents=[common], help="lambda(n) for n <= nmax as CSV")
    _add_character(p)
    p.add_argument("--nmax", type=int, default=100)

    p = sub.add_parser("verify-gauss", parents=[common], help="closed-form quadratic Gauss sums vs brute force")
    p.add_argument("--cmax", type=int, default=200)
    p.add_argument("--cmin", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("verify-arith", parents=[common], help="arithmetic part closed form vs literal sum")
    _add_character(p)
    p.add_argument("--ell", type=int, default=5)
    p.add_argument("--q", type=_int_list, default=[1, 3, 2, 6, 4, 12])
    p.add_argument("--m", type=_int_list, default=[1])
    p.add_argument("--fmax", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("verify-voronoi", parents=[common], help="lattice sum vs dual Voronoi sum")
    _add_character(p)
    p.add_argument("--q", type=_int_list, default=[3])
    p.add_argument("--m", type=_int_list, default=[1])
    p.add_argument("--ell", type=int, help="split prime of the lattice (default: smallest admissible)")
    p.add_argument("--conjugate", action="store_true", help="use the conjugate ideal of ell")
    p.add_argument("--N", type=float, default=2000.0, help="window length; larger N needs fewer dual terms")
    p.add_argument("--budget", type=float, default=1.0, help="tolerance 1e-4/budget^2; tail target shrinks alike")
    p.add_argument("--radius", type=float, help="fixed dual radius in sqrt(c^2 D + f^2)")
    p.add_argument("--tail-target", type=float, default=_env_float("HV_TAIL_TARGET", 1e-7))
    p.add_argument("--max-terms", type=int, default=_env_int("HV_MAX_DUAL_TERMS", 5_000_000))
    p.add_argument("--wrong-root", action="store_true", help="negative control: dual side uses -d_ell")
    p.add_argument("--experimental", action="store_true", help="allow -D = 2 mod 4")
    p.add_argument("--grid", action="store_true", help="one CSV row per (q, m)")

    p = sub.add_parser("delta-check", parents=[common], help="delta symbol identity for |n| <= nmax")
    p.add_argument("--nmax", type=int, default=50)
    p.add_argument("--Q", type=_float_list, default=[20.0])
    p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("osc-check", parents=[common], help="stationary phase and Poisson checks")
    p.add_argument("--functions", type=int, default=50, help="random Poisson test functions")
    p.add_argument("--tol", type=float, default=1e-8, help="Poisson tolerance")

    p = sub.add_parser("lvalue", parents=[common], help="L-series vs Euler product")
    _add_character(p)
    p.add_argument("--s", type=complex, default=complex(2))
    p.add_argument("--terms", type=int, default=DEFAULT_TERMS)
    p.add_argument("--prime-bound", type=int)
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("scan", parents=[common], help="exploratory growth scan of smoothed sums")
    _add_character(p)
    p.add_argument("--tmin", type=float, default=2.0)
    p.add_argument("--tmax", type=float, default=100.0)
    p.add_argument("--steps", type=int, default=12)
    p.add_argument("--control", action="store_true", help="lambda = 1, no twist")
    return parser


def _read_config(path: str) -> dict:
    cfg = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key=value")
        key, val = (x.strip() for x in line.split("=", 1))
        cfg[key.replace("-", "_")] = val
    return cfg


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    args = parser.parse_args(argv)
    if not known.config:
        return args
    cfg = _read_config(known.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, val in cfg.items():
        if key not in actions or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        act = actions[key]
        if isinstance(act, argparse._StoreTrueAction):
            defaults[key] = val.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = val
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


# ----------------------------------------------------------------------------
# commands

def _character(args):
    ctx = make_field(args.D)
    ps = classify_prime(ctx, args.p)
    chi = make_dirichlet(args.p, args.k)
    return make_hecke(ctx, ps, chi, args.r, extension=args.extension)


def cmd_field_info(args) -> Report:
    ctx = make_field(args.D)
    row = {
        "D": ctx.D,
        "ring_type": ctx.ring_type.name,
        "disc": ctx.disc,
        "omega_K": ctx.omega_K,
        "class_number": ctx.class_number,
        "class_reps": ";".join(f"{L.ell}:{L.d_ell}" for L in ctx.class_reps),
    }
    if args.p is not None:
        ps = classify_prime(ctx, args.p)
        row["prime"] = ps.p
        row["splitting"] = ps.kind.value
        row["d_p"] = ps.d_p
    return Report("field-info", [row])


def cmd_coeffs(args) -> Report:
    psi = _character(args)
    lam = lambda_coefficients(psi, args.nmax).values
    d = divisor_counts(args.nmax)
    rep = Report("coeffs", [], tol=1e-9)
    for n in range(1, args.nmax + 1):
        v = lam[n]
        rep.results.append({"n": n, "re": float(v.real), "im": float(v.imag), "abs": float(abs(v)),
                            "divisor_bound": int(d[n]), "tol": rep.tol})
        rep.check(abs(v) <= d[n] + rep.tol)
    return rep


def cmd_verify_gauss(args) -> Report:
    rep = Report("verify-gauss", [], tol=args.tol)
    for c, cases, err in gauss_grid_check(args.cmax, args.cmin):
        rep.results.append({"c": c, "cases": cases, "max_abs_diff": err, "tol": args.tol})
        rep.check(err <= args.tol, err)
    return rep


def cmd_verify_arith(args) -> Report:
    psi = _character(args)
    d_ell = split_root(psi.ctx, args.ell)
    rep = Report("verify-arith", [], tol=args.tol)
    grid = np.arange(-args.fmax, args.fmax + 1)
    c, f = (x.ravel() for x in np.meshgrid(grid, grid, indexing="ij"))
    for q in args.q:
        for m in args.m:
            P = ArithPartParams(args.D, args.p, psi.d, psi.chi, args.ell, d_ell, q, m)
            err = float(np.max(np.abs(arithmetic_part_brute(P, c, f) - arithmetic_part_closed(P, c, f))))
            rep.results.append({"q": q, "m": m, "branch": P.branch, "delta": P.delta,
                                "points": int(c.size), "max_abs_diff": err, "tol": args.tol})
            rep.check(err <= args.tol, err)
    return rep


def default_ell(disc: int, avoid: int) -> int:
    ell = 3
    while True:
        if is_prime(ell) and avoid % ell and kronecker_symbol(disc, ell) == 1:
            return ell
        ell += 2


def cmd_verify_voronoi(args) -> Report:
    psi = _character(args)
    tol = 1e-4 / args.budget**2
    rep = Report("verify-voronoi", [], tol=tol)
    for q in args.q:
        for m in args.m:
            ell = args.ell or default_ell(psi.ctx.disc, psi.p * abs(m) * q)
            L = IdealLatticeBasis(ell, split_root(psi.ctx, ell), args.conjugate)
            inst = VoronoiInstance(psi, m, q, args.N, L, radius=args.radius, tail_target=args.tail_target,
                                   max_terms=args.max_terms, experimental=args.experimental)
            vr = verify(inst, budget=args.budget, wrong_root=args.wrong_root)
            row = {"q": q, "m": m, "ell": ell, "N": args.N}
            row.update(vr.as_dict(include_time=args.timing))
            err = vr.rel_err if vr.rel_err is not None else vr.abs_err
            if args.wrong_root:
                ok = vr.rel_err is not None and vr.rel_err >= 0.1
                row["tol"] = 0.1
                row["check"] = "rel_err >= tol"
            else:
                ok = vr.abs_err <= max(tol * abs(vr.lhs), 10 * vr.truncation_tail_estimate)
                row["tol"] = tol
                row["check"] = "abs_err <= max(tol |lhs|, 10 tail)"
            row["ok"] = ok
            rep.results.append(row)
            rep.check(ok, err)
    return rep


def cmd_delta_check(args) -> Report:
    rep = Report("delta-check", [], tol=args.tol)
    for Q in args.Q:
        for n in range(-args.nmax, args.nmax + 1):
            v = delta_eval(DeltaParams(n, Q))
            err = abs(v - (1.0 if n == 0 else 0.0))
            rep.results.append({"n": n, "Q": Q, "value": v, "abs_err": err, "tol": args.tol})
            rep.check(err <= args.tol, err)
    return rep


def _fresnel_pair(T: float, W: SmoothBump, center: float) -> PhasePair:
    def f(x, j):
        x = np.asarray(x, dtype=float)
        if j == 0:
            return T * (x - center) ** 2
        if j == 1:
            return 2 * T * (x - center)
        if j == 2:
            return np.full_like(x, 2 * T)
        return np.zeros_like(x)

    return PhasePair(f, lambda x, j: W.derivative(x, j), W.a, W.b)


def poisson_cases(rng: np.random.Generator, count: int) -> list[dict]:
    """Random test functions: Gaussians with exact and numerical transforms, and shifted bumps."""
    cases = []
    for i in range(count):
        kind = ("gauss", "gauss_numeric", "bump")[i % 3]
        mu = float(rng.uniform(-5, 5))
        w = float(rng.uniform(0.5, 4.0))
        M = int(rng.integers(1, 8))
        shift = int(rng.integers(0, M))
        cases.append({"kind": kind, "mu": mu, "w": w, "M": M, "shift": shift})
    return cases


def run_poisson_case(case: dict) -> dict:
    mu, w, M, shift = case["mu"], case["w"], case["M"], case["shift"]
    if case["kind"] == "bump":
        B = SmoothBump(a=mu + 20, b=mu + 20 + 3 * w)
        return poisson_check(B, M, shift, (B.a, B.b))

    def h(x):
        return np.exp(-np.pi * ((x - mu) / w) ** 2)

    def h_hat(xi):
        return w * np.exp(-np.pi * (w * xi) ** 2 - 2j * np.pi * mu * xi)

    window = (mu - 12 * w, mu + 12 * w)
    return poisson_check(h, M, shift, window, h_hat if case["kind"] == "gauss" else None)


def cmd_osc_check(args) -> Report:
    rep = Report("osc-check", [], tol=args.tol)
    W = SmoothBump()

    def row(family, parameter, main, quad, ratio, tol, ok):
        rep.results.append({"family": family, "parameter": parameter,
                            "main_re": main.real, "main_im": main.imag,
                            "quadrature_re": quad.real, "quadrature_im": quad.imag,
                            "ratio_to_bound": ratio, "tol": tol})
        rep.check(ok)

    # weighted Mellin transform at its stationary point x0 = 1.5
    for beta0 in np.geomspace(100, 10_000, 7):
        r = float(beta0)
        s = 1 + 2j * math.pi * r * 1.5
        st = w_dagger_stationary(W, r, s)
        q = w_dagger_quadrature(W, r, s)
        ratio = abs(q - st.main) * min(abs(s.imag), abs(r)) ** 1.5
        row("dagger", f"r={r:.6g}", st.main, q, ratio, DAGGER_CONST, ratio <= DAGGER_CONST)

    # no stationary point: |W^dagger| beta^3 must shrink
    prev = math.inf
    for beta in np.geomspace(200, 3200, 5):
        v = w_dagger_quadrature(W, 0.0, 1 + 1j * beta)
        scaled = abs(v) * beta**3
        row("nonstationary", f"beta={beta:.6g}", 0j, v, scaled, prev if math.isfinite(prev) else None,
            scaled <= prev)
        prev = scaled

    # quadratic phase with the stationary point at the centre of the support
    for T in (100.0, 400.0, 1600.0):
        pp = _fresnel_pair(T, W, 1.5)
        for conv in ("stationary", "huxley"):
            res = stationary_phase_main(pp, theta_f=T, omega_f=1.0, omega_g=0.25, convention=conv)
            q = pp.quadrature()
            ratio = abs(q - res.main) / res.error_bound
            row(f"stationary-{conv}", f"T={T:g}", res.main, q, ratio, 1.0, ratio <= 1.0)

    rng = np.random.Generator(np.random.Philox(key=args.seed))
    worst = 0.0
    for case in poisson_cases(rng, args.functions):
        out = run_poisson_case(case)
        worst = max(worst, out["diff"])
        label = f"{case['kind']} mu={case['mu']:.4f} w={case['w']:.4f} M={case['M']} shift={case['shift']}"
        row("poisson", label, out["lhs"], out["rhs"], out["diff"], args.tol, out["diff"] <= args.tol)
    rep.max_error = worst
    return rep


def cmd_lvalue(args) -> Report:
    psi = _character(args)
    bound = args.prime_bound or args.terms
    lam = lambda_coefficients(psi, max(args.terms, bound))
    series = dirichlet_series(psi, args.s, args.terms, lam=lam)
    prod = euler_product(psi, args.s, bound, lam=lam)
    rel = abs(series.value - prod) / abs(prod)
    rep = Report("lvalue", [], tol=args.tol)
    rep.results.append({"s_re": args.s.real, "s_im": args.s.imag, "terms": args.terms, "prime_bound": bound,
                        "series_re": series.value.real, "series_im": series.value.imag,
                        "euler_re": prod.real, "euler_im": prod.imag,
                        "tail_bound": series.tail_bound, "rel_diff": rel, "tol": args.tol})
    rep.check(rel <= args.tol, rel)
    return rep


def cmd_scan(args) -> Report:
    psi = _character(args)
    grid = np.geomspace(args.tmin, args.tmax, args.steps) if args.steps > 0 else []
    gs = growth_scan(psi, grid, control=args.control)
    rep = Report("scan", [{"t": r.t, "N_at_sup": r.N_at_sup, "sup_ratio": r.sup_ratio} for r in gs.rows])
    rep.extra = {"label": gs.label, "policy": gs.policy, "control": gs.control, "exponent": gs.exponent,
                 "stderr": gs.stderr, "ci_low": gs.ci[0] if gs.ci else None,
                 "ci_high": gs.ci[1] if gs.ci else None}
    return rep


COMMANDS = {
    "field-info": (cmd_field_info, "json"),
    "coeffs": (cmd_coeffs, "csv"),
    "verify-gauss": (cmd_verify_gauss, "csv"),
    "verify-arith": (cmd_verify_arith, "csv"),
    "verify-voronoi": (cmd_verify_voronoi, "json"),
    "delta-check": (cmd_delta_check, "csv"),
    "osc-check": (cmd_osc_check, "csv"),
    "lvalue": (cmd_lvalue, "json"),
    "scan": (cmd_scan, "csv"),
}


# ----------------------------------------------------------------------------
# output

def _config_echo(args) -> dict:
    out = {}
    for key, val in sorted(vars(args).items()):
        if key in ("out", "config", "timing"):
            continue
        if isinstance(val, complex):
            val = [val.real, val.imag]
        out[key] = _plain(val)
    return out


def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


def render(rep: Report, args, fmt: str, wall: Optional[float]) -> str:
    rep.results = [_plain(r) for r in rep.results]
    summary = _plain(rep.summary())
    if wall is not None:
        summary["wall_time"] = wall
    if fmt == "json":
        doc = {"schema": rep.schema, "tool_version": __version__, "seed": args.seed,
               "config": _config_echo(args), "results": rep.results, "summary": summary}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema={rep.schema} tool_version={__version__} seed={args.seed}\n")
    buf.write("# config " + json.dumps(_config_echo(args), sort_keys=True) + "\n")
    if rep.results:
        keys = list(rep.results[0].keys())
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for row in rep.results:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    buf.write("# summary " + json.dumps(summary, sort_keys=True) + "\n")
    return buf.getvalue()


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    for name in ("tol", "budget", "tail_target", "max_terms", "radius", "N", "terms", "prime_bound"):
        val = getattr(args, name, None)
        if val is not None and not val > 0:
            print(f"error: --{name.replace('_', '-')} must be positive", file=sys.stderr)
            return 1
    func, default_fmt = COMMANDS[args.command]
    if getattr(args, "grid", False):
        default_fmt = "csv"
    t0 = time.perf_counter()
    try:
        rep = func(args)
    except (HeckeVoronoiError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    wall = time.perf_counter() - t0 if args.timing else None
    text = render(rep, args, args.format or default_fmt, wall)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 2 if rep.failed else 0


if __name__ == "__main__":
    sys.exit(main())
