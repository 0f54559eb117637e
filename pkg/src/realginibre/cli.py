"""Command-line front end: ``realginibre <subcommand> ...``.

Every subcommand prints JSON (or CSV for density/histogram data).  Validation
failures exit with status 2 and a single line of the form

    error flag=--n value=3 accepted="even integer in [2, 10000]"
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import warnings
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, density, expected, montecarlo, series, variance

EXIT_USAGE = 2


class UsageError(Exception):
    def __init__(self, flag: str, value, accepted: str):
        super().__init__(f"error flag={flag} value={value} accepted={json.dumps(accepted)}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse phrases most errors as "argument --flag: ..."
        m = re.match(r"argument ([^:]+): (.*)", message)
        if m:
            raise UsageError(m.group(1).split("/")[-1], json.dumps(m.group(2)), "see --help")
        raise UsageError(self.prog, json.dumps(message), "see --help")


# --------------------------------------------------------------------------
# output helpers


def load_schema(name: str) -> dict:
    """Published JSON schema for one subcommand's output."""
    return json.loads(resources.files(__package__).joinpath(f"schemas/{name}.schema.json").read_text())


def _num(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    text = f"{x:.17g}"
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_num(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, Fraction):
        return json.dumps(series._frac_str(obj))
    return _num(obj)


def _resolve(path: str) -> Path:
    p = Path(path)
    base = os.environ.get("RGINIBRE_OUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit(text: str, out: str | None, stdout) -> None:
    if out in (None, "-", "json", "csv"):
        stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        _resolve(out).write_text(text if text.endswith("\n") else text + "\n")


# --------------------------------------------------------------------------
# validation


def _even_n(n, hi: int, flag: str = "--n") -> int:
    if n is None:
        raise UsageError(flag, None, f"even integer in [2, {hi}] (required)")
    if n < 2 or n % 2 or n > hi:
        raise UsageError(flag, n, f"even integer in [2, {hi}]")
    return n


def _regime(args, N: int | None, allow_symmetric: bool = False) -> expected.RegimeParam:
    if args.tau is None and args.alpha is None:
        raise UsageError("--tau|--alpha", None, "exactly one of --tau or --alpha")
    if args.tau is not None:
        hi = "1]" if allow_symmetric else "1)"
        if not (0 <= args.tau < 1 or (allow_symmetric and args.tau == 1)):
            raise UsageError("--tau", args.tau, f"real in [0, {hi}")
        return expected.RegimeParam.from_tau(args.tau, N)
    if args.alpha == 0 and allow_symmetric:
        return expected.RegimeParam.from_tau(1.0, N)
    if not args.alpha > 0 or args.alpha**2 >= N:
        raise UsageError("--alpha", args.alpha, f"real with 0 < alpha < sqrt(N) = {math.sqrt(N):.6g}")
    return expected.RegimeParam.from_alpha(args.alpha, N)


def _alpha_of(reg: expected.RegimeParam, N: int):
    if reg.mode == "alpha":
        return reg.alpha
    return math.sqrt(N * (1 - reg.tau)) if reg.tau < 1 else 0.0


def _grid(text: str) -> np.ndarray:
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise UsageError("--grid", text, "lo:hi:count with lo < hi, count in [2, 100000]") from None
    if not (lo < hi and 2 <= count <= 100_000 and -4 <= lo and hi <= 4):
        raise UsageError("--grid", text, "lo:hi:count with -4 <= lo < hi <= 4, count in [2, 100000]")
    return np.linspace(lo, hi, count)


# --------------------------------------------------------------------------
# subcommands


def cmd_expected(args, stdout) -> int:
    route = args.route
    hi = {"exact": expected.HYPERGEOMETRIC_MAX_N, "residue": 2048, "asymptotic": 10**9}[route]
    N = _even_n(args.n, hi)
    reg = _regime(args, N)
    tau = reg.tau_n
    terms = []
    if route == "exact":
        value = expected.expected_exact(N, tau)
    elif route == "residue":
        value = float(expected.expected_exact_mp(N, reg.tau_exact))
    else:
        order = args.order
        if reg.mode == "alpha":
            if not 1 <= order <= 9:
                raise UsageError("--order", order, "integer in [1, 9] for --alpha")
            res = expected.expected_asymptotic_ah(reg, order)
        else:
            if not 1 <= order <= 6:
                raise UsageError("--order", order, "integer in [1, 6] for --tau")
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                res = expected.expected_asymptotic_elliptic(tau, N, order)
        value = res.value
        terms = [{"label": k, "value": v} for k, v in res.terms]
    doc = {
        "n": N,
        "tau": tau,
        "alpha": _alpha_of(reg, N),
        "value": value,
        "route": route,
        "terms": terms,
    }
    _emit(dumps(doc), args.out, stdout)
    return 0


def cmd_density(args, stdout) -> int:
    grid = _grid(args.grid)
    if args.route == "limit":
        if args.alpha is None and args.tau != 1:
            raise UsageError("--alpha", None, "positive real (required by --route limit)")
        if args.alpha is not None and args.alpha <= 0:
            raise UsageError("--alpha", args.alpha, "positive real")
        curve = density.density_curve(alpha=args.alpha, tau=args.tau, grid=grid, route="limit")
        meta = {"n": args.n, "tau": args.tau, "alpha": args.alpha}
    else:
        N = _even_n(args.n, density.MAX_N)
        reg = _regime(args, N, allow_symmetric=True)
        alpha = reg.alpha if reg.mode == "alpha" else None
        curve = density.density_curve(N, tau=reg.tau_n, alpha=alpha, grid=grid, route="exact")
        meta = {"n": N, "tau": reg.tau_n, "alpha": _alpha_of(reg, N)}
    fmt = args.format
    if fmt is None:
        fmt = "json" if (args.out or "").endswith(".json") or args.out == "json" else "csv"
    if fmt == "csv":
        text = curve.to_csv()
    else:
        text = dumps({
            **meta,
            "route": curve.meta["route"],
            "x": list(curve.grid),
            "rho": list(curve.values),
            "integral": curve.integral(),
        })
    _emit(text, args.out, stdout)
    return 0


def cmd_variance(args, stdout) -> int:
    hi = variance.MAX_N if args.route != "limit" else expected.HYPERGEOMETRIC_MAX_N
    N = _even_n(args.n, hi)
    reg = _regime(args, N)
    res = variance.variance_details(N, reg.tau_n, args.route)
    alpha = _alpha_of(reg, N)
    doc = {
        "n": N,
        "alpha": alpha,
        "tau": reg.tau_n,
        "v": res.v,
        "e": res.e,
        "ratio": res.ratio,
        "r_alpha": variance.r_alpha(alpha) if alpha > 0 else None,
        "route": args.route,
    }
    _emit(dumps(doc), args.out, stdout)
    return 0


PRESETS = {
    "fig1": dict(n=4096, tau=0.5, samples=1, scatter="scatter.csv"),
    "fig2a": dict(n=256, alpha=1.0, samples=256),
    "fig2b": dict(n=64, alpha=1.0, samples=100_000),
    "fig3": dict(n=256, alpha=None, samples=256, hist="hist.csv"),
}


def _apply_preset(args) -> None:
    name, _, rest = args.preset.partition(":")
    if name not in PRESETS:
        raise UsageError("--preset", args.preset, "one of fig1, fig2a, fig2b, fig3:alpha=K")
    values = dict(PRESETS[name])
    if name == "fig3":
        key, _, val = rest.partition("=")
        try:
            alpha = float(val)
        except ValueError:
            alpha = -1.0
        if key != "alpha" or not alpha >= 0:
            raise UsageError("--preset", args.preset, "fig3:alpha=K with K >= 0")
        values["alpha"] = alpha
    elif rest:
        raise UsageError("--preset", args.preset, f"{name} takes no parameters")
    # preset parameters win over defaults; an explicit regime flag would be ambiguous
    if ("tau" in values or "alpha" in values) and (args.tau is not None or args.alpha is not None):
        raise UsageError("--preset", args.preset, "no --tau/--alpha together with a preset")
    for key, val in values.items():
        if getattr(args, key, None) is None:
            setattr(args, key, val)


def cmd_sample(args, stdout) -> int:
    if args.preset:
        _apply_preset(args)
    if args.samples is None:
        args.samples = 256
    N = args.n
    if N is None or not 1 <= N <= 8192:
        raise UsageError("--n", N, "integer in [1, 8192]")
    reg = _regime(args, N, allow_symmetric=True)
    if not 1 <= args.samples <= 10_000_000:
        raise UsageError("--samples", args.samples, "integer in [1, 10000000]")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed", args.seed, "integer in [0, 2^64)")
    if not 1 <= args.bins <= 10_000:
        raise UsageError("--bins", args.bins, "integer in [1, 10000]")
    if args.threads is not None and not 1 <= args.threads <= 256:
        raise UsageError("--threads", args.threads, "integer in [1, 256]")
    spec = montecarlo.EnsembleSpec(N, reg, args.dist, args.seed)
    keep = args.scatter_limit if args.scatter else 0
    stats = montecarlo.run_experiment(
        spec, args.samples, bins=args.bins, hist_range=(-2.2, 2.2), scatter_limit=keep, threads=args.threads
    )
    doc = stats.to_dict()
    alpha = _alpha_of(reg, N)
    doc["alpha"] = alpha
    doc["preset"] = args.preset
    ref = {}
    if reg.tau_n < 1 and alpha > 0:
        ref["c_alpha"] = expected.c_alpha(alpha)
        ref["r_alpha"] = variance.r_alpha(alpha)
        if N % 2 == 0 and N <= expected.HYPERGEOMETRIC_MAX_N:
            ref["expected_exact"] = expected.expected_exact(N, reg.tau_n)
        ref["histogram_tv"] = montecarlo.histogram_tv(stats, lambda x: density.density_limit_ah(alpha, x))
    elif reg.tau_n == 1:
        ref["histogram_tv"] = montecarlo.histogram_tv(stats, density.density_semicircle)
    if keep and stats.complex_scatter.size:
        ref["ellipse_fraction"] = float(np.mean(density.in_ellipse(stats.complex_scatter, reg.tau_n, 0.02)))
    doc["reference"] = ref
    if args.hist:
        _resolve(args.hist).write_text(stats.hist_csv())
    if args.scatter:
        _resolve(args.scatter).write_text(stats.scatter_csv())
    _emit(dumps(doc), args.out, stdout)
    return 0


def _identity_checks(suite: str):
    """Yield ``(name, ok, detail)`` for every exact identity in the suite."""
    for k in range(31):
        q = series.gen_q(k, k + 1)
        yield f"q_{{{k},0}} = 1", q[0] == 1, ""
        yield f"q_{{{k},1}} = (k+1)/2", q[1] == Fraction(k + 1, 2), ""
        yield f"q_{{{k},k+1}} = 2^(-k-1)", q[k + 1] == Fraction(1, 2 ** (k + 1)), ""
    for N in (4, 8, 12, 16):
        for k in range(N - 1):
            yield f"residue a_{{{N},{k}}}: Laurent = closed form", series.residue_a(N, k) == series.residue_a_closed(N, k), ""
    for k in range(201):
        lhs, rhs = series.comb_identity(k)
        yield f"central binomial double sum k={k}", lhs == rhs, ""
    for k in range(41):
        closed, rebuilt = series.a_coefficients(k)
        yield f"a_{k} recombination", closed == rebuilt, series._frac_str(closed)
    anchors = [Fraction(-3, 8), Fraction(-3, 128), Fraction(27, 1024), Fraction(499, 32768)]
    for l, want in enumerate(anchors, start=1):
        got = expected.a_l(l, Fraction(0))
        yield f"a_{l}(0) = {series._frac_str(want)}", got == want, series._frac_str(got)
    if suite == "all":
        e2 = expected.expected_exact_mp(2, Fraction(0))
        yield "E_2(0) = sqrt(2) (residue, 40 digits)", abs(e2 - math.sqrt(2)) < 1e-15, ""
        e4 = expected.expected_exact_mp(4, Fraction(0))
        yield "E_4(0) = 11 sqrt(2)/8 (residue, 40 digits)", abs(e4 - 11 * math.sqrt(2) / 8) < 1e-15, ""


def cmd_verify(args, stdout) -> int:
    checks = []
    failed = 0
    for name, ok, detail in _identity_checks(args.suite):
        checks.append({"identity": name, "status": "exact" if ok else "FAILED", "detail": detail})
        failed += not ok
        if not args.json:
            stdout.write(f"{'exact ' if ok else 'FAILED'}  {name}{'  ' + detail if detail else ''}\n")
    summary = {"suite": args.suite, "total": len(checks), "failed": failed, "checks": checks}
    if args.json:
        _emit(dumps(summary), args.out, stdout)
    else:
        stdout.write(f"{len(checks) - failed}/{len(checks)} identities exact\n")
        if args.out:
            _resolve(args.out).write_text(dumps(summary) + "\n")
    return 0 if failed == 0 else 1


def cmd_coeffs(args, stdout) -> int:
    kind, k, count = args.kind, args.k, args.count
    if not 1 <= count <= 200:
        raise UsageError("--count", count, "integer in [1, 200]")
    if kind in ("q", "p_hat", "p"):
        if not 0 <= k <= 200:
            raise UsageError("--k", k, "integer in [0, 200]")
        tab = series.table(kind, k, count)
    elif kind == "a_k":
        if count > 41:
            raise UsageError("--count", count, "integer in [1, 41] for a_k")
        tab = series.CoefficientTable("a_k", {}, [series.a_coefficients(j)[0] for j in range(count)])
    elif kind == "a_k_n":
        if not 0 <= k <= 40:
            raise UsageError("--k", k, "integer in [0, 40] (the fixed index n)")
        tab = series.CoefficientTable("a_k_n", {"n": k}, [series.a_k_n_limit(j, k) for j in range(count)])
    elif kind == "a_l":
        if count > 10:
            raise UsageError("--count", count, "integer in [1, 10] for a_l")
        tau = Fraction(repr(args.tau)) if args.tau is not None else Fraction(0)
        if not 0 <= tau < 1:
            raise UsageError("--tau", args.tau, "real in [0, 1)")
        vals = [Fraction(1)] + [expected.a_l(l, tau) for l in range(1, count)]
        tab = series.CoefficientTable("a_l", {"tau": series._frac_str(tau)}, vals)
    elif kind == "d_s":
        if not 0 <= k <= 60:
            raise UsageError("--k", k, "integer in [0, 60] (the index s)")
        tab = series.CoefficientTable("d_s", {"s": k}, [expected._d_series_coeff(k, j) for j in range(count)])
    elif kind == "c_l":
        if not 1 <= k <= 8:
            raise UsageError("--k", k, "integer in [1, 8] (the index l)")
        p0, p1 = expected.c_l_polynomials(k)
        part = p0 if args.part == 0 else p1
        vals = list(part[:count]) + [Fraction(0)] * max(0, count - len(part))
        tab = series.CoefficientTable("c_l", {"l": k, "bessel_order": args.part}, vals)
    else:  # argparse choices make this unreachable
        raise UsageError("--kind", kind, ", ".join(series.CoefficientTable.KINDS))
    _emit(json.dumps(tab.to_dict(), indent=2), args.out, stdout)
    return 0


# --------------------------------------------------------------------------


def _regime_flags(p, required: bool = False):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--tau", type=float, help="fixed non-Hermiticity parameter")
    g.add_argument("--alpha", type=float, help="almost-Hermitian scale, tau = 1 - alpha^2/N")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="realginibre", description="Real-eigenvalue statistics of real elliptic Ginibre matrices.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("expected", help="expected number of real eigenvalues")
    e.add_argument("--n", type=int)
    _regime_flags(e)
    e.add_argument("--route", choices=("exact", "residue", "asymptotic"), default="exact")
    e.add_argument("--order", type=int, default=3, help="number of expansion terms (asymptotic route)")
    e.add_argument("--out", help="output path (default stdout)")
    e.set_defaults(func=cmd_expected)

    d = sub.add_parser("density", help="density of real eigenvalues on a grid")
    d.add_argument("--n", type=int)
    _regime_flags(d)
    d.add_argument("--grid", default="-2.5:2.5:401", help="lo:hi:count")
    d.add_argument("--route", choices=("exact", "limit"), default="exact")
    d.add_argument("--format", choices=("csv", "json"))
    d.add_argument("--out", help="csv, json, or a file path (format from the extension)")
    d.set_defaults(func=cmd_density)

    v = sub.add_parser("variance", help="variance of the number of real eigenvalues")
    v.add_argument("--n", type=int)
    _regime_flags(v)
    v.add_argument("--route", choices=("quadrature", "sum", "limit"), default="quadrature")
    v.add_argument("--out")
    v.set_defaults(func=cmd_variance)

    s = sub.add_parser("sample", help="Monte Carlo sampling")
    s.add_argument("--n", type=int)
    _regime_flags(s)
    s.add_argument("--dist", choices=montecarlo.DISTRIBUTIONS, default="gaussian")
    s.add_argument("--samples", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--bins", type=int, default=20)
    s.add_argument("--out", help="stats JSON path (default stdout)")
    s.add_argument("--hist", help="histogram CSV path")
    s.add_argument("--scatter", help="complex-eigenvalue CSV path")
    s.add_argument("--scatter-limit", type=int, default=100_000)
    s.add_argument("--threads", type=int, help="worker threads (default $RGINIBRE_THREADS or 1)")
    s.add_argument("--preset", help="fig1 | fig2a | fig2b | fig3:alpha=K")
    s.set_defaults(func=cmd_sample)

    f = sub.add_parser("verify", help="exact identity suite")
    f.add_argument("--suite", choices=("identities", "all"), default="identities")
    f.add_argument("--json", action="store_true", help="print the JSON report instead of text lines")
    f.add_argument("--out")
    f.set_defaults(func=cmd_verify)

    c = sub.add_parser("coeffs", help="exact coefficient tables")
    c.add_argument("--kind", choices=series.CoefficientTable.KINDS, required=True)
    c.add_argument("--k", type=int, default=0, help="fixed index (k, n, s or l depending on kind)")
    c.add_argument("--count", type=int, default=8)
    c.add_argument("--tau", type=float, help="tau for --kind a_l (default 0)")
    c.add_argument("--part", type=int, choices=(0, 1), default=0, help="Bessel order for --kind c_l")
    c.add_argument("--out")
    c.set_defaults(func=cmd_coeffs)
    return p


def _glue_negative_values(argv: list) -> list:
    # "--grid -2.5:2.5:401" would otherwise read the value as a flag
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in ("--grid", "--tau", "--alpha") and i + 1 < len(argv) and re.match(r"-[\d.]", argv[i + 1]):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_glue_negative_values(argv))
        return args.func(args, stdout)
    except UsageError as exc:
        stderr.write(str(exc) + "\n")
        return EXIT_USAGE
    except ValueError as exc:
        # module preconditions not caught above still map to a one-line usage error
        stderr.write(f"error flag=? value=? accepted={json.dumps(str(exc))}\n")
        return EXIT_USAGE


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
