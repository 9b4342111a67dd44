"""``renyi-sdpi`` command line.

Exit status: 0 ok, 1 usage, 2 unreadable or inconsistent input, 3 a
verification suite reported failures.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .divergences import KL, DivergenceKind, Hellinger, divergence, parse_alpha
from .errors import ParseError, SdpiError
from .measures import (
    bsc,
    load_kernel,
    load_measure,
    make_kernel,
    make_measure,
    named_channel,
    tensor,
    z_channel,
)
from .mixing import ChainSpec, compare_bounds
from .sdpi import (
    LogOnePlus,
    SearchConfig,
    eta_chi2_dd,
    eta_chi2_kernel,
    eta_dd,
    eta_di,
    eta_infty_dd,
    eta_infty_kernel,
    eta_infty_tv_bounds,
    eta_tv_kernel,
    transformed_sdpi_compare,
)
from .verify import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2, 3

FAMILIES = ("renyi", "kl", "tv", "hellinger", "chi2", "linf")
_ORDERED = ("renyi", "hellinger")

FIG1_KERNEL = [[0.5, 0.5], [0.1, 0.9]]
FIG1_MU = [0.9, 0.1]
FIG4_STEPS = 200


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- formatting

def _num(v):
    """JSON-safe number: infinities become the string ``"inf"``."""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return "" if v is None else str(v)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _table(fmt, header, rows) -> str:
    if fmt == "csv":
        return _csv(header, rows)
    return _json([{h: (_num(v) if isinstance(v, (float, np.floating)) else v) for h, v in zip(header, row)}
                  for row in rows])


# ---------------------------------------------------------------- inputs

def _kernel(spec: str):
    if Path(spec).is_file():
        return load_kernel(spec)
    if ":" in spec:
        return named_channel(spec)
    raise ParseError(f"{spec!r} is neither a kernel file nor a channel like bsc:0.1")


def _measure(spec: str):
    if Path(spec).is_file():
        return load_measure(spec)
    try:
        return make_measure([float(v) for v in spec.split(",")])
    except ValueError:
        raise ParseError(f"{spec!r} is neither a measure file nor comma-separated weights") from None


def _grid(spec: str) -> list[float]:
    """``start:stop:count`` (inclusive linspace) or a comma list; ``inf`` is allowed in lists."""
    try:
        if spec.count(":") == 2:
            a, b, n = spec.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(n))]
        return [parse_alpha(v) if v.strip().lower() in ("inf", "infinity") else float(v)
                for v in spec.split(",")]
    except ValueError as exc:
        raise ParseError(f"bad grid {spec!r}: {exc}") from None


def _kinds(families, alphas) -> list[DivergenceKind]:
    out = []
    for fam in families:
        if fam in _ORDERED:
            out.extend(DivergenceKind(fam, parse_alpha(a)) for a in alphas)
        else:
            out.append(DivergenceKind(fam))
    return out


def _seed(args) -> int:
    env = os.environ.get("SDPI_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ParseError(f"SDPI_SEED={env!r} is not an integer") from None
    return args.seed


def _config(args, **overrides) -> SearchConfig:
    return SearchConfig(restarts=args.restarts, seed=_seed(args), **overrides)


def estimate(K, mu, kind: DivergenceKind, config: SearchConfig):
    """The sharpest available estimate: closed forms first, searches otherwise."""
    if mu is None:
        return eta_di(K, kind, config)
    if kind.family == "renyi" and math.isinf(kind.alpha):
        return eta_infty_dd(mu, K)
    if kind.family == "chi2":
        return eta_chi2_dd(mu, K)
    return eta_dd(mu, K, kind, config)


# ---------------------------------------------------------------- commands

def cmd_div(args):
    nu, mu = _measure(args.nu), _measure(args.mu)
    rows = [(str(k), divergence(nu, mu, k)) for k in _kinds(args.kind, args.alpha)]
    return _table(args.format, ["kind", "value"], rows)


def cmd_sdpi(args):
    K = _kernel(args.kernel)
    mu = _measure(args.mu) if args.mu else None
    config = _config(args)
    ests = [estimate(K, mu, k, config) for k in _kinds(args.kind, args.alpha)]
    if args.format == "csv":
        rows = [(e.value, e.lower_bound, e.upper_bound, str(e.method), str(e.kind),
                 json.dumps(None if e.certificate is None else e.certificate.to_dict()))
                for e in ests]
        return _csv(["value", "lower_bound", "upper_bound", "method", "kind", "certificate"], rows)
    return _json([e.to_dict() for e in ests])


def cmd_sweep(args):
    mu = _measure(args.mu) if args.mu else None
    config = _config(args)
    rows = []
    if args.axis == "alpha":
        K = _kernel(args.kernel)
        for a in _grid(args.values):
            e = estimate(K, mu, DivergenceKind(args.family, a), config)
            rows.append((a, e.value, e.lower_bound, e.upper_bound, str(e.method)))
        return _table(args.format, ["alpha", "value", "lower_bound", "upper_bound", "method"], rows)
    make = {"bsc": bsc, "z": z_channel}[args.channel]
    alpha = parse_alpha(args.alpha) if args.family in _ORDERED else 0.0
    kind = DivergenceKind(args.family, alpha) if args.family in _ORDERED else DivergenceKind(args.family)
    for eps in _grid(args.values):
        e = estimate(make(eps), mu, kind, config)
        rows.append((eps, e.value, e.lower_bound, e.upper_bound, str(e.method)))
    return _table(args.format, ["eps", "value", "lower_bound", "upper_bound", "method"], rows)


def cmd_mixing(args):
    spec = ChainSpec(_kernel(args.kernel), _measure(args.start), args.steps)
    report = compare_bounds(spec, _config(args))
    return report.to_csv() if args.format == "csv" else report.to_json() + "\n"


def cmd_verify(args):
    names = list(SUITES) if "all" in args.suite else list(dict.fromkeys(args.suite))
    config = SearchConfig(restarts=args.restarts, seed=_seed(args), crosscheck=False)
    results = []
    for name in names:
        passed, failures = run_suite(name, args.n, _seed(args), args.max_dim, config)
        results.append({"suite": name, "passed": passed, "total": args.n, "failures": failures[:10]})
    ok = all(r["passed"] == r["total"] for r in results)
    if args.format == "csv":
        text = _csv(["suite", "passed", "total"], [(r["suite"], r["passed"], r["total"]) for r in results])
    else:
        text = _json({"ok": ok, "suites": results})
    return text, (EXIT_OK if ok else EXIT_VERIFY)


def figure_fig1(config):
    """Rényi, Hellinger and chi-squared constants against the order on the fixed two-point instance."""
    K, mu = make_kernel(FIG1_KERNEL), make_measure(FIG1_MU)
    chi2 = eta_chi2_dd(mu, K).value
    rows = []
    for a in np.arange(1, 201) / 20.0:
        a = float(a)
        if a == 1.0:
            h = r = eta_dd(mu, K, KL, config).value
        else:
            h, r = transformed_sdpi_compare(mu, K, Hellinger(a), LogOnePlus(a - 1.0), config)
        rows.append((a, r, h, chi2))
    return ["alpha", "eta_renyi", "eta_hellinger", "eta_chi2"], rows


def _eps_grid():
    return [float(e) for e in np.arange(1, 100) / 100.0]


def figure_fig2(config):
    """Order-infinity constant at the uniform input of BSC(eps) with its TV bounds."""
    mu = make_measure([0.5, 0.5])
    rows = []
    for eps in _eps_grid():
        K = bsc(eps)
        lo, hi = eta_infty_tv_bounds(mu, K, config=config)
        rows.append((eps, eta_infty_dd(mu, K).value, lo, min(1.0, hi)))
    return ["eps", "eta_infty", "tv_lower", "tv_upper"], rows


def figure_fig3(config):
    """Input-independent constants of BSC(eps)."""
    rows = []
    for eps in _eps_grid():
        K = bsc(eps)
        rows.append((eps, eta_infty_kernel(K).value, eta_tv_kernel(K).value, eta_chi2_kernel(K, config).value))
    return ["eps", "eta_infty", "eta_tv", "eta_chi2"], rows


def figure_fig4(config):
    """Squared-deviation trajectory of three independent BSC(0.01) bits started at 000."""
    K = tensor(tensor(bsc(0.01), bsc(0.01)), bsc(0.01))
    start = np.zeros(8)
    start[0] = 1.0
    report = compare_bounds(ChainSpec(K, make_measure(start), FIG4_STEPS), config)
    return ["n", "true_dev_sq", "linear_bound", "nonlinear_bound"], report.per_step


FIGURES = {"fig1": figure_fig1, "fig2": figure_fig2, "fig3": figure_fig3, "fig4": figure_fig4}


def cmd_figure(args):
    restarts = args.restarts if args.restarts_given else (64 if args.name == "fig4" else 32)
    config = SearchConfig(restarts=restarts, seed=_seed(args))
    header, rows = FIGURES[args.name](config)
    return _table(args.format, header, rows)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="search seed (SDPI_SEED overrides)")
    common.add_argument("--restarts", type=int, default=None, help="Nelder-Mead restarts per search")
    common.add_argument("--output", "-o", help="write here instead of stdout")

    p = _Parser(prog="renyi-sdpi", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fmt, **kw):
        s = sub.add_parser(name, parents=[common], **kw)
        s.add_argument("--format", choices=("json", "csv"), default=fmt)
        return s

    def kinds(s):
        s.add_argument("--kind", action="append", choices=FAMILIES,
                       help="divergence family (repeatable, default renyi)")
        s.add_argument("--alpha", action="append", default=None,
                       help="order for renyi/hellinger (repeatable, 'inf' allowed, default 2)")

    s = add("div", "json", help="divergence between two measures")
    s.add_argument("--nu", required=True, help="measure file or comma weights")
    s.add_argument("--mu", required=True, help="reference measure file or comma weights")
    kinds(s)
    s.set_defaults(run=cmd_div)

    s = add("sdpi", "json", help="contraction constant of a kernel")
    s.add_argument("--kernel", required=True, help="kernel file (JSON/CSV) or channel like bsc:0.1")
    s.add_argument("--mu", help="fix the input measure (omit for the input-independent constant)")
    kinds(s)
    s.set_defaults(run=cmd_sdpi)

    s = add("sweep", "csv", help="constant along an order or channel-parameter grid")
    s.add_argument("axis", choices=("alpha", "eps"))
    s.add_argument("--values", required=True, help="start:stop:count or comma list")
    s.add_argument("--family", choices=FAMILIES, default="renyi")
    s.add_argument("--kernel", help="kernel for the alpha axis")
    s.add_argument("--channel", choices=("bsc", "z"), default="bsc", help="channel for the eps axis")
    s.add_argument("--alpha", default="2", help="order used on the eps axis")
    s.add_argument("--mu", help="fix the input measure")
    s.set_defaults(run=cmd_sweep)

    s = add("mixing", "json", help="linear vs non-linear mixing bounds at order 2")
    s.add_argument("--kernel", required=True)
    s.add_argument("--start", required=True, help="initial measure file or comma weights")
    s.add_argument("--steps", type=int, default=100)
    s.set_defaults(run=cmd_mixing)

    s = add("verify", "json", help="randomized property suites")
    s.add_argument("--suite", action="append", choices=(*SUITES, "all"), default=None)
    s.add_argument("-n", type=int, default=100, help="instances per suite")
    s.add_argument("--max-dim", type=int, default=6)
    s.set_defaults(run=cmd_verify)

    s = add("figure", "csv", help="data series for the four reference plots")
    s.add_argument("name", choices=sorted(FIGURES))
    s.set_defaults(run=cmd_figure)
    return p


def _finish_args(args):
    if getattr(args, "kind", None) is None and args.command in ("div", "sdpi"):
        args.kind = ["renyi"]
    if args.command in ("div", "sdpi") and args.alpha is None:
        args.alpha = ["2"]
    if args.command == "sweep" and args.axis == "alpha" and not args.kernel:
        raise UsageError("sweep alpha needs --kernel")
    if args.command == "sweep" and args.axis == "alpha" and args.family not in _ORDERED:
        raise UsageError("sweep alpha needs --family renyi or hellinger")
    if args.command == "verify" and args.suite is None:
        args.suite = ["all"]
    if args.command == "mixing" and args.steps < 1:
        raise UsageError("--steps must be positive")
    args.restarts_given = args.restarts is not None
    if args.restarts is None:
        args.restarts = 8 if args.command == "verify" else 32
    if args.restarts < 1:
        raise UsageError("--restarts must be positive")
    return args


def main(argv=None) -> int:
    try:
        args = _finish_args(build_parser().parse_args(argv))
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        out = args.run(args)
    except (SdpiError, OSError, json.JSONDecodeError) as exc:
        print(f"renyi-sdpi: {exc}", file=sys.stderr)
        return EXIT_INPUT
    status = EXIT_OK
    if isinstance(out, tuple):
        out, status = out
    if args.output:
        Path(args.output).write_text(out)
    else:
        sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
