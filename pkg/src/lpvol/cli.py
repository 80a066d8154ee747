"""Command-line front end: ``lpvol <command> [flags]``.

Every computational result is emitted as a record with the keys command,
params, value, err_estimate and method. Multi-row commands also carry a
``rows`` list, which is what the CSV format writes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import analysis, kernels
from .exceptions import BracketError, ConvergenceError, DomainError
from .montecarlo import McConfig, mc_projection, mc_section
from .quadrature import QuadConfig
from .volumes import P_MAX, VOLUME_CONFIG, Direction, diagonal_scan, volume

COMMANDS = ("section", "projection", "kernel", "roots", "verify", "crossover", "oracle", "scan")


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument handling


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _reals(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpvol",
        description="Sections and projections of l_p balls along diagonal directions.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "csv", "json"), default=None)
    common.add_argument("--out", default=None, help="write the result here instead of stdout")

    def index_flags(p, need_p=False, need_q=False):
        p.add_argument("--p", type=float, required=need_p)
        p.add_argument("--q", type=float, required=need_q)

    def vol_flags(p):
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--dir", default=None, help="diag:k or vec:v1,v2,... (default diag:n)")
        p.add_argument("--tol", type=float, default=VOLUME_CONFIG.abs_tol)

    p = sub.add_parser("section", parents=[common], help="normalised section volume A_{n,p}(a)")
    vol_flags(p)
    index_flags(p, need_p=True)

    p = sub.add_parser("projection", parents=[common], help="normalised projection volume P_{n,q}(a)")
    vol_flags(p)
    index_flags(p, need_q=True)

    p = sub.add_parser("kernel", parents=[common], help="gamma_p (with --p) or delta_q (with --q)")
    index_flags(p)
    p.add_argument("--s", type=_reals, required=True, help="comma-separated evaluation points")

    sub.add_parser("roots", parents=[common], help="critical exponents")

    p = sub.add_parser("verify", parents=[common], help="check every inequality constant on its grid")
    p.add_argument("--density", type=float, default=50.0, help="grid points per unit length")

    p = sub.add_parser("crossover", parents=[common], help="diagonal versus a^(2) over n")
    index_flags(p)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--tol", type=float, default=VOLUME_CONFIG.abs_tol)

    p = sub.add_parser("oracle", parents=[common], help="quadrature against Monte Carlo")
    vol_flags(p)
    index_flags(p)
    p.add_argument("--samples", type=int, default=McConfig.samples)
    p.add_argument("--seed", type=_u64, default=McConfig.seed)

    p = sub.add_parser("scan", parents=[common], help="volume over the diagonal family a^(k)")
    index_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tol", type=float, default=VOLUME_CONFIG.abs_tol)
    return parser


def _kind_and_index(args) -> tuple[str, float]:
    if (args.p is None) == (args.q is None):
        raise UsageError("give exactly one of --p or --q")
    if args.p is not None:
        if not 1.0 <= args.p <= P_MAX:
            raise UsageError(f"--p must lie in [1, {P_MAX:g}]")
        return "section", args.p
    if not 1.0 < args.q <= 2.0:
        raise UsageError("--q must lie in (1, 2]")
    return "projection", args.q


def _check_n(n):
    if n < 2:
        raise UsageError("--n must be at least 2")


def parse_direction(text: str | None, n: int) -> Direction:
    if text is None:
        return Direction.diag(n, n)
    head, _, body = text.partition(":")
    try:
        if head == "diag":
            return Direction.diag(n, int(body))
        if head == "vec":
            d = Direction.from_vector(_reals(body))
            if d.n != n:
                raise UsageError(f"vector has {d.n} coordinates but --n is {n}")
            return d
    except (ValueError, DomainError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"bad --dir {text!r}: {exc}") from None
    raise UsageError(f"bad --dir {text!r}: expected diag:k or vec:v1,v2,...")


def _config(tol: float) -> QuadConfig:
    if not 0.0 < tol < 1.0:
        raise UsageError("--tol must lie in (0, 1)")
    return QuadConfig(abs_tol=tol, rel_tol=100.0 * tol)


# --------------------------------------------------------------------------
# commands; each returns (record, ok)


def _record(command, params, value, err, method, **extra):
    rec = {"command": command, "params": params, "value": value, "err_estimate": err,
           "method": method}
    rec.update(extra)
    return rec


def cmd_volume(args):
    kind, index = _kind_and_index(args)
    _check_n(args.n)
    a = parse_direction(args.dir, args.n)
    est = volume(kind, args.n, index, a, _config(args.tol))
    params = {"n": args.n, "p" if kind == "section" else "q": index, "dir": a.label()}
    rec = _record(kind, params, est.value, est.err_estimate, est.method, converged=est.converged)
    return rec, est.converged


def cmd_kernel(args):
    kind, index = _kind_and_index(args)
    s = list(args.s)
    if not s:
        raise UsageError("--s needs at least one point")
    if kind == "section":
        vals, errs = kernels.gamma_kernel_with_error(index, s)
        name, key = "gamma", "p"
    else:
        vals, errs = kernels.delta_kernel_with_error(index, s)
        name, key = "delta", "q"
    rows = [{"s": x, "value": float(v), "err_estimate": float(e)} for x, v, e in zip(s, vals, errs)]
    single = len(rows) == 1
    rec = _record("kernel", {"kernel": name, key: index, "s": s},
                  rows[0]["value"] if single else [r["value"] for r in rows],
                  rows[0]["err_estimate"] if single else [r["err_estimate"] for r in rows],
                  "adaptive Gauss-Kronrod cosine transform", rows=rows)
    return rec, True


def cmd_roots(_args):
    c = analysis.critical_exponents()
    d = c.as_dict()
    value = {k: d[k] for k in ("p0", "p1_section", "q1_projection", "f_min_location")}
    rows = [{"name": k, "value": v, "residual": d["residuals"][k],
             "bracket_lo": d["brackets"][k][0], "bracket_hi": d["brackets"][k][1]}
            for k, v in value.items()]
    return _record("roots", {}, value, d["residuals"], "bisection", brackets=d["brackets"],
                   rows=rows), True


def cmd_verify(args):
    if args.density < 50:
        raise UsageError("--density must be at least 50")
    reports = analysis.verify_all(analysis.GridSpec(density=args.density))
    rows = [{"lemma_id": r.lemma_id, "description": r.description, "points": len(r.grid),
             "worst_margin": r.worst_margin, "worst_at": str(r.worst_at), "pass": r.passed}
            for r in reports]
    ok = all(r.passed for r in reports)
    return _record("verify", {"density": args.density}, ok, None, "pointwise grid",
                   worst_margin=min(r.worst_margin for r in reports), rows=rows), ok


def cmd_crossover(args):
    kind, index = _kind_and_index(args)
    if not 2 <= args.n_max <= 5000:
        raise UsageError("--n-max must lie in [2, 5000]")
    try:
        rep = analysis.crossover_scan(kind, index, args.n_max, _config(args.tol))
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    rows = [{"n": r.n, "diagonal": r.diagonal, "a2": r.a2, "margin": r.margin,
             "err_estimate": r.err, "crossed": r.crossed} for r in rep.per_n.values()]
    value = rep.n_empirical if rep.n_empirical is not None else f"none found <= {args.n_max}"
    rec = _record("crossover", {"kind": kind, "index": index, "n_max": args.n_max}, value,
                  max(r.err for r in rep.per_n.values()), "quadrature scan",
                  n_theorem=rep.n_theorem, first_crossing=rep.first_crossing,
                  theorem_verified=rep.theorem_verified, rows=rows)
    return rec, rep.theorem_verified


def cmd_oracle(args):
    kind, index = _kind_and_index(args)
    _check_n(args.n)
    if args.samples < 1000:
        raise UsageError("--samples must be at least 1000")
    a = parse_direction(args.dir, args.n)
    quad = volume(kind, args.n, index, a, _config(args.tol))
    mc_fn = mc_section if kind == "section" else mc_projection
    mc = mc_fn(args.n, index, a, McConfig(samples=args.samples, seed=args.seed))
    diff = abs(mc.mean - quad.value)
    bound = 3.0 * (mc.std_error + quad.err_estimate)
    params = {"n": args.n, "p" if kind == "section" else "q": index, "dir": a.label(),
              "samples": args.samples, "seed": args.seed}
    rows = [{"method": quad.method, "value": quad.value, "err_estimate": quad.err_estimate},
            {"method": "monte carlo", "value": mc.mean, "err_estimate": mc.std_error}]
    rec = _record("oracle", params, mc.mean, mc.std_error, "monte carlo",
                  quadrature=quad.value, quadrature_err=quad.err_estimate,
                  difference=diff, agree=diff <= bound, rows=rows)
    return rec, quad.converged


def cmd_scan(args):
    kind, index = _kind_and_index(args)
    _check_n(args.n)
    sc = diagonal_scan(kind, args.n, index, _config(args.tol))
    rows = [{"k": k, "value": e.value, "err_estimate": e.err_estimate} for k, e in sc.table.items()]
    best = sc.table[sc.best_k]
    rec = _record("scan", {"kind": kind, "index": index, "n": args.n}, sc.best_k,
                  best.err_estimate, "quadrature over a^(k)", best_value=best.value,
                  tie=sc.tie, tied_with=list(sc.tied_with), rows=rows)
    ok = all(e.converged for e in sc.table.values())
    return rec, ok


DISPATCH = {
    "section": cmd_volume,
    "projection": cmd_volume,
    "kernel": cmd_kernel,
    "roots": cmd_roots,
    "verify": cmd_verify,
    "crossover": cmd_crossover,
    "oracle": cmd_oracle,
    "scan": cmd_scan,
}


# --------------------------------------------------------------------------
# rendering


def _num(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _rows_for(rec):
    if "rows" in rec:
        return rec["rows"]
    return [{**{k: v for k, v in rec["params"].items()},
             "value": rec["value"], "err_estimate": rec["err_estimate"], "method": rec["method"]}]


def render(rec, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(rec), indent=2) + "\n"
    rows = _rows_for(rec)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\r\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: _num(v) for k, v in r.items()})
        return buf.getvalue()
    # plain table
    head = f"{rec['command']}  " + " ".join(f"{k}={_short(v)}" for k, v in rec["params"].items())
    lines = [head]
    if "rows" not in rec:
        lines.append(f"value        {_short(rec['value'])}")
        lines.append(f"err_estimate {_short(rec['err_estimate'])}")
        lines.append(f"method       {rec['method']}")
        return "\n".join(lines) + "\n"
    if not isinstance(rec["value"], (list, dict)):
        err = "" if rec["err_estimate"] is None else f"err {_short(rec['err_estimate'])}, "
        lines.append(f"value = {_short(rec['value'])}  ({err}{rec['method']})")
    cols = list(rows[0])
    cells = [[_short(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)))
    lines.extend("  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells)
    return "\n".join(lines) + "\n"


def _short(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, dict):
        return ", ".join(f"{k}={_short(v)}" for k, v in x.items())
    if isinstance(x, list):
        return ",".join(_short(v) for v in x)
    return str(x)


# --------------------------------------------------------------------------


def run(argv: list[str] | None = None, stdout=None) -> int:
    """Parse, dispatch and emit; returns the process exit code."""
    stdout = stdout if stdout is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    fmt = args.format or ("json" if args.command == "roots" else "table")
    try:
        rec, ok = DISPATCH[args.command](args)
    except (UsageError, DomainError) as exc:
        print(f"lpvol {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, BracketError) as exc:
        print(f"lpvol {args.command}: computation failed: {exc}", file=sys.stderr)
        return 1
    text = render(rec, fmt)
    if args.out:
        try:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"lpvol: cannot write {args.out}: {exc}", file=sys.stderr)
            return 2
    else:
        stdout.write(text)
    if not ok:
        print(f"lpvol {args.command}: result did not meet its tolerance or check", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
