"""Command-line interface.

Exit codes: 0 success or certified, 1 inconclusive, 2 format error,
3 refused overwrite, 4 missing coverage, 5 violated precondition.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import time
from pathlib import Path

from . import __version__
from .bounds import CertificationInput, certify, propagate_interval, report_json
from .errors import CoverageError, FormatError, MertensError
from .primes import delta_m_jumps, mertens_constant, pi_star_m, sieve_primes
from .search import DEFAULT_THRESHOLD, REGION_GAP, Candidate, read_candidates_csv, refine, scan, write_candidates_csv
from .zeros import ZeroSet, cache_read, cache_write, import_zeros, validate
from .zerosum import explicit_pi_star, kernel_weighted_sum

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_FORMAT, EXIT_SAFETY, EXIT_COVERAGE, EXIT_PRECONDITION = range(6)

TABLE1 = dict(y_lo="1", y_hi="2500", step="1e-7", T=1e6, threshold=-0.95, region=REGION_GAP)


def cache_dir() -> Path:
    return Path(os.environ.get("MH_CACHE_DIR") or Path.home() / ".cache" / "mertens")


def cache_path(name: str) -> Path:
    p = Path(name)
    if p.suffix == ".mhz" or p.parent != Path("."):
        return p
    return cache_dir() / f"{name}.mhz"


def load_zeros(name: str) -> ZeroSet:
    p = cache_path(name)
    if not p.exists():
        raise CoverageError(f"no zero cache at {p}; run 'mertens zeros import' first")
    return cache_read(p)


def _g(x: float) -> str:
    return format(x, ".17g")


class _Out:
    """Collects primary output; written to --output or stdout at the end."""

    def __init__(self, path: str | None):
        self.path = path
        self.buf = io.StringIO()

    def write(self, s: str):
        self.buf.write(s)

    def close(self):
        data = self.buf.getvalue()
        if self.path:
            Path(self.path).write_text(data)
        else:
            sys.stdout.write(data)


def _table(out, fmt: str, header: list[str], rows: list[list], key: str = "rows"):
    if fmt == "json":
        doc = {key: [dict(zip(header, r)) for r in rows]}
        out.write(json.dumps(doc, indent=2, default=str) + "\n")
    elif fmt == "csv":
        out.write(",".join(header) + "\n")
        for r in rows:
            out.write(",".join(_g(v) if isinstance(v, float) else str(v) for v in r) + "\n")
    else:
        out.write("  ".join(f"{h:>24}" for h in header) + "\n")
        for r in rows:
            out.write("  ".join(f"{_g(v) if isinstance(v, float) else str(v):>24}" for v in r) + "\n")


def _note(msg: str):
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# zeros


def cmd_zeros_import(args, out) -> int:
    target = cache_path(args.name)
    if target.exists() and not args.force:
        _note(f"error: {target} exists; pass --force to overwrite")
        return EXIT_SAFETY
    zs = import_zeros(args.path, format=args.format, precision=args.precision, height=args.height)
    issues = validate(zs)
    if issues:
        for s in issues:
            _note(f"validation: {s}")
        return EXIT_FORMAT
    target.parent.mkdir(parents=True, exist_ok=True)
    cache_write(zs, target)
    rows = [[str(target), zs.count, zs.max_gamma, zs.height, zs.precision]]
    _table(out, args.out_format or "text", ["cache", "count", "max_gamma", "height", "precision"], rows)
    return EXIT_OK


def cmd_zeros_validate(args, out) -> int:
    p = Path(args.source)
    if p.exists() and p.suffix != ".mhz":
        zs = import_zeros(p, format=args.format)
    else:
        zs = load_zeros(args.source)
    issues = validate(zs)
    for s in issues:
        out.write(f"{s}\n")
    if not issues:
        out.write(f"ok: {zs.count} ordinates, max {_g(zs.max_gamma)}, complete to {_g(zs.height)}\n")
    return EXIT_FORMAT if issues else EXIT_OK


# ---------------------------------------------------------------------------
# scan / refine


def _cand_out(out, fmt: str, cands: list[Candidate]):
    if fmt == "json":
        rows = [{"y": str(c.y), "sigma": c.sigma, "T": c.T, "width": c.width} for c in cands]
        out.write(json.dumps({"candidates": rows}, indent=2) + "\n")
    else:
        write_candidates_csv(out, cands)


def cmd_scan(args, out) -> int:
    if args.table1:
        lo, hi, step, T, thr = TABLE1["y_lo"], TABLE1["y_hi"], TABLE1["step"], TABLE1["T"], TABLE1["threshold"]
        region = TABLE1["region"]
    else:
        if args.range is None:
            _note("error: --range LO HI or --table1 is required")
            return EXIT_PRECONDITION
        lo, hi = args.range
        step, T, thr = args.step, args.T, args.threshold
        region = args.region
    zs = load_zeros(args.zeros)
    t0 = time.time()
    last = [0.0]

    def progress(done, total):
        if args.verbose and time.time() - last[0] > 30:
            last[0] = time.time()
            _note(f"scan: {done}/{total} points ({100 * done / total:.1f}%), {time.time() - t0:.0f} s")

    cands = scan(zs, T, (lo, hi), step, thr, mode=args.mode, threads=args.threads, progress=progress, region=region)
    _cand_out(out, args.out_format or "csv", cands)
    _note(f"{len(cands)} candidate(s) in {time.time() - t0:.1f} s")
    return EXIT_OK


def cmd_refine(args, out) -> int:
    zs = load_zeros(args.zeros)
    if args.candidates:
        cands = read_candidates_csv(args.candidates)
    else:
        if args.y is None:
            _note("error: --y or --candidates is required")
            return EXIT_PRECONDITION
        from decimal import Decimal

        cands = [Candidate(Decimal(args.y), math.nan, args.T, args.width)]
    res = [refine(c, zs, args.T2, args.step2, level=args.level, mode=args.mode) for c in cands]
    _cand_out(out, args.out_format or "csv", res)
    return EXIT_OK


# ---------------------------------------------------------------------------
# certify


def cmd_certify(args, out) -> int:
    inp = CertificationInput(args.omega, args.eps, args.c, args.H, args.a, args.h, args.T)
    if args.sum_override is not None:
        zsum = args.sum_override
        extra = {}
    else:
        zs = load_zeros(args.zeros)
        ws = kernel_weighted_sum(zs, args.omega, inp.params, inp.T_sum)
        zsum = ws
        extra = {"zero_count": ws.count, "phase_precision": ws.phase_precision}
    rep = certify(inp, zsum)
    region = propagate_interval(rep, inp) if rep.negative else None
    out.write(report_json(rep, region, extra))
    return EXIT_OK if rep.negative else EXIT_INCONCLUSIVE


# ---------------------------------------------------------------------------
# oracle / sieve / constant


def cmd_oracle(args, out) -> int:
    xs = args.x
    if any(not x > 1 for x in xs):
        _note("error: the explicit formula needs x > 1")
        return EXIT_PRECONDITION
    limit = max(args.limit, int(max(xs)) + 1)
    table = sieve_primes(limit)
    zs = load_zeros(args.zeros) if args.T >= 14 else None
    rows = []
    for x in xs:
        s = pi_star_m(x, table) if x >= 2 else 0.0
        f = explicit_pi_star(x, zs, args.T).value
        rows.append([x, s, f, abs(s - f)])
    _table(out, args.out_format or "text", ["x", "sieve", "formula", "abs_diff"], rows)
    return EXIT_OK


def cmd_sieve_check(args, out) -> int:
    consts = mertens_constant(1e-9)
    table = sieve_primes(int(args.limit))
    prof = delta_m_jumps(table, consts, int(args.limit))
    i = int(prof.left_limit.argmin())
    lo = float(prof.left_limit[i])
    ok = lo > float(consts.tail_bound)
    rows = [[int(args.limit), prof.primes.size, int(prof.primes[i]), lo, float(consts.tail_bound), "positive" if ok else "FAIL"]]
    _table(out, args.out_format or "text", ["limit", "primes", "argmin_p", "min_left_limit", "m_uncertainty", "status"], rows)
    return EXIT_OK if ok else EXIT_INCONCLUSIVE


def cmd_mertens_constant(args, out) -> int:
    mc = mertens_constant(args.goal)
    rows = [[format(mc.mertens_m, ".17g"), format(mc.tail_bound, ".3g"), mc.prime_limit]]
    _table(out, args.out_format or "text", ["M", "half_width", "prime_limit"], rows)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mertens", description="Sign changes of the Mertens deviation.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    ap.add_argument("--output", "-o", help="write primary output here instead of stdout")
    ap.add_argument("--format", dest="out_format", choices=["csv", "json", "text"], help="output format")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    z = sub.add_parser("zeros", help="import or validate zero tables")
    zsub = z.add_subparsers(dest="zeros_command", required=True)
    zi = zsub.add_parser("import", help="parse a text table into the binary cache")
    zi.add_argument("path")
    zi.add_argument("--format", default="plain-text", choices=["plain-text", "paired-text"])
    zi.add_argument("--precision", type=float)
    zi.add_argument("--height", type=float, help="completeness height (default: largest ordinate)")
    zi.add_argument("--name", default="zeros", help="cache name under $MH_CACHE_DIR, or a .mhz path")
    zi.add_argument("--force", action="store_true", help="overwrite an existing cache")
    zi.set_defaults(func=cmd_zeros_import)
    zv = zsub.add_parser("validate", help="sanity-check a cache or text table")
    zv.add_argument("source", nargs="?", default="zeros")
    zv.add_argument("--format", default="plain-text", choices=["plain-text", "paired-text"])
    zv.set_defaults(func=cmd_zeros_validate)

    s = sub.add_parser("scan", help="find y where sigma_T(y) < threshold")
    s.add_argument("--range", nargs=2, metavar=("LO", "HI"))
    s.add_argument("--step", default="1e-7")
    s.add_argument("--T", type=float, default=1e6)
    s.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    s.add_argument("--mode", choices=["fast", "direct"], default="fast")
    s.add_argument("--region", type=float, default=REGION_GAP, help="sub-threshold runs closer than this in y form one candidate (0: 2-step rule only)")
    s.add_argument("--table1", action="store_true", help="[1, 2500], step 1e-7, T = 1e6, threshold -0.95")
    s.add_argument("--zeros", default="zeros")
    s.set_defaults(func=cmd_scan)

    r = sub.add_parser("refine", help="rescan candidates with more zeros")
    r.add_argument("--candidates", help="CSV written by scan")
    r.add_argument("--y")
    r.add_argument("--width", type=float, default=0.0)
    r.add_argument("--T", type=float, default=1e5, help="height the candidate was found at")
    r.add_argument("--T2", type=float, required=True)
    r.add_argument("--step2", default="1e-9")
    r.add_argument("--level", type=float, default=-1.0)
    r.add_argument("--mode", choices=["fast", "direct"], default="fast")
    r.add_argument("--zeros", default="zeros")
    r.set_defaults(func=cmd_refine)

    c = sub.add_parser("certify", help="bound the kernel-weighted mean and emit a JSON report")
    c.add_argument("--omega", required=True)
    c.add_argument("--eps", required=True)
    c.add_argument("--c", type=float, required=True)
    c.add_argument("--H", type=float, required=True)
    c.add_argument("--a", type=float, required=True)
    c.add_argument("--h", type=int, choices=[0, 1], default=1)
    c.add_argument("--T", type=float, help="summation height (default a c / eps)")
    c.add_argument("--sum-override", type=float, help="use this zero-sum value (marked unverified)")
    c.add_argument("--zeros", default="zeros")
    c.set_defaults(func=cmd_certify)

    o = sub.add_parser("oracle", help="explicit formula against the sieve")
    o.add_argument("--x", type=float, nargs="+", default=[1e3, 1e4, 1e5])
    o.add_argument("--T", type=float, default=1e5)
    o.add_argument("--limit", type=int, default=10**6)
    o.add_argument("--zeros", default="zeros")
    o.set_defaults(func=cmd_oracle)

    sc = sub.add_parser("sieve-check", help="check Delta_M > 0 at every prime up to a limit")
    sc.add_argument("--limit", type=float, default=1e7)
    sc.set_defaults(func=cmd_sieve_check)

    mc = sub.add_parser("mertens-constant", help="compute M with a rigorous tail")
    mc.add_argument("--goal", type=float, default=1e-9)
    mc.set_defaults(func=cmd_mertens_constant)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    out = _Out(args.output)
    try:
        code = args.func(args, out)
    except FormatError as e:
        _note(f"error: {e}")
        return e.exit_code
    except MertensError as e:
        _note(f"error: {e}")
        return e.exit_code
    except FileNotFoundError as e:
        _note(f"error: {e}")
        return EXIT_COVERAGE
    out.close()
    return code


if __name__ == "__main__":
    sys.exit(main())
