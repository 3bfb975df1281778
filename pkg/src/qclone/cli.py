"""Command line entry point.

Exit codes: 0 ok, 1 verification failure, 2 usage error, 3 file I/O failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, channels, checks, cloner, symmetry, tradeoff
from .report import RunManifest, boundary_rows, fmt, format_csv, format_svg, utc_timestamp
from .tradeoff import MeritKind

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
D_RANGE = (2, 8)


class UsageError(Exception):
    pass


def _check_d(d: int) -> int:
    lo, hi = D_RANGE
    if not lo <= d <= hi:
        raise UsageError(f"--d must lie in [{lo}, {hi}], got {d}")
    return d


def _merit(text: str) -> MeritKind:
    try:
        return MeritKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _out_paths(out: str, fmt_choice: str) -> dict[str, Path]:
    base = Path(out)
    if base.suffix in (".csv", ".svg"):
        base = base.with_suffix("")
    kinds = ("csv", "svg") if fmt_choice == "both" else (fmt_choice,)
    return {k: base.with_name(base.name + "." + k) for k in kinds}


def _write(path: Path, text: str):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _manifest(args, command: str, d: int, merit: MeritKind, samples: int) -> RunManifest:
    return RunManifest(command, d, merit, samples, args.seed, args.timestamp or utc_timestamp())


# ---- commands ----

def cmd_boundary(args) -> int:
    d = _check_d(args.d)
    if args.n < 2:
        raise UsageError(f"--n must be >= 2, got {args.n}")
    if args.format != "csv" and not args.out:
        raise UsageError("svg output needs --out")
    rows = boundary_rows(args.merit, d, args.n)
    manifest = _manifest(args, "boundary", d, args.merit, args.n)
    csv_text = format_csv(manifest, rows)
    if not args.out:
        sys.stdout.write(csv_text)
        return EXIT_OK
    for kind, path in _out_paths(args.out, args.format).items():
        text = csv_text if kind == "csv" else format_svg(manifest, args.merit, d, rows)
        _write(path, text)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    d_list = list(args.d or [2, 3])
    if args.level == "deep":
        d_list += [d for d in (4, 5) if d not in d_list]
    for d in d_list:
        _check_d(d)
    print(f"# qclone {__version__} verify level={args.level} d={','.join(map(str, d_list))} "
          f"seed={args.seed}")
    lines = []

    def emit(res: checks.CheckResult):
        lines.append(res.line())
        print(res.line(), flush=True)

    results = checks.run_checks(d_list, args.level, args.seed, args.tol_override, emit)
    failed = [r for r in results if not r.passed]
    status = "pass" if not failed else "fail"
    summary = f"summary checks={len(results)} failed={len(failed)} status={status}"
    print(summary)
    for r in failed:
        print(f"FAILED {r.name} at d={r.d}: residual {r.residual:.3e} exceeds tolerance {r.tol:.1e}")
    if args.out:
        manifest = _manifest(args, "verify", d_list[0], MeritKind.F, len(results))
        _write(Path(args.out), f"# {manifest.line()}\n" + "\n".join(lines + [summary]) + "\n")
    return EXIT_OK if not failed else EXIT_FAIL


def optimal_report(ch: cloner.CloneChannel) -> list[str]:
    d = ch.d
    a = cloner.perm_coeffs(ch)
    s = symmetry.a_to_s(a)
    f1, f2 = cloner.marginal_fidelities(ch)
    lines = [f"d={d}", f"alpha1={fmt(ch.alpha1)}", f"alpha2={fmt(ch.alpha2)}"]
    lines += [f"a{i + 1}={fmt(c.real)}" for i, c in enumerate(a.coeffs)]
    names = ("s_plus", "s_minus", "s0", "s1", "s2", "s3")
    lines += [f"{n}={fmt(v)}" for n, v in zip(names, s.as_tuple())]
    lines += [f"F1={fmt(f1)}", f"F2={fmt(f2)}"]
    top = d * d / (d * d - 1)
    for kind in MeritKind:
        m1, m2 = (tradeoff.merit_of_depolarizing(kind, min(x, top), d) for x in ch.alpha_sq)
        lines.append(f"merit_{kind.label}={fmt(m1)},{fmt(m2)}")
    report = symmetry.feasibility(a)
    lines += [f"slack_{k}={fmt(v)}" for k, v in report.slacks.items()]
    lines.append(f"feasible={'true' if report.feasible else 'false'}")
    return lines


def cmd_optimal(args) -> int:
    d = _check_d(args.d)
    try:
        if args.alpha1 is not None:
            ch = cloner.from_alpha1(args.alpha1, d)
        else:
            ch = cloner.from_target_f1(args.target_f1, d)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lines = optimal_report(ch)
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        manifest = _manifest(args, "optimal", d, MeritKind.F, 1)
        _write(Path(args.out), f"# {manifest.line()}\n{text}")
    return EXIT_OK


def twirl_report(d: int, samples: int, seed: int) -> tuple[list[tuple[int, float]], float]:
    rng = np.random.default_rng(seed)
    ch = channels.random_channel(d, rng=rng)
    marks = checks.log_checkpoints(samples)
    dists = checks.twirl_distances(ch, marks, rng)
    usable = [(n, x) for n, x in dists if n >= 10]
    slope = float("nan")
    if len(usable) >= 2:
        n, x = np.array(usable).T
        slope = float(np.polyfit(np.log(n), np.log(x), 1)[0])
    return dists, slope


def cmd_twirl(args) -> int:
    d = _check_d(args.d)
    if args.samples < 1:
        raise UsageError(f"--samples must be >= 1, got {args.samples}")
    dists, slope = twirl_report(d, args.samples, args.seed)
    print(f"# twirl d={d} samples={args.samples} seed={args.seed}")
    for n, x in dists:
        print(f"samples={n} distance={fmt(x)}")
    print(f"loglog_slope={'nan' if math.isnan(slope) else fmt(slope)}")
    if args.out:
        manifest = _manifest(args, "twirl", d, MeritKind.F, args.samples)
        body = "samples,distance\n" + "".join(f"{n},{fmt(x)}\n" for n, x in dists)
        _write(Path(args.out), f"# {manifest.line()}\n{body}")
    return EXIT_OK


# ---- parser ----

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--out", default=None, help="output path or prefix")
    common.add_argument("--format", choices=("csv", "svg", "both"), default="csv")
    common.add_argument("--timestamp", default=None,
                        help="manifest timestamp override (default: now, or SOURCE_DATE_EPOCH)")

    p = argparse.ArgumentParser(prog="qclone", description="Universal asymmetric 1->2 cloning toolkit.")
    p.add_argument("--version", action="version", version=f"qclone {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("boundary", parents=[common], help="sample the tradeoff region")
    b.add_argument("--d", type=int, default=2, help="dimension, 2..8")
    b.add_argument("--merit", type=_merit, default=MeritKind.F, help="F, one, two, inf or diamond")
    b.add_argument("--n", type=int, default=201, help="boundary points (>= 2)")
    b.set_defaults(func=cmd_boundary)

    v = sub.add_parser("verify", parents=[common], help="run the invariant checks")
    v.add_argument("--d", type=int, nargs="+", default=None, help="dimensions (default 2 3)")
    v.add_argument("--level", choices=("quick", "deep"), default="quick")
    v.add_argument("--tol-override", type=float, default=None,
                   help="replace every tolerance (e.g. 0 to force failures)")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("optimal", parents=[common], help="print the optimal cloner")
    o.add_argument("--d", type=int, default=2)
    g = o.add_mutually_exclusive_group(required=True)
    g.add_argument("--alpha1", type=float)
    g.add_argument("--target-f1", type=float)
    o.set_defaults(func=cmd_optimal)

    t = sub.add_parser("twirl", parents=[common], help="Monte Carlo twirl convergence")
    t.add_argument("--d", type=int, default=2)
    t.add_argument("--samples", type=int, default=5000)
    t.set_defaults(func=cmd_twirl)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qclone {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qclone {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
