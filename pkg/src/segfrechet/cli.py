"""Command line front end.

    segfrechet build-index traj.csv traj.fqi
    segfrechet query traj.csv --kind frechet --u 0:0.5 --v end --q 0,4,0 --json
    segfrechet oracle-check traj.csv --trials 100 --seed 7
    segfrechet bench traj.csv --queries 200 --report out/

Exit status: 0 success, 1 verification failure, 2 usage or input error.
Set ``FQ_LOG=DEBUG`` to see decision traces on stderr.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .breakdown import FrechetBreakdown
from .geometry import HorizontalSegment, Trajectory, TrajectoryPos
from .rangeindex import MAGIC, RangeIndex

log = logging.getLogger("segfrechet")

SCHEMA = "fq-1"


class UsageError(Exception):
    """Bad arguments or unreadable input; exit status 2."""


# -- input ---------------------------------------------------------------------

def parse_trajectory(path) -> Trajectory:
    """Read ``x,y`` lines; ``#`` starts a comment, an ``x,y`` header is allowed."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"{path}: cannot read trajectory: {exc}") from None
    pts = []
    seen_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if not seen_data and [f.lower() for f in fields] == ["x", "y"]:
            seen_data = True
            continue
        seen_data = True
        if len(fields) != 2:
            raise UsageError(f"{path}:{lineno}: expected 'x,y', got {raw.strip()!r}")
        try:
            x, y = float(fields[0]), float(fields[1])
        except ValueError:
            raise UsageError(f"{path}:{lineno}: not a number pair: {raw.strip()!r}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise UsageError(f"{path}:{lineno}: non-finite value: {raw.strip()!r}")
        pts.append((x, y))
    if not pts:
        raise UsageError(f"{path}: no vertices")
    return Trajectory(pts)


def load_source(path, index_mode: Optional[str] = None, exhaustive: bool = False) -> RangeIndex:
    """A CSV trajectory (indexed now) or a saved index file."""
    p = Path(path)
    try:
        with open(p, "rb") as fh:
            head = fh.read(4)
    except OSError as exc:
        raise UsageError(f"{path}: {exc}") from None
    if head == MAGIC:
        try:
            idx = RangeIndex.load(p)
        except ValueError as exc:
            raise UsageError(f"{path}: {exc}") from None
        return idx.with_options(mode=index_mode, exhaustive_cross=exhaustive or None)
    return RangeIndex(parse_trajectory(p), mode=index_mode or "fast", exhaustive_cross=exhaustive)


def parse_position(traj: Trajectory, text: str) -> TrajectoryPos:
    text = text.strip()
    if text == "start":
        return traj.start()
    if text == "end":
        return traj.end()
    try:
        if text.startswith("t="):
            return traj.pos_at_arclength(float(text[2:]))
        edge, frac = text.split(":")
        return traj.pos(int(edge), float(frac))
    except ValueError as exc:
        raise UsageError(f"bad position {text!r}: {exc}") from None


def _floats(text: str, count: int, name: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        vals = []
    if len(vals) != count or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"--{name} expects {count} comma-separated numbers, got {text!r}")
    return vals


# -- output ------------------------------------------------------------------

def _num(x: float) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if s == "-0":
        s = "0"
    return s


def dumps(obj) -> str:
    """JSON with sorted keys and floats at 17 significant digits."""
    import json

    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, float, np.integer, np.floating)):
        return _num(obj.item() if hasattr(obj, "item") else obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{dumps(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _label(lab):
    return lab if isinstance(lab, str) else int(lab)


def breakdown_json(bd: FrechetBreakdown) -> dict:
    return {
        "value": bd.value,
        "attaining": sorted(t.value for t in bd.attaining),
        "witnesses": {
            t.value: {
                "value": tv.value,
                "labels": [_label(x) for x in tv.labels],
                "points": [[p.x, p.y] for p in tv.points],
            }
            for t, tv in bd.terms.items()
        },
    }


def _emit(args, payload: dict, text_lines: Sequence[str]) -> None:
    if args.json:
        sys.stdout.write(dumps(payload) + "\n")
    else:
        for line in text_lines:
            print(line)


# -- commands ------------------------------------------------------------------

def cmd_build_index(args) -> int:
    traj = parse_trajectory(args.input)
    t0 = time.perf_counter()
    idx = RangeIndex(traj, mode=args.index_mode, envelope_cap=args.envelope_cap)
    built = time.perf_counter() - t0
    idx.save(args.output)
    log.info("built index for %d vertices in %.3fs", traj.n, built)
    payload = {"schema": SCHEMA, "command": "build-index", "n": traj.n, "nodes": len(idx.nodes),
               "output": str(args.output)}
    if not args.no_timing:
        payload["wall_time_s"] = built
    _emit(args, payload, [f"wrote {args.output}: {traj.n} vertices, {len(idx.nodes)} nodes"])
    return 0


def cmd_query(args) -> int:
    from .query import frechet_query
    from .translation import optimize_placement, optimize_vertical

    idx = load_source(args.input, args.index_mode, args.exhaustive_cross)
    traj = idx.trajectory
    u = parse_position(traj, args.u)
    v = parse_position(traj, args.v)
    if u > v:
        raise UsageError(f"--u {args.u} lies after --v {args.v}")
    payload = {"schema": SCHEMA, "kind": args.kind, "mode": args.mode, "index_mode": idx.mode,
               "u": [u.edge, u.fraction], "v": [v.edge, v.fraction]}
    t0 = time.perf_counter()
    if args.kind == "frechet":
        if args.q is None:
            raise UsageError("--kind frechet needs --q x0,x1,y")
        x0, x1, y = _floats(args.q, 3, "q")
        if x0 > x1:
            raise UsageError("--q needs x0 <= x1")
        res = frechet_query(idx, u, v, HorizontalSegment(x0, x1, y), args.mode)
        bd, trace = res, res.trace
        payload["segment"] = [x0, x1, y]
        if res.split is not None:
            payload["split"] = {"p_prime": list(res.split.p_prime), "q_prime": list(res.split.q_prime)}
        lines = [f"distance {_num(res.value)}"]
    elif args.kind == "vertical":
        if args.strip is None:
            raise UsageError("--kind vertical needs --strip x1,x2")
        x1, x2 = _floats(args.strip, 2, "strip")
        if x1 > x2:
            raise UsageError("--strip needs x1 <= x2")
        res = optimize_vertical(idx, u, v, x1, x2, method=args.method, mode=args.mode)
        bd, trace = res.breakdown, res.trace
        payload.update(y=res.y, segment=[x1, x2, res.y])
        lines = [f"y {_num(res.y)}", f"distance {_num(res.value)}"]
    else:
        if args.L is None:
            raise UsageError("--kind place needs --L length")
        if not (math.isfinite(args.L) and args.L >= 0):
            raise UsageError("--L must be a non-negative number")
        res = optimize_placement(idx, u, v, args.L, method=args.method, mode=args.mode)
        bd, trace = res.breakdown, res.trace
        payload.update(x1=res.x1, y=res.y, L=args.L, segment=[res.x1, res.x1 + args.L, res.y])
        lines = [f"x1 {_num(res.x1)}", f"y {_num(res.y)}", f"distance {_num(res.value)}"]
    elapsed = time.perf_counter() - t0
    for step in trace:
        log.debug("trace %s", step)
    out = breakdown_json(bd)
    out["value"] = res.value
    payload.update(out)
    payload["trace_length"] = len(trace)
    if not args.no_timing:
        payload["wall_time_s"] = elapsed
    lines.append("attaining " + " ".join(payload["attaining"]))
    _emit(args, payload, lines)
    return 0


def cmd_oracle_check(args) -> int:
    from .checks import oracle_check

    idx = load_source(args.input, "fast", args.exhaustive_cross)
    t0 = time.perf_counter()
    summary = oracle_check(idx, trials=args.trials, seed=args.seed)
    elapsed = time.perf_counter() - t0
    if args.report:
        from .report import write_oracle_report

        write_oracle_report(summary, args.report)
    payload = {"schema": SCHEMA, "command": "oracle-check", "trials": args.trials, "seed": args.seed,
               "checks": summary.counts(), "failures": summary.failures[:20],
               "max_error": summary.max_errors(), "ok": summary.ok}
    if not args.no_timing:
        payload["wall_time_s"] = elapsed
    lines = [f"{name}: {n} checked, {bad} failed" for name, (n, bad) in sorted(summary.counts().items())]
    lines += [f"FAIL {f}" for f in summary.failures[:20]]
    lines.append("ok" if summary.ok else "verification failed")
    _emit(args, payload, lines)
    return 0 if summary.ok else 1


def cmd_bench(args) -> int:
    from .checks import benchmark

    sources = []
    if args.input:
        sources.append(("input", parse_trajectory(args.input)))
    for n in args.sizes or ():
        rng = np.random.default_rng(args.seed + n)
        sources.append((f"walk{n}", Trajectory(rng.normal(size=(n, 2)).cumsum(axis=0).tolist())))
    if not sources:
        raise UsageError("bench needs an input trajectory or --sizes")
    rows = [benchmark(name, traj, queries=args.queries, seed=args.seed, mode=args.mode)
            for name, traj in sources]
    if args.report:
        from .report import write_bench_report

        write_bench_report(rows, args.report)
    payload = {"schema": SCHEMA, "command": "bench", "rows": rows}
    lines = [f"{r['name']}: n={r['n']} build {r['build_s']:.3f}s, "
             f"query mean {1e3 * r['query_mean_s']:.3f}ms over {r['queries']}" for r in rows]
    _emit(args, payload, lines)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="segfrechet", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, json_default=False):
        p.add_argument("--json", action="store_true", default=json_default, help="emit JSON")
        p.add_argument("--no-timing", action="store_true", help="omit wall-clock fields")

    p = sub.add_parser("build-index", help="build and save a range index")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--index-mode", choices=("fast", "brute"), default="fast")
    p.add_argument("--envelope-cap", type=int, default=32)
    common(p)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("query", help="run one query")
    p.add_argument("input", help="trajectory CSV or saved index")
    p.add_argument("--kind", choices=("frechet", "vertical", "place"), required=True)
    p.add_argument("--u", default="start", help="edge:fraction, start, end or t=<arclength fraction>")
    p.add_argument("--v", default="end")
    p.add_argument("--q", help="x0,x1,y for --kind frechet")
    p.add_argument("--strip", help="x1,x2 for --kind vertical")
    p.add_argument("--L", type=float, help="segment length for --kind place")
    p.add_argument("--mode", choices=("exact", "bisect"), default="exact")
    p.add_argument("--index-mode", choices=("fast", "brute"), default=None)
    p.add_argument("--method", choices=("formula", "query"), default="formula",
                   help="evaluation route inside the optimisers")
    p.add_argument("--exhaustive-cross", action="store_true")
    common(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("oracle-check", help="compare the engine with the reference oracles")
    p.add_argument("input")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exhaustive-cross", action="store_true")
    p.add_argument("--report", help="directory for CSV and figure output")
    common(p)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("bench", help="time index build and queries")
    p.add_argument("input", nargs="?")
    p.add_argument("--queries", type=int, default=100)
    p.add_argument("--sizes", type=int, nargs="*", help="also bench random walks of these sizes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("exact", "bisect"), default="exact")
    p.add_argument("--report", help="directory for CSV and figure output")
    common(p)
    p.set_defaults(func=cmd_bench)
    return ap


def _setup_logging() -> None:
    level = os.environ.get("FQ_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def run(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"segfrechet: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError) as exc:
        print(f"segfrechet: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
