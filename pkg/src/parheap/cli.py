"""Command-line interface: tune, bench, sort, verify.

Human-readable results go to stdout; machine-readable artifacts only to
files (``--json``, ``--out``, ``--meta``, ``--plots``).  Exit codes:
0 success, 1 validation/verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import autotune, bench, report
from .heap import ParHeap
from .layout import (
    HeapParams,
    derive_geometry,
    global_index,
    inter_children_roots,
    intra_children_range,
    is_block_leaf,
    parent_of,
    position_of,
)

DEFAULT_PARAMS = HeapParams(2, 9, 1)  # solid general-purpose layout; tune to fit
FULL_SCALE_N = 8 * 10**7


def _parse_int(text: str) -> int:
    # accept scientific notation for big round numbers ("8e7")
    try:
        return int(text)
    except ValueError:
        value = float(text)
        if value != int(value):
            raise ValueError(f"not an integer: {text!r}")
        return int(value)


def _parse_range(text: str) -> tuple[int, int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return _parse_int(lo), _parse_int(hi)
    v = _parse_int(text)
    return v, v


def _parse_sizes(text: str) -> tuple[int, ...]:
    """Either an explicit comma list or ``lo..hi`` for a log-spaced sweep."""
    if ".." in text:
        lo, hi = (_parse_int(t) for t in text.split("..", 1))
        if lo < 1 or hi < lo:
            raise ValueError(f"bad size range {text!r}")
        sweep = {lo, hi}
        for exp in range(1, 10):
            for point in (10**exp, 3 * 10**exp):
                if lo < point < hi:
                    sweep.add(point)
        return tuple(sorted(sweep))
    sizes = tuple(_parse_int(t) for t in text.split(",") if t.strip())
    if not sizes:
        raise ValueError("no sizes given")
    return sizes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parheap",
        description="Blocked-layout heap: tune the layout, benchmark heapsort, "
        "sort files, verify the structure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tune", help="grid-search layout parameters on this machine")
    p.add_argument("--n", default=None,
                   help=f"workload size (default {FULL_SCALE_N}, the full-scale "
                        "search; pass a smaller value for a quick run)")
    p.add_argument("--depth", default="1..10", help="block_depth range, lo..hi")
    p.add_argument("--intra", default="2..10", help="intra_child_count range, lo..hi")
    p.add_argument("--inter", default="1..2", help="inter_child_count range, lo..hi")
    p.add_argument("--reps", type=int, default=1, help="timed reps per candidate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", metavar="PATH", help="also write the full report as JSON")
    p.add_argument("--fake-clock", metavar="PATH",
                   help="replay trial durations from a JSON table instead of timing "
                        "(entries of {d, a, b, seconds}); n defaults to 1000")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("bench", help="run the heapsort benchmark grid")
    p.add_argument("--sizes", default=None,
                   help="comma list (10,1000,...) or lo..hi log sweep "
                        "(default: 10..1e8 clipped to memory)")
    p.add_argument("--methods", default="parheap:2,9,1,baseline,std")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--counters", choices=("on", "off"), default="off",
                   help="hardware cache-miss counters (Linux perf; degrades "
                        "to absent values if unsupported)")
    p.add_argument("--out", default="bench.csv", help="records CSV path")
    p.add_argument("--meta", default=None,
                   help="metadata JSON path (default: <out>.meta.json)")
    p.add_argument("--plots", metavar="DIR", help="also write SVG plots here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sort", help="sort a file of 32-bit signed integers")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--format", choices=("text", "binary"), default="text",
                   help="text: one integer per line; binary: little-endian int32")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--intra", type=int, default=None)
    p.add_argument("--inter", type=int, default=None)
    p.set_defaults(func=cmd_sort)

    p = sub.add_parser("verify", help="self-check the layout and heap for one configuration")
    p.add_argument("--depth", type=int, default=DEFAULT_PARAMS.block_depth)
    p.add_argument("--intra", type=int, default=DEFAULT_PARAMS.intra_child_count)
    p.add_argument("--inter", type=int, default=DEFAULT_PARAMS.inter_child_count)
    p.add_argument("--n", default="100000")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-fault", action="store_true",
                   help="corrupt the built heap to prove violations are caught")
    p.set_defaults(func=cmd_verify)

    return parser


def _params_or_usage_error(parser, d, a, b) -> HeapParams:
    try:
        return derive_geometry((d, a, b)).params
    except (ValueError, TypeError) as exc:
        parser.error(str(exc))


# ---------------------------------------------------------------- tune


def cmd_tune(args, parser) -> int:
    try:
        d_range = _parse_range(args.depth)
        a_range = _parse_range(args.intra)
        b_range = _parse_range(args.inter)
    except ValueError as exc:
        parser.error(str(exc))
    if args.n is not None:
        n = _parse_int(args.n)
    else:
        n = 1000 if args.fake_clock else FULL_SCALE_N
    try:
        space = autotune.SearchSpace(
            d_range, a_range, b_range, n=n, seed=args.seed,
            reps_per_candidate=args.reps,
        )
    except ValueError as exc:
        parser.error(str(exc))

    clock = None
    if args.fake_clock:
        try:
            clock = _scripted_clock_from_file(args.fake_clock, space)
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1

    try:
        if clock is None:
            tune_report = autotune.search(space)
        else:
            tune_report = autotune.search(space, clock=clock)
    except autotune.TrialFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(autotune.render_table(tune_report))
    d, a, b = tune_report.best
    best_secs = tune_report.entries[tune_report.best]
    print(f"best: depth={d} intra={a} inter={b} ({best_secs:.6g} s)")
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(tune_report.to_json())
            fh.write("\n")
    return 0


def _scripted_clock_from_file(path: str, space: autotune.SearchSpace):
    with open(path) as fh:
        doc = json.load(fh)
    entries = doc["entries"] if isinstance(doc, dict) else doc
    table = {
        HeapParams(e["d"], e["a"], e["b"]): float(e["seconds"]) for e in entries
    }
    ticks: list[float] = []
    for cand in autotune.enumerate_candidates(space):
        if cand not in table:
            raise ValueError(
                f"fake clock table has no entry for (d={cand.block_depth}, "
                f"a={cand.intra_child_count}, b={cand.inter_child_count})"
            )
        for _ in range(space.reps_per_candidate):
            ticks.extend((0.0, table[cand]))
    it = iter(ticks)
    return lambda: next(it)


# ---------------------------------------------------------------- bench


def cmd_bench(args, parser) -> int:
    try:
        methods = bench.parse_method_list(args.methods)
        sizes = _parse_sizes(args.sizes) if args.sizes else bench.default_sizes(methods)
        config = bench.ExperimentConfig(
            sizes=sizes,
            methods=methods,
            reps=args.reps,
            seed=args.seed,
            counters_enabled=args.counters == "on",
        )
    except ValueError as exc:
        parser.error(str(exc))

    try:
        records, summaries = bench.run_experiment(config)
    except bench.VerificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    bench.write_csv(records, args.out)
    meta_path = args.meta if args.meta else f"{args.out}.meta.json"
    counters_active = any(r.l2_misses is not None for r in records)
    bench.write_metadata(meta_path, bench.collect_metadata(config, counters_active))

    header = f"{'method':<20}{'n':>12}{'mean_us':>16}{'min_us':>16}{'std_us':>14}"
    print(header)
    for s in summaries:
        print(
            f"{s.method:<20}{s.n:>12}{s.mean_us:>16.2f}{s.min_us:>16.2f}{s.std_us:>14.2f}"
        )
    print(f"\nrecords: {args.out}\nmetadata: {meta_path}")

    if args.plots:
        import os

        os.makedirs(args.plots, exist_ok=True)
        for metric in report.METRICS:
            series = report.aggregate(records, metric)
            if not series:
                print(f"plots: no data for {metric}, skipped")
                continue
            path = os.path.join(args.plots, f"{metric}.svg")
            report.emit_plot(series, metric, path)
            print(f"plots: {path}")
    return 0


# ----------------------------------------------------------------- sort


def _read_keys(path: str, fmt: str) -> np.ndarray:
    if fmt == "binary":
        with open(path, "rb") as fh:
            raw = fh.read()
        if len(raw) % 4:
            raise ValueError(
                f"{path}: byte length {len(raw)} is not a multiple of 4"
            )
        return np.frombuffer(raw, dtype="<i4").astype(np.int32)
    lo, hi = -(2**31), 2**31 - 1
    keys = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                value = int(text)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not an integer: {text!r}") from None
            if not lo <= value <= hi:
                raise ValueError(f"{path}:{lineno}: {value} outside 32-bit range")
            keys.append(value)
    return np.array(keys, dtype=np.int32)


def _write_keys(path: str, fmt: str, arr: np.ndarray) -> None:
    if fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(arr.astype("<i4").tobytes())
    else:
        with open(path, "w") as fh:
            for v in arr:
                fh.write(f"{v}\n")


def cmd_sort(args, parser) -> int:
    given = (args.depth, args.intra, args.inter)
    if any(v is not None for v in given) and None in given:
        parser.error("--depth, --intra and --inter must be given together")
    if all(v is not None for v in given):
        params = _params_or_usage_error(parser, *given)
    else:
        params = DEFAULT_PARAMS
        print(
            f"note: using default layout {tuple(params)}; "
            "run 'parheap tune' to fit this machine",
            file=sys.stderr,
        )

    try:
        keys = _read_keys(args.input, args.format)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    heap = ParHeap(params, data=keys)
    heap.build()
    heap.sort()
    out = heap.data
    if not np.all(out[1:] >= out[:-1]):
        print("error: internal sort verification failed", file=sys.stderr)
        return 1

    try:
        _write_keys(args.output, args.format, out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"sorted {out.size} keys -> {args.output}")
    return 0


# --------------------------------------------------------------- verify


def _check_partition(geom, n: int) -> list[str]:
    problems = []
    child_seen = np.zeros(n, dtype=np.int8)
    num_supers = -(-n // geom.block_sz)
    for sup in range(num_supers):
        for loc in range(geom.block_sz):
            pos = position_of(sup * geom.block_sz + loc, geom)
            if global_index(pos, geom) >= n:
                break
            if is_block_leaf(pos, geom):
                kids = [root for _, root in inter_children_roots(pos, geom, n)]
            else:
                kids = list(intra_children_range(pos, geom, n))
            for c in kids:
                child_seen[c] += 1
                if parent_of(position_of(c, geom), geom) != pos:
                    problems.append(f"parent_of({c}) does not invert the child map")
    if n > 0 and child_seen[0] != 0:
        problems.append("index 0 appeared as a child")
    orphans = int(np.count_nonzero(child_seen[1:] != 1))
    if orphans:
        problems.append(f"{orphans} indices not covered exactly once")
    return problems


def cmd_verify(args, parser) -> int:
    params = _params_or_usage_error(parser, args.depth, args.intra, args.inter)
    try:
        n = _parse_int(args.n)
        if n < 0:
            raise ValueError(f"n must be >= 0, got {n}")
    except ValueError as exc:
        parser.error(str(exc))
    geom = derive_geometry(params)
    failed = False

    problems = _check_partition(geom, n)
    if problems:
        failed = True
        print(f"FAIL layout partition: {problems[0]}")
    else:
        print(f"ok layout partition ({n} indices)")

    workload = bench.generate_workload(n, args.seed)
    heap = ParHeap(params, data=workload.copy())
    heap.build()
    if args.inject_fault and n >= 2:
        heap.data[0] = np.iinfo(np.int32).min  # dethrone the root
    violations = heap.validate()
    if violations:
        failed = True
        parent, child = violations[0]
        print(
            f"FAIL heap invariant: {len(violations)} violating pairs, "
            f"first (parent={parent}, child={child})"
        )
    else:
        print("ok heap invariant after build")

    sorter = ParHeap(params, data=workload.copy())
    sorter.build()
    sorter.sort()
    if np.array_equal(sorter.data, np.sort(workload)):
        print("ok sort matches reference ordering")
    else:
        failed = True
        print("FAIL sort does not match reference ordering")

    return 1 if failed else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
