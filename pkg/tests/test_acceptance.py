"""Acceptance suite: one test per numbered criterion, one verdict line each.

Run with `python3 -m pytest tests/test_acceptance.py -v -s` to see the
verdict lines; plain `-v` shows the same outcome per test name.
"""

import random
import time
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from parheap.autotune import (
    SearchSpace,
    enumerate_candidates,
    parse_table,
    render_table,
    run_trial,
    search,
)
from parheap.bench import (
    BenchRecord,
    ExperimentConfig,
    generate_workload,
    run_experiment,
    write_csv,
)
from parheap.heap import BaselineDaryHeap, ParHeap
from parheap.layout import (
    HeapParams,
    derive_geometry,
    global_index,
    inter_children_roots,
    intra_children_range,
    is_block_leaf,
    parent_of,
    position_of,
)
from parheap.perf_counters import counters_available, self_calibrate
from parheap.report import Series, aggregate, load_records, render_svg

from helpers import scripted_clock


def _verdict(num, failures, note=""):
    status = "PASS" if not failures else "FAIL"
    tail = f" ({note})" if note else ""
    print(f"\n[criterion {num:02d}] {status}{tail}")
    assert not failures, failures[:5]


GRID_36 = tuple(
    HeapParams(d, a, b) for d in (1, 2, 3) for a in (2, 3, 5, 9) for b in (1, 2, 3)
)


def covering_depth(a, n):
    d, block = 1, 1 + a
    while block < n:
        d += 1
        block += a**d
    return d


# --------------------------------------------------------------- criterion 1


def test_criterion_01_sort_matches_oracle_across_layout_grid():
    t0 = time.monotonic()
    rng = np.random.default_rng(1)
    sizes = [0, 1, 2, 3, 4095, 4096]
    sizes += list(rng.integers(4, 4095, size=200 - len(sizes)))
    arrays = []
    for k, n in enumerate(sizes):
        if k % 3 == 0:  # duplicate-heavy inputs stress tie handling
            arrays.append(rng.integers(0, 8, size=n, dtype=np.int32))
        else:
            arrays.append(rng.integers(-(2**31), 2**31, size=n, dtype=np.int32))
    failures = []
    for params in GRID_36:
        for arr in arrays:
            got = arr.copy()
            heap = ParHeap(params, got)
            heap.build()
            heap.sort()
            if not np.array_equal(got, np.sort(arr)):
                failures.append((tuple(params), arr.size))
    elapsed = time.monotonic() - t0
    if elapsed >= 120.0:
        failures.append(f"took {elapsed:.1f}s, budget 120s")
    _verdict(1, failures, f"{len(GRID_36)} layouts x {len(arrays)} arrays, {elapsed:.1f}s")


# --------------------------------------------------------------- criterion 2


def test_criterion_02_invariant_holds_after_every_mutation():
    rng = random.Random(2)
    triples = set()
    while len(triples) < 10:
        triples.add((rng.randint(1, 3), rng.randint(2, 10), rng.randint(1, 3)))
    failures = []
    for params in sorted(triples):
        heap = ParHeap(params, [rng.randint(-(2**31), 2**31 - 1) for _ in range(64)])
        heap.build()
        if heap.validate():
            failures.append((params, "build"))
        for op in range(10_000):
            size = heap.data.size
            if size == 0 or (size < 64 and rng.random() < 0.5):
                heap.push(rng.randint(-(2**31), 2**31 - 1))
            else:
                heap.pop()
            if heap.validate():
                failures.append((params, f"op {op}"))
                break
    _verdict(2, failures, "10 layouts x 10000 ops, checked after each op")


# --------------------------------------------------------------- criterion 3


def test_criterion_03_layout_is_a_bijective_partition():
    n = 100_000
    failures = []
    sample = random.Random(3).sample(range(1, n), 2000)
    for params in GRID_36:
        geom = derive_geometry(params)
        seen = np.zeros(n, dtype=np.int8)
        for i in range(n):
            pos = position_of(i, geom)
            if global_index(pos, geom) != i:
                failures.append((tuple(params), "round trip", i))
                break
            if is_block_leaf(pos, geom):
                for _, root in inter_children_roots(pos, geom, n):
                    seen[root] += 1
            else:
                for child in intra_children_range(pos, geom, n):
                    seen[child] += 1
        if seen[0] != 0 or not (seen[1:] == 1).all():
            failures.append((tuple(params), "partition"))
        for i in sample:
            parent = parent_of(position_of(i, geom), geom)
            if is_block_leaf(parent, geom):
                ok = i in [r for _, r in inter_children_roots(parent, geom, n)]
            else:
                ok = i in intra_children_range(parent, geom, n)
            if not ok:
                failures.append((tuple(params), "parent link", i))
                break
    _verdict(3, failures, f"n={n}, {len(GRID_36)} layouts")


# --------------------------------------------------------------- criterion 4


def test_criterion_04_covering_block_equals_plain_dary_heap():
    rng = np.random.default_rng(4)
    failures = []
    for a in (2, 3, 9):
        depth = covering_depth(a, 256)
        params = HeapParams(depth, a, 1)
        for _ in range(100):
            n = int(rng.integers(0, 257))
            values = rng.integers(-(2**31), 2**31, size=n, dtype=np.int32)
            ours = ParHeap(params, values.copy())
            ref = BaselineDaryHeap(a, values.copy())
            ours.build()
            ref.build()
            if not np.array_equal(ours.data, ref.data):
                failures.append((a, n, "build"))
                continue
            for k in range(n):
                if int(ours.pop()) != int(ref.pop()) or not np.array_equal(
                    ours.data, ref.data
                ):
                    failures.append((a, n, f"pop {k}"))
                    break
    _verdict(4, failures, "a in {2,3,9}, 100 inputs each, bit-exact")


# --------------------------------------------------------------- criterion 5


def test_criterion_05_geometry_matches_closed_forms():
    failures = []
    for d in range(1, 13):
        for a in range(2, 13):
            for b in range(1, 5):
                geom = derive_geometry((d, a, b))
                sub = (a**d - 1) // (a - 1)
                width = a**d
                if (
                    geom.sub_block_sz != sub
                    or geom.block_width != width
                    or geom.block_sz != sub + width
                    or geom.block_ch_cnt != width * b
                ):
                    failures.append((d, a, b))
    if derive_geometry((2, 9, 1)).block_sz != 91:
        failures.append("block_sz(2,9) != 91")
    for b in range(1, 5):
        if derive_geometry((2, 2, b)).block_sz != 7:
            failures.append(f"block_sz(2,2) != 7 at b={b}")
    _verdict(5, failures, "d 1..12, a 2..12, b 1..4 plus spot values")


# --------------------------------------------------------------- criterion 6

# Recorded single-block-child timing grid (seconds / 10), rows a=2..10,
# columns d=1..10. Replayed through the search instead of timing live.
TIMING_GRID_B1 = {
    2: (5.58, 3.34, 2.67, 2.39, 2.3, 2.38, 2.56, 2.87, 3.29, 3.7),
    3: (3.55, 2.23, 1.98, 1.92, 2.26, 2.61, 2.92, 2.96, 3.13, 3.35),
    4: (2.92, 1.91, 1.81, 2.06, 2.39, 2.6, 2.68, 2.87, 3.08, 3.2),
    5: (2.58, 1.84, 1.79, 2.11, 2.39, 2.38, 2.58, 2.74, 2.82, 2.77),
    6: (2.38, 1.73, 1.84, 2.16, 2.19, 2.36, 2.54, 2.62, 2.57, 2.26),
    7: (2.28, 1.69, 1.81, 2.18, 2.15, 2.35, 2.46, 2.5, 2.21, 2.13),
    8: (2.18, 1.66, 1.85, 2.13, 2.16, 2.36, 2.47, 2.37, 2.09, 2.08),
    9: (2.1, 1.63, 1.92, 2.01, 2.15, 2.31, 2.35, 2.05, 1.99, 1.98),
    10: (2.08, 1.64, 1.95, 1.97, 2.16, 2.3, 2.27, 1.96, 1.98, 2.01),
}


def test_criterion_06_replaying_recorded_timings_selects_best_layout():
    space = SearchSpace((1, 10), (2, 10), (1, 1), n=1000)
    candidates = enumerate_candidates(space)
    durations = [
        TIMING_GRID_B1[p.intra_child_count][p.block_depth - 1] * 10.0
        for p in candidates
    ]
    report = search(space, clock=scripted_clock(durations))
    failures = []
    if report.best != HeapParams(2, 9, 1):
        failures.append(f"best {report.best}")
    if report.entries[report.best] != 1.63 * 10.0:
        failures.append(f"seconds {report.entries[report.best]!r}")
    table = render_table(report)
    if "*1.63" not in table:
        failures.append("rendered cell is not *1.63")
    parsed = parse_table(table)
    cell = parsed[HeapParams(2, 9, 1)]
    if f"{cell:.2f}" != "1.63":
        failures.append(f"parsed cell {cell!r}")
    _verdict(6, failures, "best depth=2 intra=9 inter=1 at 1.63")


# --------------------------------------------------------------- criterion 7


def test_criterion_07_single_child_fast_path_matches_general_path():
    rng = np.random.default_rng(7)
    param_cycle = [
        HeapParams(1, 2, 1),
        HeapParams(2, 3, 1),
        HeapParams(3, 2, 1),
        HeapParams(2, 9, 1),
        HeapParams(1, 7, 1),
    ]
    failures = []
    for k in range(1000):
        params = param_cycle[k % len(param_cycle)]
        n = int(rng.integers(0, 513))
        values = rng.integers(-(2**31), 2**31, size=n, dtype=np.int32)
        fast = ParHeap(params, values.copy(), specialize=True)
        general = ParHeap(params, values.copy(), specialize=False)
        fast.build()
        general.build()
        if not np.array_equal(fast.data, general.data):
            failures.append((tuple(params), n, "build"))
            continue
        fast.sort()
        general.sort()
        if not np.array_equal(fast.data, general.data):
            failures.append((tuple(params), n, "sort"))
    _verdict(7, failures, "1000 inputs, build and sort states bit-exact")


# --------------------------------------------------------------- criterion 8


def test_criterion_08_tuned_layout_not_slower_than_binary_heapsort():
    # Informative performance smoke: report-only on slow hosts, not a
    # build break. Candidate set kept small so this stays a few minutes.
    n = 20_000_000
    candidates = [HeapParams(d, a, 1) for d in (1, 2) for a in (2, 5, 9)]
    run_trial(candidates[0], n, seed=8)  # untimed warm-up
    times = {p: run_trial(p, n, seed=8) for p in candidates}
    best = min(sorted(times), key=times.get)
    d, a, b = best
    config = ExperimentConfig(
        sizes=(n,), methods=(f"parheap:{d},{a},{b}", "baseline_binary"),
        reps=2, seed=8,
    )
    _, summaries = run_experiment(config)
    tuned = next(s for s in summaries if s.method.startswith("parheap"))
    base = next(s for s in summaries if s.method == "baseline_binary")
    ratio = tuned.mean_us / base.mean_us
    ok = ratio <= 1.0
    _verdict(
        8,
        [] if ok else [f"ratio {ratio:.3f}"],
        f"n={n}, tuned {tuned.method} vs binary, ratio {ratio:.3f}",
    )
    if not ok:
        pytest.xfail(f"informative criterion: tuned/binary ratio {ratio:.3f} > 1.0")


# --------------------------------------------------------------- criterion 9


def test_criterion_09_cache_counter_sanity():
    if not counters_available():
        print("\n[criterion 09] SKIP (hardware cache counters unavailable)")
        pytest.skip("hardware cache counters unavailable on this host")
    failures = []
    calibration = self_calibrate()
    if calibration is None:
        failures.append("self_calibrate returned None with counters available")
    else:
        seq, scattered = calibration
        if not scattered > seq:
            failures.append(f"scattered {scattered} <= sequential {seq}")
    config = ExperimentConfig(
        sizes=(20_000_000,), methods=("parheap:2,9,1", "baseline_binary"),
        reps=2, seed=9, counters_enabled=True,
    )
    _, summaries = run_experiment(config)
    tuned = next(s for s in summaries if s.method.startswith("parheap"))
    base = next(s for s in summaries if s.method == "baseline_binary")
    if tuned.mean_l3 is None or base.mean_l3 is None:
        failures.append("counter fields missing")
    elif not tuned.mean_l3 < base.mean_l3:
        failures.append(f"l3 tuned {tuned.mean_l3} >= binary {base.mean_l3}")
    _verdict(9, failures, "calibration plus tuned-vs-binary traffic")


# -------------------------------------------------------------- criterion 10


def test_criterion_10_artifacts_round_trip(tmp_path):
    records = [
        BenchRecord("parheap:2,9,1", 10, 0, 5, 12.5, 100, 7),
        BenchRecord("parheap:2,9,1", 100, 0, 6, 0.1 + 0.2, 900, 60),
        BenchRecord("baseline_binary", 10, 0, 5, 20.0, None, None),
        BenchRecord("baseline_binary", 100, 0, 6, 150.25, None, None),
    ]
    failures = []
    path = tmp_path / "round.csv"
    write_csv(records, path)
    if load_records(path) != records:
        failures.append("CSV round trip changed records")
    series = aggregate(records, "elapsed_us")
    svg = render_svg(series, "elapsed_us")
    if render_svg(series, "elapsed_us") != svg:
        failures.append("SVG not deterministic")
    try:
        root = ET.fromstring(svg)
    except ET.ParseError as exc:
        failures.append(f"SVG not well-formed: {exc}")
    else:
        polylines = root.findall(".//{http://www.w3.org/2000/svg}polyline")
        if len(polylines) != 2:
            failures.append(f"{len(polylines)} polylines, expected 2")
    l3 = aggregate(records, "l3_misses")
    if [s.method for s in l3] != ["parheap:2,9,1"]:
        failures.append("counter series should skip methods without counters")
    single = [Series("solo", "elapsed_us", ((10, 1.0),))]
    try:
        ET.fromstring(render_svg(single, "elapsed_us"))
    except ET.ParseError as exc:
        failures.append(f"single-point SVG: {exc}")
    _verdict(10, failures, "CSV lossless, SVG deterministic and well-formed")
