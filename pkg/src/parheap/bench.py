"""Heapsort benchmark harness.

Each trial generates a fresh workload of uniform 32-bit signed keys,
times build+sort only (generation, buffer prep, and verification sit
outside the clock), checks the output is ascending, and records one
:class:`BenchRecord`.  Workload seeds derive deterministically from
``(base seed, n, rep)``, so every method sorts identical arrays and a
CSV row is enough to reproduce its input.

Methods:

* ``parheap:d,a,b``  - blocked-layout heap with that parameter triple
* ``baseline_binary`` - the plain binary heap (alias: ``baseline``)
* ``std``            - the interpreter's own heap (heapq) on a list

One trial runs at a time; counters, when enabled and supported, wrap
the same build+sort region as the clock.
"""

from __future__ import annotations

import csv
import heapq
import json
import os
import platform
import statistics
import sys
import time
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .heap import BaselineDaryHeap, ParHeap
from .layout import HeapParams, derive_geometry
from .perf_counters import CacheCounters

__all__ = [
    "CSV_FIELDS",
    "BenchRecord",
    "ExperimentConfig",
    "MethodSummary",
    "generate_workload",
    "derive_seed",
    "parse_method",
    "parse_method_list",
    "run_experiment",
    "write_csv",
    "collect_metadata",
    "default_sizes",
]

CSV_FIELDS = ("method", "n", "rep", "seed", "elapsed_us", "l2_misses", "l3_misses")

_WARMUP_N = 1024


def generate_workload(n: int, seed: int) -> np.ndarray:
    """Uniform int32 keys over the full signed range (numpy PCG64 stream)."""
    if n < 0:
        raise ValueError(f"workload size must be >= 0, got {n}")
    rng = np.random.default_rng(seed)
    return rng.integers(-(2**31), 2**31, size=n, dtype=np.int32)


def derive_seed(base_seed: int, n: int, rep: int) -> int:
    """Per-trial workload seed; a pure function of (base, n, rep).

    All three components must be non-negative (SeedSequence entropy).
    """
    ss = np.random.SeedSequence([int(base_seed), int(n), int(rep)])
    return int(ss.generate_state(1, np.uint64)[0])


def parse_method(spec: str) -> str:
    """Normalize one method spec to its canonical id, validating it."""
    spec = spec.strip()
    if spec in ("baseline", "baseline_binary"):
        return "baseline_binary"
    if spec == "std":
        return "std"
    if spec.startswith("parheap:"):
        body = spec[len("parheap:"):]
        parts = body.split(",")
        if len(parts) != 3:
            raise ValueError(f"parheap method needs three parameters, got {spec!r}")
        try:
            d, a, b = (int(p) for p in parts)
        except ValueError:
            raise ValueError(f"non-integer parameter in {spec!r}") from None
        derive_geometry((d, a, b))  # reject invalid triples early
        return f"parheap:{d},{a},{b}"
    raise ValueError(f"unknown method {spec!r}")


def parse_method_list(text: str) -> tuple[str, ...]:
    """Split a comma-separated method list, gluing parheap parameter
    triples back together (``parheap:2,9,1,baseline`` is two methods)."""
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    specs = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.startswith("parheap:"):
            need = 3 - len(tok[len("parheap:"):].split(","))
            glue = tokens[i + 1 : i + 1 + need]
            if len(glue) != need or not all(t.lstrip("-").isdigit() for t in glue):
                raise ValueError(f"incomplete parheap method near {tok!r}")
            tok = ",".join([tok, *glue])
            i += need
        specs.append(parse_method(tok))
        i += 1
    if not specs:
        raise ValueError("no methods given")
    return tuple(specs)


@dataclass(frozen=True)
class ExperimentConfig:
    sizes: tuple[int, ...]
    methods: tuple[str, ...]
    reps: int = 10
    seed: int = 0
    counters_enabled: bool = False

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("sizes must be non-empty")
        if any(int(n) < 1 for n in self.sizes):
            raise ValueError(f"sizes must be >= 1, got {self.sizes}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if not self.methods:
            raise ValueError("methods must be non-empty")
        canonical = tuple(parse_method(m) for m in self.methods)
        if len(set(canonical)) != len(canonical):
            raise ValueError(f"duplicate methods in {self.methods}")
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "methods", canonical)


@dataclass(frozen=True)
class BenchRecord:
    method: str
    n: int
    rep: int
    seed: int
    elapsed_us: float
    l2_misses: Optional[int] = None
    l3_misses: Optional[int] = None


@dataclass(frozen=True)
class MethodSummary:
    method: str
    n: int
    mean_us: float
    min_us: float
    std_us: float
    mean_l2: Optional[float] = None
    mean_l3: Optional[float] = None


class VerificationError(RuntimeError):
    pass


def _is_ascending(seq) -> bool:
    if isinstance(seq, np.ndarray):
        return bool(np.all(seq[1:] >= seq[:-1]))
    return all(seq[i] <= seq[i + 1] for i in range(len(seq) - 1))


def _make_runner(method: str):
    """(prepare, execute) pair; only execute runs inside the clock."""
    if method.startswith("parheap:"):
        params = HeapParams(*(int(p) for p in method.split(":")[1].split(",")))

        def prepare(workload):
            return ParHeap(params, data=workload)

        def execute(heap):
            heap.build()
            heap.sort()
            return heap.data

    elif method == "baseline_binary":

        def prepare(workload):
            return BaselineDaryHeap(2, data=workload)

        def execute(heap):
            heap.build()
            heap.sort()
            return heap.data

    elif method == "std":

        def prepare(workload):
            return workload.tolist()

        def execute(lst):
            heapq.heapify(lst)
            return [heapq.heappop(lst) for _ in range(len(lst))]

    else:
        raise ValueError(f"unknown method {method!r}")
    return prepare, execute


def run_experiment(
    config: ExperimentConfig,
    clock: Callable[[], float] = time.perf_counter,
    probe_factory: Optional[Callable[[], object]] = None,
) -> tuple[list[BenchRecord], list[MethodSummary]]:
    """Run the full (method x size x rep) grid sequentially.

    Returns the per-trial records plus per-(method, n) summaries.  A
    trial whose output is not ascending aborts the experiment with a
    :class:`VerificationError` naming the trial; nothing is recorded
    for it.
    """
    if probe_factory is None and config.counters_enabled:
        probe_factory = CacheCounters
    counters_warned = False

    records: list[BenchRecord] = []
    for method in config.methods:
        prepare, execute = _make_runner(method)
        # untimed warm-up so JIT compilation never lands in a timed region
        execute(prepare(generate_workload(_WARMUP_N, config.seed)))

        for n in config.sizes:
            for rep in range(config.reps):
                seed = derive_seed(config.seed, n, rep)
                state = prepare(generate_workload(n, seed))

                probe = None
                if config.counters_enabled and probe_factory is not None:
                    candidate = probe_factory()
                    if candidate.open():
                        probe = candidate
                    elif not counters_warned:
                        warnings.warn(
                            f"cache counters unavailable ({getattr(candidate, 'error', None)}); "
                            "recording absent values",
                            RuntimeWarning,
                            stacklevel=2,
                        )
                        counters_warned = True

                l2 = l3 = None
                if probe is not None:
                    probe.start()
                t0 = clock()
                out = execute(state)
                t1 = clock()
                if probe is not None:
                    probe.stop()
                    l2, l3 = probe.read()
                    probe.close()

                if not _is_ascending(out):
                    raise VerificationError(
                        f"output not ascending: method={method} n={n} rep={rep}"
                    )
                records.append(
                    BenchRecord(method, n, rep, seed, (t1 - t0) * 1e6, l2, l3)
                )

    summaries = []
    for method in config.methods:
        for n in config.sizes:
            group = [r for r in records if r.method == method and r.n == n]
            times = [r.elapsed_us for r in group]
            l2s = [r.l2_misses for r in group if r.l2_misses is not None]
            l3s = [r.l3_misses for r in group if r.l3_misses is not None]
            summaries.append(
                MethodSummary(
                    method=method,
                    n=n,
                    mean_us=sum(times) / len(times),
                    min_us=min(times),
                    std_us=statistics.pstdev(times),
                    mean_l2=sum(l2s) / len(l2s) if l2s else None,
                    mean_l3=sum(l3s) / len(l3s) if l3s else None,
                )
            )
    return records, summaries


def write_csv(records: list[BenchRecord], path) -> None:
    """One row per record; counter fields are left empty when absent.
    Floats are written in repr form so a reload is lossless."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for r in records:
            writer.writerow(
                [
                    r.method,
                    r.n,
                    r.rep,
                    r.seed,
                    repr(r.elapsed_us),
                    "" if r.l2_misses is None else r.l2_misses,
                    "" if r.l3_misses is None else r.l3_misses,
                ]
            )


def _read_first_match(path: str, key: str) -> Optional[str]:
    try:
        with open(path) as fh:
            for line in fh:
                if line.lower().startswith(key):
                    return line.split(":", 1)[1].strip()
    except OSError:
        return None
    return None


def _cache_sizes() -> dict:
    sizes = {}
    base = "/sys/devices/system/cpu/cpu0/cache"
    try:
        for entry in sorted(os.listdir(base)):
            if not entry.startswith("index"):
                continue
            d = os.path.join(base, entry)
            try:
                with open(os.path.join(d, "level")) as fh:
                    level = fh.read().strip()
                with open(os.path.join(d, "type")) as fh:
                    kind = fh.read().strip()
                with open(os.path.join(d, "size")) as fh:
                    size = fh.read().strip()
            except OSError:
                continue
            suffix = "i" if kind == "Instruction" else ("d" if kind == "Data" else "")
            sizes[f"L{level}{suffix}"] = size
    except OSError:
        pass
    return sizes


def collect_metadata(config: ExperimentConfig, counters_active: bool) -> dict:
    """Host and build facts stored alongside every CSV."""
    import numba

    return {
        "cpu_model": _read_first_match("/proc/cpuinfo", "model name"),
        "cache_sizes": _cache_sizes(),
        "arch": platform.machine(),
        "os": platform.platform(),
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "numba": numba.__version__,
        "build_profile": "numba-jit, untimed warm-up before timed reps",
        "timer": "time.perf_counter",
        "counter_region": "build+sort (same region as the timer)",
        "counters_requested": config.counters_enabled,
        "counters_active": counters_active,
        "workload": "uniform int32 over the full signed range, PCG64",
        "config": {
            "sizes": list(config.sizes),
            "methods": list(config.methods),
            "reps": config.reps,
            "seed": config.seed,
        },
    }


def write_metadata(path, metadata: dict) -> None:
    with open(path, "w") as fh:
        json.dump(metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _available_memory_bytes() -> Optional[int]:
    try:
        return os.sysconf("SC_AVPHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):
        return None


def default_sizes(methods: tuple[str, ...] = ()) -> tuple[int, ...]:
    """Log-spaced sweep 10 .. 1e8, clipped to sizes the host can hold.

    The per-element budget is pessimistic (workload + heap + sorted
    output; far larger when the list-based ``std`` method is included).
    """
    sweep = []
    for exp in range(1, 8):
        sweep.extend([10**exp, 3 * 10**exp])
    sweep.append(10**8)
    avail = _available_memory_bytes()
    if avail is None:
        return tuple(sweep)
    per_elem = 48 if "std" in methods else 16
    limit = (avail // 2) // per_elem
    clipped = tuple(n for n in sweep if n <= limit)
    return clipped if clipped else (sweep[0],)
