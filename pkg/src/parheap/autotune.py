"""Exhaustive grid search over the three layout parameters.

Structure costs nothing to predict here: once a single super-node
covers the whole heap (``block_sz >= n``), larger block depths produce
the identical structure, so per ``(a, b)`` column only the first
whole-heap-covering depth is kept and the rest are pruned before any
timing.  Every surviving candidate is timed by really building and
sorting a workload; one untimed throwaway trial runs first so one-time
costs (JIT compilation, page faults) stay out of the measurements.

The clock is injected, which makes searches replayable: a scripted
clock turns ``search`` into a pure function of its inputs.  Timings are
carried in seconds; the rendered table uses units of 1e7 microseconds
(tens of seconds), which keeps full-scale runs around unity.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bench import generate_workload
from .heap import ParHeap
from .layout import HeapParams, derive_geometry

__all__ = [
    "SearchSpace",
    "TuneReport",
    "TrialFailure",
    "enumerate_candidates",
    "run_trial",
    "search",
    "render_table",
    "parse_table",
]

TABLE_SCALE_US = 1e7  # one table unit = 1e7 microseconds = 10 seconds


class TrialFailure(RuntimeError):
    """A timed trial produced output that is not ascending."""

    def __init__(self, params: HeapParams, message: str):
        super().__init__(f"{tuple(params)}: {message}")
        self.params = params


@dataclass(frozen=True)
class SearchSpace:
    """Inclusive parameter ranges plus the workload they are timed on."""

    d_range: tuple[int, int]
    a_range: tuple[int, int]
    b_range: tuple[int, int]
    n: int
    seed: int = 0
    reps_per_candidate: int = 1

    def __post_init__(self):
        for name, (lo, hi), floor in (
            ("d_range", self.d_range, 1),
            ("a_range", self.a_range, 2),
            ("b_range", self.b_range, 1),
        ):
            if lo > hi:
                raise ValueError(f"{name} is empty: {lo}..{hi}")
            if lo < floor:
                raise ValueError(f"{name} must start at {floor} or above, got {lo}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.reps_per_candidate < 1:
            raise ValueError(f"reps_per_candidate must be >= 1, got {self.reps_per_candidate}")
        # overflow is monotone in (d, a, b): checking the far corner
        # validates the whole grid
        derive_geometry((self.d_range[1], self.a_range[1], self.b_range[1]))


def _partition_candidates(
    space: SearchSpace,
) -> tuple[list[HeapParams], list[HeapParams]]:
    kept: list[HeapParams] = []
    pruned: list[HeapParams] = []
    for b in range(space.b_range[0], space.b_range[1] + 1):
        for a in range(space.a_range[0], space.a_range[1] + 1):
            covering_d = None
            for d in range(space.d_range[0], space.d_range[1] + 1):
                cand = HeapParams(d, a, b)
                if covering_d is not None:
                    pruned.append(cand)
                    continue
                kept.append(cand)
                if derive_geometry(cand).block_sz >= space.n:
                    covering_d = d
    return kept, pruned


def enumerate_candidates(space: SearchSpace) -> list[HeapParams]:
    """Grid candidates that remain after structural pruning."""
    return _partition_candidates(space)[0]


def run_trial(
    params: HeapParams | tuple[int, int, int],
    n: int,
    seed: int,
    clock: Callable[[], float] = time.perf_counter,
) -> float:
    """Build+sort one workload under ``params``; returns elapsed seconds.

    The workload is generated outside the clocked region.  The sorted
    output is checked before the time is accepted; a bad sort raises
    :class:`TrialFailure` rather than recording anything.
    """
    heap = ParHeap(params, data=generate_workload(n, seed))
    t0 = clock()
    heap.build()
    heap.sort()
    t1 = clock()
    out = heap.data
    if not np.all(out[1:] >= out[:-1]):
        raise TrialFailure(heap.params, f"output not ascending for n={n} seed={seed}")
    return t1 - t0


@dataclass(frozen=True)
class TuneReport:
    n: int
    seed: int
    reps_per_candidate: int
    entries: dict[HeapParams, float]
    samples: dict[HeapParams, tuple[float, ...]]
    pruned: tuple[HeapParams, ...]
    best: HeapParams

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "seed": self.seed,
            "reps_per_candidate": self.reps_per_candidate,
            "entries": [
                {
                    "d": p.block_depth,
                    "a": p.intra_child_count,
                    "b": p.inter_child_count,
                    "seconds": secs,
                    "samples": list(self.samples[p]),
                }
                for p, secs in self.entries.items()
            ],
            "pruned": [
                {"d": p.block_depth, "a": p.intra_child_count, "b": p.inter_child_count}
                for p in self.pruned
            ],
            "best": {
                "d": self.best.block_depth,
                "a": self.best.intra_child_count,
                "b": self.best.inter_child_count,
            },
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "TuneReport":
        doc = json.loads(text)
        entries = {}
        samples = {}
        for e in doc["entries"]:
            p = HeapParams(e["d"], e["a"], e["b"])
            entries[p] = float(e["seconds"])
            samples[p] = tuple(float(s) for s in e.get("samples", [e["seconds"]]))
        return cls(
            n=int(doc["n"]),
            seed=int(doc["seed"]),
            reps_per_candidate=int(doc["reps_per_candidate"]),
            entries=entries,
            samples=samples,
            pruned=tuple(HeapParams(e["d"], e["a"], e["b"]) for e in doc["pruned"]),
            best=HeapParams(doc["best"]["d"], doc["best"]["a"], doc["best"]["b"]),
        )


def search(
    space: SearchSpace, clock: Callable[[], float] = time.perf_counter
) -> TuneReport:
    """Time every surviving candidate sequentially and pick the argmin.

    The mean over ``reps_per_candidate`` decides; ties go to the
    lexicographically smallest ``(d, a, b)``.  Raw samples are retained
    in the report.  Trial failures propagate with the offending
    parameters attached.
    """
    kept, pruned = _partition_candidates(space)
    # throwaway warm-up: real work, dummy clock, result discarded
    run_trial(kept[0], space.n, space.seed, clock=lambda: 0.0)

    entries: dict[HeapParams, float] = {}
    samples: dict[HeapParams, tuple[float, ...]] = {}
    for cand in kept:
        vals = tuple(
            run_trial(cand, space.n, space.seed, clock)
            for _ in range(space.reps_per_candidate)
        )
        samples[cand] = vals
        entries[cand] = sum(vals) / len(vals)

    best = min(entries, key=lambda p: (entries[p], p))
    return TuneReport(
        n=space.n,
        seed=space.seed,
        reps_per_candidate=space.reps_per_candidate,
        entries=entries,
        samples=samples,
        pruned=tuple(pruned),
        best=best,
    )


def _cell(seconds: float) -> str:
    return f"{seconds * 1e6 / TABLE_SCALE_US:.2f}"


def render_table(report: TuneReport) -> str:
    """Grid rendering: rows are ``a``, columns ``d``, one band per ``b``.

    Cells are in units of 1e7 microseconds, two decimals; the best cell
    carries a ``*``; pruned cells show ``-``.
    """
    all_params = list(report.entries) + list(report.pruned)
    depths = sorted({p.block_depth for p in all_params})
    intras = sorted({p.intra_child_count for p in all_params})
    inters = sorted({p.inter_child_count for p in all_params})

    width = 8
    label = "intra\\depth"
    lines = []
    for b in inters:
        lines.append(f"inter_child_count = {b}")
        lines.append(label + "".join(f"{d:>{width}}" for d in depths))
        for a in intras:
            row = [f"{a:>{len(label)}}"]
            for d in depths:
                p = HeapParams(d, a, b)
                if p in report.entries:
                    cell = _cell(report.entries[p])
                    if p == report.best:
                        cell = "*" + cell
                else:
                    cell = "-"
                row.append(f"{cell:>{width}}")
            lines.append("".join(row))
        lines.append("")
    return "\n".join(lines)


def parse_table(text: str) -> dict[HeapParams, float]:
    """Read back :func:`render_table` output.

    Returns cell values in the table's own scale (1e7 microseconds);
    ``-`` cells are omitted and the best-marker ``*`` is stripped.
    """
    values: dict[HeapParams, float] = {}
    b = None
    depths: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("inter_child_count"):
            b = int(line.split("=", 1)[1])
            depths = []
            continue
        head = line.split()[0]
        if head.startswith("intra"):
            depths = [int(t) for t in line.split()[1:]]
            continue
        if b is None or not depths:
            raise ValueError(f"unrecognized table line: {raw!r}")
        tokens = line.split()
        a = int(tokens[0])
        cells = tokens[1:]
        if len(cells) != len(depths):
            raise ValueError(f"row for a={a} has {len(cells)} cells, want {len(depths)}")
        for d, cell in zip(depths, cells):
            if cell == "-":
                continue
            values[HeapParams(d, a, b)] = float(cell.lstrip("*"))
    return values
