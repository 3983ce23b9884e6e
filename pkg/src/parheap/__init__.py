"""Cache-friendly blocked heap with layout autotuning.

The heap's nodes are grouped into contiguous blocks (super-nodes), each
a small complete tree, so sift paths touch far fewer cache lines than a
classic implicit heap.  Three parameters fix the layout; ``tune`` finds
the best triple for a machine by measurement.
"""

from .autotune import (
    SearchSpace,
    TrialFailure,
    TuneReport,
    enumerate_candidates,
    parse_table,
    render_table,
    run_trial,
    search,
)
from .bench import (
    BenchRecord,
    ExperimentConfig,
    MethodSummary,
    VerificationError,
    generate_workload,
    run_experiment,
    write_csv,
)
from .heap import BaselineDaryHeap, ParHeap
from .layout import (
    HeapParams,
    LayoutGeometry,
    NodePos,
    covers_whole_heap,
    derive_geometry,
    global_index,
    inter_children_roots,
    intra_children_range,
    is_block_leaf,
    parent_of,
    position_of,
)
from .report import Series, aggregate, emit_plot, load_records, render_svg

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "HeapParams",
    "LayoutGeometry",
    "NodePos",
    "derive_geometry",
    "global_index",
    "position_of",
    "is_block_leaf",
    "intra_children_range",
    "inter_children_roots",
    "parent_of",
    "covers_whole_heap",
    "ParHeap",
    "BaselineDaryHeap",
    "SearchSpace",
    "TuneReport",
    "TrialFailure",
    "enumerate_candidates",
    "run_trial",
    "search",
    "render_table",
    "parse_table",
    "ExperimentConfig",
    "BenchRecord",
    "MethodSummary",
    "VerificationError",
    "generate_workload",
    "run_experiment",
    "write_csv",
    "Series",
    "aggregate",
    "load_records",
    "render_svg",
    "emit_plot",
]
