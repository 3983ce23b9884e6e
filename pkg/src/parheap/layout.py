"""Index arithmetic for the blocked heap layout.

The heap lives in one flat array divided into fixed-size blocks
(super-nodes).  Each super-node is a complete ``intra_child_count``-ary
tree of ``block_depth + 1`` levels stored contiguously, so a node and
its near descendants share cache lines.  Nodes on a super-node's
deepest level (block leaves) have no further room inside the block;
each of them instead parents the roots of ``inter_child_count``
consecutive child super-nodes.

Super-node ``I`` occupies array indices ``[I * block_sz, (I+1) *
block_sz)``; within it, ``local_idx`` 0 is the block root, locals
``[1, sub_block_sz)`` are interior, and locals ``[sub_block_sz,
block_sz)`` are block leaves.  Child super-nodes of super-node ``I``
are the ``block_ch_cnt`` super-nodes ``I * block_ch_cnt + 1 ..
(I+1) * block_ch_cnt``, dealt out ``inter_child_count`` apiece to its
block leaves in order.

With ``block_depth=1, intra_child_count=2, inter_child_count=1`` the
layout degenerates to an ordinary binary heap chunked in threes.

Everything in this module is pure arithmetic over immutable values; no
key data is touched.  Node existence is always decided by comparing a
candidate's global index against the element count ``n`` - there is no
other bookkeeping.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import NamedTuple, Optional

__all__ = [
    "INT64_MAX",
    "HeapParams",
    "NodePos",
    "LayoutGeometry",
    "derive_geometry",
    "global_index",
    "position_of",
    "is_block_leaf",
    "intra_children_range",
    "inter_children_roots",
    "parent_of",
    "covers_whole_heap",
]

INT64_MAX = 2**63 - 1


class HeapParams(NamedTuple):
    """The three tunable layout parameters.

    block_depth: levels below the block root inside one super-node (>= 1).
    intra_child_count: fan-out of nodes inside a super-node (>= 2).
    inter_child_count: child super-nodes hanging off each block leaf (>= 1).
    """

    block_depth: int
    intra_child_count: int
    inter_child_count: int


class NodePos(NamedTuple):
    """A node addressed as (super-node index, index within the super-node)."""

    super_idx: int
    local_idx: int


@dataclass(frozen=True)
class LayoutGeometry:
    """Derived per-block constants for one parameter triple.

    block_sz: nodes per super-node.
    sub_block_sz: non-leaf nodes per super-node.
    block_width: block-leaf nodes per super-node (nodes on the deepest level).
    block_ch_cnt: child super-nodes per super-node.
    """

    params: HeapParams
    block_sz: int
    sub_block_sz: int
    block_width: int
    block_ch_cnt: int

    @property
    def block_depth(self) -> int:
        return self.params.block_depth

    @property
    def intra_child_count(self) -> int:
        return self.params.intra_child_count

    @property
    def inter_child_count(self) -> int:
        return self.params.inter_child_count


def derive_geometry(params: HeapParams | tuple[int, int, int]) -> LayoutGeometry:
    """Validate a parameter triple and compute its block geometry.

    The constants are accumulated level by level: walking one level down
    inside a block multiplies the width by ``intra_child_count``, and the
    sizes are the running sums.  Raises ValueError for out-of-range
    parameters and for triples whose derived quantities would not fit in
    signed 64-bit arithmetic.
    """
    d, a, b = (operator.index(v) for v in params)
    if d < 1:
        raise ValueError(f"block_depth must be >= 1, got {d}")
    if a < 2:
        raise ValueError(f"intra_child_count must be >= 2, got {a}")
    if b < 1:
        raise ValueError(f"inter_child_count must be >= 1, got {b}")
    if a ** (d + 1) > INT64_MAX:
        raise ValueError(
            f"layout ({d}, {a}, {b}) overflows 64-bit indices: "
            f"{a}^{d + 1} > 2^63 - 1"
        )

    sub_block_sz = 0
    block_width = 1
    block_sz = 1
    for _ in range(d):
        sub_block_sz += block_width
        block_width *= a
        block_sz += block_width
    block_ch_cnt = block_width * b
    if block_ch_cnt > INT64_MAX:
        raise ValueError(
            f"layout ({d}, {a}, {b}) overflows 64-bit indices: "
            f"block_ch_cnt {block_ch_cnt} > 2^63 - 1"
        )

    return LayoutGeometry(
        params=HeapParams(d, a, b),
        block_sz=block_sz,
        sub_block_sz=sub_block_sz,
        block_width=block_width,
        block_ch_cnt=block_ch_cnt,
    )


def global_index(pos: NodePos, geom: LayoutGeometry) -> int:
    """Flat array index of a node.  Assumes 0 <= local_idx < block_sz."""
    return pos[0] * geom.block_sz + pos[1]


def position_of(index: int, geom: LayoutGeometry) -> NodePos:
    """Inverse of :func:`global_index`.  Rejects negative indices."""
    index = operator.index(index)
    if index < 0:
        raise ValueError(f"negative index {index}")
    super_idx, local_idx = divmod(index, geom.block_sz)
    return NodePos(super_idx, local_idx)


def is_block_leaf(pos: NodePos, geom: LayoutGeometry) -> bool:
    """True when the node sits on its super-node's deepest level."""
    return pos[1] >= geom.sub_block_sz


def intra_children_range(pos: NodePos, geom: LayoutGeometry, n: int) -> range:
    """Global indices of an internal node's children, clamped to ``n``.

    The children of local ``j`` are locals ``j*a + 1 .. j*a + a`` of the
    same super-node, a contiguous run of array slots.
    """
    if is_block_leaf(pos, geom):
        raise ValueError(f"{tuple(pos)} is a block leaf; it has no intra children")
    start = pos[0] * geom.block_sz + pos[1] * geom.intra_child_count + 1
    return range(start, min(start + geom.intra_child_count, n))


def inter_children_roots(
    pos: NodePos, geom: LayoutGeometry, n: int
) -> list[tuple[int, int]]:
    """(super index, root global index) of a block leaf's child super-nodes.

    Only roots whose global index is below ``n`` are returned; a block
    leaf near the frontier may have fewer than ``inter_child_count``
    children, or none.
    """
    if not is_block_leaf(pos, geom):
        raise ValueError(f"{tuple(pos)} is internal; it has no inter children")
    first = (
        pos[0] * geom.block_ch_cnt
        + 1
        + (pos[1] - geom.sub_block_sz) * geom.inter_child_count
    )
    roots = []
    for child_super in range(first, first + geom.inter_child_count):
        root = child_super * geom.block_sz
        if root >= n:
            break
        roots.append((child_super, root))
    return roots


def parent_of(pos: NodePos, geom: LayoutGeometry) -> Optional[NodePos]:
    """Parent position of a node, or None for the root.

    Inverts both child maps: a non-root local is an intra child of
    ``(local - 1) div a`` in the same super-node; a non-root block root
    is an inter child of some block leaf in the super-node's parent.
    """
    super_idx, local_idx = pos
    if local_idx > 0:
        return NodePos(super_idx, (local_idx - 1) // geom.intra_child_count)
    if super_idx == 0:
        return None
    offset = super_idx - 1
    parent_super, r = divmod(offset, geom.block_ch_cnt)
    return NodePos(
        parent_super, geom.sub_block_sz + r // geom.inter_child_count
    )


def covers_whole_heap(geom: LayoutGeometry, n: int) -> bool:
    """True when a single super-node holds every element.

    In that regime the layout is indistinguishable from a plain
    ``intra_child_count``-ary heap.
    """
    return geom.block_sz >= n
