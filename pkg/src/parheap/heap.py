"""Heap types over the blocked layout, plus a plain d-ary comparison heap.

Both types are array-backed max-heaps by default (``reverse=True``
gives a min-heap) and sort in place: ``build()`` then ``sort()`` leaves
the backing array ascending under the default orientation.  Keys can be
any numpy integer or float dtype; the hot loops live in
:mod:`parheap._kernels`.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from . import _kernels as _k
from .layout import (
    HeapParams,
    LayoutGeometry,
    NodePos,
    derive_geometry,
    global_index,
    inter_children_roots,
    intra_children_range,
    is_block_leaf,
    position_of,
)

__all__ = ["ParHeap", "BaselineDaryHeap"]

_DEFAULT_DTYPE = np.int32
_MIN_CAPACITY = 8


def _as_backing_array(data, dtype) -> np.ndarray:
    arr = np.ascontiguousarray(data, dtype=dtype)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d array of keys, got shape {arr.shape}")
    if arr.dtype.kind not in "iuf":
        raise ValueError(f"unsupported key dtype {arr.dtype}")
    return arr


class ParHeap:
    """A heap stored in the blocked layout described by a parameter triple.

    ``data`` (when given) becomes the backing store without a copy if it
    is already a contiguous array of the right dtype, so build/sort work
    in place on the caller's buffer.  ``push`` may grow (and therefore
    replace) the backing array; ``data`` always exposes the live one.

    ``specialize`` controls whether layouts with ``inter_child_count == 1``
    use the streamlined sift-down (single child-block compare instead of
    a scan loop); it exists so the two code paths can be compared and is
    on by default.
    """

    def __init__(
        self,
        params: HeapParams | tuple[int, int, int] | LayoutGeometry,
        data: Iterable | np.ndarray | None = None,
        *,
        dtype=None,
        reverse: bool = False,
        specialize: bool = True,
    ):
        if isinstance(params, LayoutGeometry):
            self._geom = params
        else:
            self._geom = derive_geometry(params)
        self._reverse = bool(reverse)
        if data is None:
            self._buf = np.empty(0, dtype=dtype if dtype is not None else _DEFAULT_DTYPE)
            self._n = 0
        else:
            self._buf = _as_backing_array(data, dtype)
            self._n = self._buf.size
        g = self._geom
        self._use_inter1 = bool(specialize) and g.inter_child_count == 1
        # geometry scalars handed to the kernels
        self._gargs = (g.block_sz, g.sub_block_sz, g.intra_child_count,
                       g.inter_child_count, g.block_ch_cnt)

    # ------------------------------------------------------------ basics

    @property
    def params(self) -> HeapParams:
        return self._geom.params

    @property
    def geometry(self) -> LayoutGeometry:
        return self._geom

    @property
    def reverse(self) -> bool:
        return self._reverse

    @property
    def data(self) -> np.ndarray:
        """View of the live keys (the first ``len(self)`` backing slots)."""
        return self._buf[: self._n]

    def __len__(self) -> int:
        return self._n

    def __repr__(self) -> str:
        d, a, b = self._geom.params
        return f"{type(self).__name__}(({d}, {a}, {b}), n={self._n}, dtype={self._buf.dtype})"

    # -------------------------------------------------------- operations

    def _sift_down(self, n, sup, loc):
        bs, sub, intra, inter, bch = self._gargs
        if self._use_inter1:
            _k.sift_down_inter1(self._buf, n, sup, loc, bs, sub, intra, bch, self._reverse)
        else:
            _k.sift_down_general(self._buf, n, sup, loc, bs, sub, intra, inter, bch, self._reverse)

    def sift_down(self, pos: NodePos | tuple[int, int]) -> None:
        """Restore the invariant at ``pos``, assuming both subtrees hold it."""
        pos = NodePos(*pos)
        if not 0 <= global_index(pos, self._geom) < self._n:
            raise IndexError(f"{tuple(pos)} is outside the heap (n={self._n})")
        self._sift_down(self._n, pos.super_idx, pos.local_idx)

    def build(self) -> None:
        """Establish the heap invariant over the whole array (Floyd order:
        sift every index from the back forward)."""
        bs, sub, intra, inter, bch = self._gargs
        _k.build(self._buf, self._n, bs, sub, intra, inter, bch,
                 self._reverse, self._use_inter1)

    def sort(self) -> None:
        """In-place heapsort by repeated root extraction.

        Requires the invariant (call ``build()`` first).  Ascending under
        the default orientation, descending with ``reverse=True``.  The
        logical length is unchanged, but the contents are no longer a
        heap afterwards.
        """
        bs, sub, intra, inter, bch = self._gargs
        _k.heapsort(self._buf, self._n, bs, sub, intra, inter, bch,
                    self._reverse, self._use_inter1)

    def push(self, key) -> None:
        """Insert ``key``: append past the end, then bubble it up its
        parent chain while it beats the parent (ties stop)."""
        if self._n == self._buf.size:
            self._grow(self._n + 1)
        self._buf[self._n] = key
        self._n += 1
        bs, sub, intra, inter, bch = self._gargs
        _k.sift_up(self._buf, self._n - 1, bs, sub, intra, inter, bch, self._reverse)

    def pop(self):
        """Remove and return the top key (max by default)."""
        if self._n == 0:
            raise IndexError("pop from an empty heap")
        top = self._buf[0]
        last = self._n - 1
        self._buf[0] = self._buf[last]
        self._buf[last] = top
        self._n = last
        if last > 1:
            self._sift_down(last, 0, 0)
        return top

    def peek(self):
        if self._n == 0:
            raise IndexError("peek at an empty heap")
        return self._buf[0]

    def validate(self) -> list[tuple[int, int]]:
        """Check every parent/child pair via the layout child maps.

        Returns the violating ``(parent_index, child_index)`` pairs in
        scan order; empty exactly when the heap invariant holds.
        """
        g = self._geom
        n = self._n
        data = self._buf
        reverse = self._reverse
        bad = []
        for i in range(n):
            pos = position_of(i, g)
            if is_block_leaf(pos, g):
                kids = (root for _, root in inter_children_roots(pos, g, n))
            else:
                kids = intra_children_range(pos, g, n)
            for c in kids:
                worse = data[c] < data[i] if reverse else data[c] > data[i]
                if worse:
                    bad.append((i, c))
        return bad

    def _grow(self, need: int) -> None:
        new_cap = max(_MIN_CAPACITY, 2 * self._buf.size, need)
        new_buf = np.empty(new_cap, dtype=self._buf.dtype)
        new_buf[: self._n] = self._buf[: self._n]
        self._buf = new_buf


class BaselineDaryHeap:
    """Plain implicit d-ary heap (children of ``i`` at ``i*d + 1 ..``),
    the comparison baseline for the blocked layout."""

    def __init__(
        self,
        arity: int,
        data: Iterable | np.ndarray | None = None,
        *,
        dtype=None,
        reverse: bool = False,
    ):
        arity = int(arity)
        if arity < 2:
            raise ValueError(f"arity must be >= 2, got {arity}")
        self._arity = arity
        self._reverse = bool(reverse)
        if data is None:
            self._buf = np.empty(0, dtype=dtype if dtype is not None else _DEFAULT_DTYPE)
        else:
            self._buf = _as_backing_array(data, dtype)
        self._n = self._buf.size

    @property
    def arity(self) -> int:
        return self._arity

    @property
    def data(self) -> np.ndarray:
        return self._buf[: self._n]

    def __len__(self) -> int:
        return self._n

    def __repr__(self) -> str:
        return f"{type(self).__name__}(arity={self._arity}, n={self._n}, dtype={self._buf.dtype})"

    def build(self) -> None:
        _k.baseline_build(self._buf, self._n, self._arity, self._reverse)

    def sort(self) -> None:
        _k.baseline_heapsort(self._buf, self._n, self._arity, self._reverse)

    def pop(self):
        if self._n == 0:
            raise IndexError("pop from an empty heap")
        top = self._buf[0]
        last = self._n - 1
        self._buf[0] = self._buf[last]
        self._buf[last] = top
        self._n = last
        if last > 1:
            _k.baseline_sift_down(self._buf, last, 0, self._arity, self._reverse)
        return top

    def peek(self):
        if self._n == 0:
            raise IndexError("peek at an empty heap")
        return self._buf[0]
