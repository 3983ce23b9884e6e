"""JIT-compiled hot loops shared by the heap types.

All kernels take the block geometry as plain int64 scalars and operate
in place on a 1-d numpy array; numba specializes them per key dtype.
``reverse`` flips every key comparison so the same code serves min
ordering.  Comparisons are strict, so an incumbent (parent, or an
earlier child) keeps its place on ties and equal-key arrays are never
permuted.
"""

from __future__ import annotations

from numba import njit

__all__ = [
    "sift_down_general",
    "sift_down_inter1",
    "sift_up",
    "build",
    "heapsort",
    "baseline_sift_down",
    "baseline_build",
    "baseline_heapsort",
]


@njit(inline="always")
def _beats(x, y, reverse):
    if reverse:
        return x < y
    return x > y


@njit(cache=True)
def sift_down_general(data, n, sup, loc, block_sz, sub_block_sz, intra, inter, block_ch, reverse):
    while True:
        index = sup * block_sz + loc
        if loc >= sub_block_sz:
            # block leaf: candidates are the roots of the child super-nodes
            child_sup = sup * block_ch + 1 + (loc - sub_block_sz) * inter
            start = child_sup * block_sz
            end = min(start + inter * block_sz, n)
            best = data[index]
            best_sup = sup
            it = child_sup
            while start < end:
                if _beats(data[start], best, reverse):
                    best = data[start]
                    best_sup = it
                start += block_sz
                it += 1
            if best_sup == sup:
                return
            root = best_sup * block_sz
            data[root], data[index] = data[index], data[root]
            sup = best_sup
            loc = 0
        else:
            # internal node: children are a contiguous run inside the block
            start = sup * block_sz + loc * intra + 1
            end = min(start + intra, n)
            best = data[index]
            best_index = index
            while start < end:
                if _beats(data[start], best, reverse):
                    best = data[start]
                    best_index = start
                start += 1
            if best_index == index:
                return
            data[best_index], data[index] = data[index], data[best_index]
            loc = best_index - sup * block_sz


@njit(cache=True)
def sift_down_inter1(data, n, sup, loc, block_sz, sub_block_sz, intra, block_ch, reverse):
    # inter_child_count == 1: a block leaf has exactly one candidate child
    # block, so the scan loop collapses to a single compare.
    while True:
        index = sup * block_sz + loc
        if loc >= sub_block_sz:
            child_sup = sup * block_ch + 1 + (loc - sub_block_sz)
            start = child_sup * block_sz
            if start < n and _beats(data[start], data[index], reverse):
                data[start], data[index] = data[index], data[start]
                sup = child_sup
                loc = 0
            else:
                return
        else:
            start = sup * block_sz + loc * intra + 1
            end = min(start + intra, n)
            best = data[index]
            best_index = index
            while start < end:
                if _beats(data[start], best, reverse):
                    best = data[start]
                    best_index = start
                start += 1
            if best_index == index:
                return
            data[best_index], data[index] = data[index], data[best_index]
            loc = best_index - sup * block_sz


@njit(cache=True)
def sift_up(data, index, block_sz, sub_block_sz, intra, inter, block_ch, reverse):
    while index > 0:
        sup, loc = divmod(index, block_sz)
        if loc > 0:
            parent = sup * block_sz + (loc - 1) // intra
        else:
            psup, r = divmod(sup - 1, block_ch)
            parent = psup * block_sz + sub_block_sz + r // inter
        if _beats(data[index], data[parent], reverse):
            data[parent], data[index] = data[index], data[parent]
            index = parent
        else:
            return


@njit(cache=True)
def build(data, n, block_sz, sub_block_sz, intra, inter, block_ch, reverse, use_inter1):
    for i in range(n - 1, -1, -1):
        sup, loc = divmod(i, block_sz)
        if use_inter1:
            sift_down_inter1(data, n, sup, loc, block_sz, sub_block_sz, intra, block_ch, reverse)
        else:
            sift_down_general(data, n, sup, loc, block_sz, sub_block_sz, intra, inter, block_ch, reverse)


@njit(cache=True)
def heapsort(data, n, block_sz, sub_block_sz, intra, inter, block_ch, reverse, use_inter1):
    m = n
    while m > 1:
        data[0], data[m - 1] = data[m - 1], data[0]
        m -= 1
        if use_inter1:
            sift_down_inter1(data, m, 0, 0, block_sz, sub_block_sz, intra, block_ch, reverse)
        else:
            sift_down_general(data, m, 0, 0, block_sz, sub_block_sz, intra, inter, block_ch, reverse)


@njit(cache=True)
def baseline_sift_down(data, n, i, arity, reverse):
    while True:
        start = i * arity + 1
        end = min(start + arity, n)
        best = data[i]
        best_index = i
        j = start
        while j < end:
            if _beats(data[j], best, reverse):
                best = data[j]
                best_index = j
            j += 1
        if best_index == i:
            return
        data[best_index], data[i] = data[i], data[best_index]
        i = best_index


@njit(cache=True)
def baseline_build(data, n, arity, reverse):
    for i in range(n - 1, -1, -1):
        baseline_sift_down(data, n, i, arity, reverse)


@njit(cache=True)
def baseline_heapsort(data, n, arity, reverse):
    m = n
    while m > 1:
        data[0], data[m - 1] = data[m - 1], data[0]
        m -= 1
        baseline_sift_down(data, m, 0, arity, reverse)
