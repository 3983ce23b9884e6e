"""Hardware cache-miss counters via Linux perf_event_open.

Two generic last-level-cache events are opened per measurement:

* ``l2_misses``: demand reads that *reached* the last-level cache, i.e.
  reads the L2 could not satisfy (LL read accesses).
* ``l3_misses``: reads the last-level cache itself missed (LL read
  misses).

perf's portable event set has no direct "L2 total misses" event, so the
read-only LL mapping above is used; it is the standard approximation
and suffices for directional comparisons.  Anywhere the events cannot
be opened (non-Linux, containers without perf access, unsupported
hardware) the probe degrades to "unavailable" and callers record absent
values instead of failing.
"""

from __future__ import annotations

import ctypes
import os
import platform
import struct

import numpy as np
from numba import njit

__all__ = ["CacheCounters", "counters_available", "self_calibrate"]

# perf_event_open syscall numbers per architecture
_SYSCALL_NR = {
    "x86_64": 298,
    "i386": 336,
    "i686": 336,
    "aarch64": 241,
    "arm64": 241,
    "ppc64le": 319,
    "s390x": 331,
}

_PERF_TYPE_HW_CACHE = 3
_CACHE_LL = 2
_CACHE_OP_READ = 0
_CACHE_RESULT_ACCESS = 0
_CACHE_RESULT_MISS = 1

_L2_CONFIG = _CACHE_LL | (_CACHE_OP_READ << 8) | (_CACHE_RESULT_ACCESS << 16)
_L3_CONFIG = _CACHE_LL | (_CACHE_OP_READ << 8) | (_CACHE_RESULT_MISS << 16)

# perf_event_attr flag bits: disabled | exclude_kernel | exclude_hv
_ATTR_FLAGS = (1 << 0) | (1 << 5) | (1 << 6)
_ATTR_SIZE = 112  # PERF_ATTR_SIZE_VER5; kernels ignore trailing zeros

_IOC_ENABLE = 0x2400
_IOC_DISABLE = 0x2401
_IOC_RESET = 0x2403

_PERF_FLAG_FD_CLOEXEC = 8


def _pack_attr(config: int) -> bytes:
    buf = bytearray(_ATTR_SIZE)
    struct.pack_into(
        "<IIQQQQQ", buf, 0,
        _PERF_TYPE_HW_CACHE, _ATTR_SIZE, config,
        0, 0, 0,  # sample_period, sample_type, read_format
        _ATTR_FLAGS,
    )
    return bytes(buf)


def _open_event(libc, syscall_nr: int, config: int) -> int:
    attr = ctypes.create_string_buffer(_pack_attr(config), _ATTR_SIZE)
    fd = libc.syscall(
        syscall_nr, attr,
        0,   # this process
        -1,  # any cpu
        -1,  # no group
        _PERF_FLAG_FD_CLOEXEC,
    )
    if fd < 0:
        err = ctypes.get_errno()
        raise OSError(err, os.strerror(err) if err else "perf_event_open failed")
    return fd


class CacheCounters:
    """One (l2_misses, l3_misses) measurement window.

    Usage::

        probe = CacheCounters()
        if probe.open():
            probe.start(); work(); probe.stop()
            l2, l3 = probe.read()
            probe.close()

    ``open()`` returns False (never raises) when counters cannot be
    used; the reason is kept in ``error``.
    """

    def __init__(self):
        self._fds: list[int] = []
        self.error: str | None = None

    @property
    def available(self) -> bool:
        return bool(self._fds)

    def open(self) -> bool:
        if self._fds:
            return True
        nr = _SYSCALL_NR.get(platform.machine())
        if platform.system() != "Linux" or nr is None:
            self.error = f"no perf_event_open on {platform.system()}/{platform.machine()}"
            return False
        try:
            libc = ctypes.CDLL(None, use_errno=True)
            for config in (_L2_CONFIG, _L3_CONFIG):
                self._fds.append(_open_event(libc, nr, config))
        except OSError as exc:
            self.error = f"perf_event_open unavailable: {exc}"
            self.close()
            return False
        return True

    def start(self) -> None:
        import fcntl

        for fd in self._fds:
            fcntl.ioctl(fd, _IOC_RESET, 0)
            fcntl.ioctl(fd, _IOC_ENABLE, 0)

    def stop(self) -> None:
        import fcntl

        for fd in self._fds:
            fcntl.ioctl(fd, _IOC_DISABLE, 0)

    def read(self) -> tuple[int, int]:
        if not self._fds:
            raise RuntimeError("counters were never opened")
        counts = [struct.unpack("<Q", os.read(fd, 8))[0] for fd in self._fds]
        return counts[0], counts[1]

    def close(self) -> None:
        for fd in self._fds:
            try:
                os.close(fd)
            except OSError:
                pass
        self._fds = []


def counters_available() -> bool:
    probe = CacheCounters()
    ok = probe.open()
    probe.close()
    return ok


@njit(cache=True)
def _gather_sum(values, order):
    total = 0
    for i in range(order.size):
        total += values[order[i]]
    return total


def self_calibrate(footprint_bytes: int = 64 * 2**20, seed: int = 0):
    """Sanity-check the probe against a known access-pattern contrast.

    Sums the same array twice through an index vector: once in address
    order, once in a random permutation.  Equal instruction mix and
    footprint, so the scattered pass must cost strictly more last-level
    misses on any cached machine.  Returns ``(sequential_l3,
    scattered_l3)`` or None when counters are unavailable.
    """
    n = footprint_bytes // 8
    values = np.ones(n, dtype=np.int64)
    sequential = np.arange(n, dtype=np.int64)
    scattered = np.random.default_rng(seed).permutation(n).astype(np.int64)
    _gather_sum(values, sequential[:16])  # compile outside the window

    results = []
    for order in (sequential, scattered):
        probe = CacheCounters()
        if not probe.open():
            return None
        probe.start()
        _gather_sum(values, order)
        probe.stop()
        _, l3 = probe.read()
        probe.close()
        results.append(l3)
    return results[0], results[1]
