"""Allocator tuning for large transient arrays.

Attention buffers are tens of MB and reallocated every step; glibc serves
those via mmap/munmap, so each step pays the page-fault cost again. Raising
the mmap and trim thresholds keeps big blocks on the heap free list. No-op
off glibc.
"""

import ctypes

_M_TRIM_THRESHOLD = -1
_M_MMAP_THRESHOLD = -3


def tune_allocator():
    try:
        libc = ctypes.CDLL("libc.so.6", use_errno=True)
        libc.mallopt(_M_MMAP_THRESHOLD, 1 << 30)
        libc.mallopt(_M_TRIM_THRESHOLD, 1 << 30)
    except (OSError, AttributeError):
        pass
