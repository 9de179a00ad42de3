# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled graph kernels.  Same contracts as mapkit._pykernels."""

import numpy as np
from libc.stdlib cimport qsort


cdef int _cmp_ll(const void *a, const void *b) noexcept nogil:
    cdef long long x = (<const long long *>a)[0]
    cdef long long y = (<const long long *>b)[0]
    return (x > y) - (x < y)


def box(const int[::1] indptr, const int[::1] indices, const unsigned char[::1] truth):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out = np.ones(n, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    cdef Py_ssize_t u, k
    with nogil:
        for u in range(n):
            for k in range(indptr[u], indptr[u + 1]):
                if not truth[indices[k]]:
                    o[u] = 0
                    break
    return out


def reach(const int[::1] indptr, const int[::1] indices, const unsigned char[::1] seeds):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out = np.zeros(n, dtype=np.uint8)
    stack_arr = np.empty(max(n, 1), dtype=np.intp)
    cdef unsigned char[::1] seen = out
    cdef Py_ssize_t[::1] stack = stack_arr
    cdef Py_ssize_t top = 0, u, v, k
    with nogil:
        for u in range(n):
            if seeds[u]:
                seen[u] = 1
                stack[top] = u
                top += 1
        while top > 0:
            top -= 1
            u = stack[top]
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if not seen[v]:
                    seen[v] = 1
                    stack[top] = v
                    top += 1
    return out


cdef int _sigcmp(const long long[::1] sig, const Py_ssize_t[::1] ptr,
                 Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    cdef Py_ssize_t i = ptr[a], j = ptr[b]
    cdef Py_ssize_t ie = ptr[a + 1], je = ptr[b + 1]
    while i < ie and j < je:
        if sig[i] != sig[j]:
            return -1 if sig[i] < sig[j] else 1
        i += 1
        j += 1
    if i < ie:
        return 1
    if j < je:
        return -1
    return 0


cdef void _renumber(int[::1] block, int[::1] scratch, Py_ssize_t n) noexcept nogil:
    # scratch[b] holds the new id of old block b, or -1
    cdef Py_ssize_t u
    cdef int nxt = 0
    for u in range(n):
        scratch[u] = -1
    for u in range(n):
        if scratch[block[u]] < 0:
            scratch[block[u]] = nxt
            nxt += 1
        block[u] = scratch[block[u]]


def refine(const int[::1] init, const int[::1] indptr, const int[::1] indices,
           const int[::1] labels):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t m = indices.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int32)

    # initial ids may be arbitrary ints: compress them first
    _, first = np.unique(np.asarray(init), return_inverse=True)
    out = first.astype(np.int32)
    cdef int[::1] block = out
    cdef int[::1] scratch = np.empty(n, dtype=np.int32)
    cdef int[::1] new = np.empty(n, dtype=np.int32)
    cdef long long[::1] sig = np.empty(n + m, dtype=np.int64)
    cdef Py_ssize_t[::1] ptr = np.empty(n + 1, dtype=np.intp)
    cdef Py_ssize_t[::1] order = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] tmp = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t u, k, pos, start, w, r, width, lo, mid, hi, i, j, t
    cdef int count, nid
    cdef long long nn = n

    with nogil:
        _renumber(block, scratch, n)
        count = 0
        for u in range(n):
            if block[u] + 1 > count:
                count = block[u] + 1
        while True:
            pos = 0
            for u in range(n):
                ptr[u] = pos
                sig[pos] = block[u]
                pos += 1
                start = pos
                for k in range(indptr[u], indptr[u + 1]):
                    sig[pos] = <long long>labels[k] * nn + block[indices[k]]
                    pos += 1
                if pos - start > 1:
                    qsort(&sig[start], pos - start, sizeof(long long), _cmp_ll)
                    w = start + 1
                    for r in range(start + 1, pos):
                        if sig[r] != sig[w - 1]:
                            sig[w] = sig[r]
                            w += 1
                    pos = w
            ptr[n] = pos

            # bottom-up merge sort of node ids by signature
            for u in range(n):
                order[u] = u
            width = 1
            while width < n:
                lo = 0
                while lo < n:
                    mid = lo + width
                    if mid > n:
                        mid = n
                    hi = lo + 2 * width
                    if hi > n:
                        hi = n
                    i = lo
                    j = mid
                    t = lo
                    while i < mid and j < hi:
                        if _sigcmp(sig, ptr, order[j], order[i]) < 0:
                            tmp[t] = order[j]
                            j += 1
                        else:
                            tmp[t] = order[i]
                            i += 1
                        t += 1
                    while i < mid:
                        tmp[t] = order[i]
                        i += 1
                        t += 1
                    while j < hi:
                        tmp[t] = order[j]
                        j += 1
                        t += 1
                    lo = hi
                for u in range(n):
                    order[u] = tmp[u]
                width *= 2

            nid = 0
            new[order[0]] = 0
            for r in range(1, n):
                if _sigcmp(sig, ptr, order[r - 1], order[r]) != 0:
                    nid += 1
                new[order[r]] = nid
            for u in range(n):
                block[u] = new[u]
            if nid + 1 == count:
                break
            count = nid + 1
        _renumber(block, scratch, n)
    return out
