# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise-tally kernel for linear-order ballots."""

from cython.parallel import prange
from libc.stdlib cimport calloc, free

cimport openmp


def accumulate_linear32(int[:, ::1] orders, int[::1] mults, long[:, ::1] out):
    """Weighted pairwise accumulation; total multiplicity must fit int32.

    orders[v, i] is the candidate index at rank i of ballot v; for every
    i < j the pair (orders[v,i], orders[v,j]) gains mults[v].
    """
    cdef Py_ssize_t nv = orders.shape[0]
    cdef Py_ssize_t nc = orders.shape[1]
    cdef Py_ssize_t v, i, j
    cdef int nthreads = 2
    cdef int tid
    cdef int m
    cdef int *buf
    cdef int *row
    cdef const int *o

    if nv == 0 or nc < 2:
        return

    buf = <int *> calloc(nthreads * nc * nc, sizeof(int))
    if buf == NULL:
        raise MemoryError()
    try:
        for v in prange(nv, nogil=True, num_threads=nthreads, schedule="static"):
            tid = openmp.omp_get_thread_num()
            m = mults[v]
            o = &orders[v, 0]
            for i in range(nc):
                row = buf + (<Py_ssize_t> tid) * nc * nc + (<Py_ssize_t> o[i]) * nc
                for j in range(i + 1, nc):
                    row[o[j]] += m
        for tid in range(nthreads):
            row = buf + (<Py_ssize_t> tid) * nc * nc
            for i in range(nc):
                for j in range(nc):
                    out[i, j] += row[i * nc + j]
    finally:
        free(buf)


def accumulate_linear64(long[:, ::1] orders, long[::1] mults, long[:, ::1] out):
    """Weighted pairwise accumulation with 64-bit counters."""
    cdef Py_ssize_t nv = orders.shape[0]
    cdef Py_ssize_t nc = orders.shape[1]
    cdef Py_ssize_t v, i, j
    cdef long m
    cdef long *row0
    cdef const long *o

    if nv == 0 or nc < 2:
        return
    for v in range(nv):
        m = mults[v]
        o = &orders[v, 0]
        for i in range(nc):
            row0 = &out[o[i], 0]
            for j in range(i + 1, nc):
                row0[o[j]] += m
