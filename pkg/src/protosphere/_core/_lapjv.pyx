# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled dense linear-assignment kernel (shortest augmenting path with
row/column potentials). Mirrors _lapjv_py step for step so both backends
return the same permutation."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def lapjv(cost):
    """Solve the square min-cost assignment for a dense float64 matrix.

    Returns an int64 array mapping row index -> assigned column index.
    """
    cdef double[:, ::1] a = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("cost matrix must be square")

    cdef cnp.ndarray[double, ndim=1] u_arr = np.zeros(n + 1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] v_arr = np.zeros(n + 1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] minv_arr = np.empty(n + 1, dtype=np.float64)
    # match[j]: row matched to column j, 1-based; 0 means free
    cdef cnp.ndarray[cnp.int64_t, ndim=1] match_arr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] way_arr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used_arr = np.zeros(n + 1, dtype=np.uint8)

    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef double[::1] minv = minv_arr
    cdef cnp.int64_t[::1] match = match_arr
    cdef cnp.int64_t[::1] way = way_arr
    cdef cnp.uint8_t[::1] used = used_arr

    cdef Py_ssize_t i, j, j0, j1, i0
    cdef double delta, cur
    cdef double INF = np.inf

    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        for j in range(n + 1):
            minv[j] = INF
            used[j] = 0
        while True:
            used[j0] = 1
            i0 = match[j0]
            delta = INF
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = a[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1

    cdef cnp.ndarray[cnp.int64_t, ndim=1] row_to_col = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        row_to_col[match[j] - 1] = j - 1
    return row_to_col
