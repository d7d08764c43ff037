# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled cellular-automaton kernel; must match ``_kernel_py`` bit for bit."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int32_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t M1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t M2 = 0x94D049BB133111EBULL
cdef double U53 = 1.0 / 9007199254740992.0

cdef int DR[8]
cdef int DC[8]
DR[:] = [-1, -1, -1, 0, 0, 1, 1, 1]
DC[:] = [-1, 0, 1, -1, 1, -1, 0, 1]


cdef inline uint64_t mix64(uint64_t x) nogil:
    cdef uint64_t z = x + GOLDEN
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


cdef inline double uniform(uint64_t key, uint64_t t, uint64_t cell, uint64_t slot,
                           uint64_t n_cells) nogil:
    cdef uint64_t c = (t * n_cells + cell) * 9 + slot
    return <double>(mix64(key ^ mix64(c)) >> 11) * U53


def propagate(int32_t[:, ::1] fire_period, cnp.uint8_t[:, ::1] fuel, double[:, ::1] base_q,
              double[:, ::1] wind, ign_p, uint64_t key, int t_start, int t_end):
    cdef Py_ssize_t rows = fire_period.shape[0]
    cdef Py_ssize_t cols = fire_period.shape[1]
    cdef uint64_t n_cells = rows * cols
    cdef double[:, ::1] ign
    cdef bint has_ign = ign_p is not None
    if has_ign:
        ign = ign_p
    cdef int t, s
    cdef Py_ssize_t r, c, sr, sc
    cdef int32_t f
    cdef double q
    cdef bint lit
    with nogil:
        for t in range(t_start, t_end + 1):
            for r in range(rows):
                for c in range(cols):
                    if not fuel[r, c] or fire_period[r, c] >= 0:
                        continue
                    lit = False
                    if has_ign and ign[r, c] > 0:
                        if uniform(key, t, r * cols + c, 8, n_cells) < ign[r, c]:
                            lit = True
                    if not lit:
                        for s in range(8):
                            sr = r - DR[s]
                            sc = c - DC[s]
                            if sr < 0 or sr >= rows or sc < 0 or sc >= cols:
                                continue
                            f = fire_period[sr, sc]
                            # fire_period == t marks an ignition made in this sweep
                            if f < 0 or f > t - 1:
                                continue
                            q = base_q[r, c] * wind[t, s]
                            if q > 1.0:
                                q = 1.0
                            if uniform(key, t, r * cols + c, s, n_cells) < q:
                                lit = True
                                break
                    if lit:
                        fire_period[r, c] = t
    return np.asarray(fire_period)
