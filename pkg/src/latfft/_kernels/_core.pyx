# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Semantics must match the numpy reference in ``fallback.py`` exactly; the
test suite asserts backend equivalence on random inputs.  The gather and
injectivity kernels stream row by row, avoiding the O(n * L) temporaries
of the fallback.
"""

from libc.math cimport fabs, floor, log2, sqrt
from libc.stdlib cimport free, malloc

import numpy as np

cimport numpy as cnp

cnp.import_array()


# ---------------------------------------------------------------------------
# hyperbolic cross enumeration
# ---------------------------------------------------------------------------

cdef inline double _factor(double w, double k) nogil:
    cdef double f = w * fabs(k)
    return f if f > 1.0 else 1.0


cdef inline long long _cap_for(double bound, double prod, double w) nogil:
    cdef long long k = <long long>floor((bound / prod) / w)
    if k < 0:
        k = 0
    while k > 0 and prod * _factor(w, <double>k) > bound:
        k -= 1
    while prod * _factor(w, <double>(k + 1)) <= bound:
        k += 1
    return k


cdef long long _hc_count_rec(int t, int d, double prod, double bound,
                             double* ws) nogil:
    cdef long long cap = _cap_for(bound, prod, ws[t])
    cdef long long total = 0
    cdef long long k
    if t == d - 1:
        return 2 * cap + 1
    for k in range(-cap, cap + 1):
        total += _hc_count_rec(t + 1, d, prod * _factor(ws[t], <double>k),
                               bound, ws)
    return total


cdef long long _hc_fill_rec(int t, int d, double prod, double bound,
                            double* ws, long long* buf,
                            long long[:, ::1] out, long long pos) nogil:
    cdef long long cap = _cap_for(bound, prod, ws[t])
    cdef long long k
    cdef int j
    for k in range(-cap, cap + 1):
        buf[t] = k
        if t == d - 1:
            for j in range(d):
                out[pos, j] = buf[j]
            pos += 1
        else:
            pos = _hc_fill_rec(t + 1, d, prod * _factor(ws[t], <double>k),
                               bound, ws, buf, out, pos)
    return pos


def hc_count(int d, double bound, weights):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ws = np.ascontiguousarray(
        weights, dtype=np.float64)
    cdef long long total
    with nogil:
        total = _hc_count_rec(0, d, 1.0, bound, <double*>ws.data)
    return int(total)


def hc_enumerate(int d, double bound, weights):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ws = np.ascontiguousarray(
        weights, dtype=np.float64)
    cdef long long total
    with nogil:
        total = _hc_count_rec(0, d, 1.0, bound, <double*>ws.data)
    out_arr = np.empty((total, d), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    cdef long long* buf = <long long*>malloc(d * sizeof(long long))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            _hc_fill_rec(0, d, 1.0, bound, <double*>ws.data, buf, out, 0)
    finally:
        free(buf)
    return out_arr


# ---------------------------------------------------------------------------
# modular injectivity of integer rows
# ---------------------------------------------------------------------------

def rows_injective_mod(const long long[:, ::1] elems, long long p):
    """1/0 for injective/colliding; -1 when rows do not pack into 62 bits."""
    cdef Py_ssize_t n = elems.shape[0]
    cdef Py_ssize_t d = elems.shape[1]
    if n <= 1:
        return 1
    if p > 1 and d * log2(<double>p) >= 62.0:
        return -1
    cdef Py_ssize_t size = 1
    while size < 2 * n:
        size <<= 1
    cdef long long* table = <long long*>malloc(size * sizeof(long long))
    if table == NULL:
        raise MemoryError()
    cdef Py_ssize_t i, slot
    cdef Py_ssize_t mask = size - 1
    cdef long long code, r
    cdef Py_ssize_t j
    cdef int injective = 1
    with nogil:
        for i in range(size):
            table[i] = -1
        for i in range(n):
            code = 0
            for j in range(d):
                r = elems[i, j] % p
                if r < 0:
                    r += p
                code = code * p + r
            slot = <Py_ssize_t>((<unsigned long long>code *
                                 <unsigned long long>0x9E3779B97F4A7C15ULL)
                                >> 32) & mask
            while table[slot] != -1:
                if table[slot] == code:
                    injective = 0
                    break
                slot = (slot + 1) & mask
            if not injective:
                break
            table[slot] = code
    free(table)
    return injective


# ---------------------------------------------------------------------------
# detection gather: residues, hit counts, coefficient medians
# ---------------------------------------------------------------------------

cdef double _median_odd(double* src, double* tmp, Py_ssize_t L) nogil:
    cdef Py_ssize_t i, j
    cdef double v
    for i in range(L):
        v = src[i]
        j = i
        while j > 0 and tmp[j - 1] > v:
            tmp[j] = tmp[j - 1]
            j -= 1
        tmp[j] = v
    return tmp[L >> 1]


def detect_gather(const long long[:, ::1] elems, const long long[:, ::1] zmat,
                  long long M, const double complex[:, ::1] ghat, double theta,
                  double hit_threshold, bint want_medians):
    """Hit counts and medians per candidate row (elems pre-reduced mod M)."""
    cdef Py_ssize_t n = elems.shape[0]
    cdef Py_ssize_t d = elems.shape[1]
    cdef Py_ssize_t L = zmat.shape[0]
    hits_arr = np.zeros(n, dtype=np.int64)
    med_arr = np.zeros(n, dtype=np.complex128)
    cdef long long[::1] hits = hits_arr
    cdef double complex[::1] med = med_arr
    cdef double* re = <double*>malloc(3 * L * sizeof(double))
    if re == NULL:
        raise MemoryError()
    cdef double* im = re + L
    cdef double* tmp = re + 2 * L
    cdef Py_ssize_t i, l, j
    cdef long long r, cnt
    cdef double complex v
    cdef double complex IU = 1j
    with nogil:
        for i in range(n):
            cnt = 0
            for l in range(L):
                r = 0
                for j in range(d):
                    r += elems[i, j] * zmat[l, j]
                r = r % M
                v = ghat[l, r]
                re[l] = v.real
                im[l] = v.imag
                if sqrt(re[l] * re[l] + im[l] * im[l]) > theta:
                    cnt += 1
            hits[i] = cnt
            if want_medians and <double>cnt >= hit_threshold:
                med[i] = (_median_odd(re, tmp, L)
                          + IU * _median_odd(im, tmp, L))
    free(re)
    return hits_arr, med_arr
