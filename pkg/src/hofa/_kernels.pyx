# cython: language_level=3
"""Compiled inner loops.

Each function here has a numpy twin with the same signature in
``hofa._fallback``; ``hofa.kernels`` picks one at import time.

Shared conventions: ``add`` is the (n, n) int32 addition table of the
group; a system of 2^k functions is a (2^k, n) array whose row S is f_S;
bit i of S stands for the variable t_{i+1}.  Tuples (t_1, ..., t_k) are
enumerated row-major with t_k fastest.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, M_PI

cnp.import_array()


cdef inline int _lowbit(int s) nogil:
    cdef int i = 0
    while not (s >> i) & 1:
        i += 1
    return i


def conv_table(const double complex[:, ::1] vals, const int[:, ::1] add, int k):
    """Conv_k as a flat array of length n^k."""
    cdef Py_ssize_t n = add.shape[0]
    cdef int m = 1 << k
    cdef Py_ssize_t total = n ** k
    out_arr = np.empty(total, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef int[::1] t = np.zeros(max(k, 1), dtype=np.int32)
    cdef int[::1] u = np.zeros(m, dtype=np.int32)
    cdef Py_ssize_t idx, x
    cdef int s, j
    cdef double complex acc, p
    with nogil:
        for idx in range(total):
            for s in range(1, m):
                u[s] = add[u[s & (s - 1)], t[_lowbit(s)]]
            acc = 0
            for x in range(n):
                p = vals[0, x]
                for s in range(1, m):
                    p = p * vals[s, add[x, u[s]]]
                acc = acc + p
            out[idx] = acc / n
            j = k - 1
            while j >= 0:
                t[j] += 1
                if t[j] < n:
                    break
                t[j] = 0
                j -= 1
    return out_arr


def conv_mean(const double complex[:, ::1] vals, const int[:, ::1] add, int k):
    """E over (x, t_1..t_k) of prod_S f_S(x + sum_{i in S} t_i)."""
    cdef Py_ssize_t n = add.shape[0]
    cdef int m = 1 << k
    cdef Py_ssize_t total = n ** k
    cdef int[::1] t = np.zeros(max(k, 1), dtype=np.int32)
    cdef int[::1] u = np.zeros(m, dtype=np.int32)
    cdef Py_ssize_t idx, x
    cdef int s, j
    cdef double complex acc = 0, inner, p
    with nogil:
        for idx in range(total):
            for s in range(1, m):
                u[s] = add[u[s & (s - 1)], t[_lowbit(s)]]
            inner = 0
            for x in range(n):
                p = vals[0, x]
                for s in range(1, m):
                    p = p * vals[s, add[x, u[s]]]
                inner = inner + p
            acc = acc + inner
            j = k - 1
            while j >= 0:
                t[j] += 1
                if t[j] < n:
                    break
                t[j] = 0
                j -= 1
    return complex(acc) / (n * total)


def degree_violation(const long long[::1] ang, long long L, const int[:, ::1] add,
                     int m, const long long[::1] tvals):
    """First (x, t_1..t_m) with sum_S (-1)^(m-|S|) ang[x + t_S] != 0 mod L.

    The t_i range over ``tvals``; returns None when no violation exists.
    """
    cdef Py_ssize_t n = add.shape[0]
    cdef Py_ssize_t nt = tvals.shape[0]
    cdef int M = 1 << m
    cdef int[::1] t = np.zeros(max(m, 1), dtype=np.int32)
    cdef int[::1] u = np.zeros(M, dtype=np.int32)
    cdef int[::1] sign = np.empty(M, dtype=np.int32)
    cdef int s, j, pc
    cdef Py_ssize_t x, idx, total = nt ** m
    cdef long long acc
    cdef Py_ssize_t bad_idx = -1, bad_x = -1
    for s in range(M):
        pc = bin(s).count("1")
        sign[s] = 1 if (m - pc) % 2 == 0 else -1
    with nogil:
        for idx in range(total):
            for s in range(1, M):
                u[s] = add[u[s & (s - 1)], tvals[t[_lowbit(s)]]]
            for x in range(n):
                acc = 0
                for s in range(M):
                    acc += sign[s] * ang[add[x, u[s]]]
                if acc % L != 0:
                    bad_idx = idx
                    bad_x = x
                    break
            if bad_x >= 0:
                break
            j = m - 1
            while j >= 0:
                t[j] += 1
                if t[j] < nt:
                    break
                t[j] = 0
                j -= 1
    if bad_x < 0:
        return None
    return (int(bad_x),) + tuple(int(tvals[t[i]]) for i in range(m))


def character_system_norms(const int[:, ::1] ang_table, const int[:, ::1] add, int d, int L):
    """||Conv_d||_2 for every system of characters, by brute force.

    ``ang_table[c, a]`` is the exact angle (mod L) of character c at a.
    Systems are enumerated as an odometer over (c_0, ..., c_{2^d - 1})
    with c_{2^d - 1} fastest.  Partial angle sums over the (x, t) grid are
    cached per odometer level so each system costs one pass over the grid.
    """
    cdef Py_ssize_t nc = ang_table.shape[0]
    cdef Py_ssize_t n = add.shape[0]
    cdef int M = 1 << d
    cdef Py_ssize_t nt = n ** d
    cdef Py_ssize_t grid = nt * n
    cdef Py_ssize_t nsys = nc ** M
    out_arr = np.empty(nsys, dtype=np.float64)
    cdef double[::1] out = out_arr
    # pos[S, g]: index of x + t_S for grid point g = (t, x), x fastest
    pos_arr = np.empty((M, grid), dtype=np.int32)
    cdef int[:, ::1] pos = pos_arr
    cdef int[::1] t = np.zeros(max(d, 1), dtype=np.int32)
    cdef int[::1] u = np.zeros(M, dtype=np.int32)
    cdef Py_ssize_t g, ti, x, idx
    cdef int s, j, lev
    with nogil:
        for ti in range(nt):
            for s in range(1, M):
                u[s] = add[u[s & (s - 1)], t[_lowbit(s)]]
            for x in range(n):
                for s in range(M):
                    pos[s, ti * n + x] = add[x, u[s]]
            j = d - 1
            while j >= 0:
                t[j] += 1
                if t[j] < n:
                    break
                t[j] = 0
                j -= 1
    cos_arr = np.cos(2 * np.pi * np.arange(L) / L)
    sin_arr = np.sin(2 * np.pi * np.arange(L) / L)
    cdef double[::1] ctab = cos_arr
    cdef double[::1] stab = sin_arr
    # partial[lev, g] = sum_{S < lev} angle(c_S, x + t_S) mod L, lev = 0..M-1
    partial_arr = np.zeros((M, grid), dtype=np.int32)
    cdef int[:, ::1] partial = partial_arr
    cdef int[::1] c = np.zeros(M, dtype=np.int32)
    cdef int dirty = 1
    cdef int a
    cdef double re, im, tot
    with nogil:
        for idx in range(nsys):
            # rebuild cached levels from ``dirty`` upward
            for lev in range(dirty, M):
                for g in range(grid):
                    a = partial[lev - 1, g] + ang_table[c[lev - 1], pos[lev - 1, g]]
                    if a >= L:
                        a -= L
                    partial[lev, g] = a
            tot = 0.0
            for ti in range(nt):
                re = 0.0
                im = 0.0
                for x in range(n):
                    g = ti * n + x
                    a = partial[M - 1, g] + ang_table[c[M - 1], pos[M - 1, g]]
                    if a >= L:
                        a -= L
                    re += ctab[a]
                    im += stab[a]
                tot += (re * re + im * im)
            out[idx] = sqrt(tot / nt) / n
            j = M - 1
            while j >= 0:
                c[j] += 1
                if c[j] < nc:
                    break
                c[j] = 0
                j -= 1
            dirty = j + 1 if j >= 0 else 1
            if dirty < 1:
                dirty = 1
    return out_arr
