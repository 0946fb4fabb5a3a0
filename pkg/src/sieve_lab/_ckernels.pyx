# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops; see ``_pykernels`` for the reference semantics."""
import numpy as np

from libc.math cimport fabs


def accumulate_boxes(const double[::1] positions, const double[::1] exps, long long[::1] counts):
    """counts[b] += 1 for each e, where b = #{k : positions[k] <= e}."""
    cdef Py_ssize_t i, b, n = exps.shape[0], top = positions.shape[0]
    cdef double e
    if n == 0:
        return
    if top < 2 or counts.shape[0] < top:
        raise ValueError("positions too short or counts array too small")
    for i in range(n):
        e = exps[i]
        if e >= positions[top - 1] or e < 0:
            raise ValueError("ball beyond materialized walk")
        # exponential draws sit near the bottom: linear scan beats bisection
        b = 1
        while positions[b] <= e:
            b += 1
        counts[b] += 1


def sup_deviation(const double[::1] positions, double m, double n):
    """sup over 0 <= y <= n of |nu(y) - y/m|, nu counting positions <= y."""
    cdef Py_ssize_t k, top = positions.shape[0]
    cdef double best = 1.0, d, s
    if top == 0 or positions[top - 1] <= n:
        raise ValueError("walk not materialized beyond n")
    k = 1
    while positions[k] <= n:
        s = positions[k] / m
        d = fabs((k + 1.0) - s)
        if d > best:
            best = d
        d = fabs(k - s)
        if d > best:
            best = d
        k += 1
    d = fabs(k - n / m)
    if d > best:
        best = d
    return best
