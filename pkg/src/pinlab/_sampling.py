"""Compiled backward-sampling kernels shared by the conditioned and Gibbs samplers.

Table convention: A[n, k] is the log weight of arriving at n with exactly k
contacts, site weight of n included. From (n, k) with k >= 1 the previous
contact sits at n - l with probability

    exp(logk[l] + A[n - l, k - 1] - (A[n, k] - w[n])).
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _step(A, logk, w, n, k, u):
    if k == 1:
        return n
    base = A[n, k] - w[n]
    acc = 0.0
    last = -1
    for l in range(1, n - k + 2):
        v = A[n - l, k - 1]
        if v == -np.inf:
            continue
        p = math.exp(logk[l] + v - base)
        if p > 0.0:
            last = l
        acc += p
        if u < acc:
            return l
    return last  # rounding left u beyond the accumulated mass


@njit(cache=True)
def draw_contacts(A, logk, w, N, m, rng, out):
    """Fill out[:m] with the ascending contact positions of one draw ending at N."""
    n = N
    k = m
    while k > 0:
        out[k - 1] = n
        l = _step(A, logk, w, n, k, rng.random())
        n -= l
        k -= 1


@njit(cache=True)
def draw_batch(A, logk, w, N, cdf_m, draws, rng, ms, eta1, eta2, masks, want_masks):
    """Two-stage draws: m from cdf_m (index = m), then the increments backward.

    Records m, the two largest increments and, when asked, the contact set as a
    bit mask (bit p - 1 set for a contact at p).
    """
    total = cdf_m[-1]
    for i in range(draws):
        u = rng.random() * total
        m = np.searchsorted(cdf_m, u, side="right")
        if m >= cdf_m.shape[0]:
            m = cdf_m.shape[0] - 1
        while m > 0 and cdf_m[m] == cdf_m[m - 1]:
            m -= 1
        ms[i] = m
        n = N
        k = m
        e1 = 0
        e2 = 0
        mask = 0
        while k > 0:
            if want_masks:
                mask |= 1 << (n - 1)
            l = _step(A, logk, w, n, k, rng.random())
            if l > e1:
                e2 = e1
                e1 = l
            elif l > e2:
                e2 = l
            n -= l
            k -= 1
        eta1[i] = e1
        eta2[i] = e2
        if want_masks:
            masks[i] = mask
