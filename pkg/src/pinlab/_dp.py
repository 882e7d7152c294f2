"""Log-space engine for the contact-resolved renewal table.

A[n, m] = log sum over compositions of n into m positive parts of
prod K(parts) * exp(sum of site weights at the arrival points).

Recurrence: A[n, m] = LSE_l (logK[l] + A[n-l, m-1]) + w[n], A[0, 0] = 0.

The sum over l is an online convolution in n, so rows are filled by
divide and conquer: once rows [lo, mid) are final, their contribution to rows
[mid, hi) is one Toeplitz-times-matrix product per block. Each source column
is scaled by its own maximum before exponentiation, which keeps the product
exact to rounding (entries more than FLUSH nats below the column maximum are
below double resolution relative to it and are dropped). Small blocks fall
back to a direct log-sum-exp.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import toeplitz

LEAF = 16
FLUSH = -575.0


def table_nbytes(N: int) -> int:
    return 8 * (N + 1) * (N + 1)


def peak_nbytes(N: int) -> int:
    # table plus the four half-size work matrices of the top-level cross step
    return table_nbytes(N) + 4 * 8 * ((N + 2) // 2) ** 2


def log_table(logk: np.ndarray, N: int, w: np.ndarray | None = None) -> np.ndarray:
    """Return the (N+1, N+1) table A[n, m]; logk[0] must be -inf, len(logk) > N."""
    logk = np.asarray(logk, dtype=np.float64)
    if logk.shape[0] < N + 1:
        raise ValueError("logk shorter than N + 1")
    if w is not None:
        w = np.asarray(w, dtype=np.float64)
    A = np.full((N + 1, N + 1), -np.inf)
    A[0, 0] = 0.0
    with np.errstate(under="ignore"):
        kk = np.exp(logk[: N + 1])

    def leaf(lo, hi):
        for n in range(max(lo, 1), hi):
            j = np.arange(lo, n)
            if j.size:
                t = A[j, :n] + logk[n - j][:, None]
                mx = t.max(axis=0)
                ok = mx > -np.inf
                if ok.any():
                    s = np.full(n, -np.inf)
                    s[ok] = mx[ok] + np.log(np.exp(t[:, ok] - mx[ok]).sum(axis=0))
                    np.logaddexp(A[n, 1 : n + 1], s, out=A[n, 1 : n + 1])
            if w is not None:
                A[n, 1 : n + 1] += w[n]

    def cross(lo, mid, hi):
        src = A[lo:mid, :mid]
        s = src.max(axis=0)
        cols = np.flatnonzero(s > -np.inf)
        if cols.size == 0:
            return
        c0, c1 = cols[0], cols[-1] + 1
        D = src[:, c0:c1] - s[c0:c1]
        D[D < FLUSH] = -np.inf  # also catches -inf rows
        U = np.exp(D)
        # T[t, j] = K(mid + t - lo - j)
        T = toeplitz(kk[mid - lo : hi - lo], kk[mid - lo : 0 : -1])
        C = T @ U
        with np.errstate(divide="ignore"):
            L = np.log(C)
        L += s[c0:c1]
        tgt = A[mid:hi, c0 + 1 : c1 + 1]
        np.logaddexp(tgt, L, out=tgt)

    def solve(lo, hi):
        if hi - lo <= LEAF:
            leaf(lo, hi)
            return
        mid = (lo + hi) // 2
        solve(lo, mid)
        cross(lo, mid, hi)
        solve(mid, hi)

    with np.errstate(under="ignore", invalid="ignore"):
        solve(0, N + 1)
    return A


def naive_log_table(logk: np.ndarray, N: int, w: np.ndarray | None = None) -> np.ndarray:
    """Direct O(N^3) recursion, kept as a reference for tests."""
    A = np.full((N + 1, N + 1), -np.inf)
    A[0, 0] = 0.0
    for n in range(1, N + 1):
        l = np.arange(1, n + 1)
        for m in range(1, n + 1):
            t = A[n - l, m - 1] + logk[l]
            mx = t.max()
            if mx == -np.inf:
                continue
            A[n, m] = mx + np.log(np.exp(t - mx).sum())
        if w is not None:
            A[n, 1:] += w[n]
    return A
