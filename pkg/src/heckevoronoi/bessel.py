"""Bessel functions J_nu of integer order.

Three regimes: the power series for small x, Miller's backward recurrence in
the transition zone, and Hankel's asymptotic expansion once x is large
compared with nu^2.
"""
from __future__ import annotations

import math

import numpy as np

SERIES_MAX_X = 8.0
NU_MAX = 50


def hankel_threshold(nu: int) -> float:
    """Smallest x at which the Hankel expansion is used for order nu."""
    return max(25.0, 1.1 * nu * nu)


def _series(nu: int, x: np.ndarray) -> np.ndarray:
    h = x / 2.0
    term = np.power(h, nu) / math.factorial(nu)
    total = term.copy()
    h2 = -h * h
    for k in range(1, 200):
        term = term * h2 / (k * (k + nu))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _hankel(nu: int, x: np.ndarray) -> np.ndarray:
    mu = 4.0 * nu * nu
    P = np.ones_like(x)
    Q = np.zeros_like(x)
    term = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 400):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        mag = np.abs(term)
        # stop at the smallest term of the (divergent) series
        active &= mag < prev
        if not active.any():
            break
        t = np.where(active, term, 0.0)
        if k % 4 == 1:
            Q += t
        elif k % 4 == 2:
            P -= t
        elif k % 4 == 3:
            Q -= t
        else:
            P += t
        prev = np.where(active, mag, prev)
        if np.all(mag[active] < 1e-17):
            break
    chi = x - (nu / 2.0 + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (P * np.cos(chi) - Q * np.sin(chi))


def _miller(nu: int, x: np.ndarray) -> np.ndarray:
    """Backward recurrence normalised by J_0 + 2 sum J_{2k} = 1 (x > 0)."""
    top = max(nu, float(np.max(x)))
    start = int(top + 30 + 4 * math.sqrt(top))
    start += start % 2
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    result = np.zeros_like(x)
    for n in range(start, 0, -1):
        j_prev = (2.0 * n / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds the unnormalised J_{n-1}
        if n - 1 == nu:
            result = j_cur.copy()
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * j_cur
        big = np.abs(j_cur) > 1e250
        if big.any():
            s = np.where(big, 1e-250, 1.0)
            j_cur *= s
            j_next *= s
            norm *= s
            result *= s
    norm += j_cur
    return result / norm


def bessel_j(nu: int, x):
    """J_nu(x) for integer 0 <= nu <= 50 and x >= 0; vectorised over x."""
    nu = int(nu)
    if nu < 0 or nu > NU_MAX:
        raise ValueError(f"order {nu} outside [0, {NU_MAX}]")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    out = np.empty_like(x)
    small = x <= SERIES_MAX_X
    large = x >= hankel_threshold(nu)
    mid = ~(small | large)
    if small.any():
        out[small] = _series(nu, x[small])
    if large.any():
        out[large] = _hankel(nu, x[large])
    if mid.any():
        xm = x[mid]
        # group by magnitude so the recurrence length fits each chunk
        order = np.argsort(xm)
        res = np.empty_like(xm)
        for chunk in np.array_split(order, max(1, int(np.ceil(xm.max() / 50.0)))):
            if chunk.size:
                res[chunk] = _miller(nu, xm[chunk])
        out[mid] = res
    return float(out[0]) if scalar else out
