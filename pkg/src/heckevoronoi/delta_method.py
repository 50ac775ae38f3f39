"""Kloosterman form of the delta symbol.

    delta(n = 0) = 2 Re sum_{1 <= q <= Q} sum*_{Q < a <= q + Q} (1/(a q))
                   int_0^1 e(n abar / q - n x / (a q)) dx

where abar is the inverse of a mod q.  The x-integral is done in closed form,
so the identity holds up to rounding for every integer n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import e_frac, is_prime
from .errors import NotPrime


@dataclass(frozen=True)
class DeltaParams:
    n: int
    Q: float

    def __post_init__(self):
        if self.Q < 1:
            raise ValueError("Q must be at least 1")


def _x_integral(n: int, a: np.ndarray, q: int) -> np.ndarray:
    """int_0^1 e(-n x/(a q)) dx."""
    if n == 0:
        return np.ones(a.shape, dtype=complex)
    t = -n / (a * q)
    return np.expm1(2j * np.pi * t) / (2j * np.pi * t)


def delta_eval(params: DeltaParams) -> float:
    n, Q = params.n, params.Q
    total = 0j
    lo = math.floor(Q) + 1
    for q in range(1, math.floor(Q) + 1):
        a = np.arange(lo, math.floor(q + Q) + 1, dtype=np.int64)
        a = a[np.gcd(a, q) == 1]
        if a.size == 0:
            continue
        if q == 1:
            arith = np.ones(a.shape, dtype=complex)
        else:
            abar = np.array([pow(int(x), -1, q) for x in a], dtype=np.int64)
            arith = e_frac((n % q) * abar, q)
        total += np.sum(arith * _x_integral(n, a.astype(float), q) / (a * q))
    return 2 * total.real


def conductor_lowering_check(n: int, m: int, p: int, Q: float = 10.0, tol: float = 1e-9) -> bool:
    """delta(n = m) == delta(p | n - m) * delta((n - m)/p = 0), the inner factor via delta_eval."""
    if p == 2 or not is_prime(p):
        raise NotPrime(f"{p} is not an odd prime")
    k = n - m
    exact = 1 if k == 0 else 0
    outer = 1 if k % p == 0 else 0
    if not outer:
        return exact == 0
    inner = delta_eval(DeltaParams(k // p, Q))
    return abs(inner - exact) <= tol and exact == outer * (1 if k // p == 0 else 0)
