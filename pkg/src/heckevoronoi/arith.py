"""Small elementary number theory helpers."""
from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import ZeroModulus


def e(x):
    """The additive character exp(2 pi i x); works on scalars and arrays."""
    if np.ndim(x) == 0:
        return cmath.exp(2j * math.pi * float(x))
    return np.exp(2j * np.pi * np.asarray(x, dtype=float))


def e_frac(num, den):
    """exp(2 pi i num/den) with num reduced mod den first (exact for integers)."""
    num = np.mod(num, den)
    return np.exp(2j * np.pi * (num / den))


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def factorize(n: int) -> dict[int, int]:
    n = abs(n)
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_squarefree(n: int) -> bool:
    return all(k == 1 for k in factorize(n).values())


def primes_upto(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a/n), the multiplicative extension of the Legendre symbol."""
    if n == 0:
        raise ZeroModulus("Kronecker symbol with n = 0")
    a, n = int(a), int(n)
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n) for odd positive n
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def inv(a: int, n: int) -> int:
    return pow(a % n, -1, n)


def sqrt_mod_prime(a: int, p: int) -> int:
    """Tonelli-Shanks. Returns some x with x^2 = a mod p; raises ValueError for non-residues."""
    a %= p
    if a == 0:
        return 0
    if p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        raise ValueError(f"{a} is not a square mod {p}")
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def hensel_lift_root(r: int, D: int, ell: int, k: int) -> int:
    """Lift a simple root of x^2 + D mod ell to a root mod ell**k."""
    mod = ell
    for _ in range(1, k):
        mod *= ell
        fx = r * r + D
        r = (r - fx * inv(2 * r, mod)) % mod
    return r % mod


def crt(residues, moduli) -> tuple[int, int]:
    x, n = 0, 1
    for r, m in zip(residues, moduli):
        t = ((r - x) * inv(n, m)) % m
        x += n * t
        n *= m
    return x % n, n


def divisor_counts(n: int) -> np.ndarray:
    """d(k) for k = 0..n (d(0) set to 0)."""
    d = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        d[i::i] += 1
    return d
