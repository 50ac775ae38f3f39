"""Quadratic Gauss sums and the arithmetic part of the Voronoi dual sum.

g(a, b, c) = sum_{beta mod c} e((a beta^2 + b beta)/c) is evaluated both
directly and in closed form.  The arithmetic part A(c, f) attached to a Hecke
character of conductor p, a twist e(m n / q) and an ideal lattice mod ell is

    A = (1/ell) sum_{xi mod ell} M^-2 sum_{beta, gamma mod M}
          chi(beta + gamma d) e((beta + gamma d_ell) xi / ell)
          e(m (beta^2 + D gamma^2) / (q ell)) e((c beta + f gamma) / M)

with M = q p ell, again both literally and through six closed-form branches.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .arith import e_frac, inv, kronecker_symbol
from .characters import DirichletCharacter, gauss_sum_tau
from .errors import EvenInput, InvalidCase, NotCoprime, OracleTooLarge

GAUSS_BRUTE_MAX = 10**6
# largest M = q p ell accepted by the literal arithmetic-part sum
ARITH_BRUTE_MAX = int(os.environ.get("HV_ARITH_ORACLE_MAX", "4000"))


def epsilon_factor(a: int) -> complex:
    if a % 2 == 0:
        raise EvenInput(f"epsilon_a needs odd a, got {a}")
    return 1.0 + 0j if a % 4 == 1 else 1j


@dataclass(frozen=True)
class GaussSumParams:
    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("modulus c must be positive")


def quadratic_gauss_brute(params: GaussSumParams) -> complex:
    a, b, c = params.a % params.c, params.b % params.c, params.c
    if c > GAUSS_BRUTE_MAX:
        raise OracleTooLarge(f"c={c} exceeds {GAUSS_BRUTE_MAX}")
    beta = np.arange(c, dtype=np.int64)
    num = (a * (beta * beta % c) + b * beta) % c
    return complex(np.sum(e_frac(num, c)))


def quadratic_gauss_closed(params: GaussSumParams) -> complex:
    return complex(gauss_closed_b(params.a, params.c, params.b))


def gauss_closed_b(a: int, c: int, b):
    """Closed form of g(a, b, c), vectorized over b."""
    if c <= 0:
        raise ValueError("modulus c must be positive")
    if math.gcd(a, c) != 1:
        raise NotCoprime(f"gcd({a}, {c}) != 1")
    scalar = np.ndim(b) == 0
    b = np.atleast_1d(np.asarray(b, dtype=np.int64))
    if c % 2:
        if c == 1:
            out = np.ones(b.shape, dtype=complex)
        else:
            t = (-inv(4 * a, c) * (b * b % c)) % c
            out = e_frac(t, c) * (kronecker_symbol(a, c) * epsilon_factor(c) * math.sqrt(c))
    elif c % 4 == 2:
        c1 = c // 2
        t = (-inv(8 * a, c1) * (b * b % c1)) % c1 if c1 > 1 else np.zeros_like(b)
        base = 2 * kronecker_symbol(2 * a, c1) * epsilon_factor(c1) * math.sqrt(c1) if c1 > 1 else 2.0
        out = np.where(b % 2 == 1, base * e_frac(t, c1), 0)
    else:
        a_red = a % c
        b1 = b // 2
        t = (-inv(a_red, c) * (b1 * b1 % c)) % c
        base = kronecker_symbol(c, a_red) * (1 + 1j) / epsilon_factor(a_red) * math.sqrt(c)
        out = np.where(b % 2 == 0, base * e_frac(t, c), 0)
    out = np.asarray(out, dtype=complex)
    return complex(out[0]) if scalar else out


def gauss_grid_check(cmax: int, cmin: int = 1):
    """Per modulus c: (c, number of (a, b) cases, max |closed - brute|) over gcd(a, c) = 1, 0 <= b < c.

    The brute side is the literal sum over beta mod c, done as one matrix product per c.
    """
    rows = []
    for c in range(cmin, cmax + 1):
        a = np.array([x for x in range(1, c + 1) if math.gcd(x, c) == 1], dtype=np.int64)
        beta = np.arange(c, dtype=np.int64)
        left = e_frac(np.outer(a, beta * beta % c) % c, c)
        right = e_frac(np.outer(beta, beta) % c, c)
        brute = left @ right
        closed = np.stack([gauss_closed_b(int(x), c, beta) for x in a])
        rows.append((c, int(brute.size), float(np.max(np.abs(brute - closed)))))
    return rows


def gauss_factorized(params: GaussSumParams, k: int) -> complex:
    """g(a, b, c) as the product of its 2^k and odd parts (2^k exactly dividing c)."""
    a, b, c = params.a, params.b, params.c
    two = 2**k
    ck = c // two
    if ck * two != c or ck % 2 == 0:
        raise ValueError(f"2^{k} must exactly divide c")
    gam = np.arange(two, dtype=np.int64)
    first = np.sum(e_frac(a * ck * gam * gam + b * gam, two))
    bet = np.arange(ck, dtype=np.int64)
    second = np.sum(e_frac(two * a * (bet * bet % ck) + b * bet, ck))
    return complex(first * second)


# ----------------------------------------------------------------------------
# arithmetic part

@dataclass(frozen=True, eq=False)
class ArithPartParams:
    D: int
    p: int
    d: int
    chi: DirichletCharacter
    ell: int
    d_ell: int
    q: int
    m: int

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError("q must be positive")
        if math.gcd(self.m, self.q) != 1:
            raise NotCoprime(f"gcd(m={self.m}, q={self.q}) != 1")
        if math.gcd(self.ell, self.p * self.m * self.q) != 1:
            raise NotCoprime("ell must be coprime to p, m and q")
        if (self.d * self.d + self.D) % self.p or (self.d_ell * self.d_ell + self.D) % self.ell:
            raise ValueError("d and d_ell must be square roots of -D")
        if self.chi.p != self.p:
            raise ValueError("character modulus differs from p")

    @property
    def M(self) -> int:
        return self.q * self.p * self.ell

    @property
    def g(self) -> int:
        return math.gcd(self.q, self.D)

    @property
    def D_q(self) -> int:
        return self.D // self.g

    @property
    def q_D(self) -> int:
        return self.q // self.g

    @property
    def q1(self) -> int:
        return self.q // 2

    @property
    def delta(self) -> int:
        return 1 if self.m % self.p == 0 else 0

    @property
    def p_divides_q(self) -> bool:
        return self.q % self.p == 0

    @property
    def branch(self) -> str:
        parity = "odd" if self.q % 2 else ("2mod4" if self.q % 4 == 2 else "0mod4")
        return ("pq_" if self.p_divides_q else "q_") + parity

    @cached_property
    def tau_conj(self) -> complex:
        return gauss_sum_tau(self.chi.conj())


def _xi_table(ell: int) -> np.ndarray:
    """t -> (1/ell) sum_{xi mod ell} e(t xi / ell), summed literally."""
    t = np.arange(ell)[:, None]
    xi = np.arange(ell)[None, :]
    return np.sum(e_frac(t * xi, ell), axis=1) / ell


def arithmetic_part_brute(params: ArithPartParams, c, f, block: int = 256):
    """Literal evaluation of A at the pairs (c[i], f[i]); scalars or arrays."""
    M = params.M
    if M > ARITH_BRUTE_MAX:
        raise OracleTooLarge(f"q p ell = {M} exceeds {ARITH_BRUTE_MAX}")
    scalar = np.ndim(c) == 0 and np.ndim(f) == 0
    c, f = np.broadcast_arrays(np.atleast_1d(np.asarray(c, dtype=np.int64)),
                               np.atleast_1d(np.asarray(f, dtype=np.int64)))
    uc, ic = np.unique(c % M, return_inverse=True)
    uf, jf = np.unique(f % M, return_inverse=True)
    D, p, ell, qell = params.D, params.p, params.ell, params.q * params.ell
    xi_tab = _xi_table(ell)
    chi_vals = params.chi.values
    gam = np.arange(M, dtype=np.int64)
    Ef = e_frac(np.outer(gam, uf), M)  # (M, nf)
    out = np.zeros((uc.size, uf.size), dtype=complex)
    quad_g = (params.m * D * (gam * gam % qell)) % qell
    for start in range(0, M, block):
        bet = np.arange(start, min(M, start + block), dtype=np.int64)[:, None]
        P = chi_vals[(bet + gam[None, :] * params.d) % p]
        P = P * xi_tab[(bet + gam[None, :] * params.d_ell) % ell]
        P = P * e_frac((params.m * (bet * bet % qell) + quad_g[None, :]) % qell, qell)
        Ec = e_frac(np.outer(uc, bet[:, 0]), M)  # (nc, block)
        out += Ec @ (P @ Ef)
    out /= M * M
    vals = out[ic, jf]
    return complex(vals[0]) if scalar else vals


def arithmetic_part_closed(params: ArithPartParams, c, f):
    """Closed-form A(c, f); scalars or arrays.  Zero off the support lattice."""
    scalar = np.ndim(c) == 0 and np.ndim(f) == 0
    c = np.atleast_1d(np.asarray(c, dtype=np.int64))
    f = np.atleast_1d(np.asarray(f, dtype=np.int64))
    c, f = np.broadcast_arrays(c, f)
    D, p, d, ell, d_ell, q, m = params.D, params.p, params.d, params.ell, params.d_ell, params.q, params.m
    g, Dq, qD = params.g, params.D_q, params.q_D
    chi = params.chi.values
    chibar = np.conj(chi)
    if p % 2 == 0:
        raise InvalidCase("p must be odd")

    support = ((c * d_ell - f) % ell == 0) & (f % g == 0)
    if not params.p_divides_q:
        pref = chi[(-q * ell) % p] * chibar[c % p] / params.tau_conj
        support &= (c * d - f) % p == 0
        pp, extra = p * p, 1
    else:
        support &= (c % p == 0) & (f % p == 0)
        cp, fp = c // p, f // p
        pref = chibar[(-2 * m * d) % p] * chi[(cp * d - fp) % p]
        pp, extra = 1, p * p
    pref = np.broadcast_to(pref, c.shape)

    nrm = c * c * D + f * f
    sg = math.sqrt(g)
    if q % 2:
        const = (sg / (q * ell) * kronecker_symbol(m, g) * kronecker_symbol(Dq, qD * ell)
                 * epsilon_factor(q * ell) * epsilon_factor(qD * ell))
        mod = g * q * ell * extra
        w = inv(4 * m * pp * Dq, mod)
    elif q % 4 == 2:
        support &= (c % 2 == 1) & (f % 2 == 1)
        q1 = q // 2
        q1D = q1 // g
        const = (2 * sg / (q * ell) * kronecker_symbol(2 * m, g) * kronecker_symbol(Dq, q1D * ell)
                 * epsilon_factor(q1 * ell) * epsilon_factor(q1D * ell))
        mod = g * q1 * ell * extra
        w = inv(8 * m * pp * Dq, mod)
    elif q % 4 == 0:
        support &= (c % 2 == 0) & (f % 2 == 0)
        const = (sg / (q * ell) * kronecker_symbol(g, m) * kronecker_symbol(qD * ell, Dq)
                 * 2j / (epsilon_factor(m) * epsilon_factor(m * Dq)))
        mod = 4 * g * q * ell * extra
        w = inv(m * pp * Dq, mod)
    else:  # pragma: no cover - exhaustive guard
        raise InvalidCase(f"unhandled q={q}")
    phase = e_frac(-(nrm % mod) * w, mod)
    vals = np.where(support, const * pref * phase, 0)
    return complex(vals[0]) if scalar else vals
