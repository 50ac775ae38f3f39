"""Arithmetic of imaginary quadratic fields Q(sqrt(-D)).

Elements are pairs (a, b) meaning a + b*sqrt(-D), or (a + b*sqrt(-D))/2 when
``half`` is set (only in the ring type where -D = 1 mod 4).  Prime ideals of
split primes are handled through their integer lattices
{a + b sqrt(-D) : ell | a + b*root}; ideal classes are identified by reducing
the norm form of that lattice.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .arith import hensel_lift_root, inv, is_prime, is_squarefree, kronecker_symbol, sqrt_mod_prime
from .errors import NotPrime, NotSplit, NotSquarefree, SearchExhausted


class RingType(enum.Enum):
    RT23 = "RT23"  # -D = 2, 3 mod 4, O_K = Z[sqrt(-D)]
    RT1 = "RT1"  # -D = 1 mod 4, O_K = Z[(1 + sqrt(-D))/2]


class Splitting(enum.Enum):
    SPLIT = "split"
    INERT = "inert"
    RAMIFIED = "ramified"


@dataclass(frozen=True)
class RingElement:
    a: int
    b: int
    half: bool = False

    def __post_init__(self):
        if self.half and (self.a - self.b) % 2:
            raise ValueError("half element needs a = b mod 2")


@dataclass(frozen=True)
class PrimeSplitData:
    p: int
    kind: Splitting
    d_p: Optional[int] = None


@dataclass(frozen=True)
class IdealLatticeBasis:
    """The prime ideal above ``ell`` in which sqrt(-D) = d_ell (or -d_ell if conjugate)."""

    ell: int
    d_ell: int
    conjugate: bool = False

    @property
    def root(self) -> int:
        return (-self.d_ell if self.conjugate else self.d_ell) % self.ell

    def conj(self) -> "IdealLatticeBasis":
        return IdealLatticeBasis(self.ell, self.d_ell, not self.conjugate)


@dataclass(frozen=True)
class FieldContext:
    D: int
    ring_type: RingType
    disc: int
    omega_K: int
    class_number: int
    class_reps: tuple = field(default=(), compare=False)

    @property
    def units(self) -> tuple:
        if self.D == 1:
            return (RingElement(1, 0), RingElement(0, 1), RingElement(-1, 0), RingElement(0, -1))
        if self.D == 3:
            return (
                RingElement(1, 0), RingElement(-1, 0),
                RingElement(1, 1, True), RingElement(-1, -1, True),
                RingElement(1, -1, True), RingElement(-1, 1, True),
            )
        return (RingElement(1, 0), RingElement(-1, 0))


# ----------------------------------------------------------------------------
# binary quadratic forms

def reduce_form(a: int, b: int, c: int) -> tuple[int, int, int]:
    """Reduce a positive definite form a x^2 + b xy + c y^2 to the unique reduced form."""
    while True:
        if c < a:
            a, b, c = c, -b, a
            continue
        if b > a or b <= -a:
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * a * k
            continue
        if a == c and b < 0:
            b = -b
            continue
        return a, b, c


def reduced_forms(disc: int) -> list[tuple[int, int, int]]:
    """All primitive reduced positive definite forms of discriminant disc < 0."""
    out = []
    amax = math.isqrt(-disc // 3) + 1
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b - disc) % 2:
                continue
            num = b * b - disc
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (a == c and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            out.append((a, b, c))
    return out


def lattice_form(ctx: FieldContext, L: IdealLatticeBasis) -> tuple[int, int, int]:
    """Norm form of the ideal lattice divided by ell, reduced."""
    ell, r = L.ell, L.root
    if ctx.ring_type is RingType.RT23:
        # basis ell, r - sqrt(-D)... element x*ell + y*(-r + sqrt(-D))
        a, b, c = ell, -2 * r, (r * r + ctx.D) // ell
    else:
        # basis ell, (-r' + sqrt(-D))/2 with r' odd, r' = r mod ell
        r1 = r if r % 2 else r + ell
        a, b, c = ell, -r1, (r1 * r1 + ctx.D) // (4 * ell)
    return reduce_form(a, b, c)


# ----------------------------------------------------------------------------
# construction

def make_field(D: int, search_bound: int = 100_000) -> FieldContext:
    if D < 1:
        raise ValueError("D must be positive")
    if not is_squarefree(D):
        raise NotSquarefree(f"D={D} is not squarefree")
    rt = RingType.RT1 if (-D) % 4 == 1 else RingType.RT23
    disc = -D if rt is RingType.RT1 else -4 * D
    omega = {1: 4, 3: 6}.get(D, 2)
    h = len(reduced_forms(disc))
    ctx = FieldContext(D, rt, disc, omega, h)
    reps = class_representatives(ctx, search_bound)
    return FieldContext(D, rt, disc, omega, h, tuple(reps))


def classify_prime(ctx: FieldContext, p: int) -> PrimeSplitData:
    if p == 2 or not is_prime(p):
        raise NotPrime(f"{p} is not an odd prime")
    k = kronecker_symbol(ctx.disc, p)
    if k == 0:
        return PrimeSplitData(p, Splitting.RAMIFIED)
    if k == -1:
        return PrimeSplitData(p, Splitting.INERT)
    return PrimeSplitData(p, Splitting.SPLIT, split_root(ctx, p))


def split_root(ctx: FieldContext, p: int) -> int:
    """The root d of d^2 = -D mod p with 0 < d < p/2."""
    if p == 2 or not is_prime(p):
        raise NotPrime(f"{p} is not an odd prime")
    if kronecker_symbol(ctx.disc, p) != 1:
        raise NotSplit(f"{p} does not split in Q(sqrt(-{ctx.D}))")
    d = sqrt_mod_prime(-ctx.D, p)
    return min(d, p - d)


# ----------------------------------------------------------------------------
# elements

def _doubled(x: RingElement) -> tuple[int, int, int]:
    return (x.a, x.b, 2) if x.half else (x.a, x.b, 1)


def _canonical(ctx: FieldContext, A: int, B: int, s: int) -> RingElement:
    # (A + B sqrt(-D)) / s with s in {1, 2, 4}
    while s > 1 and A % 2 == 0 and B % 2 == 0:
        A, B, s = A // 2, B // 2, s // 2
    if s == 1:
        return RingElement(A, B)
    if s == 2 and ctx.ring_type is RingType.RT1:
        return RingElement(A, B, True)
    raise ValueError("result is not an algebraic integer")


def norm(ctx: FieldContext, x: RingElement) -> int:
    n = x.a * x.a + x.b * x.b * ctx.D
    if x.half:
        return n // 4
    return n


def add(ctx: FieldContext, x: RingElement, y: RingElement) -> RingElement:
    a1, b1, s1 = _doubled(x)
    a2, b2, s2 = _doubled(y)
    s = max(s1, s2)
    return _canonical(ctx, a1 * (s // s1) + a2 * (s // s2), b1 * (s // s1) + b2 * (s // s2), s)


def multiply(ctx: FieldContext, x: RingElement, y: RingElement) -> RingElement:
    a1, b1, s1 = _doubled(x)
    a2, b2, s2 = _doubled(y)
    return _canonical(ctx, a1 * a2 - ctx.D * b1 * b2, a1 * b2 + a2 * b1, s1 * s2)


def residue_map(ctx: FieldContext, ps: PrimeSplitData, x: RingElement) -> int:
    """The reduction O_K -> O_K/p' = Z/p sending sqrt(-D) to d."""
    if ps.kind is not Splitting.SPLIT:
        raise NotSplit(f"{ps.p} is not split")
    p, d = ps.p, ps.d_p
    v = x.a + x.b * d
    if x.half:
        v *= inv(2, p)
    return v % p


def in_lattice(ctx: FieldContext, L: IdealLatticeBasis, x: RingElement) -> bool:
    return (x.a + x.b * L.root) % L.ell == 0


# ----------------------------------------------------------------------------
# enumeration

def lattice_points(ctx: FieldContext, L: Optional[IdealLatticeBasis], X: float,
                   modulus: Optional[int] = None, root: Optional[int] = None):
    """Lattice points of norm <= X as integer arrays.

    Returns (A, B, s): the points are (A + B sqrt(-D))/s with s = 1 for RT23 and
    s = 2 for RT1 (then A = B mod 2).  Membership in L (or in the lattice
    {modulus | A + B*root}) is tested on the numerator.
    """
    if modulus is None and L is not None:
        modulus, root = L.ell, L.root
    Xi = math.floor(X)
    D = ctx.D
    s = 2 if ctx.ring_type is RingType.RT1 else 1
    bound = Xi * s * s
    if bound < 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64), s
    bmax = math.isqrt(bound // D)
    As, Bs = [], []
    for b in range(-bmax, bmax + 1):
        amax = math.isqrt(bound - D * b * b)
        a = np.arange(-amax, amax + 1, dtype=np.int64)
        if s == 2:
            a = a[(a - b) % 2 == 0]
        if modulus is not None:
            a = a[(a + b * root) % modulus == 0]
        As.append(a)
        Bs.append(np.full(a.shape, b, dtype=np.int64))
    return np.concatenate(As), np.concatenate(Bs), s


def enumerate_lattice(ctx: FieldContext, L: Optional[IdealLatticeBasis], X: float) -> list[RingElement]:
    A, B, s = lattice_points(ctx, L, X)
    return [_canonical(ctx, int(a), int(b), s) for a, b in zip(A, B)]


def power_lattice(ctx: FieldContext, L: IdealLatticeBasis, k: int) -> tuple[int, int]:
    """(modulus, root) describing the lattice of the ideal L^k."""
    mod = L.ell ** k
    return mod, hensel_lift_root(L.root, ctx.D, L.ell, k)


def product_lattice(ctx: FieldContext, parts: Iterable[tuple[int, int]]) -> tuple[int, int]:
    """Combine coprime (modulus, root) lattice descriptions by CRT."""
    mod, root = 1, 0
    for m, r in parts:
        t = ((r - root) * inv(mod, m)) % m
        root += mod * t
        mod *= m
    return mod, root % mod


def find_generator(ctx: FieldContext, modulus: int, root: int) -> Optional[RingElement]:
    """An element of norm ``modulus`` in {modulus | a + b root}, if the ideal is principal."""
    A, B, s = lattice_points(ctx, None, modulus, modulus, root)
    nrm = (A * A + ctx.D * B * B) // (s * s)
    hit = np.nonzero(nrm == modulus)[0]
    if hit.size == 0:
        return None
    # deterministic choice: largest a, then largest b
    i = max(hit, key=lambda j: (int(A[j]), int(B[j])))
    return _canonical(ctx, int(A[i]), int(B[i]), s)


# ----------------------------------------------------------------------------
# class group

def ideal_class(ctx: FieldContext, L: IdealLatticeBasis) -> tuple[int, int, int]:
    return lattice_form(ctx, L)


def principal_form(ctx: FieldContext) -> tuple[int, int, int]:
    if ctx.ring_type is RingType.RT23:
        return (1, 0, ctx.D)
    return (1, 1, (1 + ctx.D) // 4)


def class_representatives(ctx: FieldContext, search_bound: int = 100_000,
                          avoid: Sequence[int] = ()) -> list[IdealLatticeBasis]:
    """One split-prime ideal per class, principal class first, then by reduced form."""
    avoid = set(int(a) for a in avoid)
    found: dict[tuple[int, int, int], IdealLatticeBasis] = {}
    for ell in range(3, search_bound + 1, 2):
        if ell in avoid or not is_prime(ell) or kronecker_symbol(ctx.disc, ell) != 1:
            continue
        L = IdealLatticeBasis(ell, split_root(ctx, ell))
        cls = ideal_class(ctx, L)
        if cls not in found:
            found[cls] = L
            if len(found) == ctx.class_number:
                pf = principal_form(ctx)
                keys = sorted(found, key=lambda k: (k != pf, k))
                return [found[k] for k in keys]
    raise SearchExhausted(f"only {len(found)} of {ctx.class_number} classes found below {search_bound}")
