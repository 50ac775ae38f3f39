"""Dirichlet characters mod p, Hecke characters of conductor p, and their coefficients."""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .arith import e_frac, inv, is_prime, kronecker_symbol
from .errors import NonPrimitive, NotCoprime, NotPrime, NotSplit, UnitInconsistency, UnsupportedClassGroup
from .quadfield import (
    FieldContext,
    IdealLatticeBasis,
    PrimeSplitData,
    RingElement,
    Splitting,
    class_representatives,
    find_generator,
    lattice_points,
    power_lattice,
    product_lattice,
    residue_map,
)

__all__ = [
    "kronecker_symbol", "DirichletCharacter", "make_dirichlet", "eval_dirichlet", "gauss_sum_tau",
    "HeckeCharacter", "make_hecke", "eval_hecke_element", "CoefficientSeries", "lambda_coefficients",
]

UNIT_TOL = 1e-12


def least_primitive_root(p: int) -> int:
    fac = [q for q in range(2, p) if (p - 1) % q == 0 and is_prime(q)]
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in fac):
            return g
    return 1  # p = 2


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    p: int
    k: int
    generator: int
    log_table: np.ndarray = field(repr=False)  # log_table[x] = discrete log, -1 at 0
    values: np.ndarray = field(repr=False)  # values[x] = chi(x) for x mod p

    def __call__(self, x):
        return self.values[np.mod(x, self.p)]

    def conj(self) -> "DirichletCharacter":
        return make_dirichlet(self.p, (-self.k) % (self.p - 1), primitive=False)

    @property
    def is_trivial(self) -> bool:
        return self.k % (self.p - 1) == 0

    @property
    def parity(self) -> int:
        """chi(-1) as +1 or -1."""
        return 1 if self.k % 2 == 0 else -1


def make_dirichlet(p: int, k: int, primitive: bool = True) -> DirichletCharacter:
    if p == 2 or not is_prime(p):
        raise NotPrime(f"{p} is not an odd prime")
    k %= p - 1
    if primitive and k == 0:
        raise NonPrimitive("the trivial character is not primitive")
    g = least_primitive_root(p)
    logs = np.full(p, -1, dtype=np.int64)
    x = 1
    for j in range(p - 1):
        logs[x] = j
        x = x * g % p
    vals = np.zeros(p, dtype=complex)
    vals[1:] = e_frac(k * logs[1:], p - 1)
    # exact values where the root of unity is real or purely imaginary
    vals.real[np.abs(vals.real) < 1e-15] = 0.0
    vals.imag[np.abs(vals.imag) < 1e-15] = 0.0
    logs.setflags(write=False)
    vals.setflags(write=False)
    return DirichletCharacter(p, k, g, logs, vals)


def eval_dirichlet(chi: DirichletCharacter, x: int) -> complex:
    return complex(chi.values[x % chi.p])


def gauss_sum_tau(chi: DirichletCharacter) -> complex:
    b = np.arange(chi.p)
    return complex(np.sum(chi.values * e_frac(b, chi.p)))


# ----------------------------------------------------------------------------
# Hecke characters

@dataclass(frozen=True, eq=False)
class HeckeCharacter:
    ctx: FieldContext
    ps: PrimeSplitData
    chi: DirichletCharacter
    r: int
    reps: tuple  # IdealLatticeBasis per class, principal first
    class_phases: tuple  # psi(rep) aligned with reps
    extension: int = 0

    @property
    def p(self) -> int:
        return self.ps.p

    @property
    def d(self) -> int:
        return self.ps.d_p

    def phase_of(self, L: IdealLatticeBasis) -> complex:
        """psi evaluated on the prime ideal L."""
        return ideal_value(self, L)


def _unit_power(D: int, A, B, r: int):
    """((A + B sqrt(-D)) / |.|)^r, exact integer powering when it fits in int64."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    nrm = A * A + D * B * B
    big = float(np.max(nrm, initial=0))
    if big > 0 and r * math.log2(big) / 2 < 60:
        P = np.ones_like(A)
        Q = np.zeros_like(A)
        for _ in range(r):
            P, Q = P * A - D * Q * B, P * B + Q * A
        with np.errstate(invalid="ignore", divide="ignore"):
            out = (P + 1j * math.sqrt(D) * Q) / np.power(nrm.astype(float), r / 2)
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            z = (A + 1j * math.sqrt(D) * B) / np.sqrt(nrm.astype(float))
        out = z ** r
    return np.where(nrm == 0, 0.0, out)


def hecke_values(psi: HeckeCharacter, A, B, s: int):
    """psi at the elements (A + B sqrt(-D))/s, vectorized; zero on the conductor ideal."""
    p = psi.p
    theta = np.mod(np.asarray(A, dtype=np.int64) % p + (np.asarray(B, dtype=np.int64) % p) * psi.d, p)
    if s == 2:
        theta = theta * inv(2, p) % p
    return psi.chi.values[theta] * _unit_power(psi.ctx.D, A, B, psi.r)


def eval_hecke_element(psi: HeckeCharacter, x: RingElement) -> complex:
    if residue_map(psi.ctx, psi.ps, x) == 0:
        raise NotCoprime("element lies in the conductor ideal")
    s = 2 if x.half else 1
    return complex(hecke_values(psi, x.a, x.b, s))


def _element_value(psi: HeckeCharacter, x: RingElement) -> complex:
    s = 2 if x.half else 1
    return complex(hecke_values(psi, x.a, x.b, s))


def ideal_value(psi: HeckeCharacter, L: IdealLatticeBasis) -> complex:
    """psi(L) for a prime ideal L above a split prime ell != p (class group of order <= 2)."""
    ctx = psi.ctx
    if L.ell == 1:
        return 1.0 + 0j
    if L.ell == psi.p:
        raise NotCoprime("ideal above the conductor prime")
    gen = find_generator(ctx, L.ell, L.root)
    if gen is not None:
        return _element_value(psi, gen)
    R = psi.reps[1]
    phase = psi.class_phases[1]
    psi_ellR = complex(psi.chi(R.ell))  # psi of the rational integer ell_R
    if L.ell == R.ell:
        return phase if L.root == R.root else psi_ellR / phase
    # L * conj(R) is principal
    mod, root = product_lattice(ctx, [(L.ell, L.root), (R.ell, R.conj().root)])
    gen = find_generator(ctx, mod, root)
    return _element_value(psi, gen) * phase / psi_ellR


def _nonprincipal_phase(psi_partial: HeckeCharacter, R: IdealLatticeBasis, h: int, extension: int) -> complex:
    ctx = psi_partial.ctx
    mod, root = power_lattice(ctx, R, h)
    gen = find_generator(ctx, mod, root)
    val = _element_value(psi_partial, gen)
    ang = cmath.phase(val) % (2 * math.pi)
    return cmath.exp(1j * (ang + 2 * math.pi * extension) / h)


def make_hecke(ctx: FieldContext, ps: PrimeSplitData, chi: DirichletCharacter, r: int,
               extension: int = 0, avoid: Sequence[int] = (), search_bound: int = 100_000) -> HeckeCharacter:
    if ps.kind is not Splitting.SPLIT:
        raise NotSplit(f"{ps.p} is not split")
    if chi.p != ps.p:
        raise ValueError("character modulus differs from the conductor prime")
    if chi.is_trivial:
        raise NonPrimitive("chi must be primitive")
    if r <= 0:
        raise ValueError("weight r must be positive")
    if ctx.class_number > 2:
        raise UnsupportedClassGroup("class phases are implemented for class number 1 and 2")
    reps = tuple(class_representatives(ctx, search_bound, avoid=set(avoid) | {ps.p}))
    psi = HeckeCharacter(ctx, ps, chi, r, reps, (1.0 + 0j,) * len(reps), extension)
    for u in ctx.units:
        val = _element_value(psi, u)
        if abs(val - 1) > UNIT_TOL:
            raise UnitInconsistency(f"psi({u}) = {val:.6g} != 1")
    phases = [ideal_value(psi, reps[0])]
    if len(reps) == 2:
        phases.append(_nonprincipal_phase(psi, reps[1], 2, extension % 2))
    return HeckeCharacter(ctx, ps, chi, r, reps, tuple(phases), extension % max(1, ctx.class_number))


# ----------------------------------------------------------------------------
# coefficients

@dataclass(frozen=True, eq=False)
class CoefficientSeries:
    psi: HeckeCharacter
    values: np.ndarray  # values[n] = lambda(n), values[0] = 0

    @property
    def N_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n):
        return self.values[n]

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "re", "im"])
        for n in range(1, len(self.values)):
            v = self.values[n]
            w.writerow([n, repr(float(v.real)), repr(float(v.imag))])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def lambda_reps(psi: HeckeCharacter) -> list[tuple[IdealLatticeBasis, complex]]:
    """(lattice, psi(lattice)) per class; the unit ideal stands in for the principal class."""
    out = [(IdealLatticeBasis(1, 0), 1.0 + 0j)]
    out += list(zip(psi.reps[1:], psi.class_phases[1:]))
    return out


def lambda_coefficients(psi: HeckeCharacter, N_max: int,
                        reps: Optional[Sequence[tuple[IdealLatticeBasis, complex]]] = None) -> CoefficientSeries:
    """lambda(n) = sum of psi over ideals of norm n, for n <= N_max.

    Each ideal a in the class of L^{-1} is gamma * L^{-1} for gamma in L, so
    lambda(n) = (1/omega) sum_L sum_{gamma in L, N gamma = n ell} psi(gamma) / psi(L).
    """
    ctx = psi.ctx
    if reps is None:
        reps = lambda_reps(psi)
    re = np.zeros(N_max + 1)
    im = np.zeros(N_max + 1)
    for L, phase in reps:
        A, B, s = lattice_points(ctx, L, N_max * L.ell)
        nrm = (A * A + ctx.D * B * B) // (s * s)
        keep = nrm > 0
        A, B, nrm = A[keep], B[keep], nrm[keep]
        n = nrm // L.ell
        w = hecke_values(psi, A, B, s) / (ctx.omega_K * phase)
        re += np.bincount(n, weights=w.real, minlength=N_max + 1)
        im += np.bincount(n, weights=w.imag, minlength=N_max + 1)
    vals = re + 1j * im
    vals[0] = 0
    vals.setflags(write=False)
    return CoefficientSeries(psi, vals)
