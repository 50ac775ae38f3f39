"""Both sides of the Voronoi identity for Hecke characters of imaginary quadratic fields.

Left side: S_L = sum_{gamma in L} psi(gamma) e(m N(gamma)/(q ell)) V(N(gamma)/(N ell)).
Right side: sum over (c, f) of A(c, f) * J(c, f), where A is the arithmetic part
(see ``gauss_sums``) and

    J(c, f) = (N ell pi / sqrt(D)) e^{-i r phi} int V(R) J_r(2 pi X sqrt(R)) dR,
    X = sqrt(N (c^2 D + f^2)) / (q p sqrt(ell D)),  phi = atan2(c sqrt(D), f).
"""
from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .arith import e_frac, inv
from .bessel import bessel_j
from .characters import HeckeCharacter, hecke_values, lambda_coefficients
from .errors import BudgetExceeded, NotCoprime, OracleTooLarge, UnsupportedField
from .gauss_sums import ArithPartParams, arithmetic_part_brute, arithmetic_part_closed
from .oscillatory import SmoothBump, gauss_legendre
from .quadfield import IdealLatticeBasis, RingType, lattice_points

POISSON_ORACLE_MAX = int(os.environ.get("HV_POISSON_ORACLE_MAX", "4000"))
MAX_TERMS = int(os.environ.get("HV_MAX_DUAL_TERMS", "5000000"))


@dataclass(frozen=True, eq=False)
class VoronoiInstance:
    psi: HeckeCharacter
    m: int
    q: int
    N: float
    rep: IdealLatticeBasis
    V: SmoothBump = field(default_factory=SmoothBump)
    radius: Optional[float] = None  # dual radius in sqrt(c^2 D + f^2); None selects it from tail_target
    tail_target: float = 1e-7  # relative to |S_L| in verify, to the trivial bound otherwise
    max_terms: int = MAX_TERMS
    experimental: bool = False

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError("q must be positive")
        if math.gcd(self.m, self.q) != 1:
            raise NotCoprime(f"gcd(m={self.m}, q={self.q}) != 1")
        ell = self.rep.ell
        if math.gcd(ell, self.psi.p * self.m * self.q) != 1:
            raise NotCoprime("ell must be coprime to p, m and q")
        if (self.rep.d_ell ** 2 + self.psi.ctx.D) % ell:
            raise ValueError("d_ell is not a square root of -D mod ell")

    @property
    def D(self) -> int:
        return self.psi.ctx.D

    @property
    def M(self) -> int:
        return self.q * self.psi.p * self.rep.ell

    def arith_params(self, wrong_root: bool = False) -> ArithPartParams:
        psi = self.psi
        root = self.rep.root
        if wrong_root:
            root = (-root) % self.rep.ell
        return ArithPartParams(self.D, psi.p, psi.d, psi.chi, self.rep.ell, root, self.q, self.m)

    def check_dual_supported(self):
        ctx = self.psi.ctx
        if ctx.ring_type is RingType.RT1:
            raise UnsupportedField("dual side is only implemented when -D = 2, 3 mod 4")
        if (-self.D) % 4 == 2 and not self.experimental:
            raise UnsupportedField("-D = 2 mod 4 requires experimental=True")


@dataclass(frozen=True)
class DualTerm:
    c: int
    f: int
    arith: complex
    analytic: complex


@dataclass(frozen=True)
class DualSumResult:
    value: complex
    tail_estimate: float
    terms_used: int
    radius: float


@dataclass(frozen=True)
class VerificationReport:
    lhs: complex
    rhs: complex
    abs_err: float
    rel_err: Optional[float]
    terms_used: int
    truncation_tail_estimate: float
    wall_time: float
    radius: float = 0.0

    def as_dict(self, include_time: bool = False) -> dict:
        out = {
            "lhs_re": self.lhs.real,
            "lhs_im": self.lhs.imag,
            "rhs_re": self.rhs.real,
            "rhs_im": self.rhs.imag,
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "terms_used": self.terms_used,
            "truncation_tail_estimate": self.truncation_tail_estimate,
            "radius": self.radius,
        }
        if include_time:
            out["wall_time"] = self.wall_time
        return out


# ----------------------------------------------------------------------------
# left side

def class_sum(inst: VoronoiInstance, rep: Optional[IdealLatticeBasis] = None) -> complex:
    psi = inst.psi
    ctx = psi.ctx
    L = inst.rep if rep is None else rep
    a, b = inst.V.support
    hi = b * inst.N * L.ell
    A, B, s = lattice_points(ctx, L, hi)
    nrm = (A * A + ctx.D * B * B) // (s * s)
    keep = (nrm >= a * inst.N * L.ell) & (nrm > 0)
    A, B, nrm = A[keep], B[keep], nrm[keep]
    w = hecke_values(psi, A, B, s) * e_frac(inst.m * (nrm % (inst.q * L.ell)), inst.q * L.ell)
    w = w * inst.V(nrm / (inst.N * L.ell))
    return complex(np.sum(w))


def direct_sum(inst: VoronoiInstance) -> complex:
    a, b = inst.V.support
    top = int(math.floor(b * inst.N))
    if top < 1:
        return 0j
    lam = lambda_coefficients(inst.psi, top).values
    n = np.arange(1, top + 1)
    w = lam[1:] * e_frac(inst.m * n, inst.q) * inst.V(n / inst.N)
    return complex(np.sum(w))


def class_decomposition(inst: VoronoiInstance) -> complex:
    """(1/omega) sum over class representatives of S_L / psi(L)."""
    psi = inst.psi
    total = 0j
    for L, phase in zip(psi.reps, psi.class_phases):
        total += class_sum(inst, L) / phase
    return total / psi.ctx.omega_K


# ----------------------------------------------------------------------------
# analytic part

def _bessel_transform(V: SmoothBump, r: int, X: np.ndarray, per_panel: int = 16) -> np.ndarray:
    """K(X) = int V(R) J_r(2 pi X sqrt(R)) dR, written in u = sqrt(R)."""
    X = np.asarray(X, dtype=float)
    out = np.empty_like(X)
    if X.size == 0:
        return out
    ua, ub = math.sqrt(V.a), math.sqrt(V.b)
    order = np.argsort(X)
    xg, wg = gauss_legendre(per_panel)
    for chunk in np.array_split(order, max(1, X.size // 128)):
        if chunk.size == 0:
            continue
        xmax = float(X[chunk].max())
        panels = max(48, int(math.ceil(2 * xmax * (ub - ua))) + 48)
        edges = np.linspace(ua, ub, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
        half = 0.5 * np.diff(edges)[:, None]
        u = (mid + half * xg).ravel()
        w = (half * wg).ravel() * 2 * u * V(u * u)
        live = w != 0
        u, w = u[live], w[live]
        arg = 2 * np.pi * np.outer(X[chunk], u)
        out[chunk] = bessel_j(r, arg.ravel()).reshape(arg.shape) @ w
    return out


def _scale_X(inst: VoronoiInstance) -> float:
    """X = scale * sqrt(c^2 D + f^2)."""
    return math.sqrt(inst.N) / (inst.q * inst.psi.p * math.sqrt(inst.rep.ell * inst.D))


def analytic_part(inst: VoronoiInstance, c, f):
    """J(c, f); zero at (0, 0) since the angular integral of e^{i r theta} vanishes."""
    scalar = np.ndim(c) == 0 and np.ndim(f) == 0
    c = np.atleast_1d(np.asarray(c, dtype=np.int64))
    f = np.atleast_1d(np.asarray(f, dtype=np.int64))
    c, f = np.broadcast_arrays(c, f)
    D, r = inst.D, inst.psi.r
    n = c * c * D + f * f
    un, idx = np.unique(n, return_inverse=True)
    K = _bessel_transform(inst.V, r, _scale_X(inst) * np.sqrt(un.astype(float)))[idx]
    phi = np.arctan2(c * math.sqrt(D), f)
    pref = inst.N * inst.rep.ell * math.pi / math.sqrt(D)
    out = pref * np.exp(-1j * r * phi) * K
    out = np.where(n == 0, 0, out)
    return complex(out[0]) if scalar else out


# ----------------------------------------------------------------------------
# support lattice and tail

def _support_moduli(P: ArithPartParams) -> tuple[int, int]:
    """(index of the support lattice, modulus of the f-congruence)."""
    p, ell, g, q = P.p, P.ell, P.g, P.q
    idx = ell * g * (p * p if P.p_divides_q else p)
    if q % 2 == 0:
        idx *= 4
    return idx, ell * p * g * (2 if q % 4 == 2 else 1)


def support_points(P: ArithPartParams, rho: float) -> tuple[np.ndarray, np.ndarray]:
    """All (c, f) with c^2 D + f^2 <= rho^2 satisfying the support congruences."""
    D, p, ell, g, q = P.D, P.p, P.ell, P.g, P.q
    cmax = int(math.floor(rho / math.sqrt(D)))
    c = np.arange(-cmax, cmax + 1, dtype=np.int64)
    if P.p_divides_q:
        c = c[c % p == 0]
    if q % 2 == 0 and q % 4 == 0:
        c = c[c % 2 == 0]
    elif q % 4 == 2:
        c = c[c % 2 == 1]
    # congruences on f: f = c d_ell (ell), f = c d (p) or f = 0 (p), f = 0 (g), parity
    mods = [ell, g]
    res_coef = [(P.d_ell, 0), (0, 0)]
    if P.p_divides_q:
        mods.append(p)
        res_coef.append((0, 0))
    else:
        mods.append(p)
        res_coef.append((P.d, 0))
    L = 1
    for mdl in mods:
        L *= mdl
    # f0(c) = sum_i (coef_i * c mod m_i) * e_i  with CRT idempotents e_i
    f0 = np.zeros_like(c)
    for mdl, (k, _) in zip(mods, res_coef):
        if mdl == 1:
            continue
        Mi = L // mdl
        ei = Mi * inv(Mi, mdl)
        f0 = (f0 + ((k * c) % mdl) * ei) % L
    if q % 2 == 0:
        parity = 1 if q % 4 == 2 else 0
        # lift to modulus 2L with f = parity mod 2
        f0 = np.where(f0 % 2 == parity, f0, f0 + L)
        L *= 2
    cs, fs = [], []
    for ci, fi in zip(c, f0):
        fmax = math.sqrt(max(rho * rho - D * ci * ci, 0.0))
        lo = int(math.ceil((-fmax - fi) / L))
        hi = int(math.floor((fmax - fi) / L))
        if hi < lo:
            continue
        f = fi + L * np.arange(lo, hi + 1, dtype=np.int64)
        cs.append(np.full(f.shape, ci, dtype=np.int64))
        fs.append(f)
    if not cs:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    return np.concatenate(cs), np.concatenate(fs)


@lru_cache(maxsize=16)
def _kernel_envelope(V: SmoothBump, r: int, xmax: float = 400.0, step: float = 0.05):
    X = np.arange(0.0, xmax + step, step)
    K = np.abs(_bessel_transform(V, r, X))
    env = np.maximum.accumulate(K[::-1])[::-1]
    return X, env


def tail_estimate(inst: VoronoiInstance, rho: float, P: Optional[ArithPartParams] = None) -> float:
    """Bound for sum over support points beyond rho of |A J|.

    |A| is constant on the support; |J| is replaced by its monotone envelope in
    X and the lattice count in each annulus by twice its area share.
    """
    P = P or inst.arith_params()
    A0 = _arith_magnitude(P)
    X, env = _kernel_envelope(inst.V, inst.psi.r)
    s = _scale_X(inst)
    idx, _ = _support_moduli(P)
    pref = inst.N * inst.rep.ell * math.pi / math.sqrt(inst.D)
    dX = X[1] - X[0]
    # points per unit X at radius X/s: 2 pi rho / (sqrt(D) idx) * drho/dX
    density = 2 * math.pi * (X / s) / (math.sqrt(inst.D) * idx) / s
    contrib = 2 * A0 * pref * env * density * dX
    tail = np.cumsum(contrib[::-1])[::-1]
    i = int(np.searchsorted(X, rho * s))
    if i >= X.size:
        return 0.0
    return float(tail[i])


def _arith_magnitude(P: ArithPartParams) -> float:
    g, q, ell, p = P.g, P.q, P.ell, P.p
    mag = math.sqrt(g) / (q * ell)
    if q % 4 == 2:
        mag *= 2
    elif q % 4 == 0:
        mag *= 2
    if not P.p_divides_q:
        mag /= math.sqrt(p)
    return mag


def trivial_bound(inst: VoronoiInstance) -> float:
    """Approximate sum of |terms| of S_L: area of the norm window over the index."""
    a, b = inst.V.support
    return math.pi * inst.N * (b - a) / math.sqrt(inst.D)


def select_radius(inst: VoronoiInstance, target: float, P: Optional[ArithPartParams] = None) -> float:
    P = P or inst.arith_params()
    X, _ = _kernel_envelope(inst.V, inst.psi.r)
    s = _scale_X(inst)
    lo, hi = 0, X.size - 1
    if tail_estimate(inst, X[hi] / s, P) > target:
        raise BudgetExceeded("tail target not reachable within the tabulated kernel range")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail_estimate(inst, X[mid] / s, P) <= target:
            hi = mid
        else:
            lo = mid
    return float(X[hi] / s)


# ----------------------------------------------------------------------------
# right side

def dual_terms(inst: VoronoiInstance, radius: float, wrong_root: bool = False,
               closed_form: bool = True) -> list[DualTerm]:
    c, f, A, J = _dual_arrays(inst, radius, wrong_root, closed_form)
    return [DualTerm(int(ci), int(fi), complex(ai), complex(ji)) for ci, fi, ai, ji in zip(c, f, A, J)]


def _dual_arrays(inst: VoronoiInstance, radius: float, wrong_root: bool, closed_form: bool):
    inst.check_dual_supported()
    P = inst.arith_params(wrong_root)
    if closed_form and (-inst.D) % 4 == 3:
        c, f = support_points(P, radius)
        A = arithmetic_part_closed(P, c, f)
    else:
        # literal arithmetic part on the full integer box
        R = int(math.floor(radius))
        cc, ff = np.meshgrid(np.arange(-int(radius / math.sqrt(inst.D)), int(radius / math.sqrt(inst.D)) + 1),
                             np.arange(-R, R + 1), indexing="ij")
        inside = cc * cc * inst.D + ff * ff <= radius * radius
        c, f = cc[inside], ff[inside]
        A = arithmetic_part_brute(P, c, f)
    live = np.abs(A) > 0
    c, f, A = c[live], f[live], A[live]
    if c.size > inst.max_terms:
        raise BudgetExceeded(f"{c.size} dual terms exceed max_terms={inst.max_terms}")
    J = analytic_part(inst, c, f)
    return c, f, A, J


def dual_sum(inst: VoronoiInstance, target: Optional[float] = None, wrong_root: bool = False,
             closed_form: bool = True) -> DualSumResult:
    P = inst.arith_params(wrong_root)
    if inst.radius is not None:
        radius = float(inst.radius)
    else:
        if target is None:
            target = inst.tail_target * trivial_bound(inst)
        radius = select_radius(inst, target, P)
    idx, _ = _support_moduli(P)
    expected = math.pi * radius * radius / (math.sqrt(inst.D) * idx)
    if expected > inst.max_terms:
        raise BudgetExceeded(f"about {expected:.0f} dual terms exceed max_terms={inst.max_terms}")
    c, f, A, J = _dual_arrays(inst, radius, wrong_root, closed_form)
    # deterministic reduction order: sort by (c, f)
    order = np.lexsort((f, c))
    value = complex(np.sum((A * J)[order]))
    return DualSumResult(value, tail_estimate(inst, radius, P), int(c.size), radius)


def verify(inst: VoronoiInstance, budget: float = 1.0, wrong_root: bool = False) -> VerificationReport:
    t0 = time.perf_counter()
    lhs = class_sum(inst)
    scale = abs(lhs) if lhs != 0 else trivial_bound(inst)
    target = inst.tail_target / budget**2 * scale
    res = dual_sum(inst, target=target, wrong_root=wrong_root)
    abs_err = abs(lhs - res.value)
    rel = abs_err / abs(lhs) if abs(lhs) > 10 * res.tail_estimate else None
    return VerificationReport(lhs, res.value, abs_err, rel, res.terms_used, res.tail_estimate,
                              time.perf_counter() - t0, res.radius)


# ----------------------------------------------------------------------------
# Poisson oracle

def kernel_fourier_2d(inst: VoronoiInstance, c: int, f: int, panels: Optional[int] = None,
                      per_panel: int = 16) -> complex:
    """int int ((z + y sqrt(-D))/|.|)^r V((z^2 + D y^2)/(N ell)) e(-(c z + f y)/M) dz dy on a box."""
    D, r, M = inst.D, inst.psi.r, inst.M
    a, b = inst.V.support
    Nl = inst.N * inst.rep.ell
    zmax = math.sqrt(b * Nl)
    ymax = math.sqrt(b * Nl / D)
    width = math.sqrt(Nl) * (math.sqrt(b) - math.sqrt(a))
    xg, wg = gauss_legendre(per_panel)

    def nodes(lim, freq, w):
        n = panels or max(64, int(math.ceil(2 * lim / w * 24)), int(math.ceil(2 * lim * freq * 1.5)))
        edges = np.linspace(-lim, lim, n + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
        half = 0.5 * np.diff(edges)[:, None]
        return (mid + half * xg).ravel(), (half * wg).ravel()

    # the annulus is narrower by sqrt(D) in the y direction
    z, wz = nodes(zmax, abs(c) / M, width)
    y, wy = nodes(ymax, abs(f) / M, width / math.sqrt(D))
    total = 0j
    sD = math.sqrt(D)
    ey = np.exp(-2j * np.pi * f * y / M) * wy
    for i in range(0, z.size, 512):
        Z = z[i:i + 512, None]
        R2 = Z * Z + D * y[None, :] ** 2
        v = inst.V(R2 / Nl)
        with np.errstate(invalid="ignore", divide="ignore"):
            ang = ((Z + 1j * sD * y[None, :]) / np.sqrt(R2)) ** r
        ang = np.where(R2 > 0, ang, 0)
        ez = np.exp(-2j * np.pi * c * z[i:i + 512] / M) * wz[i:i + 512]
        total += complex(ez @ ((v * ang) @ ey))
    return total


def poisson_oracle(inst: VoronoiInstance, c: int, f: int) -> complex:
    """One dual term before polar coordinates: literal character sum times a 2D Fourier integral."""
    if inst.M > POISSON_ORACLE_MAX:
        raise OracleTooLarge(f"q p ell = {inst.M} exceeds {POISSON_ORACLE_MAX}")
    A = arithmetic_part_brute(inst.arith_params(), c, f)
    if A == 0 or abs(A) < 1e-14:
        return 0j
    return A * kernel_fourier_2d(inst, c, f)
