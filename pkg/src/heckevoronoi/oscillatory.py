"""Oscillatory integrals: smooth bumps, W-dagger transforms, stationary phase,
a two dimensional second-derivative bound and a numerical Poisson check."""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .arith import e
from .errors import BudgetExceeded, DegeneratePhase, HessianViolation, NonConvexPhase, NoStationaryPoint

MAX_PANELS = 2_000_000


@lru_cache(maxsize=32)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


# ----------------------------------------------------------------------------
# bumps

class BumpKind(enum.Enum):
    EXP = "StandardExpBump"
    POLY = "PolynomialSpline"


POLY_DEGREE = 8  # (1 - t^2)^8 vanishes to order 7 at the ends


@dataclass(frozen=True)
class SmoothBump:
    kind: BumpKind = BumpKind.EXP
    a: float = 1.0
    b: float = 2.0
    normalization: float = 1.0

    def __post_init__(self):
        if not (0 < self.a < self.b):
            raise ValueError("support must satisfy 0 < a < b")

    @property
    def support(self) -> tuple[float, float]:
        return self.a, self.b

    def _t(self, x):
        return (2 * np.asarray(x, dtype=float) - self.a - self.b) / (self.b - self.a)

    def __call__(self, x):
        return self.derivative(x, 0)

    def derivative(self, x, j: int = 0):
        scalar = np.ndim(x) == 0
        t = np.atleast_1d(self._t(x))
        inside = np.abs(t) < 1
        out = np.zeros_like(t)
        ti = t[inside]
        if self.kind is BumpKind.EXP:
            vals = _exp_bump_derivs(ti, j)
        else:
            poly = np.polynomial.Polynomial([1, 0, -1]) ** POLY_DEGREE
            vals = poly.deriv(j)(ti) if j else poly(ti)
        out[inside] = vals * (2 / (self.b - self.a)) ** j * self.normalization
        return float(out[0]) if scalar else out

    def integral(self) -> float:
        return float(w_dagger_quadrature(self, 0.0, 1.0).real)


def _exp_bump_derivs(t: np.ndarray, j: int) -> np.ndarray:
    """d^j/dt^j exp(1 - 1/(1 - t^2)) on |t| < 1 via the recursion y' = u' y."""
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        u = -1.0 / (1.0 - t * t)
        ys = [np.exp(1.0 + u)]
        um = 1.0 - t
        up = 1.0 + t
        # u^(n) for n = 1..j
        du = [None] + [-0.5 * math.factorial(n) * (um ** -(n + 1) + (-1) ** n * up ** -(n + 1)) for n in range(1, j + 1)]
        for n in range(1, j + 1):
            acc = np.zeros_like(t)
            for k in range(n):
                acc = acc + math.comb(n - 1, k) * du[k + 1] * ys[n - 1 - k]
            ys.append(acc)
        out = ys[j]
    return np.where(ys[0] == 0, 0.0, np.nan_to_num(out, nan=0.0, posinf=0.0, neginf=0.0))


# ----------------------------------------------------------------------------
# adaptive quadrature

def _panels(a: float, b: float, local_freq: Optional[Callable], min_panels: int) -> np.ndarray:
    """Panel edges on [a, b], each at most a quarter period of the local frequency."""
    grid = np.linspace(a, b, 4 * min_panels + 1)
    if local_freq is None:
        return np.linspace(a, b, min_panels + 1)
    fr = np.abs(np.asarray(local_freq(grid), dtype=float))
    fmax = np.maximum(fr[:-1], fr[1:])
    width = np.diff(grid)
    n = np.maximum(1, np.ceil(4 * width * fmax)).astype(np.int64)
    if n.sum() > MAX_PANELS:
        raise BudgetExceeded(f"{n.sum()} panels requested")
    edges = [grid[i] + width[i] * np.arange(n[i]) / n[i] for i in range(len(width))]
    return np.append(np.concatenate(edges), b)


def oscillatory_quad(func: Callable, a: float, b: float, local_freq: Optional[Callable] = None,
                     tol: float = 1e-11, min_panels: int = 16, max_panels: int = MAX_PANELS,
                     order: int = 10) -> complex:
    """Adaptive Gauss-Legendre panels for integrand ``func`` (vectorised, complex).

    Each panel is integrated with ``order`` and ``2*order`` points; panels whose two
    estimates disagree by more than their share of ``tol`` are bisected.
    """
    edges = _panels(a, b, local_freq, min_panels)
    lo, hi = edges[:-1], edges[1:]
    x1, w1 = gauss_legendre(order)
    x2, w2 = gauss_legendre(2 * order)
    total = 0j
    length = b - a
    while lo.size:
        if lo.size > max_panels:
            raise BudgetExceeded(f"more than {max_panels} panels needed")
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        f1 = func(mid[:, None] + half[:, None] * x1[None, :])
        f2 = func(mid[:, None] + half[:, None] * x2[None, :])
        i1 = half * (f1 @ w1)
        i2 = half * (f2 @ w2)
        ok = np.abs(i2 - i1) <= tol * (hi - lo) / length
        ok |= (hi - lo) < 1e-13 * length
        total += complex(np.sum(i2[ok]))
        bad = ~ok
        lo, hi, mid = lo[bad], hi[bad], mid[bad]
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
    return total


# ----------------------------------------------------------------------------
# W-dagger

@dataclass(frozen=True)
class StationaryResult:
    main: complex
    error_bound: float
    stationary_point: Optional[float]


def w_dagger_quadrature(W: SmoothBump, r: float, s: complex, tol: float = 1e-11) -> complex:
    """W^dagger(r, s) = int W(x) e(-r x) x^(s-1) dx by adaptive quadrature."""
    s = complex(s)
    if abs(s.imag) > 1e5 or abs(r) > 1e5:
        raise BudgetExceeded("|r| and |Im s| are limited to 1e5")
    a, b = W.support
    beta = s.imag

    def integrand(x):
        return W(x) * np.exp(-2j * np.pi * r * x + (s - 1) * np.log(x))

    def freq(x):
        return np.abs(-r + beta / (2 * np.pi * x))

    return oscillatory_quad(integrand, a, b, freq, tol=tol)


def w_dagger_stationary(W: SmoothBump, r: float, s: complex) -> StationaryResult:
    s = complex(s)
    sigma, beta = s.real, s.imag
    if r == 0 or beta == 0:
        raise DegeneratePhase("stationary point beta/(2 pi r) undefined")
    x0 = beta / (2 * math.pi * r)
    bound = min(abs(beta) ** -1.5, abs(r) ** -1.5)
    if x0 <= 0:
        raise DegeneratePhase("beta and r have opposite signs; no stationary point on (0, inf)")
    main = (math.sqrt(2 * math.pi) * e(0.125) / cmath.sqrt(-beta) * W(x0) * x0**sigma
            * cmath.exp(1j * beta * math.log(x0 / math.e)))
    return StationaryResult(complex(main), bound, x0)


# ----------------------------------------------------------------------------
# general stationary phase

@dataclass(frozen=True)
class PhasePair:
    """f(x, j) and g(x, j) return the j-th derivatives (f up to 4, g up to 2)."""

    f: Callable[[np.ndarray, int], np.ndarray]
    g: Callable[[np.ndarray, int], np.ndarray]
    a: float
    b: float

    @property
    def domain(self) -> tuple[float, float]:
        return self.a, self.b

    def quadrature(self, tol: float = 1e-11) -> complex:
        return oscillatory_quad(lambda x: self.g(x, 0) * np.exp(2j * np.pi * self.f(x, 0)),
                                self.a, self.b, lambda x: self.f(x, 1), tol=tol)


SAMPLES = 2001


def _stationary_point(pp: PhasePair) -> float:
    x = np.linspace(pp.a, pp.b, SAMPLES)
    fp = np.asarray(pp.f(x, 1), dtype=float)
    sgn = np.sign(fp)
    changes = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    exact = np.nonzero(sgn[1:-1] == 0)[0] + 1
    if changes.size + exact.size == 0:
        raise NoStationaryPoint("f' does not vanish on the interval")
    if changes.size + exact.size > 1:
        raise NoStationaryPoint("f' vanishes more than once")
    if exact.size:
        i = exact[0]
        if not (fp[i - 1] < 0 < fp[i + 1]):
            raise NonConvexPhase("f' does not change sign from negative to positive")
        return float(x[i])
    i = changes[0]
    if not fp[i] < 0 < fp[i + 1]:
        raise NonConvexPhase("f' does not change sign from negative to positive")
    return brentq(lambda t: float(pp.f(t, 1)), x[i], x[i + 1], xtol=1e-15, rtol=4e-16)


def stationary_error_bound(theta_f: float, omega_f: float, omega_g: float, kappa: float,
                           convention: str = "stationary") -> float:
    """Error term of the stationary phase expansion.

    ``stationary``: Omega^4/(Theta^2 kappa^3) + Omega/Theta^1.5 + Omega^3/(Theta^1.5 Omega_g^2)
    ``huxley``:     Omega^4/(Theta^3 kappa)   + the same two remaining terms
    """
    if convention == "stationary":
        first = omega_f**4 / (theta_f**2 * kappa**3)
    elif convention == "huxley":
        first = omega_f**4 / (theta_f**3 * kappa)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return first + omega_f / theta_f**1.5 + omega_f**3 / (theta_f**1.5 * omega_g**2)


def first_derivative_bound(pp: PhasePair, theta_f: float, omega_f: float, omega_g: float) -> float:
    """Bound for int g e(f) when f' has no zero: Theta/(Omega^2 Lambda^3)(1 + ...)."""
    x = np.linspace(pp.a, pp.b, SAMPLES)
    lam = float(np.min(np.abs(pp.f(x, 1))))
    if lam == 0:
        raise DegeneratePhase("f' vanishes on the interval")
    return (theta_f / (omega_f**2 * lam**3)
            * (1 + omega_f / omega_g + (omega_f**2 / omega_g**2) * lam / (theta_f / omega_f)))


def stationary_phase_main(pp: PhasePair, theta_f: float, omega_f: float, omega_g: float,
                          convention: str = "stationary", convexity_const: float = 1.0) -> StationaryResult:
    x = np.linspace(pp.a, pp.b, SAMPLES)
    f2 = np.asarray(pp.f(x, 2), dtype=float)
    if np.any(f2 <= 0):
        raise NonConvexPhase("f'' must be positive on the interval")
    if np.any(f2 < convexity_const * theta_f / omega_f**2):
        raise NonConvexPhase("f'' below Theta_f/Omega_f^2")
    x0 = _stationary_point(pp)
    kappa = min(pp.b - x0, x0 - pp.a)
    main = complex(pp.g(x0, 0)) * e(float(pp.f(x0, 0)) + 0.125) / math.sqrt(float(pp.f(x0, 2)))
    bound = stationary_error_bound(theta_f, omega_f, omega_g, kappa, convention)
    return StationaryResult(main, bound, x0)


def dagger_phase_pair(W: SmoothBump, r: float, s: complex) -> PhasePair:
    """W^dagger(r, s) written as int g e(f): f = -r x + beta log(x)/(2 pi), g = W x^(sigma-1)."""
    s = complex(s)
    sigma, beta = s.real, s.imag

    def f(x, j):
        x = np.asarray(x, dtype=float)
        if j == 0:
            return -r * x + beta * np.log(x) / (2 * np.pi)
        if j == 1:
            return -r + beta / (2 * np.pi * x)
        return (-1) ** (j - 1) * math.factorial(j - 1) * beta / (2 * np.pi * x**j)

    def g(x, j):
        x = np.asarray(x, dtype=float)
        p = sigma - 1
        if j == 0:
            return W(x) * x**p
        if j == 1:
            return W.derivative(x, 1) * x**p + p * W(x) * x ** (p - 1)
        return (W.derivative(x, 2) * x**p + 2 * p * W.derivative(x, 1) * x ** (p - 1)
                + p * (p - 1) * W(x) * x ** (p - 2))

    return PhasePair(f, g, W.a, W.b)


# ----------------------------------------------------------------------------
# two dimensional bound

@dataclass(frozen=True)
class Phase2D:
    f: Callable
    fx: Callable
    fy: Callable
    fxx: Callable
    fyy: Callable
    fxy: Callable


@dataclass(frozen=True)
class Amplitude2D:
    g: Callable
    gxy: Callable
    x_range: tuple
    y_range: tuple


def _tensor_nodes(lo: float, hi: float, freq: float, per_panel: int = 12):
    """Composite Gauss-Legendre nodes with roughly one panel per oscillation."""
    panels = max(16, int(math.ceil((hi - lo) * freq)))
    xg, wg = gauss_legendre(per_panel)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    return (mid + half * xg).ravel(), (half * wg).ravel()


def double_integral_bound(f2d: Phase2D, g2d: Amplitude2D, r1: float, r2: float,
                          hessian_const: float = 1.0, samples: int = 101) -> dict:
    (x0, x1), (y0, y1) = g2d.x_range, g2d.y_range
    sx, sy = np.meshgrid(np.linspace(x0, x1, samples), np.linspace(y0, y1, samples), indexing="ij")
    live = np.asarray(g2d.g(sx, sy)) != 0
    fxx, fyy, fxy = f2d.fxx(sx, sy), f2d.fyy(sx, sy), f2d.fxy(sx, sy)
    fxx, fyy, fxy = (np.broadcast_to(v, sx.shape) for v in (fxx, fyy, fxy))
    k = hessian_const
    if live.any():
        if np.any(fxx[live] < k * r1**2) or np.any(fyy[live] < k * r2**2) \
                or np.any(fxx[live] * fyy[live] - fxy[live] ** 2 < k * r1**2 * r2**2):
            raise HessianViolation("Hessian lower bounds fail inside the support of g")
    freq = float(np.max(np.abs(np.broadcast_to(f2d.fx(sx, sy), sx.shape)))
                 + np.max(np.abs(np.broadcast_to(f2d.fy(sx, sy), sx.shape)))) + 1.0
    xs, wx = _tensor_nodes(x0, x1, freq)
    ys, wy = _tensor_nodes(y0, y1, freq)
    if xs.size * ys.size > 50_000_000:
        raise BudgetExceeded("two dimensional quadrature grid too large")
    value = 0j
    var = 0.0
    for i in range(0, xs.size, 256):
        X, Y = np.meshgrid(xs[i:i + 256], ys, indexing="ij")
        Wt = np.outer(wx[i:i + 256], wy)
        G = np.broadcast_to(np.asarray(g2d.g(X, Y), dtype=complex), X.shape)
        value += complex(np.sum(Wt * G * np.exp(2j * np.pi * f2d.f(X, Y))))
        var += float(np.sum(Wt * np.abs(np.broadcast_to(g2d.gxy(X, Y), X.shape))))
    return {"value": value, "var_g": var, "bound": var / (r1 * r2)}


# ----------------------------------------------------------------------------
# Poisson summation

def fourier_transform(h: Callable, window: tuple, xi, nodes: int = 4096) -> np.ndarray:
    """h^(xi) = int h(x) e(-x xi) dx over the window by composite Gauss-Legendre."""
    lo, hi = window
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    cycles = (hi - lo) * float(np.max(np.abs(xi), initial=0.0))
    panels = max(nodes // 16, int(math.ceil(cycles / 2)))
    xg, wg = gauss_legendre(16)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    x, w = (mid + half * xg).ravel(), (half * wg).ravel()
    hx = np.asarray(h(x), dtype=complex) * w
    out = np.empty(len(xi), dtype=complex)
    step = max(1, 4_000_000 // x.size)
    for i in range(0, len(xi), step):
        blk = xi[i:i + step]
        out[i:i + step] = np.exp(-2j * np.pi * np.outer(blk, x)) @ hx
    return out


def poisson_check(h: Callable, M: int, shift: int, window: tuple,
                  h_hat: Optional[Callable] = None, decay_tol: float = 1e-13,
                  plateau_tol: float = 1e-11, max_terms: int = 100_000) -> dict:
    """Compare sum_{m = shift mod M} h(m) with (1/M) sum_n h^(n/M) e(n shift/M).

    ``window`` bounds the effective support of h.  The dual sum grows in blocks
    until a whole block of |h^| values falls below decay_tol * |h^(0)|, or (for a
    numerically transformed h) stops decaying below plateau_tol * |h^(0)|.
    """
    lo, hi = window
    k0 = math.ceil((lo - shift) / M)
    k1 = math.floor((hi - shift) / M)
    pts = shift + M * np.arange(k0, k1 + 1)
    lhs = complex(np.sum(np.asarray(h(pts.astype(float)), dtype=complex)))

    def hat(xi):
        return np.asarray(h_hat(xi) if h_hat is not None else fourier_transform(h, window, xi), dtype=complex)

    zero = complex(hat(np.array([0.0]))[0])
    total = zero / M
    floor = decay_tol * max(abs(zero), 1e-300)
    plateau = plateau_tol * max(abs(zero), 1e-300)
    prev = math.inf
    n = 1
    block = 64
    while True:
        ns = np.arange(n, n + block)
        vals_p = hat(ns / M)
        vals_m = hat(-ns / M)
        total += complex(np.sum(vals_p * np.exp(2j * np.pi * ns * shift / M)
                                + vals_m * np.exp(-2j * np.pi * ns * shift / M))) / M
        n += block
        peak = max(np.max(np.abs(vals_p)), np.max(np.abs(vals_m)))
        if peak < floor or (h_hat is None and peak < plateau and peak > 0.5 * prev):
            break
        prev = peak
        if n > max_terms:
            raise BudgetExceeded("dual Poisson sum did not decay")
        block = min(2 * block, 1024)
    return {"lhs": lhs, "rhs": total, "diff": abs(lhs - total), "terms": 2 * n - 1}
