"""Hecke L-series for Re s > 1, an Euler-product oracle, smoothed windows and a growth scan."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats

from .arith import divisor_counts, kronecker_symbol, primes_upto
from .characters import CoefficientSeries, HeckeCharacter, lambda_coefficients
from .errors import AbscissaTooSmall
from .oscillatory import SmoothBump

SERIES_MIN_SIGMA = 1.2
EULER_MIN_SIGMA = 1.5
DEFAULT_TERMS = 200_000
SCAN_EXPONENT = 1.05


@dataclass(frozen=True, eq=False)
class LSeriesEval:
    psi: HeckeCharacter
    s: complex
    terms: int
    value: complex
    tail_bound: float


def _coeffs(psi: HeckeCharacter, n: int, lam: Optional[CoefficientSeries]) -> np.ndarray:
    if lam is not None and lam.N_max >= n:
        return lam.values[: n + 1]
    return lambda_coefficients(psi, n).values


def dirichlet_series(psi: HeckeCharacter, s: complex, terms: int = DEFAULT_TERMS,
                     lam: Optional[CoefficientSeries] = None) -> LSeriesEval:
    s = complex(s)
    sigma = s.real
    if sigma < SERIES_MIN_SIGMA:
        raise AbscissaTooSmall(f"Re s = {sigma} < {SERIES_MIN_SIGMA}")
    vals = _coeffs(psi, terms, lam)
    n = np.arange(1, terms + 1, dtype=float)
    value = complex(np.sum(vals[1:] * np.exp(-s * np.log(n))))
    # |lambda(n)| <= d(n), so the tail is at most zeta(sigma)^2 minus the head
    d = divisor_counts(terms)[1:]
    head = math.fsum(d / n**sigma)
    tail = max(float(special.zeta(sigma)) ** 2 - head, 0.0)
    return LSeriesEval(psi, s, terms, value, tail)


def local_factor_coeffs(psi: HeckeCharacter, ell: int, lam_ell: complex) -> tuple[complex, complex]:
    """(a1, a2) with local factor 1/(1 - a1 x + a2 x^2), x = ell^-s.

    a2 = chi_K(ell) chi(ell mod p): psi((ell)) for split ell, -psi((ell)) for
    inert ell, and 0 when ell is ramified or equals the conductor prime.
    """
    chiK = kronecker_symbol(psi.ctx.disc, ell)
    return complex(lam_ell), chiK * complex(psi.chi(ell))


def euler_product(psi: HeckeCharacter, s: complex, prime_bound: int,
                  lam: Optional[CoefficientSeries] = None) -> complex:
    s = complex(s)
    if s.real < EULER_MIN_SIGMA:
        raise AbscissaTooSmall(f"Re s = {s.real} < {EULER_MIN_SIGMA}")
    if prime_bound < 2:
        return 1.0 + 0j
    vals = _coeffs(psi, prime_bound, lam)
    P = primes_upto(prime_bound)
    x = np.exp(-s * np.log(P.astype(float)))
    chiK = np.array([kronecker_symbol(psi.ctx.disc, int(ell)) for ell in P])
    a2 = chiK * psi.chi(P)
    logs = -np.log(1 - vals[P] * x + a2 * x * x)
    return complex(np.exp(np.sum(logs)))


def regenerate_lambda(psi: HeckeCharacter, n_max: int, lam: Optional[CoefficientSeries] = None) -> np.ndarray:
    """lambda(n) rebuilt from lambda at primes through the local factors."""
    base = _coeffs(psi, n_max, lam)
    out = np.zeros(n_max + 1, dtype=complex)
    out[1] = 1
    spf = np.zeros(n_max + 1, dtype=np.int64)
    for ell in primes_upto(n_max):
        ell = int(ell)
        block = spf[ell::ell]
        block[block == 0] = ell
    for n in range(2, n_max + 1):
        ell = int(spf[n])
        k, rest = 0, n
        while rest % ell == 0:
            rest //= ell
            k += 1
        if rest > 1:
            out[n] = out[rest] * out[n // rest]
            continue
        a1, a2 = local_factor_coeffs(psi, ell, base[ell])
        # prime powers: c_k = a1 c_{k-1} - a2 c_{k-2}
        prev, cur = 1.0 + 0j, a1
        for _ in range(k - 1):
            prev, cur = cur, a1 * cur - a2 * prev
        out[n] = cur
    return out


@dataclass(frozen=True, eq=False)
class SmoothedWindow:
    psi: Optional[HeckeCharacter]
    t: float
    N: float
    V: SmoothBump
    value: complex


def smoothed_window(psi: HeckeCharacter, t: float, N: float, V: Optional[SmoothBump] = None,
                    lam: Optional[np.ndarray] = None) -> SmoothedWindow:
    """S(N) = sum_n lambda(n) n^{-it} V(n/N)."""
    V = V or SmoothBump()
    a, b = V.support
    top = int(math.floor(b * N))
    bottom = max(1, int(math.ceil(a * N)))
    if top < bottom:
        return SmoothedWindow(psi, t, N, V, 0j)
    vals = lam if lam is not None else lambda_coefficients(psi, top).values
    n = np.arange(bottom, top + 1)
    w = vals[bottom: top + 1] * np.exp(-1j * t * np.log(n)) * V(n / N)
    return SmoothedWindow(psi, t, N, V, complex(np.sum(w)))


@dataclass(frozen=True)
class ScanRow:
    t: float
    N_at_sup: float
    sup_ratio: float


@dataclass(frozen=True)
class GrowthScan:
    rows: tuple
    exponent: Optional[float]
    stderr: Optional[float]
    ci: Optional[tuple]
    label: str = "EXPLORATORY"
    policy: str = f"X = (t p)^{SCAN_EXPONENT}, dyadic N = X / 2^j >= 1"
    control: bool = False
    notes: dict = field(default_factory=dict)


def scan_cutoff(t: float, p: int) -> float:
    return (max(abs(t), 1.0) * p) ** SCAN_EXPONENT


def growth_scan(psi: HeckeCharacter, t_grid: Sequence[float], V: Optional[SmoothBump] = None,
                control: bool = False, level: float = 0.95) -> GrowthScan:
    """For each t, sup over dyadic N <= X of |S(N)| / sqrt(N), then a log-log slope fit.

    control=True replaces lambda by 1 and drops the n^{-it} twist, so that
    S(N) ~ N and the fitted slope should be SCAN_EXPONENT / 2.
    """
    V = V or SmoothBump()
    t_grid = [float(t) for t in t_grid]
    if not t_grid:
        return GrowthScan((), None, None, None, control=control)
    p = psi.p
    Xmax = max(scan_cutoff(t, p) for t in t_grid)
    top = int(math.floor(V.b * Xmax)) + 1
    lam = np.ones(top + 1, dtype=complex) if control else lambda_coefficients(psi, top).values
    rows = []
    for t in t_grid:
        X = scan_cutoff(t, p)
        best, bestN = 0.0, X
        N = X
        while N >= 1:
            S = smoothed_window(psi, 0.0 if control else t, N, V, lam).value
            ratio = abs(S) / math.sqrt(N)
            if ratio > best:
                best, bestN = ratio, N
            N /= 2
        rows.append(ScanRow(t, bestN, best))
    exponent = stderr = ci = None
    ts = np.array([r.t for r in rows])
    ys = np.array([r.sup_ratio for r in rows])
    ok = (ts > 0) & (ys > 0)
    if ok.sum() >= 3 and np.ptp(np.log(ts[ok])) > 0:
        fit = stats.linregress(np.log(ts[ok]), np.log(ys[ok]))
        exponent, stderr = float(fit.slope), float(fit.stderr)
        half = stats.t.ppf(0.5 + level / 2, ok.sum() - 2) * stderr
        ci = (float(exponent - half), float(exponent + half))
    return GrowthScan(tuple(rows), exponent, stderr, ci, control=control)
