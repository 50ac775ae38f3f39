import math

import numpy as np
import pytest
from conftest import hecke
from scipy import special

from heckevoronoi.arith import divisor_counts, kronecker_symbol, primes_upto
from heckevoronoi.characters import lambda_coefficients
from heckevoronoi.errors import AbscissaTooSmall
from heckevoronoi.lfunc import (dirichlet_series, euler_product, growth_scan, local_factor_coeffs,
                                regenerate_lambda, scan_cutoff, smoothed_window)
from heckevoronoi.oscillatory import SmoothBump

CHARS = [(1, 13, 2, 2), (5, 3, 1, 1), (3, 7, 1, 1)]


@pytest.fixture(scope="module", params=CHARS, ids=["D1", "D5", "D3"])
def table(request):
    psi = hecke(*request.param)
    return psi, lambda_coefficients(psi, 200_000)


@pytest.mark.parametrize("s", [2, 2 + 5j, 3 - 2j])
def test_series_matches_euler(table, s):
    psi, lam = table
    series = dirichlet_series(psi, s, 200_000, lam=lam)
    prod = euler_product(psi, s, 200_000, lam=lam)
    assert abs(series.value - prod) / abs(prod) <= max(series.tail_bound, 1e-6)
    assert abs(series.value - prod) / abs(prod) <= 1e-6


def test_series_majorant(psi_gauss):
    v = dirichlet_series(psi_gauss, 2, 5000)
    assert abs(v.value) <= special.zeta(2) ** 2
    n = np.arange(5001, 2_000_001, dtype=float)
    true_tail = float(np.sum(divisor_counts(2_000_000)[5001:] / n**2))
    assert v.tail_bound >= true_tail


def test_abscissa():
    psi = hecke(1, 13, 2, 2)
    with pytest.raises(AbscissaTooSmall):
        dirichlet_series(psi, 1.1, 100)
    with pytest.raises(AbscissaTooSmall):
        euler_product(psi, 1.3, 100)
    assert euler_product(psi, 2, 1) == 1


def test_euler_prime_bound_consistency(table):
    psi, lam = table
    a = euler_product(psi, 2, 10_000, lam=lam)
    b = euler_product(psi, 2, 100_000, lam=lam)
    assert abs(a - b) / abs(b) <= 1e-6


def test_inert_only_product():
    psi = hecke(1, 13, 2, 2)
    inert = [int(l) for l in primes_upto(60) if kronecker_symbol(psi.ctx.disc, int(l)) == -1]
    lam = lambda_coefficients(psi, 10**6).values
    s = 1.7 + 1j
    prod = 1.0 + 0j
    for l in inert:
        a1, a2 = local_factor_coeffs(psi, l, lam[l])
        assert a1 == 0
        prod /= 1 + a2 * l ** (-2 * s)
    # series over n whose prime factors are inert primes below 60
    smooth = [1]
    for l in inert:
        smooth = [n * l**k for n in smooth for k in range(0, 12) if n * l**k <= 10**6]
    total = sum(lam[n] * n ** (-s) for n in smooth)
    assert abs(total - prod) < 1e-8


@pytest.mark.parametrize("D,p,k,r", CHARS)
def test_regenerated_lambda(D, p, k, r):
    psi = hecke(D, p, k, r)
    lam = lambda_coefficients(psi, 500).values
    assert np.max(np.abs(regenerate_lambda(psi, 500) - lam)) <= 1e-10


def test_local_factor_square_term(psi_gauss):
    lam = lambda_coefficients(psi_gauss, 10_000).values
    for l in primes_upto(100):
        l = int(l)
        a1, a2 = local_factor_coeffs(psi_gauss, l, lam[l])
        # lambda(l^2) = a1^2 - a2 in every splitting type
        assert abs(a1 * a1 - a2 - lam[l * l]) < 1e-12
        if l == 2 or l == psi_gauss.p:
            assert a2 == 0


def test_smoothed_window_definition(psi_gauss):
    V = SmoothBump()
    lam = lambda_coefficients(psi_gauss, 20).values
    ref = sum(lam[n] * V(n / 10) for n in range(10, 21))
    w = smoothed_window(psi_gauss, 0.0, 10, V)
    assert abs(w.value - ref) < 1e-14
    assert abs(w.value - (-0.9536012992759564 - 0.34775626815368166j)) < 1e-12


def test_smoothed_window_bound_and_linearity(psi_gauss):
    V1, V2 = SmoothBump(), SmoothBump(normalization=2.5)
    N, t = 300.0, 17.0
    d = divisor_counts(600)
    n = np.arange(1, 601)
    assert abs(smoothed_window(psi_gauss, t, N, V1).value) <= float(np.sum(d[1:] * V1(n / N)))

    class Sum(SmoothBump):
        def __call__(self, x):
            return V1(x) + V2(x)

    both = smoothed_window(psi_gauss, t, N, Sum()).value
    assert abs(both - smoothed_window(psi_gauss, t, N, V1).value - smoothed_window(psi_gauss, t, N, V2).value) < 1e-12


def test_empty_window(psi_gauss):
    assert smoothed_window(psi_gauss, 1.0, 0.3).value == 0


def test_scan_empty_grid(psi_gauss):
    out = growth_scan(psi_gauss, [])
    assert out.rows == () and out.exponent is None and out.label == "EXPLORATORY"


def test_scan_control_reproduces_linear_growth(psi_gauss):
    out = growth_scan(psi_gauss, np.geomspace(2, 100, 12), control=True)
    lo, hi = out.ci
    assert lo <= 0.525 <= hi
    denser = growth_scan(psi_gauss, np.geomspace(2, 100, 24), control=True)
    assert abs(denser.exponent - out.exponent) <= 0.05


def test_scan_rows(psi_gauss):
    out = growth_scan(psi_gauss, [5.0, 20.0, 80.0])
    assert [r.t for r in out.rows] == [5.0, 20.0, 80.0]
    for row in out.rows:
        assert 1 <= row.N_at_sup <= scan_cutoff(row.t, psi_gauss.p)
        assert row.sup_ratio > 0
    assert out.exponent is not None and math.isfinite(out.stderr)
