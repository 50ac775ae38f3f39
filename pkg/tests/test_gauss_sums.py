import math
import os

import numpy as np
import pytest

from heckevoronoi.errors import EvenInput, NotCoprime, OracleTooLarge
from heckevoronoi.gauss_sums import (
    ARITH_BRUTE_MAX,
    ArithPartParams,
    GaussSumParams,
    arithmetic_part_brute,
    arithmetic_part_closed,
    epsilon_factor,
    gauss_factorized,
    gauss_grid_check,
    quadratic_gauss_brute,
    quadratic_gauss_closed,
)
from heckevoronoi.quadfield import split_root
from heckevoronoi.voronoi import support_points

from conftest import hecke


def g_brute(a, b, c):
    return quadratic_gauss_brute(GaussSumParams(a, b, c))


def g_closed(a, b, c):
    return quadratic_gauss_closed(GaussSumParams(a, b, c))


def test_epsilon():
    assert epsilon_factor(5) == 1
    assert epsilon_factor(3) == 1j
    assert epsilon_factor(-1) == 1j
    with pytest.raises(EvenInput):
        epsilon_factor(4)


def test_brute_examples():
    assert abs(g_brute(1, 0, 3) - 1j * math.sqrt(3)) < 1e-12
    assert abs(g_brute(1, 0, 6)) < 1e-12
    assert abs(g_brute(1, 1, 4)) < 1e-12


def test_closed_examples():
    assert abs(g_closed(2, 0, 5) + math.sqrt(5)) < 1e-12
    assert g_closed(1, 0, 6) == 0
    assert abs(g_closed(1, 2, 8) - 4) < 1e-12
    assert abs(g_closed(7, 0, 15) + 1j * math.sqrt(15)) < 1e-12
    assert g_closed(5, 3, 12) == 0
    with pytest.raises(NotCoprime):
        g_closed(2, 1, 4)


def test_closed_equals_brute_up_to_200():
    rows = gauss_grid_check(200)
    assert [r[0] for r in rows] == list(range(1, 201))
    assert sum(r[1] for r in rows) == sum(sum(1 for a in range(1, c + 1) if math.gcd(a, c) == 1) * c
                                          for c in range(1, 201))
    assert max(r[2] for r in rows) <= 1e-9


def test_closed_scalar_matches_brute_random():
    rng = np.random.default_rng(3)
    for _ in range(300):
        c = int(rng.integers(1, 300))
        a = int(rng.integers(-1000, 1000))
        if math.gcd(a, c) != 1:
            continue
        b = int(rng.integers(-1000, 1000))
        assert abs(g_closed(a, b, c) - g_brute(a, b, c)) < 1e-9


def test_odd_modulus_size():
    for c in range(1, 120, 2):
        for a in range(1, c):
            if math.gcd(a, c) == 1:
                assert abs(abs(g_closed(a, 0, c)) - math.sqrt(c)) < 1e-10


@pytest.mark.parametrize("k", [1, 2, 3])
def test_two_adic_factorization(k):
    for odd in (1, 3, 5, 7, 15):
        c = 2**k * odd
        for a in range(1, c, 2):
            if math.gcd(a, c) != 1:
                continue
            for b in range(0, c, 3):
                assert abs(gauss_factorized(GaussSumParams(a, b, c), k) - g_brute(a, b, c)) < 1e-9


def test_brute_cap():
    with pytest.raises(OracleTooLarge):
        g_brute(1, 0, 10**6 + 1)


# ----------------------------------------------------------------------------
# arithmetic part

GRIDS = {
    # (D, p, k, r, ell): q values covering q odd / 2 mod 4 / 0 mod 4, p | q, and g = gcd(q, D) > 1
    (1, 13, 2, 2, 5): [1, 3, 9, 2, 6, 4, 8, 12, 13, 39, 26, 52],
    (5, 3, 1, 1, 7): [1, 5, 2, 10, 4, 20, 3, 15, 6, 12, 9],
    (1, 5, 1, 3, 13): [1, 3, 4, 5, 8, 2, 6],
}


def _params(D, p, k, r, ell, q, m):
    psi = hecke(D, p, k, r)
    return ArithPartParams(D, p, psi.d, psi.chi, ell, split_root(psi.ctx, ell), q, m)


def _m_values(p, q):
    out = [m for m in (1, -1, 2, -11) if math.gcd(m, q) == 1]
    if q % p:
        out.append(p)  # p | m
    return out


@pytest.mark.parametrize("key", list(GRIDS))
def test_arith_closed_equals_brute(key):
    D, p, k, r, ell = key
    grid = np.arange(-20, 21)
    c, f = (x.ravel() for x in np.meshgrid(grid, grid, indexing="ij"))
    branches = set()
    for q in GRIDS[key]:
        for m in _m_values(p, q):
            P = _params(D, p, k, r, ell, q, m)
            brute = arithmetic_part_brute(P, c, f)
            closed = arithmetic_part_closed(P, c, f)
            assert np.max(np.abs(brute - closed)) <= 1e-8, (q, m)
            branches.add((P.branch, P.delta))
    assert {b for b, _ in branches} >= {"q_odd", "q_2mod4", "q_0mod4"}


def test_all_six_branches_and_delta_covered():
    seen = set()
    for key, qs in GRIDS.items():
        D, p, k, r, ell = key
        for q in qs:
            for m in _m_values(p, q):
                P = _params(D, p, k, r, ell, q, m)
                seen.add((P.branch, P.delta))
    assert {b for b, _ in seen} == {"q_odd", "q_2mod4", "q_0mod4", "pq_odd", "pq_2mod4", "pq_0mod4"}
    assert {d for _, d in seen} == {0, 1}


@pytest.mark.parametrize("key,q,m", [((1, 13, 2, 2, 5), 3, 1), ((1, 13, 2, 2, 5), 13, 2),
                                     ((5, 3, 1, 1, 7), 10, 3), ((5, 3, 1, 1, 7), 15, 1)])
def test_arith_support(key, q, m):
    P = _params(*key, q, m)
    grid = np.arange(-70, 71)
    c, f = (x.ravel() for x in np.meshgrid(grid, grid, indexing="ij"))
    vals = arithmetic_part_brute(P, c, f)
    nz = np.abs(vals) > 1e-12
    n = c * c * P.D + f * f
    mod = P.ell * P.g * (P.p * P.p if P.p_divides_q else P.p)
    assert nz.any() and np.all(n[nz] % mod == 0)
    assert np.all((c[nz] * P.d_ell - f[nz]) % P.ell == 0)
    assert np.all(f[nz] % P.g == 0)
    if P.p_divides_q:
        assert np.all(c[nz] % P.p == 0)
    # the closed-form support lattice contains every nonzero point
    sc, sf = support_points(P, math.sqrt(P.D + 1) * 71)
    pts = set(zip(sc.tolist(), sf.tolist()))
    assert all((int(a), int(b)) in pts for a, b in zip(c[nz], f[nz]))


def test_arith_golden():
    P = _params(1, 13, 2, 2, 5, 3, 1)
    golden = {(-25, 5): -0.016130050446971748 + 0.009038905600706776j,
              (-24, -3): -0.01589294709610738 - 0.009449580651048697j,
              (-23, -11): 0.00023710335086436795 - 0.01848848625175547j}
    for (c, f), v in golden.items():
        assert abs(arithmetic_part_brute(P, c, f) - v) < 1e-12
        assert abs(arithmetic_part_closed(P, c, f) - v) < 1e-12
    assert arithmetic_part_closed(P, 1, 1) == 0


def test_pq_prefactor_variant_disagrees():
    """The p | q branch needs chibar(-2 m d); chibar(-4 m d) misses the oracle by chi(2)."""
    P = _params(1, 13, 2, 2, 5, 39, 2)
    c, f = support_points(P, 400)
    brute = arithmetic_part_brute(P, c, f)
    closed = arithmetic_part_closed(P, c, f)
    live = np.abs(brute) > 1e-12
    assert live.sum() >= 4
    chibar = np.conj(P.chi.values)
    p, m, d = P.p, P.m, P.d
    variant = closed * chibar[(-4 * m * d) % p] / chibar[(-2 * m * d) % p]
    assert np.max(np.abs(closed[live] - brute[live])) < 1e-10
    assert np.min(np.abs(variant[live] - brute[live]) / np.abs(brute[live])) > 0.1


def test_arith_param_validation():
    with pytest.raises(NotCoprime):
        _params(1, 13, 2, 2, 5, 4, 2)
    with pytest.raises(NotCoprime):
        _params(1, 13, 2, 2, 5, 5, 1)


def test_arith_oracle_cap():
    assert ARITH_BRUTE_MAX == int(os.environ.get("HV_ARITH_ORACLE_MAX", "4000"))
    P = _params(1, 13, 2, 2, 5, 3 * 7 * 11, 1)
    with pytest.raises(OracleTooLarge):
        arithmetic_part_brute(P, 1, 1)
