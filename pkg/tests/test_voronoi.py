import math

import numpy as np
import pytest
from conftest import hecke

from heckevoronoi.errors import BudgetExceeded, NotCoprime, OracleTooLarge, UnsupportedField
from heckevoronoi.gauss_sums import arithmetic_part_brute, arithmetic_part_closed
from heckevoronoi.oscillatory import SmoothBump
from heckevoronoi.quadfield import IdealLatticeBasis, split_root
from heckevoronoi.voronoi import (VoronoiInstance, analytic_part, class_decomposition, class_sum, direct_sum,
                                  dual_sum, poisson_oracle, support_points, tail_estimate, trivial_bound, verify)


def instance(psi, ell, q, m, N, **kw):
    return VoronoiInstance(psi, m, q, N, IdealLatticeBasis(ell, split_root(psi.ctx, ell)), **kw)


def oracle_points(inst, count, rho=200.0):
    """Support points with nonzero arithmetic part, nearest the origin first."""
    P = inst.arith_params()
    c, f = support_points(P, rho)
    n = c * c * inst.D + f * f
    A = arithmetic_part_closed(P, c, f)
    keep = (n > 0) & (np.abs(A) > 0)
    c, f, n = c[keep], f[keep], n[keep]
    order = np.lexsort((f, c, n))[:count]
    return list(zip(c[order].tolist(), f[order].tolist()))


# ---------------------------------------------------------------- left side

@pytest.mark.parametrize("D,p,k,r", [(1, 13, 2, 2), (5, 3, 1, 1)])
@pytest.mark.parametrize("N", [20, 50])
@pytest.mark.parametrize("q", [1, 3, 4])
def test_class_decomposition(D, p, k, r, N, q):
    psi = hecke(D, p, k, r)
    ell = 17 if D == 1 else 7
    inst = instance(psi, ell, q, 1, N)
    assert abs(direct_sum(inst) - class_decomposition(inst)) < 1e-10


def test_class_decomposition_extended_character():
    psi = hecke(5, 3, 1, 1, extension=1)
    inst = instance(psi, 7, 4, 3, 50)
    assert abs(direct_sum(inst) - class_decomposition(inst)) < 1e-10


def test_class_sum_golden(psi_gauss):
    inst = instance(psi_gauss, 5, 3, 1, 40)
    assert abs(class_decomposition(inst) - (5.719326442553336 - 0.9879551427843847j)) < 1e-12
    assert abs(class_sum(inst) - (-23.185752079810072 + 1.1869733037795918j)) < 1e-12


def test_empty_window(psi_gauss):
    inst = instance(psi_gauss, 5, 3, 1, 0.4)
    assert direct_sum(inst) == 0
    assert class_decomposition(inst) == 0


def test_instance_validation(psi_gauss):
    with pytest.raises(NotCoprime):
        instance(psi_gauss, 5, 6, 3, 100)
    with pytest.raises(NotCoprime):
        instance(psi_gauss, 5, 10, 1, 100)
    with pytest.raises(ValueError):
        VoronoiInstance(psi_gauss, 1, 3, 100, IdealLatticeBasis(5, 1))
    with pytest.raises(ValueError):
        instance(psi_gauss, 5, 0, 1, 100)


# ---------------------------------------------------------------- dual side, term level

@pytest.mark.parametrize("D,p,k,r,ell,q,m", [(1, 13, 2, 2, 5, 3, 1), (1, 13, 2, 2, 5, 13, 2),
                                             (5, 3, 1, 1, 7, 4, 3), (5, 3, 1, 1, 7, 6, 1)])
def test_term_matches_poisson_oracle(D, p, k, r, ell, q, m):
    inst = instance(hecke(D, p, k, r), ell, q, m, 2000)
    P = inst.arith_params()
    for c, f in oracle_points(inst, 5):
        ref = poisson_oracle(inst, c, f)
        got = arithmetic_part_closed(P, c, f) * analytic_part(inst, c, f)
        assert abs(got - ref) <= 1e-8 * abs(ref), (c, f)


def test_poisson_oracle_vanishes_off_support(psi_gauss):
    inst = instance(psi_gauss, 5, 3, 1, 2000)
    assert poisson_oracle(inst, 1, 0) == 0
    assert abs(arithmetic_part_brute(inst.arith_params(), 1, 0)) < 1e-14


def test_oracle_cap(psi_gauss):
    inst = instance(psi_gauss, 89, 4, 1, 100)
    with pytest.raises(OracleTooLarge):
        poisson_oracle(inst, 1, 1)


def test_term_symmetry(psi_d5):
    inst = instance(psi_d5, 7, 4, 3, 2000)
    P = inst.arith_params()
    for c, f in oracle_points(inst, 10):
        t1 = arithmetic_part_closed(P, c, f) * analytic_part(inst, c, f)
        t2 = arithmetic_part_closed(P, -c, -f) * analytic_part(inst, -c, -f)
        assert abs(t1 - t2) <= 1e-13 * max(abs(t1), 1e-300)


def test_analytic_part_basics(psi_gauss):
    inst = instance(psi_gauss, 5, 3, 1, 2000)
    assert analytic_part(inst, 0, 0) == 0
    r = psi_gauss.r
    a, b = analytic_part(inst, 3, 7), analytic_part(inst, -3, -7)
    # phi shifts by pi under (c, f) -> (-c, -f)
    assert abs(b - a * (-1) ** r) < 1e-13 * abs(a)
    vec = analytic_part(inst, np.array([3, 5]), np.array([7, 1]))
    assert abs(vec[0] - a) < 1e-15 * abs(a)
    # rapid decay once X passes the oscillation scale
    far = [abs(analytic_part(inst, 0, f)) for f in (400, 800, 1600)]
    assert far[0] > far[1] > far[2]


def test_support_points_cover_nonzero_terms(psi_d5):
    inst = instance(psi_d5, 7, 4, 3, 2000)
    P = inst.arith_params()
    sc, sf = support_points(P, 40)
    support = set(zip(sc.tolist(), sf.tolist()))
    for c in range(-17, 18):
        for f in range(-40, 41):
            if c * c * 5 + f * f <= 1600 and abs(arithmetic_part_brute(P, c, f)) > 1e-12:
                assert (c, f) in support


# ---------------------------------------------------------------- global identity

@pytest.mark.parametrize("D,p,k,r,ell,q,m", [(5, 3, 1, 1, 7, 4, 3), (1, 13, 2, 2, 5, 13, 2)])
def test_verify(D, p, k, r, ell, q, m):
    inst = instance(hecke(D, p, k, r), ell, q, m, 2000)
    rep = verify(inst)
    assert rep.rel_err is not None and rep.rel_err <= 1e-4
    assert rep.abs_err <= max(1e-4 * abs(rep.lhs), 10 * rep.truncation_tail_estimate)
    bad = verify(inst, wrong_root=True)
    assert bad.rel_err >= 0.1


def test_truncation_monotone(psi_d5):
    base = instance(psi_d5, 7, 4, 3, 2000)
    lhs = class_sum(base)
    errs = []
    for rho in (200, 400, 700, 1100):
        inst = instance(psi_d5, 7, 4, 3, 2000, radius=rho)
        errs.append(abs(lhs - dual_sum(inst).value))
    for a, b in zip(errs, errs[1:]):
        assert b <= a + 1e-9
    assert errs[-1] < 1e-6 * abs(lhs)


def test_tail_estimate_decreasing(psi_d5):
    inst = instance(psi_d5, 7, 4, 3, 2000)
    tails = [tail_estimate(inst, rho) for rho in (100, 300, 900, 1500)]
    assert all(a >= b for a, b in zip(tails, tails[1:]))
    assert tails[0] > 0
    assert trivial_bound(inst) == pytest.approx(math.pi * 2000 / math.sqrt(5))


def test_dual_sum_deterministic(psi_d5):
    inst = instance(psi_d5, 7, 4, 3, 2000, radius=600)
    assert dual_sum(inst).value == dual_sum(inst).value


def test_budget_exceeded(psi_gauss):
    inst = instance(psi_gauss, 5, 3, 1, 2000, radius=5000, max_terms=1000)
    with pytest.raises(BudgetExceeded):
        dual_sum(inst)


def test_unsupported_fields():
    psi = hecke(3, 7, 1, 1)
    inst = instance(psi, 13, 1, 1, 500)
    with pytest.raises(UnsupportedField):
        dual_sum(inst)
    psi2 = hecke(2, 3, 1, 1)
    inst2 = instance(psi2, 11, 1, 1, 3000)
    with pytest.raises(UnsupportedField):
        dual_sum(inst2)


@pytest.mark.slow
def test_experimental_minus_d_two_mod_four():
    psi = hecke(2, 3, 1, 1)
    inst = instance(psi, 11, 1, 1, 3000, experimental=True)
    rep = verify(inst)
    assert rep.rel_err <= 1e-4
    P = inst.arith_params()
    checked = 0
    for c in range(0, 8):
        for f in range(1, 40):
            A = arithmetic_part_brute(P, c, f)
            if abs(A) < 1e-12:
                continue
            ref = poisson_oracle(inst, c, f)
            assert abs(A * analytic_part(inst, c, f) - ref) <= 1e-8 * max(abs(ref), 1.0)
            checked += 1
            if checked == 3:
                return
    pytest.fail("no support points found")


def test_custom_bump(psi_d5):
    V = SmoothBump(a=1.0, b=3.0)
    inst = instance(psi_d5, 7, 4, 3, 2000, V=V)
    rep = verify(inst)
    assert rep.rel_err <= 1e-4
