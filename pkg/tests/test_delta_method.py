import pytest

from heckevoronoi.delta_method import DeltaParams, conductor_lowering_check, delta_eval
from heckevoronoi.errors import NotPrime


def test_examples():
    assert abs(delta_eval(DeltaParams(0, 7)) - 1.0) < 1e-12
    assert abs(delta_eval(DeltaParams(3, 7))) < 1e-9
    assert abs(delta_eval(DeltaParams(-12, 20))) < 1e-9


@pytest.mark.parametrize("Q", [5, 10, 20, 50])
def test_identity_grid(Q):
    for n in range(-50, 51):
        assert abs(delta_eval(DeltaParams(n, Q)) - (n == 0)) <= 1e-9, n


def test_sign_symmetry_and_q_independence():
    for n in range(1, 30):
        vals = [delta_eval(DeltaParams(n, Q)) for Q in (5, 10, 20)]
        assert abs(delta_eval(DeltaParams(-n, 10)) - vals[1]) < 1e-12
        assert max(vals) - min(vals) < 1e-9


@pytest.mark.parametrize("n", [997, -4000, 10_000])
def test_large_n(n):
    assert abs(delta_eval(DeltaParams(n, 10))) < 1e-9


def test_non_integer_q():
    assert abs(delta_eval(DeltaParams(0, 7.5)) - 1) < 1e-12
    assert abs(delta_eval(DeltaParams(4, 7.5))) < 1e-12


def test_smallest_q():
    # Q = 1: only q = 1, a = 2
    assert delta_eval(DeltaParams(0, 1)) == pytest.approx(1.0)


def test_invalid_q():
    with pytest.raises(ValueError):
        DeltaParams(0, 0.5)


def test_conductor_lowering():
    p = 7
    assert conductor_lowering_check(5, 5, p)
    assert conductor_lowering_check(5 + p, 5, p)
    assert conductor_lowering_check(6, 5, p)
    for k in range(-60, 61):
        assert conductor_lowering_check(11 + k, 11, p)
    with pytest.raises(NotPrime):
        conductor_lowering_check(1, 0, 9)
    with pytest.raises(NotPrime):
        conductor_lowering_check(1, 0, 2)
