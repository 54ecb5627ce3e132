import cmath
import math

import pytest
from gmpy2 import mpc

from decolab.errors import ConvergenceError, DegenerateError, DomainError
from decolab.hp import hp
from decolab.solvers import (MisiurewiczSpec, ParabolicSpec, cascade, divisors,
                             find_center_near, minimal_pair, moebius,
                             multiplier_at_misiurewicz, solve_misiurewicz,
                             solve_parabolic_root, solve_superattracting_center,
                             tune_misiurewicz, winding_number)
from decolab.dynamics import iterate

from conftest import Q_STAR, S1

C1 = "0.3626697754647427+0.6450273437137847i"


def close(a, b, tol):
    return abs(complex(hp(a)) - complex(hp(b))) < tol


def test_number_theory():
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert [moebius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]


@pytest.mark.parametrize("period, seed, expect", [
    (1, 0.1, 0),
    (2, -0.9, -1),
    (3, -1.7, -1.7548776662466927),
])
def test_centers(period, seed, expect):
    c = solve_superattracting_center(period, seed)
    assert close(c, expect, 1e-15)
    zs = iterate(c, 0, period).z
    assert abs(complex(zs[period])) < 1e-30
    for d in divisors(period)[:-1]:
        assert abs(complex(zs[d])) > 1e-30


def test_center_is_newton_fixed_point():
    c = solve_superattracting_center(5, "0.36+0.64i")
    again = solve_superattracting_center(5, c)
    assert abs(complex(again - c)) < 1e-30


def test_period_collapse():
    # at the period-1 center the period-2 solve lands on a divisor
    with pytest.raises((DegenerateError, ConvergenceError)):
        solve_superattracting_center(2, 0.0)


@pytest.mark.parametrize("l, k, seed, expect", [
    (2, 1, -1.9, -2),
    (2, 2, "0.1+1.1i", 1j),
])
def test_misiurewicz(l, k, seed, expect):
    c = solve_misiurewicz(MisiurewiczSpec(l, k), seed)
    assert close(c, expect, 1e-25)


def test_misiurewicz_non_minimal_rejected():
    # -2 also satisfies (3, 1); its minimal relation is (2, 1)
    with pytest.raises(DegenerateError):
        solve_misiurewicz(MisiurewiczSpec(3, 1), -2)


def test_minimal_pair_of_tuned_point():
    c1 = solve_misiurewicz(MisiurewiczSpec(16, 5), C1)
    assert minimal_pair(c1, 16, 5, 1e-20) == (16, 5)


@pytest.mark.parametrize("c, l, k, mu", [
    (-2, 2, 1, 4),
    ("i", 2, 2, 4 + 4j),
])
def test_multiplier(c, l, k, mu):
    assert close(multiplier_at_misiurewicz(c, MisiurewiczSpec(l, k)), mu, 1e-20)


def test_multiplier_rejects_non_misiurewicz():
    with pytest.raises(DomainError):
        multiplier_at_misiurewicz(0.1, MisiurewiczSpec(2, 1))


@pytest.mark.parametrize("spec, sc, sz, c, z", [
    (ParabolicSpec(1, 0, 1), 0.3, 0.6, 0.25, 0.5),
    (ParabolicSpec(1, 1, 2), -0.7, -0.4, -0.75, -0.5),
    (ParabolicSpec(1, 1, 3), "-0.1+0.6i", "-0.2+0.4i",
     complex(-1 / 8, 3 * math.sqrt(3) / 8), cmath.exp(2j * math.pi / 3) / 2),
])
def test_parabolic(spec, sc, sz, c, z):
    rc, rz = solve_parabolic_root(spec, sc, sz)
    assert close(rc, c, 1e-10) and close(rz, z, 1e-10)


def test_parabolic_spec_validation():
    with pytest.raises(DomainError):
        ParabolicSpec(1, 2, 4)


def test_tune_identity_and_real_example():
    assert close(tune_misiurewicz(0, 1, MisiurewiczSpec(2, 2), "i"), 1j, 1e-25)
    assert close(tune_misiurewicz(-1, 2, MisiurewiczSpec(2, 1), -2),
                 -1.5436890126920763, 1e-15)


def test_tune_requires_center():
    with pytest.raises(DomainError):
        tune_misiurewicz(-0.9, 2, MisiurewiczSpec(2, 1), -2)
    # a literal that is a center up to its printed digits is accepted
    assert close(tune_misiurewicz("-1.0000000000000001", 2, MisiurewiczSpec(2, 1), -2),
                 -1.5436890126920763, 1e-15)


def test_tune_period5_copy_reaches_c1():
    s5 = solve_superattracting_center(5, "0.36+0.64i")
    c1 = tune_misiurewicz(s5, 5, MisiurewiczSpec(4, 1),
                          "-0.1010963638456221+0.9562865108091415i")
    assert close(c1, C1, 1e-15)


def test_find_center_near():
    c, q = find_center_near(-0.99, 5)
    assert q == 2 and close(c, -1, 1e-25)
    c, q = find_center_near(-1.75, 5)
    assert q == 3 and close(c, -1.7548776662466927, 1e-15)


def test_find_center_near_s1():
    c, q = find_center_near(S1, 300)
    assert q == Q_STAR and close(c, S1, 1e-14)


def test_find_center_near_none():
    with pytest.raises(ConvergenceError):
        find_center_near(3.0, 5)


def test_misiurewicz_cascade_ratios():
    spec = MisiurewiczSpec(16, 5)
    c1 = solve_misiurewicz(spec, C1)
    mu = multiplier_at_misiurewicz(c1, spec)
    s1 = solve_superattracting_center(Q_STAR, S1)
    rec = cascade(c1, s1, Q_STAR, 5, 4, mu=mu)
    assert rec.error is None and len(rec.centers) == 4
    qs = [q for _, q in rec.centers]
    assert qs == [Q_STAR, Q_STAR + 5, Q_STAR + 10, Q_STAR + 15]
    for r in rec.ratios:
        assert abs(complex(r * mu) - 1) < 0.05


def test_inverse_linear_cascade():
    s = solve_superattracting_center(11, complex(-0.75, math.pi / 11))
    rec = cascade(-0.75, s, 11, 2, 8, first_ratio=11 / 13)
    assert rec.fitted_law == "inverse_linear"
    assert -1.1 <= rec.exponent <= -0.9


@pytest.mark.parametrize("tag, center, radius, n", [
    (("center", 1), 0, 0.1, 1),
    (("center", 2), -1, 0.1, 1),
    (("center", 2), -0.5, 1.0, 2),
    (("misiurewicz", 2, 1), -2, 0.05, 1),
])
def test_winding(tag, center, radius, n):
    assert winding_number(tag, center, radius) == n
    assert winding_number(tag, center, radius, samples=128) == n


def test_winding_callable_and_zero_on_contour():
    assert winding_number(lambda c: c * c * c, 0, 1) == 3
    with pytest.raises(DomainError):
        winding_number(("center", 1), 0.1, 0.1, samples=4, threshold=1e-20)
