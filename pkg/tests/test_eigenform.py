from math import gcd

import pytest

from stablelat.characters import DirichletChar
from stablelat.eigenform import (NonOrdinaryError, delta_expansion, eisenstein_congruence, lattice_count_from_Lp,
                                 p547_report, series_mul, weight_variation_scan)
from stablelat.errors import DomainError


def naive_delta(B):
    """q prod (1 - q^n)^24 by repeated multiplication by (1 - q^n)."""
    c = [0] * (B + 1)
    c[1] = 1
    for n in range(1, B + 1):
        for _ in range(24):
            for i in range(B, n - 1, -1):
                c[i] -= c[i - n]
    return c


def test_delta_small_values():
    t = delta_expansion(40)
    assert t[1] == 1 and t[2] == -24 and t[3] == 252
    assert t[6] == t[2] * t[3] == -6048
    assert t.coeffs == naive_delta(40)


def test_delta_multiplicative_and_hecke():
    t = delta_expansion(600)
    for m in range(2, 25):
        for n in range(2, 25):
            if gcd(m, n) == 1:
                assert t[m * n] == t[m] * t[n]
    for p in (2, 3, 5, 7, 11):
        # tau(p^2) = tau(p)^2 - p^11
        assert t[p * p] == t[p] ** 2 - p ** 11


def test_series_mul_signed():
    a = [3, -5, 0, 7]
    b = [-2, 1, 4]
    ref = [0] * 6
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            ref[i + j] += x * y
    assert series_mul(a, b, 6) == ref
    assert series_mul(a, b, 3) == ref[:3]


@pytest.mark.parametrize("p,m,count", [(3, 6, 7), (5, 3, 4), (7, 1, 2), (691, 1, 2)])
def test_congruence_table(p, m, count):
    rep = eisenstein_congruence(p, 2000)
    assert (rep.m, rep.count) == (m, count)
    assert rep.stable
    t = delta_expansion(2000)
    a = rep.a
    hi = p ** (m + 1)
    from sympy import primerange
    for l in primerange(2, 2001):
        if l != p:
            assert (t[l] - pow(l, a, p ** m) - pow(l, 11 - a, p ** m)) % p ** m == 0
    assert any((t[l] - pow(l, a, hi) - pow(l, 11 - a, hi)) % hi for l in rep.witnesses)


def test_congruence_exponents_known():
    # a = -610 at 3 and a = -30 at 5 (mod the reported modulus)
    r3 = eisenstein_congruence(3)
    assert (-610) % r3.modulus in r3.a_pair
    r5 = eisenstein_congruence(5)
    assert (-30) % r5.modulus in r5.a_pair
    assert eisenstein_congruence(691).a == 0


def test_irreducible_prime_gives_zero():
    rep = eisenstein_congruence(11)
    assert rep.m == 0 and rep.count == 1


def test_bound_too_small():
    with pytest.raises(DomainError):
        eisenstein_congruence(691, 100)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_non_ordinary_refused(p):
    with pytest.raises(NonOrdinaryError):
        lattice_count_from_Lp(p, 12, DirichletChar.omega_power(p, 11), form="delta")


def test_cross_method_691():
    chi = DirichletChar.omega_power(691, 11)
    res = lattice_count_from_Lp(691, 12, chi, form="delta")
    assert res.ord == 1
    assert res.count == eisenstein_congruence(691).count == 2
    assert lattice_count_from_Lp(691, 12 + 690, chi).count == 2
    assert lattice_count_from_Lp(691, 12, chi, hypothesis_mode="upper").label == "upper bound"


def test_scan_fixed_zeta_691():
    chi = DirichletChar.omega_power(691, 11)
    tab = weight_variation_scan(691, chi, "fixed-zeta", ns=(1, 2, 3))
    counts = [r["count"] for r in tab.rows]
    assert tab.checks["strictly_increasing"]
    assert counts[0] > 2


def test_scan_tail_691():
    chi = DirichletChar.omega_power(691, 11)
    tab = weight_variation_scan(691, chi, "tail", ks=[2, 4, 12], zetas=[(1, 1), (1, 2), (1, 345)])
    assert {r["count"] for r in tab.rows} == {2}
    assert tab.checks["constant"] and tab.checks["bound_respected"] and tab.checks["lemma_consistent"]


def test_scan_tail_cross_check_37():
    # an irregular pair small enough for the direct cyclotomic L-value
    chi = DirichletChar.omega_power(37, 31)
    tab = weight_variation_scan(37, chi, "tail", ks=[2, 4], zetas=[(1, 1), (1, 3)], crosscheck=True)
    for r in tab.rows:
        assert r["count"] == r["count_direct"] == 2


def test_scan_fixed_k_and_regular():
    chi = DirichletChar.omega_power(691, 11)
    tab = weight_variation_scan(691, chi, "fixed-k", ks=[12], zetas=[(0, 0), (1, 1)])
    assert [r["count"] for r in tab.rows] == [2, 2]
    tab = weight_variation_scan(5, DirichletChar.omega_power(5, 1), "fixed-zeta", ns=(1, 2, 3))
    assert tab.checks["bounded_constant"] and tab.rows[0]["count"] == 1
    with pytest.raises(DomainError):
        weight_variation_scan(5, DirichletChar.omega_power(5, 1), "sideways")


def test_p547_window():
    rep = p547_report()
    assert rep["lambda"] == 1 and rep["mu"] == "0"
    assert rep["zero_valuations"] == [1]
    assert rep["count_window"] == [2, 3]
