from fractions import Fraction
from math import comb

import pytest

from stablelat.characters import DirichletChar, parse_character
from stablelat.errors import DomainError, ParityError
from stablelat.lvalues import (_CACHE, _akiyama_tanigawa, bernoulli_number, classical_L_negative,
                               generalized_bernoulli, kubota_leopoldt, lp_valuation)
from stablelat.padic import PadicScalar, u_pow_mod, vp


def recurrence_bernoulli(n):
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(comb(m + 1, j) * B[j] for j in range(m)) / (m + 1))
    return B


def test_bernoulli_against_recurrence():
    ref = recurrence_bernoulli(40)
    assert [bernoulli_number(k) for k in range(41)] == ref
    assert bernoulli_number(12) == Fraction(-691, 2730)
    assert bernoulli_number(1) == Fraction(-1, 2)
    assert bernoulli_number(12).numerator % 691 == 0


def test_cache_transparency():
    before = bernoulli_number(30)
    _CACHE.clear()
    assert bernoulli_number(30) == before == _akiyama_tanigawa(30)


def test_generalized_bernoulli_examples():
    p = 691
    b = generalized_bernoulli(12, DirichletChar.trivial(p), 6)
    assert b.agrees(PadicScalar(p, Fraction(-691, 2730), 6)) and b.valuation() == 1
    odd = DirichletChar.omega_power(7, 1)
    assert generalized_bernoulli(4, odd, 5).is_zero()
    # omega^2 at p = 5 is the quadratic character of conductor 5; B_{2,chi_5} = 4/5
    b2 = generalized_bernoulli(2, DirichletChar.omega_power(5, 2))
    assert b2 == Fraction(4, 5)
    assert vp(b2 / 2, 5) == -1
    assert generalized_bernoulli(0, odd) == 0


def test_direct_sum_definition():
    chi = DirichletChar.kronecker_char(5, -4)
    f = chi.conductor
    direct = Fraction(f) ** 2 * sum(
        (1 if chi.exponents(a) == (0, 0) else -1) * _bpoly3(Fraction(a, f))
        for a in range(1, f + 1) if chi.exponents(a) is not None)
    assert generalized_bernoulli(3, chi) == direct


def _bpoly3(x):
    return x ** 3 - Fraction(3, 2) * x ** 2 + Fraction(1, 2) * x


def test_classical_values():
    assert classical_L_negative(12, DirichletChar.trivial(691)) == Fraction(691, 32760)
    assert classical_L_negative(5, DirichletChar.trivial(5)) == 0
    assert classical_L_negative(1, DirichletChar.kronecker_char(5, -3)) == Fraction(1, 3)


def test_irregular_pair_value():
    w12 = DirichletChar.omega_power(691, 12)
    x = kubota_leopoldt(12, w12, 10)
    assert x.valuation() == 1
    exact = (1 - Fraction(691) ** 11) * classical_L_negative(12, DirichletChar.trivial(691))
    assert x.agrees(PadicScalar(691, exact, 10))


def test_trivial_character_weight_four():
    # omega^{4} = 1 at p = 5; L_p(-3, 1) = (1 - 5^3) * (-B_4/4) = -31/30
    x = kubota_leopoldt(4, DirichletChar.trivial(5), 8)
    assert x.agrees(PadicScalar(5, Fraction(-31, 30), 8))
    assert x.valuation() == -1


@pytest.mark.parametrize("p,spec", [(5, "w2"), (5, "1"), (7, "w4"), (7, "w1*kron-3"), (11, "w6"),
                                    (5, "w2*z1.1"), (5, "w2*z1.3"), (7, "kron5*z1.2")])
def test_fast_and_bernoulli_routes_agree(p, spec):
    psi = parse_character(p, spec)
    for k in range(1, 13):
        if psi.is_trivial() and k == 1:
            continue
        if psi.factors_through_gamma() and psi.wild_r:
            continue
        a = kubota_leopoldt(k, psi, 7)
        b = kubota_leopoldt(k, psi, 7, method="bernoulli")
        assert a.agrees(b), (k, a, b)


def test_kummer_continuity():
    for p, spec in [(5, "w2"), (7, "w4"), (11, "w5*kron-3"), (691, "w12")]:
        psi = parse_character(p, spec)
        N = 8
        k0 = psi.tame if psi.tame >= 2 else p - 1
        for m in range(0, 3):
            k1 = k0 + (p - 1) * p ** m * 3
            d = kubota_leopoldt(k0, psi, N) - kubota_leopoldt(k1, psi, N)
            bound = vp(u_pow_mod(k0, p, 40) - u_pow_mod(k1, p, 40), p)
            assert d.lower_val() >= min(bound, N)


def test_errors():
    with pytest.raises(ParityError):
        kubota_leopoldt(4, DirichletChar.omega_power(7, 1), 5)
    with pytest.raises(DomainError):
        kubota_leopoldt(0, DirichletChar.omega_power(7, 2), 5)
    with pytest.raises(DomainError):
        kubota_leopoldt(1, DirichletChar.trivial(7), 5)


def test_wild_gamma_type_values_nonintegral():
    psi = DirichletChar.chi_zeta(5, 1, 1)
    assert lp_valuation(2, psi, 6) == Fraction(-1, 4)
