from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from stablelat.errors import DomainError, IndeterminateValuationError, NoConvergenceError
from stablelat.padic import (PadicScalar, hensel_root, pexp, plog, teichmuller_lift,
                             u_power, vp)


def brute_teich(a, p, N):
    mod = p ** N
    return [x for x in range(mod) if pow(x, p - 1, mod) == 1 and x % p == a % p]


def test_teichmuller_examples():
    assert teichmuller_lift(1, 5, 4).value == 1
    assert teichmuller_lift(2, 5, 2).value == 7
    assert brute_teich(2, 5, 2) == [7]
    for p in (3, 5, 7, 11):
        assert teichmuller_lift(p - 1, p, 5).value == p ** 5 - 1


def test_teichmuller_rejects_multiple_of_p():
    with pytest.raises(DomainError):
        teichmuller_lift(10, 5, 3)


@given(st.sampled_from([3, 5, 7, 11, 13]), st.integers(1, 10 ** 6), st.integers(1, 12))
def test_teichmuller_is_root_of_unity(p, a, N):
    if a % p == 0:
        a += 1
    t = teichmuller_lift(a, p, N)
    assert pow(t.value, p - 1, p ** N) == 1
    assert t.value % p == a % p


def test_hensel_sqrt6():
    r = hensel_root([-6, 0, 1], PadicScalar(5, 1, 10), 10)
    assert r.value % 5 == 1
    assert (r.value ** 2 - 6) % 5 ** 10 == 0


def test_hensel_linear_and_teichmuller_crosscheck():
    assert hensel_root([-17, 1], PadicScalar(5, 2, 8), 8).value == 17
    t = hensel_root([-1, 0, 0, 0, 1], PadicScalar(5, 2, 12), 12)
    assert t.value == teichmuller_lift(2, 5, 12).value


def test_hensel_failure_has_diagnostics():
    with pytest.raises(NoConvergenceError) as exc:
        hensel_root([-2, 0, 1], PadicScalar(5, 1, 6), 6)
    assert exc.value.diagnostics["v_df"] == 0


def test_log_exp():
    assert plog(PadicScalar(5, 1, 10)).is_zero()
    for p in (3, 5, 7):
        N = 10
        u = PadicScalar(p, 1 + p, N)
        assert pexp(plog(u)).agrees(1 + p, N - 1)
        for m in range(4):
            assert plog(PadicScalar(p, (1 + p) ** (p ** m), 3 * m + 8)).valuation() == 1 + m


def test_direct_log_expansion_oracle():
    # log(1+z) = sum (-1)^{n+1} z^n / n with exact rationals
    p, N = 5, 6
    z = Fraction(10)
    exact = sum(Fraction((-1) ** (n + 1)) * z ** n / n for n in range(1, 40))
    assert plog(PadicScalar(p, 11, N)).agrees(PadicScalar(p, exact, N))


@settings(max_examples=60)
@given(st.sampled_from([3, 5, 7]), st.integers(0, 10 ** 8), st.integers(0, 10 ** 8))
def test_log_homomorphism_and_inverse(p, a, b):
    N = 12
    x = PadicScalar(p, 1 + p * a, N)
    y = PadicScalar(p, 1 + p * b, N)
    assert plog(x * y).agrees(plog(x) + plog(y))
    assert pexp(plog(x)).agrees(x, N - 1)


def test_u_power():
    assert u_power(0, 8, 5).value == 1
    assert u_power(2, 8, 5).value == 36
    s = PadicScalar(5, 7, 10)
    assert u_power(s, 10).agrees(6 ** 7, 9)
    with pytest.raises(DomainError):
        u_power(PadicScalar(5, Fraction(1, 5), 10), 10)


@settings(max_examples=200)
@given(st.sampled_from([3, 5, 7]), st.integers(-10 ** 9, 10 ** 9).filter(bool),
       st.integers(-10 ** 9, 10 ** 9).filter(bool), st.integers(1, 30), st.integers(1, 30))
def test_valuation_laws(p, a, b, da, db):
    x = PadicScalar(p, Fraction(a, da) if da % p else a, 20)
    y = PadicScalar(p, Fraction(b, db) if db % p else b, 20)
    assert (x * y).valuation() == x.valuation() + y.valuation()
    s = x + y
    if not s.is_zero():
        assert s.valuation() >= min(x.valuation(), y.valuation())
        if x.valuation() != y.valuation():
            assert s.valuation() == min(x.valuation(), y.valuation())


def test_precision_bookkeeping():
    x = PadicScalar(5, 3, 10)
    y = PadicScalar(5, 25, 4)
    assert (x + y).prec == 4
    assert (x * y).prec == 2 + 2
    z = PadicScalar(5, 0, 6)
    assert z.is_zero()
    with pytest.raises(IndeterminateValuationError):
        z.valuation()
    assert (z * PadicScalar(5, 5, 10)).prec == 7
    assert vp(Fraction(50, 3), 5) == 2


def test_text_and_json():
    x = PadicScalar(5, 7, 3)
    assert str(x) == "5^0 * (2 + 1*5 + O(5^3))"
    assert PadicScalar.from_json(x.to_json()) == x
    assert x.to_json() == {"p": 5, "N": 3, "value": "7", "val": 0}
