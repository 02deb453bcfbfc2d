import random
from fractions import Fraction

import pytest

from stablelat.cyclo import CycloScalar, _reduce_exact, eisenstein_poly, ram_index
from stablelat.errors import IndeterminateValuationError


def naive_mul(x, y):
    prod = [0] * (2 * x.e)
    for i, a in enumerate(x.coeffs):
        for j, b in enumerate(y.coeffs):
            prod[i + j] += a * b
    return _reduce_exact(prod, x.p, x.r)


def test_eisenstein_is_eisenstein():
    for p, r in [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1)]:
        E = eisenstein_poly(p, r)
        e = ram_index(p, r)
        assert len(E) == e + 1 and E[-1] == 1
        assert all(c % p == 0 for c in E[:-1]) and E[0] % (p * p) != 0


def test_uniformizer_valuations():
    for p, r in [(5, 1), (5, 2), (3, 3)]:
        e = ram_index(p, r)
        pi = CycloScalar(p, r, [0, 1], 10 * e)
        assert pi.valuation() == Fraction(1, e)
        z = CycloScalar.zeta_power(p, r, 1, 10 * e)
        assert (z - 1).valuation() == Fraction(1, e)
    assert (CycloScalar.zeta_power(5, 1, 1, 40) - 1).valuation() == Fraction(1, 4)


def test_zeta_order():
    for p, r in [(3, 2), (5, 1), (5, 2)]:
        z = CycloScalar.zeta_power(p, r, 1, 60)
        assert (z ** (p ** r)).agrees(1)
        assert not (z ** (p ** (r - 1))).agrees(1)


def test_valuation_two_ways_random():
    rng = random.Random(1)
    count = 0
    for p, r in [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1)]:
        e = ram_index(p, r)
        for _ in range(25):
            coeffs = [rng.randrange(p ** 4) * p ** rng.randrange(3) for _ in range(e)]
            x = CycloScalar(p, r, coeffs, 8 * e)
            if x.is_zero():
                continue
            assert x.valuation() == x.norm_valuation()
            count += 1
    assert count >= 100


def test_kronecker_product_matches_schoolbook():
    rng = random.Random(2)
    for p, r in [(3, 2), (5, 1), (5, 2), (7, 1)]:
        e = ram_index(p, r)
        P = 6 * e
        for _ in range(10):
            x = CycloScalar(p, r, [rng.randrange(p ** 6) for _ in range(e)], P)
            y = CycloScalar(p, r, [rng.randrange(p ** 6) for _ in range(e)], P)
            assert (x * y).agrees(CycloScalar(p, r, naive_mul(x, y), P))


def test_valuation_multiplicative():
    rng = random.Random(3)
    p, r = 5, 2
    e = ram_index(p, r)
    for _ in range(30):
        x = CycloScalar(p, r, [rng.randrange(25) * 5 ** rng.randrange(2) for _ in range(e)], 6 * e)
        y = CycloScalar(p, r, [rng.randrange(25) for _ in range(e)], 6 * e)
        if x.is_zero() or y.is_zero():
            continue
        assert (x * y).valuation() == x.valuation() + y.valuation()


def test_perturbed_point_valuation():
    # zeta u^k - 1 - alpha with v(alpha) > 1/e keeps valuation 1/e
    p, r = 5, 2
    e = ram_index(p, r)
    z = CycloScalar.zeta_power(p, r, 1, 10 * e)
    x = z * (6 ** 7) - 1 - CycloScalar(p, r, [0, 0, 5], 10 * e)
    assert x.valuation() == Fraction(1, e)


def test_embed_compatible():
    z1 = CycloScalar.zeta_power(5, 1, 2, 40)
    assert z1.embed(2).agrees(CycloScalar.zeta_power(5, 2, 10, 200))


def test_zero_to_precision():
    x = CycloScalar(5, 1, [25, 0, 0, 0], 8)
    with pytest.raises(IndeterminateValuationError):
        x.valuation()


def test_product_with_mixed_precision_inputs():
    # a low-precision unit times pi^e: inputs carry residues mod different powers of p
    x = CycloScalar(11, 1, [0, 1], 140)
    y = x ** 10
    for P in (9, 20, 40):
        a = CycloScalar(11, 1, [1], P)
        assert (a * y).pi_valuation() == 10
    assert [(CycloScalar(11, 1, [1], 30) * x ** n).pi_valuation() for n in range(1, 13)] == list(range(1, 13))
