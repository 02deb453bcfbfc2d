from fractions import Fraction

import pytest

from stablelat.characters import DirichletChar
from stablelat.cyclo import CycloScalar
from stablelat.errors import DomainError, PrecisionError, UndecidableInvariantsError
from stablelat.iwasawa import (G_hat, H_hat, H_poly, PSeries, _pmul, certify_series_root, evaluate_at,
                               fit_G_series, invariants, lemma_L_valuation, loss_bound, substitute_u2,
                               zeros_in_Zp)
from stablelat.lvalues import kubota_leopoldt, lp_times_H, lp_valuation
from stablelat.padic import PadicScalar, u_pow_mod


def w(p, a):
    return DirichletChar.omega_power(p, a)


def point(p, k, N):
    return PadicScalar(p, u_pow_mod(k, p, N) - 1, N)


# -- H -----------------------------------------------------------------------------

def test_H_cases():
    H = H_poly(w(691, 12))
    assert H.M == 1 and H.coeffs[0].agrees(1)
    H = H_poly(DirichletChar.trivial(5))
    assert [c.to_fraction() for c in H.coeffs] == [0, 1]
    z = CycloScalar.zeta_power(5, 1, 1, 40)
    H = H_poly(DirichletChar.chi_zeta(5, 1, 1))
    assert H.coeffs[0].agrees(z - 1) and H.coeffs[1].agrees(z)
    Hh = H_hat(w(691, 11))
    assert Hh.M == 1 and Hh.coeffs[0].agrees(1)


# -- the fit -------------------------------------------------------------------------

def test_fit_691_valuations():
    G = fit_G_series(w(691, 12), 2, 4)
    assert G.valuations() == [1, 0]


def test_fit_5_regular():
    G = fit_G_series(w(5, 2), 2, 6)
    rep = invariants(PSeries(5, G.coeffs, G.tail))
    assert G.valuations()[0] == 0
    assert (rep.mu, rep.lam) == (0, 0)


@pytest.mark.parametrize("p,a,M", [(5, 2, 6), (7, 4, 5), (691, 12, 3), (37, 32, 5), (5, 0, 5)])
def test_interpolation_replay_held_out(p, a, M):
    psi = w(p, a)
    N = 6
    G = fit_G_series(psi, M, N)
    k0 = G.meta["nodes"][-1]
    for k in (k0 + (p - 1), k0 + 2 * (p - 1), 2 + (p - 1) * 7 if a % (p - 1) == 0 else k0 + 5 * (p - 1)):
        y = evaluate_at(G, point(p, k, 40))
        ref = lp_times_H(k, psi, 40)
        cert = int(min(y.prec, ref.prec))
        assert cert >= 1
        assert y.agrees(ref, cert)


def test_loss_bound_and_precision_error():
    assert loss_bound(5, 6) == 5 + 1
    psi = w(5, 2)
    with pytest.raises(PrecisionError) as ei:
        fit_G_series(psi, 6, 10, input_prec=3)
    assert ei.value.needed > ei.value.achieved


def test_twist_rule_cyclotomic():
    p = 5
    psi = w(p, 2)
    chz = DirichletChar.chi_zeta(p, 1, 1)
    Gt = fit_G_series(psi * chz, 6, 6)
    G = fit_G_series(psi, 10, 10)
    z = CycloScalar.zeta_power(p, 1, 1, 4 * 30)
    for k in (2, 6, 10):
        x = point(p, k, 30)
        lhs = evaluate_at(Gt, x)
        rhs = evaluate_at(G, z.scale(x + 1) - 1)
        cert = min(lhs.prec, rhs.prec)
        assert cert >= 4
        assert lhs.agrees(rhs, cert)
        # direct L-value over Z_5[zeta_5]
        direct = kubota_leopoldt(k, psi * chz, 8)
        c2 = min(cert, direct.prec)
        assert lhs.agrees(direct, c2)


def test_Ghat_691():
    F = G_hat(w(691, 11), 8, 8)
    rep = invariants(F)
    assert (rep.mu, rep.lam) == (0, 1)
    assert rep.distinguished[0].valuation() == 1


def test_substitution_of_zero_series():
    Z = PSeries(7, [PadicScalar.zero(7, 10)] * 4, Fraction(10))
    out = substitute_u2(Z)
    assert all(c.is_zero() for c in out.coeffs)


def test_evaluate_at_examples():
    X = PSeries.polynomial(5, [0, 1])
    z = CycloScalar.zeta_power(5, 1, 1, 40)
    assert evaluate_at(X, z - 1).valuation() == Fraction(1, 4)
    with pytest.raises(DomainError):
        evaluate_at(X, PadicScalar(5, 2, 10))
    G = fit_G_series(w(691, 12), 4, 4)
    y = evaluate_at(G, point(691, 12, 20))
    assert y.valuation() == 1 == lp_valuation(12, w(691, 12), 6)


# -- invariants ------------------------------------------------------------------------

def test_invariants_trivial_examples():
    rep = invariants(PSeries.polynomial(5, [5, 1]))
    assert (rep.mu, rep.lam) == (0, 1)
    assert [c.to_fraction() for c in rep.distinguished] == [5, 1]
    rep = invariants(PSeries.polynomial(5, [5, 5]))
    assert (rep.mu, rep.lam) == (1, 0)


def test_invariants_undecidable():
    with pytest.raises(UndecidableInvariantsError):
        invariants(PSeries(5, [PadicScalar.zero(5, 3)] * 3, Fraction(0)))


def test_weierstrass_consistency():
    p = 7
    # F = (X^2 + 7X + 49*3) * (2 + X + 7X^2) known exactly
    P = [147, 7, 1]
    U = [2, 1, 7]
    f = _pmul(P, U)
    rep = invariants(PSeries.polynomial(p, f, prec=20))
    assert rep.lam == 2
    got = [c.to_int() for c in rep.distinguished]
    mod = p ** rep.distinguished_prec
    assert [(g - t) % mod for g, t in zip(got, P)] == [0, 0, 0]
    assert rep.unit_leading.agrees(2, rep.distinguished_prec)


def test_weierstrass_fitted_ghat():
    F = G_hat(w(691, 11), 8, 8)
    rep = invariants(F)
    a = rep.distinguished[0]
    # the root -a of the distinguished factor is a root of F
    x0 = -a
    beta = certify_series_root(F, x0)
    y = evaluate_at(F, x0)
    assert y.is_zero() or y.valuation() >= min(beta, rep.distinguished_prec)


# -- zeros -----------------------------------------------------------------------------

def test_zero_691_and_root_replay():
    roots, rep, F = zeros_in_Zp(w(691, 11), M=8, N=8)
    assert len(roots) == 1 and roots[0].certified
    r = roots[0]
    assert r.x0.valuation() == 1
    assert r.s0.prec >= 8 - 2
    y = evaluate_at(F, r.x0)
    assert y.is_zero() or y.valuation() >= r.precision
    # stable against a larger fit
    roots2, _, _ = zeros_in_Zp(w(691, 11), M=12, N=12)
    assert roots2[0].s0.agrees(r.s0, r.s0.prec)


def test_zero_5_empty():
    roots, rep, _ = zeros_in_Zp(w(5, 1), M=6, N=6)
    assert roots == [] and rep.lam == 0


def test_kn_orders_increase():
    p = 691
    roots, _, _ = zeros_in_Zp(w(p, 11), M=8, N=8)
    s0 = roots[0].s0.to_int()
    ords = []
    for n in (1, 2, 3):
        k = s0 % p ** n + p ** n
        ords.append(lp_valuation(k, w(p, 12), 10))
    assert ords == sorted(set(ords)) and ords[0] >= 2


def test_ferrero_washington_outcome():
    for p, a in [(5, 1), (7, 3), (37, 31), (691, 11), (547, 485)]:
        F = G_hat(w(p, a), 6, 6)
        assert invariants(F).mu == 0


# -- the valuation lemma ---------------------------------------------------------------

def test_lemma_examples():
    rep = lemma_L_valuation(PSeries.polynomial(5, [5, 1]), 0, (2, 1))
    assert rep.valuation == Fraction(1, 20) and rep.applicable
    F = PSeries.polynomial(5, _pmul([5, 1], [25, 1]))
    rep = lemma_L_valuation(F, 3, (2, 1))
    assert rep.valuation == Fraction(1, 10)
    with pytest.raises(DomainError):
        lemma_L_valuation(PSeries.polynomial(5, [5, 1]), 0, (0, 0))


def test_lemma_below_threshold_reports():
    # root valuation 1/4 of X^4 + 5 needs r >= 2; at r = 1 the formula is not applicable
    F = PSeries.polynomial(5, [5, 0, 0, 0, 1])
    rep = lemma_L_valuation(F, 0, (1, 1))
    assert not rep.applicable and rep.threshold_r == 2
    rep = lemma_L_valuation(F, 0, (2, 1))
    assert rep.applicable and rep.valuation == Fraction(4, 20)
