"""Bernoulli numbers, generalized Bernoulli numbers and Kubota-Leopoldt values.

All Bernoulli data is exact (``fractions.Fraction``); character values are
the only p-adic input.  Values ``L_p(1-k, psi)`` are computed two ways:

* ``method="bernoulli"``: the Euler-corrected classical value
  ``(1 - psi omega^{-k}(p) p^{k-1}) * (-B_{k, psi omega^{-k}} / k)``;
* ``method="fast"`` (default): the finite-sum formula
  ``-1/(kF) sum_{a <= F, p not | a} psi(a) <a>^k sum_j C(k,j) B_j (F/a)^j``
  with F = lcm(p, f) and the j-sum cut off once (F/a)^j vanishes to the
  working precision.  This handles huge k.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from math import comb, gcd

from .characters import DirichletChar, gamma
from .cyclo import CycloScalar, ram_index
from .errors import DomainError, ParityError
from .padic import PadicScalar, generator_u, teichmuller_int, vp


class BernoulliCache:
    """Memo table for B_n; one writer at a time, readers never see partial rows."""

    def __init__(self):
        self._lock = threading.Lock()
        self._table = {}

    def get(self, n):
        val = self._table.get(n)
        if val is not None:
            return val
        val = _akiyama_tanigawa(n)
        with self._lock:
            self._table.setdefault(n, val)
        return self._table[n]

    def clear(self):
        with self._lock:
            self._table.clear()


def _akiyama_tanigawa(n):
    a = [Fraction(1, m + 1) for m in range(n + 1)]
    for m in range(n + 1):
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    # the recurrence yields B_1 = +1/2
    return -a[0] if n == 1 else a[0]


_CACHE = BernoulliCache()


def bernoulli_number(k):
    """Exact B_k with B_1 = -1/2."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    if k > 1 and k % 2:
        return Fraction(0)
    return _CACHE.get(k)


def bernoulli_poly(k, x):
    x = Fraction(x)
    return sum((comb(k, j) * bernoulli_number(j) * x ** (k - j) for j in range(k + 1)), Fraction(0))


# -- exact character sums --------------------------------------------------

class CharSum:
    """Exact element sum_{(t,s)} c_{t,s} gamma^t zeta^s with rational c."""

    __slots__ = ("p", "r", "terms")

    def __init__(self, p, r, terms):
        self.p = p
        self.r = r
        self.terms = {key: c for key, c in terms.items() if c}

    def scale(self, c):
        return CharSum(self.p, self.r, {key: v * c for key, v in self.terms.items()})

    def shift(self, t0, c=1):
        """Multiply by c * gamma^t0."""
        q = self.p - 1
        out = {}
        for (t, s), v in self.terms.items():
            key = ((t + t0) % q, s)
            out[key] = out.get(key, 0) + v * c
        return CharSum(self.p, self.r, out)

    def __add__(self, other):
        out = dict(self.terms)
        for key, v in other.terms.items():
            out[key] = out.get(key, 0) + v
        return CharSum(self.p, self.r, out)

    def is_rational(self):
        half = (self.p - 1) // 2
        return all(s == 0 and t in (0, half) for t, s in self.terms)

    def to_fraction(self):
        if not self.is_rational():
            raise DomainError("value is not rational")
        return sum((-v if t else v for (t, s), v in self.terms.items()), Fraction(0))

    def embed(self, N):
        """p-adic image: PadicScalar for r = 0, CycloScalar (p-adic precision N) otherwise."""
        p = self.p
        if not self.terms:
            return PadicScalar.zero(p, N) if self.r == 0 else CycloScalar(p, self.r, [0], ram_index(p, self.r) * N)
        D = max(0, max(-vp(v, p) for v in self.terms.values()))
        W = N + D
        mod = p ** W
        ints = {}
        for key, v in self.terms.items():
            v = v * p ** D
            ints[key] = v.numerator * pow(v.denominator, -1, mod) % mod
        return _combine(p, self.r, ints, W, PadicScalar(p, p ** D, W + 1))


def _combine(p, r, ints, W, divisor, factor=None):
    """(sum_{t,s} ints[t,s] gamma^t zeta^s) * factor / divisor, inputs known mod p^W."""
    mod = p ** W
    g = gamma(p, W)
    by_s = {}
    gpow = {}
    for (t, s), v in ints.items():
        if t not in gpow:
            gpow[t] = pow(g, t, mod)
        by_s[s] = (by_s.get(s, 0) + gpow[t] * v) % mod
    if r == 0:
        x = PadicScalar(p, by_s.get(0, 0), W)
        if factor is not None:
            x = x * factor
        return x / divisor
    e = ram_index(p, r)
    acc = CycloScalar(p, r, [0], e * W)
    for s in range(p ** r - 1, -1, -1):
        acc = acc.mul_by_zeta() + CycloScalar(p, r, [by_s.get(s, 0)], e * W)
    if factor is not None:
        acc = acc * factor
    return acc.div_scalar(divisor)


def generalized_bernoulli_exact(k, chi):
    """B_{k,chi} = f^{k-1} sum_{a=1}^f chi(a) B_k(a/f) as a CharSum."""
    f = chi.conductor
    r = chi.wild_r
    p = chi.p
    if f == 1:
        return CharSum(p, r, {(0, 0): bernoulli_poly(k, 1)})
    # group power sums sum_{a in class} a^m, so B_{k,chi} = sum_j C(k,j) B_j f^{j-1} S(k-j)
    classes = {}
    for a in range(1, f + 1):
        ex = chi.exponents(a)
        if ex is not None:
            classes.setdefault(ex, []).append(a)
    out = {}
    coef = [comb(k, j) * bernoulli_number(j) * Fraction(f) ** (j - 1) for j in range(k + 1)]
    for key, members in classes.items():
        total = Fraction(0)
        for j in range(k + 1):
            if coef[j]:
                total += coef[j] * sum(a ** (k - j) for a in members)
        out[key] = total
    return CharSum(p, r, out)


def generalized_bernoulli(k, chi, N=None):
    """B_{k,chi}: exact Fraction when rational-valued and N is None, else the p-adic image."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    if k == 0:
        return Fraction(1) if chi.is_trivial() else (Fraction(0) if N is None else CharSum(chi.p, chi.wild_r, {}).embed(N))
    val = generalized_bernoulli_exact(k, chi)
    if N is None:
        return val.to_fraction()
    return val.embed(N)


def classical_L_negative(k, chi, N=None):
    """L(1-k, chi) = -B_{k,chi}/k."""
    if k < 1:
        raise DomainError("k must be at least 1")
    val = generalized_bernoulli_exact(k, chi).scale(Fraction(-1, k))
    if N is None:
        return val.to_fraction()
    return val.embed(N)


def _check_inputs(k, psi):
    if not isinstance(k, int) or k < 1:
        raise DomainError("k must be a positive integer (k = 0 is the pole s = 1)")
    if not psi.is_even():
        raise ParityError(f"L_p(s, {psi.label()}) vanishes identically for odd characters")
    if psi.is_trivial() and k == 1:
        raise DomainError("trivial character at k = 1 is excluded by the pole guard")


def _euler_corrected(k, psi):
    """Exact CharSum for (1 - chi(p) p^{k-1}) * (-B_{k,chi}/k), chi = psi omega^{-k}."""
    p = psi.p
    chi = psi * DirichletChar.omega_power(p, -k)
    val = generalized_bernoulli_exact(k, chi).scale(Fraction(-1, k))
    ex = chi.exponents(p)
    if ex is not None:
        val = val + val.shift(ex[0], -Fraction(p) ** (k - 1))
    return val


def _fast_sum(k, psi, W):
    """Integer class sums and the exact divisor for L_p(1-k, psi) known mod p^W."""
    p = psi.p
    f = psi.conductor
    F = f * p // gcd(f, p)
    vF = vp(F, p)
    W2 = W + 1 + vp(k, p) + vF
    mod = p ** W2
    beta = []
    for j in range(k + 1):
        if j * vF >= W2:
            break
        b = bernoulli_number(j)
        if b:
            c = comb(k, j) * p * b * Fraction(F) ** j
            beta.append((j, c.numerator * pow(c.denominator, -1, mod) % mod))
    Jmax = beta[-1][0] if beta else 0
    coeffs = [0] * (Jmax + 1)
    for j, b in beta:
        coeffs[j] = b
    acc = {}
    for a in range(1, F + 1):
        if a % p == 0:
            continue
        ex = psi.exponents(a)
        if ex is None:
            continue
        ainv = pow(a, -1, mod)
        inner = 0
        for c in reversed(coeffs):
            inner = (inner * ainv + c) % mod
        bracket = a * pow(teichmuller_int(a, p, W2), -1, mod) % mod
        term = pow(bracket, k, mod) * inner % mod
        acc[ex] = (acc.get(ex, 0) + term) % mod
    neg = {key: (-v) % mod for key, v in acc.items()}
    divisor = PadicScalar(p, k * F * p, W2 + vp(k * F * p, p) + 2)
    return neg, W2, divisor


def kubota_leopoldt(k, psi, N=20, method="fast"):
    """L_p(1-k, psi) to p-adic precision N.

    Returns a PadicScalar when psi has no wild part and a CycloScalar
    otherwise.  Wild characters factoring through Gamma give non-integral
    values; use :func:`lp_times_H` or :func:`lp_valuation` for those.
    """
    _check_inputs(k, psi)
    if method == "bernoulli":
        return _euler_corrected(k, psi).embed(N)
    if method != "fast":
        raise ValueError(f"unknown method {method!r}")
    ints, W2, divisor = _fast_sum(k, psi, N)
    return _combine(psi.p, psi.wild_r, ints, W2, divisor)


def H_value(k, psi, N):
    """H_psi(u^k - 1) = psi(u) u^k - 1 when psi factors through Gamma, else None (H = 1)."""
    if not psi.factors_through_gamma():
        return None
    p, r = psi.p, psi.wild_r
    uk = pow(generator_u(p), k, p ** N)
    if r == 0:
        return PadicScalar(p, uk - 1, N)
    z = CycloScalar.zeta_power(p, r, psi.wild_m, ram_index(p, r) * N)
    return z.scale(PadicScalar(p, uk, N)) - 1


def lp_times_H(k, psi, N=20):
    """L_p(1-k, psi) * H_psi(u^k - 1), which is always integral."""
    if not isinstance(k, int) or k < 1:
        raise DomainError("k must be a positive integer")
    if not psi.is_even():
        raise ParityError("odd character")
    h = H_value(k, psi, N + 2)
    if h is None:
        return kubota_leopoldt(k, psi, N)
    ints, W2, divisor = _fast_sum(k, psi, N + 2)
    out = _combine(psi.p, psi.wild_r, ints, W2, divisor, factor=h)
    return out.reduce(N) if psi.wild_r == 0 else out.reduce(ram_index(psi.p, psi.wild_r) * N)


def lp_valuation(k, psi, N=20):
    """v_p(L_p(1-k, psi)) as a Fraction (normalized v(p) = 1)."""
    h = H_value(k, psi, N + 2)
    x = lp_times_H(k, psi, N + 2)
    if h is None:
        return Fraction(x.valuation())
    return Fraction(x.valuation()) - Fraction(h.valuation())
