"""Capped-precision arithmetic in Q_p.

A :class:`PadicScalar` is ``p^val * unit`` known modulo ``p^prec``.  The
element whose digits all vanish is "zero to precision ``prec``" and has no
valuation; operations that need one raise
:class:`~stablelat.errors.IndeterminateValuationError`.

Precision is never inflated: sums keep the smaller absolute precision,
products keep the smaller relative precision.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from .errors import DomainError, IndeterminateValuationError, NoConvergenceError, PrecisionError


def vp(n, p):
    """Exact p-adic valuation of a nonzero integer or Fraction."""
    if isinstance(n, Fraction):
        if n == 0:
            raise IndeterminateValuationError("valuation of exact zero")
        return vp(n.numerator, p) - vp(n.denominator, p)
    n = int(n)
    if n == 0:
        raise IndeterminateValuationError("valuation of exact zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _vp_or_inf(n, p, cap):
    return cap if n == 0 else min(vp(n, p), cap)


def generator_u(p):
    """The fixed topological generator of 1 + pZ_p."""
    return 1 + p


class PadicScalar:
    __slots__ = ("p", "prec", "val", "unit", "_zero")

    def __init__(self, p, value=0, prec=20):
        self.p = p
        self.prec = prec
        if isinstance(value, PadicScalar):
            value = value.to_fraction()
        if isinstance(value, Rational) and not isinstance(value, int):
            value = Fraction(value)
            num, den = value.numerator, value.denominator
        else:
            num, den = int(value), 1
        if num == 0:
            self._set_zero()
            return
        v = vp(num, p) - vp(den, p)
        if v >= prec:
            self._set_zero()
            return
        num //= p ** max(0, vp(num, p))
        den //= p ** max(0, vp(den, p))
        r = prec - v
        mod = p ** r
        self.val = v
        self.unit = num * pow(den, -1, mod) % mod
        self._zero = False

    def _set_zero(self):
        self.val = self.prec
        self.unit = 0
        self._zero = True

    @classmethod
    def _make(cls, p, prec, val, unit):
        obj = cls.__new__(cls)
        obj.p = p
        obj.prec = prec
        obj.val = val
        obj.unit = unit
        obj._zero = False
        return obj

    @classmethod
    def zero(cls, p, prec):
        obj = cls.__new__(cls)
        obj.p = p
        obj.prec = prec
        obj._set_zero()
        return obj

    @classmethod
    def _normalize(cls, p, s, m, prec):
        """Element ``p^m * s`` reduced to absolute precision ``prec``."""
        r = prec - m
        if r <= 0:
            return cls.zero(p, prec)
        s %= p ** r
        if s == 0:
            return cls.zero(p, prec)
        t = 0
        while s % p == 0:
            s //= p
            t += 1
        return cls._make(p, prec, m + t, s)

    # -- inspection -------------------------------------------------------

    def is_zero(self):
        return self._zero

    @property
    def relprec(self):
        return 0 if self._zero else self.prec - self.val

    def valuation(self):
        if self._zero:
            raise IndeterminateValuationError(
                f"zero to precision O({self.p}^{self.prec})", achieved=self.prec)
        return self.val

    def lower_val(self):
        """Valuation, or the precision for a zero-to-precision element."""
        return self.val

    def to_fraction(self):
        if self._zero:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.val

    @property
    def value(self):
        """Integer representative mod p^prec (a Fraction if val < 0)."""
        if self._zero:
            return 0
        if self.val >= 0:
            return self.unit * self.p ** self.val
        return self.to_fraction()

    def to_int(self):
        if not self._zero and self.val < 0:
            raise DomainError("element is not p-integral")
        return self.value

    def residue(self):
        """Image in F_p of an integral element."""
        return self.to_int() % self.p

    def digits(self):
        """Base-p digits of the unit part, least significant first."""
        out, u, p = [], self.unit, self.p
        for _ in range(self.relprec):
            u, d = divmod(u, p)
            out.append(d)
        return out

    def reduce(self, prec):
        """Same element with absolute precision lowered to ``prec``."""
        if prec >= self.prec:
            return self
        if self._zero or self.val >= prec:
            return PadicScalar.zero(self.p, prec)
        return PadicScalar._make(self.p, prec, self.val, self.unit % self.p ** (prec - self.val))

    def agrees(self, other, prec=None):
        """Congruence test modulo p^prec (default: the joint precision)."""
        other = self._coerce(other)
        n = min(self.prec, other.prec) if prec is None else prec
        if prec is not None and prec > min(self.prec, other.prec):
            raise PrecisionError(f"cannot compare modulo p^{prec}", needed=prec,
                                 achieved=min(self.prec, other.prec))
        d = (self - other).reduce(n)
        return d.is_zero()

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise DomainError("mixing different primes")
            return other
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return PadicScalar.zero(self.p, self.prec + abs(self.val) + 1)
            extra = abs(vp(other, self.p)) + abs(self.val) + self.relprec + 1
            return PadicScalar(self.p, other, self.prec + extra)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.p
        n = min(self.prec, other.prec)
        m = min(self.val, other.val)
        if m >= n:
            return PadicScalar.zero(p, n)
        s = self.unit * p ** (self.val - m) + other.unit * p ** (other.val - m)
        return PadicScalar._normalize(p, s, m, n)

    __radd__ = __add__

    def __neg__(self):
        if self._zero:
            return self
        return PadicScalar._make(self.p, self.prec, self.val, (-self.unit) % self.p ** self.relprec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.p
        if self._zero or other._zero:
            n = min(self.prec + other.val, other.prec + self.val)
            return PadicScalar.zero(p, n)
        r = min(self.relprec, other.relprec)
        v = self.val + other.val
        return PadicScalar._make(p, v + r, v, self.unit * other.unit % p ** r)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other._zero:
            raise IndeterminateValuationError("division by an element that is zero to precision",
                                              achieved=other.prec)
        p = self.p
        if self._zero:
            return PadicScalar.zero(p, self.prec - other.val)
        r = min(self.relprec, other.relprec)
        v = self.val - other.val
        mod = p ** r
        return PadicScalar._make(p, v + r, v, self.unit * pow(other.unit, -1, mod) % mod)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return 1 / (self ** (-k))
        if k == 0:
            return PadicScalar(self.p, 1, self.relprec if not self._zero else self.prec)
        if self._zero:
            return PadicScalar.zero(self.p, self.prec + (k - 1) * self.val)
        r = self.relprec
        v = self.val * k
        return PadicScalar._make(self.p, v + r, v, pow(self.unit, k, self.p ** r))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self._coerce(other)
        if not isinstance(other, PadicScalar):
            return NotImplemented
        if self.p != other.p or self.prec != other.prec:
            return False
        return (self._zero, self.val, self.unit) == (other._zero, other.val, other.unit)

    def __hash__(self):
        return hash((self.p, self.prec, self.val, self.unit, self._zero))

    # -- text / JSON ------------------------------------------------------

    def __repr__(self):
        return f"PadicScalar({self})"

    def __str__(self):
        p = self.p
        if self._zero:
            return f"O({p}^{self.prec})"
        terms = []
        for i, d in enumerate(self.digits()):
            if d:
                terms.append(str(d) if i == 0 else (f"{d}*{p}" if i == 1 else f"{d}*{p}^{i}"))
        body = " + ".join(terms) if terms else "0"
        return f"{p}^{self.val} * ({body} + O({p}^{self.relprec}))"

    def to_json(self):
        return {"p": self.p, "N": self.prec,
                "value": str(self.value), "val": None if self._zero else self.val}

    @classmethod
    def from_json(cls, d):
        return cls(d["p"], Fraction(d["value"]), d["N"])


# -- Teichmüller, Hensel ---------------------------------------------------

def teichmuller_lift(a, p, N):
    """The (p-1)-st root of unity congruent to ``a`` mod p, to precision N."""
    if a % p == 0:
        raise DomainError(f"{a} is divisible by {p}")
    if N < 1:
        raise DomainError("precision must be positive")
    mod = p ** N
    return PadicScalar(p, pow(a, p ** (N - 1), mod), N)


def teichmuller_int(a, p, N):
    """Integer representative of the Teichmüller lift (0 if p | a)."""
    if a % p == 0:
        return 0
    mod = p ** N
    return pow(a, p ** (N - 1), mod)


def _poly_eval(coeffs, x):
    acc = 0 * x
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _poly_deriv(coeffs):
    return [i * c for i, c in enumerate(coeffs)][1:]


def hensel_root(f, x0, N):
    """Newton-lift a root of the polynomial ``f`` (coefficients low to high).

    Requires v(f(x0)) > 2 v(f'(x0)).  Returns the root to absolute
    precision N; raises NoConvergenceError when the starting point does not
    satisfy the Hensel condition.
    """
    if not isinstance(x0, PadicScalar):
        raise DomainError("x0 must be a PadicScalar")
    p = x0.p
    exact = [c.to_fraction() if isinstance(c, PadicScalar) else Fraction(c) for c in f]
    dexact = _poly_deriv(exact)
    dfx = sum((c * x0.to_fraction() ** i for i, c in enumerate(dexact)), Fraction(0))
    fx = sum((c * x0.to_fraction() ** i for i, c in enumerate(exact)), Fraction(0))
    if dfx == 0:
        raise NoConvergenceError("f'(x0) vanishes", {"v_f": None, "v_df": None})
    vd = vp(dfx, p)
    vf = vp(fx, p) if fx != 0 else None
    if vf is not None and not vf > 2 * vd:
        raise NoConvergenceError(f"Hensel condition fails: v(f(x0))={vf}, v(f'(x0))={vd}",
                                 {"v_f": vf, "v_df": vd})
    work = N + 2 * vd + 2
    cprec = work + 2 * vd + 4
    coeffs = [PadicScalar(p, c, cprec) for c in exact]
    dcoeffs = [PadicScalar(p, c, cprec) for c in dexact]
    x = PadicScalar(p, x0.to_fraction(), work)
    for _ in range(2 * work.bit_length() + 8):
        fx = _poly_eval(coeffs, x)
        if fx.lower_val() >= N + vd + 1:
            break
        x = (x - fx / _poly_eval(dcoeffs, x)).reduce(work)
        x = PadicScalar(p, x.to_fraction(), work)
    else:
        raise NoConvergenceError("Newton iteration did not converge", {"v_df": vd})
    return PadicScalar(p, x.to_fraction(), N)


# -- exp / log -------------------------------------------------------------

def plog(x):
    """p-adic logarithm on 1 + pZ_p (p odd)."""
    p = x.p
    if p == 2:
        raise DomainError("p = 2 is not supported")
    z = x - 1
    if not z.is_zero() and z.valuation() < 1:
        raise DomainError("plog needs x = 1 mod p")
    N = x.prec
    if z.is_zero():
        return PadicScalar.zero(p, N)
    vz = z.valuation()
    # term n has valuation >= n*vz - v_p(n)
    guard = 2
    nmax = 1
    while nmax * vz - _ilog(nmax, p) < N + guard or nmax < 2:
        nmax += 1
    g = _ilog(nmax, p) + 2
    mod = p ** (N + g)
    zi = z.to_int() % mod
    acc = 0
    zp = 1
    for n in range(1, nmax + 1):
        zp = zp * zi % mod
        e = vp(n, p)
        term = zp // p ** e if zp % p ** e == 0 else None
        if term is None:
            raise PrecisionError("log series lost integrality")
        term = term * pow(n // p ** e, -1, mod) % mod
        acc += term if n % 2 else -term
    return PadicScalar(p, acc % mod, N)


def _ilog(n, p):
    e = 0
    while p ** (e + 1) <= n:
        e += 1
    return e


def _vfact(n, p):
    s, q = 0, p
    while q <= n:
        s += n // q
        q *= p
    return s


def pexp(y):
    """p-adic exponential on pZ_p (p odd)."""
    p = y.p
    if p == 2:
        raise DomainError("p = 2 is not supported")
    N = y.prec
    if y.is_zero():
        return PadicScalar(p, 1, N)
    if y.valuation() < 1:
        raise DomainError("pexp needs v(y) >= 1")
    vy = y.valuation()
    nmax = 1
    while nmax * vy - _vfact(nmax, p) < N + 1:
        nmax += 1
    g = _vfact(nmax, p) + 1
    mod = p ** (N + g)
    yi = y.to_int() % mod
    acc = 1
    yn = 1
    fact_unit = 1
    for n in range(1, nmax + 1):
        yn = yn * yi % mod
        m = n
        while m % p == 0:
            m //= p
        fact_unit = fact_unit * m % mod
        e = _vfact(n, p)
        term = (yn // p ** e) * pow(fact_unit, -1, mod) % mod
        acc += term
    return PadicScalar(p, acc % mod, N)


def u_power(s, N, p=None):
    """u^s for s in Z_p, u = 1 + p.

    ``s`` may be an int (needs ``p``) or a PadicScalar; integer exponents use
    repeated squaring, p-adic ones ``pexp(s * plog(u))``.
    """
    if isinstance(s, int):
        if p is None:
            raise DomainError("prime required for integer exponent")
        mod = p ** N
        u = generator_u(p)
        return PadicScalar(p, pow(u, s, mod) if s >= 0 else pow(pow(u, -s, mod), -1, mod), N)
    if isinstance(s, Fraction):
        raise DomainError("exponent must lie in Z_p")
    p = s.p
    if not s.is_zero() and s.valuation() < 0:
        raise DomainError("exponent must lie in Z_p")
    lu = plog(PadicScalar(p, generator_u(p), N + 1))
    y = s * lu
    return pexp(y.reduce(min(y.prec, N)))


def u_pow_mod(k, p, N):
    """Integer representative of u^k mod p^N."""
    mod = p ** N
    u = generator_u(p)
    return pow(u, k, mod) if k >= 0 else pow(pow(u, -k, mod), -1, mod)


def sqrt_unit(w, p, N):
    """Square root in Z_p of a p-adic unit integer ``w`` (None if non-square)."""
    if pow(w % p, (p - 1) // 2, p) != 1:
        return None
    r0 = next(r for r in range(1, p) if (r * r - w) % p == 0)
    return hensel_root([-w, 0, 1], PadicScalar(p, r0, N), N)


__all__ = [
    "PadicScalar", "vp", "generator_u", "teichmuller_lift", "teichmuller_int",
    "hensel_root", "plog", "pexp", "u_power", "u_pow_mod", "sqrt_unit",
]
