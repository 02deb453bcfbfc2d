"""Elements of Z_p[zeta_{p^r}] with capped precision.

Elements are stored in the basis 1, pi, ..., pi^{e-1} where pi = zeta - 1
and e = (p-1) p^{r-1} is the ramification index.  ``prec`` is measured in
pi-adic units: the element is known modulo pi^prec.  Valuations are
returned in Q normalized by v(p) = 1.

Level r = 0 is Z_p itself (e = 1, and the pi-adic unit is then p).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, IndeterminateValuationError
from .padic import PadicScalar, vp


def ram_index(p, r):
    return 1 if r == 0 else (p - 1) * p ** (r - 1)


def _binom_row(n):
    row = [1] * (n + 1)
    for i in range(1, n + 1):
        row[i] = row[i - 1] * (n - i + 1) // i
    return row


@lru_cache(maxsize=None)
def eisenstein_poly(p, r):
    """Coefficients (low to high) of Phi_{p^r}(1 + X); monic of degree e."""
    if r == 0:
        return (0, 1)
    q = p ** (r - 1)
    e = ram_index(p, r)
    # ((1+X)^{pq} - 1) / ((1+X)^q - 1), by long division from the top
    num = _binom_row(p * q)[1:]
    den = _binom_row(q)[1:]
    coeffs = [0] * (e + 1)
    for i in range(e, -1, -1):
        c = num[i + q - 1]
        coeffs[i] = c
        if c:
            for j in range(q):
                num[i + j] -= c * den[j]
    assert coeffs[e] == 1
    return tuple(coeffs)


def _ceil_div(a, b):
    return -((-a) // b)


def _pack(coeffs, bits):
    out = 0
    for c in reversed(coeffs):
        out = (out << bits) | c
    return out


def _unpack(n, bits, count):
    mask = (1 << bits) - 1
    out = []
    for _ in range(count):
        out.append(n & mask)
        n >>= bits
    return out


def _polymul(a, b, mod):
    """Product of nonnegative integer polynomials, coefficients reduced mod ``mod``."""
    if not a or not b:
        return []
    a = [x % mod for x in a]
    b = [x % mod for x in b]
    bits = 2 * mod.bit_length() + max(len(a), len(b)).bit_length() + 1
    prod = _pack(a, bits) * _pack(b, bits)
    return [c % mod for c in _unpack(prod, bits, len(a) + len(b) - 1)]


class CycloScalar:
    __slots__ = ("p", "r", "e", "coeffs", "prec")

    def __init__(self, p, r, coeffs, prec):
        self.p = p
        self.r = r
        self.e = ram_index(p, r)
        self.prec = prec
        c = [int(x) for x in coeffs]
        if len(c) > self.e:
            c = _reduce_poly(c, p, r, _ceil_div(prec, self.e))
        c = c + [0] * (self.e - len(c))
        self.coeffs = self._canonical(c)

    # coefficient i is relevant modulo p^ceil((prec - i)/e)
    def _canonical(self, c):
        e, p, P = self.e, self.p, self.prec
        out = []
        for i, x in enumerate(c):
            w = _ceil_div(P - i, e)
            out.append(x % p ** w if w > 0 else 0)
        return out

    @classmethod
    def from_padic(cls, x, r):
        e = ram_index(x.p, r)
        if x.is_zero():
            return cls(x.p, r, [0], e * x.prec)
        if x.val < 0:
            raise DomainError("element is not integral")
        return cls(x.p, r, [x.to_int()], e * x.prec)

    @classmethod
    def from_int(cls, p, r, n, prec):
        return cls(p, r, [n], prec)

    @classmethod
    def zeta_power(cls, p, r, s, prec):
        """zeta^s (s taken modulo p^r)."""
        s %= max(1, p ** r)
        one = cls(p, r, [1], prec)
        z = cls(p, r, [1, 1] if r else [1], prec)
        out = one
        while s:
            if s & 1:
                out = out * z
            z = z * z
            s >>= 1
        return out

    # -- inspection -------------------------------------------------------

    def is_zero(self):
        return not any(self.coeffs)

    def pi_valuation(self):
        """Valuation in pi-adic units (an integer)."""
        best = None
        for i, c in enumerate(self.coeffs):
            if c:
                v = self.e * vp(c, self.p) + i
                best = v if best is None else min(best, v)
        if best is None or best >= self.prec:
            raise IndeterminateValuationError(
                f"zero to precision pi^{self.prec}", achieved=self.prec)
        return best

    def lower_pi_val(self):
        try:
            return self.pi_valuation()
        except IndeterminateValuationError:
            return self.prec

    def valuation(self):
        return Fraction(self.pi_valuation(), self.e)

    def norm(self):
        """Norm to Z of the integer representative (small e only)."""
        e = self.e
        if e > 64:
            raise DomainError("norm is only computed for e <= 64")
        cols = []
        y = list(self.coeffs)
        for _ in range(e):
            cols.append(list(y))
            y = _reduce_exact([0] + y, self.p, self.r)
        mat = [[cols[j][i] for j in range(e)] for i in range(e)]
        return _bareiss_det(mat)

    def norm_valuation(self):
        """Independent valuation check via v_p of the norm."""
        n = self.norm()
        if n == 0:
            raise IndeterminateValuationError("norm vanishes")
        v = vp(n, self.p)
        if v >= self.prec:
            raise IndeterminateValuationError(f"zero to precision pi^{self.prec}")
        return Fraction(v, self.e)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, CycloScalar):
            if (other.p, other.r) != (self.p, self.r):
                raise DomainError("mixing cyclotomic levels")
            return other
        if isinstance(other, int):
            return CycloScalar(self.p, self.r, [other], self.prec + self.e * (abs(other).bit_length() + 2))
        if isinstance(other, PadicScalar):
            return CycloScalar.from_padic(other, self.r)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        P = min(self.prec, other.prec)
        return CycloScalar(self.p, self.r, [a + b for a, b in zip(self.coeffs, other.coeffs)], P)

    __radd__ = __add__

    def __neg__(self):
        return CycloScalar(self.p, self.r, [-a for a in self.coeffs], self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PadicScalar):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        P = min(self.prec + other.lower_pi_val(), other.prec + self.lower_pi_val())
        if P <= 0:
            return CycloScalar(self.p, self.r, [0], max(P, 0))
        W = _ceil_div(P, self.e)
        mod = self.p ** W
        prod = _polymul(self.coeffs, other.coeffs, mod)
        return CycloScalar(self.p, self.r, _reduce_poly(prod, self.p, self.r, W), P)

    __rmul__ = __mul__

    def scale(self, s):
        """Multiply by a p-adic scalar."""
        if s.is_zero():
            return CycloScalar(self.p, self.r, [0], self.lower_pi_val() + self.e * s.prec)
        if s.val < 0:
            raise DomainError("scalar is not integral")
        P = min(self.prec + self.e * s.val, self.lower_pi_val() + self.e * s.prec)
        si = s.to_int()
        return CycloScalar(self.p, self.r, [c * si for c in self.coeffs], P)

    def div_scalar(self, s):
        """Exact division by a p-adic scalar with v(self) >= v(s)."""
        a = s.valuation()
        pa = self.p ** a
        if any(c % pa for c in self.coeffs):
            raise DomainError("quotient is not integral")
        P = min(self.prec - self.e * a, self.lower_pi_val() - self.e * a + self.e * s.relprec)
        W = max(1, _ceil_div(P, self.e))
        inv = pow(s.unit, -1, self.p ** W)
        return CycloScalar(self.p, self.r, [(c // pa) * inv for c in self.coeffs], P)

    def mul_by_pi(self):
        if self.r == 0:
            return self * self.p
        return CycloScalar(self.p, self.r, [0] + self.coeffs, self.prec + 1)

    def mul_by_zeta(self):
        return self + self.mul_by_pi() if self.r else self

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = CycloScalar(self.p, self.r, [1], self.prec + self.e * k + 1)
        b = self
        while k:
            if k & 1:
                out = out * b
            b = b * b
            k >>= 1
        return out

    def reduce(self, P):
        return self if P >= self.prec else CycloScalar(self.p, self.r, self.coeffs, P)

    def embed(self, r2):
        """Image at level r2 >= r under zeta_{p^r} = zeta_{p^r2}^{p^(r2-r)}."""
        if r2 < self.r:
            raise DomainError("can only embed upward")
        if r2 == self.r:
            return self
        e2 = ram_index(self.p, r2)
        P2 = self.prec * e2 // self.e
        if self.r == 0:
            return CycloScalar(self.p, r2, self.coeffs[:1], P2)
        pi_img = CycloScalar.zeta_power(self.p, r2, self.p ** (r2 - self.r), P2 + e2) - 1
        acc = CycloScalar(self.p, r2, [0], P2 + e2)
        for c in reversed(self.coeffs):
            acc = acc * pi_img + c
        return acc.reduce(P2)

    def __eq__(self, other):
        if not isinstance(other, CycloScalar):
            return NotImplemented
        return (self.p, self.r, self.prec, self.coeffs) == (other.p, other.r, other.prec, other.coeffs)

    def __hash__(self):
        return hash((self.p, self.r, self.prec, tuple(self.coeffs)))

    def agrees(self, other, P=None):
        other = self._coerce(other)
        P = min(self.prec, other.prec) if P is None else P
        return (self - other).reduce(P).is_zero()

    def __repr__(self):
        terms = [f"{c}*pi^{i}" if i else str(c) for i, c in enumerate(self.coeffs) if c]
        return f"CycloScalar(p={self.p}, r={self.r}, {' + '.join(terms) or '0'} + O(pi^{self.prec}))"

    def to_json(self):
        return {"p": self.p, "r": self.r, "prec_pi": self.prec, "coeffs": [str(c) for c in self.coeffs]}


def _reduce_poly(c, p, r, W):
    """Reduce a polynomial in pi modulo E(pi) and p^W."""
    e = ram_index(p, r)
    mod = p ** W
    c = [x % mod for x in c]
    if r == 0:
        return [c[0] % mod] if c else [0]
    E = eisenstein_poly(p, r)
    neg_low = [(-x) % mod for x in E[:e]]
    # pi^e = -E_low, whose coefficients are all divisible by p
    for _ in range(W + 2):
        if len(c) <= e or not any(c[e:]):
            break
        low, high = c[:e], c[e:]
        add = _polymul(high, neg_low, mod)
        c = [(low[i] if i < e else 0) + (add[i] if i < len(add) else 0)
             for i in range(max(e, len(add)))]
        c = [x % mod for x in c]
    else:
        raise AssertionError("reduction did not terminate")
    return c[:e]


def _reduce_exact(c, p, r):
    e = ram_index(p, r)
    E = eisenstein_poly(p, r)
    c = list(c)
    for d in range(len(c) - 1, e - 1, -1):
        t = c[d]
        if t:
            for i in range(e + 1):
                c[d - e + i] -= t * E[i]
    return (c + [0] * e)[:e]


def _bareiss_det(m):
    n = len(m)
    a = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]
