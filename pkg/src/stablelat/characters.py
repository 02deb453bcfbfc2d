"""Primitive Dirichlet characters with values in Z_p[zeta_{p^r}].

A character is the product of three pieces:

* a tame part omega^a (omega the Teichmüller character mod p),
* a wild part chi_zeta of (Z/p^{r+1})^x determined by chi(u) = zeta_{p^r}^m,
* an away-from-p part mod N (p not dividing N) of order dividing p - 1.

Every value is gamma^t * zeta^s with gamma = omega(g) for the least
primitive root g mod p; characters store and compare the exponent data
(t, s) only, so values are exact until embedded at some precision.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd

import gmpy2
from sympy import primitive_root

from .cyclo import CycloScalar, ram_index
from .errors import DomainError
from .padic import PadicScalar, generator_u, teichmuller_int


@lru_cache(maxsize=None)
def _dlog_table_p(p):
    g = primitive_root(p)
    table = {}
    x = 1
    for i in range(p - 1):
        table[x] = i
        x = x * g % p
    return g, table


@lru_cache(maxsize=None)
def _dlog_table_u(p, r):
    """s -> u^s mod p^{r+1}, inverted."""
    mod = p ** (r + 1)
    u = generator_u(p)
    table = {}
    x = 1
    for s in range(p ** r):
        table[x] = s
        x = x * u % mod
    return table


def primitive_root_mod(p):
    return _dlog_table_p(p)[0]


def tame_dlog(n, p):
    """Index of n mod p with respect to the least primitive root."""
    return _dlog_table_p(p)[1][n % p]


def wild_dlog(n, p, r):
    """s mod p^r with <n> = u^s mod p^{r+1}."""
    if r == 0:
        return 0
    mod = p ** (r + 1)
    w = teichmuller_int(n, p, r + 1)
    angle = n * pow(w, -1, mod) % mod
    return _dlog_table_u(p, r)[angle]


def gamma(p, N):
    """omega(g) to precision N (g the least primitive root mod p)."""
    return teichmuller_int(primitive_root_mod(p), p, N)


def kronecker(D, n):
    """Kronecker symbol (D/n)."""
    return int(gmpy2.kronecker(D, n))


def _canon_away(p, N, exps):
    """Primitive (conductor, table) for an away-part exponent table."""
    q = p - 1
    exps = {n % N: e % q for n, e in exps.items() if gcd(n, N) == 1}
    for n in range(N):
        if gcd(n, N) == 1 and n not in exps:
            raise DomainError(f"away table missing residue {n} mod {N}")
    # consistency: multiplicativity
    units = sorted(exps)
    for a in units[:50]:
        for b in units[:50]:
            if exps[a * b % N] != (exps[a] + exps[b]) % q:
                raise DomainError("away table is not multiplicative")
    divisors = sorted(d for d in range(1, N + 1) if N % d == 0)
    for d in divisors:
        if all(e == 0 for n, e in exps.items() if n % d == 1 % d):
            table = {}
            for n in range(d):
                if gcd(n, d) == 1:
                    m = n
                    while gcd(m, N) != 1:
                        m += d
                    table[n] = exps[m % N]
            if d == 1:
                return 1, ()
            return d, tuple(sorted(table.items()))
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class DirichletChar:
    p: int
    tame: int = 0
    wild_r: int = 0
    wild_m: int = 0
    away_N: int = 1
    away: tuple = field(default=())

    def __post_init__(self):
        p = self.p
        if p == 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
            raise DomainError(f"{p} is not an odd prime")
        object.__setattr__(self, "tame", self.tame % (p - 1))
        r, m = self.wild_r, self.wild_m
        if r < 0:
            raise DomainError("wild level must be nonnegative")
        m %= max(1, p ** r)
        while r > 0 and m % p == 0:
            m //= p
            r -= 1
        if r == 0:
            m = 0
        object.__setattr__(self, "wild_r", r)
        object.__setattr__(self, "wild_m", m)
        if self.away_N % p == 0:
            raise DomainError("away modulus must be prime to p")
        N, tab = _canon_away(p, self.away_N, dict(self.away) if self.away_N > 1 else {0: 0})
        object.__setattr__(self, "away_N", N)
        object.__setattr__(self, "away", tab)

    # -- constructors -----------------------------------------------------

    @classmethod
    def trivial(cls, p):
        return cls(p)

    @classmethod
    def omega_power(cls, p, a):
        return cls(p, tame=a)

    @classmethod
    def chi_zeta(cls, p, r, m=1):
        """chi with chi(u) = zeta_{p^r}^m."""
        return cls(p, wild_r=r, wild_m=m)

    @classmethod
    def kronecker_char(cls, p, D):
        """The quadratic character n -> (D/n), viewed with values in Z_p."""
        N = abs(D) if D % 4 in (0, 1) else 4 * abs(D)
        if N % p == 0:
            # the p-part of a quadratic character is omega^{(p-1)/2}
            Np = N
            while Np % p == 0:
                Np //= p
            tame = (p - 1) // 2
            rest = {}
            for n in range(Np):
                if gcd(n, Np) == 1:
                    m = n
                    while m % p == 0:
                        m += Np
                    sq = kronecker(D, m) * kronecker(p if p % 4 == 1 else -p, m)
                    rest[n] = 0 if sq == 1 else (p - 1) // 2
            return cls(p, tame=tame, away_N=Np, away=tuple(rest.items())) if Np > 1 else cls(p, tame=tame)
        exps = {n: 0 if kronecker(D, n) == 1 else (p - 1) // 2 for n in range(N) if gcd(n, N) == 1}
        return cls(p, away_N=N, away=tuple(exps.items()))

    # -- structure --------------------------------------------------------

    @property
    def conductor(self):
        pp = self.p ** (self.wild_r + 1) if self.wild_r else (self.p if self.tame else 1)
        return pp * self.away_N

    def is_trivial(self):
        return self.tame == 0 and self.wild_r == 0 and self.away_N == 1

    def factors_through_gamma(self):
        return self.tame == 0 and self.away_N == 1

    def tame_away_part(self):
        return DirichletChar(self.p, self.tame, 0, 0, self.away_N, self.away)

    def wild_part(self):
        return DirichletChar(self.p, 0, self.wild_r, self.wild_m)

    def _away_exp(self, n):
        if self.away_N == 1:
            return 0
        return dict(self.away)[n % self.away_N]

    def exponents(self, n):
        """(t, s) with chi(n) = gamma^t zeta_{p^r}^s, or None when chi(n) = 0."""
        if gcd(n, self.conductor) != 1:
            return None
        p = self.p
        t = self._away_exp(n)
        s = 0
        if n % p:
            t += self.tame * tame_dlog(n, p)
            if self.wild_r:
                s = self.wild_m * wild_dlog(n, p, self.wild_r) % p ** self.wild_r
        return t % (p - 1), s

    def parity(self):
        t, _ = self.exponents(-1 % self.conductor if self.conductor > 1 else 1) or (0, 0)
        return 1 if t == 0 else -1

    def is_even(self):
        return self.parity() == 1

    def __mul__(self, other):
        if not isinstance(other, DirichletChar):
            return NotImplemented
        if other.p != self.p:
            raise DomainError("characters for different primes")
        R = max(self.wild_r, other.wild_r)
        m = (self.wild_m * self.p ** (R - self.wild_r) + other.wild_m * self.p ** (R - other.wild_r)) if R else 0
        N = self.away_N * other.away_N // gcd(self.away_N, other.away_N)
        exps = {}
        if N > 1:
            for n in range(N):
                if gcd(n, N) == 1:
                    exps[n] = self._away_exp(n) + other._away_exp(n)
        return DirichletChar(self.p, self.tame + other.tame, R, m, N, tuple(exps.items()))

    def inverse(self):
        q = self.p - 1
        return DirichletChar(self.p, -self.tame, self.wild_r, -self.wild_m, self.away_N,
                             tuple((n, (-e) % q) for n, e in self.away))

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = DirichletChar.trivial(self.p)
        for _ in range(k % (self.order())):
            out = out * self
        return out

    def order(self):
        from math import lcm
        q = self.p - 1
        o = q // gcd(self.tame, q)
        for _, e in self.away:
            o = lcm(o, q // gcd(e, q))
        return o * (self.p ** self.wild_r // gcd(self.wild_m, self.p ** self.wild_r) if self.wild_r else 1)

    def twist_omega(self, j):
        return self * DirichletChar.omega_power(self.p, j)

    # -- values -----------------------------------------------------------

    def value_at_u(self, prec):
        """chi(u) = zeta^m as a CycloScalar (u is in 1 + pZ, so only the wild part sees it)."""
        u = generator_u(self.p)
        return self.eval(u, prec)

    def eval(self, n, N=20):
        """chi(n) in Z_p[zeta_{p^r}] to p-adic precision N (pi-adic precision e*N)."""
        r = self.wild_r
        e = ram_index(self.p, r)
        ex = self.exponents(n)
        if ex is None:
            return CycloScalar(self.p, r, [0], e * N)
        t, s = ex
        g = pow(gamma(self.p, N), t, self.p ** N)
        return CycloScalar.zeta_power(self.p, r, s, e * N).scale(PadicScalar(self.p, g, N))

    def eval_padic(self, n, N=20):
        """chi(n) as a PadicScalar; only for characters with trivial wild part."""
        if self.wild_r:
            raise DomainError("character is not Z_p-valued")
        ex = self.exponents(n)
        if ex is None:
            return PadicScalar.zero(self.p, N)
        return PadicScalar(self.p, pow(gamma(self.p, N), ex[0], self.p ** N), N)

    # -- text / JSON ------------------------------------------------------

    def label(self):
        parts = []
        if self.tame:
            parts.append(f"w{self.tame}")
        if self.wild_r:
            parts.append(f"z{self.wild_r}.{self.wild_m}")
        if self.away_N > 1:
            parts.append("away" + json.dumps({"N": self.away_N, "values": dict(self.away)},
                                             sort_keys=True, separators=(",", ":")))
        return "*".join(parts) or "1"

    def __str__(self):
        return self.label()

    def to_json(self):
        return {"p": self.p, "tame_exp": self.tame, "wild_r": self.wild_r,
                "wild_zeta_exp": self.wild_m,
                "away": {"N": self.away_N, "values": {str(n): e for n, e in self.away}},
                "conductor": self.conductor, "even": self.is_even()}

    @classmethod
    def from_json(cls, d):
        away = d.get("away") or {"N": 1, "values": {}}
        vals = tuple((int(n), int(e)) for n, e in away.get("values", {}).items())
        return cls(d["p"], d.get("tame_exp", 0), d.get("wild_r", 0), d.get("wild_zeta_exp", 0),
                   away.get("N", 1), vals)


_TOKEN = re.compile(r"^(?:w(-?\d+)|z(\d+)\.(-?\d+)|kron(-?\d+)|1|trivial)$")


def parse_character(p, spec):
    """Parse a character spec.

    Tokens joined by ``*``: ``w<a>`` (omega^a), ``z<r>.<m>`` (chi_zeta with
    zeta = zeta_{p^r}^m), ``kron<D>`` (Kronecker symbol of D), ``1``.  A
    string starting with ``{`` is read as the JSON form.
    """
    spec = spec.strip()
    if spec.startswith("{"):
        d = json.loads(spec)
        d.setdefault("p", p)
        if d["p"] != p:
            raise DomainError("character JSON is for another prime")
        return DirichletChar.from_json(d)
    chi = DirichletChar.trivial(p)
    for tok in spec.replace(" ", "").split("*"):
        m = _TOKEN.match(tok)
        if not m:
            raise ValueError(f"unknown character token {tok!r}")
        if m.group(1) is not None:
            chi = chi * DirichletChar.omega_power(p, int(m.group(1)))
        elif m.group(2) is not None:
            chi = chi * DirichletChar.chi_zeta(p, int(m.group(2)), int(m.group(3)))
        elif m.group(4) is not None:
            chi = chi * DirichletChar.kronecker_char(p, int(m.group(4)))
    return chi
