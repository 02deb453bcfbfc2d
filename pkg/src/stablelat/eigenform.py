"""Ramanujan's Delta, its Eisenstein congruences, and lattice counts from L_p.

Two independent routes to the number of stable lattices:

* the congruence route: the largest m with tau(l) = l^a + l^{11-a} mod p^m
  for all primes l <= B (l != p), giving count m + 1;
* the L_p route: count = ord(L_p(1-k, chi_zeta chi1^{-1} chi2 omega)) + 1,
  with ord normalized by the ramification of Z_p[zeta].

``lattice_count_from_Lp`` only evaluates the formula; whether the hypotheses
behind it hold is the caller's responsibility.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from sympy import primerange

from .characters import DirichletChar
from .cyclo import CycloScalar, ram_index
from .errors import DomainError, IndeterminateValuationError, NonOrdinaryError, PrecisionError
from .iwasawa import G_hat, evaluate_at, invariants_refit, zeros_in_Zp
from .lvalues import kubota_leopoldt
from .padic import PadicScalar, generator_u, u_pow_mod


# -- q-expansions ----------------------------------------------------------------

def _signed_pack(coeffs, bits):
    out = 0
    for c in reversed(coeffs):
        out = (out << bits) + c
    return out


def _signed_unpack(n, bits, count):
    half = 1 << (bits - 1)
    mask = (1 << bits) - 1
    out = []
    for _ in range(count):
        c = n & mask
        if c >= half:
            c -= 1 << bits
        out.append(c)
        n = (n - c) >> bits
    return out


def series_mul(a, b, B):
    """Product of integer series truncated to B terms."""
    if not a or not b:
        return []
    m = max(max(abs(x) for x in a), 1).bit_length() + max(max(abs(x) for x in b), 1).bit_length()
    bits = m + min(len(a), len(b)).bit_length() + 2
    prod = _signed_pack(a[:B], bits) * _signed_pack(b[:B], bits)
    return _signed_unpack(prod, bits, B)


@dataclass
class QExpansion:
    coeffs: list
    label: str = "Delta"

    def __getitem__(self, n):
        return self.coeffs[n]

    @property
    def bound(self):
        return len(self.coeffs) - 1


def delta_expansion(B):
    """tau(n) for n <= B, from q * (prod (1-q^n)^3)^8 with Jacobi's triple product."""
    if B < 1:
        raise DomainError("B must be positive")
    L = B
    eta3 = [0] * L
    m = 0
    while m * (m + 1) // 2 < L:
        eta3[m * (m + 1) // 2] = (-1) ** m * (2 * m + 1)
        m += 1
    sq = series_mul(eta3, eta3, L)
    p4 = series_mul(sq, sq, L)
    p8 = series_mul(p4, p4, L)
    return QExpansion([0] + p8[:B])


_TAU = {}


def tau_table(B):
    cached = _TAU.get("t")
    if cached is None or cached.bound < B:
        _TAU["t"] = delta_expansion(max(B, 2000))
    return _TAU["t"]


# -- Eisenstein congruences -------------------------------------------------------

@dataclass
class CongruenceReport:
    p: int
    a: int
    a_pair: tuple
    modulus: int
    m: int
    witnesses: list
    bound: int
    stable: bool
    m_without_margin: int
    margin: int = 50

    @property
    def count(self):
        return self.m + 1

    def to_json(self):
        return {"p": self.p, "a": self.a, "a_pair": list(self.a_pair), "a_modulus": self.modulus,
                "m": self.m, "count": self.count, "witnesses": self.witnesses, "bound": self.bound,
                "stable": self.stable, "margin_primes": self.margin,
                "m_without_margin": self.m_without_margin}


def _max_congruence(p, primes, taus, m_cap):
    """(m, surviving residues a mod (p-1)p^{m-1}) for the given primes."""
    if not primes:
        return m_cap, [0]
    # level 1: a mod p-1
    cands = []
    for a in range(p - 1):
        if all((t - pow(l, a, p) - pow(l, (11 - a) % (p - 1), p)) % p == 0 for l, t in zip(primes, taus)):
            cands.append(a)
    if not cands:
        return 0, []
    m = 1
    while m < m_cap:
        step = (p - 1) * p ** (m - 1)
        mod = p ** (m + 1)
        nxt = []
        for a in cands:
            for j in range(p):
                a2 = a + j * step
                if all((t - pow(l, a2, mod) - pow(l, 11 - a2, mod)) % mod == 0 for l, t in zip(primes, taus)):
                    nxt.append(a2)
        if not nxt:
            break
        cands = nxt
        m += 1
    return m, cands


def eisenstein_congruence(p, B=2000, margin=50, m_cap=30):
    """Largest m with tau(l) = l^a + l^{11-a} mod p^m for all primes l <= B, l != p.

    The exponent a runs over Z, i.e. over residues mod (p-1)p^{m-1}.
    """
    if B < 200:
        raise DomainError("prime bound must be at least 200")
    tau = tau_table(B)
    primes = [l for l in primerange(2, B + 1) if l != p]
    taus = [tau[l] for l in primes]
    m, cands = _max_congruence(p, primes, taus, m_cap)
    m_short, _ = _max_congruence(p, primes[:-margin], taus[:-margin], m_cap)
    modulus = (p - 1) * p ** (m - 1) if m else 1
    if cands:
        norm = sorted({a % modulus for a in cands} | {(11 - a) % modulus for a in cands})
        a = min(norm)
        pair = (a, (11 - a) % modulus)
    else:
        a, pair = 0, (0, 0)
    witnesses = []
    if m:
        mod = p ** (m + 1)
        for l, t in zip(primes, taus):
            if (t - pow(l, a, mod) - pow(l, 11 - a, mod)) % mod:
                witnesses.append(l)
                if len(witnesses) >= 5:
                    break
    else:
        witnesses = [l for l, t in zip(primes, taus)
                     if all((t - pow(l, b, p) - pow(l, (11 - b) % (p - 1), p)) % p for b in range(p - 1))][:5]
    return CongruenceReport(p, a, pair, modulus, m, witnesses, B, m == m_short, m_short, margin)


# -- counts from L_p ----------------------------------------------------------------

def check_ordinary(p, form="delta"):
    if form is None:
        return
    if form != "delta":
        raise DomainError(f"unknown form {form!r}")
    t = tau_table(max(p, 200))[p] if p <= 20000 else None
    if t is None:
        raise DomainError("tau(p) beyond the tabulated range")
    if t % p == 0:
        raise NonOrdinaryError(f"tau({p}) = {t} is divisible by {p}: Delta is not {p}-ordinary")


def family_character(chi1, chi2, zeta=(0, 0)):
    """chi_zeta chi1^{-1} chi2 omega."""
    p = chi2.p
    psi = chi1.inverse() * chi2 * DirichletChar.omega_power(p, 1)
    r, m = zeta
    if r:
        psi = psi * DirichletChar.chi_zeta(p, r, m)
    return psi


@dataclass
class CountResult:
    p: int
    k: int
    zeta: tuple
    psi: str
    ord: int
    count: int
    label: str
    precision: int
    valuation: Fraction

    def to_json(self):
        return {"p": self.p, "k": self.k, "zeta": list(self.zeta), "psi": self.psi, "ord": self.ord,
                "count": self.count, "label": self.label, "precision": self.precision,
                "valuation": str(self.valuation), "u": generator_u(self.p)}


def lattice_count_from_Lp(p, k, chi, zeta=(0, 0), N=8, chi1=None, hypothesis_mode="exact",
                          form=None, max_prec=64):
    """ord_varpi L_p(1-k, chi_zeta chi1^{-1} chi omega) + 1."""
    if form is not None:
        check_ordinary(p, form)
    chi1 = chi1 or DirichletChar.trivial(p)
    psi = family_character(chi1, chi, zeta)
    e = ram_index(p, psi.wild_r)
    prec = N
    while True:
        val = kubota_leopoldt(k, psi, prec)
        try:
            v = Fraction(val.valuation())
            break
        except IndeterminateValuationError:
            if prec >= max_prec:
                raise PrecisionError(f"L-value vanishes to precision {prec}", needed=prec + 1, achieved=prec)
            prec *= 2
    if v < 0:
        raise DomainError("L-value is not integral")
    ordv = v * e
    label = "upper bound" if hypothesis_mode == "upper" else "exact"
    return CountResult(p, k, tuple(zeta), psi.label(), int(ordv), int(ordv) + 1, label, prec, v)


def count_from_series(Gh, k, zeta):
    """ord_varpi Ghat(zeta u^{k-2} - 1) + 1 via series evaluation."""
    p = Gh.p
    r, m = zeta
    N = Gh.M + 6
    if r == 0:
        x = PadicScalar(p, u_pow_mod(k - 2, p, N) - 1, N)
        e = 1
    else:
        e = ram_index(p, r)
        if e > 20000:
            raise DomainError(f"Z_p[zeta_{p}^{r}] has degree {e}; too large to evaluate in")
        x = CycloScalar.zeta_power(p, r, m, e * N).scale(PadicScalar(p, u_pow_mod(k - 2, p, N), N)) - 1
    y = evaluate_at(Gh, x)
    v = y.valuation()
    return int(Fraction(v) * e), y


@dataclass
class ScanTable:
    p: int
    mode: str
    rows: list
    checks: dict = field(default_factory=dict)

    def to_json(self):
        return {"p": self.p, "mode": self.mode, "rows": self.rows, "checks": self.checks,
                "u": generator_u(self.p)}


def _count_row(task):
    p, k, chi, zeta, N, chi1 = task
    res = lattice_count_from_Lp(p, k, chi, zeta, N=N, chi1=chi1)
    return {"k": k, "zeta": list(zeta), "ord": res.ord, "count": res.count}


def weight_variation_scan(p, chi, mode, ks=None, zetas=None, ns=(1, 2, 3), M=8, N=8, chi1=None,
                          crosscheck=False, jobs=1):
    """Counts along a family of specializations.

    modes: ``fixed-zeta`` (zeta = 1; uses k_n = s0 + p^n when ks is None),
    ``fixed-k`` (ks[0] fixed, zetas varying), ``tail`` (levels r >= 1, every
    k in ks and zeta in zetas; checks the constant count deg Ghat* + 1).
    """
    chi1 = chi1 or DirichletChar.trivial(p)
    hat_char = chi1.inverse() * chi
    rows = []
    checks = {}
    if mode == "fixed-zeta":
        zeta = (zetas or [(0, 0)])[0]
        if ks is None:
            roots, rep, _ = zeros_in_Zp(hat_char, zeta, M=M, N=N)
            s0s = [r.s0 for r in roots if r.s0 is not None]
            checks["lambda"] = rep.lam
            checks["zeros"] = [s.to_json() for s in s0s]
            if not s0s:
                ks = [2 + p ** n for n in ns]
                checks["note"] = "no zero in Z_p: weights k_n = 2 + p^n"
            else:
                s0 = s0s[0]
                ks = []
                for n in ns:
                    if s0.prec < n:
                        raise PrecisionError("zero known to too few digits", needed=n, achieved=s0.prec)
                    ks.append(s0.to_int() % p ** n + p ** n)
        tasks = [(p, k, chi, zeta, max(N, 4 + max(ns)), chi1) for k in ks]
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows.extend(pool.map(_count_row, tasks))
        else:
            rows.extend(map(_count_row, tasks))
        counts = [r["count"] for r in rows]
        checks["strictly_increasing"] = all(a < b for a, b in zip(counts, counts[1:]))
        checks["bounded_constant"] = len(set(counts)) == 1
    elif mode in ("tail", "fixed-k"):
        ks = ks or [2, 4, 12]
        if mode == "fixed-k":
            ks = ks[:1]
        zetas = zetas or [(1, 1), (1, 2)]
        Gh, rep = invariants_refit(lambda m: G_hat(hat_char, m, max(N, m)), M0=M)
        # rank one over the weight algebra
        bound = rep.lam + 1
        checks["rank"] = 1
        checks["deg_distinguished"] = rep.lam
        checks["bound"] = bound
        for k in ks:
            for zeta in zetas:
                if zeta[0] < 1 and mode == "tail":
                    raise DomainError("tail mode needs r >= 1")
                ordv, _ = count_from_series(Gh, k, zeta)
                row = {"k": k, "zeta": list(zeta), "ord": ordv, "count": ordv + 1}
                if crosscheck:
                    row["count_direct"] = lattice_count_from_Lp(p, k, chi, zeta, N=2, chi1=chi1).count
                rows.append(row)
        counts = [r["count"] for r in rows]
        checks["constant"] = len(set(counts)) == 1
        checks["bound_respected"] = all(c <= bound for c in counts)
        checks["lemma_consistent"] = all(r["ord"] == rep.lam for r in rows if r["zeta"][0] >= 1)
    else:
        raise DomainError(f"unknown scan mode {mode!r}")
    rows.sort(key=lambda r: (r["zeta"], r["k"]))
    return ScanTable(p, mode, rows, checks)


def p547_report(M=8, N=8):
    """Iwasawa-side data for Ghat_{omega^485} at p = 547 and the conditional count window."""
    p = 547
    chi = DirichletChar.omega_power(p, 485)
    roots, rep, F = zeros_in_Zp(chi, (0, 0), M=M, N=N)
    vals = [r.x0.valuation() for r in roots if r.certified]
    return {
        "p": p, "psi": chi.label(), "mu": str(rep.mu), "lambda": rep.lam,
        "zero_valuations": vals,
        "count_window": [2, 3] if rep.lam == 1 else None,
        "conditional": "window depends on the factorization of X - a in a rank-2 Hecke algebra; not decided",
        "u": generator_u(p),
    }
