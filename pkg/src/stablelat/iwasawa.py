"""Iwasawa power series attached to p-adic L-functions.

``fit_G_series`` recovers G_psi(X) mod X^M from the values
L_p(1-k, psi) * H_psi(u^k - 1) at M weights k_j = k_0 + (p-1) j.  The fit
is a Newton divided-difference solve in tracked arithmetic, so every
coefficient carries the precision actually justified by the inputs; on top
of that, coefficient i is capped by the truncation error of ignoring the
terms of degree >= M (the sum of the M-i smallest v(x_j)).

Everything downstream (hat-series, evaluation, invariants, zeros) keeps the
per-coefficient precisions and never reports more.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .characters import DirichletChar
from .cyclo import CycloScalar, ram_index
from .errors import (DomainError, IndeterminateValuationError, ParityError, PrecisionError,
                     UndecidableInvariantsError)
from .lvalues import lp_times_H
from .padic import PadicScalar, generator_u, hensel_root, plog, u_pow_mod, vp


# -- scalar helpers (PadicScalar or CycloScalar) ---------------------------

def _e(c):
    return c.e if isinstance(c, CycloScalar) else 1


def _prec(c):
    """Absolute precision in p-adic units (Fraction)."""
    return Fraction(c.prec, c.e) if isinstance(c, CycloScalar) else Fraction(c.prec)


def _lower_val(c):
    if isinstance(c, CycloScalar):
        return Fraction(c.lower_pi_val(), c.e)
    return Fraction(c.lower_val())


def _is_zero(c):
    return c.is_zero()


def _cap(c, P):
    """Lower the precision of ``c`` to P p-adic units (rounded down)."""
    if isinstance(c, CycloScalar):
        return c.reduce(int(Fraction(P) * c.e // 1))
    return c.reduce(int(Fraction(P) // 1))


def _div(a, d):
    if isinstance(a, CycloScalar):
        return a.div_scalar(d)
    return a / d


def _scale(a, s):
    """a * s for a scalar a and PadicScalar s."""
    if isinstance(a, CycloScalar):
        return a.scale(s)
    return a * s


def _to_cyclo(c, r):
    if isinstance(c, CycloScalar):
        return c.embed(r) if c.r < r else c
    return CycloScalar.from_padic(c, r)


# -- the series type ---------------------------------------------------------

@dataclass
class PSeries:
    """F(X) = sum c_i X^i, known mod X^M; coefficient i is known to its own precision.

    ``tail`` is a lower bound for v(c_i), i >= M (None for an exact polynomial).
    """

    p: int
    coeffs: list
    tail: Fraction | None = Fraction(0)
    label: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def M(self):
        return len(self.coeffs)

    @property
    def precisions(self):
        return [_prec(c) for c in self.coeffs]

    @classmethod
    def polynomial(cls, p, coeffs, prec=60, label=""):
        """Exact polynomial with integer or Fraction coefficients (low to high)."""
        return cls(p, [PadicScalar(p, c, prec) for c in coeffs], None, label)

    def valuations(self):
        out = []
        for c in self.coeffs:
            try:
                out.append(c.valuation())
            except IndeterminateValuationError:
                out.append(None)
        return out

    def to_json(self):
        return {
            "p": self.p, "M": self.M, "label": self.label,
            "tail_val": None if self.tail is None else str(self.tail),
            "coeffs": [c.to_json() for c in self.coeffs],
            "precision": [str(x) for x in self.precisions],
        }


def H_poly(psi, prec=40):
    """H_psi(X) = psi(u)(1+X) - 1 if psi factors through Gamma, else 1."""
    p = psi.p
    if not psi.factors_through_gamma():
        return PSeries.polynomial(p, [1], prec, label="H")
    if psi.wild_r == 0:
        return PSeries.polynomial(p, [0, 1], prec, label="H")
    e = ram_index(p, psi.wild_r)
    z = CycloScalar.zeta_power(p, psi.wild_r, psi.wild_m, e * prec)
    return PSeries(p, [z - 1, z], None, label="H")


def H_hat(psi, prec=40):
    """H_{psi omega}(u^2(1+X) - 1)."""
    chi = psi * DirichletChar.omega_power(psi.p, 1)
    H = H_poly(chi, prec)
    return substitute_u2(H)


def node_weights(psi, M):
    p = psi.p
    k0 = psi.tame
    while k0 < 2:
        k0 += p - 1
    return [k0 + (p - 1) * j for j in range(M)]


def loss_bound(p, M):
    """A-priori digits lost in the divided-difference solve."""
    return sum(1 + vp(m, p) for m in range(1, M))


def truncation_caps(p, ks):
    vals = sorted(1 + vp(k, p) for k in ks)
    M = len(ks)
    return [sum(vals[:M - i]) for i in range(M)]


_FIT_CACHE = {}
_FIT_LOCK = threading.Lock()


def fit_G_series(psi, M, N, input_prec=None):
    """G_psi mod X^M with coefficients to at most N digits.

    Input L-values are computed to ``input_prec`` digits (default: N plus the
    a-priori loss bound).  Raises PrecisionError if some coefficient cannot
    reach min(N, truncation cap).
    """
    if not psi.is_even():
        raise ParityError("G_psi is only defined for even psi")
    if M < 1:
        raise DomainError("M must be positive")
    key = (psi, M, N, input_prec)
    with _FIT_LOCK:
        hit = _FIT_CACHE.get(key)
    if hit is not None:
        return hit
    p = psi.p
    ks = node_weights(psi, M)
    loss = loss_bound(p, M)
    Nin = N + loss if input_prec is None else input_prec
    xprec = Nin + loss + 8
    xs = [PadicScalar(p, u_pow_mod(k, p, xprec) - 1, xprec) for k in ks]
    ys = [lp_times_H(k, psi, Nin) for k in ks]
    d = list(ys)
    for m in range(1, M):
        for j in range(M - 1, m - 1, -1):
            d[j] = _div(d[j] - d[j - 1], xs[j] - xs[j - m])
    # Newton form -> monomial form
    big = xprec + 4
    poly = [PadicScalar(p, 1, big)]
    coeffs = [None] * M
    for m in range(M):
        for i, b in enumerate(poly):
            term = _scale(d[m], b)
            coeffs[i] = term if coeffs[i] is None else coeffs[i] + term
        if m < M - 1:
            nxt = [PadicScalar.zero(p, big)] * (len(poly) + 1)
            for i, b in enumerate(poly):
                nxt[i + 1] = nxt[i + 1] + b
                nxt[i] = nxt[i] - b * xs[m]
            poly = nxt
    caps = truncation_caps(p, ks)
    out = []
    for i, c in enumerate(coeffs):
        target = min(Fraction(N), Fraction(caps[i]))
        if _prec(c) < target:
            raise PrecisionError(
                f"coefficient {i} reached {_prec(c)} digits, {target} needed (loss bound {loss})",
                needed=target, achieved=_prec(c))
        out.append(_cap(c, target))
    series = PSeries(p, out, Fraction(0), label=f"G[{psi.label()}]",
                     meta={"psi": psi.label(), "nodes": ks, "input_prec": Nin, "loss_bound": loss,
                           "caps": caps, "u": generator_u(p), "N": N})
    with _FIT_LOCK:
        _FIT_CACHE.setdefault(key, series)
    return series


def substitute_u2(F):
    """F(u^2(1+X) - 1), truncated at the same M with tracked loss."""
    p = F.p
    M = F.M
    u2 = generator_u(p) ** 2
    a = u2 - 1
    va = vp(a, p)
    out = []
    for i in range(M):
        acc = None
        for n in range(i, M):
            s = PadicScalar(p, comb(n, i) * a ** (n - i) * u2 ** i, 4 * M + 80 + (n - i) * va)
            term = _scale(F.coeffs[n], s)
            acc = term if acc is None else acc + term
        if F.tail is not None:
            acc = _cap(acc, F.tail + (M - i) * va)
        out.append(acc)
    return PSeries(p, out, F.tail, label=f"hat({F.label})", meta=dict(F.meta))


def G_hat(psi, M, N):
    """Ghat_psi(X) = G_{psi omega}(u^2(1+X) - 1)."""
    chi = psi * DirichletChar.omega_power(psi.p, 1)
    if not chi.is_even():
        raise ParityError("Ghat_psi needs psi omega even")
    hat = substitute_u2(fit_G_series(chi, M, N))
    hat.label = f"Ghat[{psi.label()}]"
    hat.meta["hat_of"] = psi.label()
    return hat


def evaluate_at(F, x):
    """sum c_i x^i with certified precision; needs v(x) > 0."""
    if isinstance(x, (int, Fraction)):
        x = PadicScalar(F.p, x, 200)
    vx = _lower_val(x)
    try:
        vx = x.valuation()
    except IndeterminateValuationError:
        pass
    if vx <= 0:
        raise DomainError("evaluation point must have positive valuation")
    cyclo = isinstance(x, CycloScalar) or any(isinstance(c, CycloScalar) for c in F.coeffs)
    if cyclo:
        r = max([x.r if isinstance(x, CycloScalar) else 0] +
                [c.r for c in F.coeffs if isinstance(c, CycloScalar)])
        x = _to_cyclo(x, r)
        coeffs = [_to_cyclo(c, r) for c in F.coeffs]
    else:
        coeffs = F.coeffs
    cert = min(_prec(c) + i * vx for i, c in enumerate(coeffs))
    if F.tail is not None:
        cert = min(cert, F.tail + F.M * vx)
    acc = None
    xp = None
    for i, c in enumerate(coeffs):
        xp = x ** 0 if i == 0 else xp * x
        term = c * xp
        acc = term if acc is None else acc + term
    return _cap(acc, cert)


# -- Newton polygon ----------------------------------------------------------

def newton_polygon(points):
    """Lower convex hull of (i, v_i); returns [(slope, length)] left to right.

    Points with v None are skipped.  Root valuations are the negated slopes.
    """
    pts = sorted((i, Fraction(v)) for i, v in points if v is not None)
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return [((y2 - y1) / (x2 - x1), x2 - x1) for (x1, y1), (x2, y2) in zip(hull, hull[1:])]


def root_valuations(F):
    """[(valuation, multiplicity)] of the roots of a polynomial-like PSeries."""
    pts = [(i, _safe_val(c)) for i, c in enumerate(F.coeffs)]
    return [(-s, n) for s, n in newton_polygon(pts)]


def _safe_val(c):
    try:
        return c.valuation()
    except IndeterminateValuationError:
        return None


# -- invariants / Weierstrass ------------------------------------------------

@dataclass
class InvariantsReport:
    mu: Fraction
    lam: int
    distinguished: list | None
    distinguished_prec: int | None
    unit_leading: object | None
    certified: bool
    M: int
    notes: list = field(default_factory=list)

    def to_json(self):
        return {
            "mu": str(self.mu), "lambda": self.lam, "M": self.M, "certified": self.certified,
            "distinguished": None if self.distinguished is None else [str(c) for c in self.distinguished],
            "distinguished_prec": self.distinguished_prec,
            "unit_leading": None if self.unit_leading is None else self.unit_leading.to_json(),
            "notes": self.notes,
        }


def invariants(F):
    """mu, lambda and (for Z_p coefficients) the distinguished factor of F."""
    known = [(i, c.valuation()) for i, c in enumerate(F.coeffs) if not _is_zero(c)]
    if not known:
        raise UndecidableInvariantsError("all coefficients vanish to their precision")
    mu = min(Fraction(v) for _, v in known)
    lam = next(i for i, v in known if v == mu)
    notes = []
    certified = True
    for i in range(lam):
        c = F.coeffs[i]
        if _is_zero(c) and _prec(c) <= mu:
            certified = False
            notes.append(f"coefficient {i} is not known beyond valuation {_prec(c)}")
    if F.tail is not None:
        if mu > F.tail:
            certified = False
            notes.append("tail could carry smaller valuation")
        if lam >= F.M - 1:
            certified = False
            notes.append("lambda index too close to truncation")
    if not certified:
        raise UndecidableInvariantsError("; ".join(notes))
    dist = dprec = lead = None
    if not any(isinstance(c, CycloScalar) for c in F.coeffs) and mu == int(mu):
        dist, U, dprec = weierstrass_factor(F, int(mu), lam)
        lead = U
    return InvariantsReport(mu, lam, dist, dprec, lead, True, F.M, notes)


def invariants_refit(build, M0=4, Mmax=32):
    """invariants(build(M)) with M doubled until certified (capped at Mmax)."""
    M = M0
    last = None
    while M <= Mmax:
        F = build(M)
        try:
            return F, invariants(F)
        except UndecidableInvariantsError as exc:
            last = exc
            M *= 2
    raise UndecidableInvariantsError(f"not certified with M <= {Mmax}: {last}")


def weierstrass_factor(F, mu, lam):
    """F = p^mu P U with P distinguished of degree lam; returns (P coeffs, U(0), prec of P)."""
    p = F.p
    M = F.M
    # precision of P in the Weierstrass sense: error e reduces mod P to valuation >= this
    if lam == 0:
        bound = None
    else:
        bound = min(int(_prec(c)) - mu + i // lam for i, c in enumerate(F.coeffs))
        if F.tail is not None:
            bound = min(bound, int(F.tail) - mu + M // lam)
    if lam == 0:
        c0 = F.coeffs[0]
        U0 = PadicScalar(p, c0.to_fraction() / Fraction(p) ** mu, int(_prec(c0)) - mu)
        return [PadicScalar(p, 1, 200)], U0, None
    W = bound
    if W < 1:
        raise PrecisionError("distinguished factor not determined", needed=1, achieved=W)
    mod = p ** W
    f = []
    for c in F.coeffs:
        x = c.to_fraction() / Fraction(p) ** mu
        f.append(x.numerator * pow(x.denominator, -1, mod) % mod if x else 0)
    ubar = [c % p for c in f[lam:]]
    if ubar[0] == 0:
        raise DomainError("coefficient at lambda is not a unit")
    inv0 = pow(ubar[0], -1, p)
    # 1/ubar mod (p, X^lam)
    uinv = [0] * lam
    uinv[0] = inv0
    for n in range(1, lam):
        s = sum(ubar[j] * uinv[n - j] for j in range(1, min(n, len(ubar) - 1) + 1))
        uinv[n] = (-s * inv0) % p
    P = [0] * lam + [1]
    U = list(f[lam:])
    U = [x % p for x in U]
    for j in range(1, W):
        prod = _pmul(P, U)
        err = [((f[i] if i < len(f) else 0) - (prod[i] if i < len(prod) else 0)) for i in range(max(len(f), len(prod)))]
        pj = p ** j
        if any(x % pj for x in err):
            raise AssertionError("Hensel invariant broken")
        e = [(x // pj) % p for x in err]
        dP = [x % p for x in _pmul(e[:lam], uinv)[:lam]]
        rest = [(a - b) % p for a, b in zip(e + [0] * (len(e) + lam), _pmul(dP, ubar) + [0] * (len(e) + lam))]
        rest = rest[:len(e)]
        if any(rest[:lam]):
            raise AssertionError("division by X^lambda failed")
        dU = rest[lam:]
        for i, v in enumerate(dP):
            P[i] = (P[i] + pj * v) % mod
        for i, v in enumerate(dU):
            if i < len(U):
                U[i] = (U[i] + pj * v) % mod
            elif v:
                U.append(pj * v % mod)
    Pc = [PadicScalar(p, c, W) for c in P[:lam]] + [PadicScalar(p, 1, W + 200)]
    return Pc, PadicScalar(p, U[0], W), W


def _pmul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


# -- roots ---------------------------------------------------------------------

@dataclass
class RootReport:
    x0: PadicScalar | None
    precision: int | None
    s0: PadicScalar | None = None
    certified: bool = True
    note: str = ""

    def to_json(self):
        return {"x0": None if self.x0 is None else self.x0.to_json(),
                "s0": None if self.s0 is None else self.s0.to_json(),
                "precision": self.precision, "certified": self.certified, "note": self.note}


def zp_roots(P, prec, max_nodes=5000):
    """Roots in pZ_p of a monic integer polynomial known mod p^prec.

    Simple roots are certified by the Hensel condition; classes that never
    satisfy it within the precision are returned as uncertified.
    """
    p = P[0].p
    coeffs = [int(c.to_int() if hasattr(c, "to_int") else c) for c in P]
    dcoeffs = [i * c for i, c in enumerate(coeffs)][1:]
    def ev(cs, x):
        acc = 0
        for c in reversed(cs):
            acc = acc * x + c
        return acc
    found, unresolved = [], []
    frontier = [(0, 1)]
    nodes = 0
    while frontier:
        r, j = frontier.pop()
        nodes += 1
        if nodes > max_nodes:
            unresolved.append((r, j))
            break
        fv = ev(coeffs, r) % p ** prec
        dv = ev(dcoeffs, r) % p ** prec
        vf = prec if fv == 0 else vp(fv, p)
        vd = prec if dv == 0 else vp(dv, p)
        if vf < j:
            continue
        if vd < prec and vf > 2 * vd and vf >= j:
            root = hensel_root(coeffs, PadicScalar(p, r, prec), prec)
            rel = prec - vd
            found.append(RootReport(root.reduce(rel), rel))
            continue
        if j >= prec:
            unresolved.append((r, j))
            continue
        frontier.extend((r + d * p ** j, j + 1) for d in range(p))
    merged = []
    for rt in found:
        if not any(o.x0.agrees(rt.x0, min(o.precision, rt.precision)) for o in merged):
            merged.append(rt)
    for r, j in unresolved:
        merged.append(RootReport(PadicScalar(p, r, j), j, certified=False,
                                 note="multiple or clustered root; Hensel condition not met"))
    return merged


def zeros_in_Zp(chi, zeta=(0, 0), M=None, N=None, F=None):
    """Zeros of Ghat_chi in pZ_p, converted to weight space when zeta = 1.

    ``zeta`` is (r, m) for zeta_{p^r}^m.  For zeta = 1 each simple zero x0
    gives s0 = 2 + log(1 + x0)/log(u), a zero of L_p(1 - s, chi omega).  For
    zeta != 1 the Z_p-roots are reported without s0.
    """
    p = chi.p
    if F is None:
        M = M or 8
        N = N or M
        F, rep = invariants_refit(lambda m: G_hat(chi, m, max(N, m)), M0=M)
    else:
        rep = invariants(F)
    if rep.lam == 0:
        return [], rep, F
    roots = zp_roots(rep.distinguished, rep.distinguished_prec)
    out = []
    r, m = zeta
    trivial_zeta = r == 0 or m % p ** r == 0
    lu = plog(PadicScalar(p, generator_u(p), 80))
    for rt in roots:
        if rt.certified and trivial_zeta:
            x1 = 1 + rt.x0
            ratio = plog(x1) / lu
            rt.s0 = (ratio + 2).reduce(rt.precision)
        elif not trivial_zeta:
            rt.note = (rt.note + "; " if rt.note else "") + "zeta != 1: reported as x0 only"
        out.append(rt)
    return out, rep, F


def certify_series_root(F, x0):
    """Certified precision beta = min_i(prec_i + i v(x0)) of F(x0) = 0."""
    v = x0.valuation()
    beta = min(_prec(c) + i * v for i, c in enumerate(F.coeffs))
    if F.tail is not None:
        beta = min(beta, F.tail + F.M * v)
    return beta


# -- the valuation lemma -------------------------------------------------------

@dataclass
class LemmaLReport:
    valuation: Fraction
    predicted: Fraction
    applicable: bool
    threshold_r: int
    r_zeta: int
    k: int

    def to_json(self):
        return {"valuation": str(self.valuation), "predicted": str(self.predicted),
                "applicable": self.applicable, "threshold_r": self.threshold_r,
                "r_zeta": self.r_zeta, "k": self.k, "u": None}


def lemma_threshold(F):
    """Least r >= 1 with v(alpha) > 1/((p-1)p^{r-1}) for every root alpha of F."""
    p = F.p
    vals = [v for v, _ in root_valuations(F)]
    if not vals:
        return 1
    vmin = min(vals)
    if vmin == float("inf"):
        return 1
    r = 1
    while not vmin > Fraction(1, (p - 1) * p ** (r - 1)):
        r += 1
        if r > 60:
            raise DomainError("root valuations too small for any level")
    return r


def lemma_L_valuation(F, k, zeta):
    """v_p(F(zeta u^k - 1)) for a distinguished polynomial F and zeta = (r, m), m a unit.

    Returns a report with the measured valuation, the predicted deg F / e and
    whether the level exceeds the root-valuation threshold.
    """
    p = F.p
    r, m = zeta
    if r < 1 or m % p == 0:
        raise DomainError("zeta must be a primitive p^r-th root of unity with r >= 1")
    deg = F.M - 1
    lead = F.coeffs[-1]
    if not lead.agrees(1):
        raise DomainError("polynomial is not monic")
    e = ram_index(p, r)
    P = e * (deg + 20)
    x = CycloScalar.zeta_power(p, r, m, P).scale(PadicScalar(p, u_pow_mod(k, p, deg + 25), deg + 25)) - 1
    acc = CycloScalar(p, r, [0], P)
    for c in reversed(F.coeffs):
        acc = acc * x + CycloScalar.from_padic(c.reduce(min(c.prec, deg + 25)), r)
    val = acc.valuation()
    predicted = Fraction(deg, e)
    thr = lemma_threshold(F)
    applicable = r >= thr
    if applicable and val != predicted:
        raise AssertionError(f"valuation {val} differs from {predicted}")
    return LemmaLReport(val, predicted, applicable, thr, r, k)
