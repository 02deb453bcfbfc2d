"""The Bruhat-Tits tree of PGL_2(Q_p) and fixed sets of matrix groups.

Vertices are homothety classes of Z_p-lattices in Q_p^2.  A class is stored
by the unique primitive column Hermite form

    [[p^a, b], [0, p^c]],   0 <= b < p^a,   min(a, c, v(b)) = 0,

i.e. the representative lattice lies in Z_p^2 but not in pZ_p^2.  Its
distance to the standard class is a + c.

Representations are finite lists of invertible 2x2 matrices with exact
rational entries; inverses are appended and each generator is normalized by
p^{-v(det)/2} so that stability reads "B^{-1} g B in GL_2(Z_p)".
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (DomainError, PrecisionError, ReducibleError, ResiduallyScalarError,
                     SearchFailureError)
from .padic import PadicScalar, hensel_root, vp


def _v(x, p):
    return None if x == 0 else vp(Fraction(x), p)


def _vmin(vals):
    vals = [v for v in vals if v is not None]
    return min(vals) if vals else None


def _frac_part(q, p):
    """Representative of q mod Z_p in Z[1/p] ∩ [0, 1)."""
    q = Fraction(q)
    s = 0
    d = q.denominator
    while d % p == 0:
        d //= p
        s += 1
    if s == 0:
        return Fraction(0)
    mod = p ** s
    t = q.numerator * pow(d, -1, mod) % mod
    return Fraction(t, mod)


def _mod_pa(x, p, a):
    """Integer representative in [0, p^a) of a p-integral rational."""
    x = Fraction(x)
    mod = p ** a
    return x.numerator * pow(x.denominator, -1, mod) % mod


# -- 2x2 exact matrices --------------------------------------------------------

def mat(rows):
    return ((Fraction(rows[0][0]), Fraction(rows[0][1])), (Fraction(rows[1][0]), Fraction(rows[1][1])))


def mmul(A, B):
    return ((A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
            (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]))


def mdet(A):
    return A[0][0] * A[1][1] - A[0][1] * A[1][0]


def minv(A):
    d = mdet(A)
    if d == 0:
        raise DomainError("singular matrix")
    return ((A[1][1] / d, -A[0][1] / d), (-A[1][0] / d, A[0][0] / d))


def mscale(A, s):
    return tuple(tuple(x * s for x in row) for row in A)


IDENTITY = mat([[1, 0], [0, 1]])


def hnf(vectors, p):
    """Column Hermite form ((p^a, b), (0, p^c)) (a, c in Z) of the Z_p-span of ``vectors``."""
    vecs = [(Fraction(x), Fraction(y)) for x, y in vectors if x or y]
    if not vecs:
        raise DomainError("zero lattice")
    # pivot on the second coordinate
    with_y = [w for w in vecs if w[1] != 0]
    if not with_y:
        raise DomainError("vectors do not span a lattice")
    piv = min(with_y, key=lambda w: vp(w[1], p))
    c = vp(piv[1], p)
    rest = []
    for w in vecs:
        if w is piv:
            continue
        t = w[1] / piv[1]
        rest.append(w[0] - t * piv[0])
    rest = [x for x in rest if x != 0]
    if not rest:
        raise DomainError("vectors do not span a lattice")
    a = min(vp(x, p) for x in rest)
    # second column: piv scaled to have lower entry p^c
    unit = piv[1] / Fraction(p) ** c
    b = piv[0] / unit
    pa = Fraction(p) ** a
    b = pa * _frac_part(b / pa, p)
    return a, b, c


@dataclass(frozen=True, order=True)
class LatticeClass:
    p: int
    a: int
    c: int
    b: int

    @classmethod
    def from_vectors(cls, vectors, p):
        a, b, c = hnf(vectors, p)
        t = min(a, c, vp(b, p) if b else a)
        a, c = a - t, c - t
        b = b / Fraction(p) ** t
        return cls(p, a, c, _mod_pa(b, p, a) if a > 0 else 0)

    @classmethod
    def from_matrix(cls, B, p):
        return cls.from_vectors([(B[0][0], B[1][0]), (B[0][1], B[1][1])], p)

    @classmethod
    def base(cls, p):
        return cls(p, 0, 0, 0)

    def matrix(self):
        return mat([[self.p ** self.a, self.b], [0, self.p ** self.c]])

    def depth(self):
        return self.a + self.c

    def to_json(self):
        return {"p": self.p, "a": self.a, "b": self.b, "c": self.c,
                "hermite": [[str(self.p ** self.a), str(self.b)], ["0", str(self.p ** self.c)]]}

    def __str__(self):
        return f"[[{self.p}^{self.a}, {self.b}], [0, {self.p}^{self.c}]]"


def neighbors(x):
    """The p+1 classes at distance one."""
    p = x.p
    B = x.matrix()
    out = [LatticeClass.from_matrix(mmul(B, mat([[p, beta], [0, 1]])), p) for beta in range(p)]
    out.append(LatticeClass.from_matrix(mmul(B, mat([[1, 0], [0, p]])), p))
    return out


def _elementary_exponents(C, p):
    e1 = _vmin([_v(x, p) for row in C for x in row])
    return e1, vp(mdet(C), p) - e1


def distance(x, y):
    C = mmul(minv(x.matrix()), y.matrix())
    e1, e2 = _elementary_exponents(C, x.p)
    return e2 - e1


# -- representations -----------------------------------------------------------

_ENTRY = re.compile(r"^\s*([+-]?\d+)(?:/(\d+))?\s*(?:(?:\*|·)\s*p\^([+-]?\d+))?\s*$")


def parse_entry(s, p):
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    m = _ENTRY.match(str(s))
    if not m:
        raise ValueError(f"cannot parse matrix entry {s!r}")
    x = Fraction(int(m.group(1)), int(m.group(2) or 1))
    if m.group(3):
        x *= Fraction(p) ** int(m.group(3))
    return x


def _fmt_entry(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass
class RepSpec:
    p: int
    generators: list
    N: int = 30
    closed_under_inverses: bool = False
    label: str = ""

    def __post_init__(self):
        gens = [mat(g) for g in self.generators]
        for g in gens:
            if mdet(g) == 0:
                raise DomainError("generator is not invertible")
        self.generators = gens

    @classmethod
    def from_json(cls, d):
        p = int(d["p"])
        gens = [[[parse_entry(e, p) for e in row] for row in g] for g in d["generators"]]
        return cls(p, gens, int(d.get("N", 30)), bool(d.get("closed_under_inverses", False)),
                   d.get("label", ""))

    def to_json(self):
        return {"p": self.p, "N": self.N, "closed_under_inverses": self.closed_under_inverses,
                "generators": [[[_fmt_entry(x) for x in row] for row in g] for g in self.generators]}

    def normalized(self):
        """Generators and inverses scaled to have unit determinant up to squares."""
        gens = list(self.generators)
        if not self.closed_under_inverses:
            gens = gens + [minv(g) for g in gens]
        out = []
        for g in gens:
            dv = vp(mdet(g), self.p)
            if dv % 2:
                raise SearchFailureError("a generator has odd determinant valuation; it fixes no vertex")
            out.append(mscale(g, Fraction(self.p) ** (-(dv // 2))))
        return out

    def conjugate(self, A):
        """The representation A g A^{-1}."""
        Ai = minv(A)
        return RepSpec(self.p, [mmul(mmul(A, g), Ai) for g in self.generators], self.N,
                       self.closed_under_inverses, self.label)


def _local(g, B):
    return mmul(mmul(minv(B), g), B)


def is_stable(x, gens):
    B = x.matrix()
    p = x.p
    for g in gens:
        h = _local(g, B)
        if any(_v(e, p) is not None and _v(e, p) < 0 for row in h for e in row):
            return False
        if vp(mdet(h), p) != 0:
            return False
    return True


def _reduce_mat(h, p):
    return tuple(tuple(_mod_pa(e, p, 1) for e in row) for row in h)


def invariant_lines(x, gens):
    """Lines of L/pL (as (beta, 1) or (1, 0)) fixed by every residual generator."""
    p = x.p
    B = x.matrix()
    reds = [_reduce_mat(_local(g, B), p) for g in gens]
    lines = [(beta, 1) for beta in range(p)] + [(1, 0)]
    out = []
    for ln in lines:
        ok = True
        for h in reds:
            w = (h[0][0] * ln[0] + h[0][1] * ln[1], h[1][0] * ln[0] + h[1][1] * ln[1])
            if (w[0] * ln[1] - w[1] * ln[0]) % p:
                ok = False
                break
        if ok:
            out.append(ln)
    return out


REDUCTION_TYPES = {0: "irreducible", 1: "reducible-indecomposable", 2: "split"}


def reduction_type(nlines, p):
    if nlines == p + 1:
        return "scalar"
    return REDUCTION_TYPES.get(nlines, f"{nlines}-lines")


def find_stable_lattice(gens, p, max_iter=200):
    """Z_p-span of the orbit of Z_p^2 under the generated group."""
    L = [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))]
    for _ in range(max_iter):
        a, b, c = hnf(L, p)
        basis = [(Fraction(p) ** a, Fraction(0)), (b, Fraction(p) ** c)]
        imgs = [(g[0][0] * v[0] + g[0][1] * v[1], g[1][0] * v[0] + g[1][1] * v[1]) for g in gens for v in basis]
        a2, b2, c2 = hnf(basis + imgs, p)
        if (a2, c2) == (a, c) and _frac_part((b2 - b) / Fraction(p) ** a, p) == 0:
            return LatticeClass.from_vectors(basis, p)
        L = basis + imgs
    raise SearchFailureError("no stable lattice found (representation may be unbounded)")


def check_irreducible(gens, p, N=40):
    """Raise ReducibleError if the generators share an eigenline over Q_p (to precision N)."""
    nonscalar = [g for g in gens if g[0][1] != 0 or g[1][0] != 0 or g[0][0] != g[1][1]]
    if not nonscalar:
        raise ReducibleError("scalar representation: every line is invariant")
    g = nonscalar[0]
    for line in _eigenlines(g, p, N):
        if line is None:
            return
        if all(_preserves(h, line, p, N // 2) for h in gens):
            raise ReducibleError("generators share an invariant line")


def _eigenlines(g, p, N):
    """Eigenlines of g over Q_p as exact or p-adically approximated vectors; [None] if none."""
    (a, b), (c, d) = g
    tr, det = a + d, mdet(g)
    disc = tr * tr - 4 * det
    lines = []
    if disc == 0:
        roots = [tr / 2]
    else:
        v = vp(disc, p)
        if v % 2:
            return [None]
        w = disc / Fraction(p) ** v
        wi = _mod_pa(w, p, N + 2)
        if pow(wi % p, (p - 1) // 2, p) != 1:
            return [None]
        r0 = next(r for r in range(1, p) if (r * r - wi) % p == 0)
        sq = hensel_root([-wi, 0, 1], PadicScalar(p, r0, N + 2), N + 2).value
        sq = Fraction(sq) * Fraction(p) ** (v // 2)
        roots = [(tr + sq) / 2, (tr - sq) / 2]
    for lam in roots:
        if b != 0:
            lines.append((b, lam - a))
        elif c != 0:
            lines.append((lam - d, c))
        else:
            lines.append((Fraction(1), Fraction(0)) if lam == a else (Fraction(0), Fraction(1)))
        if b == 0 and c == 0:
            lines = [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))]
            break
    return lines


def _preserves(h, line, p, N):
    x, y = line
    w = (h[0][0] * x + h[0][1] * y, h[1][0] * x + h[1][1] * y)
    cross = w[0] * y - w[1] * x
    if cross == 0:
        return True
    scale = _vmin([_v(x, p), _v(y, p)]) * 2 + _vmin([_v(e, p) for row in h for e in row])
    return vp(cross, p) - scale >= N


@dataclass
class SegmentReport:
    p: int
    nodes: list
    in_set_neighbors: list
    reduction_types: list
    inconclusive: bool = False
    is_segment: bool = True
    radius: int = 0
    notes: list = field(default_factory=list)

    def to_json(self):
        return {"p": self.p, "size": len(self.nodes), "nodes": [x.to_json() for x in self.nodes],
                "in_set_neighbors": self.in_set_neighbors, "reduction_types": self.reduction_types,
                "inconclusive": self.inconclusive, "is_segment": self.is_segment,
                "radius": self.radius, "notes": self.notes}


def fixed_set(rho, radius=8, start=None, check=True):
    """All classes fixed by rho within ``radius`` of a stable start class."""
    p = rho.p
    gens = rho.normalized()
    if check:
        check_irreducible(gens, p, rho.N)
    if start is None:
        start = find_stable_lattice(gens, p)
    elif not is_stable(start, gens):
        raise SearchFailureError("start class is not stable")
    seen = {start: 0}
    order = [start]
    queue = deque([start])
    inconclusive = False
    while queue:
        x = queue.popleft()
        d = seen[x]
        for y in neighbors(x):
            if y in seen or not is_stable(y, gens):
                continue
            if d + 1 > radius:
                inconclusive = True
                continue
            seen[y] = d + 1
            order.append(y)
            queue.append(y)
    fixed = set(order)
    counts, types, notes = [], [], []
    for x in order:
        k = sum(1 for y in neighbors(x) if y in fixed)
        lines = len(invariant_lines(x, gens))
        if lines != k and not inconclusive:
            notes.append(f"line count {lines} != in-set neighbours {k} at {x}")
        counts.append(k)
        types.append(reduction_type(lines, p))
    ordered, shape_ok = _as_path(order, fixed)
    if ordered is not None:
        idx = [order.index(x) for x in ordered]
        counts = [counts[i] for i in idx]
        types = [types[i] for i in idx]
        order = ordered
    return SegmentReport(p, order, counts, types, inconclusive, shape_ok, radius, notes)


def _as_path(nodes, fixed):
    """Order the nodes along a path if they form one."""
    if len(nodes) == 1:
        return list(nodes), True
    adj = {x: [y for y in neighbors(x) if y in fixed] for x in nodes}
    ends = [x for x in nodes if len(adj[x]) == 1]
    if len(ends) != 2 or any(len(adj[x]) > 2 for x in nodes):
        return None, False
    path = [min(ends)]
    prev = None
    while len(path) < len(nodes):
        nxt = [y for y in adj[path[-1]] if y != prev]
        prev = path[-1]
        path.append(nxt[0])
    return path, True


def words(gens, depth):
    """All products of at most ``depth`` generators, with the word indices."""
    out = [((), IDENTITY)]
    layer = [((), IDENTITY)]
    for _ in range(depth):
        new = []
        for w, m in layer:
            for i, g in enumerate(gens):
                new.append((w + (i,), mmul(m, g)))
        out.extend(new)
        layer = new
    return out


@dataclass
class IdealReport:
    n: int
    v_b: int
    v_c: int
    depth: int
    g0_word: tuple
    eigenvalues_mod_p: tuple
    b_word: tuple
    c_word: tuple
    basis: tuple
    stable_class: LatticeClass
    precision: int
    residually_irreducible: bool = False

    def to_json(self):
        return {"n": self.n, "v_b": self.v_b, "v_c": self.v_c, "depth": self.depth,
                "g0_word": list(self.g0_word), "eigenvalues_mod_p": list(self.eigenvalues_mod_p),
                "b_word": list(self.b_word), "c_word": list(self.c_word),
                "stable_class": self.stable_class.to_json(), "precision": self.precision,
                "residually_irreducible": self.residually_irreducible}


def _local_gens(rho):
    p = rho.p
    gens = rho.normalized()
    check_irreducible(gens, p, rho.N)
    x = find_stable_lattice(gens, p)
    B = x.matrix()
    return gens, x, [_local(g, B) for g in gens]


def _find_g0(local, p, max_depth):
    irreducible_word = None
    for depth in range(1, max_depth + 1):
        for w, m in words(local, depth):
            if len(w) != depth:
                continue
            tr = _mod_pa(m[0][0] + m[1][1], p, 1)
            det = _mod_pa(mdet(m), p, 1)
            disc = (tr * tr - 4 * det) % p
            if disc == 0:
                continue
            if pow(disc, (p - 1) // 2, p) == 1:
                return w, m
            irreducible_word = irreducible_word or (w, m)
    if irreducible_word is not None:
        return irreducible_word + (None,)
    return None


def _eigenbasis(m, p, N):
    """Z_p-basis of eigenvectors for m with distinct eigenvalues mod p (integer reps mod p^N)."""
    (a, b), (c, d) = m
    mod = p ** N
    A, Bq, C, D = (_mod_pa(x, p, N) for x in (a, b, c, d))
    tr = (A + D) % mod
    det = (A * D - Bq * C) % mod
    vecs, lams = [], []
    for r0 in range(p):
        if (r0 * r0 - tr * r0 + det) % p == 0:
            lam = hensel_root([det, -tr, 1], PadicScalar(p, r0, N), N).value
            # kernel of m - lam: pick the column of the adjugate with a unit entry
            cand = [((Bq) % mod, (lam - A) % mod), ((lam - D) % mod, C % mod)]
            v = next(w for w in cand if w[0] % p or w[1] % p)
            vecs.append(v)
            lams.append(lam)
    if len(vecs) != 2:
        raise ResiduallyScalarError("eigenvalues of g0 not distinct mod p")
    P = mat([[vecs[0][0], vecs[1][0]], [vecs[0][1], vecs[1][1]]])
    return P, lams


def reducibility_ideal(rho, max_depth=6, N=None):
    """Exponent n with I(rho) = (p^n), and the diagonalizing data."""
    p = rho.p
    gens, x, local = _local_gens(rho)
    found = _find_g0(local, p, 3)
    if found is None:
        raise ResiduallyScalarError("every short word has a repeated eigenvalue mod p")
    if len(found) == 3:
        return IdealReport(0, 0, 0, 1, found[0], (), (), (), (), x, rho.N, True)
    g0w, g0 = found
    N = N or max(rho.N, 12)
    while True:
        P, lams = _eigenbasis(g0, p, N)
        Pi = minv(P)
        history = []
        best = None
        for depth in range(1, max_depth + 1):
            vb = vc = None
            bw = cw = ()
            for w, m in words(local, depth):
                h = mmul(mmul(Pi, m), P)
                b_ = _v(h[0][1], p)
                c_ = _v(h[1][0], p)
                b_ = None if b_ is not None and b_ >= N else b_
                c_ = None if c_ is not None and c_ >= N else c_
                if b_ is not None and (vb is None or b_ < vb):
                    vb, bw = b_, w
                if c_ is not None and (vc is None or c_ < vc):
                    vc, cw = c_, w
            history.append((vb, vc))
            best = (vb, vc, bw, cw, depth)
            if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
                break
        vb, vc, bw, cw, depth = best
        if vb is None or vc is None:
            if N >= 4 * rho.N + 40:
                raise ReducibleError("off-diagonal entries vanish to working precision")
            N *= 2
            continue
        n = vb + vc
        if N <= 2 * n + 2:
            N = 2 * n + 4
            continue
        lam_red = tuple(l % p for l in lams)
        return IdealReport(n, vb, vc, depth, g0w, lam_red, bw, cw, (P, x), x, N)


@dataclass
class RibetReport:
    lattice: LatticeClass
    other_endpoint: LatticeClass
    certificate_word: tuple
    residual_matrix: tuple
    sub_character: int
    quotient_character: int
    other_sub_character: int

    def to_json(self):
        return {"lattice": self.lattice.to_json(), "other_endpoint": self.other_endpoint.to_json(),
                "certificate_word": list(self.certificate_word),
                "residual_matrix": [list(r) for r in self.residual_matrix],
                "ordering": [self.sub_character, self.quotient_character],
                "other_ordering": [self.other_sub_character, self.sub_character]}


def ribet_lattice(rho, max_depth=6):
    """An endpoint of the fixed segment, with a non-semisimple reduction certificate."""
    p = rho.p
    rep = reducibility_ideal(rho, max_depth)
    if rep.n == 0:
        raise DomainError("I(rho) is the unit ideal: the residual representation is irreducible")
    P, x = rep.basis
    B = x.matrix()
    gens = rho.normalized()

    def endpoint(j):
        D = mat([[1, 0], [0, Fraction(p) ** j]])
        return LatticeClass.from_matrix(mmul(mmul(B, P), D), p), mmul(mmul(B, P), D)

    lo, Blo = endpoint(-rep.v_b)
    hi, _ = endpoint(rep.v_c)
    # at j = -v_b the residual image is upper triangular with a unit upper-right entry
    m = dict(words([_local(g, B) for g in gens], rep.depth))[rep.b_word]
    Pi = minv(P)
    D = mat([[1, 0], [0, Fraction(p) ** (-rep.v_b)]])
    h = mmul(mmul(minv(D), mmul(mmul(Pi, m), P)), D)
    red = _reduce_mat(h, p)
    if red[1][0] != 0 or red[0][1] == 0:
        raise AssertionError("certificate word does not exhibit a non-split extension")
    l1, l2 = rep.eigenvalues_mod_p
    return RibetReport(lo, hi, rep.b_word, red, l1, l2, l2)


def planted_repspec(p, n, rng, extra=1, conj_size=6):
    """Random irreducible RepSpec whose reducibility ideal is (p^n)."""
    lam = rng.randrange(2, p) if p > 2 else 2
    unit = lambda: rng.choice([u for u in range(1, p * p) if u % p])
    c1 = unit()
    while (1 - p ** n * c1) % p == 0:
        c1 = unit()
    gens = [mat([[1, 0], [0, lam]]), mat([[1, 1], [p ** n * c1, 1]])]
    for _ in range(extra):
        while True:
            a, d = unit(), unit()
            b = rng.randrange(0, p * p)
            c = p ** n * rng.randrange(0, p * p)
            if (a * d - b * c) % p:
                break
        gens.append(mat([[a, b], [c, d]]))
    while True:
        A = mat([[rng.randrange(-conj_size, conj_size + 1) for _ in range(2)] for _ in range(2)])
        if mdet(A) != 0:
            break
    return RepSpec(p, gens, 30, False, f"planted n={n}").conjugate(A)
