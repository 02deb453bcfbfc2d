"""Command-line frontend: ``stablelat <subcommand> ...``.

Every run prints one JSON document ``{"command", "result", "manifest"}``
with sorted keys.  The manifest holds the validated run configuration, the
library version and the achieved precisions, which is enough to rerun the
command and get byte-identical output.

Exit codes: 0 success, 1 usage error, 2 insufficient precision, 3 domain error.
Set ``STABLELAT_CACHE`` to a directory to reuse outputs of identical runs.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import random
import sys
from fractions import Fraction
from importlib import resources

import jsonschema

from . import __version__
from .characters import DirichletChar, parse_character
from .eigenform import (eisenstein_congruence, lattice_count_from_Lp, p547_report, weight_variation_scan)
from .errors import DomainError, PrecisionError
from .iwasawa import G_hat, PSeries, fit_G_series, invariants_refit, lemma_L_valuation, zeros_in_Zp
from .lvalues import kubota_leopoldt, lp_valuation
from .padic import generator_u
from .tree import RepSpec, fixed_set, planted_repspec, reducibility_ideal, ribet_lattice

CACHE_ENV = "STABLELAT_CACHE"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


# -- helpers -----------------------------------------------------------------------

def load_schema(name):
    text = resources.files("stablelat").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(doc, name):
    try:
        jsonschema.validate(doc, load_schema(name))
    except jsonschema.ValidationError as exc:
        raise UsageError(f"{name}: {exc.message}") from None


def jsonable(x):
    if hasattr(x, "to_json"):
        return jsonable(x.to_json())
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    return x


def dumps(doc):
    return json.dumps(jsonable(doc), sort_keys=True, indent=2) + "\n"


def parse_zeta(s):
    """``1`` for zeta = 1, ``r.m`` for zeta_{p^r}^m."""
    s = s.strip()
    if s in ("1", "0.0"):
        return [0, 0]
    try:
        r, m = s.split(".")
        return [int(r), int(m)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad zeta {s!r}; use 1 or r.m") from None


def int_list(s):
    try:
        return [int(t) for t in s.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {s!r}") from None


def zeta_list(s):
    return [parse_zeta(t) for t in s.split(",") if t.strip()]


def character(p, spec):
    try:
        return parse_character(p, spec)
    except (ValueError, json.JSONDecodeError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise UsageError(f"unknown character spec {spec!r}: {exc}") from None


def load_repspec(arg):
    if arg == "-":
        text = sys.stdin.read()
    elif arg.lstrip().startswith("{"):
        text = arg
    else:
        try:
            with open(arg) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read RepSpec: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed RepSpec JSON: {exc}") from None
    validate(doc, "repspec")
    try:
        return RepSpec.from_json(doc)
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise UsageError(f"malformed RepSpec: {exc}") from None


def _rep_from(cfg):
    if cfg.get("repspec"):
        return load_repspec(cfg["repspec"])
    if cfg.get("planted") is not None:
        return planted_repspec(cfg["p"], cfg["planted"], random.Random(cfg["seed"]))
    raise UsageError("give --repspec or --planted")


# -- commands ----------------------------------------------------------------------

def cmd_lp_value(cfg):
    p, k, N = cfg["p"], cfg["k"], cfg["N"]
    psi = character(p, cfg["psi"])
    out = {"p": p, "k": k, "psi": psi.to_json(), "u": generator_u(p), "method": cfg["method"]}
    v = lp_valuation(k, psi, N)
    out["valuation"] = v
    if v >= 0:
        val = kubota_leopoldt(k, psi, N, method=cfg["method"])
        out["value"] = val
        out["precision"] = val.prec
    else:
        out["value"] = None
        out["precision"] = N
        out["note"] = "non-integral value; only its valuation is reported"
    return out, {"N": out["precision"]}


def _series(cfg):
    p = cfg["p"]
    psi = character(p, cfg["psi"])
    if cfg["series"] == "G":
        return fit_G_series(psi, cfg["M"], cfg["N"]), psi
    return G_hat(psi, cfg["M"], cfg["N"]), psi


def cmd_fit_series(cfg):
    F, psi = _series(cfg)
    return {"series": F, "meta": F.meta, "valuations": F.valuations()}, {"coefficients": F.precisions}


def cmd_invariants(cfg):
    p = cfg["p"]
    psi = character(p, cfg["psi"])
    if cfg["series"] == "G":
        build = lambda m: fit_G_series(psi, m, max(cfg["N"], m))
    else:
        build = lambda m: G_hat(psi, m, max(cfg["N"], m))
    F, rep = invariants_refit(build, M0=cfg["M"])
    return {"psi": psi.label(), "p": p, "M": F.M, "invariants": rep, "coeffs": F.coeffs}, \
        {"M_used": F.M, "coefficients": F.precisions}


def cmd_zeros(cfg):
    p = cfg["p"]
    psi = character(p, cfg["psi"])
    roots, rep, F = zeros_in_Zp(psi, tuple(cfg["zeta"]), M=cfg["M"], N=cfg["N"])
    out = {"psi": psi.label(), "p": p, "M": F.M, "N_achieved": rep.distinguished_prec,
           "mu": rep.mu, "lambda": rep.lam, "distinguished": rep.distinguished and [str(c) for c in rep.distinguished],
           "zeros": roots, "zeta": cfg["zeta"], "u": generator_u(p)}
    return out, {"M_used": F.M, "zeros": [r.precision for r in roots]}


def cmd_lemma_l(cfg):
    p = cfg["p"]
    try:
        coeffs = [Fraction(c) for c in cfg["poly"]]
    except ValueError:
        raise UsageError("polynomial coefficients must be rationals") from None
    F = PSeries.polynomial(p, coeffs)
    rep = lemma_L_valuation(F, cfg["k"], tuple(cfg["zeta"]))
    out = rep.to_json()
    out["u"] = generator_u(p)
    return out, {"exact": True}


def cmd_tree_fixed_set(cfg):
    rho = _rep_from(cfg)
    seg = fixed_set(rho, radius=cfg["radius"])
    return {"repspec": rho, "segment": seg}, {"N": rho.N}


def cmd_reducibility_ideal(cfg):
    rho = _rep_from(cfg)
    rep = reducibility_ideal(rho, max_depth=cfg["depth"])
    out = {"repspec": rho, "ideal": rep}
    if rep.n >= 1:
        out["ribet"] = ribet_lattice(rho, max_depth=cfg["depth"])
    return out, {"N": rep.precision}


def cmd_delta_congruence(cfg):
    rep = eisenstein_congruence(cfg["p"], cfg["bound"], margin=cfg["margin"])
    return rep, {"exact": True}


def cmd_lattice_count(cfg):
    p = cfg["p"]
    chi = character(p, cfg["psi"])
    chi1 = character(p, cfg["chi1"])
    form = None if cfg["form"] == "none" else cfg["form"]
    res = lattice_count_from_Lp(p, cfg["k"], chi, tuple(cfg["zeta"]), N=cfg["N"], chi1=chi1,
                                hypothesis_mode=cfg["hypothesis_mode"], form=form)
    return res, {"N": res.precision}


def cmd_weight_scan(cfg, jobs=1):
    p = cfg["p"]
    chi = character(p, cfg["psi"])
    chi1 = character(p, cfg["chi1"])
    tab = weight_variation_scan(p, chi, cfg["mode"], ks=cfg.get("ks"), zetas=cfg.get("zetas"),
                                ns=tuple(cfg["ns"]), M=cfg["M"], N=cfg["N"], chi1=chi1,
                                crosscheck=cfg["crosscheck"], jobs=jobs)
    return tab, {"N": cfg["N"], "M": cfg["M"]}


def cmd_reproduce_paper(cfg, jobs=1):
    bound = cfg["bound"]
    table = []
    for p in (3, 5, 7, 691):
        rep = eisenstein_congruence(p, bound)
        table.append({"p": p, "count": rep.count, "m": rep.m, "a": rep.a, "a_modulus": rep.modulus,
                      "stable": rep.stable})
    chi = DirichletChar.omega_power(691, 11)
    lp = lattice_count_from_Lp(691, 12, chi, form="delta")
    roots, inv, F = zeros_in_Zp(chi, (0, 0), M=8, N=8)
    root = roots[0] if roots else None
    tail = weight_variation_scan(691, chi, "tail", ks=[2, 4, 12], zetas=[[1, 1], [1, 2], [1, 345]])
    growth = weight_variation_scan(691, chi, "fixed-zeta", ns=(1, 2, 3), jobs=jobs)
    block = {
        "p": 691, "k0": 12, "series": "Ghat[w11]", "M": F.M, "mu": inv.mu, "lambda": inv.lam,
        "v_a": root.x0.valuation() if root else None,
        "zero_x0": root.x0 if root else None, "zero_s0": root.s0 if root else None,
        "zero_digits": root.s0.prec if root and root.s0 else None,
        "ord_Lp_minus11_w12": lp.ord, "lattice_count_from_Lp": lp.count,
        "agrees_with_table": lp.count == table[-1]["count"],
        "tail_scan": tail, "k_n_scan": growth,
    }
    return {"table": table, "example_691": block, "example_547": p547_report(), "bound": bound}, \
        {"bound": bound, "zero_digits": block["zero_digits"]}


def render_text(result):
    t = result["table"]
    lines = ["p      " + " ".join(f"{r['p']:>5}" for r in t),
             "#L     " + " ".join(f"{r['count']:>5}" for r in t), ""]
    b = result["example_691"]
    lines.append(f"691: mu={b['mu']} lambda={b['lambda']} v(a)={b['v_a']} "
                 f"ord L_p(-11, w12)={b['ord_Lp_minus11_w12']} count={b['lattice_count_from_Lp']}")
    lines.append("  tail counts: " + " ".join(str(r["count"]) for r in b["tail_scan"].rows))
    lines.append("  k_n counts:  " + " ".join(str(r["count"]) for r in b["k_n_scan"].rows))
    e = result["example_547"]
    lines.append(f"547: lambda={e['lambda']} v(a)={e['zero_valuations']} count window={e['count_window']}")
    return "\n".join(lines) + "\n"


def render_csv(tab):
    rows = jsonable(tab)["rows"]
    buf = io.StringIO()
    fields = sorted({k for r in rows for k in r})
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (".".join(map(str, v)) if isinstance(v, list) else v) for k, v in r.items()})
    return buf.getvalue()


COMMANDS = {
    "lp-value": cmd_lp_value, "fit-series": cmd_fit_series, "invariants": cmd_invariants,
    "zeros": cmd_zeros, "lemma-l": cmd_lemma_l, "tree-fixed-set": cmd_tree_fixed_set,
    "reducibility-ideal": cmd_reducibility_ideal, "delta-congruence": cmd_delta_congruence,
    "lattice-count": cmd_lattice_count, "weight-scan": cmd_weight_scan,
    "reproduce-paper": cmd_reproduce_paper,
}
PARALLEL = {"weight-scan", "reproduce-paper"}


# -- parser ------------------------------------------------------------------------

def build_parser():
    ap = _Parser(prog="stablelat", description="Stable lattices, p-adic L-values and Iwasawa series.")
    ap.add_argument("--version", action="version", version=f"stablelat {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--out", "-o", help="write output here instead of stdout")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for scans")
    common.add_argument("--no-cache", action="store_true", help=f"ignore ${CACHE_ENV}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[common])

    def series_opts(sp, M=8, N=8):
        sp.add_argument("--p", type=int, required=True)
        sp.add_argument("--psi", required=True, help="character spec, e.g. w12, w1*z1.1, kron-3")
        sp.add_argument("--M", type=int, default=M)
        sp.add_argument("--N", type=int, default=N)

    sp = add("lp-value", "L_p(1-k, psi)")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--psi", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--N", type=int, default=20)
    sp.add_argument("--method", choices=["fast", "bernoulli"], default="fast")

    sp = add("fit-series", "fit G_psi (or Ghat_psi) mod X^M")
    series_opts(sp)
    sp.add_argument("--series", choices=["G", "Ghat"], default="G")

    sp = add("invariants", "mu, lambda and the distinguished factor")
    series_opts(sp)
    sp.add_argument("--series", choices=["G", "Ghat"], default="Ghat")

    sp = add("zeros", "zeros of Ghat_psi in pZ_p and their weights")
    series_opts(sp)
    sp.add_argument("--zeta", type=parse_zeta, default=[0, 0])

    sp = add("lemma-l", "valuation of F(zeta u^k - 1) for a distinguished F")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--poly", required=True, type=lambda s: [t.strip() for t in s.split(",")],
                    help="coefficients low to high, monic, e.g. 5,1")
    sp.add_argument("--k", type=int, default=0)
    sp.add_argument("--zeta", type=parse_zeta, required=True)

    for name, help_ in (("tree-fixed-set", "stable classes of a RepSpec"),
                        ("reducibility-ideal", "I(rho) exponent and the non-split endpoint")):
        sp = add(name, help_)
        sp.add_argument("--repspec", help="RepSpec JSON file, inline JSON, or - for stdin")
        sp.add_argument("--planted", type=int, help="generate a random RepSpec with this ideal exponent")
        sp.add_argument("--p", type=int, default=5)
        sp.add_argument("--seed", type=int, default=0)
        if name == "tree-fixed-set":
            sp.add_argument("--radius", type=int, default=8)
        else:
            sp.add_argument("--depth", type=int, default=6)

    sp = add("delta-congruence", "tau(l) = l^a + l^(11-a) mod p^m")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--bound", type=int, default=2000)
    sp.add_argument("--margin", type=int, default=50)

    sp = add("lattice-count", "ord L_p(1-k, chi_zeta chi1^-1 chi omega) + 1")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--psi", required=True, help="the character chi (chi2), e.g. w11")
    sp.add_argument("--chi1", default="1")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--zeta", type=parse_zeta, default=[0, 0])
    sp.add_argument("--N", type=int, default=8)
    sp.add_argument("--hypothesis-mode", dest="hypothesis_mode", choices=["exact", "upper"], default="exact")
    sp.add_argument("--form", choices=["delta", "none"], default="none")

    sp = add("weight-scan", "counts along weights or wild characters")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--psi", required=True)
    sp.add_argument("--chi1", default="1")
    sp.add_argument("--mode", choices=["fixed-zeta", "fixed-k", "tail"], required=True)
    sp.add_argument("--ks", type=int_list)
    sp.add_argument("--zetas", type=zeta_list)
    sp.add_argument("--ns", type=int_list, default=[1, 2, 3])
    sp.add_argument("--M", type=int, default=8)
    sp.add_argument("--N", type=int, default=8)
    sp.add_argument("--crosscheck", action="store_true")
    sp.add_argument("--format", choices=["json", "csv"], default="json")

    sp = add("reproduce-paper", "the count table and the worked examples")
    sp.add_argument("--bound", type=int, default=2000)
    sp.add_argument("--format", choices=["json", "text"], default="json")
    return ap


_RUNTIME = {"out", "jobs", "no_cache", "command"}


def config_from_args(ns):
    cfg = {k: v for k, v in vars(ns).items() if k not in _RUNTIME and v is not None}
    cfg["command"] = ns.command
    cfg["schema_version"] = 1
    validate(cfg, "runconfig")
    return cfg


def execute(cfg, jobs=1):
    """Run a validated config; returns the output text."""
    fn = COMMANDS[cfg["command"]]
    result, precision = fn(cfg, jobs) if cfg["command"] in PARALLEL else fn(cfg)
    fmt = cfg.get("format", "json")
    if fmt == "text":
        return render_text(result)
    if fmt == "csv":
        return render_csv(result)
    manifest = {"tool": "stablelat", "version": __version__, "config": cfg, "achieved_precision": precision}
    return dumps({"command": cfg["command"], "result": result, "manifest": manifest})


def _cache_path(cfg):
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    key = hashlib.sha256((__version__ + json.dumps(cfg, sort_keys=True)).encode()).hexdigest()
    return os.path.join(root, f"{key}.out")


def main(argv=None):
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        path = None if ns.no_cache else _cache_path(cfg)
        if path and os.path.exists(path):
            with open(path) as fh:
                text = fh.read()
        else:
            text = execute(cfg, max(1, ns.jobs))
            if path:
                os.makedirs(os.path.dirname(path), exist_ok=True)
                with open(path, "w") as fh:
                    fh.write(text)
    except UsageError as exc:
        print(f"stablelat: usage error: {exc}", file=sys.stderr)
        return 1
    except PrecisionError as exc:
        print(f"stablelat: insufficient precision: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"stablelat: domain error: {exc}", file=sys.stderr)
        return 3
    if ns.out:
        with open(ns.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
