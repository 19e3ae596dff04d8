"""Exact evaluation of relations on a potential, with truncation bookkeeping.

A residual coefficient at monomial m is *asserted* only when every
correlator feeding it is known exactly: its source monomial (m, or any
sub-monomial when two correlator factors share m, plus the insertions)
must lie in the potential's window box and in its exact region.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .. import kernels
from ..errors import InputError
from ..potential import Potential
from ..series import TruncatedSeries, Window, encode, levelsum
from .model import Corr, Eta, Relation, Var

_INF = 1 << 30


def _psi_best(mono) -> int:
    return sum(max(0, 2 - (v >> 6)) for v in mono)


@dataclass
class RelationReport:
    relation: str
    region: dict
    assignments_checked: int = 0
    assignments_skipped: int = 0
    asserted_coefficients: int = 0
    ignored_nonzero: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "relation": self.relation,
            "ok": self.ok,
            "region": self.region,
            "assignments_checked": self.assignments_checked,
            "assignments_skipped": self.assignments_skipped,
            "asserted_coefficients": self.asserted_coefficients,
            "ignored_nonzero": self.ignored_nonzero,
            "violations": self.violations,
        }


class _Context:
    def __init__(self, p: Potential):
        self.p = p
        self.w = p.window
        region = p.exact or {}
        self.psi_cap = region.get("psi")
        self.ls_cap = region.get("levelsum")
        self.cache = {}
        self.monos = None
        self.count_cache = {}

    def region(self) -> dict:
        d = {"window": self.w.to_json()}
        if self.psi_cap is not None:
            d["psi"] = self.psi_cap
        if self.ls_cap is not None:
            d["levelsum"] = self.ls_cap
        return d

    def deriv(self, g, ins):
        """d^{ins} F_g as a term dict (ins sorted tuple of encoded variables)."""
        key = (g, ins)
        if key not in self.cache:
            if not ins:
                self.cache[key] = self.p.F[g]._terms
            else:
                self.cache[key] = kernels.derive_terms(self.deriv(g, ins[:-1]), ins[-1])
        return self.cache[key]

    def thresholds(self, g, levels):
        """(A, B, C) bounds on (degree, levelsum, psi_best) of the shared monomial, or None if dead."""
        w = self.w
        if g > w.G:
            raise InputError(f"relation uses genus {g} but the window has G = {w.G}")
        if any(k > w.K for k in levels):
            return None
        c, kap = len(levels), sum(levels)
        A, B, C = w.D - c, w.L - kap, _INF
        if self.ls_cap is not None:
            B = min(B, self.ls_cap - kap)
        if self.psi_cap is not None:
            C = self.psi_cap - 2 * c + kap - 4 * g
        if A < 0 or B < 0 or C < 0:
            return None
        return A, B, C

    def window_monomials(self):
        if self.monos is None:
            from ..quantize import all_monomials

            self.monos = [(m, len(m), levelsum(m), _psi_best(m)) for m in all_monomials(self.w)]
        return self.monos


def _asserted(m, deg, ls, pb, descriptors) -> bool:
    ms = None
    for V, th in descriptors:
        if V:
            if ms is None:
                ms = list(m)
            rest = list(ms)
            try:
                for v in V:
                    rest.remove(v)
            except ValueError:
                continue
            d, s, b = len(rest), levelsum(rest), _psi_best(rest)
        else:
            d, s, b = deg, ls, pb
        if th is None or d > th[0] or s > th[1] or b > th[2]:
            return False
    return True


def _expand(ins, env, contracted, unit, N):
    """Resolve an insertion to a list of (coefficient, (mu, level))."""
    k = ins.level.evaluate(env) if ins.level.var else ins.level.offset
    if ins.kind == "free":
        return [(1, (env[ins.name], env[ins.name + "#level"] + ins.level.offset))]
    if ins.kind == "contracted":
        return [(1, (contracted[ins.name], k))]
    if ins.kind == "unit":
        return [(u, (mu, k)) for mu, u in enumerate(unit, start=1) if u]
    if ins.mu > N:
        raise InputError(f"basis index {ins.mu} exceeds N = {N}")
    return [(1, (ins.mu, k))]


def _term_pieces(term, env, ctx):
    """Yield (coefficient, var-monomial, corr factors) over the contractions of one term."""
    w, unit = ctx.w, ctx.p.unit
    names = [s.name for s in term.sums]
    lvars = [s.level_var for s in term.sums if s.level_var]
    for mus in itertools.product(range(1, w.N + 1), repeat=len(names)):
        contracted = dict(zip(names, mus))
        if any(isinstance(f, Eta) and contracted[f.left] != contracted[f.right] for f in term.factors):
            continue
        for levels in itertools.product(range(w.K + 1), repeat=len(lvars)):
            e = dict(env)
            e.update(zip(lvars, levels))
            pieces = [(Fraction(1), (), [])]
            for f in term.factors:
                if isinstance(f, Eta):
                    continue
                if isinstance(f, Var):
                    new = []
                    for c, (mu, k) in _expand(f.insertion, e, contracted, unit, w.N):
                        for pc, V, corrs in pieces:
                            new.append((pc * c, V + ((mu, k),), corrs))
                    pieces = new
                else:
                    options = [[(Fraction(1), ())]]
                    for ins in f.insertions:
                        options.append([(c, (x,)) for c, x in _expand(ins, e, contracted, unit, w.N)])
                    combos = []
                    for choice in itertools.product(*options):
                        c = Fraction(1)
                        xs = ()
                        for cc, x in choice:
                            c *= cc
                            xs += x
                        combos.append((c, xs))
                    new = []
                    for c, xs in combos:
                        for pc, V, corrs in pieces:
                            new.append((pc * c, V, corrs + [(f.genus, xs)]))
                    pieces = new
            for pc, V, corrs in pieces:
                if any(k > w.K or mu > w.N for mu, k in V):
                    # the var factor leaves the window: no in-window monomial receives this piece
                    continue
                yield term.coeff * pc, V, corrs


def _assignments(rel: Relation, w: Window):
    slots = rel.free
    ranges = [list(itertools.product(range(1, w.N + 1), range(w.K + 1))) for _ in slots]
    for combo in itertools.product(*ranges):
        env = {}
        for s, (mu, k) in zip(slots, combo):
            env[s.name] = mu
            env[s.name + "#level"] = k
            env[s.level_var] = k
        yield env, combo


def residual_series(rel: Relation, p: Potential, assignment=None, _ctx=None):
    """LHS - RHS for one free-index assignment ((mu, k) per free slot), with its assertion descriptors."""
    ctx = _ctx or _Context(p)
    w = ctx.w
    env = {}
    for s, (mu, k) in zip(rel.free, assignment or ()):
        env[s.name], env[s.name + "#level"], env[s.level_var] = mu, k, k
    if len(assignment or ()) != len(rel.free):
        raise InputError(f"relation {rel.name} needs {len(rel.free)} free-slot values")
    pieces = []
    descriptors = set()
    for term in rel.terms:
        for coeff, V, corrs in _term_pieces(term, env, ctx):
            Vm = tuple(sorted(encode(mu, k) for mu, k in V))
            if corrs:
                ths = [ctx.thresholds(g, [k for _, k in xs]) for g, xs in corrs]
                th = None if any(t is None for t in ths) else tuple(min(t[i] for t in ths) for i in range(3))
                descriptors.add((Vm, th))
            if coeff:
                pieces.append((coeff, Vm, corrs))
    # only monomials passing every descriptor without var factors are ever asserted
    dcap, lcap = w.D, w.L
    for Vm, th in descriptors:
        if not Vm:
            if th is None:
                return TruncatedSeries.zero(w), frozenset(descriptors)
            dcap, lcap = min(dcap, th[0]), min(lcap, th[1])
    acc = {}
    for coeff, Vm, corrs in pieces:
        if len(Vm) > dcap or levelsum(Vm) > lcap:
            continue
        prod = {(0, Vm): Fraction(1)}
        for g, xs in corrs:
            if any(k > w.K for _, k in xs):
                prod = {}
                break
            ins = tuple(sorted(encode(mu, k) for mu, k in xs))
            prod = kernels.mul_terms(prod, ctx.deriv(g, ins), dcap, lcap, kernels.NO_CAP)
            if not prod:
                break
        kernels.add_into(acc, prod, coeff)
    acc = {k: v for k, v in acc.items() if v}
    return TruncatedSeries(w, acc, _trusted=True), frozenset(descriptors)


def evaluate_relation(rel: Relation, p: Potential, *, max_violations: int = 20) -> RelationReport:
    """Residuals of ``rel`` on ``p`` for every free-index assignment in the window."""
    if rel.max_corr_genus() > p.window.G:
        raise InputError(f"insufficient window: relation {rel.name} needs G >= {rel.max_corr_genus()}")
    ctx = _Context(p)
    rep = RelationReport(rel.name, ctx.region())
    for env, combo in _assignments(rel, ctx.w):
        res, desc = residual_series(rel, p, combo, ctx)
        if any(V == () and th is None for V, th in desc):
            rep.assignments_skipped += 1
            continue
        rep.assignments_checked += 1
        if desc not in ctx.count_cache:
            ctx.count_cache[desc] = sum(1 for m in ctx.window_monomials() if _asserted(*m, desc))
        rep.asserted_coefficients += ctx.count_cache[desc]
        bad = []
        for (gr, m), c in res.sorted_items():
            if _asserted(m, len(m), levelsum(m), _psi_best(m), desc):
                bad.append((m, c))
            else:
                rep.ignored_nonzero += 1
        if bad and len(rep.violations) < max_violations:
            sub = TruncatedSeries(ctx.w, {(0, m): c for m, c in bad})
            rep.violations.append({
                "assignment": [list(x) for x in combo],
                "residual_terms": sub.to_json()["terms"],
            })
        elif bad:
            rep.violations.append({"assignment": [list(x) for x in combo], "residual_terms": "truncated"})
    if rep.assignments_checked == 0 or rep.asserted_coefficients == 0:
        raise InputError(_insufficient(rel, ctx))
    return rep


def _insufficient(rel, ctx) -> str:
    need_c = need_k = 0
    for t in rel.terms:
        for f in t.factors:
            if isinstance(f, Corr):
                need_c = max(need_c, len(f.insertions))
                need_k = max(need_k, sum(i.level.offset for i in f.insertions))
    return (f"insufficient window for relation {rel.name}: correlator factors need D >= {need_c} and "
            f"L >= {need_k} inside the exact region {ctx.region()}")


def check_invariance(relations, elements, window: Window, unit=None) -> dict:
    """product vertex -> exp(A-hat) for each element in order -> evaluate every relation."""
    from ..flow import act
    from ..vertex import product_vertex

    p = product_vertex(window)
    if unit is not None:
        p = p.replace(unit=unit)
    orders = []
    for e in elements:
        p, info = act(p, e)
        orders.append(info["orders"])
    reports = [evaluate_relation(r, p) for r in relations]
    return {
        "ok": all(r.ok for r in reports),
        "orders": orders,
        "exact": p.exact or {},
        "reports": [r.to_json() for r in reports],
        "potential": p,
    }
