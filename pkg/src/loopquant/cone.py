"""Finite-jet checks of the Lagrangian-cone description of genus-zero data.

The cone is the graph p = dF_0 over q = t - z*unit, so the point t = 0 sits
at q = -z*unit.  Sample points are formal: t = eps * d with eps nilpotent of
order J + 1, which keeps every check an identity of exact rational
polynomials in eps.

Multiplication by z on coordinates (orthonormal basis, q-part in positive
powers, p-part in (-z)^{-1-k}):  q'_0 = -p_0,  q'_{k+1} = q_k,  p'_j = -p_{j+1}.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import kernels
from .errors import InputError
from .potential import Potential
from .series import TruncatedSeries, decode, encode

Index = tuple  # (mu, k)


# ------------------------------------------------------------ eps-polynomials

def _pmul(a, b, J):
    out = [Fraction(0)] * (J + 1)
    for i, x in enumerate(a):
        if x:
            for j in range(0, J + 1 - i):
                if b[j]:
                    out[i + j] += x * b[j]
    return out


def _padd(a, b, c=1):
    return [x + c * y for x, y in zip(a, b)]


def _pzero(J):
    return [Fraction(0)] * (J + 1)


class _Evaluator:
    """Evaluates derivatives of F_0 at a formal point t(eps) with t(0) = 0."""

    def __init__(self, F0: TruncatedSeries, point: dict, J: int):
        self.F0, self.J = F0, J
        self.point = {v: s for v, s in point.items() if any(s)}
        for s in self.point.values():
            if s[0]:
                raise InputError("cone: sample points must vanish at eps = 0")
        self.cache = {}

    def at(self, ins) -> list:
        key = tuple(sorted(ins))
        if key in self.cache:
            return self.cache[key]
        terms = self.F0._terms
        for v in key:
            terms = kernels.derive_terms(terms, v)
        out = _pzero(self.J)
        for (_, mono), c in terms.items():
            if len(mono) > self.J or any(v not in self.point for v in mono):
                continue
            val = [Fraction(0)] * (self.J + 1)
            val[0] = Fraction(1)
            for v in mono:
                val = _pmul(val, self.point[v], self.J)
            out = _padd(out, val, c)
        self.cache[key] = out
        return out


@dataclass
class _Region:
    D: int
    L: int
    K: int
    psi: int | None = None
    ls: int | None = None

    def order(self, c: int, kappa: int, lmin: int, lmax: int, J: int, maxlevel: int) -> int:
        """Largest eps-order up to J to which d^c F_0 (insertion level-sum kappa) is exact at a
        point supported on variables of levels lmin..lmax; -1 if not even the constant term."""
        if maxlevel > self.K or lmax > self.K:
            return -1
        best = -1
        for j in range(J + 1):
            if c + j > self.D or kappa + j * lmax > self.L:
                break
            if self.ls is not None and kappa + j * lmax > self.ls:
                break
            if self.psi is not None and 2 * (c + j) - kappa - j * lmin > self.psi:
                break
            best = j
        return best


def _region_of(p: Potential) -> _Region:
    w, ex = p.window, p.exact or {}
    return _Region(w.D, w.L, w.K, ex.get("psi"), ex.get("levelsum"))


def _as_potential(F0, unit=None, exact=None) -> Potential:
    if isinstance(F0, Potential):
        return F0
    w = F0.window.replace(G=0)
    series = TruncatedSeries(w, dict(F0.terms)) if w != F0.window else F0
    return Potential(w, [series], unit, exact=exact)


@dataclass
class ConeJet:
    """p-coordinates and tangent frame (Hessian rows) of the graph at a formal point."""

    jet_order: int
    point: dict
    p: dict = field(default_factory=dict)   # (mu, k) -> eps-polynomial
    H: dict = field(default_factory=dict)   # ((mu, k), (nu, l)) -> eps-polynomial
    exact_order: dict = field(default_factory=dict)

    def tangent_basis(self):
        """Columns (dq = e_b, dp = H e_b) of the tangent space, per frame index b."""
        cols = {}
        for (a, b), v in self.H.items():
            cols.setdefault(b, {})[a] = v
        return cols


def cone_jet(F0, base: dict, jet_order: int, *, frame_level: int | None = None, unit=None, exact=None) -> ConeJet:
    """Local model of the cone at t = base(eps).

    ``base`` maps (mu, k) to an eps-polynomial (list, constant term 0) or to a
    rational r (meaning r * eps).  ``frame_level`` bounds the levels of the
    returned p-coordinates and Hessian entries (default: the window's K).
    """
    p = _as_potential(F0, unit, exact)
    F = p.F[0]
    w = p.window
    J = jet_order
    if J < 0 or J > w.D - 2:
        raise InputError(f"cone: jet order {J} exceeds the window (need J <= D - 2 = {w.D - 2})")
    point = {}
    for (mu, k), v in base.items():
        if not (1 <= mu <= w.N and 0 <= k <= w.K):
            raise InputError(f"cone: base coordinate {(mu, k)} outside the window")
        s = list(v) if isinstance(v, (list, tuple)) else [0, v]
        s = [Fraction(x) for x in s][: J + 1] + [Fraction(0)] * max(0, J + 1 - len(s))
        point[encode(mu, k)] = s
    ev = _Evaluator(F, point, J)
    reg = _region_of(p)
    levels = [k for (mu, k) in base] or [0]
    lmin, lmax = min(levels), max(levels)
    kf = w.K if frame_level is None else frame_level
    idx = [(mu, k) for k in range(kf + 1) for mu in range(1, w.N + 1)]
    jet = ConeJet(J, dict(base))
    for a in idx:
        jet.p[a] = ev.at((encode(*a),))
        jet.exact_order[(a,)] = reg.order(1, a[1], lmin, lmax, J, a[1])
        for b in idx:
            jet.H[(a, b)] = ev.at((encode(*a), encode(*b)))
            jet.exact_order[(a, b)] = reg.order(2, a[1] + b[1], lmin, lmax, J, max(a[1], b[1]))
    return jet


# ------------------------------------------------------------ axioms

@dataclass
class AxiomResult:
    axiom: int
    ok: bool
    checked: int = 0
    witness: dict | None = None
    scope: str = ""

    def to_json(self):
        d = {"axiom": self.axiom, "ok": self.ok, "checked": self.checked, "scope": self.scope}
        if self.witness:
            d["witness"] = self.witness
        return d


def _fmt(poly):
    return [str(x) for x in poly]


def _random_direction(rng, N, levels, den=5):
    return {(mu, k): Fraction(rng.randint(-den, den), rng.randint(1, den)) for mu in range(1, N + 1) for k in levels}


def check_cone_axioms(F0, samples=3, jet_order: int = 3, *, unit=None, exact=None, seed: int = 0) -> dict:
    """Check the four cone axioms for genus-zero data at ``samples`` formal points.

    ``samples`` is either a count (random directions from ``seed``) or a list
    of (d, u) pairs: the sample point is t = eps*d (d on level-0/1
    coordinates) and u (level 0) is the extra direction used in axioms 3 and 4.
    Returns {"ok", "axioms": [...], "samples"}.
    """
    from .relations import builtin, evaluate_relation

    p = _as_potential(F0, unit, exact)
    w, J = p.window, jet_order
    if J < 1 or J > w.D - 2:
        raise InputError(f"cone: jet order {J} exceeds the window (need 1 <= J <= D - 2 = {w.D - 2})")
    for msg in p.invariant_violations()[:1]:
        if msg.startswith("F_0"):
            raise InputError(f"cone: genus-zero data must start in degree 3 ({msg})")
    reg = _region_of(p)
    if isinstance(samples, int):
        rng = random.Random(seed)
        samples = [(_random_direction(rng, w.N, (0, 1)), _random_direction(rng, w.N, (0,))) for _ in range(samples)]
    unit_v = p.unit

    # axiom 1: homogeneity of degree 2 in q, which in t-coordinates is the dilaton equation
    de = evaluate_relation(builtin("DE"), p.restrict(w.replace(G=0)) if w.G else p)
    a1 = AxiomResult(1, de.ok, de.asserted_coefficients, de.violations[0] if de.violations else None,
                     "all asserted coefficients of the Euler identity in q")
    a2 = AxiomResult(2, True, scope=f"Hessian rows/columns exact to eps^{J}")
    a3 = AxiomResult(3, True, scope=f"z(tangent vector) through the shifted origin, eps^{J}")
    a4 = AxiomResult(4, True, scope=f"tangent spaces along z T_f, eps^{J}")

    def fail(res, wit):
        if res.ok:
            res.ok, res.witness = False, wit

    for si, (d, u) in enumerate(samples):
        jet = cone_jet(p, d, J)
        H, ex = jet.H, jet.exact_order
        idx = sorted({a for a, _ in H}, key=lambda x: (x[1], x[0]))
        lvl0 = [(mu, 0) for mu in range(1, w.N + 1)]

        def good(*pairs):
            return all(ex.get(pr, -1) >= J for pr in pairs)

        # axiom 2: z T_f is contained in T_f
        for a in idx:
            a1_ = (a[0], a[1] + 1)
            for b in idx:
                b1 = (b[0], b[1] + 1)
                need = [(a1_, b), (a, b1)] + [(a, n) for n in lvl0] + [(n, b) for n in lvl0]
                if not good(*need):
                    continue
                lhs = H[(a1_, b)]
                rhs = _padd(_pzero(J), H[(a, b1)], -1)
                for n in lvl0:
                    rhs = _padd(rhs, _pmul(H[(a, n)], H[(n, b)], J))
                a2.checked += 1
                if lhs != rhs:
                    fail(a2, {"sample": si, "row": list(a), "column": list(b), "lhs": _fmt(lhs), "rhs": _fmt(rhs)})

        # tangent vector dq = -unit (level 0) + eps*u; w = z*(dq, H dq)
        dq = {}
        for mu in range(1, w.N + 1):
            s = _pzero(J)
            s[0] = -Fraction(unit_v[mu - 1])
            if J >= 1:
                s[1] = Fraction(u.get((mu, 0), 0))
            dq[(mu, 0)] = s

        def Hdq(a):
            acc = _pzero(J)
            for b, s in dq.items():
                acc = _padd(acc, _pmul(H[(a, b)], s, J))
            return acc

        rows_ok = {a: good(*[(a, b) for b in dq]) for a in idx}
        if not all(rows_ok[n] for n in lvl0):
            raise InputError("cone: window too small to build z T_f at this jet order")
        # t' = q' + z*unit: t'_0 = -(H dq)_0, t'_1 = dq_0 + unit (= eps*u)
        tprime = {}
        for mu in range(1, w.N + 1):
            tprime[(mu, 0)] = _padd(_pzero(J), Hdq((mu, 0)), -1)
            s = list(dq[(mu, 0)])
            s[0] += Fraction(unit_v[mu - 1])
            tprime[(mu, 1)] = s
        for v in tprime.values():
            if v[0]:
                raise InputError("cone: the z-image of the sample is not in the formal neighbourhood")
        jet2 = cone_jet(p, {k: v for k, v in tprime.items()}, J)

        # axiom 3: p' = -(H dq)_{a+1} equals dF_0/dt_a at t'
        for a in idx:
            a1_ = (a[0], a[1] + 1)
            if a1_ not in rows_ok or not rows_ok[a1_] or jet2.exact_order[(a,)] < J:
                continue
            a3.checked += 1
            lhs = _padd(_pzero(J), Hdq(a1_), -1)
            if lhs != jet2.p[a]:
                fail(a3, {"sample": si, "coordinate": list(a), "z_image_p": _fmt(lhs), "graph_p": _fmt(jet2.p[a])})

        # axiom 4: the tangent space at t' equals T_f
        for (a, b), v in H.items():
            if ex[(a, b)] < J or jet2.exact_order[(a, b)] < J:
                continue
            a4.checked += 1
            if v != jet2.H[(a, b)]:
                fail(a4, {"sample": si, "entry": [list(a), list(b)], "at_f": _fmt(v), "at_z_image": _fmt(jet2.H[(a, b)])})

    axioms = [a1, a2, a3, a4]
    for a in axioms[1:]:
        if a.checked == 0:
            raise InputError(f"cone: no exact coefficients for axiom {a.axiom}; enlarge the window or lower the jet order")
    return {"ok": all(a.ok for a in axioms), "jet_order": J, "samples": len(samples),
            "axioms": [a.to_json() for a in axioms]}
