"""Weyl quantization of quadratic hamiltonians and the action on tau-forms.

Operators are written in the unshifted t-coordinates: every q^mu_1 of the
quantized hamiltonian is replaced by t^mu_1 - unit_mu, which splits it into a
t-term and a constant.  Summand kinds (hbar-grade in brackets):

    dd[(a, b)]  c * hbar * d_a d_b          [+1]   a <= b
    td[(a, b)]  c * t_a d_b                  [0]
    d[b]        c * d_b                      [0]
    tt[(a, b)]  c * t_a t_b / hbar          [-1]   a <= b
    t[a]        c * t_a / hbar              [-1]
    const[g]    c * hbar^g
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import kernels
from .errors import CheckFailure, InputError
from .loopgrp import LoopElement, QuadHamiltonian, lie_bracket, quadratic_hamiltonian, require_symplectic
from .series import TruncatedSeries, Window, decode, encode, make_mono, mono_indices

# Relative sign between the explicit r-hat display and weyl_quantize(P(r)),
# fixed by the cross-check in tests/test_quantize.py.
EXPLICIT_SIGN = -1


def _acc(d, key, c):
    v = d.get(key, 0) + c
    if v:
        d[key] = v
    else:
        d.pop(key, None)


@dataclass
class QuantizedOperator:
    N: int
    kind: str = "zero"
    dd: dict = field(default_factory=dict)
    td: dict = field(default_factory=dict)
    d: dict = field(default_factory=dict)
    tt: dict = field(default_factory=dict)
    t: dict = field(default_factory=dict)
    const: dict = field(default_factory=dict)

    def tables(self):
        return (self.dd, self.td, self.d, self.tt, self.t, self.const)

    def is_zero(self):
        return not any(self.tables())

    def __eq__(self, other):
        return isinstance(other, QuantizedOperator) and self.tables() == other.tables()

    def scale(self, c) -> "QuantizedOperator":
        c = Fraction(c)
        out = QuantizedOperator(self.N, self.kind)
        if c:
            for src, dst in zip(self.tables(), out.tables()):
                dst.update({k: c * v for k, v in src.items()})
        return out

    def __neg__(self):
        return self.scale(-1)

    def __add__(self, other):
        out = self.scale(1)
        for src, dst in zip(other.tables(), out.tables()):
            for k, v in src.items():
                _acc(dst, k, v)
        out.kind = self.kind if other.kind in (self.kind, "zero") else (other.kind if self.kind == "zero" else "mixed")
        return out

    def add_dd(self, a, b, c):
        _acc(self.dd, (min(a, b), max(a, b)), c)

    def add_tt(self, a, b, c):
        _acc(self.tt, (min(a, b), max(a, b)), c)

    def grade_changes(self):
        """Set of hbar-grade shifts this operator can produce."""
        out = set()
        if self.dd:
            out.add(1)
        if self.td or self.d:
            out.add(0)
        if self.tt or self.t:
            out.add(-1)
        out.update(self.const)
        return out

    def summands(self):
        """Flat, deterministic list of summands for dumps and tests."""
        def idx(v):
            return list(decode(v))
        out = []
        for (a, b), c in sorted(self.dd.items()):
            out.append({"type": "hbar*d*d", "vars": [idx(a), idx(b)], "coeff": str(c)})
        for (a, b), c in sorted(self.td.items()):
            out.append({"type": "t*d", "vars": [idx(a), idx(b)], "coeff": str(c)})
        for b, c in sorted(self.d.items()):
            out.append({"type": "d", "vars": [idx(b)], "coeff": str(c)})
        for (a, b), c in sorted(self.tt.items()):
            out.append({"type": "t*t/hbar", "vars": [idx(a), idx(b)], "coeff": str(c)})
        for a, c in sorted(self.t.items()):
            out.append({"type": "t/hbar", "vars": [idx(a)], "coeff": str(c)})
        for g, c in sorted(self.const.items()):
            out.append({"type": "const", "grade": g, "coeff": str(c)})
        return out

    def to_json(self):
        return {"N": self.N, "kind": self.kind, "summands": self.summands()}


def _shifted(mu, k, unit):
    """q^mu_k as (t-variable, constant) with q^mu_1 = t^mu_1 - unit_mu."""
    return encode(mu, k), (-unit[mu - 1] if k == 1 else 0)


def weyl_quantize(h: QuadHamiltonian, unit, kind: str = "mixed") -> QuantizedOperator:
    """pp -> hbar d d, p_a q_b -> q_b d_a, qq -> q q / hbar, then shift q -> t."""
    unit = [Fraction(u) for u in unit]
    op = QuantizedOperator(h.N, kind)
    for (a, b), c in h.pp.items():
        op.add_dd(encode(*a), encode(*b), c)
    for (a, b), c in h.pq.items():
        tb, cb = _shifted(*b, unit)
        _acc(op.td, (tb, encode(*a)), c)
        if cb:
            _acc(op.d, encode(*a), c * cb)
    for (a, b), c in h.qq.items():
        ta, ca = _shifted(*a, unit)
        tb, cb = _shifted(*b, unit)
        op.add_tt(ta, tb, c)
        if cb:
            _acc(op.t, ta, c * cb)
        if ca:
            _acc(op.t, tb, c * ca)
        if ca and cb:
            _acc(op.const, -1, c * ca * cb)
    return op


def quantize_element(a: LoopElement, unit, kmax: int) -> QuantizedOperator:
    """weyl_quantize(quadratic_hamiltonian(a)) with the element's kind."""
    return weyl_quantize(quadratic_hamiltonian(a, kmax), unit, a.kind)


def quantize_upper_explicit(r: LoopElement, unit, kmax: int) -> QuantizedOperator:
    """Literal r-hat:  sum (r_l)_ij q^j_n d_{q^i_{n+l}}
    + hbar/2 sum_{m<l} (-1)^(m+1) (r_l)_ij d_{q^i_{l-1-m}} d_{q^j_m}."""
    require_symplectic(r)
    if r.kind not in ("upper", "zero"):
        raise InputError("quantize_upper_explicit needs an upper element")
    unit = [Fraction(u) for u in unit]
    op = QuantizedOperator(r.N, r.kind)
    half = Fraction(1, 2)
    for l, m in r.coeffs.items():
        for i in range(1, r.N + 1):
            for j in range(1, r.N + 1):
                c = m[i - 1][j - 1]
                if not c:
                    continue
                for n in range(0, kmax - l + 1):
                    tj, cj = _shifted(j, n, unit)
                    _acc(op.td, (tj, encode(i, n + l)), c)
                    if cj:
                        _acc(op.d, encode(i, n + l), c * cj)
                for mm in range(l):
                    sign = 1 if mm % 2 else -1
                    op.add_dd(encode(i, l - 1 - mm), encode(j, mm), half * sign * c)
    return op


# ---------------------------------------------------------------- action

def _regrade(terms, delta):
    return {(g + delta, m): c for (g, m), c in terms.items()}


def apply_operator(op: QuantizedOperator, tau: TruncatedSeries) -> TruncatedSeries:
    """Exact linear action of op on a (graded) series, truncated to its window."""
    w = tau.window
    if not tau.graded and op.grade_changes() - {0}:
        raise InputError("apply_operator: hbar-graded operator needs a graded series")
    wcap = w.weight_cap if tau.graded else kernels.NO_CAP
    terms = tau.terms

    def ok(v):
        mu, k = decode(v)
        return mu <= w.N and k <= w.K

    dcache = {}

    def der(b):
        if b not in dcache:
            dcache[b] = kernels.derive_terms(dict(terms), b)
        return dcache[b]

    def times(t_terms, mono):
        return kernels.mul_terms(t_terms, {(0, mono): 1}, w.D, w.L, wcap)

    out = {}
    # first-order parts, grouped by the multiplying variable
    groups = {}
    for (a, b), c in op.td.items():
        if ok(a) and ok(b):
            groups.setdefault(a, []).append((b, c))
    for a, items in groups.items():
        acc = {}
        for b, c in items:
            kernels.add_into(acc, der(b), c)
        kernels.add_into(out, times(acc, (a,)), 1)
    for b, c in op.d.items():
        if ok(b):
            kernels.add_into(out, der(b), c)
    for (a, b), c in op.dd.items():
        if ok(a) and ok(b):
            dab = kernels.derive_terms(der(a), b)
            kernels.add_into(out, _regrade(dab, 1), c)
    for (a, b), c in op.tt.items():
        if ok(a) and ok(b):
            kernels.add_into(out, _regrade(times(dict(terms), tuple(sorted((a, b)))), -1), c)
    for a, c in op.t.items():
        if ok(a):
            kernels.add_into(out, _regrade(times(dict(terms), (a,)), -1), c)
    for g, c in op.const.items():
        kernels.add_into(out, _regrade(dict(terms), g), c)
    return TruncatedSeries(w, out, tau.graded)


def apply_exp(op: QuantizedOperator, tau: TruncatedSeries, direction: str = "forward", max_terms: int | None = None) -> TruncatedSeries:
    """exp(+op) or exp(-op) applied to tau by iterated action.

    The sum is finite because pure upper (lower) operators strictly lower
    (raise) the dimension grading, which is bounded on a window.
    """
    if direction not in ("forward", "inverse"):
        raise InputError(f"apply_exp: unknown direction {direction!r}")
    if op.kind not in ("upper", "lower", "zero"):
        raise InputError(f"apply_exp: no termination argument for a {op.kind} operator")
    if direction == "inverse":
        op = -op
    w = tau.window
    limit = max_terms or 3 * (w.D + w.L + 2 * w.G) + 8
    result, term = tau, tau
    for n in range(1, limit + 1):
        term = apply_operator(op, term).scale(Fraction(1, n))
        if term.is_zero():
            return result
        result = result + term
    raise InputError(f"apply_exp: no termination after {limit} terms")


# ---------------------------------------------------------------- cocycle

def all_monomials(window: Window):
    """Every monomial inside the window (as encoded tuples)."""
    vars_ = sorted(encode(mu, k) for mu, k in window.variables())
    out = [()]

    def rec(start, mono):
        for i in range(start, len(vars_)):
            m = mono + (vars_[i],)
            if window.contains_mono(m):
                out.append(m)
                rec(i, m)
            elif len(m) > window.D:
                return

    rec(0, ())
    return out


# [A-hat, B-hat] = BRACKET_SIGN * ([A, B])-hat + central term
BRACKET_SIGN = 1


def commutator_defect(a: LoopElement, b: LoopElement, window: Window, unit=None, bracket_sign: int | None = None) -> Fraction:
    """Central term of [A-hat, B-hat] - ([A,B])-hat on every test monomial."""
    sign = BRACKET_SIGN if bracket_sign is None else bracket_sign
    unit = unit if unit is not None else [1] * a.N
    la, lb = a.l_max, b.l_max
    kmax = window.K + la + lb + 1
    A = quantize_element(a, unit, kmax)
    B = quantize_element(b, unit, kmax)
    C = quantize_element(lie_bracket(a, b), unit, kmax).scale(sign)
    big = Window(window.N, kmax, window.D + 4, window.G + window.D + 8, 4 * kmax * (window.D + 4))
    value = None
    for mono in all_monomials(window):
        m = TruncatedSeries(big, {(0, mono): 1}, graded=True)
        res = apply_operator(A, apply_operator(B, m)) - apply_operator(B, apply_operator(A, m)) - apply_operator(C, m)
        if res.is_zero():
            lam = Fraction(0)
        else:
            lam = res.coeff(mono)
            if res != m.scale(lam):
                raise CheckFailure(f"non-central commutator defect on {mono_indices(mono)}: {res.to_string()[:200]}")
        if value is None:
            value = lam
        elif lam != value:
            raise CheckFailure(f"defect {lam} on {mono_indices(mono)} differs from {value}")
    return value if value is not None else Fraction(0)
