"""Correlator flows and exact loop-group actions on potentials.

For an operator O built from the summands of ``QuantizedOperator`` the
potential X = sum hbar^{g-1} F_g evolves under d tau/d eps = O tau by

    dX/deps = e^{-X} O e^{X}
            = (first-order part) X + sum c (d_a d_b X + d_a X d_b X) hbar + sources,

which is integrated as a Taylor series in eps.  Exactness on a truncated
window rests on the dimension grading dim = sum(k_a - 1) - 3(g - 1) of a
term of F_g: upper elements lower it, lower elements raise it.

* upper (input dim <= 0): psi = 2*deg - levelsum + 4g never decreases along
  any summand, so the region psi <= Psi is closed and finite.
* lower (input dim >= 0): the level-sum never decreases, so the region
  levelsum <= Lambda is closed and (with dim >= 0) finite.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from . import kernels
from .errors import InputError
from .loopgrp import LoopElement, require_symplectic
from .potential import CorrelatorIndex, Potential, correlator
from .quantize import QuantizedOperator, quantize_element, quantize_upper_explicit
from .series import TruncatedSeries, Window, decode, levelsum


def psi(g: int, mono) -> int:
    return 2 * len(mono) - levelsum(mono) + 4 * g


def psi_best(mono) -> int:
    """Largest psi-contribution of any sub-monomial (genus excluded)."""
    return sum(max(0, 2 - (v >> 6)) for v in mono)


# ------------------------------------------------------------ flow field

class _Field:
    """Evaluates the potential-level vector field of an operator."""

    def __init__(self, op: QuantizedOperator, window: Window, G: int):
        self.window = window
        self.G = G
        w = window

        def ok(v):
            mu, k = decode(v)
            return mu <= w.N and k <= w.K

        self.groups = {}
        for (a, b), c in op.td.items():
            if ok(a) and ok(b):
                self.groups.setdefault(a, []).append((b, c))
        self.d = [(b, c) for b, c in op.d.items() if ok(b)]
        self.dd = [(a, b, c) for (a, b), c in op.dd.items() if ok(a) and ok(b)]
        src = {}
        for (a, b), c in op.tt.items():
            if ok(a) and ok(b):
                key = (0, tuple(sorted((a, b))))
                src[key] = src.get(key, 0) + c
        for a, c in op.t.items():
            if ok(a):
                src[(0, (a,))] = src.get((0, (a,)), 0) + c
        self.sources = {}  # genus -> terms
        if src:
            self.sources[0] = src
        for grade, c in op.const.items():
            self.sources.setdefault(grade + 1, {})
            self.sources[grade + 1][(0, ())] = self.sources[grade + 1].get((0, ()), 0) + c
        self.dd_vars = sorted({a for a, _, _ in self.dd} | {b for _, b, _ in self.dd})

    def _mul(self, x, y):
        w = self.window
        return kernels.mul_terms(x, y, w.D, w.L, kernels.NO_CAP)

    def linear(self, comps):
        """First-order part plus the hbar d d term (genus raising)."""
        out = [dict() for _ in range(self.G + 1)]
        for g, F in enumerate(comps):
            if not F:
                continue
            dc = {}

            def der(b):
                if b not in dc:
                    dc[b] = kernels.derive_terms(F, b)
                return dc[b]

            for a, items in self.groups.items():
                acc = {}
                for b, c in items:
                    kernels.add_into(acc, der(b), c)
                if acc:
                    kernels.add_into(out[g], self._mul(acc, {(0, (a,)): 1}), 1)
            for b, c in self.d:
                kernels.add_into(out[g], der(b), c)
            if g + 1 <= self.G:
                for a, b, c in self.dd:
                    kernels.add_into(out[g + 1], kernels.derive_terms(der(a), b), c)
        return out

    def first_derivs(self, comps):
        return [{v: kernels.derive_terms(F, v) for v in self.dd_vars} if F else {} for F in comps]

    def quadratic(self, da, db):
        """sum c d_a A_{g1} d_b B_{g2} into genus g1 + g2."""
        out = [dict() for _ in range(self.G + 1)]
        for g1, A in enumerate(da):
            if not A:
                continue
            for g2, B in enumerate(db):
                if not B or g1 + g2 > self.G:
                    continue
                for a, b, c in self.dd:
                    x, y = A.get(a), B.get(b)
                    if x and y:
                        kernels.add_into(out[g1 + g2], self._mul(x, y), c)
        return out


def _filter(comps, keep):
    if keep is None:
        return comps
    return [{k: v for k, v in F.items() if keep(g, k[1])} for g, F in enumerate(comps)]


def evolve(p: Potential, op: QuantizedOperator, *, order: int | None = None, keep=None, max_order: int = 64):
    """Taylor-integrate dX/deps = e^{-X} O e^{X} from eps = 0 to eps = 1.

    With ``order`` the series is cut after that power of eps; otherwise it
    runs until the next Taylor coefficient vanishes.  ``keep(g, mono)``
    restricts every coefficient to a region closed under the flow.
    Returns (components, number of nonzero Taylor orders used).
    """
    field = _Field(op, p.window, p.window.G)
    phi = [_filter([dict(F.terms) for F in p.F], keep)]
    derivs = [field.first_derivs(phi[0])]
    total = [dict(F) for F in phi[0]]
    limit = order if order is not None else max_order
    used = 0
    for n in range(limit):
        nxt = field.linear(phi[n])
        if n == 0:
            for g, src in field.sources.items():
                if g <= p.window.G:
                    kernels.add_into(nxt[g], src, 1)
        for i in range(n + 1):
            q = field.quadratic(derivs[i], derivs[n - i])
            for g in range(p.window.G + 1):
                kernels.add_into(nxt[g], q[g], 1)
        scale = Fraction(1, n + 1)
        nxt = _filter([{k: v * scale for k, v in F.items()} for F in nxt], keep)
        nxt = [TruncatedSeries(p.window, F)._terms for F in nxt]
        if not any(nxt):
            break
        used = n + 1
        phi.append(nxt)
        derivs.append(field.first_derivs(nxt))
        for g in range(p.window.G + 1):
            kernels.add_into(total[g], nxt[g], 1)
    else:
        if order is None:
            raise InputError(f"flow did not terminate within {max_order} Taylor orders")
    comps = [TruncatedSeries(p.window, F, _trusted=True) for F in total]
    return comps, used


# ------------------------------------------------------------ exact actions

def upper_psi_bound(window: Window) -> int:
    G = window.G
    return min(window.D + 3, window.L - 2 * G + 6, window.K - 2 * G + 6)


def lower_ls_bound(window: Window) -> int:
    return min(window.L, window.D - 3, window.K)


def exact_region(p: Potential) -> dict:
    return dict(p.exact or {})


def act(p: Potential, element: LoopElement, inverse: bool = False):
    """exp(+-A-hat) acting on p, exact on the region recorded in the result.

    Returns (potential, info) where info has the Taylor order used and the
    exact region ({"psi": Psi} for upper, {"levelsum": Lambda} for lower).
    """
    require_symplectic(element)
    if element.N != p.window.N:
        raise InputError("act: element dimension does not match the potential")
    kind = element.kind
    region = exact_region(p)
    if kind == "zero":
        return p, {"orders": 0, "exact": region}
    if kind == "mixed":
        raise InputError("act: mixed elements have no termination argument; split into upper and lower factors")
    op = quantize_element(element, p.unit, p.window.K)
    if inverse:
        op = -op
    if kind == "upper":
        if p.dimension not in ("zero", "nonpositive"):
            raise InputError("act: upper action needs a potential with nonpositive dimension grading")
        if "levelsum" in region:
            raise InputError("act: potential carries a level-sum region; upper action is not exact on it")
        bound = upper_psi_bound(p.window)
        if "psi" in region:
            bound = min(bound, region["psi"])
        keep = lambda g, m: psi(g, m) <= bound  # noqa: E731
        comps, used = evolve(p, op, keep=keep, max_order=bound + 4)
        out = p.replace(components=comps, dimension="nonpositive", exact={"psi": bound})
    else:
        if p.dimension not in ("zero", "nonnegative"):
            raise InputError("act: lower action needs a potential with nonnegative dimension grading")
        if "psi" in region:
            raise InputError("act: potential carries a psi region; lower action is not exact on it")
        bound = lower_ls_bound(p.window)
        if "levelsum" in region:
            bound = min(bound, region["levelsum"])
        if bound < 0:
            raise InputError("act: window too small for an exact lower action (need D >= 3)")
        keep = lambda g, m: levelsum(m) <= bound  # noqa: E731
        comps, used = evolve(p, op, keep=keep, max_order=bound + 6)
        out = p.replace(components=comps, dimension="nonnegative", exact={"levelsum": bound})
    return out, {"orders": used, "exact": dict(out.exact)}


# ------------------------------------------------------------ literal flow

def _corr(p: Potential, g: int, ins) -> Fraction:
    if g < 0:
        return Fraction(0)
    return correlator(p, CorrelatorIndex(g, tuple(ins)))


def flow_derivative_terms(p: Potential, r: LoopElement, idx: CorrelatorIndex) -> dict:
    """The four groups of the correlator flow, evaluated separately.

    "shift": the q-term at the shift point q^j_1 = -unit_j; "raising": the
    insertion-raising term; "genus_lowering": <d_{l-1-m} d_m ...>_{g-1};
    "splitting": genus g' from 0 to g with derivatives distributed by Leibniz.
    """
    require_symplectic(r)
    if r.kind not in ("upper", "zero"):
        raise InputError("flow_derivative needs an upper element")
    if not isinstance(idx, CorrelatorIndex):
        idx = CorrelatorIndex(*idx)
    g, ins = idx.genus, list(idx.insertions)
    N = r.N
    half = Fraction(1, 2)
    out = {"shift": Fraction(0), "raising": Fraction(0), "genus_lowering": Fraction(0), "splitting": Fraction(0)}
    for l, m in r.coeffs.items():
        for i in range(1, N + 1):
            for j in range(1, N + 1):
                c = m[i - 1][j - 1]
                if c and p.unit[j - 1]:
                    out["shift"] += c * (-p.unit[j - 1]) * _corr(p, g, [(i, 1 + l)] + ins)
        for a, (ia, ka) in enumerate(ins):
            rest = ins[:a] + ins[a + 1:]
            for i in range(1, N + 1):
                c = m[i - 1][ia - 1]
                if c:
                    out["raising"] += c * _corr(p, g, [(i, ka + l)] + rest)
        n = len(ins)
        for mm in range(l):
            sign = 1 if mm % 2 else -1
            for i in range(1, N + 1):
                for j in range(1, N + 1):
                    c = m[i - 1][j - 1]
                    if not c:
                        continue
                    x, y = (i, l - 1 - mm), (j, mm)
                    out["genus_lowering"] += half * sign * c * _corr(p, g - 1, [x, y] + ins)
                    split = Fraction(0)
                    for size in range(n + 1):
                        for sub in combinations(range(n), size):
                            left = [ins[s] for s in sub]
                            right = [ins[s] for s in range(n) if s not in sub]
                            for g1 in range(g + 1):
                                u = _corr(p, g1, [x] + left)
                                if u:
                                    split += u * _corr(p, g - g1, [y] + right)
                    out["splitting"] += half * sign * c * split
    return out


def flow_derivative(p: Potential, r: LoopElement, idx: CorrelatorIndex) -> Fraction:
    """d/d eps of <d^{i_1}_{k_1} ...>_g under d tau/d eps = r-hat tau, at eps = 0."""
    return sum(flow_derivative_terms(p, r, idx).values(), Fraction(0))


def operator_derivatives(p: Potential, op: QuantizedOperator) -> list[TruncatedSeries]:
    """dF_g/d eps at eps = 0 via the tau-form: (O tau) * exp(-X)."""
    from .potential import potential_to_tau
    from .quantize import apply_operator

    tau = potential_to_tau(p)
    neg = Potential(p.window, [-F for F in p.F], p.unit)
    dX = apply_operator(op, tau) * potential_to_tau(neg)
    return [dX.grade_part(g - 1) for g in range(p.window.G + 1)]


def integrate_flow(p: Potential, r: LoopElement, order: int) -> Potential:
    """Taylor integration of d tau/d eps = r-hat tau to eps-order ``order`` at eps = 1."""
    require_symplectic(r)
    if r.kind not in ("upper", "zero"):
        raise InputError("integrate_flow needs an upper element")
    if order < 0:
        raise InputError("integrate_flow: order must be nonnegative")
    if order == 0 or r.kind == "zero":
        return p
    op = quantize_upper_explicit(r, p.unit, p.window.K)
    comps, _ = evolve(p, op, order=order)
    return p.replace(components=comps, dimension="nonpositive" if p.dimension in ("zero", "nonpositive") else None)


def flow_stabilization_order(p: Potential, r: LoopElement, limit: int = 64) -> int:
    """Smallest order after which integrate_flow no longer changes."""
    op = quantize_upper_explicit(r, p.unit, p.window.K)
    _, used = evolve(p, op, max_order=limit)
    return used
