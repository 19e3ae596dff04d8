"""Genus-graded potentials, correlators, dilaton shift and tau-form."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Sequence

from .errors import InputError
from .series import TruncatedSeries, Window, as_fraction, decode, encode, make_mono

# dimension tags: the sign of sum(k_a - 1) - 3(g - 1) over every term
DIMENSION_TAGS = ("zero", "nonpositive", "nonnegative")


@dataclass(frozen=True)
class CorrelatorIndex:
    genus: int
    insertions: tuple  # ((mu, k), ...)

    def __post_init__(self):
        object.__setattr__(self, "insertions", tuple(tuple(x) for x in self.insertions))


class Potential:
    """F_0..F_G on a common window, in unshifted t-coordinates.

    ``unit`` holds the coordinates of the distinguished vector in the
    orthonormal basis; ``dimension`` records which side of the dimension
    grading the terms lie on (None if unknown), which decides whether loop
    group actions can be applied exactly.
    """

    def __init__(self, window: Window, components: Sequence[TruncatedSeries], unit=None, dimension=None, coords="t", exact=None):
        if len(components) != window.G + 1:
            raise InputError(f"potential: expected {window.G + 1} components, got {len(components)}")
        for F in components:
            if F.window != window or F.graded:
                raise InputError("potential: components must be ungraded series on the potential's window")
        unit = [as_fraction(u) for u in (unit if unit is not None else [1] * window.N)]
        if len(unit) != window.N:
            raise InputError("potential: unit vector has wrong length")
        if dimension is not None and dimension not in DIMENSION_TAGS:
            raise InputError(f"potential: unknown dimension tag {dimension!r}")
        self.window = window
        self.F = tuple(components)
        self.unit = tuple(unit)
        self.dimension = dimension
        self.coords = coords
        self.exact = _check_exact(exact)

    def __eq__(self, other):
        if not isinstance(other, Potential):
            return NotImplemented
        return (self.window, self.F, self.unit, self.coords, self.exact) == (
            other.window, other.F, other.unit, other.coords, other.exact)

    def __repr__(self):
        return f"Potential(window={self.window}, terms={[len(f) for f in self.F]})"

    def invariant_violations(self) -> list[str]:
        """Violations of 'F_0 starts cubic, F_g (g >= 1) has no constant'."""
        out = []
        for (g, m), c in self.F[0].sorted_items():
            if len(m) <= 2:
                out.append(f"F_0 has a degree-{len(m)} term {c}*{_mono_str(m)}")
                break
        for g, F in enumerate(self.F[1:], start=1):
            if F.coeff(()):
                out.append(f"F_{g} has constant term {F.coeff(())}")
        return out

    def replace(self, **kw) -> "Potential":
        d = dict(window=self.window, components=self.F, unit=self.unit, dimension=self.dimension,
                 coords=self.coords, exact=self.exact)
        d.update(kw)
        return Potential(**d)

    def restrict(self, window: Window) -> "Potential":
        if window.G > self.window.G:
            raise InputError("restrict: cannot raise the genus bound")
        comps = [F.restrict(window) for F in self.F[: window.G + 1]]
        return Potential(window, comps, self.unit[: window.N], self.dimension, self.coords, self.exact)

    def to_json(self) -> dict:
        d = {
            "window": self.window.to_json(),
            "unit": [str(u) for u in self.unit],
            "F": [{"terms": F.to_json()["terms"]} for F in self.F],
        }
        if self.dimension:
            d["dimension"] = self.dimension
        if self.coords != "t":
            d["coords"] = self.coords
        if self.exact:
            d["exact"] = dict(self.exact)
        return d

    @classmethod
    def from_json(cls, d) -> "Potential":
        try:
            w = Window.from_json(d["window"])
            comps = [TruncatedSeries.from_json(f, window=w) for f in d["F"]]
            return cls(w, comps, d.get("unit"), d.get("dimension"), d.get("coords", "t"), d.get("exact"))
        except (KeyError, TypeError) as e:
            raise InputError(f"potential: malformed JSON ({e})") from None


EXACT_KEYS = ("psi", "levelsum")


def _check_exact(exact):
    """Exactness region beyond the window box: {"psi": n} or {"levelsum": n}.

    psi = 2*degree - levelsum + 4*genus; terms outside the region are absent
    and coefficients inside it are exact.
    """
    if not exact:
        return None
    if not isinstance(exact, dict) or len(exact) != 1 or next(iter(exact)) not in EXACT_KEYS:
        raise InputError(f"potential: malformed exact region {exact!r}")
    (k, v), = exact.items()
    if isinstance(v, bool) or not isinstance(v, int):
        raise InputError(f"potential: exact region bound must be an integer, got {v!r}")
    return {k: v}


def _mono_str(m):
    return "*".join(f"t{mu}_{k}" for mu, k in sorted(decode(v) for v in m)) or "1"


def _mult_factor(mono) -> int:
    out, counts = 1, {}
    for v in mono:
        counts[v] = counts.get(v, 0) + 1
    for c in counts.values():
        out *= factorial(c)
    return out


def check_index(window: Window, idx: CorrelatorIndex):
    if not 0 <= idx.genus <= window.G:
        raise InputError(f"correlator: genus {idx.genus} outside 0..{window.G}")
    n = len(idx.insertions)
    if n > window.D:
        raise InputError(f"correlator: {n} insertions exceed degree cap D={window.D}")
    s = 0
    for mu, k in idx.insertions:
        if not (1 <= mu <= window.N and 0 <= k <= window.K):
            raise InputError(f"correlator: insertion ({mu},{k}) outside window")
        s += k
    if s > window.L:
        raise InputError(f"correlator: level-sum {s} exceeds L={window.L}")


def correlator(p: Potential, idx: CorrelatorIndex) -> Fraction:
    """d^n F_g / dt^{mu_1}_{k_1} ... dt^{mu_n}_{k_n} at t = 0."""
    if not isinstance(idx, CorrelatorIndex):
        idx = CorrelatorIndex(*idx)
    check_index(p.window, idx)
    mono = make_mono(idx.insertions)
    return p.F[idx.genus].coeff(mono) * _mult_factor(mono)


def substitute_shift(F: TruncatedSeries, shifts: dict) -> TruncatedSeries:
    """Substitute t_v -> t_v + shifts[v] (polynomial re-expansion in-window)."""
    out = {}
    for (g, m), c in F.terms.items():
        partial = {(): c}
        counts = {}
        for v in m:
            counts[v] = counts.get(v, 0) + 1
        for v, e in counts.items():
            a = shifts.get(v, 0)
            nxt = {}
            for base, cb in partial.items():
                if not a:
                    key = tuple(sorted(base + (v,) * e))
                    nxt[key] = nxt.get(key, 0) + cb
                    continue
                for j in range(e + 1):  # keep j copies of t_v
                    key = tuple(sorted(base + (v,) * j))
                    nxt[key] = nxt.get(key, 0) + cb * comb(e, j) * a ** (e - j)
            partial = nxt
        for key, cv in partial.items():
            out[(g, key)] = out.get((g, key), 0) + cv
    return TruncatedSeries(F.window, out, F.graded)


def dilaton_shift(p: Potential, direction: str) -> Potential:
    """Re-express the potential in q = t - z*unit (``t_to_q``) or back (``q_to_t``)."""
    if direction not in ("t_to_q", "q_to_t"):
        raise InputError(f"dilaton_shift: unknown direction {direction!r}")
    want_from = "t" if direction == "t_to_q" else "q"
    if p.coords != want_from:
        raise InputError(f"dilaton_shift: potential is in {p.coords}-coordinates")
    sign = 1 if direction == "t_to_q" else -1
    if p.window.K < 1:
        return p.replace(coords="q" if sign > 0 else "t")
    # t_1 = q_1 + unit, i.e. substitute t_1 -> q_1 + unit
    shifts = {encode(mu, 1): sign * u for mu, u in enumerate(p.unit, start=1) if u}
    comps = [substitute_shift(F, shifts) for F in p.F]
    return p.replace(components=comps, coords="q" if sign > 0 else "t")


def shift_point(p: Potential) -> dict:
    """q-coordinates of t = 0: q^mu_1 = -unit_mu, everything else 0."""
    return {(mu, 1): -u for mu, u in enumerate(p.unit, start=1) if u}


def potential_to_tau(p: Potential) -> TruncatedSeries:
    """tau = exp(sum_g hbar^{g-1} F_g) as a genus-graded series."""
    X = TruncatedSeries.zero(p.window, graded=True)
    for g, F in enumerate(p.F):
        X = X + F.with_grade(g - 1)
    return X.exp()


def tau_to_potential(tau: TruncatedSeries, unit=None, dimension=None) -> Potential:
    if not tau.graded:
        raise InputError("tau_to_potential: tau must be a graded series")
    X = tau.log()
    comps = [X.grade_part(g - 1) for g in range(tau.window.G + 1)]
    return Potential(tau.window, comps, unit, dimension)
