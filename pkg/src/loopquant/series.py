"""Exact sparse truncated formal power series in the variables t^mu_k.

A monomial is stored as a sorted tuple of encoded variable ids
(``level << 6 | (mu - 1)``); a term key is ``(grade, monomial)`` where the
grade is the exponent of the genus parameter (always 0 for ungraded series).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping

from . import kernels
from .errors import InputError

MAX_N = 64


def encode(mu: int, k: int) -> int:
    return (k << 6) | (mu - 1)


def decode(v: int) -> tuple[int, int]:
    return (v & 63) + 1, v >> 6


def make_mono(indices: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    """Encode an iterable of (mu, k) pairs into a canonical monomial."""
    return tuple(sorted(encode(mu, k) for mu, k in indices))


def mono_indices(mono: tuple[int, ...]) -> list[tuple[int, int]]:
    return sorted(decode(v) for v in mono)


def levelsum(mono: tuple[int, ...]) -> int:
    return sum(v >> 6 for v in mono)


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


@dataclass(frozen=True)
class Window:
    """Truncation window.

    N directions, levels k <= K, total degree <= D, genus <= G and level-sum
    <= L.  ``L`` defaults to 3G - 3 + D, the largest level-sum a point-vertex
    term of degree <= D and genus <= G can have.
    """

    N: int
    K: int
    D: int
    G: int = 0
    L: int | None = None

    def __post_init__(self):
        if self.L is None:
            object.__setattr__(self, "L", max(0, 3 * self.G - 3 + self.D))
        if not 1 <= self.N <= MAX_N:
            raise InputError(f"window: N must be in 1..{MAX_N}, got {self.N}")
        for name in ("K", "D", "G", "L"):
            if getattr(self, name) < 0:
                raise InputError(f"window: {name} must be nonnegative")

    @property
    def weight_cap(self) -> int:
        """Cap on 2*grade + degree for genus-graded (tau-form) series."""
        return 2 * self.G - 2 + self.D

    def contains_mono(self, mono: tuple[int, ...]) -> bool:
        if len(mono) > self.D:
            return False
        s = 0
        for v in mono:
            k = v >> 6
            if k > self.K or (v & 63) >= self.N:
                return False
            s += k
        return s <= self.L

    def variables(self) -> list[tuple[int, int]]:
        return [(mu, k) for k in range(self.K + 1) for mu in range(1, self.N + 1)]

    def replace(self, **kw) -> "Window":
        d = dict(N=self.N, K=self.K, D=self.D, G=self.G, L=self.L)
        d.update(kw)
        return Window(**d)

    def to_json(self) -> dict:
        return {"N": self.N, "K": self.K, "D": self.D, "G": self.G, "L": self.L}

    @classmethod
    def from_json(cls, d: Mapping) -> "Window":
        try:
            return cls(int(d["N"]), int(d["K"]), int(d["D"]), int(d.get("G", 0)), d.get("L"))
        except KeyError as e:
            raise InputError(f"window: missing field {e}") from None


def _canonical_key(key):
    g, m = key
    idx = mono_indices(m)
    return (len(m), levelsum(m), idx, g)


class TruncatedSeries:
    """Immutable sparse series restricted to a window.

    Ungraded series hold grade 0 only.  Graded (tau-form) series may carry any
    grade subject to ``2*grade + degree <= window.weight_cap``.
    """

    __slots__ = ("window", "graded", "_terms")

    def __init__(self, window: Window, terms: Mapping | None = None, graded: bool = False, *, _trusted=False):
        self.window = window
        self.graded = graded
        if _trusted:
            self._terms = terms
            return
        clean = {}
        wcap = window.weight_cap
        for key, c in (terms or {}).items():
            if not isinstance(key, tuple) or len(key) != 2 or not isinstance(key[1], tuple):
                key = (0, tuple(key))
            g, m = key
            c = as_fraction(c)
            if not c:
                continue
            if not graded and g != 0:
                raise InputError("ungraded series cannot carry a genus grade")
            m = tuple(sorted(m))
            if not window.contains_mono(m):
                continue
            if graded and 2 * g + len(m) > wcap:
                continue
            clean[(g, m)] = clean.get((g, m), 0) + c
        self._terms = {k: v for k, v in clean.items() if v}

    # construction helpers
    @classmethod
    def zero(cls, window, graded=False):
        return cls(window, {}, graded, _trusted=True)

    @classmethod
    def constant(cls, window, c, graded=False):
        return cls(window, {(0, ()): c}, graded)

    @classmethod
    def variable(cls, window, mu, k, c=1, graded=False):
        return cls(window, {(0, (encode(mu, k),)): c}, graded)

    @classmethod
    def from_indices(cls, window, items: Mapping, graded=False):
        """Build from {((mu,k),...) or (grade, ((mu,k),...)): coeff}."""
        terms = {}
        for key, c in items.items():
            if graded:
                g, idx = key
            else:
                g, idx = 0, key
            terms[(g, make_mono(idx))] = c
        return cls(window, terms, graded)

    # basic protocol
    @property
    def terms(self) -> Mapping:
        return MappingProxyType(self._terms)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coeff(self, mono, grade: int = 0) -> Fraction:
        if mono and not isinstance(mono[0], int):
            mono = make_mono(mono)
        return self._terms.get((grade, tuple(sorted(mono))), Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.window == other.window and self.graded == other.graded and self._terms == other._terms

    def __hash__(self):
        return hash((self.window, self.graded, frozenset(self._terms.items())))

    def __repr__(self):
        return f"TruncatedSeries({self.to_string()})"

    def _check(self, other):
        if not isinstance(other, TruncatedSeries):
            raise InputError("series arithmetic needs two series")
        if other.window != self.window:
            raise InputError(f"window mismatch: {self.window} vs {other.window}")
        if other.graded != self.graded:
            raise InputError("cannot combine graded and ungraded series")

    def _new(self, terms):
        return TruncatedSeries(self.window, terms, self.graded, _trusted=True)

    # arithmetic
    def __add__(self, other):
        self._check(other)
        return self._new(kernels.add_into(dict(self._terms), other._terms, 1))

    def __sub__(self, other):
        self._check(other)
        return self._new(kernels.add_into(dict(self._terms), other._terms, -1))

    def __neg__(self):
        return self._new({k: -v for k, v in self._terms.items()})

    def scale(self, c) -> "TruncatedSeries":
        c = as_fraction(c)
        if not c:
            return self.zero(self.window, self.graded)
        return self._new({k: c * v for k, v in self._terms.items()})

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        self._check(other)
        w = self.window
        wcap = w.weight_cap if self.graded else kernels.NO_CAP
        return self._new(kernels.mul_terms(self._terms, other._terms, w.D, w.L, wcap))

    __rmul__ = scale

    def derive(self, mu: int, k: int) -> "TruncatedSeries":
        if not (1 <= mu <= self.window.N and 0 <= k <= self.window.K):
            raise InputError(f"derivative variable ({mu},{k}) outside window")
        return self._new(kernels.derive_terms(self._terms, encode(mu, k)))

    def mul_var(self, mu: int, k: int, c=1) -> "TruncatedSeries":
        """Multiply by c * t^mu_k with truncation."""
        return self * TruncatedSeries.variable(self.window, mu, k, c, self.graded)

    def grade_part(self, grade: int) -> "TruncatedSeries":
        """Coefficient of hbar**grade as an ungraded series."""
        return TruncatedSeries(self.window, {(0, m): c for (g, m), c in self._terms.items() if g == grade}, False, _trusted=True)

    def with_grade(self, grade: int) -> "TruncatedSeries":
        """Embed an ungraded series as hbar**grade times itself in tau-form."""
        return TruncatedSeries(self.window, {(grade, m): c for (_, m), c in self._terms.items()}, True)

    def restrict(self, window: Window) -> "TruncatedSeries":
        """Re-truncate into a (usually smaller) window."""
        return TruncatedSeries(window, self._terms, self.graded)

    def map_terms(self, pred) -> "TruncatedSeries":
        return self._new({k: v for k, v in self._terms.items() if pred(*k)})

    # exp / log
    def _check_nilpotent(self, what):
        for (g, m), _ in self._terms.items():
            deg = len(m)
            if self.graded:
                w = 2 * g + deg
                if w < 0 or w + deg < 1:
                    raise InputError(f"{what}: term hbar^{g} {_fmt_mono(m)} is not in the nilpotent part")
            elif deg == 0:
                raise InputError(f"{what}: nonzero constant term")

    def exp(self) -> "TruncatedSeries":
        self._check_nilpotent("exp")
        one = self.constant(self.window, 1, self.graded)
        result, power, n = one, one, 0
        while True:
            n += 1
            power = (power * self).scale(Fraction(1, n))
            if power.is_zero():
                return result
            result = result + power

    def log(self) -> "TruncatedSeries":
        c0 = self._terms.get((0, ()), 0)
        if c0 != 1:
            raise InputError(f"log: constant term must be 1, got {c0}")
        u = self - self.constant(self.window, 1, self.graded)
        u._check_nilpotent("log")
        result, power, n = self.zero(self.window, self.graded), None, 0
        while True:
            n += 1
            power = u if power is None else power * u
            if power.is_zero():
                return result
            result = result + power.scale(Fraction((-1) ** (n + 1), n))

    # serialization
    def sorted_items(self):
        return sorted(self._terms.items(), key=lambda kv: _canonical_key(kv[0]))

    def to_json(self) -> dict:
        out = []
        for (g, m), c in self.sorted_items():
            t = {"mono": [list(p) for p in mono_indices(m)], "coeff": str(c)}
            if self.graded:
                t["grade"] = g
            out.append(t)
        d = {"window": self.window.to_json(), "terms": out}
        if self.graded:
            d["graded"] = True
        return d

    @classmethod
    def from_json(cls, d: Mapping, window: Window | None = None) -> "TruncatedSeries":
        w = window or Window.from_json(d["window"])
        graded = bool(d.get("graded", False))
        terms = {}
        for t in d.get("terms", []):
            idx = [tuple(p) for p in t["mono"]]
            for mu, k in idx:
                if not (1 <= mu <= w.N and 0 <= k <= w.K):
                    raise InputError(f"series: variable ({mu},{k}) outside window")
            key = (int(t.get("grade", 0)), make_mono(idx))
            terms[key] = terms.get(key, 0) + as_fraction(t["coeff"])
        return cls(w, terms, graded)

    def to_string(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (g, m), c in self.sorted_items():
            s = str(c)
            if self.graded and g:
                s += f"*h^{g}"
            if m:
                s += "*" + _fmt_mono(m)
            parts.append(s)
        return " + ".join(parts)


def _fmt_mono(m):
    return "*".join(f"t{mu}_{k}" for mu, k in mono_indices(m)) or "1"
