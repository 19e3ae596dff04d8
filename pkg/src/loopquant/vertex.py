"""Psi-class intersection numbers and the product vertex potential.

Intersection numbers <tau_{k_1} ... tau_{k_n}>_g come from the loop-equation
recursion L_m tau = 0 written on correlators, always peeling off the
insertion with the largest level.  The two central terms of L_{-1}
and L_0 provide the seeds <tau_0^3>_0 = 1 and <tau_1>_1 = 1/24.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import factorial

from .errors import InputError
from .potential import Potential
from .series import TruncatedSeries, Window, encode

_lock = threading.Lock()


def double_factorial(n: int) -> int:
    """(2j-1)!! style double factorial, with (-1)!! = 1."""
    r = 1
    while n > 1:
        r *= n
        n -= 2
    return r


def _stable(g, n):
    return g >= 0 and n >= 0 and 2 * g - 2 + n > 0


@lru_cache(maxsize=None)
def _wk(g: int, ks: tuple) -> Fraction:
    n = len(ks)
    if g < 0 or not _stable(g, n) or sum(ks) != 3 * g - 3 + n:
        return Fraction(0)
    if g == 0 and ks == (0, 0, 0):
        # central term t_0^2/2 of L_{-1}
        return Fraction(1)
    top = ks[-1]
    rest = ks[:-1]
    m = top - 1  # index of the constraint L_m acting through tau_{m+1}
    total = Fraction(0)
    if m == 0 and g == 1 and not rest:
        total += Fraction(1, 8)  # central term 1/16 of L_0, times 2
    for j, kj in enumerate(rest):
        if kj + m < 0:
            continue
        other = rest[:j] + rest[j + 1:]
        coef = Fraction(double_factorial(2 * kj + 2 * m + 1), double_factorial(2 * kj - 1))
        total += coef * _wk(g, tuple(sorted(other + (kj + m,))))
    half = Fraction(1, 2)
    for r in range(0, m):
        s = m - 1 - r
        coef = half * double_factorial(2 * r + 1) * double_factorial(2 * s + 1)
        acc = _wk(g - 1, tuple(sorted(rest + (r, s))))
        idx = range(len(rest))
        for size in range(len(rest) + 1):
            for subset in combinations(idx, size):
                inside = tuple(rest[i] for i in subset)
                outside = tuple(rest[i] for i in idx if i not in subset)
                for g1 in range(g + 1):
                    a = _wk(g1, tuple(sorted(inside + (r,))))
                    if a:
                        acc += a * _wk(g - g1, tuple(sorted(outside + (s,))))
        total += coef * acc
    return total / double_factorial(2 * m + 3)


def intersection_number(g: int, levels) -> Fraction:
    """<tau_{k_1} ... tau_{k_n}>_g as an exact rational."""
    levels = tuple(sorted(int(k) for k in levels))
    if g < 0 or any(k < 0 for k in levels):
        raise InputError("intersection_number: genus and levels must be nonnegative")
    if not levels or not _stable(g, len(levels)):
        raise InputError(f"intersection_number: unstable (g={g}, n={len(levels)})")
    with _lock:
        return _wk(g, levels)


def level_multisets(total: int, n: int, kmax: int, lo: int = 0):
    """Nondecreasing n-tuples with entries in [lo, kmax] summing to total."""
    if n == 0:
        if total == 0:
            yield ()
        return
    for k in range(lo, min(kmax, total // n) + 1):
        for tail in level_multisets(total - k, n - 1, kmax, k):
            yield (k,) + tail


def _symmetry_factor(levels) -> int:
    out = 1
    prev, run = None, 0
    for k in levels:
        if k == prev:
            run += 1
        else:
            out *= factorial(run)
            prev, run = k, 1
    return out * factorial(run)


def _point_terms(window: Window, g: int, mu: int) -> dict:
    terms = {}
    for n in range(1, window.D + 1):
        s = 3 * g - 3 + n
        if s < 0 or s > window.L or not _stable(g, n):
            continue
        for ks in level_multisets(s, n, window.K):
            val = intersection_number(g, ks)
            if val:
                mono = tuple(sorted(encode(mu, k) for k in ks))
                terms[(0, mono)] = val / _symmetry_factor(ks)
    return terms


def point_potential(window: Window) -> Potential:
    """Psi-class point potential F_0..F_G on an N = 1 window."""
    if window.N != 1:
        raise InputError("point_potential needs N = 1; use product_vertex for N > 1")
    return product_vertex(window)


def product_vertex(window: Window) -> Potential:
    """Potential of prod_mu tau^pt(t^mu): F_g = sum_mu F_g^pt(t^mu)."""
    comps = []
    for g in range(window.G + 1):
        terms = {}
        for mu in range(1, window.N + 1):
            terms.update(_point_terms(window, g, mu))
        comps.append(TruncatedSeries(window, terms, _trusted=True))
    return Potential(window, comps, unit=[1] * window.N, dimension="zero")


def intersection_table(G: int, max_n: int):
    """Rows (g, levels, value) of nonzero numbers with n <= max_n."""
    rows = []
    for g in range(G + 1):
        for n in range(1, max_n + 1):
            if not _stable(g, n):
                continue
            s = 3 * g - 3 + n
            if s < 0:
                continue
            for ks in level_multisets(s, n, s):
                v = intersection_number(g, ks)
                if v:
                    rows.append((g, ks, v))
    return rows
