"""Seeded random loop-algebra elements for property checks."""

from __future__ import annotations

import random
from fractions import Fraction

from .loopgrp import LoopElement


def rational(rng: random.Random, bound: int = 7) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def random_element(rng: random.Random, kind: str, N: int | None = None, l_max: int = 2, bound: int = 7) -> LoopElement:
    """Random infinitesimally symplectic element with entries p/q, |p|, q <= bound.

    Upper coefficient A_l (z^l) must satisfy A_l^T = (-1)^(l+1) A_l; lower
    coefficient of z^-l the same rule with exponent -l.
    """
    if N is None:
        N = rng.randint(1, 2)
    while True:
        top = rng.randint(1, l_max)
        mats = {}
        for l in range(1, top + 1):
            symmetric = l % 2 == 1
            m = [[Fraction(0)] * N for _ in range(N)]
            for i in range(N):
                for j in range(i, N):
                    x = rational(rng, bound)
                    if symmetric:
                        m[i][j] = m[j][i] = x
                    elif i != j:
                        m[i][j], m[j][i] = x, -x
            mats[l] = m
        el = LoopElement.upper(N, mats) if kind == "upper" else LoopElement.lower(N, mats)
        if el.kind != "zero":
            return el
