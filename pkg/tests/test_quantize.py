import random
from fractions import Fraction as Fr

import pytest

from loopquant.errors import InputError
from loopquant.loopgrp import LoopElement, quadratic_hamiltonian
from loopquant.potential import potential_to_tau
from loopquant.quantize import (EXPLICIT_SIGN, all_monomials, apply_exp, apply_operator,
                                commutator_defect, quantize_element, quantize_upper_explicit,
                                weyl_quantize)
from loopquant.randgen import random_element
from loopquant.series import TruncatedSeries, Window, encode


def t(k, mu=1):
    return encode(mu, k)


def test_explicit_sign_fixed():
    """The literal r-hat equals EXPLICIT_SIGN times the Weyl quantization."""
    rng = random.Random(1)
    for _ in range(8):
        r = random_element(rng, "upper", l_max=3)
        unit = [1] * r.N
        explicit = quantize_upper_explicit(r, unit, 7)
        weyl = weyl_quantize(quadratic_hamiltonian(r, 7), unit, "upper")
        assert explicit == weyl.scale(EXPLICIT_SIGN)
    assert EXPLICIT_SIGN == -1


def test_inverse_z_hamiltonian():
    # A(z) = 1/z on a one-dimensional space
    h = quadratic_hamiltonian(LoopElement.lower(1, {1: [[1]]}), 4)
    assert not h.pp
    assert h.qq == {((1, 0), (1, 0)): Fr(-1, 2)}
    assert h.pq == {((1, m), (1, m + 1)): Fr(-1) for m in range(4)}


def test_inverse_z_operator():
    op = quantize_element(LoopElement.lower(1, {1: [[1]]}), [1], 4)
    assert op.tt == {(t(0), t(0)): Fr(-1, 2)}
    assert op.td == {(t(m + 1), t(m)): Fr(-1) for m in range(4)}
    assert op.d == {t(0): Fr(1)}
    assert not op.dd and not op.t and not op.const


def test_explicit_genus_term():
    # r_1 = c on N = 1 gives -c/2 * hbar d_0 d_0
    op = quantize_upper_explicit(LoopElement.upper(1, {1: [[3]]}), [1], 3)
    assert op.dd == {(t(0), t(0)): Fr(-3, 2)}


def test_all_monomials_counts():
    w = Window(N=1, K=2, D=2, G=0, L=2)
    # 1, t0, t1, t2, t0^2, t0t1, t0t2, t1^2
    assert len(all_monomials(w)) == 8


def test_apply_exp_inverse(kw_small):
    rng = random.Random(2)
    r = random_element(rng, "upper", N=1)
    op = quantize_upper_explicit(r, [1], kw_small.window.K)
    tau = potential_to_tau(kw_small)
    assert apply_exp(op, apply_exp(op, tau), "inverse") == tau


def test_apply_exp_rejects_mixed(kw_small):
    a = LoopElement.upper(1, {1: [[1]]}) + LoopElement.lower(1, {1: [[1]]})
    op = quantize_element(a, [1], 3)
    with pytest.raises(InputError):
        apply_exp(op, potential_to_tau(kw_small))


def test_graded_operator_needs_graded_series():
    w = Window(N=1, K=2, D=2, G=0, L=2)
    op = quantize_upper_explicit(LoopElement.upper(1, {1: [[1]]}), [1], 2)
    with pytest.raises(InputError):
        apply_operator(op, TruncatedSeries.constant(w, 1))


W = Window(N=1, K=3, D=3, G=1, L=3)


def test_cocycle_vanishes_on_same_kind():
    u1, u3 = LoopElement.upper(1, {1: [[1]]}), LoopElement.upper(1, {3: [[2]]})
    s1, s3 = LoopElement.lower(1, {1: [[1]]}), LoopElement.lower(1, {3: [[1]]})
    assert commutator_defect(u1, u3, W) == 0
    assert commutator_defect(s1, s3, W) == 0


def test_cocycle_antisymmetric_bilinear():
    u, s = LoopElement.upper(1, {1: [[1]]}), LoopElement.lower(1, {1: [[1]]})
    c = commutator_defect(u, s, W)
    assert c != 0
    assert commutator_defect(s, u, W) == -c
    assert commutator_defect(u.scale(3), s, W) == 3 * c
