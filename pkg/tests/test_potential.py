from fractions import Fraction as Fr

import pytest

from loopquant.errors import InputError
from loopquant.potential import (Potential, correlator, dilaton_shift, potential_to_tau,
                                 tau_to_potential)
from loopquant.series import TruncatedSeries, Window, make_mono


def test_dilaton_roundtrip(kw_two):
    q = dilaton_shift(kw_two, "t_to_q")
    assert q.coords == "q"
    assert dilaton_shift(q, "q_to_t") == kw_two


def test_dilaton_wrong_direction(kw_small):
    with pytest.raises(InputError):
        dilaton_shift(kw_small, "q_to_t")
    with pytest.raises(InputError):
        dilaton_shift(kw_small, "sideways")


def test_dilaton_shift_linear_term():
    w = Window(N=1, K=2, D=2, G=0, L=2)
    F = TruncatedSeries.from_indices(w, {((1, 1), (1, 1)): 1})
    q = dilaton_shift(Potential(w, [F]), "t_to_q")
    # (q + 1)^2 = q^2 + 2q + 1
    assert q.F[0].coeff(make_mono([(1, 1)])) == 2
    assert q.F[0].coeff(()) == 1


def test_tau_roundtrip(kw_small):
    back = tau_to_potential(potential_to_tau(kw_small), kw_small.unit, kw_small.dimension)
    assert back == kw_small


def test_correlator_multiplicity(kw_small):
    # F_0 holds t0^3/6, so the third derivative is 1
    assert kw_small.F[0].coeff(make_mono([(1, 0)] * 3)) == Fr(1, 6)
    assert correlator(kw_small, (0, ((1, 0),) * 3)) == 1


def test_correlator_out_of_window(kw_small):
    with pytest.raises(InputError):
        correlator(kw_small, (2, ((1, 1),)))
    with pytest.raises(InputError):
        correlator(kw_small, (0, ((1, 9),)))


def test_json_roundtrip_with_exact(kw_small):
    p = kw_small.replace(exact={"psi": 4})
    assert Potential.from_json(p.to_json()) == p
    assert p != kw_small


@pytest.mark.parametrize("bad", [{"psi": 1.5}, {"foo": 1}, {"psi": 1, "levelsum": 2}, {"psi": True}])
def test_exact_validation(kw_small, bad):
    with pytest.raises(InputError):
        kw_small.replace(exact=bad)


def test_invariants(kw_small):
    assert kw_small.invariant_violations() == []
    w = kw_small.window
    bad = kw_small.replace(components=[TruncatedSeries.from_indices(w, {((1, 0),): 1}), kw_small.F[1]])
    assert bad.invariant_violations()


def test_component_count_checked(kw_small):
    with pytest.raises(InputError):
        Potential(kw_small.window, kw_small.F[:1])
