import random
from fractions import Fraction as Fr

import pytest

from loopquant.errors import InputError
from loopquant.flow import (act, flow_derivative, flow_derivative_terms, flow_stabilization_order,
                            integrate_flow, psi, upper_psi_bound)
from loopquant.loopgrp import LoopElement
from loopquant.potential import Potential, correlator, potential_to_tau, tau_to_potential
from loopquant.quantize import apply_exp, quantize_upper_explicit
from loopquant.randgen import random_element
from loopquant.series import TruncatedSeries, Window, make_mono
from loopquant.vertex import product_vertex


def test_zero_element_is_identity(kw_small):
    zero = LoopElement(1, {})
    assert integrate_flow(kw_small, zero, 5).F == kw_small.F
    assert flow_derivative(kw_small, zero, (1, ((1, 1),))) == 0


def test_order_zero_keeps_potential(kw_small):
    r = LoopElement.upper(1, {1: [[1]]})
    assert integrate_flow(kw_small, r, 0).F == kw_small.F


def test_genus_lowering_term_structure():
    """For N = 1, r_1 = c and idx (1, [level 1]) the genus-lowering part is
    -c/2 times the genus-0 correlator with two extra level-0 insertions."""
    w = Window(N=1, K=3, D=4, G=1, L=3)
    F0 = TruncatedSeries.from_indices(w, {((1, 0), (1, 0), (1, 1)): Fr(5, 2), ((1, 0),) * 3: Fr(1, 6)})
    F1 = TruncatedSeries.from_indices(w, {((1, 1),): Fr(1, 24)})
    p = Potential(w, [F0, F1])
    c = Fr(7, 3)
    parts = flow_derivative_terms(p, LoopElement.upper(1, {1: [[c]]}), (1, ((1, 1),)))
    want = -c / 2 * correlator(p, (0, ((1, 0), (1, 0), (1, 1))))
    assert want != 0 and parts["genus_lowering"] == want


def test_flow_matches_operator_at_eps_zero():
    from loopquant.acceptance import flow_equivalence
    r = LoopElement.upper(2, {1: [[1, 2], [2, -1]], 2: [[0, 3], [-3, 0]]})
    checked, nonzero, bad = flow_equivalence(r, Window(N=2, K=5, D=6, G=1, L=6))
    assert checked > 100 and nonzero > 10 and not bad


def test_integrated_flow_matches_exponential():
    # the big window makes the small-window coefficients exact
    big, small = Window(N=1, G=1, D=10, K=6, L=6), Window(N=1, G=1, D=3, K=3, L=3)
    p = product_vertex(big)
    r = LoopElement.upper(1, {1: [[-2]]})
    A = integrate_flow(p, r, 20)
    B = tau_to_potential(apply_exp(quantize_upper_explicit(r, p.unit, big.K), potential_to_tau(p)), p.unit)
    assert A.restrict(small).F == B.restrict(small).F


def test_integrated_flow_matches_act():
    big, small = Window(N=2, G=1, D=8, K=6, L=6), Window(N=2, G=1, D=3, K=2, L=2)
    p = product_vertex(big)
    r = LoopElement.upper(2, {1: [[1, 2], [2, -3]], 2: [[0, 1], [-1, 0]]})
    A = integrate_flow(p, r, flow_stabilization_order(p, r) + 2)
    C, _ = act(p, r.scale(-1))
    assert A.restrict(small).F == C.restrict(small).F


@pytest.mark.parametrize("w", [Window(N=1, G=1, D=6, K=6, L=6), Window(N=2, G=1, D=8, K=6, L=6)])
def test_stabilization_bound(w):
    rng = random.Random(5)
    p = product_vertex(w)
    for _ in range(3):
        r = random_element(rng, "upper", N=w.N)
        assert flow_stabilization_order(p, r) <= w.L + w.D // 2


def test_stabilization_exceeds_naive_bound():
    # hbar d_0 d_0 chains make the flow run past L + 1 Taylor orders
    w = Window(N=2, G=1, D=8, K=6, L=6)
    p = product_vertex(w)
    orders = [flow_stabilization_order(p, random_element(random.Random(s), "upper", N=2)) for s in range(4)]
    assert max(orders) > w.L + 1


# ------------------------------------------------------------------ act

def test_act_exact_region_and_filter(kw_two):
    r = LoopElement.upper(2, {1: [[1, 0], [0, 2]]})
    out, info = act(kw_two, r)
    bound = upper_psi_bound(kw_two.window)
    assert info["exact"] == {"psi": bound} == out.exact
    for g, F in enumerate(out.F):
        assert all(psi(g, m) <= bound for (_, m) in F.terms)


def test_act_roundtrip_bytes(kw_two):
    import json
    r = LoopElement.upper(2, {1: [[1, 1], [1, 0]], 2: [[0, 1], [-1, 0]]})
    a, _ = act(kw_two, r)
    b, _ = act(a, r, inverse=True)
    c, _ = act(b, r)
    assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(c.to_json(), sort_keys=True)
    # the inverse returns the input restricted to the exact region
    bound = a.exact["psi"]
    for g, F in enumerate(b.F):
        want = {k: v for k, v in kw_two.F[g].terms.items() if psi(g, k[1]) <= bound}
        assert dict(F.terms) == want


def test_lower_action_levelsum_region(kw_two):
    s = LoopElement.lower(2, {1: [[1, 0], [0, 1]]})
    out, info = act(kw_two, s)
    assert "levelsum" in info["exact"]
    assert out.dimension in ("nonnegative",)


def test_act_rejects_mixed(kw_two):
    a = LoopElement.upper(2, {1: [[1, 0], [0, 1]]}) + LoopElement.lower(2, {1: [[1, 0], [0, 1]]})
    with pytest.raises(InputError, match="mixed"):
        act(kw_two, a)


def test_act_rejects_mixed_pipeline(kw_two):
    up, _ = act(kw_two, LoopElement.upper(2, {1: [[1, 0], [0, 1]]}))
    with pytest.raises(InputError):
        act(up, LoopElement.lower(2, {1: [[1, 0], [0, 1]]}))


def test_act_rejects_wrong_dimension_tag(kw_two):
    p = kw_two.replace(dimension="nonnegative")
    with pytest.raises(InputError, match="nonpositive"):
        act(p, LoopElement.upper(2, {1: [[1, 0], [0, 1]]}))


def test_act_rejects_nonsymplectic(kw_two):
    with pytest.raises(InputError, match="symplectic"):
        act(kw_two, LoopElement.upper(2, {2: [[1, 0], [0, 1]]}))


def test_act_rejects_wrong_N(kw_small):
    with pytest.raises(InputError):
        act(kw_small, LoopElement.upper(2, {1: [[1, 0], [0, 1]]}))
