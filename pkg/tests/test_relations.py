import json
import random
from fractions import Fraction as Fr
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from loopquant.errors import InputError
from loopquant.loopgrp import LoopElement
from loopquant.potential import Potential
from loopquant.relations import (BUILTINS, Relation, RelationSyntaxError, builtin, builtin_text,
                                 check_invariance, evaluate_relation, parse_relation,
                                 parse_relations, serialize)
from loopquant.series import TruncatedSeries, Window
from loopquant.vertex import product_vertex

FIXTURES = Path(__file__).parent / "fixtures" / "relations"
GOOD = sorted(FIXTURES.glob("good_*.rel"))
BAD = sorted(FIXTURES.glob("bad_*.rel"))


def test_corpus_size():
    assert len(GOOD) + len(BAD) >= 10


@pytest.mark.parametrize("path", GOOD, ids=lambda p: p.stem)
def test_good_fixture_roundtrip(path):
    rels = parse_relations(path.read_text())
    assert rels
    for rel in rels:
        text = serialize(rel)
        again = parse_relation(text)
        assert again == rel
        assert serialize(again) == text
        assert Relation.from_json(json.loads(json.dumps(rel.to_json()))) == rel


@pytest.mark.parametrize("path", BAD, ids=lambda p: p.stem)
def test_bad_fixture_error(path):
    text = path.read_text()
    expect = text.splitlines()[0].split("expect:", 1)[1].strip()
    with pytest.raises(RelationSyntaxError) as info:
        parse_relations(text)
    err = info.value
    assert err.line is not None and err.column is not None
    assert expect in str(err)


@pytest.mark.parametrize("text,line,col", [
    ("relation X genus 0;\nterm 1 corr(0; ?);\n", 2, 16),
    ("relation X genus 0;\nterm 1 corr(0; a);\n", 2, 16),
    ("relation X genus;\n", 1, 17),
])
def test_error_positions(text, line, col):
    with pytest.raises(RelationSyntaxError) as info:
        parse_relations(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_syntax_error_is_input_error():
    assert issubclass(RelationSyntaxError, InputError)


@pytest.mark.parametrize("name", BUILTINS)
def test_builtins_parse_and_roundtrip(name):
    rel = builtin(name)
    assert rel.name == name
    assert parse_relation(serialize(rel)) == rel


def test_unknown_builtin():
    with pytest.raises(InputError):
        builtin_text("NOPE")


# ------------------------------------------------------------------ evaluation

def cubic_potential(N=1):
    """F_0 = 1/6 sum t0^3, the trivial genus-zero potential."""
    w = Window(N=N, K=4, D=5, G=0, L=4)
    F0 = TruncatedSeries.from_indices(w, {((mu, 0),) * 3: Fr(1, 6) for mu in range(1, N + 1)})
    return Potential(w, [F0], dimension="zero")


def _residual(rep):
    out = {}
    for v in rep.violations:
        for t in v["residual_terms"]:
            out[tuple(tuple(x) for x in t["mono"])] = Fr(t["coeff"])
    return out


def test_string_on_bare_cubic_only_misses_descendants():
    # without descendant terms only the t_{n+1} d_n F part survives
    rep = evaluate_relation(builtin("SE"), cubic_potential(2))
    res = _residual(rep)
    assert res and all(any(k >= 1 for _, k in m) for m in res)
    assert res[((1, 0), (1, 0), (1, 1))] == Fr(-1, 2)


def test_dilaton_on_bare_cubic_leaves_minus_f0():
    rep = evaluate_relation(builtin("DE"), cubic_potential(2))
    assert _residual(rep) == {((mu, 0),) * 3: Fr(-1, 6) for mu in (1, 2)}


def test_trr_on_bare_cubic_fails():
    assert not evaluate_relation(builtin("TRR"), cubic_potential(1)).ok


@pytest.mark.parametrize("name", BUILTINS)
def test_builtins_on_vertex(name, kw_two):
    rep = evaluate_relation(builtin(name), kw_two)
    assert rep.ok, rep.violations[:1]


def test_trr_detects_perturbation(kw_two):
    w = kw_two.window
    bump = TruncatedSeries.from_indices(w, {((1, 1), (1, 1), (1, 0), (1, 0)): Fr(1, 5)})
    bad = kw_two.replace(components=[kw_two.F[0] + bump, kw_two.F[1]])
    rep = evaluate_relation(builtin("TRR"), bad)
    assert not rep.ok
    assert rep.violations[0]["residual_terms"]


def test_insufficient_window():
    w = Window(N=1, K=0, D=2, G=0, L=0)
    p = Potential(w, [TruncatedSeries.zero(w)])
    with pytest.raises(InputError, match="insufficient window"):
        evaluate_relation(builtin("TRR"), p)


def test_genus_too_high(kw_two):
    p = kw_two.restrict(kw_two.window.replace(G=0))
    with pytest.raises(InputError, match="G >= 1"):
        evaluate_relation(builtin("TRR1"), p)


def test_trr_symmetric_in_b_c():
    text = builtin_text("TRR").replace("free a:k b:l c:m;", "free a:k c:m b:l;")
    rel = parse_relation(text)
    p = product_vertex(Window(N=2, K=4, D=5, G=0, L=4))
    assert evaluate_relation(rel, p).ok
    assert evaluate_relation(rel, p).asserted_coefficients == evaluate_relation(builtin("TRR"), p).asserted_coefficients


def test_check_invariance_empty():
    res = check_invariance([], [], Window(N=1, K=3, D=4, G=0, L=3))
    assert res["ok"] and res["reports"] == [] and res["orders"] == []


def test_check_invariance_upper_and_lower():
    w = Window(N=2, K=5, D=6, G=1, L=6)
    up = check_invariance([builtin("TRR"), builtin("TRR1")], [LoopElement.upper(2, {1: [[1, 0], [0, 2]]})], w)
    assert up["ok"] and "psi" in up["exact"]
    low = check_invariance([builtin("TRR")], [LoopElement.lower(2, {1: [[1, 1], [1, 0]]})], w)
    assert low["ok"] and "levelsum" in low["exact"]


# ------------------------------------------------------------------ fuzz

@given(st.text(alphabet="relationgusfemcorvay0123456789:;,()*+-/ \n#abuvx", max_size=120))
@settings(max_examples=300, deadline=None)
def test_parser_total(text):
    try:
        parse_relations(text)
    except RelationSyntaxError as e:
        assert e.line is not None and e.column is not None


def test_mutation_fuzz_no_crashes():
    from loopquant.acceptance import fuzz_parser
    acc, rej, crashes, unpositioned = fuzz_parser(300, seed=4)
    assert not crashes and not unpositioned
    assert acc > 0 and rej > 0
