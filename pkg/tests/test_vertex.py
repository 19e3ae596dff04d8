from fractions import Fraction as Fr

import pytest

from loopquant.acceptance import load_golden
from loopquant.errors import InputError
from loopquant.potential import correlator
from loopquant.series import Window
from loopquant.vertex import intersection_number, intersection_table, product_vertex

# Frozen literature values, independent of the packaged table.
KNOWN = [
    (0, (0, 0, 0), Fr(1)),
    (0, (1, 0, 0, 0), Fr(1)),
    (0, (1, 1, 0, 0, 0), Fr(2)),
    (1, (1,), Fr(1, 24)),
    (1, (2, 0), Fr(1, 24)),
    (1, (1, 1), Fr(1, 24)),
    (1, (2, 1, 0), Fr(1, 12)),
    (1, (1, 1, 1), Fr(1, 12)),
    (2, (4,), Fr(1, 1152)),
    (2, (4, 1), Fr(1, 384)),
    (2, (3, 2), Fr(29, 5760)),
    (3, (7,), Fr(1, 82944)),
    (3, (7, 1), Fr(5, 82944)),
    (3, (6, 2), Fr(77, 414720)),
    (3, (5, 3), Fr(503, 1451520)),
    (3, (4, 4), Fr(607, 1451520)),
]


@pytest.mark.parametrize("g,levels,value", KNOWN)
def test_known_values(g, levels, value):
    assert intersection_number(g, levels) == value


def test_dimension_constraint_gives_zero():
    assert intersection_number(1, (0, 0)) == 0
    assert intersection_number(0, (0, 0, 1)) == 0


def test_unstable_rejected():
    with pytest.raises(InputError):
        intersection_number(0, (0, 0))
    with pytest.raises(InputError):
        intersection_number(0, (-1, 0, 0))


def test_string_equation_genus0():
    # <tau_0 tau_{k_1}...tau_{k_n}> = sum_i <... tau_{k_i - 1} ...>
    for levels in [(1, 1, 0, 0), (2, 1, 0, 0, 0), (3, 0, 0, 0)]:
        lhs = intersection_number(0, levels + (0,))
        rhs = sum(intersection_number(0, levels[:i] + (k - 1,) + levels[i + 1:])
                  for i, k in enumerate(levels) if k)
        assert lhs == rhs


def test_packaged_table_matches_recursion():
    rows = load_golden()
    assert len(rows) >= 40
    for g, levels, value, _src in rows:
        assert intersection_number(g, levels) == value


def test_table_rows_are_nonzero():
    assert all(v for _, _, v in intersection_table(2, 4))


def test_product_vertex_decouples():
    p = product_vertex(Window(N=2, K=4, D=4, G=1, L=4))
    assert correlator(p, (0, ((1, 0), (1, 0), (1, 0)))) == 1
    assert correlator(p, (0, ((2, 0), (2, 0), (2, 0)))) == 1
    assert correlator(p, (0, ((1, 0), (2, 0), (2, 0)))) == 0
    assert correlator(p, (1, ((1, 1),))) == Fr(1, 24)
    assert correlator(p, (1, ((1, 0), (2, 2)))) == 0
