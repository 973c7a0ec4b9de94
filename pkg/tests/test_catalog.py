import json
from fractions import Fraction
from math import comb

import pytest

from bratteli import catalog
from bratteli.diagram import materialize
from bratteli.errors import DimensionError
from bratteli.simplex import verify_trace
from bratteli.spec import parse_spec


@pytest.mark.parametrize("name", catalog.names())
def test_every_fact_holds(name):
    results = catalog.entry(name).run_facts()
    assert results
    failed = {k: detail for k, (ok, detail) in results.items() if not ok}
    assert not failed


@pytest.mark.parametrize("name", catalog.names())
def test_emit_round_trip(name):
    text = catalog.emit(name)
    spec = parse_spec(text)
    assert json.loads(spec.to_json()) == json.loads(text)
    assert materialize(spec, 4).matrices == catalog.entry(name).diagram(4).matrices


def test_unknown_entry():
    with pytest.raises(catalog.CatalogError):
        catalog.entry("klein-bottle")


# a_0 = 0 would leave level 1 without edges from the root
@pytest.mark.parametrize("rule", ["1", "n", "n^2", "n!", "n^3"])
def test_countable_rejects_uncertified_rules(rule):
    with pytest.raises(catalog.CatalogError):
        catalog.countable_example(rule)


@pytest.mark.parametrize("rule", ["n^3+2", "n^3+1", "2*n^3+5"])
def test_countable_accepts_convergent_rules(rule):
    e = catalog.countable_example(rule, depth=6)
    assert e.run_facts()["heights"][0]


def test_b1_rows():
    d = catalog.entry("b1").diagram(10)
    for n in range(1, 9):
        off = Fraction(1, n + 1)
        assert d.stochastic(n) == ((1 - off, off), (off, 1 - off))


def test_pascal_measure_is_binomial(pascal_diagram):
    p = Fraction(2, 5)
    tr = catalog.pascal_measure(p, 6)
    assert tr.at(3) == tuple(comb(3, i) * p**i * (1 - p) ** (3 - i) for i in range(4))
    assert verify_trace(pascal_diagram, tr).ok
    assert catalog.pascal_measure(Fraction(1, 2), 2).vectors == (
        (Fraction(1, 2), Fraction(1, 2)),
        (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)),
    )


@pytest.mark.parametrize("p, depth", [(0, 3), (1, 3), (Fraction(3, 2), 3), (Fraction(1, 2), 0)])
def test_pascal_measure_range(p, depth):
    with pytest.raises(DimensionError):
        catalog.pascal_measure(p, depth)


def test_product_bound_holds_exactly():
    ok, detail = catalog.product_lower_bound(catalog.entry("countable").spec, top=8)
    assert ok and detail["min_slack"] > 0


def test_toeplitz_with_three_copies():
    # three copies give three holes; fill two, keep one
    e = catalog.ers_toeplitz(lam="3", fills=[[(0, 0), (1, 1)], [(1, 1), (2, 0)]], depth=4)
    assert all(ok for ok, _ in e.run_facts().values())
    d = e.diagram(4)
    assert d.heights(3) == (3**4,) * d.width(3)


def test_toeplitz_bad_seed():
    with pytest.raises(catalog.CatalogError):
        catalog.ers_toeplitz(fills=[[(5, 0)]])
