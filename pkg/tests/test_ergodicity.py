from fractions import Fraction
from math import comb

import pytest

from bratteli import catalog
from bratteli.ergodicity import (
    ChainStructure,
    NoAdmissiblePartition,
    Partition,
    chain_partition_search,
    check_main1,
    default_schedule,
    min_entry_divergence,
    replay_certificate,
    row_gap,
    subdiagram_unique_ergodicity,
    support_diagnostics,
    unique_ergodicity_search,
)
from bratteli.errors import DimensionError
from bratteli.simplex import MeasureTrace
from bratteli.verdict import CERTIFIED, UNDETERMINED

from conftest import stationary


def test_odometer_search_and_replay(odometer3):
    v = unique_ergodicity_search(odometer3)
    assert v.status == CERTIFIED
    levels = v.certificate["levels"]
    ok, gaps = replay_certificate(odometer3, v.certificate)
    assert ok
    # rows of [[1,0],[1/3,2/3]]^k sit 2(2/3)^k apart
    want = [2 * Fraction(2, 3) ** (b - a) for a, b in zip(levels[1:], levels[2:])]
    assert gaps == want
    assert all(g <= e for g, e in zip(gaps, default_schedule()))


def test_b2_search_is_undetermined():
    d = catalog.entry("b2").diagram(80)
    v = unique_ergodicity_search(d, m_budget=60)
    assert v.status == UNDETERMINED
    assert v.witness["best_gap"] > v.witness["eps"]


def test_b1_search_stalls_with_witness():
    d = catalog.entry("b1").diagram(90)
    v = unique_ergodicity_search(d, m_budget=64)
    w = v.witness
    assert v.status == UNDETERMINED and w["k"] == 4 and w["n"] == 19
    # the witness gap is the closed-form row gap at the stall point
    n, m = w["n"], w["best_m"]
    assert w["best_gap"] == Fraction(2 * (n - 1) * n, (n + m) * (n + m + 1)) == row_gap(d, n, m)


def test_schedule_validation(odometer3):
    with pytest.raises(ValueError):
        unique_ergodicity_search(odometer3, eps_schedule=[Fraction(1, 4), Fraction(1, 2)])
    with pytest.raises(ValueError):
        unique_ergodicity_search(odometer3, m_budget=0)


def test_min_entry_divergence():
    assert min_entry_divergence(catalog.entry("b1").diagram(20)).status == CERTIFIED
    assert min_entry_divergence(stationary([[1, 1], [1, 1]])).status == CERTIFIED
    assert min_entry_divergence(catalog.entry("b2").diagram(20)).status == UNDETERMINED


def test_main_conditions_on_odometer(odometer3):
    r = check_main1(odometer3, Partition.constant([[0]]), 10, Fraction(1, 2))
    assert r["c"][0]["verdict"] == "certified"
    assert r["e2"]["holds"] and set(r["e2"]["values"]) == {Fraction(1, 3)}


def test_main_conditions_on_b2():
    d = catalog.entry("b2").diagram(16)
    r = check_main1(d, Partition.constant([[0], [1]]), 10)
    for block in r["c"]:
        assert block["terms"] == [Fraction(1, n * n + 1) for n in range(1, 11)]
        assert block["verdict"] == "certified"
    assert all(b["verdict"] == "holds" for b in r["d"])


def test_single_block_on_b1_fails_d(b1):
    r = check_main1(b1, Partition.constant([[0, 1]]), 10)
    assert r["d"][0]["verdict"] == "violated-evidence"


def test_subdiagram_unique_ergodicity():
    d = catalog.entry("b2").diagram(20)
    assert subdiagram_unique_ergodicity(d, Partition.constant([[0], [1]]), 1, 10).status == CERTIFIED


def test_partition_validation():
    p = Partition.constant([[0, 1], [1]])
    with pytest.raises(DimensionError):
        p.blocks(1, 2)
    with pytest.raises(DimensionError):
        Partition.constant([[3]]).blocks(1, 2)
    q = Partition.from_levels({1: [[0]], 2: [[0, 1]]}, tail=[[1]])
    assert q.blocks(2, 3) == (frozenset({0, 1}),) and q.rest(7, 3) == frozenset({0, 2})


def test_pascal_has_no_admissible_partition(pascal_diagram):
    r = chain_partition_search(pascal_diagram, 8)
    assert isinstance(r, NoAdmissiblePartition)
    assert r.condition == "e1.1"


def test_countable_chains(countable):
    s = chain_partition_search(countable, 8)
    assert isinstance(s, ChainStructure)
    chains = s.chains()
    assert len(chains) == s.top
    # the first column of the countable diagram is its own chain
    assert (0,) * s.top in chains
    assert [sorted(b) for b in s.chain_sets((0,) * s.top)] == [[0]] * s.top


def test_pascal_towers_vanish(pascal_diagram):
    tr = catalog.pascal_measure(Fraction(1, 2), 10)
    diag = support_diagnostics(pascal_diagram, tr)
    assert diag["all_towers_vanish_evidence"]
    assert diag["max_mass"] == [Fraction(comb(n, n // 2), 2**n) for n in range(1, 11)]


def test_support_on_block(odometer3):
    tr = MeasureTrace(tuple((1, 0) for _ in range(8)))
    diag = support_diagnostics(odometer3, tr, Partition.constant([[0]]))
    assert diag["blocks"][0]["off_support"] == [0] * 8
