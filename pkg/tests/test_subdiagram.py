from fractions import Fraction

import pytest

from bratteli import catalog
from bratteli.diagram import heights
from bratteli.ergodicity import ChainStructure, chain_partition_search
from bratteli.errors import DimensionError, InvalidDiagramError, PathError
from bratteli.spec import countable_incidence
from bratteli.subdiagram import (
    chain_subdiagram,
    extension_finiteness,
    extension_mass,
    restrict,
    single_vertex_trace,
)
from bratteli.verdict import CERTIFIED_FINITE, UNDETERMINED


def a(n):
    return n**3 + 2


def test_countable_column_is_an_odometer(countable):
    sub = restrict(countable, [0], 8)
    assert sub.inner.matrices[0] == ((2,),)
    assert [m[0][0] for m in sub.inner.matrices[1:]] == [a(n) for n in range(1, 8)]


def test_pascal_left_edge(pascal_diagram):
    sub = restrict(pascal_diagram, [0], 6)
    assert all(m == ((1,),) for m in sub.inner.matrices)


def test_odometer_right_column(odometer3):
    sub = restrict(odometer3, [1], 6)
    assert sub.inner.matrices[1:] == (((2,),),) * 5


def test_interior_of_pascal(pascal_diagram):
    sub = restrict(pascal_diagram, lambda n: range(1, n + 1), 5)
    assert sub.heights(4) == (1, 3, 3, 1)


def test_restriction_errors(pascal_diagram):
    with pytest.raises(InvalidDiagramError):
        restrict(pascal_diagram, lambda n: range(n + 1), 4)
    with pytest.raises(DimensionError):
        restrict(pascal_diagram, [5], 3)


def test_extension_finiteness_examples(b2, pascal_diagram, countable):
    v = extension_finiteness(b2, [0], 10)
    assert v.status == CERTIFIED_FINITE and v.certificate["terms"] == ["(1)/(n^2+1)"]
    assert extension_finiteness(pascal_diagram, [0], 8).status == CERTIFIED_FINITE
    assert extension_finiteness(countable, [0], 8).status == CERTIFIED_FINITE


def test_odometer_column_mass_diverges(odometer3):
    sub = restrict(odometer3, [1], 12)
    em = extension_mass(odometer3, [1], single_vertex_trace(sub), 12)
    # h_1 = 3^N against 3 * 2^(N-1) on the column
    assert em.masses == tuple(Fraction(3, 2) ** (N - 1) for N in range(1, 13))
    assert em.flag == "diverging-evidence"
    assert em.finiteness.status == UNDETERMINED


def test_countable_column_mass():
    d = catalog.entry("countable").diagram(22)
    sub = restrict(d, [0], 20)
    em = extension_mass(d, [0], single_vertex_trace(sub), 20)
    sub_h = 2
    for N in range(1, 21):
        # full height over the column's own height 2 * a_1 ... a_(N-1)
        assert em.masses[N - 1] == Fraction(heights(d, N)[0], sub_h)
        sub_h *= a(N)
    assert em.nondecreasing and em.flag == "finite"
    steps = [b - x for x, b in zip(em.masses, em.masses[1:])]
    assert all(s2 < s1 for s1, s2 in zip(steps, steps[1:]))
    assert em.masses[-1] < Fraction(5, 2)


def test_bad_sub_trace(pascal_diagram):
    sub = restrict(pascal_diagram, [0], 6)
    with pytest.raises(DimensionError):
        extension_mass(pascal_diagram, [0], single_vertex_trace(restrict(pascal_diagram, [0], 4)), 6)
    with pytest.raises(DimensionError):
        single_vertex_trace(restrict(pascal_diagram, lambda n: range(1, n + 1), 4))
    assert extension_mass(pascal_diagram, [0], single_vertex_trace(sub)).masses == (1,) * 6


@pytest.fixture(scope="module")
def chains():
    d = catalog.entry("countable").diagram(22)
    s = chain_partition_search(d, 8)
    assert isinstance(s, ChainStructure)
    return d, s


def test_chain_for_third_column(chains):
    d, s = chains
    chain = (1, 1, 2, 2, 2, 2, 2, 2, 2)
    assert chain in s.chains()
    sub = chain_subdiagram(d, s, chain)
    # twin vertices are born with equal rows, so the column settles at level 4
    assert sub.sets[3:] == ((2,),) * 6
    for n in range(4, 9):
        assert sub.inner.matrices[n] == ((countable_incidence(n, a(n))[2][2],),)


def test_constant_chain(chains):
    d, s = chains
    sub = chain_subdiagram(d, s, (0,) * s.top)
    assert sub.sets == ((0,),) * s.top


def test_invalid_chain(chains):
    d, s = chains
    with pytest.raises(PathError):
        chain_subdiagram(d, s, (0, 1, 1))
    with pytest.raises(PathError):
        chain_subdiagram(d, s, (0,) * (s.top + 1))
