from fractions import Fraction
import math

import pytest

from bratteli.errors import NotDistinguishedError
from bratteli.simplex import verify_trace
from bratteli.stationary import (
    class_graph,
    classify_classes,
    cross_validate,
    distinguished_classes,
    distinguished_measure,
    spectral_radius,
)

from conftest import stationary


def test_triangular_classes():
    g = class_graph([[2, 0, 0], [1, 3, 0], [0, 1, 5]])
    assert g.classes == ((0,), (1,), (2,))
    assert [r.exact for r in g.radii] == [2, 3, 5]
    assert sorted(g.order_edges()) == [(1, 0), (2, 0), (2, 1)]
    # every class beats everything it reaches
    assert distinguished_classes(g) == [(0,), (1,), (2,)]


def test_equal_radius_blocks_the_upper_class():
    statuses = classify_classes(class_graph([[2, 0], [1, 2]]))
    assert [s.status for s in statuses] == ["distinguished", "not-distinguished"]
    assert statuses[1].blocking == (0,)
    with pytest.raises(NotDistinguishedError):
        distinguished_measure(stationary([[2, 0], [1, 2]]), 1)


def test_single_vertex_measure():
    d = stationary([[2]], root=[3], depth=6)
    mu = distinguished_measure(d, 0)
    assert mu.x == (Fraction(1, 3),)
    assert all(mu.tower_masses(d, n) == (1,) for n in range(1, 7))


def test_two_classes_measures(two_classes):
    first = distinguished_measure(two_classes, 0)
    assert first.x == (1, 0)
    upper = distinguished_measure(two_classes, 1)
    # x F = 3x for F = [[2,0],[1,3]] forces x_0 = x_1
    assert upper.x == (Fraction(1, 2), Fraction(1, 2))
    assert upper.tower_masses(two_classes, 3) == (Fraction(2, 9), Fraction(7, 9))
    assert verify_trace(two_classes, upper.trace(two_classes, 10)).ok


def test_irrational_radius_goes_float():
    r = spectral_radius([[1, 1], [1, 0]])
    phi = (1 + math.sqrt(5)) / 2
    assert r.exact is None and r.lower <= phi <= r.upper
    mu = distinguished_measure(stationary([[1, 1], [1, 0]], depth=10), 0)
    assert not mu.exact
    assert mu.x[0] == pytest.approx(phi / (phi + 1), abs=1e-12)
    assert spectral_radius([[3]]).exact == 3


def test_cross_validation_all_ones():
    r = cross_validate(stationary([[1, 1], [1, 1]], depth=10), 20)
    assert r["count_match"] and r["supports_match"] and r["max_discrepancy"] == 0
    assert len(r["distinguished"]) == r["clusters"] == 1


def test_cross_validation_two_classes(two_classes):
    r = cross_validate(two_classes, 30)
    assert r["count_match"] and r["supports_match"]
    assert r["clusters"] == 2
