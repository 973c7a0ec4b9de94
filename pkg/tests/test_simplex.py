from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bratteli import catalog
from bratteli.diagram import stochastic_matrix
from bratteli.errors import LevelRangeError, UnseparatedError
from bratteli.simplex import (
    MeasureTrace,
    affine_dimension,
    cluster_extremes,
    decompose_check,
    diameter_dstar,
    diameter_series,
    polytope,
    product_matrix,
    product_matrix_rational,
    single_linkage,
    trace_from_limit,
    verify_trace,
)

from conftest import stationary


def naive_product(d, n, m):
    """Multiply stochastic matrices left to right with plain Fractions."""
    g = [list(r) for r in stochastic_matrix(d, n)]
    for k in range(n + 1, n + m + 1):
        f = stochastic_matrix(d, k)
        g = [[sum(f[v][u] * g[u][w] for u in range(len(g))) for w in range(len(g[0]))] for v in range(len(f))]
    return tuple(tuple(r) for r in g)


def test_odometer_power(odometer3):
    for k in range(1, 8):
        rows = product_matrix(odometer3, 1, k - 1).rows
        r = Fraction(2, 3) ** k
        assert rows == ((1, 0), (1 - r, r))


def test_m_zero_is_the_stochastic_matrix(pascal_diagram):
    assert product_matrix(pascal_diagram, 3, 0).rows == stochastic_matrix(pascal_diagram, 3)


@pytest.mark.parametrize("n, m", [(1, 0), (2, 3), (3, 5), (1, 8)])
def test_fast_product_matches_oracles(b2, n, m):
    fast = product_matrix(b2, n, m).rows
    assert fast == product_matrix_rational(b2, n, m).rows == naive_product(b2, n, m)


def test_b1_row_distance_product(b1):
    for n in range(2, 6):
        for m in range(6):
            want = 2 * Fraction(1)
            for i in range(m + 1):
                want *= 1 - Fraction(2, n + i + 1)
            rows = product_matrix(b1, n, m).rows
            assert sum(abs(a - b) for a, b in zip(*rows)) == want


def test_b1_diameter_closed_form(b1):
    # polytope(n, m + 1) is spanned by the rows of G_(n+m, n)
    for m in range(10):
        assert diameter_dstar(polytope(b1, 2, m + 1)) == Fraction(4, (2 + m) * (3 + m))


def test_polytope_base_cases(pascal_diagram):
    assert polytope(pascal_diagram, 2, 0).vectors == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert polytope(pascal_diagram, 2, 1).vectors == stochastic_matrix(pascal_diagram, 2)
    assert diameter_dstar([(Fraction(1, 2), Fraction(1, 2))]) == 0


def test_b2_diameter_is_a_finite_product():
    d = catalog.entry("b2").diagram(45)
    # level 1 collapses: the first matrix has all entries 1/2
    assert diameter_dstar(polytope(d, 1, 40)) == 0
    want = Fraction(2)
    for k in range(2, 42):
        want *= Fraction(k * k - 1, k * k + 1)
    assert diameter_dstar(polytope(d, 2, 40)) == want
    assert want > Fraction(1, 2)


def test_b1_collapses_at_level_one(b1):
    assert [x for _, x in diameter_series(b1, 1, 3)] == [2, 0, 0, 0]
    assert cluster_extremes(b1, 1, 12).count == 1


def test_countable_clusters(countable):
    from bratteli.diagram import ensure_depth

    r = cluster_extremes(ensure_depth(countable, 30), 3, 25)
    assert r.separated and r.count == 4


def test_single_linkage_cut():
    groups, gap, diam, separated = single_linkage([(0,), (Fraction(1, 100),), (1,)])
    assert groups == [[0, 1], [2]] and separated
    assert gap == Fraction(99, 100) and diam == Fraction(1, 100)


def test_affine_dimension():
    assert affine_dimension([(1, 0, 0), (0, 1, 0), (0, 0, 1)]) == 2
    assert affine_dimension([(1, 0), (1, 0)]) == 0


def test_pascal_trace_and_perturbation(pascal_diagram):
    tr = catalog.pascal_measure(Fraction(1, 3), 8)
    assert verify_trace(pascal_diagram, tr).ok
    assert decompose_check(pascal_diagram, tr, 2, 3) == 0
    vecs = list(tr.vectors)
    eps = Fraction(1, 100)
    vecs[1] = (vecs[1][0] + eps, vecs[1][1] - eps, vecs[1][2])
    check = verify_trace(pascal_diagram, MeasureTrace(tuple(vecs)))
    assert not check.ok and check.failing_level == 1 and check.residual == 2 * eps


def test_single_vertex_trace():
    d = stationary([[2]], depth=6)
    est = trace_from_limit(d, 3, 5)
    assert len(est) == 1 and est[0].trace.vectors == ((1,), (1,), (1,))


def test_b2_trace_starts_at_level_two():
    d = catalog.entry("b2").diagram(60)
    with pytest.raises(UnseparatedError):
        trace_from_limit(d, 3, 40, start=1)
    est = trace_from_limit(d, 3, 40, start=2)
    assert len(est) == 2


def test_range_errors(b1):
    with pytest.raises(LevelRangeError):
        product_matrix(b1, 0, 1)
    with pytest.raises(LevelRangeError):
        product_matrix(b1, 10, 10)


@st.composite
def square(draw):
    k = draw(st.integers(1, 3))
    m = [[draw(st.integers(0, 4)) for _ in range(k)] for _ in range(k)]
    for i in range(k):
        m[i][i] += 1
    return m


@settings(max_examples=40, deadline=None, derandomize=True)
@given(square(), st.integers(1, 3), st.integers(0, 3))
def test_nesting(matrix, n, m):
    d = stationary(matrix, depth=9)
    assert diameter_dstar(polytope(d, n, m + 1)) <= diameter_dstar(polytope(d, n, m))
