from itertools import product

import pytest

from bratteli import catalog
from bratteli.diagram import heights
from bratteli.errors import OrderError, PathError, ToeplitzError
from bratteli.exprs import parse_expr
from bratteli.symbolic import (
    MAXIMAL,
    MINIMAL,
    blocks,
    code_orbit,
    consecutive_order,
    extremal_counts,
    extremal_path,
    format_word,
    incidence_from_blocks,
    orbit,
    ordered_diagram,
    path_rank,
    path_unrank,
    vershik_predecessor,
    vershik_successor,
)
from bratteli.toeplitz import (
    MAX_BLOCK,
    ToeplitzSeed,
    first_stage_for,
    symbol_families,
    toeplitz_window,
)

from conftest import stationary


def add_one_base3(digits):
    """Little-endian base-3 increment; None on overflow."""
    out = list(digits)
    for i, x in enumerate(out):
        if x < 2:
            out[i] = x + 1
            return out
        out[i] = 0
    return None


def test_three_odometer_successor_carries():
    od = consecutive_order(stationary([[3]], root=[3], depth=4))
    for digits in product(range(3), repeat=4):
        path = tuple((0, d) for d in digits)
        nxt = vershik_successor(od, path)
        want = add_one_base3(digits)
        if want is None:
            assert nxt == MAXIMAL
        else:
            assert [pos for _, pos in nxt] == want


def test_successor_and_predecessor_are_inverse(countable):
    od = consecutive_order(countable)
    for v in range(countable.width(4)):
        paths = orbit(od, 4, v)
        assert len(paths) == heights(countable, 4)[v] == len(set(paths))
        assert [path_rank(od, p) for p in paths] == list(range(len(paths)))
        assert vershik_predecessor(od, paths[0]) == MINIMAL
        for a, b in zip(paths, paths[1:]):
            assert vershik_predecessor(od, b) == a
        assert path_unrank(od, 4, v, 7) == paths[7]


def test_orbit_length_at_level_two(countable):
    od = consecutive_order(countable)
    a = parse_expr("n^3+2")
    for v in range(countable.width(2)):
        # a_0 paths reach each level-1 vertex; one vertex sends a_1 edges, the other one
        assert len(orbit(od, 2, v)) == a(0) * (a(1) + 1)


def test_extremal_paths_of_the_countable_family(countable):
    od = consecutive_order(countable)
    top = countable.depth
    for v in range(countable.width(top)):
        low = extremal_path(od, top, v, "min")
        high = extremal_path(od, top, v, "max")
        assert [w for w, _ in low[:-1]] == [0] * (top - 1)
        assert [w for w, _ in high[:-1]] == list(range(1, top))
    assert extremal_counts(od, "min")[:-1] == [1] * (top - 1)


def test_order_validation():
    d = stationary([[2, 1], [1, 2]], depth=3)
    with pytest.raises(OrderError):
        consecutive_order(d, {(2, 0): (0, 1, 0)})
    assert ordered_diagram(d, {(2, 0): (0, 1, 0)}, consecutive=False).sources(2, 0) == (0, 1, 0)
    with pytest.raises(OrderError):
        consecutive_order(d, {(2, 0): (0, 1, 1)})
    assert consecutive_order(d, {(2, 0): (1, 0, 0)}).sources(2, 0) == (1, 0, 0)


def test_bad_paths(countable):
    od = consecutive_order(countable)
    with pytest.raises(PathError):
        vershik_successor(od, ((0, 0), (1, 1)))  # edge 1 into vertex 1 comes from 1
    with pytest.raises(PathError):
        vershik_successor(od, ((0, 5),))
    with pytest.raises(PathError):
        path_unrank(od, 2, 0, 10_000)


def test_two_odometer_blocks():
    od = consecutive_order(stationary([[2]], root=[2], depth=5))
    assert blocks(od, 1, 1).words == ((0, 1),)
    assert blocks(od, 1, 2).words == ((0, 1, 0, 1),)
    w = code_orbit(od, 1, ((0, 0),), 3)
    assert format_word(w.word, compact=True) in ("0101010", "1010101")


def test_block_lengths_and_counts(countable):
    od = consecutive_order(countable)
    for n in range(2, 5):
        fam = blocks(od, 2, n)
        assert [len(w) for w in fam.words] == list(heights(countable, n))


def test_exact_recovery_from_own_level(countable):
    od = consecutive_order(countable)
    for n in range(1, 5):
        rec = incidence_from_blocks(blocks(od, n, n), blocks(od, n, n + 1))
        assert not rec.merged
        assert rec.matrix == countable.matrices[n]


def test_twin_blocks_merge(countable):
    od = consecutive_order(countable)
    # vertices 1 and 2 of level 2 have equal incidence rows, so their words agree
    lower, upper = blocks(od, 1, 2), blocks(od, 1, 3)
    assert lower.words[1] == lower.words[2]
    rec = incidence_from_blocks(lower, upper)
    assert rec.merged and (1, 2) in rec.classes
    raw = countable.matrices[2]
    assert rec.matrix == tuple((r[0], r[1] + r[2]) for r in raw)


def test_single_vertex_recovery():
    od = consecutive_order(stationary([[3]], depth=4))
    rec = incidence_from_blocks(blocks(od, 2, 2), blocks(od, 2, 3))
    assert rec.matrix == ((3,),)


def brute_force_window(od, level, v, rank, radius, n0):
    """Symbols of the neighbours in rank order, via independent unranking."""
    offsets, acc = [], 0
    for h in heights(od.diagram, n0):
        offsets.append(acc)
        acc += h
    out = []
    for r in range(rank - radius, rank + radius + 1):
        p = path_unrank(od, level, v, r)[:n0]
        sub = path_rank(od, p)
        out.append(offsets[p[-1][0]] + sub)
    return tuple(out)


def test_code_orbit_matches_blocks_and_brute_force():
    d = catalog.entry("countable").diagram(6)
    od = consecutive_order(d)
    start = path_unrank(od, 3, 1, 20)
    w = code_orbit(od, 2, start, 4)
    top = len(w.start_path)
    v = w.start_path[-1][0]
    rank = path_rank(od, w.start_path)
    assert w.word == brute_force_window(od, top, v, rank, 4, 2)
    word = blocks(od, 2, top).words[v]
    assert w.word == word[rank - 4: rank + 5]


def test_code_orbit_reports_supported_radius():
    od = consecutive_order(stationary([[2]], depth=4))
    with pytest.raises(PathError, match="supports radius"):
        code_orbit(od, 1, ((0, 0),), 50)


def test_toeplitz_window_is_stable():
    seed = ToeplitzSeed((0, None, 1))
    first = first_stage_for(seed, 5)
    ref = toeplitz_window(seed, first, 5)
    for stage in range(first + 1, first + 5):
        assert toeplitz_window(seed, stage, 5) == ref
        wider = toeplitz_window(seed, stage, 6) if first_stage_for(seed, 6) <= stage else None
        if wider:
            assert wider[1:-1] == ref
    with pytest.raises(ToeplitzError):
        toeplitz_window(seed, 1, 5)


def test_toeplitz_stage_lengths():
    seed = ToeplitzSeed((0, None, 1), parse_expr("3"), (((0, 0), (2, 1)),))
    # three copies give three holes; two get filled
    for n in range(4):
        st = seed.stage(n)
        assert st.p == seed.p(n) and st.holes == 1
        assert st.block[0] is not None and st.block[-1] is not None


def test_single_symbol_family_is_an_odometer():
    seed = ToeplitzSeed((0, None, 0), fills=(((0, 0),),))
    fam = symbol_families(seed, 4)
    assert [len(w) for w in fam.words] == [1, 1, 1, 1]
    assert fam.matrices()[1:] == [((2,),)] * 3


def test_toeplitz_orders_drive_the_symbolic_tools():
    d = catalog.entry("toeplitz").diagram(4)
    od = ordered_diagram(d, consecutive=False)
    seed = ToeplitzSeed((0, None, 1))
    fam = symbol_families(seed, 4)
    for n in range(2, 5):
        for v in range(d.width(n)):
            assert od.sources(n, v) == fam.parts[n - 1][v]


@pytest.mark.parametrize(
    "block0, fills",
    [
        ((0, None), None),
        ((None, 0, 1), None),
        ((0, 1, 1), None),
        ((0, None, 1), ((),)),
    ],
)
def test_bad_seeds(block0, fills):
    with pytest.raises(ToeplitzError):
        ToeplitzSeed(block0, fills=fills) if fills is not None else ToeplitzSeed(block0)


def test_stage_errors():
    with pytest.raises(ToeplitzError, match="out of range"):
        ToeplitzSeed((0, None, 1), fills=(((4, 0),),)).stage(1)
    with pytest.raises(ToeplitzError, match="no hole"):
        ToeplitzSeed((0, None, 1), fills=(((0, 0), (1, 1)),)).stage(1)
    with pytest.raises(ToeplitzError, match=str(MAX_BLOCK)):
        ToeplitzSeed((0, None, 1), parse_expr("n!+2")).stage(12)
    with pytest.raises(ToeplitzError, match="holes"):
        symbol_families(ToeplitzSeed((0, None, 1, None, 2)), 3)
