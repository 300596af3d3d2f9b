import numpy as np
import pytest

from hyper_match.config import Config
from hyper_match.cost import CostMeter
from hyper_match.edges import ABSENT, ACTIVE, temp_deleted
from hyper_match.errors import (
    InvariantBroken,
    LevelOutOfRange,
    MatchedEdgePassed,
    NotEndpoint,
    NotMaxLevel,
    UnknownEdge,
)
from hyper_match.leveling import LevelingScheme


def _scheme(N: int = 64):
    cfg = Config(r=2, N=N)
    meter = CostMeter(cfg.log_n)
    meter.begin_batch()
    return LevelingScheme(cfg, meter)


def _tilde_fixture():
    # α=8, L=2。10 はレベル 0、(10,20) を所有し、A(10,0) に 2 本、A(10,1) に 4 本
    s = _scheme()
    s.set_level_many({1: 0, 2: 0, 10: 0, 31: 1, 32: 1, 33: 1, 34: 1})
    s.ensure_vertices([20])
    s.attach_edges([(1, 10), (2, 10), (10, 20), (10, 31), (10, 32), (10, 33), (10, 34)])
    return s


def test_attach_assigns_owner_and_level():
    s = _tilde_fixture()
    assert s.edges[(1, 10)].owner == 1
    assert s.edges[(1, 10)].level == 0
    assert s.edges[(10, 20)].owner == 10
    assert s.edges[(10, 31)].owner == 31
    assert s.edges[(10, 31)].level == 1
    assert (10, 31) in s.vertices[10].a_sets[1]
    assert (10, 20) in s.vertices[20].a_sets[0]
    assert s.vertices[10].incident.snapshot() == {e for e in s.edges if 10 in e}


def test_tilde_o_counts_owned_and_lower_a_sets():
    s = _tilde_fixture()
    assert s.tilde_o(10, 1) == 3
    assert s.tilde_o(10, 2) == 7
    assert s.tilde_O(10, 1) == [(1, 10), (2, 10), (10, 20)]
    assert len(s.tilde_O(10, 2)) == 7
    # nothing reaches its threshold here
    assert s.rise.all_empty()


def test_tilde_o_level_range():
    s = _tilde_fixture()
    with pytest.raises(LevelOutOfRange):
        s.tilde_o(10, 0)
    with pytest.raises(LevelOutOfRange):
        s.tilde_o(10, 3)
    with pytest.raises(UnknownEdge):
        s.tilde_o(99, 1)


def test_set_owner_validation():
    s = _tilde_fixture()
    with pytest.raises(NotMaxLevel):
        s.set_owner((10, 31), 10)
    with pytest.raises(NotEndpoint):
        s.set_owner((10, 31), 5)
    with pytest.raises(UnknownEdge):
        s.set_owner((7, 8), 7)


def test_set_owner_moves_edge_between_sets():
    s = _tilde_fixture()
    s.set_owner((1, 10), 10)
    assert s.edges[(1, 10)].owner == 10
    assert (1, 10) in s.vertices[10].owned
    assert (1, 10) not in s.vertices[1].owned
    assert (1, 10) in s.vertices[1].a_sets[0]
    assert (1, 10) not in s.vertices[10].a_sets[0]


def test_set_level_rise_reowns_edges():
    s = _tilde_fixture()
    s.set_level(10, 1)
    assert s.level_of(10) == 1
    for e in [(1, 10), (2, 10), (10, 20)]:
        assert s.edges[e].owner == 10
        assert s.edges[e].level == 1
    assert (1, 10) in s.vertices[1].a_sets[1]
    assert (1, 10) not in s.vertices[1].owned
    assert not s.vertices[10].a_sets[0]


def test_set_level_fall_hands_edges_to_higher_endpoint():
    s = _tilde_fixture()
    s.set_level(10, -1)
    # (10,20) は両端 −1 で最小 ID の 10 が所有、レベル 0
    assert s.edges[(10, 20)].owner == 10
    assert s.edges[(10, 20)].level == 0
    assert s.edges[(10, 31)].owner == 31


def test_set_level_validation():
    s = _tilde_fixture()
    with pytest.raises(InvariantBroken):
        s.set_level_many([(1, 0), (1, 1)])
    with pytest.raises(LevelOutOfRange):
        s.set_level(1, 5)
    with pytest.raises(LevelOutOfRange):
        s.set_level(1, -2)


def test_rise_index_tracks_star_center():
    s = _scheme()
    s.attach_edges([(1, k) for k in range(2, 10)])
    # 8 本すべて 1 が所有、õ_{1,1} = 8 ≥ α
    assert s.rise.members(0) == [1]
    assert s.rise.members(1) == [1]
    assert s.rise.is_empty(2)

    s.detach_edges([(1, 2)])
    assert s.rise.members(1) == []
    assert s.rise.members(0) == [1]

    s.detach_edges([(1, k) for k in range(3, 10)])
    assert s.rise.all_empty()
    assert not s.edges


def test_detach_rejects_matched_and_unknown():
    s = _scheme()
    s.attach_edges([(1, 2)])
    s.edges[(1, 2)].matched = True
    with pytest.raises(MatchedEdgePassed):
        s.detach_edges([(1, 2)])
    with pytest.raises(UnknownEdge):
        s.detach_edges([(3, 4)])
    with pytest.raises(InvariantBroken):
        s.attach_edges([(1, 2)])


def test_park_unpark_drain():
    s = _scheme()
    s.attach_edges([(1, 2)])
    s.park((1, 2), [(2, 3), (1, 4)])
    assert s.locate((2, 3)) == temp_deleted((1, 2))
    assert s.locate((1, 2)) == ACTIVE
    assert s.locate((5, 6)) == ABSENT

    assert s.unpark([(2, 3)]) == {(1, 2): [(2, 3)]}
    assert s.locate((2, 3)) == ABSENT
    assert s.drain((1, 2)) == [(1, 4)]
    assert not s.temp_parent
    assert len(s.edges[(1, 2)].deleted) == 0


def test_set_level_back_restores_tied_owner():
    s = _scheme()
    s.set_level_many({1: 1, 2: 1})
    s.attach_edges([(1, 2)])
    assert s.edges[(1, 2)].owner == 1

    s.set_level(1, 0)
    assert s.edges[(1, 2)].owner == 2
    s.set_level(1, 1)
    # 同レベルに戻れば最小 ID の 1 が所有者
    assert s.edges[(1, 2)].owner == 1 == s.canonical_owner((1, 2))
    assert (1, 2) in s.vertices[1].owned
    assert (1, 2) in s.vertices[2].a_sets[1]
    assert (1, 2) not in s.vertices[1].a_sets[1]


def _random_scheme(seed: int):
    rng = np.random.default_rng(seed)
    s = _scheme()
    s.set_level_many({v: int(rng.integers(-1, s.L + 1)) for v in range(1, 13)})
    pairs = set()
    while len(pairs) < 25:
        a, b = sorted(int(x) for x in rng.choice(12, size=2, replace=False) + 1)
        pairs.add((a, b))
    s.attach_edges(sorted(pairs))
    return s, rng


def _state(s):
    vertices = {
        v: (st.level, st.owned.snapshot(), tuple(a.snapshot() for a in st.a_sets)) for v, st in s.vertices.items()
    }
    edges = {e: (st.owner, st.level) for e, st in s.edges.items()}
    return vertices, edges, tuple(x.snapshot() for x in s.rise.sets)


def test_set_level_and_back_is_identity():
    for seed in range(20):
        s, rng = _random_scheme(seed)
        for _ in range(10):
            v = int(rng.integers(1, 13))
            current = s.level_of(v)
            other = int(rng.choice([k for k in range(-1, s.L + 1) if k != current]))
            before = _state(s)
            s.set_level(v, other)
            s.set_level(v, current)
            assert _state(s) == before, (seed, v, current, other)
        for e in s.edges:
            assert s.edges[e].owner == s.canonical_owner(e)


def test_tilde_O_matches_tilde_o_on_random_states():
    for seed in range(20):
        s, _ = _random_scheme(seed)
        for v, st in s.vertices.items():
            for k in range(st.level + 1, s.L + 1):
                edges = s.tilde_O(v, k)
                assert len(edges) == s.tilde_o(v, k)
                expected = set(st.owned.snapshot())
                for j in range(max(st.level, 0), k):
                    expected |= st.a_sets[j].snapshot()
                assert set(edges) == expected
