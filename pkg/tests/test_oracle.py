import pytest

from hyper_match.engine import UpdateBatch
from hyper_match.errors import TooLarge
from hyper_match.oracle import (
    audit,
    check_maximality,
    check_degree_bound,
    check_ratio,
    check_state,
    check_vertex_cover,
    exact_maximum_matching,
)


def test_maximality_and_cover():
    edges = [(1, 2), (2, 3), (4, 5)]
    assert check_maximality(edges, [(2, 3), (4, 5)]) == []
    found = check_maximality(edges, [(2, 3)])
    assert [v.code for v in found] == ["not-maximal"]
    assert "(4,5)" in str(found[0])

    assert check_vertex_cover(edges, [2, 4]) == []
    assert [v.code for v in check_vertex_cover(edges, [2])] == ["not-covered"]


def test_exact_maximum_matching():
    assert exact_maximum_matching([]) == 0
    assert exact_maximum_matching([(1, 2), (2, 3), (1, 3)]) == 1
    assert exact_maximum_matching([(1, 2), (2, 3), (3, 4)]) == 2
    assert exact_maximum_matching([(1, 2, 3), (3, 4), (4, 5, 6), (1,)]) == 2
    with pytest.raises(TooLarge):
        exact_maximum_matching([(i, i + 100) for i in range(25)])


def test_check_ratio():
    edges = [(1, 2), (3, 4), (5, 6)]
    assert [v.code for v in check_ratio(1, edges, 2)] == ["ratio"]
    assert check_ratio(2, edges, 2) == []
    # too large for the exact solver: skipped
    assert check_ratio(0, [(i, i + 100) for i in range(25)], 2) == []


def test_clean_state_and_batch_open(make_matcher):
    m = make_matcher()
    m.apply_batch(UpdateBatch(insertions=[[1, 2], [3, 4], [2, 3]]))
    assert audit(m) == []
    m.meter.begin_batch()
    assert [v.code for v in check_state(m)] == ["batch-open"]


def test_detects_edge_in_two_d_sets(make_matcher):
    m = make_matcher()
    m.apply_batch(UpdateBatch(insertions=[[1, 2], [3, 4]]))

    m.meter.begin_batch()
    m.scheme.park((1, 2), [(2, 3)])
    m.meter.end_batch()
    assert check_state(m) == []
    assert m.temp_deleted_edges() == [(2, 3)]

    m.meter.begin_batch()
    m.scheme.edges[(3, 4)].deleted.insert([(2, 3)])
    m.meter.end_batch()
    found = check_state(m)
    assert [v.code for v in found] == ["inv2-multiple"]


def test_detects_parked_edge_off_its_parent(make_matcher):
    m = make_matcher()
    m.apply_batch(UpdateBatch(insertions=[[1, 2]]))
    m.meter.begin_batch()
    m.scheme.park((1, 2), [(5, 6)])
    m.meter.end_batch()
    assert [v.code for v in check_state(m)] == ["inv2-incident"]


def test_detects_broken_matched_pointer(make_matcher):
    m = make_matcher()
    m.apply_batch(UpdateBatch(insertions=[[1, 2], [3, 4]]))
    m.scheme.vertices[3].matched = None
    codes = {v.code for v in check_state(m)}
    assert {"matched-pointer", "inv1-unmatched"} <= codes


def test_detects_unmatched_edge_with_free_endpoints(make_matcher):
    m = make_matcher()
    m.apply_batch(UpdateBatch(insertions=[[1, 2]]))
    state = m.scheme.edges[(1, 2)]
    state.matched = False
    for u in (1, 2):
        m.scheme.vertices[u].matched = None
    codes = {v.code for v in audit(m)}
    assert "not-maximal" in codes
    assert "not-covered" in codes
    assert "inv1-unmatched" in codes


def test_check_degree_bound_flags_unswept_star(make_matcher):
    m = make_matcher(N=256)
    m.apply_batch(UpdateBatch(insertions=[[1, k] for k in range(2, 72)]))
    # 挿入直後は中心が õ_{1,2} = 70 > 64 のままレベル 0 にいる
    found = check_degree_bound(m)
    assert [v.code for v in found] == ["degree-bound"]
    assert "vertex 1 " in found[0].message
    assert check_degree_bound(make_matcher()) == []
