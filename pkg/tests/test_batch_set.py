import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyper_match.batch_set import BatchSet
from hyper_match.cost import CostMeter
from hyper_match.errors import EraseMissing


def test_insert_erase_charge(meter: CostMeter):
    s = BatchSet(meter)
    s.insert([1, 2, 3])
    assert meter.batch_work == 3 * 4
    s.insert([])
    assert meter.batch_work == 12
    s.erase([2])
    assert meter.batch_work == 16
    assert sorted(s) == [1, 3]
    assert 1 in s and 2 not in s
    assert len(s) == 2


def test_erase_missing_raises(meter: CostMeter):
    s = BatchSet(meter, [1])
    with pytest.raises(EraseMissing):
        s.erase([1, 9])
    # nothing removed on failure
    assert s.snapshot() == frozenset({1})


def test_retrieve_always_charges(meter: CostMeter):
    s = BatchSet(meter)
    s.retrieve()
    assert meter.batch_depth == 4
    assert meter.batch_work == 0


def test_clear_returns_items(meter: CostMeter):
    s = BatchSet(meter, [(1, 2), (3, 4)])
    items = s.clear()
    assert sorted(items) == [(1, 2), (3, 4)]
    assert len(s) == 0


def test_unmetered_set_never_charges():
    s = BatchSet(items=[1])
    s.insert([2])
    s.erase([1])
    assert s.retrieve() == [2]


ops = st.lists(
    st.tuples(st.sampled_from(["insert", "erase"]), st.lists(st.integers(0, 20), max_size=6)),
    max_size=30,
)


@settings(max_examples=100, deadline=None)
@given(ops)
def test_matches_builtin_set(sequence):
    m = CostMeter(log_n=3)
    m.begin_batch()
    s = BatchSet(m)
    model = set()
    for op, items in sequence:
        if op == "insert":
            s.insert(items)
            model.update(items)
        else:
            present = [x for x in set(items) if x in model]
            s.erase(present)
            model.difference_update(present)
        assert s.snapshot() == frozenset(model)
    assert sorted(s.retrieve()) == sorted(model)
