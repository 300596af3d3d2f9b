import pytest

from hyper_match.cost import CostMeter
from hyper_match.errors import NoOpenBatch


def test_dict_op_and_scan(meter: CostMeter):
    meter.dict_op(3)
    assert meter.batch_work == 12
    assert meter.batch_depth == 4

    meter.scan(3, 7)
    assert meter.batch_work == 12 + 21
    assert meter.batch_depth == 4 + 3

    meter.luby_round(10, 3)
    assert meter.batch_work == 12 + 21 + 30
    assert meter.batch_depth == 4 + 3 + 4


def test_parallel_takes_max_sequential_adds(meter: CostMeter):
    with meter.parallel():
        meter.dict_op(1)
        meter.dict_op(5)
    assert meter.batch_depth == 4
    assert meter.batch_work == 24

    with meter.parallel():
        with meter.sequential():
            meter.dict_op(1)
            meter.dict_op(1)
        with meter.sequential():
            meter.dict_op(1)
    assert meter.batch_depth == 4 + 8

    cost = meter.end_batch()
    assert cost.index == 1
    assert cost.depth == 12
    assert cost.work == 24 + 12
    assert meter.total_work == cost.work


def test_outside_batch_raises():
    m = CostMeter(log_n=4)
    with pytest.raises(NoOpenBatch):
        m.charge(1)
    with pytest.raises(NoOpenBatch):
        m.end_batch()
    with pytest.raises(NoOpenBatch):
        with m.parallel():
            pass


def test_series_indexed_by_batch():
    m = CostMeter(log_n=2)
    for k in (1, 2):
        m.begin_batch()
        m.dict_op(k)
        m.end_batch()
    frame = m.series()
    assert list(frame.index) == [1, 2]
    assert frame["work"].tolist() == [2, 4]
    assert frame["depth"].tolist() == [2, 2]
    assert m.total_work == 6


def test_empty_series():
    frame = CostMeter(log_n=2).series()
    assert frame.empty
    assert list(frame.columns) == ["work", "depth"]
