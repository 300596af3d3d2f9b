import pandas as pd
import pytest

from hyper_match.epochs import EpochTracker, Termination
from hyper_match.errors import CloseUnopened, DoubleOpen, InvariantBroken
from hyper_match.report import LubyStats, SettleStats, short_epoch_violations


def test_open_close_lifecycle():
    t = EpochTracker(alpha=8)
    rec = t.open((1, 2), level=0, d_size=0, batch=1)
    assert t.is_open((1, 2)) and t.open_count == 1
    with pytest.raises(DoubleOpen):
        t.open((1, 2), level=0, d_size=0, batch=1)

    t.record_d_hit((1, 2), 2)
    t.close((1, 2), Termination.NATURAL, batch=3)
    assert rec.ended_at == 3
    assert rec.duration == 3
    assert not rec.duration_is_proxy
    with pytest.raises(CloseUnopened):
        t.close((1, 2), Termination.NATURAL, batch=3)
    with pytest.raises(InvariantBroken):
        t.record_d_hit((1, 2))


def test_close_requires_real_termination():
    t = EpochTracker(alpha=8)
    t.open((1, 2), level=0, d_size=0, batch=1)
    with pytest.raises(InvariantBroken):
        t.close((1, 2), Termination.OPEN, batch=2)


def test_close_all_and_d_bound():
    t = EpochTracker(alpha=8)
    t.open((1, 2), level=0, d_size=9, batch=1)
    t.open((3, 4), level=1, d_size=64, batch=1)
    assert t.d_bound_exceeded == 1
    assert t.close_all(Termination.INDUCED, batch=2) == 2
    assert t.open_count == 0
    assert all(r.duration_is_proxy for r in t.records)


def test_level_stats():
    t = EpochTracker(alpha=8)
    t.open((1, 2), level=0, d_size=0, batch=1)
    t.open((3, 4), level=0, d_size=4, batch=1)
    t.open((5, 6), level=1, d_size=0, batch=1)
    t.close((1, 2), Termination.NATURAL, batch=2)
    t.close((3, 4), Termination.INDUCED, batch=2)

    stats = t.level_stats(mu=1.0)
    assert list(stats.index) == [0, 1]
    row = stats.loc[0]
    assert (row["T"], row["natural"], row["induced"], row["open"]) == (2, 1, 1, 0)
    assert row["mu_short"] == 2
    assert row["mu_short_fraction"] == 1.0
    assert row["classification"] == "natural"
    assert row["d_ratio_max"] == pytest.approx(0.5)
    assert row["d_ratio_mean"] == pytest.approx(0.25)
    assert stats.loc[1, "open"] == 1


def test_level_stats_empty():
    stats = EpochTracker(alpha=8).level_stats(mu=1.0)
    assert stats.empty
    assert "mu_short_fraction" in stats.columns


def test_short_epoch_violations():
    levels = pd.DataFrame(
        {"T": [200, 1000, 50], "mu_short_fraction": [0.9, 0.9, 1.0]},
        index=pd.Index([0, 1, 2], name="level"),
    )
    # 0.25 + 40·10/T: level 0 → 2.25, level 1 → 0.65, level 2 は T < 100
    assert short_epoch_violations(levels, capacity=1024) == [1]


def test_settle_and_luby_stats():
    s = SettleStats()
    s.record(1, 2, 1)
    s.record(1, 1, 3)
    s.record(2, 1, 1)
    out = s.to_dict()
    assert out["invocations"] == 3
    assert out["max_repetitions"] == 2
    assert out["repetition_histogram"] == {"1": 2, "2": 1}
    assert out["per_level"]["1"] == {"invocations": 2, "matched": 4}

    lb = LubyStats()
    lb.record(3)
    lb.record(5)
    assert lb.to_dict() == {"calls": 2, "max_rounds": 5, "total_rounds": 8}
