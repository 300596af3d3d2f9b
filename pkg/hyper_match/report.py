from __future__ import annotations

"""統計ドキュメントの組み立て。

フィールド順は固定（差分比較のため）:
config, batches, updates, rebuilds, total_work, amortized_work_per_update, max_depth,
depth_series, work_series, levels, settle, luby, d_bound_exceeded
"""

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Any, DefaultDict, Dict, List

import pandas as pd

from .config import Config
from .cost import CostMeter
from .epochs import EpochTracker


@dataclass
class SettleStats:
    """grand-random-settle の呼び出し統計。"""

    invocations: DefaultDict[int, int] = field(default_factory=lambda: defaultdict(int))
    matched: DefaultDict[int, int] = field(default_factory=lambda: defaultdict(int))
    repetitions: List[int] = field(default_factory=list)

    def record(self, level: int, repetitions: int, matched: int) -> None:
        self.invocations[level] += 1
        self.matched[level] += matched
        self.repetitions.append(repetitions)

    @property
    def total_invocations(self) -> int:
        return len(self.repetitions)

    def histogram(self) -> Dict[str, int]:
        counts = Counter(self.repetitions)
        return {str(k): counts[k] for k in sorted(counts)}

    def to_dict(self) -> Dict[str, Any]:
        reps = self.repetitions
        return {
            "invocations": self.total_invocations,
            "mean_repetitions": (sum(reps) / len(reps)) if reps else 0.0,
            "max_repetitions": max(reps) if reps else 0,
            "repetition_histogram": self.histogram(),
            "per_level": {
                str(level): {"invocations": self.invocations[level], "matched": self.matched[level]}
                for level in sorted(self.invocations)
            },
        }


@dataclass
class LubyStats:
    calls: int = 0
    max_rounds: int = 0
    total_rounds: int = 0

    def record(self, rounds: int) -> None:
        self.calls += 1
        self.total_rounds += rounds
        self.max_rounds = max(self.max_rounds, rounds)

    def to_dict(self) -> Dict[str, int]:
        return {"calls": self.calls, "max_rounds": self.max_rounds, "total_rounds": self.total_rounds}


def _levels_dict(frame: pd.DataFrame) -> Dict[str, Dict[str, Any]]:
    out: Dict[str, Dict[str, Any]] = {}
    for level, row in frame.iterrows():
        out[str(int(level))] = {
            "T": int(row["T"]),
            "natural": int(row["natural"]),
            "induced": int(row["induced"]),
            "open": int(row["open"]),
            "mu_short": int(row["mu_short"]),
            "mu_short_fraction": float(row["mu_short_fraction"]),
            "classification": str(row["classification"]),
            "d_ratio_max": float(row["d_ratio_max"]),
            "d_ratio_mean": float(row["d_ratio_mean"]),
        }
    return out


def short_epoch_violations(levels: pd.DataFrame, capacity: int, min_epochs: int = 100) -> List[int]:
    """T_ℓ ≥ min_epochs かつ μ-short 比率 > 0.25 + 40·log₂N / T_ℓ のレベルを返す。"""

    log_n = math.log2(max(2, capacity))
    bad = []
    for level, row in levels.iterrows():
        t = int(row["T"])
        if t >= min_epochs and float(row["mu_short_fraction"]) > 0.25 + 40.0 * log_n / t:
            bad.append(int(level))
    return bad


def build_report(
    config: Config,
    meter: CostMeter,
    epochs: EpochTracker,
    settle: SettleStats,
    luby: LubyStats,
    *,
    batches: int,
    updates: int,
    rebuilds: int,
) -> Dict[str, Any]:
    """統計ドキュメント（JSON 化可能な dict）を返す。"""

    series = meter.series()
    depths = [int(x) for x in series["depth"].tolist()]
    works = [int(x) for x in series["work"].tolist()]
    return {
        "config": config.to_dict(),
        "batches": batches,
        "updates": updates,
        "rebuilds": rebuilds,
        "total_work": int(meter.total_work),
        "amortized_work_per_update": (meter.total_work / updates) if updates else 0.0,
        "max_depth": max(depths) if depths else 0,
        "depth_series": depths,
        "work_series": works,
        "levels": _levels_dict(epochs.level_stats(config.mu)),
        "settle": settle.to_dict(),
        "luby": luby.to_dict(),
        "d_bound_exceeded": epochs.d_bound_exceeded,
    }
