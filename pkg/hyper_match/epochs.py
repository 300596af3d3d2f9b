from __future__ import annotations

"""エポック（辺がマッチに留まる連続区間）の記録と集計。

- natural: 敵対者の削除で終了
- induced: アルゴリズム（蹴り出し・再レベル付け・再構築）で終了
- open: まだマッチ中
継続長は「エポック中に D(e) に届いた削除数 + 1」で近似する。
"""

import enum
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

import pandas as pd
from loguru import logger

from .edges import EdgeKey, format_edge
from .errors import CloseUnopened, DoubleOpen, InvariantBroken


class Termination(str, enum.Enum):
    NATURAL = "natural"
    INDUCED = "induced"
    OPEN = "open"


@dataclass
class EpochRecord:
    edge: EdgeKey
    level: int
    created_at: int
    ended_at: Optional[int] = None
    termination: Termination = Termination.OPEN
    d_size_at_creation: int = 0
    d_hits: int = 0

    @property
    def duration(self) -> int:
        """継続長の近似 d_hits + 1。"""

        return self.d_hits + 1

    @property
    def duration_is_proxy(self) -> bool:
        # natural のときだけ実際の継続長と一致する
        return self.termination is not Termination.NATURAL


_FRAME_COLUMNS = [
    "edge",
    "level",
    "created_at",
    "ended_at",
    "termination",
    "d_size_at_creation",
    "d_hits",
    "duration",
    "duration_is_proxy",
]


class EpochTracker:
    """マッチ辺ごとのエポックを開閉し、レベル別統計を出す。"""

    def __init__(self, alpha: int) -> None:
        self.alpha = alpha
        self.records: List[EpochRecord] = []
        self._open: Dict[EdgeKey, EpochRecord] = {}
        self.d_bound_exceeded = 0
        self.temp_deletions = 0

    def open(self, edge: EdgeKey, level: int, d_size: int, batch: int) -> EpochRecord:
        if edge in self._open:
            raise DoubleOpen(f"epoch already open for {format_edge(edge)}")
        record = EpochRecord(edge=edge, level=level, created_at=batch, d_size_at_creation=d_size)
        self.records.append(record)
        self._open[edge] = record
        bound = self.alpha ** (level + 1)
        if d_size > bound:
            self.d_bound_exceeded += 1
            logger.warning("D set of {} at level {} has {} edges (> {})", format_edge(edge), level, d_size, bound)
        return record

    def close(self, edge: EdgeKey, termination: Termination, batch: int) -> EpochRecord:
        record = self._open.pop(edge, None)
        if record is None:
            raise CloseUnopened(f"no open epoch for {format_edge(edge)}")
        if termination is Termination.OPEN:
            raise InvariantBroken("close requires natural or induced termination")
        record.termination = termination
        record.ended_at = batch
        return record

    def close_all(self, termination: Termination, batch: int) -> int:
        """開いている全エポックを閉じる（再構築時）。閉じた数を返す。"""

        edges = sorted(self._open)
        for e in edges:
            self.close(e, termination, batch)
        return len(edges)

    def record_d_hit(self, parent: EdgeKey, hits: int = 1) -> None:
        """D(parent) 内の辺が敵対者に削除されたことを記録する。"""

        record = self._open.get(parent)
        if record is None:
            raise InvariantBroken(f"D hit on {format_edge(parent)} without an open epoch")
        record.d_hits += hits

    def record_parked(self, count: int) -> None:
        """一時削除した辺の数を累計する（再構築をまたいで保持）。"""

        self.temp_deletions += count

    def is_open(self, edge: EdgeKey) -> bool:
        return edge in self._open

    @property
    def open_count(self) -> int:
        return len(self._open)

    # 集計 --------------------------------------------------------------------

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for rec in self.records:
            row = asdict(rec)
            row["termination"] = rec.termination.value
            row["duration"] = rec.duration
            row["duration_is_proxy"] = rec.duration_is_proxy
            rows.append(row)
        return pd.DataFrame(rows, columns=_FRAME_COLUMNS)

    def level_stats(self, mu: float) -> pd.DataFrame:
        """レベル別の T_ℓ / natural / induced / open / μ-short と D 比率。

        μ-short: 継続長 ≤ μ·α^ℓ のエポック。
        d_ratio: d_size_at_creation / α^{ℓ+1}。
        """

        columns = [
            "T",
            "natural",
            "induced",
            "open",
            "mu_short",
            "mu_short_fraction",
            "classification",
            "d_ratio_max",
            "d_ratio_mean",
        ]
        frame = self.to_frame()
        if frame.empty:
            return pd.DataFrame(columns=columns, index=pd.Index([], name="level"))

        alpha = float(self.alpha)
        frame["mu_short"] = frame["duration"] <= mu * alpha ** frame["level"].astype(float)
        frame["d_ratio"] = frame["d_size_at_creation"] / alpha ** (frame["level"].astype(float) + 1.0)
        grouped = frame.groupby("level")
        out = pd.DataFrame(
            {
                "T": grouped.size(),
                "natural": grouped["termination"].apply(lambda s: int((s == Termination.NATURAL.value).sum())),
                "induced": grouped["termination"].apply(lambda s: int((s == Termination.INDUCED.value).sum())),
                "open": grouped["termination"].apply(lambda s: int((s == Termination.OPEN.value).sum())),
                "mu_short": grouped["mu_short"].sum().astype(int),
                "d_ratio_max": grouped["d_ratio"].max(),
                "d_ratio_mean": grouped["d_ratio"].mean(),
            }
        )
        out["mu_short_fraction"] = out["mu_short"] / out["T"]
        out["classification"] = ["induced" if i > n else "natural" for i, n in zip(out["induced"], out["natural"])]
        out.index.name = "level"
        return out[columns]
