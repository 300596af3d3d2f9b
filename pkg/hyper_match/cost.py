from __future__ import annotations

"""PRAM の work/depth コストモデル（論理カウンタ）。

- work: 課金された全プリミティブの総和
- depth: 逐次ラウンドは加算、parallel() 内の並列分岐は最大値
物理スレッド数とは無関係に決まる。
"""

import contextlib
from dataclasses import dataclass
from typing import Iterator, List

import pandas as pd

from .config import CostParams, ceil_log2
from .errors import NoOpenBatch


@dataclass
class BatchCost:
    """1 バッチ分のコスト。"""

    index: int
    work: int
    depth: int


class _Frame:
    """深さの集約フレーム。parallel=True なら max、それ以外は和。"""

    __slots__ = ("parallel", "depth")

    def __init__(self, parallel: bool) -> None:
        self.parallel = parallel
        self.depth = 0

    def add(self, depth: int) -> None:
        if self.parallel:
            self.depth = max(self.depth, depth)
        else:
            self.depth += depth


class CostMeter:
    """work/depth カウンタ。バッチ単位で開閉する。"""

    def __init__(self, log_n: int, costs: CostParams = CostParams()) -> None:
        self.log_n = max(1, int(log_n))
        self.costs = costs
        self.total_work = 0
        self.history: List[BatchCost] = []
        self._stack: List[_Frame] = []
        self._batch_work = 0

    # バッチ ------------------------------------------------------------------

    @property
    def in_batch(self) -> bool:
        return bool(self._stack)

    def begin_batch(self) -> None:
        """新しいバッチを開く（開いているバッチがあれば破棄せず続行）。"""

        if not self._stack:
            self._stack = [_Frame(parallel=False)]
            self._batch_work = 0

    def end_batch(self) -> BatchCost:
        """バッチを閉じ、そのコストを履歴に積んで返す。"""

        if not self._stack:
            raise NoOpenBatch("end_batch called without an open batch")
        root = self._stack[0]
        cost = BatchCost(index=len(self.history) + 1, work=self._batch_work, depth=root.depth)
        self.history.append(cost)
        self._stack = []
        self._batch_work = 0
        return cost

    @property
    def batch_work(self) -> int:
        return self._batch_work

    @property
    def batch_depth(self) -> int:
        """開いているバッチの現時点の深さ（未閉鎖フレームも畳み込む）。"""

        depth = 0
        for frame in reversed(self._stack):
            if frame.parallel:
                depth = max(frame.depth, depth)
            else:
                depth = frame.depth + depth
        return depth

    # 課金 --------------------------------------------------------------------

    def charge(self, work: int, depth: int = 0) -> None:
        """work を加算し、depth > 0 なら深さ depth のラウンドを 1 つ積む。"""

        if not self._stack:
            raise NoOpenBatch("charge called outside of a batch")
        self.total_work += int(work)
        self._batch_work += int(work)
        if depth:
            self._stack[-1].add(int(depth))

    def dict_op(self, k: int) -> None:
        """並列辞書 1 回分: work k·⌈log₂N⌉、depth ⌈log₂N⌉。"""

        c = self.costs
        self.charge(k * self.log_n * c.dict_work, self.log_n * c.dict_depth)

    def scan(self, items: int, width: int) -> None:
        """items 個の独立な長さ width の走査（接頭辞和で depth ⌈log₂(width+1)⌉）。"""

        if items <= 0:
            return
        c = self.costs
        self.charge(items * width * c.scan_work, max(1, ceil_log2(width + 1)) * c.scan_depth)

    def luby_round(self, remaining: int, rank: int) -> None:
        """Luby の 1 ラウンド: work |remaining|·r、depth ⌈log₂N⌉。"""

        c = self.costs
        self.charge(remaining * rank * c.luby_work, self.log_n * c.luby_depth)

    @contextlib.contextmanager
    def parallel(self) -> Iterator[None]:
        """並列ラウンド。内部の各課金（分岐）の深さは最大値で合成される。"""

        self._push(parallel=True)
        try:
            yield
        finally:
            self._pop()

    @contextlib.contextmanager
    def sequential(self) -> Iterator[None]:
        """parallel() 内の 1 分岐として逐次に積む区間。"""

        self._push(parallel=False)
        try:
            yield
        finally:
            self._pop()

    def _push(self, parallel: bool) -> None:
        if not self._stack:
            raise NoOpenBatch("parallel section outside of a batch")
        self._stack.append(_Frame(parallel))

    def _pop(self) -> None:
        frame = self._stack.pop()
        if self._stack:
            self._stack[-1].add(frame.depth)

    # 集計 --------------------------------------------------------------------

    def series(self) -> pd.DataFrame:
        """バッチ毎の work/depth を DataFrame で返す（index=batch）。"""

        frame = pd.DataFrame(
            [{"batch": c.index, "work": c.work, "depth": c.depth} for c in self.history],
            columns=["batch", "work", "depth"],
        )
        return frame.set_index("batch")
