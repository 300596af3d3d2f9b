from __future__ import annotations

"""バッチ操作の集合（並列辞書のインタフェースとコスト契約）。

- insert(items) / erase(items) / retrieve()
- 1 回の呼び出し = 1 並列ラウンド: work k·⌈log₂N⌉、depth ⌈log₂N⌉
- 内部はハッシュ集合。並列辞書そのものは再現せず、課金だけを行う。
"""

from typing import FrozenSet, Generic, Hashable, Iterable, Iterator, List, Optional, Set, TypeVar

from .cost import CostMeter
from .errors import EraseMissing


T = TypeVar("T", bound=Hashable)


class BatchSet(Generic[T]):
    """課金付きの集合。meter が None の場合は課金しない。"""

    __slots__ = ("_items", "_meter")

    def __init__(self, meter: Optional[CostMeter] = None, items: Iterable[T] = ()) -> None:
        self._meter = meter
        self._items: Set[T] = set(items)

    def insert(self, items: Iterable[T]) -> None:
        """items をまとめて挿入する（既存要素は無視）。"""

        batch = list(items)
        if not batch:
            return
        if self._meter is not None:
            self._meter.dict_op(len(batch))
        self._items.update(batch)

    def erase(self, items: Iterable[T]) -> None:
        """items をまとめて削除する。存在しない要素は内部不整合として扱う。"""

        batch = list(items)
        if not batch:
            return
        missing = [x for x in batch if x not in self._items]
        if missing:
            raise EraseMissing(f"erase of absent items: {missing[:5]}")
        if self._meter is not None:
            self._meter.dict_op(len(batch))
        self._items.difference_update(batch)

    def retrieve(self) -> List[T]:
        """全要素を返す（work |S|·⌈log₂N⌉、depth ⌈log₂N⌉）。"""

        if self._meter is not None:
            self._meter.dict_op(len(self._items))
        return list(self._items)

    def clear(self) -> List[T]:
        """全要素を取り出して空にする（retrieve + erase 相当の 2 ラウンド）。"""

        items = self.retrieve()
        self.erase(items)
        return items

    def snapshot(self) -> FrozenSet[T]:
        """課金なしの読み取り専用スナップショット（検証用）。"""

        return frozenset(self._items)

    def __contains__(self, item: object) -> bool:
        return item in self._items

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[T]:
        return iter(self._items)

    def __repr__(self) -> str:
        return f"BatchSet({sorted(self._items, key=repr)!r})"
