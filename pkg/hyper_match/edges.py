from __future__ import annotations

"""ハイパーエッジの同一性と所在。

- EdgeKey: 重複なし・昇順の頂点タプル
- EdgeLocation: Active / TempDeleted(parent) / Absent
"""

import enum
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

from .errors import EmptyEdge, RankExceeded


Vertex = int
EdgeKey = Tuple[int, ...]


def canonical_edge(vertices: Iterable[int], r: int) -> EdgeKey:
    """頂点列を正規化した EdgeKey に変換する。

    例: [3, 1, 2] → (1, 2, 3)、[5, 5] → (5,)
    """

    key = tuple(sorted({int(v) for v in vertices}))
    if not key:
        raise EmptyEdge("hyperedge must have at least one vertex")
    if len(key) > r:
        raise RankExceeded(f"hyperedge {key} has {len(key)} distinct vertices, rank is {r}")
    return key


def shares_vertex(a: EdgeKey, b: EdgeKey) -> bool:
    return not set(a).isdisjoint(b)


def format_edge(e: EdgeKey) -> str:
    return "(" + ",".join(str(v) for v in e) + ")"


class LocationKind(str, enum.Enum):
    ACTIVE = "active"
    TEMP_DELETED = "temp_deleted"
    ABSENT = "absent"


@dataclass(frozen=True)
class EdgeLocation:
    """エッジの所在。TEMP_DELETED のときだけ parent（D 集合を持つマッチ辺）を持つ。"""

    kind: LocationKind
    parent: Optional[EdgeKey] = None

    @property
    def present(self) -> bool:
        return self.kind is not LocationKind.ABSENT


ACTIVE = EdgeLocation(LocationKind.ACTIVE)
ABSENT = EdgeLocation(LocationKind.ABSENT)


def temp_deleted(parent: EdgeKey) -> EdgeLocation:
    return EdgeLocation(LocationKind.TEMP_DELETED, parent)
