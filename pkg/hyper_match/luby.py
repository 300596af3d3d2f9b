from __future__ import annotations

"""Luby 方式の並列極大マッチング（静的）。

各ラウンドで辺に 64bit 優先度を振り、全端点で最大（頂点ごとの最大値で判定）の辺を
採用し、採用辺と頂点を共有する辺を取り除く。同値は EdgeKey 順で決着する。
"""

from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .config import DEFAULT_C_LUBY, ceil_log2
from .cost import CostMeter
from .edges import EdgeKey
from .errors import RoundCapExceeded


_PRIORITY_HIGH = np.iinfo(np.uint64).max


def round_cap(edge_count: int, c_luby: int = DEFAULT_C_LUBY) -> int:
    """ラウンド上限 c_luby·⌈log₂(|edges|+2)⌉。"""

    return int(c_luby) * max(1, ceil_log2(edge_count + 2))


def _local_maxima(edges: Sequence[EdgeKey], priorities: np.ndarray) -> np.ndarray:
    """(優先度, 位置) で全端点の最大となる辺のマスクを返す。"""

    m = len(edges)
    # 優先度 → 位置の辞書式で全順序を付ける
    order = np.lexsort((np.arange(m), priorities))
    rank = np.empty(m, dtype=np.int64)
    rank[order] = np.arange(m, dtype=np.int64)

    vertex_ids = {}
    edge_idx: List[int] = []
    vert_idx: List[int] = []
    for i, e in enumerate(edges):
        for v in e:
            edge_idx.append(i)
            vert_idx.append(vertex_ids.setdefault(v, len(vertex_ids)))
    e_arr = np.asarray(edge_idx, dtype=np.int64)
    v_arr = np.asarray(vert_idx, dtype=np.int64)

    best = np.full(len(vertex_ids), -1, dtype=np.int64)
    np.maximum.at(best, v_arr, rank[e_arr])
    losing = (best[v_arr] != rank[e_arr]).astype(np.int64)
    return np.bincount(e_arr, weights=losing, minlength=m) == 0


def luby_matching_with_rounds(
    edges: Iterable[EdgeKey],
    rng: np.random.Generator,
    *,
    meter: Optional[CostMeter] = None,
    rank: int = 2,
    c_luby: int = DEFAULT_C_LUBY,
) -> Tuple[List[EdgeKey], int]:
    """極大マッチングと消費ラウンド数を返す。

    入力順ではなく EdgeKey の昇順で優先度を割り当てるため、同じ seed と同じ辺集合なら
    結果は一致する。
    """

    remaining = sorted(set(edges))
    cap = round_cap(len(remaining), c_luby)
    matching: List[EdgeKey] = []
    rounds = 0
    while remaining:
        if rounds >= cap:
            raise RoundCapExceeded(f"luby did not finish within {cap} rounds ({len(remaining)} edges left)")
        rounds += 1
        if meter is not None:
            meter.luby_round(len(remaining), rank)
        priorities = rng.integers(0, _PRIORITY_HIGH, size=len(remaining), dtype=np.uint64, endpoint=True)
        winners = _local_maxima(remaining, priorities)
        taken = set()
        for e, won in zip(remaining, winners):
            if won:
                matching.append(e)
                taken.update(e)
        remaining = [e for e in remaining if taken.isdisjoint(e)]
    logger.debug("luby: {} edges matched in {} rounds", len(matching), rounds)
    return sorted(matching), rounds


def luby_maximal_matching(
    edges: Iterable[EdgeKey],
    rng: np.random.Generator,
    *,
    meter: Optional[CostMeter] = None,
    rank: int = 2,
    c_luby: int = DEFAULT_C_LUBY,
) -> List[EdgeKey]:
    """edges 上の極大マッチング（頂点素）を返す。"""

    matching, _ = luby_matching_with_rounds(edges, rng, meter=meter, rank=rank, c_luby=c_luby)
    return matching
