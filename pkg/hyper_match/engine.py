from __future__ import annotations

"""バッチ動的の極大マッチング・エンジン。

1 バッチの処理順:
1) 非マッチ辺・一時削除辺の削除
2) マッチ辺の削除 → レベル L..0 の process-level（settle を含む）
3) 挿入辺と再挿入待ち辺の挿入（自由辺は Luby で静的マッチング）
最後に N を超えていれば N を倍増して全構造を作り直す。
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .batch_set import BatchSet
from .config import Config
from .cost import CostMeter
from .edges import EdgeKey, EdgeLocation, Vertex, canonical_edge, format_edge
from .epochs import EpochTracker, Termination
from .errors import DuplicateEdge, InvariantBroken, MatchedEdgePassed, NotMatched, UnknownEdge
from .leveling import UNMATCHED_LEVEL, LevelingScheme
from .luby import luby_matching_with_rounds
from .report import LubyStats, SettleStats, build_report
from .settle import RandomSettler


# エンジン側 PRNG のストリーム識別子（生成器側とは別系列）
ENGINE_STREAM = 0x4D41


@dataclass
class UpdateBatch:
    """敵対者の 1 ラウンド分の更新（頂点列のまま受け取る）。"""

    insertions: List[Sequence[int]] = field(default_factory=list)
    deletions: List[Sequence[int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.insertions) + len(self.deletions)


@dataclass
class BatchReport:
    """1 バッチの結果。matched_added / matched_removed は正味の差分。"""

    index: int
    matched_added: List[EdgeKey] = field(default_factory=list)
    matched_removed: List[EdgeKey] = field(default_factory=list)
    edge_levels: Dict[EdgeKey, int] = field(default_factory=dict)
    level_changes: List[Tuple[Vertex, int, int]] = field(default_factory=list)
    work: int = 0
    depth: int = 0
    settle: Dict[int, int] = field(default_factory=dict)
    rebuilt: bool = False

    def deltas(self) -> List[Dict[str, Any]]:
        """差分レコード（キー順固定）。削除 → 追加の順、それぞれ EdgeKey 昇順。"""

        out = []
        for change, edges in (("unmatched", self.matched_removed), ("matched", self.matched_added)):
            for e in edges:
                out.append({"batch": self.index, "change": change, "edge": list(e), "level": self.edge_levels[e]})
        return out


class UndecidedIndex:
    """レベル毎の undecided 頂点集合。"""

    def __init__(self, meter: CostMeter, levels: int) -> None:
        self._sets: List[BatchSet] = [BatchSet(meter) for _ in range(levels + 1)]
        self._level: Dict[Vertex, int] = {}

    def add(self, pairs: Mapping[Vertex, int]) -> None:
        grouped: Dict[int, List[Vertex]] = {}
        for v, level in pairs.items():
            if v in self._level:
                continue
            if level < 0:
                raise InvariantBroken(f"undecided vertex {v} must have a level >= 0, got {level}")
            grouped.setdefault(level, []).append(v)
            self._level[v] = level
        for level, items in grouped.items():
            self._sets[level].insert(items)

    def discard(self, vertices: Iterable[Vertex]) -> None:
        grouped: Dict[int, List[Vertex]] = {}
        for v in vertices:
            level = self._level.pop(v, None)
            if level is not None:
                grouped.setdefault(level, []).append(v)
        for level, items in grouped.items():
            self._sets[level].erase(items)

    def at(self, level: int) -> List[Vertex]:
        if not self._sets[level]:
            return []
        return sorted(self._sets[level].retrieve())

    def __contains__(self, v: object) -> bool:
        return v in self._level

    def __len__(self) -> int:
        return len(self._level)


class DynamicMatcher:
    """ランク r ハイパーグラフの極大マッチングをバッチ更新で維持する。"""

    def __init__(self, config: Optional[Config] = None) -> None:
        self.config = config or Config()
        self.meter = CostMeter(self.config.log_n, self.config.costs)
        self.rng = np.random.default_rng(np.random.SeedSequence([int(self.config.seed), ENGINE_STREAM]))
        self.epochs = EpochTracker(self.config.alpha)
        self.settle_stats = SettleStats()
        self.luby_stats = LubyStats()
        self.settler = RandomSettler(self)
        self.batch_index = 0
        self.updates = 0
        self.rebuilds = 0
        self._edge_before: Dict[EdgeKey, Tuple[bool, int]] = {}
        self._level_before: Dict[Vertex, int] = {}
        self._batch_settle: Dict[int, int] = {}
        self._reset_structures()

    def _reset_structures(self) -> None:
        self.scheme = LevelingScheme(self.config, self.meter)
        self.undecided = UndecidedIndex(self.meter, self.config.L)
        self.pending: BatchSet = BatchSet(self.meter)

    # 参照 --------------------------------------------------------------------

    @property
    def L(self) -> int:
        return self.scheme.L

    def matching(self) -> List[EdgeKey]:
        return self.scheme.matched_edges()

    def vertex_cover(self) -> List[Vertex]:
        """マッチ辺の端点の和集合（極大なら頂点被覆）。"""

        return sorted({u for e in self.matching() for u in e})

    def level_of(self, v: Vertex) -> int:
        return self.scheme.level_of(v)

    def locate(self, vertices: Sequence[int]) -> EdgeLocation:
        return self.scheme.locate(canonical_edge(vertices, self.config.r))

    def active_edges(self) -> List[EdgeKey]:
        return sorted(self.scheme.edges)

    def temp_deleted_edges(self) -> List[EdgeKey]:
        return sorted(self.scheme.temp_parent)

    def report(self) -> Dict[str, Any]:
        """統計ドキュメントを返す。"""

        return build_report(
            self.config,
            self.meter,
            self.epochs,
            self.settle_stats,
            self.luby_stats,
            batches=self.batch_index,
            updates=self.updates,
            rebuilds=self.rebuilds,
        )

    # バッチ ------------------------------------------------------------------

    def _validate(self, batch: UpdateBatch) -> Tuple[List[EdgeKey], List[EdgeKey]]:
        """状態を変更する前にバッチ全体を検証する。"""

        r = self.config.r
        deletions = [canonical_edge(d, r) for d in batch.deletions]
        insertions = [canonical_edge(i, r) for i in batch.insertions]
        deleted = set()
        for e in deletions:
            if e in deleted:
                raise UnknownEdge(f"edge {format_edge(e)} deleted twice in one batch")
            if not self.scheme.locate(e).present:
                raise UnknownEdge(f"deletion of absent edge {format_edge(e)}")
            deleted.add(e)
        inserted = set()
        for e in insertions:
            if e in inserted:
                raise DuplicateEdge(f"edge {format_edge(e)} inserted twice in one batch")
            if e not in deleted and self.scheme.locate(e).present:
                raise DuplicateEdge(f"insertion of present edge {format_edge(e)}")
            inserted.add(e)
        return deletions, insertions

    def apply_batch(self, batch: UpdateBatch) -> BatchReport:
        """1 バッチを適用し BatchReport を返す。不正なバッチは何も変更せず InputError。"""

        deletions, insertions = self._validate(batch)
        self.batch_index += 1
        self.updates += len(deletions) + len(insertions)
        self._edge_before = {}
        self._level_before = {}
        self._batch_settle = {}
        self.meter.begin_batch()

        matched = [e for e in deletions if e in self.scheme.edges and self.scheme.edges[e].matched]
        matched_set = set(matched)
        self.delete_unmatched([e for e in deletions if e not in matched_set])
        self.delete_matched(matched)
        self.sweep()

        reinserted = self.pending.clear()
        self.insert_edges(sorted(set(insertions) | set(reinserted)))
        rebuilt = self.maybe_rebuild()

        cost = self.meter.end_batch()
        return self._build_report(cost.work, cost.depth, rebuilt)

    def delete_unmatched(self, edges: Sequence[EdgeKey]) -> None:
        """非マッチ Active 辺は構造から外し、一時削除辺は親の D 集合から外す。"""

        if not edges:
            return
        scheme = self.scheme
        temp = [e for e in edges if e in scheme.temp_parent]
        active = [e for e in edges if e not in scheme.temp_parent]
        for e in active:
            if scheme.edges[e].matched:
                raise MatchedEdgePassed(f"matched edge {format_edge(e)} routed to unmatched deletion")
        with self.meter.parallel():
            with self.meter.sequential():
                for parent, items in scheme.unpark(temp).items():
                    self.epochs.record_d_hit(parent, len(items))
            with self.meter.sequential():
                scheme.detach_edges(active)

    def delete_matched(self, edges: Sequence[EdgeKey]) -> None:
        """マッチ辺を削除し、端点を undecided、D(e) を再挿入待ちにする。"""

        if not edges:
            return
        for e in edges:
            state = self.scheme.edges.get(e)
            if state is None or not state.matched:
                raise NotMatched(f"edge {format_edge(e)} is not matched")
        self.release(edges, Termination.NATURAL)
        self.undecided.add({u: self.scheme.level_of(u) for e in edges for u in e})
        self.scheme.detach_edges(edges)

    def sweep(self) -> None:
        """process_level(L..0)。終了後は undecided なし・全 S_ℓ が空。"""

        for level in range(self.L, -1, -1):
            self.process_level(level)
        if len(self.undecided) or not self.scheme.rise.all_empty():
            raise InvariantBroken("undecided vertices or rising vertices remain after the level sweep")

    def process_level(self, level: int) -> None:
        scheme = self.scheme
        undecided = self.undecided.at(level)
        if undecided:
            free = set()
            with self.meter.parallel():
                for u in undecided:
                    for e in scheme.vertices[u].owned.retrieve():
                        if not any(scheme.is_matched_vertex(w) for w in e):
                            free.add(e)
            matched = self._luby(free)
            lifted_set = {u for e in matched for u in e}
            lifted = sorted(lifted_set)
            dropped = [u for u in undecided if u not in lifted_set]
            self.undecided.discard(lifted + dropped)
            moves = {u: 0 for u in lifted}
            moves.update({u: UNMATCHED_LEVEL for u in dropped})
            self.set_levels(moves)
            self.mark_matched(matched)

        while not scheme.rise.is_empty(level):
            self.settler.settle(scheme.rise.members(level), level)

    def insert_edges(self, edges: Sequence[EdgeKey]) -> None:
        """辺を挿入する。全端点が自由な辺は Luby でマッチングしてレベル 0 に置く。"""

        batch = sorted(set(edges))
        if not batch:
            return
        scheme = self.scheme
        for e in batch:
            if scheme.locate(e).present:
                raise DuplicateEdge(f"insertion of present edge {format_edge(e)}")
        scheme.ensure_vertices(u for e in batch for u in e)
        self.meter.scan(len(batch), self.config.r)
        free = [e for e in batch if not any(scheme.is_matched_vertex(u) for u in e)]
        matched = self._luby(free)
        self.set_levels({u: 0 for e in matched for u in e})
        scheme.attach_edges(batch)
        self.mark_matched(matched)

    def maybe_rebuild(self) -> bool:
        """頂点数 + 更新数が N を超えたら N を倍増して全構造を作り直す。"""

        counter = len(self.scheme.vertices) + self.updates
        if counter <= self.config.N:
            return False
        old_capacity = self.config.N
        scheme = self.scheme
        for e in scheme.matched_edges():
            self._note_edge(e)
        for v in scheme.vertices:
            self._note_vertex(v)
        edges = sorted(set(scheme.edges) | set(scheme.temp_parent))
        vertices = sorted(scheme.vertices)
        self.epochs.close_all(Termination.INDUCED, self.batch_index)

        self.config = self.config.doubled(counter)
        self.meter.log_n = max(1, self.config.log_n)
        self._reset_structures()
        self.scheme.ensure_vertices(vertices)
        self.insert_edges(edges)
        self.rebuilds += 1
        logger.info(
            "rebuild: N {} -> {} (L={}), {} edges reinserted", old_capacity, self.config.N, self.L, len(edges)
        )
        return True

    # 手続きの部品（settle からも使う） --------------------------------------

    def release(self, edges: Sequence[EdgeKey], termination: Termination) -> None:
        """マッチから外し、D 集合の中身を再挿入待ちに移す。"""

        if not edges:
            return
        drained: List[EdgeKey] = []
        with self.meter.parallel():
            for e in edges:
                with self.meter.sequential():
                    self._note_edge(e)
                    state = self.scheme.edges[e]
                    self.epochs.close(e, termination, self.batch_index)
                    state.matched = False
                    for u in e:
                        self.scheme.vertices[u].matched = None
                    drained.extend(self.scheme.drain(e))
        self.pending.insert(drained)

    def mark_matched(self, edges: Sequence[EdgeKey]) -> None:
        """辺をマッチに加えエポックを開く（端点のレベル設定は済んでいること）。"""

        for e in edges:
            self._note_edge(e)
            state = self.scheme.edges[e]
            if any(self.scheme.level_of(u) != state.level for u in e):
                raise InvariantBroken(f"endpoints of {format_edge(e)} are not at level {state.level}")
            state.matched = True
            for u in e:
                self.scheme.vertices[u].matched = e
            self.epochs.open(e, state.level, len(state.deleted), self.batch_index)

    def set_levels(self, moves: Mapping[Vertex, int]) -> None:
        for v in moves:
            self._note_vertex(v)
        self.scheme.set_level_many(dict(moves))

    def record_settle(self, level: int, repetitions: int, matched: int) -> None:
        self.settle_stats.record(level, repetitions, matched)
        self._batch_settle[level] = self._batch_settle.get(level, 0) + 1

    def _luby(self, edges: Iterable[EdgeKey]) -> List[EdgeKey]:
        batch = sorted(set(edges))
        if not batch:
            return []
        matched, rounds = luby_matching_with_rounds(
            batch, self.rng, meter=self.meter, rank=self.config.r, c_luby=self.config.c_luby
        )
        self.luby_stats.record(rounds)
        return matched

    # 差分 --------------------------------------------------------------------

    def _note_edge(self, e: EdgeKey) -> None:
        if e not in self._edge_before:
            state = self.scheme.edges.get(e)
            matched = state is not None and state.matched
            self._edge_before[e] = (matched, state.level if state is not None else 0)

    def _note_vertex(self, v: Vertex) -> None:
        if v not in self._level_before:
            self._level_before[v] = self.scheme.level_of(v)

    def _build_report(self, work: int, depth: int, rebuilt: bool) -> BatchReport:
        report = BatchReport(index=self.batch_index, work=work, depth=depth, rebuilt=rebuilt)
        for e in sorted(self._edge_before):
            was_matched, old_level = self._edge_before[e]
            state = self.scheme.edges.get(e)
            now_matched = state is not None and state.matched
            if now_matched and not was_matched:
                report.matched_added.append(e)
                report.edge_levels[e] = state.level
            elif was_matched and not now_matched:
                report.matched_removed.append(e)
                report.edge_levels[e] = old_level
        for v in sorted(self._level_before):
            new = self.scheme.level_of(v)
            if new != self._level_before[v]:
                report.level_changes.append((v, self._level_before[v], new))
        report.settle = dict(sorted(self._batch_settle.items()))
        return report
