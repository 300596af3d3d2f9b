from __future__ import annotations

"""レベル付けスキーム（頂点/辺の状態、所有、A 集合、上昇候補 S_ℓ）。

不変条件:
- ℓ(v) = −1 ⇔ v は非マッチ（バッチ処理中の undecided 頂点を除く）
- マッチ辺 e の端点はすべて ℓ(e) にいる
- 非マッチ辺 e は ℓ(e) = max_{v∈e} ℓ(v)
- e は所有者 O(e) の O 集合と、他の各端点 u の A(u, ℓ(e)) に入る
- v ∈ S_ℓ ⇔ ℓ(v) < ℓ かつ õ_{v,ℓ} ≥ α^ℓ
"""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import DefaultDict, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .batch_set import BatchSet
from .config import Config
from .cost import CostMeter
from .edges import ABSENT, ACTIVE, EdgeKey, EdgeLocation, Vertex, temp_deleted
from .errors import InvariantBroken, LevelOutOfRange, MatchedEdgePassed, NotEndpoint, NotMaxLevel, UnknownEdge


UNMATCHED_LEVEL = -1

# 集合の宛先: (頂点, "N") / (頂点, "O") / (頂点, レベル)
_Target = Tuple[Vertex, Union[str, int]]


@dataclass
class VertexState:
    """頂点の状態。

    - level: ℓ(v) ∈ [−1, L]
    - matched: M(v)（非マッチなら None）
    - owned: O(v)、incident: N(v)
    - a_sets: A(v, ℓ)（ℓ ∈ [0, L]、ℓ < ℓ(v) の要素は空）
    """

    vid: Vertex
    level: int
    matched: Optional[EdgeKey]
    owned: BatchSet
    incident: BatchSet
    a_sets: List[BatchSet]

    @property
    def o_count(self) -> int:
        return len(self.owned)

    def a_count(self, level: int) -> int:
        return len(self.a_sets[level])


@dataclass
class EdgeState:
    """辺の状態。deleted は D(e)（マッチ中のみ非空）。"""

    key: EdgeKey
    level: int
    owner: Vertex
    matched: bool = False
    deleted: BatchSet = field(default_factory=BatchSet)


class RiseIndex:
    """レベル毎の上昇候補 S_ℓ。"""

    def __init__(self, meter: CostMeter, levels: int) -> None:
        self.sets: List[BatchSet] = [BatchSet(meter) for _ in range(levels + 1)]

    def members(self, level: int) -> List[Vertex]:
        return sorted(self.sets[level].retrieve())

    def is_empty(self, level: int) -> bool:
        return len(self.sets[level]) == 0

    def all_empty(self) -> bool:
        return all(len(s) == 0 for s in self.sets)


class _SetOps:
    """集合操作を宛先ごとにまとめ、1 宛先 1 呼び出しで適用する。"""

    def __init__(self) -> None:
        self.erase: DefaultDict[_Target, List[EdgeKey]] = defaultdict(list)
        self.insert: DefaultDict[_Target, List[EdgeKey]] = defaultdict(list)

    def apply(self, scheme: "LevelingScheme") -> None:
        with scheme.meter.parallel():
            for target, items in self.erase.items():
                scheme._target(target).erase(items)
        with scheme.meter.parallel():
            for target, items in self.insert.items():
                scheme._target(target).insert(items)


class LevelingScheme:
    """レベル付けスキームのデータ構造と set-owner / set-level 手続き。"""

    def __init__(self, config: Config, meter: CostMeter) -> None:
        self.config = config
        self.meter = meter
        self.L = config.L
        self.vertices: Dict[Vertex, VertexState] = {}
        self.edges: Dict[EdgeKey, EdgeState] = {}  # Active のみ
        self.temp_parent: Dict[EdgeKey, EdgeKey] = {}  # TempDeleted → 親のマッチ辺
        self.rise = RiseIndex(meter, self.L)
        self._thresholds = [config.threshold(level) for level in range(self.L + 1)]

    # 参照 --------------------------------------------------------------------

    def ensure_vertices(self, vertices: Iterable[Vertex]) -> None:
        """未登録の頂点をレベル −1 で登録する。"""

        for v in vertices:
            if v not in self.vertices:
                self.vertices[v] = VertexState(
                    vid=v,
                    level=UNMATCHED_LEVEL,
                    matched=None,
                    owned=BatchSet(self.meter),
                    incident=BatchSet(self.meter),
                    a_sets=[BatchSet(self.meter) for _ in range(self.L + 1)],
                )

    def level_of(self, v: Vertex) -> int:
        state = self.vertices.get(v)
        return UNMATCHED_LEVEL if state is None else state.level

    def is_matched_vertex(self, v: Vertex) -> bool:
        state = self.vertices.get(v)
        return state is not None and state.matched is not None

    def max_level(self, e: EdgeKey) -> int:
        return max(self.level_of(u) for u in e)

    def canonical_owner(self, e: EdgeKey) -> Vertex:
        """最大レベルの端点のうち最小 ID を返す。"""

        return max(e, key=lambda u: (self.level_of(u), -u))

    def locate(self, e: EdgeKey) -> EdgeLocation:
        if e in self.edges:
            return ACTIVE
        parent = self.temp_parent.get(e)
        if parent is not None:
            return temp_deleted(parent)
        return ABSENT

    def matched_edges(self) -> List[EdgeKey]:
        return sorted(e for e, st in self.edges.items() if st.matched)

    def _target(self, target: _Target) -> BatchSet:
        v, slot = target
        state = self.vertices[v]
        if slot == "N":
            return state.incident
        if slot == "O":
            return state.owned
        return state.a_sets[int(slot)]

    def _charge_query(self) -> None:
        if self.meter.in_batch:
            self.meter.scan(1, self.L + 1)

    # õ -----------------------------------------------------------------------

    def _check_rise_level(self, v: Vertex, level: int) -> VertexState:
        state = self.vertices.get(v)
        if state is None:
            raise UnknownEdge(f"unknown vertex {v}")
        if not state.level < level <= self.L:
            raise LevelOutOfRange(f"level {level} must be in ({state.level}, {self.L}] for vertex {v}")
        return state

    def tilde_o(self, v: Vertex, level: int) -> int:
        """õ_{v,ℓ} = o_v + Σ_{ℓ'=ℓ(v)}^{ℓ−1} a_{v,ℓ'}（下端は 0 で打ち切り）。"""

        state = self._check_rise_level(v, level)
        self._charge_query()
        start = max(state.level, 0)
        return state.o_count + sum(state.a_count(k) for k in range(start, level))

    def tilde_O(self, v: Vertex, level: int) -> List[EdgeKey]:
        """Õ_{v,ℓ} = O(v) ∪ A(v,ℓ') (ℓ(v) ≤ ℓ' < ℓ) をその場で組み立てる。"""

        state = self._check_rise_level(v, level)
        self._charge_query()
        out = set(state.owned)
        for k in range(max(state.level, 0), level):
            out.update(state.a_sets[k])
        return sorted(out)

    # S_ℓ ---------------------------------------------------------------------

    def refresh_rise(self, vertices: Iterable[Vertex]) -> None:
        """頂点ごとに全レベルの S_ℓ 所属を評価し直す（頂点あたり O(L)）。"""

        targets = sorted(set(vertices))
        if not targets:
            return
        self.meter.scan(len(targets), self.L + 1)
        inserts: DefaultDict[int, List[Vertex]] = defaultdict(list)
        erases: DefaultDict[int, List[Vertex]] = defaultdict(list)
        for v in targets:
            state = self.vertices[v]
            counts = np.fromiter((len(a) for a in state.a_sets), dtype=np.int64, count=self.L + 1)
            prefix = np.concatenate(([0], np.cumsum(counts)))
            start = max(state.level, 0)
            for level in range(self.L + 1):
                member = False
                if state.level < level:
                    tilde = state.o_count + int(prefix[level] - prefix[start])
                    member = tilde >= self._thresholds[level]
                present = v in self.rise.sets[level]
                if member and not present:
                    inserts[level].append(v)
                elif present and not member:
                    erases[level].append(v)
        with self.meter.parallel():
            for level, items in erases.items():
                self.rise.sets[level].erase(items)
            for level, items in inserts.items():
                self.rise.sets[level].insert(items)

    # set-owner ---------------------------------------------------------------

    def set_owner(self, e: EdgeKey, v: Vertex) -> None:
        self.set_owner_many([(e, v)])

    def set_owner_many(self, pairs: Union[Mapping[EdgeKey, Vertex], Iterable[Tuple[EdgeKey, Vertex]]]) -> None:
        """複数の set-owner を 1 ラウンドで処理する。

        O(e)=v とし、非マッチ辺なら ℓ(e)=ℓ(v)。旧所有者の O 集合と古い A 集合から外し、
        他の端点 u の A(u, ℓ(e)) に入れ、端点の S_ℓ 所属を更新する。
        """

        assignments = dict(pairs.items() if isinstance(pairs, Mapping) else pairs)
        if not assignments:
            return
        for e, v in assignments.items():
            if e not in self.edges:
                raise UnknownEdge(f"set_owner on inactive edge {e}")
            if v not in e:
                raise NotEndpoint(f"vertex {v} is not an endpoint of {e}")
            if self.level_of(v) < self.max_level(e):
                raise NotMaxLevel(f"vertex {v} at level {self.level_of(v)} is below max level of {e}")

        ops = _SetOps()
        touched: set = set()
        for e, v in assignments.items():
            state = self.edges[e]
            ops.erase[(state.owner, "O")].append(e)
            for u in e:
                if u != state.owner:
                    ops.erase[(u, state.level)].append(e)
            if not state.matched:
                state.level = max(0, self.level_of(v))
            state.owner = v
            ops.insert[(v, "O")].append(e)
            for u in e:
                if u != v:
                    ops.insert[(u, state.level)].append(e)
            touched.update(e)
        ops.apply(self)
        self.refresh_rise(touched)

    # set-level ---------------------------------------------------------------

    def set_level(self, v: Vertex, level: int) -> None:
        self.set_level_many([(v, level)])

    def set_level_many(self, pairs: Union[Mapping[Vertex, int], Sequence[Tuple[Vertex, int]]]) -> None:
        """複数の set-level を同時に処理する（頂点は互いに異なること）。

        まず O^old(v) の各辺を新レベルでの argmax 端点に付け替え、上昇時は
        A(v, ℓ') (ℓ^old ≤ ℓ' < ℓ) の辺も付け替える。A(v, ℓ) の辺は v の方が
        ID が小さいときだけ v に移る。
        """

        items = list(pairs.items() if isinstance(pairs, Mapping) else pairs)
        if not items:
            return
        if len({v for v, _ in items}) != len(items):
            raise InvariantBroken("set_level_many requires pairwise distinct vertices")
        for v, level in items:
            if not UNMATCHED_LEVEL <= level <= self.L:
                raise LevelOutOfRange(f"level {level} out of [-1, {self.L}] for vertex {v}")
        self.ensure_vertices(v for v, _ in items)

        candidates: set = set()
        ties: set = set()
        with self.meter.parallel():
            for v, level in items:
                state = self.vertices[v]
                candidates.update(state.owned.retrieve())
                for k in range(max(state.level, 0), level):
                    candidates.update(state.a_sets[k].retrieve())
                if level >= 0:
                    ties.update(state.a_sets[level].retrieve())
        for v, level in items:
            self.vertices[v].level = level

        # 新レベルで所有者と同レベルになった辺は、最小 ID 規則で付け替える
        candidates.update(e for e in ties if self.canonical_owner(e) != self.edges[e].owner)
        self.meter.scan(len(candidates), max(1, self.config.r))
        self.set_owner_many({e: self.canonical_owner(e) for e in sorted(candidates)})
        self.refresh_rise(v for v, _ in items)

    # 辺の出し入れ ------------------------------------------------------------

    def attach_edges(self, edges: Iterable[EdgeKey]) -> None:
        """非マッチの Active 辺として N/O/A 構造に登録する（所有者は argmax 端点）。"""

        batch = sorted(set(edges))
        if not batch:
            return
        self.ensure_vertices(u for e in batch for u in e)
        ops = _SetOps()
        touched: set = set()
        self.meter.scan(len(batch), max(1, self.config.r))
        for e in batch:
            if e in self.edges or e in self.temp_parent:
                raise InvariantBroken(f"attach of present edge {e}")
            owner = self.canonical_owner(e)
            state = EdgeState(key=e, level=max(0, self.level_of(owner)), owner=owner, deleted=BatchSet(self.meter))
            self.edges[e] = state
            for u in e:
                ops.insert[(u, "N")].append(e)
                if u == owner:
                    ops.insert[(u, "O")].append(e)
                else:
                    ops.insert[(u, state.level)].append(e)
            touched.update(e)
        ops.apply(self)
        self.refresh_rise(touched)

    def detach_edges(self, edges: Iterable[EdgeKey]) -> None:
        """非マッチの Active 辺を N/O/A 構造から外す。"""

        batch = sorted(set(edges))
        if not batch:
            return
        ops = _SetOps()
        touched: set = set()
        for e in batch:
            state = self.edges.get(e)
            if state is None:
                raise UnknownEdge(f"detach of inactive edge {e}")
            if state.matched:
                raise MatchedEdgePassed(f"detach of matched edge {e}")
            if len(state.deleted):
                raise InvariantBroken(f"detach of {e} with non-empty D set")
            for u in e:
                ops.erase[(u, "N")].append(e)
                if u == state.owner:
                    ops.erase[(u, "O")].append(e)
                else:
                    ops.erase[(u, state.level)].append(e)
            touched.update(e)
        ops.apply(self)
        for e in batch:
            del self.edges[e]
        self.refresh_rise(touched)

    # 一時削除（D 集合） -------------------------------------------------------

    def park(self, parent: EdgeKey, edges: Sequence[EdgeKey]) -> None:
        """既に外した辺を D(parent) に入れ、TempDeleted として索引する。"""

        if not edges:
            return
        self.edges[parent].deleted.insert(edges)
        for e in edges:
            self.temp_parent[e] = parent

    def unpark(self, edges: Iterable[EdgeKey]) -> Dict[EdgeKey, List[EdgeKey]]:
        """TempDeleted 辺を親の D 集合から外す。親 → 外した辺 の対応を返す。"""

        by_parent: DefaultDict[EdgeKey, List[EdgeKey]] = defaultdict(list)
        for e in edges:
            by_parent[self.temp_parent.pop(e)].append(e)
        with self.meter.parallel():
            for parent, items in by_parent.items():
                self.edges[parent].deleted.erase(items)
        return dict(by_parent)

    def drain(self, parent: EdgeKey) -> List[EdgeKey]:
        """D(parent) を空にして中身を返す（索引からも外す）。"""

        items = self.edges[parent].deleted.clear()
        for e in items:
            del self.temp_parent[e]
        return sorted(items)
