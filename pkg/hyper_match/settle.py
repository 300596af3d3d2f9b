from __future__ import annotations

"""並列 random-settle 手続き（grand-random-settle / subsettle / subsubsettle）。

レベル ℓ の上昇候補 B について、Õ_{v,ℓ} の和集合 E′ から辺を確率 p = 2^i/α^{ℓ+2} で
マークし、マーク辺と頂点を共有しない孤立マーク辺をレベル ℓ でマッチに加える。
勝者の端点が持っていた旧マッチ辺は蹴り出して再挿入待ちに回し、h(e′) が勝者に落ちる
非マーク辺は勝者の D 集合に一時削除する。
"""

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, DefaultDict, Dict, Iterable, List, Sequence, Set

from loguru import logger

from .config import ceil_log2
from .edges import EdgeKey, Vertex
from .epochs import Termination
from .errors import InvariantBroken, ProgressViolation, SettleDivergence

if TYPE_CHECKING:  # pragma: no cover
    from .engine import DynamicMatcher


def phase_count(alpha: int) -> int:
    """subsettle のフェーズ数 2·⌈log₂α⌉。"""

    return 2 * ceil_log2(alpha)


def iterations_per_phase(edge_count: int, c_sub: float) -> int:
    """1 フェーズの反復数 ⌈c_sub·log₂(|E′|+2)⌉。"""

    return max(1, math.ceil(c_sub * math.log2(edge_count + 2)))


def marking_probability(phase: int, level: int, alpha: int) -> float:
    return min(1.0, 2.0**phase / float(alpha) ** (level + 2))


def select_isolated(marked: Sequence[EdgeKey]) -> List[EdgeKey]:
    """他のマーク辺と頂点を共有しないマーク辺を返す。"""

    counts = Counter(v for e in marked for v in e)
    return [e for e in marked if all(counts[v] == 1 for v in e)]


@dataclass
class SettleContext:
    """1 回の grand-random-settle の作業状態（B, E′, h）。"""

    level: int
    members: List[Vertex]
    edges: List[EdgeKey] = field(default_factory=list)
    h: Dict[EdgeKey, Vertex] = field(default_factory=dict)
    matched: int = 0


class RandomSettler:
    """DynamicMatcher の状態上で settle 手続きを実行する。"""

    def __init__(self, engine: "DynamicMatcher") -> None:
        self.engine = engine

    # grand-random-settle ----------------------------------------------------

    def settle(self, vertices: Iterable[Vertex], level: int) -> int:
        """B の各頂点が ℓ に上がるか õ_{v,ℓ} < α^ℓ/2 になるまで subsettle を繰り返す。

        マッチに加えた辺数を返す。
        """

        eng = self.engine
        initial = sorted(set(vertices))
        if not initial:
            return 0
        ctx = SettleContext(level=level, members=initial)
        ctx.edges = self._gather(ctx.members, level)
        self._sample_h(ctx, ctx.edges)

        cap = eng.config.repeat_cap
        repetitions = 0
        while ctx.members:
            if repetitions >= cap:
                raise SettleDivergence(
                    f"settle at level {level} did not converge in {cap} repetitions ({len(ctx.members)} left)"
                )
            repetitions += 1
            self.subsettle(ctx)

        required = -(-len(initial) // eng.config.alpha**3)
        if ctx.matched < required:
            raise ProgressViolation(
                f"settle at level {level} matched {ctx.matched} edges for |B|={len(initial)} (need {required})"
            )
        eng.record_settle(level, repetitions, ctx.matched)
        logger.debug(
            "settle level={} |B|={} matched={} repetitions={}", level, len(initial), ctx.matched, repetitions
        )
        return ctx.matched

    # subsettle --------------------------------------------------------------

    def subsettle(self, ctx: SettleContext) -> None:
        """2·log₂α フェーズ。フェーズ i は ⌈c_sub·log₂(|E′|+2)⌉ 回の subsubsettle。"""

        cfg = self.engine.config
        for phase in range(phase_count(cfg.alpha)):
            if not ctx.members:
                return
            for _ in range(iterations_per_phase(len(ctx.edges), cfg.c_sub)):
                if not ctx.members:
                    return
                self.subsubsettle(ctx, phase)

    # subsubsettle -----------------------------------------------------------

    def subsubsettle(self, ctx: SettleContext, phase: int) -> List[EdgeKey]:
        """1 反復: マーク → 孤立マーク辺を settle → B と E′ を更新。settle した辺を返す。"""

        eng = self.engine
        winners: List[EdgeKey] = []
        marked: Set[EdgeKey] = set()
        if ctx.edges:
            p = marking_probability(phase, ctx.level, eng.config.alpha)
            # E′ の昇順に 1 本の乱数列で印を付ける
            draws = eng.rng.random(len(ctx.edges))
            eng.meter.scan(len(ctx.edges), eng.config.r)
            marked_list = [e for e, x in zip(ctx.edges, draws) if x < p]
            marked = set(marked_list)
            winners = select_isolated(marked_list)
        if winners:
            self._apply_winners(ctx, winners, marked)
        self._refilter(ctx)
        return winners

    def _apply_winners(self, ctx: SettleContext, winners: List[EdgeKey], marked: Set[EdgeKey]) -> None:
        eng = self.engine
        scheme = eng.scheme
        level = ctx.level

        winner_of: Dict[Vertex, EdgeKey] = {u: e for e in winners for u in e}
        winner_set = set(winners)
        lifted = sorted(winner_of)
        rematched = [e for e in winners if scheme.edges[e].matched]
        kicked = sorted(
            {scheme.vertices[u].matched for u in lifted if scheme.vertices[u].matched is not None} - winner_set
        )
        kicked_set = set(kicked)

        parked: DefaultDict[EdgeKey, List[EdgeKey]] = defaultdict(list)
        for e in ctx.edges:
            if e in marked or e in kicked_set:
                continue
            parent = winner_of.get(ctx.h[e])
            if parent is None or e not in scheme.edges:
                continue
            if scheme.edges[e].matched:
                raise InvariantBroken(f"matched edge {e} selected for temporary deletion")
            parked[parent].append(e)

        demoted = {w: scheme.level_of(w) for e in kicked for w in e if w not in winner_of}

        eng.release(rematched + kicked, Termination.INDUCED)
        scheme.detach_edges(kicked + [e for items in parked.values() for e in items])
        eng.pending.insert(kicked)
        eng.undecided.add(demoted)
        eng.undecided.discard(lifted)
        eng.set_levels({u: level for u in lifted})
        with eng.meter.parallel():
            for parent in sorted(parked):
                scheme.park(parent, parked[parent])
        eng.epochs.record_parked(sum(len(items) for items in parked.values()))
        eng.mark_matched(winners)
        ctx.matched += len(winners)

    # B / E′ / h --------------------------------------------------------------

    def _gather(self, members: Sequence[Vertex], level: int) -> List[EdgeKey]:
        """E′ = ∪_{v∈B} Õ_{v,ℓ}（昇順）。"""

        scheme = self.engine.scheme
        out: Set[EdgeKey] = set()
        with self.engine.meter.parallel():
            for v in members:
                out.update(scheme.tilde_O(v, level))
        edges = sorted(out)
        self.engine.meter.scan(len(edges), self.engine.config.r)
        return edges

    def _sample_h(self, ctx: SettleContext, edges: Sequence[EdgeKey]) -> None:
        """h(e) を各辺の端点から一様に 1 度だけ選ぶ。"""

        fresh = [e for e in edges if e not in ctx.h]
        if not fresh:
            return
        picks = self.engine.rng.random(len(fresh))
        for e, x in zip(fresh, picks):
            ctx.h[e] = e[min(len(e) - 1, int(x * len(e)))]

    def _refilter(self, ctx: SettleContext) -> None:
        """B を {v : ℓ(v) < ℓ かつ 2·õ_{v,ℓ} ≥ α^ℓ} に絞り、E′ を作り直す。"""

        scheme = self.engine.scheme
        threshold = self.engine.config.threshold(ctx.level)
        keep: List[Vertex] = []
        with self.engine.meter.parallel():
            for v in ctx.members:
                if scheme.level_of(v) < ctx.level and 2 * scheme.tilde_o(v, ctx.level) >= threshold:
                    keep.append(v)
        ctx.members = keep
        ctx.edges = self._gather(keep, ctx.level) if keep else []
        self._sample_h(ctx, ctx.edges)
