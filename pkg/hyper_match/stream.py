from __future__ import annotations

"""更新ストリームのテキスト形式と、忘却的敵対者のワークロード生成。

形式:
    # コメント
    BATCH
    - 3 4        削除（正規化した頂点列）
    + 1 2 5      挿入
    END
"""

import itertools
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Container, Deque, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .edges import EdgeKey, canonical_edge
from .engine import UpdateBatch
from .errors import InfeasibleSpec, InputError, StreamParseError


# 生成器側 PRNG のストリーム識別子（エンジン側とは別系列）
GENERATOR_STREAM = 0x4144

GENERATORS = ("uniform-mix", "sliding-window", "insert-all-then-delete-all", "hypergraph-random")

_SAMPLE_RETRIES = 64


# 解析 / 直列化 --------------------------------------------------------------


def _parse_vertices(tokens: Sequence[str], line_no: int, r: Optional[int]) -> List[int]:
    if not tokens:
        raise StreamParseError("edge line needs at least one vertex", line_no)
    try:
        vertices = [int(t) for t in tokens]
    except ValueError as e:
        raise StreamParseError(f"vertex ids must be integers: {' '.join(tokens)}", line_no) from e
    if r is not None:
        try:
            return list(canonical_edge(vertices, r))
        except InputError as e:
            raise StreamParseError(str(e), line_no) from e
    return vertices


def parse_stream(text: str, r: Optional[int] = None) -> List[UpdateBatch]:
    """ストリームテキストを UpdateBatch のリストに変換する。

    r を与えるとランク超過も解析エラー（行番号付き）として扱う。
    """

    batches: List[UpdateBatch] = []
    current: Optional[UpdateBatch] = None
    opened_at = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, *rest = line.split()
        if head == "BATCH":
            if rest:
                raise StreamParseError("BATCH takes no arguments", line_no)
            if current is not None:
                raise StreamParseError(f"BATCH opened at line {opened_at} is not closed", line_no)
            current, opened_at = UpdateBatch(), line_no
        elif head == "END":
            if rest:
                raise StreamParseError("END takes no arguments", line_no)
            if current is None:
                raise StreamParseError("END without BATCH", line_no)
            batches.append(current)
            current = None
        elif head in ("+", "-"):
            if current is None:
                raise StreamParseError("update outside of a batch", line_no)
            vertices = _parse_vertices(rest, line_no, r)
            (current.insertions if head == "+" else current.deletions).append(vertices)
        else:
            raise StreamParseError(f"unknown directive {head!r}", line_no)
    if current is not None:
        raise StreamParseError(f"BATCH opened at line {opened_at} is not closed", opened_at)
    return batches


def serialize_stream(batches: Iterable[UpdateBatch]) -> str:
    """UpdateBatch 列をテキストに戻す（各バッチは削除 → 挿入の順）。"""

    lines: List[str] = []
    for batch in batches:
        lines.append("BATCH")
        lines.extend("- " + " ".join(str(v) for v in e) for e in batch.deletions)
        lines.extend("+ " + " ".join(str(v) for v in e) for e in batch.insertions)
        lines.append("END")
    return "\n".join(lines) + ("\n" if lines else "")


def read_stream(path: Path, r: Optional[int] = None) -> List[UpdateBatch]:
    return parse_stream(Path(path).read_text(encoding="utf-8"), r)


def write_stream(path: Path, batches: Iterable[UpdateBatch]) -> None:
    Path(path).write_text(serialize_stream(batches), encoding="utf-8")


# ワークロード生成 ------------------------------------------------------------


@dataclass(frozen=True)
class WorkloadSpec:
    """生成器の指定。insert_ratio は insert-all-then-delete-all では使わない。"""

    generator: str
    n: int
    r: int = 2
    batch_count: int = 1
    batch_size: int = 1
    insert_ratio: float = 0.5
    seed: int = 0

    def validate(self) -> None:
        if self.generator not in GENERATORS:
            raise InfeasibleSpec(f"unknown generator {self.generator!r} (choose from {', '.join(GENERATORS)})")
        if self.r < 2:
            raise InfeasibleSpec(f"rank must be >= 2, got {self.r}")
        min_n = 2 if self.generator == "hypergraph-random" else self.r
        if self.n < min_n:
            raise InfeasibleSpec(f"{self.generator} needs n >= {min_n}, got n={self.n}")
        if self.batch_count < 0 or self.batch_size < 1:
            raise InfeasibleSpec("batch_count must be >= 0 and batch_size >= 1")
        if not 0.0 <= self.insert_ratio <= 1.0:
            raise InfeasibleSpec(f"insert_ratio must be in [0, 1], got {self.insert_ratio}")
        if self.generator != "insert-all-then-delete-all" and self.insert_ratio == 0.0 and self.batch_count > 0:
            raise InfeasibleSpec("insert_ratio 0 asks for deletions from an empty graph")

    @property
    def ranks(self) -> Tuple[int, ...]:
        if self.generator == "hypergraph-random":
            return tuple(range(2, self.r + 1))
        return (self.r,)

    @property
    def edge_space(self) -> int:
        return sum(math.comb(self.n, k) for k in self.ranks)


class _LivePool:
    """生存辺の集合（一様抽出と最古辺の取り出し）。"""

    def __init__(self) -> None:
        self._items: List[EdgeKey] = []
        self._pos: Dict[EdgeKey, int] = {}
        self._order: Deque[EdgeKey] = deque()

    def add(self, e: EdgeKey) -> None:
        self._pos[e] = len(self._items)
        self._items.append(e)
        self._order.append(e)

    def remove(self, e: EdgeKey) -> None:
        i = self._pos.pop(e)
        last = self._items.pop()
        if last != e:
            self._items[i] = last
            self._pos[last] = i

    def pick_uniform(self, rng: np.random.Generator) -> EdgeKey:
        return self._items[int(rng.integers(len(self._items)))]

    def oldest(self) -> EdgeKey:
        while self._order[0] not in self._pos:
            self._order.popleft()
        return self._order[0]

    def __contains__(self, e: object) -> bool:
        return e in self._pos

    def __len__(self) -> int:
        return len(self._items)


class _EdgeSampler:
    """未使用の辺キーを一様に近く引く。空きが少ないときは列挙に切り替える。"""

    def __init__(self, spec: WorkloadSpec, rng: np.random.Generator) -> None:
        self.spec = spec
        self.rng = rng

    def _draw(self) -> EdgeKey:
        ranks = self.spec.ranks
        k = ranks[0] if len(ranks) == 1 else int(self.rng.integers(ranks[0], ranks[-1] + 1))
        picked = self.rng.choice(self.spec.n, size=k, replace=False) + 1
        return canonical_edge(picked.tolist(), self.spec.r)

    def sample(self, taken: Container[EdgeKey]) -> Optional[EdgeKey]:
        for _ in range(_SAMPLE_RETRIES):
            e = self._draw()
            if e not in taken:
                return e
        free = [
            e
            for k in self.spec.ranks
            for e in itertools.combinations(range(1, self.spec.n + 1), k)
            if e not in taken
        ]
        if not free:
            return None
        return free[int(self.rng.integers(len(free)))]


class _Taken:
    """抽出時の「使用中」判定（生存辺とバッチ内で触れた辺）。"""

    def __init__(self, pool: _LivePool, touched: Set[EdgeKey]) -> None:
        self.pool = pool
        self.touched = touched

    def __contains__(self, e: object) -> bool:
        return e in self.pool or e in self.touched


def _generate_mixed(spec: WorkloadSpec, rng: np.random.Generator) -> List[UpdateBatch]:
    pool = _LivePool()
    sampler = _EdgeSampler(spec, rng)
    batches: List[UpdateBatch] = []
    for _ in range(spec.batch_count):
        batch = UpdateBatch()
        inserted: List[EdgeKey] = []
        touched: Set[EdgeKey] = set()
        taken = _Taken(pool, touched)
        for _ in range(spec.batch_size):
            want_insert = rng.random() < spec.insert_ratio or len(pool) == 0
            e = sampler.sample(taken) if want_insert else None
            if e is not None:
                inserted.append(e)
                touched.add(e)
                batch.insertions.append(list(e))
                continue
            if len(pool) == 0:
                if not inserted and not batch.deletions:
                    raise InfeasibleSpec(f"edge space of {spec.edge_space} keys is exhausted")
                break
            victim = pool.oldest() if spec.generator == "sliding-window" else pool.pick_uniform(rng)
            pool.remove(victim)
            touched.add(victim)
            batch.deletions.append(list(victim))
        for e in inserted:
            pool.add(e)
        batches.append(batch)
    return batches


def _generate_insert_then_delete(spec: WorkloadSpec, rng: np.random.Generator) -> List[UpdateBatch]:
    insert_batches = spec.batch_count - spec.batch_count // 2
    delete_batches = spec.batch_count // 2
    pool = _LivePool()
    sampler = _EdgeSampler(spec, rng)
    order: List[EdgeKey] = []
    batches: List[UpdateBatch] = []
    for _ in range(insert_batches):
        batch = UpdateBatch()
        for _ in range(spec.batch_size):
            e = sampler.sample(pool)
            if e is None:
                raise InfeasibleSpec(f"edge space of {spec.edge_space} keys is exhausted")
            pool.add(e)
            order.append(e)
            batch.insertions.append(list(e))
        batches.append(batch)
    if delete_batches:
        shuffled = [order[i] for i in rng.permutation(len(order))]
        chunk = -(-len(shuffled) // delete_batches) if shuffled else 1
        for i in range(delete_batches):
            part = shuffled[i * chunk : (i + 1) * chunk]
            batches.append(UpdateBatch(deletions=[list(e) for e in part]))
    return batches


def generate(spec: WorkloadSpec) -> List[UpdateBatch]:
    """spec と seed から決定的に更新列を生成する。"""

    spec.validate()
    rng = np.random.default_rng(np.random.SeedSequence([int(spec.seed), GENERATOR_STREAM]))
    if spec.generator == "insert-all-then-delete-all":
        return _generate_insert_then_delete(spec, rng)
    return _generate_mixed(spec, rng)
