from __future__ import annotations

"""検証オラクル（エンジンの増分構造を使わず、生データから数え直す）。

違反は例外ではなく Violation のリストで返す。空リストなら正常。
"""

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import TYPE_CHECKING, DefaultDict, FrozenSet, Iterable, List, Sequence, Set, Tuple

from .edges import EdgeKey, Vertex, format_edge, shares_vertex
from .errors import TooLarge

if TYPE_CHECKING:  # pragma: no cover
    from .engine import DynamicMatcher


EXACT_EDGE_LIMIT = 24

VertexSets = DefaultDict[Vertex, Set[EdgeKey]]
LevelSets = DefaultDict[int, Set[EdgeKey]]


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


def check_maximality(active_edges: Iterable[EdgeKey], matching: Iterable[EdgeKey]) -> List[Violation]:
    """全端点が非マッチの Active 辺を報告する。"""

    covered = {v for e in matching for v in e}
    return [
        Violation("not-maximal", f"edge {format_edge(e)} has no matched endpoint")
        for e in sorted(active_edges)
        if covered.isdisjoint(e)
    ]


def check_vertex_cover(active_edges: Iterable[EdgeKey], cover: Iterable[Vertex]) -> List[Violation]:
    cover_set = set(cover)
    return [
        Violation("not-covered", f"edge {format_edge(e)} has no endpoint in the cover")
        for e in sorted(active_edges)
        if cover_set.isdisjoint(e)
    ]


def exact_maximum_matching(edges: Sequence[EdgeKey]) -> int:
    """最大マッチングのサイズを分枝限定で求める（辺数 ≤ 24）。"""

    items = sorted(set(edges))
    if len(items) > EXACT_EDGE_LIMIT:
        raise TooLarge(f"exact maximum matching supports at most {EXACT_EDGE_LIMIT} edges, got {len(items)}")
    best = 0

    def search(i: int, used: FrozenSet[Vertex], size: int) -> None:
        nonlocal best
        if size + (len(items) - i) <= best:
            return
        if i == len(items):
            best = max(best, size)
            return
        e = items[i]
        if used.isdisjoint(e):
            search(i + 1, used | frozenset(e), size + 1)
        search(i + 1, used, size)

    search(0, frozenset(), 0)
    return best


def check_ratio(matching_size: int, edges: Sequence[EdgeKey], r: int) -> List[Violation]:
    """|M|·r < 最大マッチング なら違反（辺数 ≤ 24 のときだけ評価）。"""

    if len(set(edges)) > EXACT_EDGE_LIMIT:
        return []
    best = exact_maximum_matching(edges)
    if matching_size * r < best:
        return [Violation("ratio", f"matching size {matching_size} * r={r} < maximum {best}")]
    return []


def _partition(matcher: "DynamicMatcher") -> Tuple[VertexSets, VertexSets, DefaultDict[Vertex, LevelSets]]:
    """Active 辺から N(v) / O(v) / A(v,ℓ) を数え直す。"""

    incident: VertexSets = defaultdict(set)
    owned: VertexSets = defaultdict(set)
    a_sets: DefaultDict[Vertex, LevelSets] = defaultdict(lambda: defaultdict(set))
    for e, st in matcher.scheme.edges.items():
        for u in e:
            incident[u].add(e)
            if u == st.owner:
                owned[u].add(e)
            else:
                a_sets[u][st.level].add(e)
    return incident, owned, a_sets


def check_state(matcher: "DynamicMatcher") -> List[Violation]:
    """レベル付けスキームの全不変条件を生データから検査する。"""

    out: List[Violation] = []
    scheme = matcher.scheme
    alpha = matcher.config.alpha
    L = scheme.L
    if matcher.meter.in_batch:
        out.append(Violation("batch-open", "state checked while a batch is in progress"))

    vertices = scheme.vertices
    edges = scheme.edges

    def level(v: Vertex) -> int:
        st = vertices.get(v)
        return -1 if st is None else st.level

    # マッチング ---------------------------------------------------------------
    matched = sorted(e for e, st in edges.items() if st.matched)
    usage = Counter(v for e in matched for v in e)
    for v, n in sorted(usage.items()):
        if n > 1:
            out.append(Violation("matching-overlap", f"vertex {v} is covered by {n} matched edges"))
    for e in matched:
        for u in e:
            if u not in vertices or vertices[u].matched != e:
                out.append(Violation("matched-pointer", f"M({u}) does not point to matched edge {format_edge(e)}"))
    for v, st in sorted(vertices.items()):
        if st.matched is not None:
            target = edges.get(st.matched)
            if target is None or not target.matched or v not in st.matched:
                out.append(Violation("matched-pointer", f"M({v}) = {st.matched} is not a matched edge on {v}"))
        if not -1 <= st.level <= L:
            out.append(Violation("level-range", f"vertex {v} has level {st.level} outside [-1, {L}]"))
        if (st.level == -1) != (st.matched is None):
            out.append(Violation("inv1-unmatched", f"vertex {v} at level {st.level} with M = {st.matched}"))

    # 辺のレベルと所有者 -------------------------------------------------------
    for e, st in sorted(edges.items()):
        top = max(level(u) for u in e)
        if st.owner not in e:
            out.append(Violation("owner", f"owner {st.owner} of {format_edge(e)} is not an endpoint"))
        elif level(st.owner) != top:
            out.append(Violation("owner", f"owner {st.owner} of {format_edge(e)} is not at max level {top}"))
        if st.matched:
            if any(level(u) != st.level for u in e):
                out.append(Violation("inv1-matched", f"endpoints of matched {format_edge(e)} not at level {st.level}"))
        elif st.level != max(0, top):
            out.append(Violation("inv1-level", f"unmatched {format_edge(e)} has level {st.level}, expected {top}"))

    # N / O / A の分割 ---------------------------------------------------------
    incident, owned, a_sets = _partition(matcher)
    for v, st in sorted(vertices.items()):
        if st.incident.snapshot() != incident[v]:
            out.append(Violation("incident-set", f"N({v}) differs from the active incident edges"))
        if st.owned.snapshot() != owned[v]:
            out.append(Violation("owned-set", f"O({v}) differs from the edges it owns"))
        for k in range(L + 1):
            if st.a_sets[k].snapshot() != a_sets[v][k]:
                out.append(Violation("a-set", f"A({v},{k}) differs from recount"))

    # S_ℓ ---------------------------------------------------------------------
    for v, st in sorted(vertices.items()):
        by_level = Counter(e_level for e_level, items in a_sets[v].items() for _ in items)
        for k in range(L + 1):
            expected = False
            if st.level < k:
                tilde = len(owned[v]) + sum(by_level[j] for j in range(max(st.level, 0), k))
                expected = tilde >= alpha**k
            if (v in scheme.rise.sets[k]) != expected:
                out.append(Violation("rise-index", f"S_{k} membership of vertex {v} should be {expected}"))

    # D 集合 --------------------------------------------------------------------
    holders: DefaultDict[EdgeKey, List[EdgeKey]] = defaultdict(list)
    for e, st in sorted(edges.items()):
        items = st.deleted.snapshot()
        if items and not st.matched:
            out.append(Violation("inv2-parent", f"unmatched {format_edge(e)} holds a non-empty D set"))
        for x in items:
            holders[x].append(e)
    for x, parents in sorted(holders.items()):
        if len(parents) > 1:
            names = ", ".join(format_edge(p) for p in parents)
            out.append(Violation("inv2-multiple", f"{format_edge(x)} is held by several D sets: {names}"))
            continue
        parent = parents[0]
        if x in edges:
            out.append(Violation("inv2-active", f"{format_edge(x)} is both active and temporarily deleted"))
        if scheme.temp_parent.get(x) != parent:
            out.append(Violation("inv2-index", f"location index of {format_edge(x)} does not name {format_edge(parent)}"))
        if not shares_vertex(x, parent):
            out.append(Violation("inv2-incident", f"{format_edge(x)} is not incident on {format_edge(parent)}"))
    for x in sorted(set(scheme.temp_parent) - set(holders)):
        out.append(Violation("inv2-index", f"{format_edge(x)} is indexed as temporarily deleted but held by no D set"))

    # バッチ間の作業領域 -------------------------------------------------------
    if len(matcher.undecided):
        out.append(Violation("undecided", f"{len(matcher.undecided)} undecided vertices remain"))
    if len(matcher.pending):
        out.append(Violation("pending", f"{len(matcher.pending)} pending reinsertions remain"))
    return out


def check_degree_bound(matcher: "DynamicMatcher") -> List[Violation]:
    """ℓ > ℓ(v) で õ_{v,ℓ+1} ≤ α^{ℓ+1} を数え直しで検査する。

    掃引直後（その後の挿入より前）にだけ成り立つ。バッチ中でも呼べる。
    """

    out: List[Violation] = []
    scheme = matcher.scheme
    alpha = matcher.config.alpha
    _, owned, a_sets = _partition(matcher)
    for v, st in sorted(scheme.vertices.items()):
        start = max(st.level, 0)
        for k in range(st.level + 2, scheme.L + 1):
            tilde = len(owned[v]) + sum(len(a_sets[v][j]) for j in range(start, k))
            if tilde > alpha**k:
                out.append(Violation("degree-bound", f"vertex {v} at level {st.level} has õ_{k} = {tilde} > {alpha**k}"))
    return out


def audit(matcher: "DynamicMatcher") -> List[Violation]:
    """check_state + 極大性 + 頂点被覆。"""

    active = matcher.active_edges()
    return (
        check_state(matcher)
        + check_maximality(active, matcher.matching())
        + check_vertex_cover(active, matcher.vertex_cover())
    )

