"""Hop-minimal physical routes and vertex-disjoint overlay path sets.

Disjoint paths come from unit-capacity max flow on a split-vertex network:
every vertex v becomes an arc v_in -> v_out of capacity one, every overlay
arc u -> v becomes u_out -> v_in, and flow is pushed from s_out to d_in with
breadth-first augmentation. Flow value then equals both the maximum number
of internally vertex-disjoint s-d paths and the minimum vertex cut.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass

from .netmodel import OverlayGraph, PhysicalTopology


@dataclass(frozen=True)
class Path:
    nodes: tuple[int, ...]
    layer: str = "overlay"  # "overlay" or "physical"

    def hops(self) -> int:
        return len(self.nodes) - 1

    def intermediates(self) -> tuple[int, ...]:
        return self.nodes[1:-1]


def shortest_physical_path(topo: PhysicalTopology, s: int, d: int) -> Path | None:
    """Minimum-hop route s -> d, ties broken by the smallest next-hop id.

    Returns None when d is unreachable from s.
    """
    if s == d:
        raise ValueError("endpoints must differ")
    # distance-to-d labels, then a greedy walk taking the lowest-id neighbor
    # that still decreases the label
    dist = [-1] * topo.n
    dist[d] = 0
    queue = deque([d])
    while queue:
        u = queue.popleft()
        for v in topo.neighbors[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    if dist[s] < 0:
        return None
    nodes = [s]
    cur = s
    while cur != d:
        cur = next(v for v in topo.neighbors[cur] if dist[v] == dist[cur] - 1)
        nodes.append(cur)
    return Path(nodes=tuple(nodes), layer="physical")


@dataclass(frozen=True)
class FlowNetwork:
    """Split-vertex unit-capacity network. Vertex v maps to v_in = 2v and
    v_out = 2v + 1; the arc list holds forward arcs only, reverse residual
    arcs are implied by index pairing in the solver."""
    n: int  # original vertex count
    source: int  # s_out
    sink: int  # d_in
    arc_tail: tuple[int, ...]
    arc_head: tuple[int, ...]
    out_arcs: tuple[tuple[int, ...], ...]  # forward arc ids per split vertex, head-ascending

    def arc_count(self) -> int:
        return len(self.arc_tail)


def split_vertices(g: OverlayGraph, s: int, d: int) -> FlowNetwork:
    """Build the split network for internally disjoint s -> d paths.

    Every vertex keeps its internal arc (even s and d, whose internal arcs
    simply never carry flow), so the arc count is exactly |E| + |V|.
    """
    if s == d:
        raise ValueError("endpoints must differ")
    if not (0 <= s < g.n and 0 <= d < g.n):
        raise ValueError("endpoint out of range")
    tails: list[int] = []
    heads: list[int] = []
    for v in range(g.n):
        tails.append(2 * v)
        heads.append(2 * v + 1)
    for u in range(g.n):
        for v in g.out_edges[u]:
            tails.append(2 * u + 1)
            heads.append(2 * v)
    order = sorted(range(len(tails)), key=lambda a: (tails[a], heads[a]))
    tails = [tails[a] for a in order]
    heads = [heads[a] for a in order]
    out: list[list[int]] = [[] for _ in range(2 * g.n)]
    for a, t in enumerate(tails):
        out[t].append(a)
    return FlowNetwork(
        n=g.n,
        source=2 * s + 1,
        sink=2 * d,
        arc_tail=tuple(tails),
        arc_head=tuple(heads),
        out_arcs=tuple(tuple(a) for a in out),
    )


def _in_arcs(net: FlowNetwork) -> tuple[tuple[int, ...], ...]:
    inc: list[list[int]] = [[] for _ in range(2 * net.n)]
    for a, h in enumerate(net.arc_head):
        inc[h].append(a)
    # keep residual exploration deterministic: ascending tail id
    return tuple(tuple(sorted(arcs, key=lambda a: net.arc_tail[a])) for arcs in inc)


def _augment_once(net: FlowNetwork, cap: list[int], rev_flow: list[int],
                  in_arcs: tuple[tuple[int, ...], ...]) -> bool:
    """One breadth-first augmentation, exploring arcs in head-ascending order.

    cap[a] is residual capacity on forward arc a; rev_flow[a] is residual
    capacity on its reverse (equal to the flow already on a).
    """
    n2 = 2 * net.n
    parent_arc = [-1] * n2  # +a+1 forward, -a-1 reverse
    parent_arc[net.source] = 0  # sentinel, never read
    seen = [False] * n2
    seen[net.source] = True
    queue = deque([net.source])
    while queue:
        u = queue.popleft()
        if u == net.sink:
            break
        for a in net.out_arcs[u]:
            v = net.arc_head[a]
            if cap[a] > 0 and not seen[v]:
                seen[v] = True
                parent_arc[v] = a + 1
                queue.append(v)
        for a in in_arcs[u]:
            v = net.arc_tail[a]
            if rev_flow[a] > 0 and not seen[v]:
                seen[v] = True
                parent_arc[v] = -a - 1
                queue.append(v)
    if not seen[net.sink]:
        return False
    v = net.sink
    while v != net.source:
        p = parent_arc[v]
        if p > 0:
            a = p - 1
            cap[a] -= 1
            rev_flow[a] += 1
            v = net.arc_tail[a]
        else:
            a = -p - 1
            cap[a] += 1
            rev_flow[a] -= 1
            v = net.arc_head[a]
    return True


def max_vertex_disjoint_paths(g: OverlayGraph, s: int, d: int,
                              limit: int | None = None) -> list[Path]:
    """Maximum set of internally vertex-disjoint overlay paths s -> d.

    Augmentation is breadth-first with lowest-id tie-breaks, so the result
    is deterministic. `limit` caps the number of augmentations, letting
    callers ask for exactly rho paths cheaply. Paths are recovered by
    decomposing the final flow, consuming lowest-id arcs first.
    """
    net = split_vertices(g, s, d)
    in_arcs = _in_arcs(net)
    cap = [1] * net.arc_count()
    rev_flow = [0] * net.arc_count()
    flow = 0
    while limit is None or flow < limit:
        if not _augment_once(net, cap, rev_flow, in_arcs):
            break
        flow += 1
    paths: list[Path] = []
    for _ in range(flow):
        nodes = [s]
        v = net.source
        while v != net.sink:
            a = next(a for a in net.out_arcs[v] if rev_flow[a] > 0)
            rev_flow[a] -= 1
            v = net.arc_head[a]
            if v % 2 == 0:  # arrived at some w_in
                nodes.append(v // 2)
        paths.append(Path(nodes=tuple(nodes), layer="overlay"))
    return paths


@dataclass(frozen=True)
class PairPaths:
    pair_id: int
    s: int
    d: int
    paths: tuple[Path, ...]


@dataclass(frozen=True)
class PathStats:
    rows: tuple[PairPaths, ...]
    skipped: int  # pairs with no path at all

    def counts(self) -> list[int]:
        return [len(r.paths) for r in self.rows]

    def lengths(self) -> list[int]:
        return [p.hops() for r in self.rows for p in r.paths]

    def count_mean(self) -> float:
        c = self.counts()
        return sum(c) / len(c) if c else 0.0

    def count_std(self) -> float:
        c = self.counts()
        if not c:
            return 0.0
        m = sum(c) / len(c)
        return (sum((x - m) ** 2 for x in c) / len(c)) ** 0.5

    def length_cdf(self) -> list[tuple[int, float]]:
        ls = sorted(self.lengths())
        if not ls:
            return []
        total = len(ls)
        out = []
        seen = 0
        for val in sorted(set(ls)):
            seen += ls.count(val)
            out.append((val, seen / total))
        return out


def path_length_stats(g: OverlayGraph, pairs: list[tuple[int, int]],
                      limit: int | None = None) -> PathStats:
    """Disjoint-path census over the given pairs; unreachable pairs are
    skipped and counted rather than aggregated."""
    rows = []
    skipped = 0
    pair_id = 0
    for s, d in pairs:
        found = max_vertex_disjoint_paths(g, s, d, limit=limit)
        if not found:
            skipped += 1
            continue
        rows.append(PairPaths(pair_id=pair_id, s=s, d=d, paths=tuple(found)))
        pair_id += 1
    return PathStats(rows=tuple(rows), skipped=skipped)


def write_stats_csv(stats: PathStats, fileobj, comment: str | None = None) -> None:
    """Rows `pair_id,s,d,n_paths,lengths`; the variable-width length list is
    serialized as a semicolon-joined field."""
    if comment:
        fileobj.write(comment.rstrip("\n") + "\n")
    writer = csv.writer(fileobj)
    writer.writerow(["pair_id", "s", "d", "n_paths", "lengths"])
    for r in stats.rows:
        lengths = ";".join(str(p.hops()) for p in r.paths)
        writer.writerow([r.pair_id, r.s, r.d, len(r.paths), lengths])
