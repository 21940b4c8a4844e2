"""Shortest physical routing and vertex-disjoint overlay path extraction,
checked against independent brute-force oracles."""

import io
import random
from collections import deque

import pytest

from kpsec.netmodel import OverlayGraph, PhysicalTopology, generate_topology
from kpsec.paths import (
    Path,
    PathStats,
    max_vertex_disjoint_paths,
    path_length_stats,
    shortest_physical_path,
    split_vertices,
    write_stats_csv,
)


def _line_topology(count, spacing, radio_range):
    pos = [(i * spacing, 0.0) for i in range(count)]
    return PhysicalTopology.from_positions(pos, side=1000.0,
                                           radio_range=radio_range)


def _bfs_distance(topo, s, d):
    dist = {s: 0}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for v in topo.neighbors[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist.get(d)


# -- shortest physical paths --------------------------------------------------


def test_shortest_path_on_a_line():
    topo = _line_topology(4, spacing=20.0, radio_range=25.0)
    path = shortest_physical_path(topo, 0, 3)
    assert path.nodes == (0, 1, 2, 3)
    assert path.layer == "physical"
    assert path.hops() == 3
    assert path.intermediates() == (1, 2)


def test_shortest_path_unreachable_returns_none():
    pos = [(0.0, 0.0), (10.0, 0.0), (500.0, 0.0), (510.0, 0.0)]
    topo = PhysicalTopology.from_positions(pos, side=1000.0, radio_range=20.0)
    assert shortest_physical_path(topo, 0, 2) is None
    assert shortest_physical_path(topo, 0, 1).nodes == (0, 1)


def test_shortest_path_same_endpoints_rejected():
    topo = _line_topology(3, spacing=10.0, radio_range=15.0)
    with pytest.raises(ValueError):
        shortest_physical_path(topo, 1, 1)


def test_shortest_path_length_matches_bfs_oracle():
    for seed in range(6):
        topo = generate_topology(n=50, side=100.0, radio_range=28.0, seed=seed)
        rng = random.Random(seed)
        for _ in range(30):
            s, d = rng.sample(range(topo.n), 2)
            want = _bfs_distance(topo, s, d)
            path = shortest_physical_path(topo, s, d)
            if want is None:
                assert path is None
                continue
            assert path.hops() == want
            assert path.nodes[0] == s and path.nodes[-1] == d
            for u, v in zip(path.nodes, path.nodes[1:]):
                assert topo.has_edge(u, v)


def test_shortest_path_tie_break_lowest_id():
    # two equal-length routes 0-1-3 and 0-2-3; the lowest next hop wins
    pos = [(0.0, 0.0), (10.0, 5.0), (10.0, -5.0), (20.0, 0.0)]
    topo = PhysicalTopology.from_positions(pos, side=100.0, radio_range=12.0)
    assert shortest_physical_path(topo, 0, 3).nodes == (0, 1, 3)
    assert shortest_physical_path(topo, 3, 0).nodes == (3, 1, 0)


# -- split-vertex flow network ------------------------------------------------


def test_split_vertices_layout():
    g = OverlayGraph(n=3, out_edges=((1,), (2,), ()))
    net = split_vertices(g, s=0, d=2)
    arcs = list(zip(net.arc_tail, net.arc_head))
    # internal arc (2v -> 2v+1) for every vertex plus one arc per edge
    assert arcs == [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]
    assert len(arcs) == g.edge_count() + g.n
    assert net.source == 1  # 0_out
    assert net.sink == 4    # 2_in


def test_split_vertices_arc_count_general():
    for seed in range(5):
        rng = random.Random(seed)
        n = rng.randrange(4, 9)
        out = tuple(
            tuple(sorted({v for v in rng.sample(range(n), rng.randrange(n))
                          if v != u}))
            for u in range(n)
        )
        g = OverlayGraph(n=n, out_edges=out)
        net = split_vertices(g, s=0, d=n - 1)
        assert len(net.arc_tail) == g.edge_count() + n


# -- disjoint paths on hand graphs --------------------------------------------


def test_disjoint_paths_diamond():
    g = OverlayGraph(n=4, out_edges=((1, 2), (3,), (3,), ()))
    found = max_vertex_disjoint_paths(g, 0, 3)
    assert sorted(p.nodes for p in found) == [(0, 1, 3), (0, 2, 3)]


def test_disjoint_paths_direct_edge_adds_one():
    g = OverlayGraph(n=4, out_edges=((1, 2, 3), (3,), (3,), ()))
    found = max_vertex_disjoint_paths(g, 0, 3)
    assert len(found) == 3
    assert (0, 3) in {p.nodes for p in found}


def test_disjoint_paths_cut_vertex_limits_to_one():
    # everything funnels through vertex 3
    g = OverlayGraph(n=6, out_edges=((1, 2), (3,), (3,), (4, 5), (), ()))
    found = max_vertex_disjoint_paths(g, 0, 4)
    assert len(found) == 1


def test_disjoint_paths_none_when_unreachable():
    g = OverlayGraph(n=3, out_edges=((1,), (), ()))
    assert max_vertex_disjoint_paths(g, 0, 2) == []


def test_disjoint_paths_limit_and_determinism():
    g = OverlayGraph(n=6, out_edges=((1, 2, 3), (4,), (4,), (4,), (5,), ()))
    full = max_vertex_disjoint_paths(g, 0, 5)
    assert len(full) == 1  # all paths cross vertex 4
    g2 = OverlayGraph(n=8, out_edges=(
        (1, 2, 3), (7,), (7,), (7,), (), (), (), ()))
    assert len(max_vertex_disjoint_paths(g2, 0, 7)) == 3
    assert len(max_vertex_disjoint_paths(g2, 0, 7, limit=2)) == 2
    assert (max_vertex_disjoint_paths(g2, 0, 7)
            == max_vertex_disjoint_paths(g2, 0, 7))


def test_disjoint_path_properties_random_graphs():
    for seed in range(40):
        rng = random.Random(seed)
        n = rng.randrange(5, 12)
        out = tuple(
            tuple(sorted({v for v in range(n)
                          if v != u and rng.random() < 0.35}))
            for u in range(n)
        )
        g = OverlayGraph(n=n, out_edges=out)
        found = max_vertex_disjoint_paths(g, 0, n - 1)
        seen_internal = set()
        for p in found:
            assert p.nodes[0] == 0 and p.nodes[-1] == n - 1
            assert len(set(p.nodes)) == len(p.nodes)
            for u, v in zip(p.nodes, p.nodes[1:]):
                assert g.has_edge(u, v)
            mids = set(p.intermediates())
            assert not (mids & seen_internal)
            seen_internal |= mids


# -- brute-force oracle -------------------------------------------------------


def _simple_paths(g, s, d):
    out = []
    trail = [s]
    visited = {s}

    def dfs(u):
        if u == d:
            out.append(tuple(trail))
            return
        for v in g.out_edges[u]:
            if v not in visited:
                visited.add(v)
                trail.append(v)
                dfs(v)
                trail.pop()
                visited.remove(v)

    dfs(s)
    return out


def bruteforce_max_disjoint(g, s, d):
    """Exact maximum by packing simple paths over internal-vertex masks."""
    paths = _simple_paths(g, s, d)
    direct = int((s, d) in {(p[0], p[-1]) for p in paths if len(p) == 2})
    masked = []
    for p in paths:
        if len(p) == 2:
            continue
        mask = 0
        for v in p[1:-1]:
            mask |= 1 << v
        masked.append(mask)
    memo = {}

    def best(avail):
        if avail in memo:
            return memo[avail]
        top = 0
        for mask in masked:
            if mask & ~avail:
                continue
            top = max(top, 1 + best(avail & ~mask))
        memo[avail] = top
        return top

    full = 0
    for v in range(g.n):
        if v not in (s, d):
            full |= 1 << v
    return best(full) + direct


def _min_vertex_cut(g, s, d):
    """Smallest internal vertex set whose removal disconnects s from d.
    Only valid when there is no direct s->d edge."""
    internals = [v for v in range(g.n) if v not in (s, d)]

    def separated(removed):
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in g.out_edges[u]:
                if v in removed or v in seen:
                    continue
                if v == d:
                    return False
                seen.add(v)
                queue.append(v)
        return True

    for size in range(len(internals) + 1):
        from itertools import combinations
        for subset in combinations(internals, size):
            if separated(set(subset)):
                return size
    return len(internals)


def test_flow_count_matches_bruteforce():
    for seed in range(300):
        rng = random.Random(seed)
        n = rng.randrange(4, 8)
        p = rng.choice((0.2, 0.35, 0.5))
        out = tuple(
            tuple(sorted({v for v in range(n)
                          if v != u and rng.random() < p}))
            for u in range(n)
        )
        g = OverlayGraph(n=n, out_edges=out)
        found = max_vertex_disjoint_paths(g, 0, n - 1)
        want = bruteforce_max_disjoint(g, 0, n - 1)
        assert len(found) == want, f"seed {seed}"
        if not g.has_edge(0, n - 1):
            assert _min_vertex_cut(g, 0, n - 1) == want, f"seed {seed}"


# -- census and serialization -------------------------------------------------


def test_path_length_stats_counts_and_skips():
    g = OverlayGraph(n=5, out_edges=((1, 2), (4,), (4,), (), ()))
    stats = path_length_stats(g, [(0, 4), (0, 3), (1, 4)])
    assert stats.skipped == 1  # 0 -> 3 has no route
    assert stats.counts() == [2, 1]
    assert sorted(stats.lengths()) == [1, 2, 2]
    assert stats.count_mean() == pytest.approx(1.5)
    cdf = stats.length_cdf()
    assert cdf[0] == (1, pytest.approx(1 / 3))
    assert cdf[-1] == (2, pytest.approx(1.0))


def test_write_stats_csv_layout():
    g = OverlayGraph(n=4, out_edges=((1, 2), (3,), (3,), ()))
    stats = path_length_stats(g, [(0, 3)])
    buf = io.StringIO()
    write_stats_csv(stats, buf, comment="# test")
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# test"
    assert lines[1] == "pair_id,s,d,n_paths,lengths"
    assert lines[2] == "0,0,3,2,2;2"
