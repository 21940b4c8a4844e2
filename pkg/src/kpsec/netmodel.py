"""Physical radio topologies, keyring assignment, and the key-knowledge overlay.

The physical layer is a geometric graph: nodes placed uniformly in a square,
an undirected link wherever the squared distance is within the squared radio
range. The overlay layer is directed: node u can reach v in one overlay hop
exactly when v's public key sits in u's keyring.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .streams import np_stream


@dataclass(frozen=True)
class PhysicalTopology:
    n: int
    side: float
    radio_range: float
    positions: np.ndarray  # (n, 2), coordinates rounded to 1e-6
    neighbors: tuple[tuple[int, ...], ...]  # sorted adjacency lists

    @classmethod
    def from_positions(cls, positions, side: float, radio_range: float) -> "PhysicalTopology":
        pos = np.asarray(positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("positions must be an (n, 2) array")
        n = len(pos)
        if n < 2:
            raise ValueError("need at least two nodes")
        if side <= 0 or radio_range <= 0:
            raise ValueError("side and radio range must be positive")
        diff = pos[:, None, :] - pos[None, :, :]
        dist2 = (diff * diff).sum(axis=2)
        # adjacency decided on exact squared distance, no sqrt
        adj = dist2 <= radio_range * radio_range
        np.fill_diagonal(adj, False)
        neighbors = tuple(
            tuple(int(v) for v in np.flatnonzero(adj[u])) for u in range(n)
        )
        pos.setflags(write=False)
        return cls(n=n, side=float(side), radio_range=float(radio_range),
                   positions=pos, neighbors=neighbors)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbors[u]

    def degrees(self) -> list[int]:
        return [len(nbrs) for nbrs in self.neighbors]

    def edge_count(self) -> int:
        return sum(self.degrees()) // 2


def generate_topology(n: int, side: float, radio_range: float, seed: int) -> PhysicalTopology:
    """Drop n nodes uniformly in a side x side square.

    Coordinates are rounded to six decimals so the text serialization
    round-trips bit for bit.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    rng = np_stream(seed, "topology")
    positions = np.round(rng.uniform(0.0, side, size=(n, 2)), 6)
    return PhysicalTopology.from_positions(positions, side, radio_range)


@dataclass(frozen=True)
class Keyring:
    """The k public-key ids a node stores, drawn uniformly with replacement."""
    owner: int
    known: tuple[int, ...]


def assign_keyrings(n: int, k: int, seed: int) -> list[Keyring]:
    if k < 1:
        raise ValueError("keyring size must be at least 1")
    rng = np_stream(seed, "keyrings")
    draws = rng.integers(0, n, size=(n, k))
    return [Keyring(owner=i, known=tuple(int(x) for x in draws[i])) for i in range(n)]


@dataclass(frozen=True)
class OverlayGraph:
    """Directed graph of one-hop key knowledge; out-degree is at most k."""
    n: int
    out_edges: tuple[tuple[int, ...], ...]  # sorted, duplicates collapsed

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.out_edges[u]

    def edge_count(self) -> int:
        return sum(len(e) for e in self.out_edges)

    def in_degrees(self) -> list[int]:
        deg = [0] * self.n
        for u in range(self.n):
            for v in self.out_edges[u]:
                deg[v] += 1
        return deg


def build_overlay(keyrings: list[Keyring]) -> OverlayGraph:
    n = len(keyrings)
    out = []
    for ring in keyrings:
        # self-draws are legal in the keyring but never become an edge
        out.append(tuple(sorted({v for v in ring.known if v != ring.owner})))
    return OverlayGraph(n=n, out_edges=tuple(out))


def overlay_edge_probability(n: int, k: int) -> float:
    """Chance that a specific ordered pair (u, v), u != v, is an overlay edge."""
    return 1.0 - (1.0 - 1.0 / n) ** k


def save_network(fileobj, topo: PhysicalTopology, keyrings: list[Keyring], seed: int) -> None:
    """Line-oriented text format: header `n k side range seed`, then one
    line per node: `id x y key1..keyk` with six fractional digits."""
    if len(keyrings) != topo.n:
        raise ValueError("keyring count does not match topology")
    k = len(keyrings[0].known)
    close = False
    if isinstance(fileobj, (str, bytes)):
        fileobj = open(fileobj, "w")
        close = True
    try:
        fileobj.write(f"{topo.n} {k} {topo.side:.6f} {topo.radio_range:.6f} {seed}\n")
        for i in range(topo.n):
            x, y = topo.positions[i]
            keys = " ".join(str(v) for v in keyrings[i].known)
            fileobj.write(f"{i} {x:.6f} {y:.6f} {keys}\n")
    finally:
        if close:
            fileobj.close()


def load_network(fileobj) -> tuple[PhysicalTopology, list[Keyring], int]:
    close = False
    if isinstance(fileobj, (str, bytes)):
        fileobj = open(fileobj, "r")
        close = True
    try:
        line = fileobj.readline()
        while line.startswith("#"):
            line = fileobj.readline()
        header = line.split()
        if len(header) != 5:
            raise ValueError("malformed network header")
        n, k = int(header[0]), int(header[1])
        side, radio_range = float(header[2]), float(header[3])
        seed = int(header[4])
        positions = np.zeros((n, 2))
        keyrings = []
        for _ in range(n):
            parts = fileobj.readline().split()
            if len(parts) != 3 + k:
                raise ValueError("malformed node line")
            i = int(parts[0])
            positions[i] = (float(parts[1]), float(parts[2]))
            keyrings.append(Keyring(owner=i, known=tuple(int(v) for v in parts[3:])))
        keyrings.sort(key=lambda r: r.owner)
        topo = PhysicalTopology.from_positions(positions, side, radio_range)
        return topo, keyrings, seed
    finally:
        if close:
            fileobj.close()


def network_to_text(topo: PhysicalTopology, keyrings: list[Keyring], seed: int) -> str:
    buf = io.StringIO()
    save_network(buf, topo, keyrings, seed)
    return buf.getvalue()
