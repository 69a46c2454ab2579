"""Simple undirected graphs on ``0..n-1`` stored as packed bit rows.

Row ``v`` of a :class:`Graph` is a Python integer whose bit ``u`` is set iff
``u`` and ``v`` are adjacent.  Common neighbourhoods are then a chain of
bitwise ANDs, which is what clique enumeration spends its time on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Graph",
    "Seed",
    "EdgeListError",
    "sample_gnp",
    "degree",
    "common_neighbors",
    "common_mask",
    "is_connected",
    "component_count",
    "delete_edge",
    "iter_bits",
    "read_edge_list",
    "parse_edge_list",
    "write_edge_list",
    "format_edge_list",
]


class EdgeListError(ValueError):
    """Malformed edge-list input; ``lineno`` is 1-based."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class Graph:
    """Immutable simple graph.

    Parameters
    ----------
    n : int
        Number of vertices.
    rows : sequence of int
        Adjacency bitmasks, one per vertex.  Validated for symmetry and the
        absence of self-loops.
    """

    __slots__ = ("n", "rows", "_edge_count")

    def __init__(self, n: int, rows: Sequence[int]):
        if n < 0:
            raise ValueError(f"vertex count must be non-negative, got {n}")
        if len(rows) != n:
            raise ValueError(f"expected {n} adjacency rows, got {len(rows)}")
        rows = tuple(int(r) for r in rows)
        full = (1 << n) - 1
        ordered_pairs = 0
        for v, row in enumerate(rows):
            if row < 0 or row & ~full:
                raise ValueError(f"row {v} references vertices outside 0..{n - 1}")
            if (row >> v) & 1:
                raise ValueError(f"self-loop at vertex {v}")
            for u in iter_bits(row >> (v + 1)):
                if not (rows[u + v + 1] >> v) & 1:
                    raise ValueError(f"adjacency not symmetric at ({v}, {u + v + 1})")
            ordered_pairs += row.bit_count()
        if ordered_pairs % 2:
            raise ValueError("adjacency not symmetric")
        self.n = n
        self.rows = rows
        self._edge_count = ordered_pairs // 2

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        rows = [0] * n
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, rows)

    @classmethod
    def from_adjacency_matrix(cls, adj: np.ndarray) -> "Graph":
        adj = np.asarray(adj, dtype=bool)
        n = adj.shape[0]
        if adj.shape != (n, n):
            raise ValueError("adjacency matrix must be square")
        return cls(n, _pack_rows(adj))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, [0] * n)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls(n, [full ^ (1 << v) for v in range(n)])

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        if n < 3:
            raise ValueError("a cycle needs at least 3 vertices")
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    # -- queries ------------------------------------------------------------

    @property
    def edge_count(self) -> int:
        return self._edge_count

    def has_edge(self, u: int, v: int) -> bool:
        self._check_vertex(u)
        self._check_vertex(v)
        return bool((self.rows[u] >> v) & 1)

    def neighbors(self, v: int) -> list[int]:
        self._check_vertex(v)
        return list(iter_bits(self.rows[v]))

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges ``(u, v)`` with ``u < v`` in lexicographic order."""
        for u, row in enumerate(self.rows):
            for v in iter_bits(row >> (u + 1)):
                yield u, u + 1 + v

    def degrees(self) -> list[int]:
        return [r.bit_count() for r in self.rows]

    def adjacency_matrix(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges():
            adj[u, v] = adj[v, u] = True
        return adj

    def induced(self, vertices: Sequence[int]) -> "Graph":
        """Induced subgraph, relabelled so ``vertices[i]`` becomes ``i``."""
        pos = {v: i for i, v in enumerate(vertices)}
        mask = 0
        for v in vertices:
            self._check_vertex(v)
            mask |= 1 << v
        rows = []
        for v in vertices:
            r = 0
            for u in iter_bits(self.rows[v] & mask):
                r |= 1 << pos[u]
            rows.append(r)
        return Graph(len(vertices), rows)

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range for n={self.n}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.n, self.rows))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count})"


@dataclass(frozen=True)
class Seed:
    """Reproducible per-trial randomness.

    ``master`` is a 64-bit run seed; ``stream`` indexes the trial.  The pair is
    mixed by :class:`numpy.random.SeedSequence` into a counter-based Philox
    generator, so distinct streams never share state.
    """

    master: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.master < 2**64:
            raise ValueError("master seed must be a 64-bit unsigned integer")
        if self.stream < 0:
            raise ValueError("stream index must be non-negative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master, spawn_key=(self.stream,))
        return np.random.Generator(np.random.Philox(ss))


def _pack_rows(adj: np.ndarray) -> list[int]:
    packed = np.packbits(adj, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def _pair_from_index(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Pairs u < v enumerated as k = v(v-1)/2 + u.
    v = np.floor((1.0 + np.sqrt(1.0 + 8.0 * k.astype(np.float64))) / 2.0).astype(np.int64)
    v -= (v * (v - 1) // 2) > k
    v += ((v + 1) * v // 2) <= k
    u = k - v * (v - 1) // 2
    return u, v


# Below this density the sampler draws an edge count and then positions;
# above it one uniform per pair is cheaper.
_SPARSE_DENSITY = 0.02


def sample_gnp(n: int, p: float, seed: Seed) -> Graph:
    """Sample ``G(n, p)``: each of the ``C(n, 2)`` pairs independently with probability ``p``."""
    if n < 0:
        raise ValueError(f"vertex count must be non-negative, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    pairs = n * (n - 1) // 2
    rng = seed.generator()
    if p < _SPARSE_DENSITY:
        m = int(rng.binomial(pairs, p)) if pairs else 0
        k = rng.choice(pairs, size=m, replace=False) if m else np.empty(0, dtype=np.int64)
        us, vs = _pair_from_index(np.asarray(k, dtype=np.int64))
        rows = [0] * n
        for u, v in zip(us.tolist(), vs.tolist()):
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return Graph(n, rows)
    iu, iv = np.triu_indices(n, 1)
    keep = rng.random(pairs) < p
    adj = np.zeros((n, n), dtype=bool)
    adj[iu[keep], iv[keep]] = True
    adj |= adj.T
    return Graph(n, _pack_rows(adj))


def degree(g: Graph, v: int) -> int:
    g._check_vertex(v)
    return g.rows[v].bit_count()


def common_mask(g: Graph, s: Iterable[int]) -> int:
    """Bitmask of vertices adjacent to every member of ``s`` (members excluded)."""
    mask = (1 << g.n) - 1
    members = 0
    for v in s:
        g._check_vertex(v)
        mask &= g.rows[v]
        members |= 1 << v
    return mask & ~members


def common_neighbors(g: Graph, s: Iterable[int]) -> frozenset[int]:
    return frozenset(iter_bits(common_mask(g, s)))


def _component_masks(g: Graph) -> list[int]:
    unseen = (1 << g.n) - 1
    comps = []
    while unseen:
        start = unseen & -unseen
        seen = frontier = start
        while frontier:
            reach = 0
            for v in iter_bits(frontier):
                reach |= g.rows[v]
            frontier = reach & ~seen
            seen |= frontier
        comps.append(seen)
        unseen &= ~seen
    return comps


def component_count(g: Graph) -> int:
    return len(_component_masks(g))


def is_connected(g: Graph) -> bool:
    if g.n == 0:
        raise ValueError("connectivity is undefined for the graph with no vertices")
    return component_count(g) == 1


def delete_edge(g: Graph, e: tuple[int, int]) -> Graph:
    u, v = e
    if not g.has_edge(u, v):
        raise KeyError(f"edge ({u}, {v}) not in graph")
    rows = list(g.rows)
    rows[u] &= ~(1 << v)
    rows[v] &= ~(1 << u)
    return Graph(g.n, rows)


# -- edge-list text format: "n m" header, then m lines "u v" with u < v ------


def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.edge_count}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def write_edge_list(g: Graph, fh: IO[str]) -> None:
    fh.write(format_edge_list(g))


def parse_edge_list(text: str) -> Graph:
    lines = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, toks) for i, toks in lines if toks]
    if not lines:
        raise EdgeListError(1, "empty input, expected header 'n m'")

    def ints(lineno: int, toks: list[str]) -> tuple[int, int]:
        if len(toks) != 2:
            raise EdgeListError(lineno, f"expected 2 integers, found {len(toks)} fields")
        try:
            a, b = int(toks[0]), int(toks[1])
        except ValueError:
            raise EdgeListError(lineno, f"non-integer field in {' '.join(toks)!r}") from None
        return a, b

    hdr_line, hdr = lines[0]
    n, m = ints(hdr_line, hdr)
    if n < 0 or m < 0:
        raise EdgeListError(hdr_line, "negative vertex or edge count")
    body = lines[1:]
    if len(body) != m:
        where = body[m][0] if len(body) > m else (body[-1][0] + 1 if body else hdr_line + 1)
        raise EdgeListError(where, f"header declares {m} edges, found {len(body)}")
    rows = [0] * n
    for lineno, toks in body:
        u, v = ints(lineno, toks)
        if not u < v:
            raise EdgeListError(lineno, f"expected u < v, got {u} {v}")
        if u < 0 or v >= n:
            raise EdgeListError(lineno, f"vertex out of range 0..{n - 1}")
        if (rows[u] >> v) & 1:
            raise EdgeListError(lineno, f"duplicate edge {u} {v}")
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    return Graph(n, rows)


def read_edge_list(fh: IO[str]) -> Graph:
    return parse_edge_list(fh.read())
