"""Flag (clique) complexes of graphs, truncated at a dimension cap.

Cliques are enumerated by ordered extension: a face is only ever extended by
vertices larger than its last vertex that are adjacent to all its members.
Every clique is produced exactly once, and a depth-first walk emits the faces
of each dimension in lexicographic order without a sort.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterator

from .graph import Graph, common_mask, iter_bits

__all__ = [
    "Face",
    "FlagSkeleton",
    "build_skeleton",
    "iter_cliques",
    "count_maximal_cliques",
    "link_graph",
    "is_pure",
    "skeleton_to_json",
    "skeleton_from_json",
]

Face = tuple[int, ...]


def _above(v: int) -> int:
    # Mask clearing bits 0..v.
    return -1 << (v + 1)


def iter_cliques(g: Graph, max_size: int) -> Iterator[tuple[Face, int]]:
    """Depth-first over cliques of size ``1..max_size``.

    Yields ``(face, forward)`` where ``forward`` is the bitmask of common
    neighbours of ``face`` greater than its last vertex.
    """
    if max_size < 1:
        return
    rows = g.rows
    stack: list[tuple[Face, int]] = [((v,), rows[v] & _above(v)) for v in reversed(range(g.n))]
    while stack:
        face, fwd = stack.pop()
        yield face, fwd
        if len(face) < max_size and fwd:
            for w in reversed(list(iter_bits(fwd))):
                stack.append((face + (w,), fwd & rows[w] & _above(w)))


@dataclass(frozen=True, eq=False)
class FlagSkeleton:
    """The faces of ``X(g)`` of dimension at most ``cap``.

    ``faces[d]`` lists the ``d``-faces as strictly increasing vertex tuples in
    lexicographic order.  ``complete`` records whether the flag complex has no
    faces above ``cap``, i.e. whether the skeleton is the whole complex.
    """

    source: Graph
    cap: int
    faces: tuple[tuple[Face, ...], ...]
    complete: bool
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(fs) for fs in self.faces)

    @cached_property
    def dimension(self) -> int:
        """Largest ``d`` with a ``d``-face, ``-1`` for the empty complex."""
        for d in reversed(range(len(self.faces))):
            if self.faces[d]:
                return d
        return -1

    def index(self, d: int) -> dict[Face, int]:
        """Position of each ``d``-face in ``faces[d]``."""
        idx = self._index.get(d)
        if idx is None:
            idx = {f: i for i, f in enumerate(self.faces[d])}
            self._index[d] = idx
        return idx

    def __contains__(self, face: Face) -> bool:
        d = len(face) - 1
        return 0 <= d <= self.cap and tuple(face) in self.index(d)

    def restrict(self, cap: int) -> "FlagSkeleton":
        """The ``cap``-skeleton of this skeleton."""
        if not 0 <= cap <= self.cap:
            raise ValueError(f"cannot restrict a {self.cap}-skeleton to dimension {cap}")
        if cap == self.cap:
            return self
        complete = len(self.faces[cap + 1]) == 0
        return FlagSkeleton(self.source, cap, self.faces[: cap + 1], complete)


def build_skeleton(g: Graph, cap: int) -> FlagSkeleton:
    """All cliques of ``g`` with at most ``cap + 1`` vertices, as faces."""
    if cap < 0:
        raise ValueError(f"dimension cap must be non-negative, got {cap}")
    by_dim: list[list[Face]] = [[] for _ in range(cap + 1)]
    complete = True
    for face, fwd in iter_cliques(g, cap + 1):
        by_dim[len(face) - 1].append(face)
        if len(face) == cap + 1 and complete and fwd:
            complete = False
    return FlagSkeleton(g, cap, tuple(tuple(fs) for fs in by_dim), complete)


def count_maximal_cliques(g: Graph, size: int) -> int:
    """Number of ``size``-cliques contained in no ``(size + 1)``-clique."""
    if size < 1:
        raise ValueError(f"clique size must be at least 1, got {size}")
    rows = g.rows
    count = 0
    if size == 2:
        for u, row in enumerate(rows):
            for v in iter_bits(row & _above(u)):
                if not row & rows[v]:
                    count += 1
        return count
    # Carry the full common neighbourhood alongside the forward one.
    stack = [((v,), rows[v] & _above(v), rows[v]) for v in range(g.n)]
    while stack:
        face, fwd, common = stack.pop()
        if len(face) == size:
            if not common:
                count += 1
            continue
        for w in iter_bits(fwd):
            stack.append((face + (w,), fwd & rows[w] & _above(w), common & rows[w]))
    return count


def link_graph(sk: FlagSkeleton, face: Face) -> tuple[Graph, tuple[int, ...]]:
    """Graph induced on the common neighbourhood of ``face``.

    Returns the link and the original vertex label of each link vertex.
    """
    face = tuple(face)
    if face not in sk:
        raise KeyError(f"{face} is not a face of the skeleton")
    labels = tuple(iter_bits(common_mask(sk.source, face)))
    return sk.source.induced(labels), labels


def is_pure(sk: FlagSkeleton, D: int) -> bool:
    """Whether every face of dimension below ``D`` lies in some ``D``-face.

    A face extends to a ``D``-face iff every clique on the way up has a common
    neighbour, so it is enough that no face of dimension ``< D`` is maximal.
    """
    if not 0 <= D <= sk.cap:
        raise ValueError(f"purity dimension {D} outside 0..{sk.cap}")
    rows = sk.source.rows
    full = (1 << sk.source.n) - 1
    for d in range(D):
        for face in sk.faces[d]:
            m = full
            for v in face:
                m &= rows[v]
            if not m:
                return False
    return True


# -- JSON dump: {n, cap, f_vector, faces} ---------------------------------


def skeleton_to_json(sk: FlagSkeleton) -> dict[str, Any]:
    return {
        "n": sk.source.n,
        "cap": sk.cap,
        "f_vector": list(sk.f_vector),
        "faces": [list(f) for fs in sk.faces for f in fs],
    }


def skeleton_from_json(obj: dict[str, Any] | str) -> FlagSkeleton:
    """Rebuild a skeleton from its dump, checking it is a flag skeleton."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    n, cap = int(obj["n"]), int(obj["cap"])
    edges = [tuple(f) for f in obj["faces"] if len(f) == 2]
    sk = build_skeleton(Graph.from_edges(n, edges), cap)
    stored = sorted(tuple(f) for f in obj["faces"])
    mine = sorted(f for fs in sk.faces for f in fs)
    if stored != mine:
        raise ValueError("face list is not the flag skeleton of its 1-skeleton")
    if list(obj.get("f_vector", sk.f_vector)) != list(sk.f_vector):
        raise ValueError("f_vector does not match the faces")
    return sk
