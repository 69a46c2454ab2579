"""Small named graphs and hypothesis strategies shared by the tests."""

from itertools import combinations

from hypothesis import strategies as st

from randflag.graph import Graph


def octahedron() -> Graph:
    # K_{2,2,2}: antipodal pairs (0,1), (2,3), (4,5).
    return Graph.from_edges(6, [(u, v) for u, v in combinations(range(6), 2) if v != u + 1 or u % 2])


def two_triangles_at_vertex() -> Graph:
    return Graph.from_edges(5, [(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)])


def triangle_with_pendant() -> Graph:
    return Graph.from_edges(4, [(0, 1), (0, 2), (1, 2), (2, 3)])


def star(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, v) for v in range(1, leaves + 1)])


def disjoint_union(a: Graph, b: Graph) -> Graph:
    shifted = [(u + a.n, v + a.n) for u, v in b.edges()]
    return Graph.from_edges(a.n + b.n, list(a.edges()) + shifted)


def graph_from_code(n: int, code: int) -> Graph:
    """The graph whose edges are the set bits of ``code`` over lex-ordered pairs."""
    pairs = list(combinations(range(n), 2))
    return Graph.from_edges(n, [e for i, e in enumerate(pairs) if code >> i & 1])


@st.composite
def graphs(draw, min_n: int = 0, max_n: int = 9) -> Graph:
    n = draw(st.integers(min_n, max_n))
    pairs = list(combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph.from_edges(n, [e for e, keep in zip(pairs, mask) if keep])
