"""Simplicial boundary matrices and rational Betti numbers.

Two independent rank routes are provided:

* :func:`rank_exact` -- fraction-free column reduction over the integers,
  exact over Q.  Slow but trustworthy; the oracle.
* :func:`rank_modular` -- sparse elimination over GF(p) for one or more large
  primes, with singleton peeling and a fewest-entries pivot rule.  Since
  ``rank_p(M) <= rank_Q(M)`` for every prime, the maximum over several primes
  is the best available lower bound and equals the rational rank unless every
  prime divides all maximal minors.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from math import gcd
from typing import Any, Sequence

import numpy as np

from .complex import FlagSkeleton

__all__ = [
    "IntMatrix",
    "BoundaryMatrix",
    "BettiVector",
    "CapTooSmallError",
    "DEFAULT_PRIMES",
    "boundary_matrix",
    "rank_exact",
    "rank_modular",
    "rank_mod_p",
    "boundary_ranks",
    "betti",
    "morse_lower_bound",
    "compose_is_zero",
]

# Two primes near 2**31, both above 2**30.
DEFAULT_PRIMES = (2147483647, 2147483629)


class CapTooSmallError(ValueError):
    """Requested Betti degree needs faces above the skeleton's cap."""


@dataclass(frozen=True)
class IntMatrix:
    """Sparse integer matrix stored by columns.

    ``columns[j]`` is a tuple of ``(row, value)`` pairs with increasing rows
    and nonzero values.
    """

    n_rows: int
    n_cols: int
    columns: tuple[tuple[tuple[int, int], ...], ...]

    @classmethod
    def from_dense(cls, a: Any) -> "IntMatrix":
        a = np.asarray(a, dtype=object)
        if a.ndim != 2:
            raise ValueError("expected a 2-d array")
        cols = tuple(
            tuple((i, int(a[i, j])) for i in range(a.shape[0]) if a[i, j] != 0)
            for j in range(a.shape[1])
        )
        return cls(a.shape[0], a.shape[1], cols)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols), dtype=np.int64)
        for j, col in enumerate(self.columns):
            for i, v in col:
                out[i, j] = v
        return out

    @property
    def nnz(self) -> int:
        return sum(len(c) for c in self.columns)

    @property
    def T(self) -> "IntMatrix":
        rows: list[list[tuple[int, int]]] = [[] for _ in range(self.n_rows)]
        for j, col in enumerate(self.columns):
            for i, v in col:
                rows[i].append((j, v))
        return IntMatrix(self.n_cols, self.n_rows, tuple(tuple(r) for r in rows))


@dataclass(frozen=True)
class BoundaryMatrix(IntMatrix):
    """``d``-th boundary map: columns are ``d``-faces, rows ``(d-1)``-faces."""

    dim: int = 0


def boundary_matrix(sk: FlagSkeleton, d: int) -> BoundaryMatrix:
    """Signed incidence between ``d``-faces and their facets.

    The facet dropping position ``i`` of a sorted face gets sign ``(-1)**i``.
    Rows and columns follow the lexicographic face order of the skeleton.
    """
    if not 1 <= d <= sk.cap:
        raise ValueError(f"boundary dimension {d} outside 1..{sk.cap}")
    row_of = sk.index(d - 1)
    cols = []
    for face in sk.faces[d]:
        # Dropping the last vertex gives the smallest facet, so walk backwards
        # to emit rows in increasing order.
        entries = []
        for i in range(d, -1, -1):
            facet = face[:i] + face[i + 1:]
            entries.append((row_of[facet], -1 if i & 1 else 1))
        cols.append(tuple(entries))
    return BoundaryMatrix(len(sk.faces[d - 1]), len(sk.faces[d]), tuple(cols), dim=d)


def compose_is_zero(a: IntMatrix, b: IntMatrix) -> bool:
    """Exact check that ``a @ b`` vanishes (``b``'s rows index ``a``'s columns)."""
    if a.n_cols != b.n_rows:
        raise ValueError("shape mismatch")
    for col in b.columns:
        acc: dict[int, int] = {}
        for k, bv in col:
            for i, av in a.columns[k]:
                acc[i] = acc.get(i, 0) + av * bv
        if any(acc.values()):
            return False
    return True


# -- exact route -------------------------------------------------------------


def rank_exact(m: IntMatrix, bound: int | None = None) -> int:
    """Rank over Q by fraction-free column reduction.

    Each column is reduced against earlier pivot columns keyed by their lowest
    nonzero row, using ``c <- a*c - b*v`` followed by division by the content
    so entries stay small integers.  No division with remainder ever occurs.

    ``bound`` is an a-priori upper bound on the rank (for a boundary matrix,
    the nullity of the next map down); reduction stops once it is reached.
    """
    limit = min(m.n_rows, m.n_cols) if bound is None else min(bound, m.n_rows, m.n_cols)
    if limit <= 0:
        return 0
    pivots: dict[int, dict[int, int]] = {}
    rank = 0
    for col in m.columns:
        c = dict(col)
        while c:
            low = max(c)
            v = pivots.get(low)
            if v is None:
                break
            a, b = v[low], c[low]
            g = gcd(a, b)
            a, b = a // g, b // g
            new = {i: a * x for i, x in c.items()}
            for i, y in v.items():
                x = new.get(i, 0) - b * y
                if x:
                    new[i] = x
                else:
                    new.pop(i, None)
            content = 0
            for x in new.values():
                content = gcd(content, x)
                if content == 1:
                    break
            if content > 1:
                new = {i: x // content for i, x in new.items()}
            c = new
        if c:
            pivots[max(c)] = c
            rank += 1
            if rank >= limit:
                break
    return rank


# -- modular route -----------------------------------------------------------


def rank_mod_p(m: IntMatrix, prime: int, bound: int | None = None) -> int:
    """Rank over GF(prime).

    When there are many more columns than the a-priori ``bound`` the columns
    are streamed through a lowest-pivot reduction that stops as soon as the
    bound is reached.  Otherwise the whole matrix goes to a sparse elimination
    which pivots, in priority order, on rows with a single entry, columns with
    a single entry (neither causes fill-in), then the shortest column at its
    sparsest row.
    """
    limit = min(m.n_rows, m.n_cols) if bound is None else min(bound, m.n_rows, m.n_cols)
    if limit <= 0:
        return 0
    if bound is not None and m.n_cols > 2 * limit:
        return _reduce_columns_mod_p(m.columns, prime, limit)
    return _eliminate_mod_p(m.columns, prime, limit)


def _reduce_columns_mod_p(columns: Sequence[tuple[tuple[int, int], ...]], prime: int, limit: int) -> int:
    pivots: dict[int, tuple[dict[int, int], int]] = {}
    rank = 0
    for col in columns:
        c = {i: v % prime for i, v in col if v % prime}
        while c:
            low = max(c)
            hit = pivots.get(low)
            if hit is None:
                break
            v, inv = hit
            f = c[low] * inv % prime
            for i, y in v.items():
                x = (c.get(i, 0) - f * y) % prime
                if x:
                    c[i] = x
                else:
                    c.pop(i, None)
        if c:
            low = max(c)
            pivots[low] = (c, pow(c[low], prime - 2, prime))
            rank += 1
            if rank >= limit:
                break
    return rank


def _eliminate_mod_p(columns: Sequence[tuple[tuple[int, int], ...]], prime: int, limit: int) -> int:
    cols: dict[int, dict[int, int]] = {}
    rowsets: dict[int, set[int]] = {}
    for j, col in enumerate(columns):
        c = {i: v % prime for i, v in col if v % prime}
        if c:
            cols[j] = c
            for i in c:
                rowsets.setdefault(i, set()).add(j)

    row_q = [i for i, s in rowsets.items() if len(s) == 1]
    col_q = [j for j, c in cols.items() if len(c) == 1]
    heap = [(len(c), j) for j, c in cols.items()]
    heapq.heapify(heap)
    rank = 0

    def drop_column(j: int) -> None:
        for i in cols.pop(j):
            s = rowsets[i]
            s.discard(j)
            if len(s) == 1:
                row_q.append(i)
            elif not s:
                del rowsets[i]

    def drop_row(i: int) -> None:
        for j in rowsets.pop(i, ()):
            c = cols[j]
            del c[i]
            if len(c) == 1:
                col_q.append(j)
            elif not c:
                del cols[j]
            heapq.heappush(heap, (len(c), j))

    while cols and rank < limit:
        if row_q:
            i = row_q.pop()
            s = rowsets.get(i)
            if not s or len(s) != 1:
                continue
            (j,) = s
            drop_column(j)
            rowsets.pop(i, None)
            rank += 1
            continue
        if col_q:
            j = col_q.pop()
            c = cols.get(j)
            if c is None or len(c) != 1:
                continue
            (i,) = c
            rowsets[i].discard(j)
            del cols[j]
            drop_row(i)
            rank += 1
            continue
        length, j = heapq.heappop(heap)
        c = cols.get(j)
        if c is None or len(c) != length:
            continue
        r = min(c, key=lambda i: len(rowsets[i]))
        inv = pow(c[r], prime - 2, prime)
        for k in list(rowsets[r]):
            if k == j:
                continue
            ck = cols[k]
            f = ck[r] * inv % prime
            for i, x in c.items():
                y = (ck.get(i, 0) - f * x) % prime
                if y:
                    if i not in ck:
                        rowsets[i].add(k)
                    ck[i] = y
                elif i in ck:
                    del ck[i]
                    rowsets[i].discard(k)
            if len(ck) == 1:
                col_q.append(k)
            elif not ck:
                del cols[k]
            else:
                heapq.heappush(heap, (len(ck), k))
        # Row r now only meets column j.
        drop_column(j)
        rowsets.pop(r, None)
        rank += 1
        # Rows emptied or made singleton by cancellation are picked up lazily.
        for i in c:
            s = rowsets.get(i)
            if s is not None and len(s) == 1:
                row_q.append(i)
    return rank


def rank_modular(m: IntMatrix, primes: Sequence[int] = DEFAULT_PRIMES, bound: int | None = None) -> int:
    """Maximum of the ranks of ``m`` modulo each prime in ``primes``."""
    primes = list(primes)
    if not primes:
        raise ValueError("need at least one prime")
    if len(set(primes)) != len(primes):
        raise ValueError("primes must be distinct")
    for q in primes:
        if q <= 2**30:
            raise ValueError(f"prime {q} is not above 2**30")
    return max(rank_mod_p(m, q, bound) for q in primes)


# -- Betti numbers -----------------------------------------------------------


@dataclass(frozen=True)
class BettiVector:
    """Betti numbers with the data that produced them.

    ``ranks[d]`` is ``rank(boundary_d)`` for ``d = 0..cap`` (``ranks[0] = 0``).
    ``betti`` covers degrees ``0..len(betti)-1``.
    """

    f_vector: tuple[int, ...]
    ranks: tuple[int, ...]
    betti: tuple[int, ...]
    method: str
    primes: tuple[int, ...] = ()
    reduced: bool = False

    def __getitem__(self, d: int) -> int:
        return self.betti[d]

    @property
    def euler_characteristic(self) -> int:
        return sum((-1) ** d * f for d, f in enumerate(self.f_vector))

    def euler_holds(self) -> bool:
        """``sum (-1)^d f_d == sum (-1)^d beta_d`` on the reported (unreduced) degrees."""
        b = list(self.betti)
        if self.reduced and self.f_vector and self.f_vector[0]:
            b[0] += 1
        top = len(b) - 1
        chi_f = sum((-1) ** d * f for d, f in enumerate(self.f_vector[: top + 1]))
        # A truncated report still telescopes if the next rank is included.
        nxt = self.ranks[top + 1] if top + 1 < len(self.ranks) else 0
        return chi_f - (-1) ** top * nxt == sum((-1) ** d * x for d, x in enumerate(b))

    def support(self) -> tuple[int, ...]:
        return tuple(d for d, x in enumerate(self.betti) if x)

    def to_json(self) -> dict[str, Any]:
        return {
            "f_vector": list(self.f_vector),
            "ranks": list(self.ranks),
            "betti": list(self.betti),
            "method": self.method,
            "primes": list(self.primes),
            "reduced": self.reduced,
        }


def boundary_ranks(
    sk: FlagSkeleton,
    top: int,
    method: str = "modular",
    primes: Sequence[int] = DEFAULT_PRIMES,
) -> tuple[tuple[int, ...], str]:
    """``rank(boundary_d)`` for ``d = 0..top``.

    Ranks are computed bottom-up so each can be capped by the nullity of the
    map below: ``rank(d_{d+1}) <= f_d - rank(d_d)``.  For ``method="modular"``
    the two-prime result is escalated to the exact route when the primes
    disagree; the returned method string records whether that happened.
    """
    if method not in ("modular", "exact"):
        raise ValueError(f"unknown rank method {method!r}")
    f = sk.f_vector
    ranks = [0]
    used = method
    for d in range(1, top + 1):
        m = boundary_matrix(sk, d)
        bound = f[d - 1] - ranks[d - 1]
        if method == "exact":
            r = rank_exact(m, bound)
        else:
            per_prime = [rank_mod_p(m, q, bound) for q in primes]
            r = max(per_prime)
            if len(set(per_prime)) > 1:
                r = rank_exact(m, bound)
                used = "modular+exact"
        ranks.append(r)
    return tuple(ranks), used


def betti(
    sk: FlagSkeleton,
    method: str = "modular",
    *,
    max_degree: int | None = None,
    reduced: bool = False,
    primes: Sequence[int] = DEFAULT_PRIMES,
    of_skeleton: bool = False,
) -> BettiVector:
    """Rational Betti numbers of the flag complex from its skeleton.

    ``beta_d = f_d - rank(d_d) - rank(d_{d+1})`` needs the ``(d+1)``-faces, so
    degrees up to ``cap - 1`` are available, and ``cap`` too when the skeleton
    is the whole complex.  With ``of_skeleton=True`` the skeleton is treated
    as a complex in its own right and all degrees ``0..cap`` are reported.

    Without ``max_degree`` the report stops at the dimension of the complex;
    with it, exactly ``max_degree + 1`` degrees are reported.
    """
    primes = tuple(primes)
    if method == "modular":
        for q in primes:
            if q <= 2**30:
                raise ValueError(f"prime {q} is not above 2**30")
        if len(set(primes)) != len(primes) or not primes:
            raise ValueError("need distinct primes")
    available = sk.cap if (sk.complete or of_skeleton) else sk.cap - 1
    if max_degree is None:
        top = min(available, sk.dimension)
    else:
        if max_degree < 0:
            raise ValueError("max_degree must be non-negative")
        if max_degree > available:
            raise CapTooSmallError(
                f"degree {max_degree} needs the {max_degree + 1}-skeleton, have cap {sk.cap}"
            )
        top = max_degree
    f = sk.f_vector
    rank_top = min(top + 1, sk.cap)
    ranks, used = boundary_ranks(sk, rank_top, method, primes)
    ranks = ranks + (0,) * (top + 2 - len(ranks))
    values = [f[d] - ranks[d] - ranks[d + 1] if d <= sk.cap else 0 for d in range(top + 1)]
    if reduced and values and f and f[0]:
        values[0] -= 1
    if any(x < 0 for x in values):
        raise ArithmeticError(f"negative Betti number {values}; ranks {ranks} inconsistent")
    return BettiVector(
        f_vector=f,
        ranks=ranks[: sk.cap + 1],
        betti=tuple(values),
        method=used,
        primes=primes if method == "modular" else (),
        reduced=reduced,
    )


def morse_lower_bound(f: Sequence[int], k: int) -> int:
    """Weak Morse bound ``f_k - f_{k-1} - f_{k+1}`` on ``beta_k`` (missing entries are 0)."""
    def at(i: int) -> int:
        return f[i] if 0 <= i < len(f) else 0

    return at(k) - at(k - 1) - at(k + 1)
