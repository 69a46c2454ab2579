"""Normalized graph Laplacians and their spectra.

The eigensolver is the classical dense one: Householder reduction to a
symmetric tridiagonal matrix, then implicit-shift QL iteration on the
tridiagonal for all eigenvalues.  ``lambda2`` only needs one eigenvalue and
uses Sturm-sequence bisection on the same tridiagonal instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph, delete_edge

__all__ = [
    "SpectralError",
    "IsolatedVertexError",
    "DisconnectedGraphError",
    "ConvergenceError",
    "NormalizedLaplacian",
    "Spectrum",
    "PerturbationRecord",
    "laplacian",
    "tridiagonalize",
    "tridiagonal_eigenvalues",
    "tridiagonal_kth_eigenvalue",
    "eigenvalues_symmetric",
    "spectrum",
    "lambda2",
    "perturbation_check",
    "EIG_TOL",
    "KERNEL_TOL",
]

EIG_TOL = 1e-9
KERNEL_TOL = 1e-6


class SpectralError(ValueError):
    pass


class IsolatedVertexError(SpectralError):
    """The averaging operator is undefined at a degree-zero vertex."""

    def __init__(self, vertex: int):
        super().__init__(f"vertex {vertex} has degree 0; normalized Laplacian undefined")
        self.vertex = vertex


class DisconnectedGraphError(SpectralError):
    def __init__(self, components: int):
        super().__init__(f"graph has {components} connected components; spectral gap undefined")
        self.components = components


class ConvergenceError(ArithmeticError):
    def __init__(self, index: int, iterations: int):
        super().__init__(f"QL iteration for eigenvalue {index} did not converge after {iterations} iterations")
        self.index = index
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class NormalizedLaplacian:
    """``I - D^{-1/2} A D^{-1/2}``, similar to ``I - (averaging operator)``."""

    order: int
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple[float, ...]
    tolerance: float = EIG_TOL

    @property
    def lambda2(self) -> float:
        if len(self.eigenvalues) < 2:
            raise SpectralError("spectrum has fewer than two eigenvalues")
        return self.eigenvalues[1]

    def kernel_dimension(self, tol: float = KERNEL_TOL) -> int:
        return sum(1 for x in self.eigenvalues if abs(x) < tol)

    def to_json(self) -> list[float]:
        return list(self.eigenvalues)

    def __len__(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class PerturbationRecord:
    """Wielandt-Hoffman comparison for one edge deletion."""

    lhs: float
    rhs: float
    ok: bool


def _check_degrees(g: Graph) -> list[int]:
    deg = g.degrees()
    for v, d in enumerate(deg):
        if d == 0:
            raise IsolatedVertexError(v)
    return deg


def laplacian(g: Graph) -> NormalizedLaplacian:
    deg = _check_degrees(g)
    n = g.n
    inv_sqrt = 1.0 / np.sqrt(np.asarray(deg, dtype=float))
    adj = g.adjacency_matrix().astype(float)
    mat = np.eye(n) - adj * inv_sqrt[:, None] * inv_sqrt[None, :]
    return NormalizedLaplacian(n, mat)


def tridiagonalize(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction of a symmetric matrix.

    Returns ``(diag, offdiag)`` of an orthogonally similar tridiagonal matrix;
    ``offdiag[i]`` couples rows ``i`` and ``i + 1``.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("expected a square matrix")
    off = np.zeros(max(n - 1, 0))
    for k in range(n - 2):
        x = a[k + 1:, k]
        norm = math.sqrt(float(x @ x))
        if norm == 0.0:
            continue
        alpha = -norm if x[0] >= 0 else norm
        v = x.copy()
        v[0] -= alpha
        vnorm = math.sqrt(float(v @ v))
        if vnorm == 0.0:
            off[k] = x[0]
            continue
        v /= vnorm
        sub = a[k + 1:, k + 1:]
        p = sub @ v
        w = p - (v @ p) * v
        sub -= 2.0 * (np.outer(v, w) + np.outer(w, v))
        off[k] = alpha
    if n >= 2:
        off[n - 2] = a[n - 1, n - 2]
    return np.diagonal(a).copy(), off


def tridiagonal_eigenvalues(diag, offdiag, max_iter: int = 60) -> list[float]:
    """All eigenvalues of a symmetric tridiagonal matrix, ascending (implicit QL)."""
    d = [float(x) for x in diag]
    n = len(d)
    e = [float(x) for x in offdiag] + [0.0]
    eps = np.finfo(float).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise ConvergenceError(l, it - 1)
            # Wilkinson-style shift from the leading 2x2 block.
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    d.sort()
    return d


def _count_below(d: list[float], e2: list[float], x: float) -> int:
    # Negative pivots of the LDL^T factorization of T - xI.
    count = 0
    q = d[0] - x
    if q < 0:
        count += 1
    for i in range(1, len(d)):
        if q == 0.0:
            q = 1e-300
        q = d[i] - x - e2[i - 1] / q
        if q < 0:
            count += 1
    return count


def tridiagonal_kth_eigenvalue(diag, offdiag, k: int, tol: float = 1e-13) -> float:
    """The ``k``-th smallest (0-based) eigenvalue by Sturm bisection."""
    d = [float(x) for x in diag]
    n = len(d)
    if not 0 <= k < n:
        raise IndexError(f"eigenvalue index {k} out of range for order {n}")
    e = [float(x) for x in offdiag]
    e2 = [x * x for x in e]
    radius = [0.0] * n
    for i, x in enumerate(e):
        radius[i] += abs(x)
        radius[i + 1] += abs(x)
    lo = min(di - ri for di, ri in zip(d, radius))
    hi = max(di + ri for di, ri in zip(d, radius))
    while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _count_below(d, e2, mid) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def eigenvalues_symmetric(a: np.ndarray) -> list[float]:
    d, e = tridiagonalize(a)
    return tridiagonal_eigenvalues(d, e)


def spectrum(lap: NormalizedLaplacian) -> Spectrum:
    return Spectrum(tuple(eigenvalues_symmetric(lap.matrix)))


def lambda2(g: Graph) -> float:
    """Spectral gap of a connected graph with no isolated vertices."""
    from .graph import component_count

    _check_degrees(g)
    comps = component_count(g)
    if comps != 1:
        raise DisconnectedGraphError(comps)
    if g.n < 2:
        raise SpectralError("spectral gap needs at least two vertices")
    d, e = tridiagonalize(laplacian(g).matrix)
    return tridiagonal_kth_eigenvalue(d, e, 1)


def perturbation_check(g: Graph, e: tuple[int, int]) -> PerturbationRecord:
    """Compare ascending-paired eigenvalue shifts with the Frobenius distance.

    Both ``g`` and ``g - e`` must have all degrees positive.
    """
    h = delete_edge(g, e)
    a = laplacian(g)
    b = laplacian(h)
    la = eigenvalues_symmetric(a.matrix)
    lb = eigenvalues_symmetric(b.matrix)
    lhs = float(sum((x - y) ** 2 for x, y in zip(la, lb)))
    diff = a.matrix - b.matrix
    rhs = float(np.sum(diff * diff))
    return PerturbationRecord(lhs, rhs, lhs <= rhs + 1e-8)
