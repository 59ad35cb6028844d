"""Brute-force finite-difference check of quantum graph spectra.

The graph is meshed edge by edge and the quadratic form

    h[u] = sum_e int |u'|^2 + q |u|^2  +  sum_v gamma_v |U_v|^2

is discretized with piecewise-linear elements and a lumped (diagonal) mass.
At a vertex with phases ``z_j`` the edge-end values are ``conj(z_j) U_v``,
so ``z_j u_j(v) = U_v`` holds exactly and the phases only appear in the
stiffness couplings between a vertex and its neighbouring grid points.  On an
interior node the scheme reduces to ``(-u[i-1] + 2u[i] - u[i+1]) / h^2 + q u``.
Because everything comes from a quadratic form, the matrix is Hermitian by
construction.  The method shares nothing with the transfer-matrix solver.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import GridTooCoarse
from .graph_model import CompactGraph, ConditionKind

MIN_POINTS = 16


@dataclass(frozen=True)
class DiscreteOperator:
    """Symmetrized operator ``M^{-1/2} K M^{-1/2}`` and its bookkeeping.

    ``index[r]`` names the unknown behind row ``r``: ``("vertex", v)`` or
    ``("edge", edge_id, x)``.  ``spacing[edge_id]`` lists the mesh widths.
    """

    H: np.ndarray
    mass: np.ndarray
    index: tuple
    spacing: dict

    @property
    def size(self) -> int:
        return self.H.shape[0]


def _edge_mesh(edge, N: float):
    """Node positions and per-interval potential values along one edge."""
    xs = [0.0]
    qs = []
    pos = 0.0
    for length, q in edge.potential:
        n = max(1, math.ceil(N * length - 1e-9))
        h = length / n
        for _ in range(n):
            qs.append((q, h))
        xs.extend(pos + h * np.arange(1, n + 1))
        pos += length
    xs = np.asarray(xs)
    xs[-1] = edge.length
    return xs, qs


def discretize(g: CompactGraph, N: float,
               potentials: Mapping[str, Callable[[np.ndarray], np.ndarray]] | None = None
               ) -> DiscreteOperator:
    """Assemble the discrete operator with about ``N`` grid points per unit length.

    ``potentials`` optionally replaces the piecewise-constant potential of an
    edge by an arbitrary function of ``x``, sampled at interval midpoints.
    """
    if N < MIN_POINTS:
        raise GridTooCoarse(f"N={N} is below the minimum of {MIN_POINTS} points per unit length")
    potentials = potentials or {}

    index: list[tuple] = []
    vertex_row: dict[str, int] = {}
    end_weight: dict[tuple[int, int], complex] = {}
    for v, cond in g.vertices:
        ends = g.adjacency[v]
        if not ends or cond.is_dirichlet:
            continue
        vertex_row[v] = len(index)
        index.append(("vertex", v))
        for pos, end in enumerate(ends):
            z = cond.phases[pos] if cond.kind is ConditionKind.QUASI_NK else 1.0
            end_weight[end] = np.conj(z)

    meshes = []
    for i, e in enumerate(g.edges):
        xs, qs = _edge_mesh(e, N)
        # at least two intervals so that every edge carries an interior node
        if len(qs) < 2:
            xs, qs = _edge_mesh(e, 2.0 / e.length)
        rows = []
        for x in xs[1:-1]:
            rows.append(len(index))
            index.append(("edge", e.id, float(x)))
        meshes.append((xs, qs, rows))

    size = len(index)
    ri: list[int] = []
    ci: list[int] = []
    vals: list[complex] = []
    mass = np.zeros(size)
    spacing = {}
    for v, cond in g.vertices:
        if v in vertex_row:
            ri.append(vertex_row[v])
            ci.append(vertex_row[v])
            vals.append(cond.gamma)

    for i, (e, (xs, qs, rows)) in enumerate(zip(g.edges, meshes)):
        h = np.diff(xs)
        spacing[e.id] = h
        qfun = potentials.get(e.id)
        if qfun is not None:
            qv = np.asarray(qfun(0.5 * (xs[1:] + xs[:-1])), dtype=float)
        else:
            qv = np.array([q for q, _ in qs])
        # node handle per mesh point: (row, coefficient) with u = coefficient * unknown
        nodes = []
        for end, x_row in ((0, None), *((None, r) for r in rows), (1, None)):
            if x_row is not None:
                nodes.append((x_row, 1.0))
                continue
            v = e.tail if end == 0 else e.head
            if (i, end) in end_weight:
                nodes.append((vertex_row[v], end_weight[(i, end)]))
            else:
                nodes.append(None)  # Dirichlet end
        for j in range(len(h)):
            a, b = nodes[j], nodes[j + 1]
            w = 1.0 / h[j]
            m = 0.5 * h[j]
            for p in (a, b):
                if p is not None:
                    ri.append(p[0])
                    ci.append(p[0])
                    vals.append(w + qv[j] * m)
                    mass[p[0]] += m
            if a is not None and b is not None:
                ri += [a[0], b[0]]
                ci += [b[0], a[0]]
                vals += [-w * np.conj(a[1]) * b[1], -w * np.conj(b[1]) * a[1]]

    # duplicates are summed on conversion
    K = scipy.sparse.coo_matrix((np.array(vals, dtype=complex), (ri, ci)), shape=(size, size)).tocsr()
    scale = scipy.sparse.diags(1.0 / np.sqrt(mass))
    H = scale @ K @ scale
    H = H.toarray()
    H = 0.5 * (H + H.conj().T)
    return DiscreteOperator(H, mass, tuple(index), spacing)


def oracle_eigenvalues(g: CompactGraph, N: float, count: int,
                       potentials: Mapping[str, Callable] | None = None) -> np.ndarray:
    """Lowest ``count`` eigenvalues of the discretized graph, ascending."""
    op = discretize(g, N, potentials)
    count = min(count, op.size)
    # dense on purpose: Lanczos-type sparse solvers can drop copies of degenerate eigenvalues
    H = op.H if op.H.imag.any() else op.H.real
    return scipy.linalg.eigh(H, eigvals_only=True, subset_by_index=[0, count - 1])


def richardson_ratios(g: CompactGraph, exact, N: float = 200, count: int | None = None,
                      min_error: float = 1e-9) -> np.ndarray:
    """``error(N) / error(2N)`` per eigenvalue; ``nan`` where the coarse error is below ``min_error``.

    Second-order convergence shows up as ratios near 4.
    """
    exact = np.asarray(exact, dtype=float)
    count = count or len(exact)
    coarse = np.abs(oracle_eigenvalues(g, N, count) - exact[:count])
    fine = np.abs(oracle_eigenvalues(g, 2 * N, count) - exact[:count])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = coarse / fine
    return np.where(coarse > min_error, ratio, np.nan)
