"""Eigenvalues and eigenfunctions of compact quantum graphs.

Two characterizations of the spectrum are used side by side:

* the 2E x 2E boundary-condition ("secular") matrix in the per-edge
  coefficients ``(A_e, B_e)`` of ``u_e = A_e c + B_e s``; eigenvalues are the
  points where it drops rank, detected through its smallest singular value;
* a Hermitian vertex reduction ``L(lam)`` (edge Dirichlet-to-Neumann maps
  summed at the non-Dirichlet vertices, minus the couplings).  The number of
  eigenvalues below ``lam`` equals the number of edge Dirichlet eigenvalues
  below ``lam`` plus the number of positive eigenvalues of ``L(lam)``, which
  gives an exact counting function for bracketing.

The scan in :func:`eigenvalues_in` follows the singular-value route and is
audited by the counting function, so roots closer than the scan step cannot
be silently skipped.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (
    LambdaOutOfRange,
    MultiplicityAmbiguous,
    NotAnEigenvalue,
    ScanResolutionTooCoarse,
    SolverError,
)
from .graph_model import CompactGraph, ConditionKind, Edge, VertexCondition
from .transfer import basis_eval, dirichlet_count, transfer_matrix

log = logging.getLogger(__name__)

LAMBDA_MAX = 1e6
TOL_EIG = 1e-8
MULTIPLICITY_FACTOR = 10.0
SCAN_SUBDIVISION = 20
GOLDEN_WIDTH = 1e-12
# eigenvalues of L(lam) below this fraction of ||L|| are treated as zero
COUNT_ZERO_REL = 1e-13
CLUSTER_REL = 1e-9


class ScanResolutionWarning(UserWarning):
    pass


# --------------------------------------------------------------------------
# assembly

class _Override:
    """Per-problem quasi-NK phases (shape ``(K, deg)``) replacing one vertex's condition."""

    def __init__(self, vertex, phases, gamma):
        self.vertex = vertex
        self.phases = np.asarray(phases, dtype=complex)
        self.gamma = float(gamma)


def _end_phases(g: CompactGraph, override: _Override | None, K: int):
    """Phase of every edge end and coupling of every vertex, broadcast to ``K`` problems."""
    phase = {}
    for v, cond in g.vertices:
        ends = g.adjacency[v]
        if override is not None and v == override.vertex:
            for pos, end in enumerate(ends):
                phase[end] = override.phases[:, pos]
        elif cond.kind is ConditionKind.QUASI_NK:
            for pos, end in enumerate(ends):
                phase[end] = np.full(K, cond.phases[pos])
        else:
            for end in ends:
                phase[end] = np.ones(K, dtype=complex)
    gamma = {v: (override.gamma if override is not None and v == override.vertex else c.gamma)
             for v, c in g.vertices}
    return phase, gamma


def _check_range(lam):
    if np.any(np.asarray(lam) > LAMBDA_MAX):
        raise LambdaOutOfRange(f"lambda above {LAMBDA_MAX:g} is not supported")


def _secular_batch(g: CompactGraph, lam: np.ndarray, override: _Override | None = None,
                   scaled: bool = True) -> np.ndarray:
    """Stack of secular matrices, shape ``(K, 2E, 2E)``.

    With ``scaled`` the ``B_e`` columns are multiplied by ``max(1, sqrt|lam|)``
    and every row is divided by the summed norms of the edge-end terms it
    combines, which balances value and derivative equations without changing
    where the rank drops.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    K = lam.shape[0]
    E = len(g.edges)
    phase, gamma = _end_phases(g, override, K)

    kappa = np.maximum(1.0, np.sqrt(np.abs(lam))) if scaled else np.ones(K)
    val = {}
    der = {}
    for i, e in enumerate(g.edges):
        m = transfer_matrix(lam, e)
        v0 = np.zeros((K, 2 * E), dtype=complex)
        v0[:, 2 * i] = 1.0
        d0 = np.zeros((K, 2 * E), dtype=complex)
        d0[:, 2 * i + 1] = kappa
        v1 = np.zeros((K, 2 * E), dtype=complex)
        v1[:, 2 * i] = m[:, 0, 0]
        v1[:, 2 * i + 1] = m[:, 0, 1] * kappa
        d1 = np.zeros((K, 2 * E), dtype=complex)
        d1[:, 2 * i] = -m[:, 1, 0]
        d1[:, 2 * i + 1] = -m[:, 1, 1] * kappa
        val[(i, 0)], der[(i, 0)], val[(i, 1)], der[(i, 1)] = v0, d0, v1, d1

    rows, refs = [], []

    def norm(r):
        return np.linalg.norm(r, axis=1)

    for v, cond in g.vertices:
        ends = g.adjacency[v]
        if not ends:
            continue
        if cond.is_dirichlet and not (override is not None and v == override.vertex):
            for end in ends:
                rows.append(val[end])
                refs.append(norm(val[end]))
            continue
        z = [phase[end][:, None] for end in ends]
        first = z[0] * val[ends[0]]
        for zj, end in zip(z[1:], ends[1:]):
            rows.append(first - zj * val[end])
            refs.append(norm(val[ends[0]]) + norm(val[end]))
        flux = sum(zj * der[end] for zj, end in zip(z, ends))
        rows.append(flux - gamma[v] * first)
        refs.append(sum(norm(der[end]) for end in ends) + abs(gamma[v]) * norm(val[ends[0]]))
    mat = np.stack(rows, axis=1)
    if scaled:
        # divide by the sum of the constituent norms: bounded by one and never
        # degenerate, even where the equation itself vanishes identically
        ref = np.stack(refs, axis=1)[:, :, None]
        mat = mat / np.where(ref > 0, ref, 1.0)
    return mat


def secular_matrix(g: CompactGraph, lam: float) -> np.ndarray:
    """Raw ``2E x 2E`` boundary-condition matrix at ``lam``.

    Columns are ``(A_e, B_e)`` per edge in edge order, with ``A_e = u_e(0)``
    and ``B_e = u_e'(0)``.  Rows are grouped by vertex: value equations first,
    then the flux equation (absent for Dirichlet vertices).
    """
    _check_range(lam)
    return _secular_batch(g, np.array([lam]), scaled=False)[0]


def _sigma_batch(g, lam, override=None, full=False):
    mat = _secular_batch(g, lam, override)
    sv = np.linalg.svd(mat, compute_uv=False)
    return sv if full else sv[:, -1]


def sigma_min(g: CompactGraph, lam: float) -> float:
    """Smallest singular value of the balanced secular matrix.

    Rows of the balanced matrix have norm at most one, so this is already on
    the scale of the matrix norm; it vanishes exactly at eigenvalues.
    """
    _check_range(lam)
    return float(_sigma_batch(g, np.array([lam]))[0])


# --------------------------------------------------------------------------
# counting function

def _vertex_form(g: CompactGraph, lam: np.ndarray, override: _Override | None = None):
    """Hermitian vertex matrix ``L(lam)`` on the non-Dirichlet vertices, shape ``(K, n, n)``."""
    K = lam.shape[0]
    phase, gamma = _end_phases(g, override, K)
    free = [v for v, c in g.vertices
            if not c.is_dirichlet or (override is not None and v == override.vertex)]
    index = {v: i for i, v in enumerate(free)}
    n = len(free)
    L = np.zeros((K, n, n), dtype=complex)
    for v in free:
        L[:, index[v], index[v]] -= gamma[v]
    with np.errstate(divide="ignore", invalid="ignore"):
        for i, e in enumerate(g.edges):
            m = transfer_matrix(lam, e)
            m12 = m[:, 0, 1]
            d00 = -m[:, 0, 0] / m12
            d11 = -m[:, 1, 1] / m12
            d01 = 1.0 / m12
            a = index.get(e.tail)
            b = index.get(e.head)
            if a is not None:
                L[:, a, a] += d00
            if b is not None:
                L[:, b, b] += d11
            if a is not None and b is not None:
                za, zb = phase[(i, 0)], phase[(i, 1)]
                L[:, a, b] += za * d01 * np.conj(zb)
                L[:, b, a] += zb * d01 * np.conj(za)
    return L


# interior split point; irrational so the pieces' Dirichlet spectra avoid the
# symmetric eigenvalues of equilateral graphs
SPLIT_FRACTION = (math.sqrt(5) - 1) / 2


def _split_edge(e: Edge, mid: str) -> tuple[Edge, Edge]:
    cut = SPLIT_FRACTION * e.length
    first, second, pos = [], [], 0.0
    for length, q in e.potential:
        a, b = pos, pos + length
        if b <= cut:
            first.append((length, q))
        elif a >= cut:
            second.append((length, q))
        else:
            first.append((cut - a, q))
            second.append((b - cut, q))
        pos = b
    left = Edge(e.id + "~a", e.tail, mid, math.fsum(a for a, _ in first), tuple(first))
    right = Edge(e.id + "~b", mid, e.head, math.fsum(a for a, _ in second), tuple(second))
    return left, right


@lru_cache(maxsize=256)
def _counting_graph(g: CompactGraph) -> CompactGraph:
    """Spectrally identical graph with a degree-2 NK vertex inside every edge.

    Edge halves are interleaved so that the adjacency order of the original
    vertices (and hence the meaning of quasi-NK phases) is unchanged.
    """
    edges = []
    verts = list(g.vertices)
    for e in g.edges:
        mid = f"{e.id}~mid"
        edges.extend(_split_edge(e, mid))
        verts.append((mid, VertexCondition.neumann()))
    return CompactGraph(tuple(verts), tuple(edges), name=g.name)


def _count_batch(g, lam, override=None) -> np.ndarray:
    g = _counting_graph(g)
    lam = np.array(lam, dtype=float, copy=True)
    for _ in range(4):
        L = _vertex_form(g, lam, override)
        bad = ~np.all(np.isfinite(L.reshape(L.shape[0], -1)), axis=1)
        if not bad.any():
            break
        # lam sits on an edge Dirichlet eigenvalue; step off it
        lam[bad] += 1e-13 * np.maximum(1.0, np.abs(lam[bad]))
    count = np.zeros(lam.shape, dtype=int)
    for e in g.edges:
        count += dirichlet_count(lam, e)
    if L.shape[1]:
        ev = np.linalg.eigvalsh(L)
        scale = np.max(np.abs(ev), axis=1, keepdims=True)
        count += np.sum(ev > COUNT_ZERO_REL * scale, axis=1)
    return count


def eigenvalue_count(g: CompactGraph, lam: float) -> int:
    """Number of eigenvalues (with multiplicity) strictly below ``lam``."""
    _check_range(lam)
    return int(_count_batch(g, np.array([lam]))[0])


def default_lower_bound(g: CompactGraph) -> float:
    return -(g.max_abs_coupling / g.min_length + g.max_abs_potential) ** 2 - 1.0


def _initial_upper(g: CompactGraph, count: int) -> float:
    # Weyl-type guess, nudged off the equilateral Dirichlet values n^2 pi^2
    guess = (math.pi * (count + 1) / g.total_length) ** 2 * 4
    return 1.0137 * (guess + g.max_abs_potential + g.max_abs_coupling) + 1.0


def _brackets(g, count, override, K):
    lo = np.full(K, default_lower_bound(g))
    n_lo = _count_batch(g, lo, override)
    while np.any(n_lo > 0):
        lo = np.where(n_lo > 0, 2 * lo - 1, lo)
        n_lo = _count_batch(g, lo, override)
    hi = np.full(K, _initial_upper(g, count))
    n_hi = _count_batch(g, hi, override)
    while np.any(n_hi < count):
        if np.max(hi) > LAMBDA_MAX:
            raise LambdaOutOfRange(f"fewer than {count} eigenvalues below {LAMBDA_MAX:g}")
        hi = np.where(n_hi < count, 2 * hi + 1, hi)
        n_hi = _count_batch(g, hi, override)
    return lo, hi


def _bisect(g, target, lo, hi, override=None, max_iter=200):
    """Locate ``lam`` where the count passes ``target`` (0-based index), vectorized."""
    lo = lo.astype(float).copy()
    hi = hi.astype(float).copy()
    for _ in range(max_iter):
        width = hi - lo
        if np.all(width <= 4e-16 * np.maximum(1.0, np.abs(hi))):
            break
        mid = 0.5 * (lo + hi)
        above = _count_batch(g, mid, override) > target
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return 0.5 * (lo + hi)


def _lowest_batch(g, count, override=None, K=1):
    lo, hi = _brackets(g, count, override, K)
    targets = np.tile(np.arange(count), K)
    rep_lo = np.repeat(lo, count)
    rep_hi = np.repeat(hi, count)
    ov = None
    if override is not None:
        ov = _Override(override.vertex, np.repeat(override.phases, count, axis=0), override.gamma)
    lam = _bisect(g, targets, rep_lo, rep_hi, ov)
    return np.sort(lam.reshape(K, count), axis=1), ov


def lowest_eigenvalues(g: CompactGraph, count: int, verify: bool = True) -> np.ndarray:
    """The ``count`` lowest eigenvalues, with multiplicity, ascending."""
    lam, _ = _lowest_batch(g, count)
    lam = lam[0]
    if verify:
        sig = _sigma_batch(g, lam)
        if np.any(sig > TOL_EIG):
            j = int(np.argmax(sig))
            raise SolverError(f"eigenvalue {lam[j]!r} failed the rank test (sigma={sig[j]:.3g})")
    return lam


def floquet_eigenvalues(g: CompactGraph, vertex: str, phase_sets, gamma: float, count: int,
                        verify: bool = True, tol: float = TOL_EIG) -> np.ndarray:
    """Lowest ``count`` eigenvalues for each row of quasi-NK phases at ``vertex``.

    ``phase_sets`` has shape ``(K, deg(vertex))``.  Returns shape ``(K, count)``.
    Every value is checked against the secular rank test; a failure raises
    :class:`SolverError` carrying the index of the offending phase set.
    """
    phases = np.atleast_2d(np.asarray(phase_sets, dtype=complex))
    K = phases.shape[0]
    if phases.shape[1] != g.degree(vertex):
        raise SolverError(f"expected {g.degree(vertex)} phases per set, got {phases.shape[1]}")
    override = _Override(vertex, phases, gamma)
    lam, ov = _lowest_batch(g, count, override, K)
    if verify:
        # sigma is evaluated in the same (K * count) layout as the bisection
        sig = _sigma_batch(g, np.sort(lam, axis=1).ravel(), ov).reshape(K, count)
        if np.any(sig > tol):
            idx = np.unravel_index(int(np.argmax(sig)), sig.shape)
            err = SolverError(
                f"band {idx[1] + 1} at phase set {idx[0]} failed the rank test (sigma={sig[idx]:.3g})"
            )
            err.index = int(idx[0])
            raise err
    return lam


def floquet_sigma(g: CompactGraph, vertex: str, phase_sets, gamma: float, lam) -> np.ndarray:
    """Balanced ``sigma_min`` at ``lam`` for each row of quasi-NK phases at ``vertex``."""
    phases = np.atleast_2d(np.asarray(phase_sets, dtype=complex))
    lam = np.broadcast_to(np.asarray(lam, dtype=float), (phases.shape[0],))
    _check_range(lam)
    return _sigma_batch(g, np.array(lam), _Override(vertex, phases, gamma))


# --------------------------------------------------------------------------
# scan

def _golden(f, a, b, width=GOLDEN_WIDTH):
    inv_phi = (math.sqrt(5) - 1) / 2
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > width:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _to_lambda(s):
    return np.sign(s) * s * s


def _to_scan(lam):
    return np.sign(lam) * np.sqrt(np.abs(lam))


def _cluster(values):
    out = []
    for lam in values:
        if out and abs(lam - out[-1][-1]) <= CLUSTER_REL * max(1.0, abs(lam)):
            out[-1].append(lam)
        else:
            out.append([lam])
    return [(float(np.mean(c)), len(c)) for c in out]


def eigenvalues_in(g: CompactGraph, lam_lo: float, lam_hi: float, tol_eig: float = TOL_EIG,
                   strict: bool = False) -> list[tuple[float, int]]:
    """All eigenvalues in ``[lam_lo, lam_hi)`` as ``(lam, multiplicity)``, ascending.

    The scan runs in ``s = sign(lam) sqrt|lam|`` with step ``pi / (20 L_total)``;
    each local minimum of :func:`sigma_min` is refined by golden section and
    accepted when below ``tol_eig``.  The result is audited against the
    counting function; on disagreement the counting route wins (a
    :class:`ScanResolutionWarning` is emitted, or
    :class:`ScanResolutionTooCoarse` raised when ``strict``).
    """
    if not lam_lo < lam_hi:
        raise ValueError("need lam_lo < lam_hi")
    _check_range(lam_hi)
    s_lo, s_hi = float(_to_scan(lam_lo)), float(_to_scan(lam_hi))
    step = math.pi / g.total_length / SCAN_SUBDIVISION
    n = max(3, int(math.ceil((s_hi - s_lo) / step)) + 1)
    grid = np.linspace(s_lo, s_hi, n)
    sig = _sigma_batch(g, _to_lambda(grid))

    def objective(s):
        return float(_sigma_batch(g, np.array([_to_lambda(s)]))[0])

    found = []
    for i in range(n):
        left = sig[i - 1] if i > 0 else np.inf
        right = sig[i + 1] if i < n - 1 else np.inf
        if sig[i] <= left and sig[i] <= right:
            a, b = grid[max(i - 1, 0)], grid[min(i + 1, n - 1)]
            s_star, val = _golden(objective, a, b)
            if val <= tol_eig:
                found.append(s_star)
    found = sorted(found)
    roots = []
    for s in found:
        if roots and abs(s - roots[-1]) <= 1e-9 * max(1.0, abs(s)):
            continue
        roots.append(s)

    too_close = any(b - a < 2 * step for a, b in zip(roots, roots[1:]))
    candidates = []
    for s in roots:
        lam = float(_to_lambda(s))
        if lam_lo <= lam < lam_hi:
            sv = _sigma_batch(g, np.array([lam]), full=True)[0]
            mult = int(np.sum(sv <= MULTIPLICITY_FACTOR * tol_eig))
            candidates.append((lam, max(mult, 1)))

    n_lo = int(_count_batch(g, np.array([lam_lo]))[0])
    n_hi = int(_count_batch(g, np.array([lam_hi]))[0])
    expected = n_hi - n_lo
    if sum(m for _, m in candidates) == expected and not too_close:
        return candidates

    message = (f"scan found {sum(m for _, m in candidates)} eigenvalue(s) in "
               f"[{lam_lo:g}, {lam_hi:g}), counting function gives {expected}")
    if strict:
        raise ScanResolutionTooCoarse(message)
    if sum(m for _, m in candidates) < expected:
        warnings.warn(message + "; using counting bisection", ScanResolutionWarning, stacklevel=2)
    else:
        # extra scan hits are roots sitting on the interval ends
        log.debug("%s; using counting bisection", message)
    if expected == 0:
        return []
    targets = np.arange(n_lo, n_hi)
    lam = _bisect(g, targets, np.full(expected, float(lam_lo)), np.full(expected, float(lam_hi)))
    clusters = _cluster(np.sort(lam))
    sig_c = _sigma_batch(g, np.array([c for c, _ in clusters]))
    for (c, _), sv in zip(clusters, sig_c):
        if sv > tol_eig:
            raise SolverError(f"counted eigenvalue {c!r} failed the rank test (sigma={sv:.3g})")
    return clusters


# --------------------------------------------------------------------------
# eigenfunctions

@dataclass
class EigenSolution:
    """Eigenvalue with an L2-normalized eigenfunction.

    ``coefficients[i] = (A, B)`` gives ``u = A c + B s`` on edge ``edge_ids[i]``.
    ``vertex_derivatives[v]`` lists the derivatives into the edges at ``v``
    in adjacency order; ``vertex_values`` likewise.
    """

    eigenvalue: float
    multiplicity: int
    graph: CompactGraph = field(repr=False)
    coefficients: np.ndarray = field(repr=False)
    vertex_values: dict
    vertex_derivatives: dict
    residual: float
    basis: tuple = field(default=(), repr=False)

    @property
    def ambiguous(self) -> bool:
        return self.multiplicity > 1

    @property
    def edge_ids(self) -> list[str]:
        return [e.id for e in self.graph.edges]

    def evaluate(self, edge_id: str, x) -> np.ndarray:
        """Values on edge ``edge_id`` at positions ``x``."""
        i = self.edge_ids.index(edge_id)
        return _evaluate_edge(self.graph.edges[i], self.eigenvalue, self.coefficients[i], x)[0]


def _evaluate_edge(edge, lam, coef, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.empty(x.shape, dtype=complex)
    du = np.empty(x.shape, dtype=complex)
    state = np.asarray(coef, dtype=complex)
    start = 0.0
    done = np.zeros(x.shape, dtype=bool)
    for j, (length, q) in enumerate(edge.potential):
        last = j == len(edge.potential) - 1
        mask = ~done & ((x <= start + length) | last)
        if mask.any():
            b = basis_eval(lam, x[mask] - start, q)
            u[mask] = b.c * state[0] + b.s * state[1]
            du[mask] = b.dc * state[0] + b.ds * state[1]
            done |= mask
        b = basis_eval(lam, length, q)
        state = np.array([b.c * state[0] + b.s * state[1], b.dc * state[0] + b.ds * state[1]])
        start += length
    return u, du


def _edge_norm2(edge, lam, coef):
    total = 0.0
    start = 0.0
    state = np.asarray(coef, dtype=complex)
    for length, q in edge.potential:
        n = 24 + int(4 * math.sqrt(abs(lam - q)) * length)
        nodes, weights = np.polynomial.legendre.leggauss(n)
        x = 0.5 * length * (nodes + 1)
        b = basis_eval(lam, x, q)
        u = b.c * state[0] + b.s * state[1]
        total += 0.5 * length * float(np.sum(weights * np.abs(u) ** 2))
        b = basis_eval(lam, length, q)
        state = np.array([b.c * state[0] + b.s * state[1], b.dc * state[0] + b.ds * state[1]])
        start += length
    return total


def _normalize(g, lam, coef, make_real):
    if make_real:
        flat = coef.ravel()
        k = int(np.argmax(np.abs(flat)))
        coef = (coef * np.exp(-1j * np.angle(flat[k]))).real.astype(complex)
    norm2 = sum(_edge_norm2(e, lam, c) for e, c in zip(g.edges, coef))
    coef = coef / math.sqrt(norm2)
    if make_real:
        # sign: the largest sampled value is positive
        best, sign = -1.0, 1.0
        for e, c in zip(g.edges, coef):
            u, _ = _evaluate_edge(e, lam, c, np.linspace(0, e.length, 33))
            j = int(np.argmax(np.abs(u)))
            if abs(u[j]) > best:
                best, sign = abs(u[j]), np.sign(u[j].real) or 1.0
        coef = coef * sign
    return coef


def eigenfunction(g: CompactGraph, lam: float, tol_eig: float = TOL_EIG,
                  strict: bool = False) -> EigenSolution:
    """Eigenfunction for eigenvalue ``lam`` from the secular null space.

    Real graphs (no genuine phases) return real coefficients with the sign
    chosen so the largest value is positive; for a ground state this makes
    the function positive away from Dirichlet vertices.  A multiple
    eigenvalue yields ``multiplicity > 1`` with an orthonormal ``basis``
    (or :class:`MultiplicityAmbiguous` when ``strict``).
    """
    _check_range(lam)
    mat = _secular_batch(g, np.array([lam]))[0]
    _, rel, vh = np.linalg.svd(mat)
    if rel[-1] > tol_eig:
        raise NotAnEigenvalue(f"{lam!r} is not an eigenvalue (sigma_min={rel[-1]:.3g})")
    mult = int(np.sum(rel <= MULTIPLICITY_FACTOR * tol_eig))
    if mult > 1 and strict:
        raise MultiplicityAmbiguous(f"eigenvalue {lam!r} has multiplicity {mult}")
    kappa = max(1.0, math.sqrt(abs(lam)))
    E = len(g.edges)
    make_real = g.is_real

    def coefficients(vec):
        c = vec.conj().reshape(E, 2).astype(complex)
        c[:, 1] *= kappa
        return _normalize(g, lam, c, make_real)

    basis = tuple(coefficients(vh[-1 - j]) for j in range(mult))
    coef = basis[0]

    values, derivs = {}, {}
    for v in g.vertex_ids:
        vv, dd = [], []
        for i, side in g.adjacency[v]:
            e = g.edges[i]
            if side == 0:
                u0, du0 = coef[i]
            else:
                u, du = _evaluate_edge(e, lam, coef[i], [e.length])
                u0, du0 = u[0], -du[0]
            vv.append(u0.real if make_real else u0)
            dd.append(du0.real if make_real else du0)
        values[v] = tuple(vv)
        derivs[v] = tuple(dd)
    if make_real:
        coef = coef.real
        basis = tuple(b.real for b in basis)
    return EigenSolution(float(lam), mult, g, coef, values, derivs, float(rel[-1]),
                         basis if mult > 1 else ())
