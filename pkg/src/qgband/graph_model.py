"""Compact metric graphs with vertex conditions.

A :class:`CompactGraph` is an immutable collection of vertices (each carrying a
:class:`VertexCondition`) and oriented edges ``[0, length]`` with
piecewise-constant potentials.  Builders for the two fundamental domains used
throughout the package, and the two surgeries applied to them (decoupling a
vertex with a Dirichlet condition, twisting a vertex with Floquet phases), live
here as pure functions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import (
    CouplingOrderViolated,
    InvalidCondition,
    NonPositiveLength,
    UnknownVertex,
    WrongDegree,
)

PHASE_TOL = 1e-12


class ConditionKind(str, Enum):
    DIRICHLET = "Dirichlet"
    DELTA = "DeltaType"
    QUASI_NK = "QuasiNK"


@dataclass(frozen=True)
class VertexCondition:
    """Dirichlet, delta-type (coupling ``gamma``) or quasi-NK (``phases``, ``gamma``).

    ``phases`` holds one unit complex scalar per incident edge end, in the
    vertex's adjacency order.
    """

    kind: ConditionKind
    gamma: float = 0.0
    phases: tuple[complex, ...] = ()

    def __post_init__(self):
        kind = ConditionKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ConditionKind.DIRICHLET:
            object.__setattr__(self, "gamma", 0.0)
            object.__setattr__(self, "phases", ())
            return
        if not math.isfinite(self.gamma):
            raise InvalidCondition(f"coupling must be finite, got {self.gamma!r}")
        object.__setattr__(self, "gamma", float(self.gamma))
        if kind is ConditionKind.DELTA:
            if self.phases:
                raise InvalidCondition("DeltaType conditions carry no phases")
            return
        phases = tuple(complex(z) for z in self.phases)
        for z in phases:
            if abs(abs(z) - 1.0) > PHASE_TOL:
                raise InvalidCondition(f"phase {z} is not of unit modulus")
        object.__setattr__(self, "phases", phases)

    @classmethod
    def dirichlet(cls) -> "VertexCondition":
        return cls(ConditionKind.DIRICHLET)

    @classmethod
    def delta(cls, gamma: float = 0.0) -> "VertexCondition":
        return cls(ConditionKind.DELTA, gamma)

    @classmethod
    def neumann(cls) -> "VertexCondition":
        return cls(ConditionKind.DELTA, 0.0)

    @classmethod
    def quasi_nk(cls, phases: Iterable[complex], gamma: float = 0.0) -> "VertexCondition":
        return cls(ConditionKind.QUASI_NK, gamma, tuple(phases))

    @property
    def is_dirichlet(self) -> bool:
        return self.kind is ConditionKind.DIRICHLET


@dataclass(frozen=True)
class Edge:
    """Edge ``tail -> head`` parametrized by ``x in [0, length]`` (``x = 0`` at ``tail``).

    ``potential`` is a tuple of ``(segment_length, q)`` pairs, ordered from the
    tail; an empty potential means ``q = 0`` on the whole edge.
    """

    id: str
    tail: str
    head: str
    length: float
    potential: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        length = float(self.length)
        if not (length > 0 and math.isfinite(length)):
            raise NonPositiveLength(f"edge {self.id!r}: length must be positive, got {self.length!r}")
        object.__setattr__(self, "length", length)
        segments = tuple((float(a), float(q)) for a, q in self.potential) or ((length, 0.0),)
        for a, q in segments:
            if not a > 0:
                raise NonPositiveLength(f"edge {self.id!r}: potential segment length must be positive")
            if not math.isfinite(q):
                raise InvalidCondition(f"edge {self.id!r}: potential value must be finite")
        total = math.fsum(a for a, _ in segments)
        if abs(total - length) > 1e-12 * length:
            raise InvalidCondition(
                f"edge {self.id!r}: potential segments sum to {total!r}, expected {length!r}"
            )
        object.__setattr__(self, "potential", segments)

    @property
    def max_abs_potential(self) -> float:
        return max(abs(q) for _, q in self.potential)


@dataclass(frozen=True)
class CompactGraph:
    vertices: tuple[tuple[str, VertexCondition], ...]
    edges: tuple[Edge, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        verts = self.vertices
        if isinstance(verts, Mapping):
            verts = tuple(verts.items())
        verts = tuple((str(v), c) for v, c in verts)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", tuple(self.edges))

        ids = [v for v, _ in verts]
        if len(set(ids)) != len(ids):
            raise InvalidCondition("duplicate vertex ids")
        edge_ids = [e.id for e in self.edges]
        if len(set(edge_ids)) != len(edge_ids):
            raise InvalidCondition("duplicate edge ids")
        known = set(ids)
        for e in self.edges:
            for end in (e.tail, e.head):
                if end not in known:
                    raise UnknownVertex(f"edge {e.id!r} refers to unknown vertex {end!r}")
        for v, cond in verts:
            if cond.kind is ConditionKind.QUASI_NK and len(cond.phases) != self.degree(v):
                raise InvalidCondition(
                    f"vertex {v!r}: {len(cond.phases)} phases for degree {self.degree(v)}"
                )

    @cached_property
    def _conditions(self) -> dict[str, VertexCondition]:
        return dict(self.vertices)

    @cached_property
    def adjacency(self) -> dict[str, tuple[tuple[int, int], ...]]:
        """Incident edge ends per vertex as ``(edge_index, end)``; end 0 is ``x = 0``."""
        adj: dict[str, list[tuple[int, int]]] = {v: [] for v, _ in self.vertices}
        for i, e in enumerate(self.edges):
            adj[e.tail].append((i, 0))
            adj[e.head].append((i, 1))
        return {v: tuple(ends) for v, ends in adj.items()}

    @property
    def vertex_ids(self) -> list[str]:
        return [v for v, _ in self.vertices]

    def condition(self, v: str) -> VertexCondition:
        try:
            return self._conditions[v]
        except KeyError:
            raise UnknownVertex(f"unknown vertex {v!r}") from None

    def degree(self, v: str) -> int:
        if v not in self.adjacency:
            raise UnknownVertex(f"unknown vertex {v!r}")
        return len(self.adjacency[v])

    def edge(self, edge_id: str) -> Edge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(edge_id)

    @property
    def total_length(self) -> float:
        return math.fsum(e.length for e in self.edges)

    @property
    def min_length(self) -> float:
        return min(e.length for e in self.edges)

    @property
    def max_abs_potential(self) -> float:
        return max((e.max_abs_potential for e in self.edges), default=0.0)

    @property
    def max_abs_coupling(self) -> float:
        return max((abs(c.gamma) for _, c in self.vertices), default=0.0)

    @property
    def is_real(self) -> bool:
        """True when no vertex carries a non-real phase."""
        for _, c in self.vertices:
            if c.kind is ConditionKind.QUASI_NK:
                z0 = c.phases[0] if c.phases else 1.0
                if any(abs((z / z0).imag) > PHASE_TOL for z in c.phases):
                    return False
        return True

    def with_condition(self, v: str, condition: VertexCondition) -> "CompactGraph":
        self.condition(v)
        verts = tuple((u, condition if u == v else c) for u, c in self.vertices)
        return replace(self, vertices=verts)

    def with_edges(self, edges: Sequence[Edge]) -> "CompactGraph":
        return replace(self, edges=tuple(edges))


def _potential_segments(length: float, spec) -> tuple[tuple[float, float], ...]:
    if spec is None:
        return ((length, 0.0),)
    if isinstance(spec, (int, float)):
        return ((length, float(spec)),)
    return tuple((float(a), float(q)) for a, q in spec)


def _check_lengths(lengths: Sequence[float], count: int) -> list[float]:
    if len(lengths) != count:
        raise InvalidCondition(f"expected {count} edge lengths, got {len(lengths)}")
    out = []
    for i, ell in enumerate(lengths):
        ell = float(ell)
        if not (ell > 0 and math.isfinite(ell)):
            raise NonPositiveLength(f"length #{i} must be positive, got {ell!r}")
        out.append(ell)
    return out


def build_gamma1(lengths, gamma_a: float, gamma_b: float, potentials=None) -> CompactGraph:
    """Two vertices ``A`` and ``B`` joined by four parallel edges ``e1..e4``.

    Edges run from ``A`` (``x = 0``) to ``B``.  ``potentials`` is an optional
    list of four entries, each ``None``, a constant, or a list of
    ``(segment_length, q)`` pairs.
    """
    lengths = _check_lengths(lengths, 4)
    if not gamma_a < gamma_b:
        raise CouplingOrderViolated(f"need gamma_A < gamma_B, got {gamma_a} >= {gamma_b}")
    potentials = potentials or [None] * 4
    edges = [
        Edge(f"e{j + 1}", "A", "B", ell, _potential_segments(ell, potentials[j]))
        for j, ell in enumerate(lengths)
    ]
    verts = (("A", VertexCondition.delta(gamma_a)), ("B", VertexCondition.delta(gamma_b)))
    return CompactGraph(verts, tuple(edges), name="gamma1")


def build_gamma2(lengths, potentials=None) -> CompactGraph:
    """``Gamma_1`` with NK vertices, decorated by a tail ``e0`` from ``C`` to ``A``.

    ``lengths`` is ``(l0, l1, l2, l3, l4)``; ``potentials`` (optional) follows
    the same order.
    """
    lengths = _check_lengths(lengths, 5)
    potentials = potentials or [None] * 5
    edges = [Edge(f"e{j + 1}", "A", "B", lengths[j + 1], _potential_segments(lengths[j + 1], potentials[j + 1]))
             for j in range(4)]
    edges.append(Edge("e0", "C", "A", lengths[0], _potential_segments(lengths[0], potentials[0])))
    verts = (
        ("A", VertexCondition.neumann()),
        ("B", VertexCondition.neumann()),
        ("C", VertexCondition.neumann()),
    )
    return CompactGraph(verts, tuple(edges), name="gamma2")


def dirichlet_perturbation(g: CompactGraph, v: str) -> CompactGraph:
    """Impose Dirichlet at ``v`` and split it into one degree-1 vertex per edge end.

    The new vertices are named ``f"{v}#{i}"`` where ``i`` is the position of
    the edge end in ``v``'s adjacency order.
    """
    ends = g.adjacency.get(v)
    if ends is None:
        raise UnknownVertex(f"unknown vertex {v!r}")
    new_id = {end: f"{v}#{i}" for i, end in enumerate(ends)}
    edges = list(g.edges)
    for (idx, side), vid in new_id.items():
        e = edges[idx]
        edges[idx] = replace(e, tail=vid) if side == 0 else replace(e, head=vid)
    verts = [(u, c) for u, c in g.vertices if u != v]
    verts += [(vid, VertexCondition.dirichlet()) for vid in new_id.values()]
    name = f"{g.name}^{v}" if g.name else ""
    return CompactGraph(tuple(verts), tuple(edges), name=name)


def floquet_phases(k: Sequence[float]) -> tuple[complex, ...]:
    """``(e^{i k_1}, ..., e^{i k_d}, 1)``; the last edge end is pinned to phase 1."""
    return tuple(cmath.exp(1j * float(kj)) for kj in k) + (1.0 + 0j,)


def apply_floquet(g: CompactGraph, b: str, k: Sequence[float], gamma_b: float | None = None) -> CompactGraph:
    """Replace the condition at ``b`` by quasi-NK with phases ``floquet_phases(k)``.

    ``len(k)`` must be ``deg(b) - 1`` (three for the four-edge vertex ``B``).
    ``gamma_b`` defaults to the coupling currently stored at ``b``.
    """
    cond = g.condition(b)
    deg = g.degree(b)
    if deg != len(k) + 1:
        raise WrongDegree(f"vertex {b!r} has degree {deg}; quasimomentum has {len(k)} components")
    if gamma_b is None:
        if cond.is_dirichlet:
            raise InvalidCondition(f"vertex {b!r} is Dirichlet; pass gamma_b explicitly")
        gamma_b = cond.gamma
    return g.with_condition(b, VertexCondition.quasi_nk(floquet_phases(k), gamma_b))


def with_coupling(g: CompactGraph, v: str, gamma: float) -> CompactGraph:
    """Same graph with coupling ``gamma`` at ``v`` (phases kept for quasi-NK)."""
    cond = g.condition(v)
    if cond.is_dirichlet:
        raise InvalidCondition(f"vertex {v!r} is Dirichlet")
    return g.with_condition(v, replace(cond, gamma=gamma))


def attach_interval(g: CompactGraph, v: str, length: float, edge_id: str = "tail",
                    end_id: str | None = None) -> CompactGraph:
    """Glue a Neumann interval of ``length`` to ``v`` (new NK leaf at its far end)."""
    cond = g.condition(v)
    if cond.kind is not ConditionKind.DELTA:
        raise InvalidCondition("intervals attach to delta-type vertices only")
    end_id = end_id or f"{v}+{edge_id}"
    e = Edge(edge_id, end_id, v, length)
    verts = tuple(g.vertices) + ((end_id, VertexCondition.neumann()),)
    return CompactGraph(verts, tuple(g.edges) + (e,), name=g.name)


def neumann_interval(length: float = 1.0) -> CompactGraph:
    verts = (("L", VertexCondition.neumann()), ("R", VertexCondition.neumann()))
    return CompactGraph(verts, (Edge("e", "L", "R", length),), name="interval")


def floquet_loop(length: float = 1.0) -> CompactGraph:
    """One NK vertex with one loop edge; a quasi-NK twist at the vertex models the line."""
    return CompactGraph((("V", VertexCondition.neumann()),), (Edge("e", "V", "V", length),), name="loop")


def connected_components(g: CompactGraph) -> list[list[str]]:
    parent = {v: v for v in g.vertex_ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in g.edges:
        parent[find(e.tail)] = find(e.head)
    groups: dict[str, list[str]] = {}
    for v in g.vertex_ids:
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def induced_subgraph(g: CompactGraph, vertex_ids) -> CompactGraph:
    """Vertices ``vertex_ids`` with every edge whose ends both lie among them."""
    keep = set(vertex_ids)
    missing = keep - set(g.vertex_ids)
    if missing:
        raise UnknownVertex(f"unknown vertex {sorted(missing)[0]!r}")
    verts = tuple((v, c) for v, c in g.vertices if v in keep)
    edges = tuple(e for e in g.edges if e.tail in keep and e.head in keep)
    return CompactGraph(verts, edges, name=g.name)
