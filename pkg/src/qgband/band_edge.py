"""Degenerate band edge: gap chain, degeneracy curve, length condition, robustness.

The top of the first band is ``lambda_1(G^B)``, the ground state of the graph
with Dirichlet conditions at ``B``.  It is attained exactly at the
quasimomenta where the ground state ``phi`` also satisfies the twisted flux
condition at ``B``:

    sum_{j<=3} e^{ik_j} phi'_j(B) + phi'_4(B) = 0,

a quadrangle closure with sides ``|phi'_j(B)|``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import polygon
from .dispersion import band_sweep, phases_for
from .errors import GapChainViolated, NoCurve, SolverError
from .graph_model import (
    CompactGraph,
    ConditionKind,
    Edge,
    VertexCondition,
    build_gamma2,
    dirichlet_perturbation,
)
from .polygon import Classification, closure_residual, torus_distance, wrap
from .secular import TOL_EIG, eigenfunction, floquet_eigenvalues, floquet_sigma, lowest_eigenvalues

TOL_CURVE = 1e-8
TOL_CHAIN = 1e-8
SNAP_REL = 1e-9
OFF_CURVE_DISTANCE = 0.3


def _r(x):
    return float(f"{x:.12g}")


def ground_state_derivatives(g: CompactGraph, b: str = "B"):
    """``lambda_1`` of the graph Dirichlet-cut at ``b`` and the inward derivatives at the cut ends.

    The eigenfunction is sign-normalized so that these derivatives sum to a
    positive number (it is then positive inside the edges).
    """
    gb = dirichlet_perturbation(g, b)
    lam = float(lowest_eigenvalues(gb, 1)[0])
    sol = eigenfunction(gb, lam)
    der = np.array([sol.vertex_derivatives[f"{b}#{i}"][0] for i in range(g.degree(b))], dtype=float)
    if der.sum() < 0:
        der = -der
    return lam, der, sol


def snap_equal(values, rel: float = SNAP_REL) -> np.ndarray:
    """Replace values that agree to ``rel`` by their common mean."""
    values = np.asarray(values, dtype=float)
    out = values.copy()
    order = np.argsort(values)
    groups, current = [], [order[0]]
    for i in order[1:]:
        if abs(values[i] - values[current[-1]]) <= rel * max(abs(values[i]), abs(values[current[-1]])):
            current.append(i)
        else:
            groups.append(current)
            current = [i]
    groups.append(current)
    for grp in groups:
        out[grp] = values[grp].mean()
    return out


@dataclass
class DegeneracyReport:
    lambda_edge: float
    derivatives: np.ndarray          # signed phi'_j(B), adjacency order at B
    sides: np.ndarray                # |phi'_j(B)| after snapping
    shifts: np.ndarray               # pi where phi'_j / phi'_4 < 0, j = 1..3
    classification: Classification
    smooth: bool = False
    topology: str = ""
    curve_points: np.ndarray = field(default=None, repr=False)
    curve_branch: np.ndarray = field(default=None, repr=False)
    on_curve_lambda1: np.ndarray = field(default=None, repr=False)
    on_curve_sigma: np.ndarray = field(default=None, repr=False)
    off_curve_points: np.ndarray = field(default=None, repr=False)
    off_curve_lambda1: np.ndarray = field(default=None, repr=False)
    tol_curve: float = TOL_CURVE

    @property
    def on_curve_deviation(self) -> float:
        return float(np.max(np.abs(self.on_curve_lambda1 - self.lambda_edge)))

    @property
    def off_curve_margin(self) -> float:
        return float(np.min(self.lambda_edge - self.off_curve_lambda1))

    @property
    def sign_pattern(self) -> list[int]:
        return [int(np.sign(d)) for d in self.derivatives]

    @property
    def verdict(self) -> bool:
        """Curve exists, band 1 touches the edge along it and stays below elsewhere."""
        return (self.classification is Classification.CURVE
                and self.on_curve_deviation <= self.tol_curve
                and self.off_curve_margin > 0)

    def to_dict(self) -> dict:
        return {
            "lambda_edge": _r(self.lambda_edge),
            "derivatives": [_r(x) for x in self.derivatives],
            "sides": [_r(x) for x in self.sides],
            "sign_pattern": self.sign_pattern,
            "classification": self.classification.value,
            "smooth": self.smooth,
            "topology": self.topology,
            "on_curve_samples": int(len(self.curve_points)),
            "on_curve_max_deviation": _r(self.on_curve_deviation),
            "on_curve_max_sigma": _r(float(np.max(self.on_curve_sigma))),
            "off_curve_samples": int(len(self.off_curve_points)),
            "off_curve_min_margin": _r(self.off_curve_margin),
            "verdict": self.verdict,
        }

    def curve_csv(self) -> str:
        out = io.StringIO()
        out.write("branch_id,k1,k2,k3,residual,lambda1_at_k\n")
        res = closure_residual(self.derivatives, self.curve_points)
        res = res / np.sum(np.abs(self.derivatives))
        for b, k, r, lam in zip(self.curve_branch, self.curve_points, res, self.on_curve_lambda1):
            out.write(f"{b},{k[0]:.12g},{k[1]:.12g},{k[2]:.12g},{r:.12g},{lam:.12g}\n")
        return out.getvalue()


def _coupling(g: CompactGraph, b: str, gamma_b):
    return g.condition(b).gamma if gamma_b is None else float(gamma_b)


def degenerate_curve(g: CompactGraph, b: str = "B", gamma_b: float | None = None,
                     samples: int = 100, off_samples: int = 100, seed: int = 0,
                     tol_curve: float = TOL_CURVE) -> DegeneracyReport:
    """Predict the curve where band 1 reaches ``lambda_1(G^B)`` and test it.

    ``samples`` points spread over the predicted curve must give
    ``|lambda_1(G^k) - lambda_edge| <= tol_curve``; ``off_samples`` random
    quasimomenta at torus distance > 0.3 from the curve must give
    ``lambda_1(G^k) < lambda_edge``.  Raises :class:`NoCurve` when the
    quadrangle inequalities fail.
    """
    gamma_b = _coupling(g, b, gamma_b)
    if g.degree(b) != 4:
        raise SolverError(f"vertex {b!r} must have degree 4, has {g.degree(b)}")
    lam_edge, der, _ = ground_state_derivatives(g, b)
    sides = snap_equal(np.abs(der))
    ratio = der[:3] / der[3]
    shifts = np.where(ratio < 0, math.pi, 0.0)
    cls = polygon.classify(sides)
    report = DegeneracyReport(lam_edge, der, sides, shifts, cls, tol_curve=tol_curve)
    if cls is not Classification.CURVE:
        slack = sides.sum() - 2 * sides
        j = int(np.argmin(slack))
        raise NoCurve(
            f"quadrangle inequality fails for side {j + 1}: 2*{sides[j]:.6g} >= {sides.sum():.6g} "
            f"({cls.value})", index=j + 1, sides=tuple(float(x) for x in sides))

    report.smooth = polygon.smoothness(sides)
    report.topology = polygon.topology(sides).value
    dense = polygon.curve_samples(sides, 2000)
    pts = dense.points()
    branch = np.concatenate([np.full(len(bp), i) for i, bp in enumerate(dense.branches)])
    mu = wrap(pts - shifts)

    pick = np.linspace(0, len(mu) - 1, samples).round().astype(int)
    on = mu[pick]
    report.curve_points = on
    report.curve_branch = branch[pick]
    report.on_curve_lambda1 = floquet_eigenvalues(g, b, phases_for(on), gamma_b, 1)[:, 0]
    report.on_curve_sigma = floquet_sigma(g, b, phases_for(on), gamma_b, lam_edge)

    rng = np.random.default_rng(seed)
    off = []
    while len(off) < off_samples:
        cand = rng.uniform(-math.pi, math.pi, size=(4 * off_samples, 3))
        dist = np.array([np.min(torus_distance(c, mu)) for c in cand])
        off.extend(cand[dist > OFF_CURVE_DISTANCE][: off_samples - len(off)])
    off = wrap(np.array(off))
    report.off_curve_points = off
    report.off_curve_lambda1 = floquet_eigenvalues(g, b, phases_for(off), gamma_b, 1)[:, 0]
    return report


@dataclass
class GapReport:
    lambda_b: float
    lambda_a: float
    max_band1: float
    min_band2: float
    argmax_band1: tuple
    argmin_band2: tuple
    grid: tuple

    @property
    def cut_margin(self) -> float:
        return self.lambda_a - self.lambda_b

    @property
    def gap(self) -> tuple[float, float]:
        return self.max_band1, self.min_band2

    @property
    def is_open(self) -> bool:
        return self.min_band2 > self.max_band1

    def to_dict(self) -> dict:
        return {
            "lambda1_dirichlet_B": _r(self.lambda_b),
            "lambda1_dirichlet_A": _r(self.lambda_a),
            "cut_margin": _r(self.cut_margin),
            "max_band1": _r(self.max_band1),
            "min_band2": _r(self.min_band2),
            "argmax_band1": [_r(x) for x in self.argmax_band1],
            "argmin_band2": [_r(x) for x in self.argmin_band2],
            "gap": [_r(self.max_band1), _r(self.min_band2)],
            "gap_length": _r(self.min_band2 - self.max_band1),
            "gap_open": self.is_open,
            "grid": list(self.grid),
        }


def check_gap(g: CompactGraph, b: str = "B", gamma_b: float | None = None, grid=(16, 16, 16),
              a: str = "A", jobs: int = 1, tol: float = TOL_CHAIN) -> GapReport:
    """Verify ``lambda_1(G^k) <= lambda_1(G^B) < lambda_1(G^A) <= lambda_2(G^k)`` on a grid.

    Raises :class:`GapChainViolated` (with the offending ``k``) if any link
    fails by more than ``tol``; that signals a numerical failure, not a
    counterexample.
    """
    gamma_b = _coupling(g, b, gamma_b)
    lam_b = float(lowest_eigenvalues(dirichlet_perturbation(g, b), 1)[0])
    lam_a = float(lowest_eigenvalues(dirichlet_perturbation(g, a), 1)[0])
    if not lam_b < lam_a:
        raise GapChainViolated(f"lambda_1(G^B)={lam_b!r} is not below lambda_1(G^A)={lam_a!r}")
    table = band_sweep(g, b, gamma_b, grid, 2, jobs=jobs)
    l1, l2 = table.values[:, 0], table.values[:, 1]
    for bad, what in (
        (l1 > lam_b + tol, "lambda_1(G^k) above lambda_1(G^B)"),
        (l2 < lam_a - tol, "lambda_2(G^k) below lambda_1(G^A)"),
        (l2 < lam_b - tol, "lambda_2(G^k) below lambda_1(G^B)"),
        (l1 > lam_a + tol, "lambda_1(G^k) above lambda_1(G^A)"),
    ):
        if bad.any():
            k = tuple(float(x) for x in table.k[int(np.argmax(bad))])
            raise GapChainViolated(f"{what} at k={k}", k=k)
    i1, i2 = int(np.argmax(l1)), int(np.argmin(l2))
    return GapReport(lam_b, lam_a, float(l1[i1]), float(l2[i2]),
                     tuple(table.k[i1]), tuple(table.k[i2]), tuple(table.shape))


def rho0(tol: float = 0.0, max_iter: int = 200) -> tuple[float, float]:
    """Root of ``rho^2 - rho^3 / 3 = pi^2 / 24`` in ``(2, 3)`` by bisection; returns ``(rho, residual)``."""
    target = math.pi ** 2 / 24

    def f(r):
        return r * r - r ** 3 / 3 - target

    lo, hi = 2.0, 3.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or hi - lo <= tol:
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    return root, abs(f(root))


@dataclass
class QuantCheck:
    rho0: float
    residual: float
    lengths: tuple
    hypothesis: bool
    margins: list[float]

    @property
    def inequalities_hold(self) -> bool:
        return all(m > 0 for m in self.margins)

    @property
    def counterexample(self) -> bool:
        return self.hypothesis and not self.inequalities_hold

    def to_dict(self) -> dict:
        return {
            "rho0": _r(self.rho0),
            "rho0_residual": float(f"{self.residual:.3g}"),
            "lengths": [_r(x) for x in self.lengths],
            "hypothesis": self.hypothesis,
            "margins": [_r(m) for m in self.margins],
            "inequalities_hold": self.inequalities_hold,
        }


def quant_condition(lengths) -> QuantCheck:
    """Sufficient length condition for the tailed graph, with the ground-state margins.

    ``lengths = (l0, l1, .., l4)``.  The hypothesis is
    ``min(rho0 * min_j l_j, l0) >= max_j l_j`` (``j = 1..4``); the margins
    ``sum_i |phi'_i(B)| - 2 |phi'_j(B)|`` are computed either way, but only
    carry a claim when the hypothesis holds.
    """
    g = build_gamma2(lengths)
    rho, res = rho0()
    ell = np.asarray(lengths[1:], dtype=float)
    hyp = bool(min(rho * ell.min(), float(lengths[0])) >= ell.max())
    _, der, _ = ground_state_derivatives(g, "B")
    mag = np.abs(der)
    margins = [float(mag.sum() - 2 * m) for m in mag]
    return QuantCheck(rho, res, tuple(float(x) for x in lengths), hyp, margins)


@dataclass(frozen=True)
class PerturbSpec:
    length_jitter: float = 0.02
    coupling_jitter: float = 0.1
    potential_amplitude: float = 0.0
    potential_edges: tuple[str, ...] | None = None  # None: every edge


def perturb_graph(g: CompactGraph, spec: PerturbSpec, seed: int) -> CompactGraph:
    """Seeded perturbation: lengths times ``1 + U(-j, j)``, couplings plus ``U(-c, c)``,
    and a two-segment potential with values in ``[-amp, amp]`` on the selected edges.

    Quasi-NK and Dirichlet vertices keep their conditions.  A zero spec
    returns an equal graph.
    """
    rng = np.random.default_rng(seed)
    edges = []
    for e in g.edges:
        scale = 1.0 + rng.uniform(-1, 1) * spec.length_jitter
        split = rng.uniform(0.3, 0.7)
        q = rng.uniform(-1, 1, size=2) * spec.potential_amplitude
        length = e.length * scale
        if spec.potential_amplitude > 0 and (spec.potential_edges is None or e.id in spec.potential_edges):
            potential = ((split * length, float(q[0])), ((1 - split) * length, float(q[1])))
        elif scale != 1.0:
            potential = tuple((seg * scale, val) for seg, val in e.potential)
        else:
            potential = e.potential
        edges.append(Edge(e.id, e.tail, e.head, length, potential))
    verts = []
    for v, cond in g.vertices:
        shift = rng.uniform(-1, 1) * spec.coupling_jitter
        if cond.kind is ConditionKind.DELTA and shift != 0.0:
            cond = VertexCondition.delta(cond.gamma + shift)
        verts.append((v, cond))
    return CompactGraph(tuple(verts), tuple(edges), name=g.name)


@dataclass
class RobustnessReport:
    seed: int
    spec: PerturbSpec
    graph: CompactGraph = field(repr=False)
    gap: GapReport | None
    curve: DegeneracyReport | None
    error: str = ""

    @property
    def gap_open(self) -> bool:
        return self.gap is not None and self.gap.is_open

    @property
    def curve_exists(self) -> bool:
        return self.curve is not None and self.curve.verdict

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "perturbation": {
                "length_jitter": self.spec.length_jitter,
                "coupling_jitter": self.spec.coupling_jitter,
                "potential_amplitude": self.spec.potential_amplitude,
                "potential_edges": list(self.spec.potential_edges) if self.spec.potential_edges else None,
            },
            "lengths": [_r(e.length) for e in self.graph.edges],
            "couplings": {v: _r(c.gamma) for v, c in self.graph.vertices},
            "gap": self.gap.to_dict() if self.gap else None,
            "curve": self.curve.to_dict() if self.curve else None,
            "gap_open": self.gap_open,
            "curve_exists": self.curve_exists,
            "error": self.error,
        }


def perturb_and_verify(g: CompactGraph, spec: PerturbSpec = PerturbSpec(), seed: int = 0,
                       b: str = "B", a: str = "A", grid=(12, 12, 12), samples: int = 100,
                       off_samples: int = 100, jobs: int = 1) -> RobustnessReport:
    """Perturb ``g`` and rerun the gap check and the degeneracy-curve check.

    A failing check is recorded in the report (``error``) rather than raised,
    so that a batch of seeds can be summarized.
    """
    pg = perturb_graph(g, spec, seed)
    gap = curve = None
    error = ""
    try:
        gap = check_gap(pg, b, None, grid, a=a, jobs=jobs)
        curve = degenerate_curve(pg, b, None, samples, off_samples, seed=seed)
    except SolverError as err:
        error = f"{type(err).__name__}: {err}"
    return RobustnessReport(seed, spec, pg, gap, curve, error)
