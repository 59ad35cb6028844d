"""Solutions of the quadrangle closure ``a1 e^{ik1} + a2 e^{ik2} + a3 e^{ik3} + a4 = 0``.

Points are produced by a two-link construction: for a given ``k1`` the
vector ``-w = -(a4 + a1 e^{ik1})`` must be reached by two links of lengths
``a2, a3``, which is possible iff ``|a2 - a3| <= |w| <= a2 + a3``.  The two
elbow configurations (``sign = +1 / -1``) give two polylines per arc of
admissible ``k1``; they meet at folds, where the links are collinear.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import product

import numpy as np

from .errors import NotACurve

EQUALITY_REL = 1e-12
RESIDUAL_REL = 1e-10


class Classification(str, Enum):
    EMPTY = "Empty"
    POINT = "Point"
    CURVE = "Curve"


class Topology(str, Enum):
    ONE_CIRCLE = "OneCircle"
    TWO_CIRCLES = "TwoCircles"
    TWO_CIRCLES_ONE_POINT = "TwoCirclesOnePoint"
    TWO_CIRCLES_TWO_POINTS = "TwoCirclesTwoPoints"
    THREE_CIRCLES_PAIRWISE = "ThreeCirclesPairwise"
    UNCLASSIFIED = "Unclassified"


def _sides(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size < 3:
        raise ValueError("need at least three side lengths")
    if not np.all(a > 0) or not np.all(np.isfinite(a)):
        raise ValueError(f"side lengths must be positive, got {a.tolist()}")
    return a


def wrap(k):
    """Map angles into ``(-pi, pi]``."""
    return math.pi - np.mod(math.pi - np.asarray(k, dtype=float), 2 * math.pi)


def torus_distance(p, q) -> np.ndarray:
    """Largest circular distance over the coordinates (broadcasts over leading axes)."""
    d = np.abs(wrap(np.asarray(p) - np.asarray(q)))
    return np.max(d, axis=-1)


def closure_residual(a, k) -> np.ndarray:
    """``|sum_{j<n} a_j e^{ik_j} + a_n|`` for points ``k`` of shape ``(..., n-1)``."""
    a = np.asarray(a, dtype=float)
    k = np.asarray(k, dtype=float)
    return np.abs(np.sum(a[:-1] * np.exp(1j * k), axis=-1) + a[-1])


def classify(a) -> Classification:
    """Empty if some side exceeds the sum of the others, Point on equality, else Curve."""
    a = _sides(a)
    total = a.sum()
    slack = np.min(total - 2 * a)  # min_m (sum_{j != m} a_j - a_m)
    tol = EQUALITY_REL * total
    if slack < -tol:
        return Classification.EMPTY
    if slack <= tol:
        return Classification.POINT
    return Classification.CURVE


def point_location(a) -> tuple[float, ...]:
    """The single solution in the Point case: the longest side is anti-aligned with the rest."""
    a = _sides(a)
    if classify(a) is not Classification.POINT:
        raise NotACurve(f"{a.tolist()} is not a degenerate (Point) polygon")
    m = int(np.argmax(a))
    n = a.size
    if m == n - 1:
        return (math.pi,) * (n - 1)
    return tuple(math.pi if j == m else 0.0 for j in range(n - 1))


def singular_patterns(a) -> list[tuple[int, ...]]:
    """Sign patterns ``(e1, .., e_{n-1}, +1)`` with ``sum e_j a_j = 0``."""
    a = _sides(a)
    tol = EQUALITY_REL * a.sum()
    out = []
    for signs in product((1, -1), repeat=a.size - 1):
        eps = (*signs, 1)
        if abs(float(np.dot(eps, a))) <= tol:
            out.append(eps)
    return out


def smoothness(a) -> bool:
    """False iff some signed sum ``+-a1 +-a2 +-a3 +-a4`` vanishes."""
    return not singular_patterns(a)


def _two_link(a2, a3, minus_w):
    """Elbow angles for links ``a2, a3`` reaching ``minus_w``; returns ``phi, alpha2, alpha3``."""
    r = np.abs(minus_w)
    phi = np.angle(minus_w)
    # four times the triangle area (Heron), clamped at folds
    f = (r + a2 + a3) * (-r + a2 + a3) * (r - a2 + a3) * (r + a2 - a3)
    area4 = np.sqrt(np.maximum(f, 0.0))
    alpha2 = np.arctan2(area4, r * r + a2 * a2 - a3 * a3)
    alpha3 = np.arctan2(area4, r * r + a3 * a3 - a2 * a2)
    return phi, alpha2, alpha3


def _k1_window(a):
    """Admissible ``|k1|`` range ``[lo, hi]`` from ``|a2 - a3| <= |a4 + a1 e^{ik1}| <= a2 + a3``."""
    a1, a2, a3, a4 = a
    denom = 2 * a1 * a4
    c_hi = ((a2 + a3) ** 2 - a1 * a1 - a4 * a4) / denom
    c_lo = ((a2 - a3) ** 2 - a1 * a1 - a4 * a4) / denom
    lo = math.acos(min(1.0, max(-1.0, c_hi)))
    hi = math.acos(min(1.0, max(-1.0, c_lo)))
    return lo, hi


@dataclass(frozen=True)
class PolygonCurve:
    sides: tuple[float, ...]
    classification: Classification
    branches: list[np.ndarray] = field(default_factory=list)
    closed: list[bool] = field(default_factory=list)
    smooth: bool = True

    def points(self) -> np.ndarray:
        if not self.branches:
            return np.empty((0, len(self.sides) - 1))
        return np.concatenate(self.branches, axis=0)

    def residuals(self) -> np.ndarray:
        return closure_residual(self.sides, self.points())

    def step(self) -> float:
        """Largest torus distance between consecutive samples of a branch."""
        steps = [float(np.max(torus_distance(b[1:], b[:-1]))) for b in self.branches if len(b) > 1]
        return max(steps) if steps else 0.0

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("branch_id,k1,k2,k3,residual\n")
        for i, b in enumerate(self.branches):
            res = closure_residual(self.sides, b)
            for k, r in zip(b, res):
                out.write(f"{i},{k[0]:.12g},{k[1]:.12g},{k[2]:.12g},{r:.12g}\n")
        return out.getvalue()


def curve_samples(a, m: int = 400) -> PolygonCurve:
    """Sample every branch of the closure curve with about ``m`` points in total."""
    a = _sides(a)
    if a.size != 4:
        raise ValueError("curve_samples handles quadrangles; use closure_samples for n-gons")
    cls = classify(a)
    if cls is not Classification.CURVE:
        raise NotACurve(f"{a.tolist()} is classified {cls.value}, not Curve")
    a = a / a.sum()
    a1, a2, a3, a4 = a
    lo, hi = _k1_window(a)
    special = math.isclose(a1, a4, rel_tol=EQUALITY_REL) and math.isclose(a2, a3, rel_tol=EQUALITY_REL)
    n_branch = 4 + int(special)
    per = max(8, m // n_branch)

    # cosine spacing clusters samples at the folds, where k2, k3 move like sqrt(k1)
    t = (1 - np.cos(np.linspace(0.0, math.pi, per))) / 2
    theta = lo + (hi - lo) * t
    branches, closed = [], []
    for side in (1.0, -1.0):
        k1 = side * theta
        w = a4 + a1 * np.exp(1j * k1)
        keep = np.abs(w) > 1e-9
        k1, w = k1[keep], w[keep]
        phi, al2, al3 = _two_link(a2, a3, -w)
        for sign in (1.0, -1.0):
            pts = np.stack([k1, phi + sign * al2, phi - sign * al3], axis=-1)
            branches.append(wrap(pts))
            closed.append(False)
    if special:
        # w = 0 at k1 = pi: a full circle (pi, t, t + pi)
        s = np.linspace(-math.pi, math.pi, per, endpoint=False) + math.pi / per
        circle = np.stack([np.full_like(s, math.pi), s, s + math.pi], axis=-1)
        branches.append(wrap(circle))
        closed.append(True)
    return PolygonCurve(tuple(float(x) for x in a), cls, branches, closed, smoothness(a))


def _components(curve: PolygonCurve, tol: float) -> int:
    n = len(curve.branches)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    ends = [np.stack([b[0], b[-1]]) for b in curve.branches]
    for i in range(n):
        for j in range(n):
            if i == j or find(i) == find(j):
                continue
            d = torus_distance(ends[i][:, None, :], curve.branches[j][None, :, :])
            if np.min(d) <= tol:
                parent[find(i)] = find(j)
    return len({find(i) for i in range(n)})


def _smooth_count(a) -> int:
    # the admissible k1 set is one arc unless it avoids both k1 = 0 and k1 = pi
    lo, hi = _k1_window(a)
    return 2 if (lo > 0 and hi < math.pi) or (lo == 0 and hi == math.pi) else 1


def topology(a, m: int = 2000) -> Topology:
    """Topology of the closure curve from chained samples.

    Smooth curves are one or two circles; the count from chaining must agree
    with the count predicted by the admissible ``k1`` window.  Singular curves
    must chain into one piece and are typed by their number of singular
    points (one per vanishing signed sum, up to global sign).
    """
    curve = curve_samples(a, m)
    count = _components(curve, 3 * curve.step())
    if curve.smooth:
        expected = _smooth_count(np.asarray(curve.sides))
        if count != expected:
            return Topology.UNCLASSIFIED
        return Topology.ONE_CIRCLE if count == 1 else Topology.TWO_CIRCLES
    if count != 1:
        return Topology.UNCLASSIFIED
    nodes = len(singular_patterns(curve.sides))
    return {
        1: Topology.TWO_CIRCLES_ONE_POINT,
        2: Topology.TWO_CIRCLES_TWO_POINTS,
        3: Topology.THREE_CIRCLES_PAIRWISE,
    }.get(nodes, Topology.UNCLASSIFIED)


def component_count(a, m: int = 2000) -> int:
    curve = curve_samples(a, m)
    return _components(curve, 3 * curve.step())


def closure_samples(a, m: int = 200, seed: int = 0) -> np.ndarray:
    """Random solutions of the n-gon closure ``sum_{j<n} a_j e^{ik_j} + a_n = 0``.

    The first ``n - 3`` angles are drawn uniformly and the last two solved by
    the two-link construction; infeasible draws are discarded.  For ``n = 3``
    the (at most two) solutions are returned.  Returns shape ``(count, n-1)``.
    """
    a = _sides(a)
    n = a.size
    if classify(a) is Classification.EMPTY:
        return np.empty((0, n - 1))
    a = a / a.sum()
    rng = np.random.default_rng(seed)
    free = n - 3
    draws = rng.uniform(-math.pi, math.pi, size=(m if free else 1, free))
    w = a[-1] + np.sum(a[:free] * np.exp(1j * draws), axis=1)
    x, y = a[free], a[free + 1]
    r = np.abs(w)
    ok = (r <= x + y) & (r >= abs(x - y)) & (r > 1e-12)
    draws, w = draws[ok], w[ok]
    phi, al_x, al_y = _two_link(x, y, -w)
    out = []
    for sign in (1.0, -1.0):
        out.append(np.concatenate([draws, (phi + sign * al_x)[:, None], (phi - sign * al_y)[:, None]], axis=1))
    pts = wrap(np.concatenate(out, axis=0))
    if free == 0:
        pts = np.unique(np.round(pts, 14), axis=0)
    return pts
