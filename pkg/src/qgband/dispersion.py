"""Band functions over the quasimomentum torus and the discrete diamond bands."""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError, WrongDegree
from .secular import TOL_EIG, floquet_eigenvalues

CHUNK = 512


def torus_axis(n: int) -> np.ndarray:
    """``n`` equispaced points of ``(-pi, pi]``: ``-pi + 2 pi (i + 1) / n``."""
    return -math.pi + 2 * math.pi * np.arange(1, n + 1) / n


def torus_grid(shape) -> np.ndarray:
    """All grid points, shape ``(prod(shape), len(shape))``, first coordinate slowest."""
    axes = [torus_axis(n) for n in shape]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def phases_for(k: np.ndarray) -> np.ndarray:
    """Rows ``(e^{ik_1}, ..., e^{ik_d}, 1)`` for a batch of quasimomenta."""
    k = np.atleast_2d(k)
    return np.concatenate([np.exp(1j * k), np.ones((k.shape[0], 1))], axis=1)


@dataclass(frozen=True)
class BandTable:
    shape: tuple[int, ...]
    k: np.ndarray          # (M, d)
    values: np.ndarray     # (M, J), ascending per row
    config_hash: str = ""
    tol: float = TOL_EIG

    @property
    def bands(self) -> int:
        return self.values.shape[1]

    def band(self, j: int) -> np.ndarray:
        """Band ``j`` (1-based) reshaped onto the grid."""
        return self.values[:, j - 1].reshape(self.shape)

    def to_csv(self) -> str:
        d = self.k.shape[1]
        out = io.StringIO()
        header = [f"k{i + 1}" for i in range(d)] + [f"lambda_{j + 1}" for j in range(self.bands)]
        out.write(",".join(header) + "\n")
        for k, lam in zip(self.k, self.values):
            out.write(",".join(f"{x:.12g}" for x in (*k, *lam)) + "\n")
        return out.getvalue()


def band_sweep(g, b: str, gamma_b: float | None, grid, J: int, jobs: int = 1,
               config_hash: str = "", tol: float = TOL_EIG) -> BandTable:
    """First ``J`` eigenvalues of the Floquet graph at every grid quasimomentum.

    The quasimomentum dimension is ``deg(b) - 1``; the last edge end at ``b``
    carries phase 1.  ``gamma_b=None`` keeps the coupling already at ``b``.
    Solver failures are re-raised with the offending ``k`` in ``err.k``.
    """
    if gamma_b is None:
        gamma_b = g.condition(b).gamma
    shape = tuple(int(n) for n in grid)
    if len(shape) != g.degree(b) - 1:
        raise WrongDegree(f"vertex {b!r} has degree {g.degree(b)}; grid must have {g.degree(b) - 1} axes")
    if any(n < 1 for n in shape) or J < 1:
        raise ValueError("grid sizes and band count must be positive")
    k = torus_grid(shape)
    chunks = [slice(i, min(i + CHUNK, len(k))) for i in range(0, len(k), CHUNK)]

    def run(sl):
        try:
            return floquet_eigenvalues(g, b, phases_for(k[sl]), gamma_b, J, tol=tol)
        except SolverError as err:
            idx = getattr(err, "index", None)
            bad = k[sl][idx] if idx is not None else None
            new = SolverError(f"{err} (k = {None if bad is None else tuple(np.round(bad, 12))})")
            new.k = None if bad is None else tuple(float(x) for x in bad)
            raise new from err

    if jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(sl) for sl in chunks]
    values = np.concatenate(parts, axis=0)
    return BandTable(shape, k, values, config_hash, tol)


@dataclass(frozen=True)
class SpectrumReport:
    bands: list[tuple[float, float]]
    gaps: list[tuple[int, float, float]]   # (lower band index, left end, right end)
    argmax_cells: list[tuple[int, ...]]
    config_hash: str = ""
    extra: dict = field(default_factory=dict)

    def gap_after(self, j: int):
        """The gap above band ``j`` (1-based), or ``None``."""
        for lower, lo, hi in self.gaps:
            if lower == j:
                return lo, hi
        return None

    def to_dict(self) -> dict:
        def r(x):
            return float(f"{x:.12g}")

        return {
            "bands": [[r(a), r(b)] for a, b in self.bands],
            "gaps": [{"between": [j, j + 1], "interval": [r(a), r(b)], "length": r(b - a)}
                     for j, a, b in self.gaps],
            "argmax_cells": [list(c) for c in self.argmax_cells],
            "config_hash": self.config_hash,
            **self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def spectrum_report(t: BandTable, tol: float = 1e-9, argmax_tol: float | None = None) -> SpectrumReport:
    """Bands as ``[min, max]`` over the grid and the gaps longer than ``tol`` between them.

    ``argmax_cells`` lists the grid indices where band 1 is within
    ``argmax_tol`` (default ``tol``) of its maximum.
    """
    if t.values.size == 0:
        raise ValueError("empty band table")
    bands = [(float(np.min(t.values[:, j])), float(np.max(t.values[:, j]))) for j in range(t.bands)]
    gaps = []
    for j in range(t.bands - 1):
        top = max(b for _, b in bands[: j + 1])
        bottom = min(a for a, _ in bands[j + 1:])
        if bottom - top > tol:
            gaps.append((j + 1, top, bottom))
    atol = tol if argmax_tol is None else argmax_tol
    first = t.values[:, 0]
    hits = np.flatnonzero(first >= first.max() - atol)
    cells = [tuple(int(i) for i in np.unravel_index(h, t.shape)) for h in hits]
    return SpectrumReport(bands, gaps, cells, t.config_hash)


def max_adjacent_jump(t: BandTable, j: int = 1) -> float:
    """Largest change of band ``j`` between neighbouring grid cells (periodic)."""
    band = t.band(j)
    return max(float(np.max(np.abs(np.roll(band, -1, axis=a) - band))) for a in range(band.ndim))


def discrete_diamond_bands(d: int, k) -> tuple[float, float]:
    """Eigenvalues of ``[[d+1, -conj(w)], [-w, d+1]]`` with ``w = 1 + sum_j e^{ik_j}``.

    The upper value is formed as ``2(d+1) - lower`` so the pair sums to
    ``2(d+1)`` exactly.
    """
    if int(d) != d or d < 2:
        raise ValueError("d must be an integer >= 2")
    k = np.asarray(k, dtype=float)
    if k.shape != (d,):
        raise ValueError(f"expected {d} quasimomentum components")
    w = 1.0 + np.sum(np.exp(1j * k))
    lower = (d + 1) - abs(w)
    return float(lower), float(2 * (d + 1) - lower)
