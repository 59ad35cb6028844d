"""Solutions of ``-u'' + q u = lam u`` on an edge with piecewise-constant ``q``.

On a segment with constant ``q`` the fundamental pair ``c, s`` (``c(0) = 1,
c'(0) = 0, s(0) = 0, s'(0) = 1``) is explicit in ``omega = lam - q``.  All
functions broadcast over ``lam`` so that band sweeps can evaluate many
spectral parameters at once.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .graph_model import Edge

# below this |omega| the trigonometric/hyperbolic forms are replaced by a series
SERIES_CUTOFF = 1e-6


class BasisEval(NamedTuple):
    c: np.ndarray
    dc: np.ndarray
    s: np.ndarray
    ds: np.ndarray


def basis_eval(lam, x, q: float = 0.0) -> BasisEval:
    """Evaluate ``c, c', s, s'`` at ``x`` for spectral parameter ``lam``.

    Uses the signed root ``sign(omega) * sqrt(|omega|)`` and a Taylor series
    for ``|omega| < 1e-6`` so the result is smooth through ``lam = q``.

    >>> b = basis_eval(0.0, 2.0)
    >>> float(b.c), float(b.s)
    (1.0, 2.0)
    """
    lam = np.asarray(lam, dtype=float)
    x = np.asarray(x, dtype=float)
    omega = lam - q
    omega, x = np.broadcast_arrays(omega, x)
    root = np.sqrt(np.abs(omega))
    theta = root * x

    c = np.empty(omega.shape)
    s = np.empty(omega.shape)
    dc = np.empty(omega.shape)

    pos = omega >= SERIES_CUTOFF
    neg = omega <= -SERIES_CUTOFF
    small = ~(pos | neg)

    if pos.any():
        r, t = root[pos], theta[pos]
        sin_t = np.sin(t)
        c[pos] = np.cos(t)
        s[pos] = sin_t / r
        dc[pos] = -r * sin_t
    if neg.any():
        r, t = root[neg], theta[neg]
        sinh_t = np.sinh(t)
        c[neg] = np.cosh(t)
        s[neg] = sinh_t / r
        dc[neg] = r * sinh_t
    if small.any():
        w, xs = omega[small], x[small]
        z = w * xs * xs
        c[small] = 1.0 - z / 2 + z * z / 24 - z**3 / 720 + z**4 / 40320
        s[small] = xs * (1.0 - z / 6 + z * z / 120 - z**3 / 5040 + z**4 / 362880)
        dc[small] = -w * s[small]
    return BasisEval(c, dc, s, c.copy())


def segment_matrix(lam, length: float, q: float) -> np.ndarray:
    b = basis_eval(lam, length, q)
    return np.stack([np.stack([b.c, b.s], axis=-1), np.stack([b.dc, b.ds], axis=-1)], axis=-2)


def transfer_matrix(lam, edge: Edge) -> np.ndarray:
    """Map ``(u(0), u'(0))`` to ``(u(l), u'(l))``; shape ``lam.shape + (2, 2)``.

    The product runs over the potential segments from the tail:
    ``M = M_n @ ... @ M_1``.
    """
    m = None
    for length, q in edge.potential:
        seg = segment_matrix(lam, length, q)
        m = seg if m is None else seg @ m
    return m


def transfer_matrix_at(lam, edge: Edge, x) -> np.ndarray:
    """Transfer matrix from ``0`` to a point ``x`` inside the edge (scalar ``lam``)."""
    x = float(x)
    m = np.eye(2)
    pos = 0.0
    for length, q in edge.potential:
        if x <= pos + length:
            return segment_matrix(lam, x - pos, q) @ m
        m = segment_matrix(lam, length, q) @ m
        pos += length
    return m


def dirichlet_count(lam, edge: Edge) -> np.ndarray:
    """Number of Dirichlet eigenvalues of the edge strictly below ``lam``.

    By Sturm oscillation this equals the number of zeros in ``(0, l)`` of the
    solution with ``u(0) = 0, u'(0) = 1``.  On segments with ``omega > 0`` the
    scaled Pruefer angle ``atan2(sqrt(omega) u, u')`` advances linearly;
    otherwise the solution has at most one simple zero and a sign test
    suffices.
    """
    lam = np.asarray(lam, dtype=float)
    u = np.zeros(lam.shape)
    du = np.ones(lam.shape)
    count = np.zeros(lam.shape, dtype=int)
    for length, q in edge.potential:
        omega = lam - q
        b = basis_eval(lam, length, q)
        u_new = b.c * u + b.s * du
        du_new = b.dc * u + b.ds * du
        pos = omega > 0
        root = np.sqrt(np.where(pos, omega, 0.0))
        psi0 = np.arctan2(root * u, du)
        prufer = np.floor((psi0 + root * length) / np.pi) - np.floor(psi0 / np.pi)
        sign_change = (u * u_new < 0) | ((u_new == 0) & (u != 0))
        count += np.where(pos, prufer.astype(int), sign_change.astype(int))
        u, du = u_new, du_new
    # a zero exactly at x = l means lam is itself a Dirichlet eigenvalue
    count -= (u == 0).astype(int)
    return count
