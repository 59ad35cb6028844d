import math

import numpy as np
import pytest

from oracles import QUARTER_PI_SQ
from qgband.errors import GridTooCoarse
from qgband.fd_oracle import MIN_POINTS, discretize, oracle_eigenvalues, richardson_ratios
from qgband.graph_model import (
    Edge,
    apply_floquet,
    build_gamma1,
    build_gamma2,
    dirichlet_perturbation,
    neumann_interval,
)
from qgband.secular import lowest_eigenvalues


def test_neumann_interval():
    ev = oracle_eigenvalues(neumann_interval(1.0), 200, 4)
    exact = (np.arange(4) * math.pi) ** 2
    assert ev[0] == pytest.approx(0.0, abs=1e-10)
    assert np.allclose(ev, exact, atol=2e-2)


def test_grid_too_coarse(gamma1):
    with pytest.raises(GridTooCoarse):
        discretize(gamma1, MIN_POINTS - 1)
    discretize(gamma1, MIN_POINTS)


def test_hermitian_with_phases(gamma1):
    op = discretize(apply_floquet(gamma1, "B", (0.4, -1.1, 2.5)), 64)
    assert np.array_equal(op.H, op.H.conj().T)
    assert np.iscomplexobj(op.H) and np.abs(op.H.imag).max() > 0


def test_zero_quasimomentum_is_plain_delta(gamma1):
    a = discretize(gamma1, 64).H
    b = discretize(apply_floquet(gamma1, "B", (0.0, 0.0, 0.0)), 64).H
    assert np.allclose(a, b, atol=1e-13)


def test_dirichlet_vertices_removed(gamma1):
    full = discretize(gamma1, 50)
    cut = discretize(dirichlet_perturbation(gamma1, "B"), 50)
    assert full.size - cut.size == 1
    assert not any(tag == ("vertex", "B#0") for tag in cut.index)


def test_gamma1_b_ground_state(gamma1_b):
    assert oracle_eigenvalues(gamma1_b, 400, 1)[0] == pytest.approx(QUARTER_PI_SQ, abs=5e-3)


def test_richardson_second_order(gamma1_b):
    exact = lowest_eigenvalues(gamma1_b, 6)
    ratios = richardson_ratios(gamma1_b, exact, N=200)
    assert np.all((ratios > 3.9) & (ratios < 4.1))


def test_richardson_skips_exact_levels():
    g = neumann_interval(1.0)
    ratios = richardson_ratios(g, lowest_eigenvalues(g, 3), N=100)
    assert math.isnan(ratios[0]) and abs(ratios[1] - 4) < 0.05


def test_k_and_minus_k(gamma2):
    k = np.array([0.7, -2.0, 1.3])
    a = oracle_eigenvalues(apply_floquet(gamma2, "B", k), 100, 6)
    b = oracle_eigenvalues(apply_floquet(gamma2, "B", -k), 100, 6)
    assert np.allclose(a, b, atol=1e-9)


def test_step_potential_matches_solver():
    g = build_gamma1([1, 1, 1, 1], 0.0, 1.0,
                     potentials=[((0.5, 2.0), (0.5, -1.0)), None, None, None])
    assert np.allclose(oracle_eigenvalues(g, 400, 5), lowest_eigenvalues(g, 5), atol=5e-3)


def test_callable_potential_constant_shift():
    g = neumann_interval(1.0)
    ev = oracle_eigenvalues(g, 100, 3, potentials={"e": lambda x: np.full_like(x, 3.0)})
    assert np.allclose(ev - 3.0, oracle_eigenvalues(g, 100, 3), atol=1e-10)


def test_short_edge_gets_interior_node():
    g = build_gamma2([1, 1, 1, 1, 0.01])
    op = discretize(g, 20)
    assert len(op.spacing["e4"]) >= 2
    assert np.allclose(oracle_eigenvalues(g, 400, 3), lowest_eigenvalues(g, 3), atol=5e-3)


def test_potential_segments_respected():
    e = Edge("e", "L", "R", 1.0, ((0.25, 0.0), (0.75, 4.0)))
    g = neumann_interval(1.0)
    g = type(g)(g.vertices, (e,), g.name)
    op = discretize(g, 40)
    assert np.allclose(np.sum(op.spacing["e"]), 1.0)
    assert np.allclose(oracle_eigenvalues(g, 400, 4), lowest_eigenvalues(g, 4), atol=5e-3)
