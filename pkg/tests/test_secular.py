import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import QUARTER_PI_SQ, gamma1_a_root, star_ground_state
from qgband.errors import LambdaOutOfRange, MultiplicityAmbiguous, NotAnEigenvalue, ScanResolutionTooCoarse
from qgband.fd_oracle import oracle_eigenvalues
from qgband.graph_model import (
    VertexCondition,
    apply_floquet,
    attach_interval,
    build_gamma1,
    build_gamma2,
    connected_components,
    dirichlet_perturbation,
    floquet_loop,
    induced_subgraph,
    neumann_interval,
    with_coupling,
)
from qgband.secular import (
    ScanResolutionWarning,
    eigenfunction,
    eigenvalue_count,
    eigenvalues_in,
    lowest_eigenvalues,
    secular_matrix,
    sigma_min,
)

lengths = st.floats(0.6, 1.6)


def test_matrix_shape(gamma1, gamma2):
    assert secular_matrix(gamma1, 1.0).shape == (8, 8)
    assert secular_matrix(gamma2, 1.0).shape == (10, 10)


def test_neumann_interval_zero_is_singular():
    g = neumann_interval(1.0)
    assert sigma_min(g, 0.0) <= 1e-14
    assert np.linalg.matrix_rank(secular_matrix(g, 0.0)) == 1


def test_gamma1_b_ground_state_singular(gamma1_b):
    assert sigma_min(gamma1_b, QUARTER_PI_SQ) <= 1e-8
    assert sigma_min(gamma1_b, 1.0) > 0.01


def test_lambda_cap(gamma1):
    with pytest.raises(LambdaOutOfRange):
        secular_matrix(gamma1, 2e6)
    with pytest.raises(LambdaOutOfRange):
        eigenvalues_in(gamma1, 0.0, 2e6)


def test_interval_spectrum():
    found = eigenvalues_in(neumann_interval(1.0), -0.5, 50)
    assert [m for _, m in found] == [1, 1, 1]
    assert np.allclose([lam for lam, _ in found], [0, math.pi ** 2, 4 * math.pi ** 2], atol=1e-8)


def test_interval_negative_range_empty():
    assert eigenvalues_in(neumann_interval(1.0), -1.0, 0.0) == []


def test_gamma1_b_ground_state(gamma1_b):
    found = eigenvalues_in(gamma1_b, 0.0, 5.0)
    assert len(found) == 1
    lam, mult = found[0]
    assert mult == 1 and lam == pytest.approx(QUARTER_PI_SQ, abs=1e-10)


def test_gamma1_a_ground_state(gamma1):
    ga = dirichlet_perturbation(gamma1, "A")
    lam, mult = eigenvalues_in(ga, 0.0, 5.0)[0]
    assert mult == 1
    assert lam == pytest.approx(gamma1_a_root(), abs=1e-10)
    assert math.pi ** 2 / 4 < lam < math.pi ** 2


def test_sigma_positive_between_eigenvalues(gamma1):
    lam = np.unique(lowest_eigenvalues(gamma1, 9).round(9))
    for mid in (lam[1:] + lam[:-1]) / 2:
        assert sigma_min(gamma1, mid) > 1e-6


def test_scan_and_count_agree(gamma2):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ScanResolutionWarning)
        found = eigenvalues_in(gamma2, -1.0, 60.0)
    total = sum(m for _, m in found)
    assert total == eigenvalue_count(gamma2, 60.0)
    flat = np.repeat([x for x, _ in found], [m for _, m in found])
    assert np.allclose(flat, lowest_eigenvalues(gamma2, total), atol=1e-9)


def test_degenerate_cluster_recovered(gamma1):
    # 4 pi^2 (triple) and the simple level just above it are one scan step apart
    with pytest.warns(ScanResolutionWarning):
        found = eigenvalues_in(gamma1, -3.0, 45.0)
    assert [m for _, m in found] == [1, 3, 1, 3, 1]
    with pytest.raises(ScanResolutionTooCoarse):
        eigenvalues_in(gamma1, -3.0, 45.0, strict=True)


def test_loop_double_eigenvalues():
    loop = floquet_loop(1.0).with_condition("V", VertexCondition.quasi_nk([-1.0, 1.0]))
    found = eigenvalues_in(loop, 0.0, 100.0)
    assert [m for _, m in found] == [2, 2]
    assert np.allclose([x for x, _ in found], [math.pi ** 2, 9 * math.pi ** 2], atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.floats(-math.pi, math.pi))
def test_loop_dispersion(k):
    loop = floquet_loop(1.0).with_condition("V", VertexCondition.quasi_nk([complex(math.cos(k), math.sin(k)), 1.0]))
    expected = np.sort([(k + 2 * math.pi * n) ** 2 for n in range(-3, 4)])[:4]
    assert np.allclose(lowest_eigenvalues(loop, 4), expected, atol=1e-9)


def test_eigenfunction_gamma1_b(gamma1_b):
    sol = eigenfunction(gamma1_b, QUARTER_PI_SQ)
    assert sol.multiplicity == 1 and not sol.ambiguous
    x = np.linspace(0, 1, 11)
    values = [sol.evaluate(f"e{j}", x) for j in range(1, 5)]
    for v in values[1:]:
        assert np.allclose(v, values[0], atol=1e-10)
    # phi = cos(pi x / 2) / sqrt(2) from A
    assert np.allclose(values[0].real, np.cos(math.pi * x / 2) / math.sqrt(2), atol=1e-10)
    der = [sol.vertex_derivatives[f"B#{i}"][0] for i in range(4)]
    assert np.allclose(der, math.pi / (2 * math.sqrt(2)), atol=1e-10)


def test_eigenfunction_interval_constant():
    sol = eigenfunction(neumann_interval(2.0), 0.0)
    assert np.allclose(sol.evaluate("e", np.linspace(0, 2, 5)), 1 / math.sqrt(2), atol=1e-12)
    assert np.allclose(sol.vertex_derivatives["L"], 0, atol=1e-12)
    assert np.allclose(sol.vertex_derivatives["R"], 0, atol=1e-12)


def test_eigenfunction_gamma2_b(gamma2):
    gb = dirichlet_perturbation(gamma2, "B")
    lam = lowest_eigenvalues(gb, 1)[0]
    assert lam == pytest.approx(math.atan(2) ** 2, abs=1e-10)
    sol = eigenfunction(gb, lam)
    der = [sol.vertex_derivatives[f"B#{i}"][0] for i in range(4)]
    assert np.allclose(der, der[0], atol=1e-10) and der[0] > 0
    assert der[0] == pytest.approx(star_ground_state([1] * 4, tail=1.0)[1][0], abs=1e-9)


def test_eigenfunction_errors(gamma1):
    with pytest.raises(NotAnEigenvalue):
        eigenfunction(gamma1, 1.0)
    sol = eigenfunction(gamma1, math.pi ** 2)
    assert sol.multiplicity == 3 and len(sol.basis) == 3
    with pytest.raises(MultiplicityAmbiguous):
        eigenfunction(gamma1, math.pi ** 2, strict=True)


@settings(max_examples=20, deadline=None)
@given(st.tuples(lengths, lengths, lengths, lengths), st.floats(-1.0, 1.0))
def test_star_ground_state_matches_closed_form(ell, gamma_a):
    g = build_gamma1(list(ell), gamma_a, gamma_a + 1.0)
    lam_ref, der_ref = star_ground_state(ell, gamma_a)
    if lam_ref <= 0.05:
        return
    gb = dirichlet_perturbation(g, "B")
    lam = lowest_eigenvalues(gb, 1)[0]
    assert lam == pytest.approx(lam_ref, abs=1e-9)
    sol = eigenfunction(gb, lam)
    der = np.array([sol.vertex_derivatives[f"B#{i}"][0] for i in range(4)])
    assert np.allclose(der, der_ref, atol=1e-8)


@settings(max_examples=6, deadline=None)
@given(st.tuples(lengths, lengths, lengths, lengths), st.floats(-math.pi, math.pi))
def test_oracle_agreement(ell, k):
    g = apply_floquet(build_gamma1(list(ell), -0.3, 0.7), "B", (k, 0.5 * k, -k))
    assert np.allclose(lowest_eigenvalues(g, 6), oracle_eigenvalues(g, 300, 6),
                       atol=5e-3, rtol=1e-4)


def _interlace(g, gh, n=6):
    lo = lowest_eigenvalues(g, n + 1)
    hi = lowest_eigenvalues(gh, n)
    return np.all(lo[:n] <= hi + 1e-9) and np.all(hi <= lo[1:] + 1e-9)


@settings(max_examples=12, deadline=None)
@given(st.tuples(lengths, lengths, lengths, lengths), st.floats(-1, 1), st.floats(0.05, 3.0),
       st.sampled_from(["A", "B"]))
def test_interlacing(ell, gamma_a, step, vertex):
    g = build_gamma1(list(ell), gamma_a, gamma_a + 0.5)
    bumped = with_coupling(g, vertex, g.condition(vertex).gamma + step)
    assert _interlace(g, bumped)
    assert _interlace(g, dirichlet_perturbation(g, vertex))


@pytest.mark.parametrize("ell", [(1, 1, 1, 1, 1), (1.3, 0.9, 1.1, 1.0, 0.95), (0.7, 1.2, 0.8, 1.0, 1.1)])
def test_attachment_lowers_ground_state(ell):
    g2 = build_gamma2(list(ell))
    cut = dirichlet_perturbation(g2, "A")
    star = induced_subgraph(cut, next(c for c in connected_components(cut) if "B" in c))
    glued = attach_interval(star, "B", ell[0])
    before = lowest_eigenvalues(star, 1)[0]
    after = lowest_eigenvalues(glued, 1)[0]
    assert after < before
    # the glued star is the tailed star of the graph cut at B, with edges reversed
    assert after == pytest.approx(lowest_eigenvalues(dirichlet_perturbation(g2, "B"), 1)[0], abs=1e-9)


@settings(max_examples=10, deadline=None)
@given(st.tuples(lengths, lengths, lengths, lengths), st.floats(-1, 0.5), st.floats(0.05, 1.5))
def test_cut_at_b_below_cut_at_a_gamma1(ell, gamma_a, dgamma):
    g = build_gamma1(list(ell), gamma_a, gamma_a + dgamma)
    lb = lowest_eigenvalues(dirichlet_perturbation(g, "B"), 1)[0]
    la = lowest_eigenvalues(dirichlet_perturbation(g, "A"), 1)[0]
    assert lb < la


def test_count_monotone(gamma1):
    lam = np.linspace(-2, 60, 200)
    counts = [eigenvalue_count(gamma1, x) for x in lam]
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    assert counts[0] == 0
