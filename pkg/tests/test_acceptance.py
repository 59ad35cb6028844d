"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from oracles import QUARTER_PI_SQ, diamond_eigs, gamma1_a_root, rho0_roots
from qgband.band_edge import (
    PerturbSpec,
    degenerate_curve,
    perturb_and_verify,
    perturb_graph,
    quant_condition,
    rho0,
)
from qgband.dispersion import band_sweep, discrete_diamond_bands, spectrum_report
from qgband.fd_oracle import oracle_eigenvalues, richardson_ratios
from qgband.graph_model import (
    apply_floquet,
    build_gamma1,
    build_gamma2,
    dirichlet_perturbation,
    with_coupling,
)
from qgband.polygon import (
    Classification,
    Topology,
    classify,
    closure_samples,
    curve_samples,
    point_location,
    smoothness,
    topology,
)
from qgband.secular import lowest_eigenvalues

SEED = 20240611


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        return ok

    return emit


def test_criterion_1_gap_existence(report):
    g = build_gamma1([1, 1, 1, 1], 0.0, 1.0)
    start = time.perf_counter()
    table = band_sweep(g, "B", None, (16, 16, 16), 2)
    elapsed = time.perf_counter() - start
    lam_a = gamma1_a_root()
    max1 = float(table.values[:, 0].max())
    min2 = float(table.values[:, 1].min())
    gap = spectrum_report(table).gap_after(1)
    length = gap[1] - gap[0] if gap else 0.0
    ok = (abs(max1 - QUARTER_PI_SQ) <= 1e-6 and min2 >= lam_a - 1e-6 and length >= 0.4
          and elapsed <= 120)
    assert report(1, ok, f"max lambda1={max1:.12g} (pi^2/4={QUARTER_PI_SQ:.12g}), min lambda2={min2:.12g} "
                         f"(root {lam_a:.12g}), gap length {length:.4f}, {elapsed:.1f}s")


def test_criterion_2_degenerate_band_edge(report):
    rep = degenerate_curve(build_gamma1([1, 1, 1, 1], 0.0, 1.0), samples=100, off_samples=100, seed=SEED)
    dev = rep.on_curve_deviation
    worst_off = float(np.max(rep.off_curve_lambda1))
    ok = (len(rep.curve_points) == 100 and len(rep.off_curve_points) == 100
          and dev <= 1e-8 and worst_off < QUARTER_PI_SQ - 1e-6)
    assert report(2, ok, f"on-curve max |lambda1 - pi^2/4| = {dev:.2e} over 100; "
                         f"off-curve max lambda1 = {worst_off:.6f} over 100 (margin {QUARTER_PI_SQ - worst_off:.4f})")


def test_criterion_3_robustness(report):
    g = build_gamma1([1, 1, 1, 1], 0.0, 1.0)
    spec = PerturbSpec(length_jitter=0.02, coupling_jitter=0.1, potential_amplitude=0.1)
    bad, worst_dev, worst_gap = [], 0.0, math.inf
    for seed in range(1, 11):
        rep = perturb_and_verify(g, spec, seed, grid=(12, 12, 12), samples=100, off_samples=100)
        if not (rep.gap_open and rep.curve_exists) or rep.error:
            bad.append(seed)
            continue
        worst_dev = max(worst_dev, rep.curve.on_curve_deviation)
        worst_gap = min(worst_gap, rep.gap.min_band2 - rep.gap.max_band1)
    ok = not bad and worst_dev <= 1e-8
    assert report(3, ok, f"10 seeds, failures {bad}, worst on-curve deviation {worst_dev:.2e}, "
                         f"smallest gap {worst_gap:.4f}")


def _random_family_graph(rng):
    if rng.random() < 0.5:
        gamma_a = rng.uniform(-1, 1)
        pots = [None] * 4
        if rng.random() < 0.5:
            pots[int(rng.integers(4))] = rng.uniform(-2, 2)
        g = build_gamma1(rng.uniform(0.5, 2.0, 4), gamma_a, gamma_a + rng.uniform(0.05, 2.0), potentials=pots)
    else:
        g = build_gamma2(rng.uniform(0.5, 2.0, 5))
    if rng.random() < 0.5:
        g = apply_floquet(g, "B", rng.uniform(-math.pi, math.pi, 3))
    return g


def test_criterion_4_interlacing(report):
    rng = np.random.default_rng(SEED)
    violations, checks = 0, 0
    for _ in range(20):
        g = _random_family_graph(rng)
        v = str(rng.choice([vid for vid, c in g.vertices if not c.is_dirichlet]))
        base = lowest_eigenvalues(g, 7)
        cond = g.condition(v)
        bumps = [with_coupling(g, v, cond.gamma + rng.uniform(0.1, 5.0)), dirichlet_perturbation(g, v)]
        for hat in bumps:
            up = lowest_eigenvalues(hat, 6)
            for k in range(6):
                checks += 1
                if not (base[k] - 1e-9 <= up[k] <= base[k + 1] + 1e-9):
                    violations += 1
    ok = violations == 0
    assert report(4, ok, f"{checks} inequalities over 20 graphs x (coupling increase, Dirichlet), "
                         f"{violations} violations")


def test_criterion_5_cut_ordering(report):
    rng = np.random.default_rng(SEED + 5)
    margins = {"gamma1": [], "gamma2": []}
    for _ in range(20):
        gamma_a = rng.uniform(-1, 1)
        g = build_gamma1(rng.uniform(0.5, 2.0, 4), gamma_a, gamma_a + rng.uniform(0.05, 2.0))
        lb = lowest_eigenvalues(dirichlet_perturbation(g, "B"), 1)[0]
        la = lowest_eigenvalues(dirichlet_perturbation(g, "A"), 1)[0]
        margins["gamma1"].append(la - lb)
        g = build_gamma2(rng.uniform(0.5, 2.0, 5))
        lb = lowest_eigenvalues(dirichlet_perturbation(g, "B"), 1)[0]
        la = lowest_eigenvalues(dirichlet_perturbation(g, "A"), 1)[0]
        margins["gamma2"].append(la - lb)
    m1, m2 = min(margins["gamma1"]), min(margins["gamma2"])
    ok = m1 > 0 and m2 > 0
    assert report(5, ok, f"min margin lambda1(cut A) - lambda1(cut B): {m1:.4g} (20 four-edge), "
                         f"{m2:.4g} (20 tailed)")


def test_criterion_6_oracle_equivalence(report):
    g1 = build_gamma1([1, 1, 1, 1], 0.0, 1.0)
    g2 = build_gamma2([1, 1, 1, 1, 1])
    spec = PerturbSpec(0.02, 0.1, 0.1)
    configs = [g1, g2] + [perturb_graph(g, spec, s) for g, s in ((g1, 1), (g1, 2), (g2, 3), (g2, 4))]
    worst_diff, ratios = 0.0, []
    for g in configs:
        exact = lowest_eigenvalues(g, 6)
        worst_diff = max(worst_diff, float(np.max(np.abs(oracle_eigenvalues(g, 400, 6) - exact))))
        r = richardson_ratios(g, exact, N=200)
        ratios.extend(r[~np.isnan(r)].tolist())
    ok = worst_diff <= 5e-3 and all(3.5 <= r <= 4.5 for r in ratios)
    assert report(6, ok, f"6 configs, max |secular - FD(N=400)| = {worst_diff:.2e}, "
                         f"Richardson ratios in [{min(ratios):.3f}, {max(ratios):.3f}] ({len(ratios)} values)")


def test_criterion_7_polygon_table(report):
    rows = []
    rows.append(classify((1, 1, 1, 4)) is Classification.EMPTY)
    rows.append(classify((1, 1, 1, 3)) is Classification.POINT
                and np.allclose(point_location((1, 1, 1, 3)), (math.pi,) * 3))
    rows.append(classify((1.1, 0.95, 0.9, 1)) is Classification.CURVE and smoothness((1.1, 0.95, 0.9, 1)))
    rows.append(classify((1, 1, 1, 1)) is Classification.CURVE and not smoothness((1, 1, 1, 1))
                and topology((1, 1, 1, 1)) is Topology.THREE_CIRCLES_PAIRWISE)
    residual = max(float(curve_samples(a, 2000).residuals().max()) for a in ((1.1, 0.95, 0.9, 1), (1, 1, 1, 1)))
    ok = all(rows) and residual <= 1e-10
    assert report(7, ok, f"table rows {['ok' if r else 'wrong' for r in rows]}, max residual {residual:.2e}")


def test_criterion_8_quantitative_condition(report):
    root, residual = rho0()
    rng = np.random.default_rng(SEED + 8)
    tested = counterexamples = 0
    while tested < 50:
        ell = rng.uniform(0.5, 2.0, 4)
        l0 = rng.uniform(0.5, 3.0)
        if not min(root * ell.min(), l0) >= ell.max():
            continue
        q = quant_condition([l0, *ell])
        tested += 1
        counterexamples += int(q.counterexample or not q.hypothesis)
    ok = (residual <= 1e-12 and 2.84 < root < 2.85 and abs(root - rho0_roots()) <= 1e-12
          and counterexamples == 0)
    assert report(8, ok, f"rho0 = {root:.15g} (residual {residual:.1e}), 50 tuples, "
                         f"{counterexamples} counterexamples")


def test_criterion_9_discrete_diamond(report):
    rng = np.random.default_rng(SEED + 9)
    sum_exact = True
    worst_on, worst_ref, min_off_split = 0.0, 0.0, math.inf
    for d in (2, 3):
        for k in rng.uniform(-math.pi, math.pi, size=(500, d)):
            lo, hi = discrete_diamond_bands(d, k)
            sum_exact &= lo + hi == 2 * (d + 1)
            worst_ref = max(worst_ref, float(np.max(np.abs(np.array([lo, hi]) - diamond_eigs(d, k)))))
            w = abs(1 + np.sum(np.exp(1j * k)))
            if w > 1e-6:
                min_off_split = min(min_off_split, (hi - lo) / w)
        for k in closure_samples(np.ones(d + 1), m=300, seed=d):
            lo, hi = discrete_diamond_bands(d, k)
            worst_on = max(worst_on, hi - lo)
    ok = sum_exact and worst_on <= 1e-10 and worst_ref <= 1e-12 and min_off_split > 0
    assert report(9, ok, f"sum exact: {sum_exact}, max split on closure set {worst_on:.1e}, "
                         f"off the set split/|w| >= {min_off_split:.3f}, vs eigvalsh {worst_ref:.1e}")
