"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one PASS/FAIL line in the pytest terminal summary (see
conftest).  Numbers and tolerances are pinned here, not configurable.
"""

import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

import graphspectra as gs
from graphspectra import corpus
from graphspectra.eigenmode import (
    LOOP_SUPPORTED,
    classify_support,
    eigenfunctions_at,
    vertex_values,
)
from graphspectra.genericity import (
    genericity_report,
    randomized_genericity_trial,
    trace_theta_path,
    verify_interlacing,
)
from graphspectra.manifold import (
    connected_components,
    sample_field,
    two_coloring_consistent,
)
from graphspectra.secular import (
    mandarin3_closed_form,
    star3_dirichlet_closed_form,
    star3_neumann_closed_form,
    torus_values,
)
from graphspectra.spectral import ScanOptions, eigenvalue_list, scan_spectrum, scan_up_to_count

TWO_PI = 2.0 * math.pi


def test_criterion_01_circle_spectrum():
    t0 = time.time()
    records = scan_spectrum(corpus.circle(TWO_PI), 5.5)
    elapsed = time.time() - t0
    expected = [(0.0, 1), (1.0, 2), (2.0, 2), (3.0, 2), (4.0, 2), (5.0, 2)]
    assert len(records) == len(expected)
    for r, (k_exact, mult) in zip(records, expected):
        assert abs(r.k - k_exact) <= 1e-9
        assert r.multiplicity == mult
    lams = eigenvalue_list(records)
    assert np.allclose(lams, [0, 1, 1, 4, 4, 9, 9, 16, 16, 25, 25], atol=1e-8)
    assert elapsed <= 1.0


def test_criterion_02_figure8_families():
    t0 = time.time()
    g = corpus.figure8(TWO_PI, TWO_PI * math.sqrt(2.0))
    records = scan_spectrum(g, 3.0)
    sq2 = math.sqrt(2.0)
    families = [0.0]
    for n in range(1, 60):
        families += [float(n * n), n * n / 2.0, n * n / (1.0 + sq2) ** 2]
    for r in records:
        assert min(abs(r.lam - f) for f in families) <= 1e-9
        assert r.multiplicity == 1
    rep = genericity_report(corpus.figure8(TWO_PI, TWO_PI), 5)
    assert not rep.verdict_simple
    assert time.time() - t0 <= 2.0


def test_criterion_03_impure_loop_case_equations():
    g = corpus.impure_loop(TWO_PI, 1.0)
    records = scan_spectrum(g, 4.5)
    found = sorted(r.k for r in records if r.lam > 0)

    def even_eq(k):
        return 2.0 * k * math.sin(math.pi * k) - math.cos(math.pi * k)

    grid = np.linspace(1e-4, 4.5, 9000)
    vals = np.array([even_eq(x) for x in grid])
    even_roots = [
        brentq(even_eq, grid[i], grid[i + 1], xtol=1e-14)
        for i in range(len(grid) - 1)
        if vals[i] * vals[i + 1] < 0
    ]
    odd_roots = [float(n) for n in range(1, 5)]
    oracle = sorted(odd_roots + even_roots)
    assert len(found) == len(oracle)
    for a, b in zip(found, oracle):
        assert abs(a - b) <= 1e-9
    # the two families never collide
    assert min(abs(a - b) for a in odd_roots for b in even_roots) > 1e-3


def test_criterion_04_interlacing():
    t0 = time.time()
    finite_pairs = [
        (-2.0, -1.0), (-1.0, 0.0), (0.0, 1.0), (1.0, 2.0), (2.0, 5.0),
        (-0.5, 0.5), (0.5, 1.5), (1.0, 0.0), (-1.5, 3.0),
    ]
    cases = [
        (corpus.interval_nk(math.pi), "v", finite_pairs + [(0.0, math.inf)]),
        (corpus.star3(leaves="nk"), "v1", finite_pairs + [(0.0, math.inf)]),
        (corpus.figure8(), "c", finite_pairs + [(0.25, 0.75)]),
    ]
    for g, vid, pairs in cases:
        assert len(pairs) == 10
        reports = verify_interlacing(g, vid, pairs, n_eigs=20)
        for rep in reports:
            assert rep.margin >= -1e-9, (vid, rep.alpha, rep.alpha_prime, rep.margin)
            assert rep.strict_violations == ()
            if rep.strict_checked:
                assert rep.strict_margin > 0.0
    assert time.time() - t0 <= 30.0


def test_criterion_05_method_agreement_and_weyl():
    for name, g in corpus.acceptance_corpus().items():
        direct = scan_spectrum(g, 10.0)  # raises WeylCountMismatch on failure
        secular = scan_spectrum(
            g, 10.0, ScanOptions(matrix="secular", include_nonpositive=False)
        )
        kd = [(r.k, r.multiplicity) for r in direct if r.k >= 0.1]
        ks = [(r.k, r.multiplicity) for r in secular if r.k >= 0.1]
        assert len(kd) == len(ks), name
        for (ka, ma), (kb, mb) in zip(kd, ks):
            assert abs(ka - kb) <= 1e-9, name
            assert ma == mb, name


def test_criterion_06_loop_state_detection():
    g = corpus.lollipop(TWO_PI, 1.3)
    tail = g.edge_index("tail")
    base_ks = {}
    for n in (1, 2, 3):
        rec = next(r for r in scan_spectrum(g, 3.5) if abs(r.lam - n * n) < 1e-6)
        base_ks[n] = rec.k
        states = [
            f for f in eigenfunctions_at(g, rec)
            if classify_support(g, f).kind == LOOP_SUPPORTED
        ]
        assert len(states) == 1
        f = states[0]
        assert np.abs(f.coefficients[tail]).max() <= 1e-8
        assert abs(vertex_values(f)["a"]) <= 1e-8
    g2 = corpus.lollipop(TWO_PI, 1.4)  # pendant perturbed by 0.1
    for n in (1, 2, 3):
        rec2 = next(r for r in scan_spectrum(g2, 3.5) if abs(r.lam - n * n) < 1e-6)
        assert abs(rec2.k - base_ks[n]) <= 1e-9


def test_criterion_07_genericity_property_suite():
    t0 = time.time()
    star = corpus.star3((1.0, 1.0, 1.0))
    tail = corpus.cycle_with_tail((1.0, 1.0, 1.0), 1.0)
    for g in (star, tail):
        summary = randomized_genericity_trial(g, 100, 0.05, 12, seed=20240817)
        assert summary.pass_fraction == 1.0
    assert time.time() - t0 <= 120.0


def test_criterion_08_star_closed_form():
    rng = np.random.default_rng(8)
    g = corpus.star3()
    pts = rng.uniform(0.0, TWO_PI, (1000, 3))
    det_vals = torus_values(g, pts)
    cf = np.array([star3_dirichlet_closed_form(p) for p in pts])
    c = float(np.dot(det_vals, cf) / np.dot(cf, cf))
    resid = np.abs(det_vals - c * cf).max()
    assert resid <= 1e-8 * max(1.0, np.abs(det_vals).max())
    for p in pts[:200]:
        lhs = star3_neumann_closed_form(p)
        rhs = star3_dirichlet_closed_form(p - math.pi / 2.0)
        assert abs(lhs - rhs) <= 1e-10


def test_criterion_09_mandarin_factorization():
    rng = np.random.default_rng(9)
    g = corpus.mandarin3()
    pts = rng.uniform(0.0, TWO_PI, (1000, 3))
    det_vals = torus_values(g, pts)
    cf = np.array([mandarin3_closed_form(p) for p in pts])
    c = float(np.dot(det_vals, cf) / np.dot(cf, cf))
    resid = np.abs(det_vals - c * cf).max()
    assert resid <= 1e-8 * max(1.0, np.abs(det_vals).max())


def test_criterion_10_two_components():
    t192 = 0.0
    for g in (corpus.star3(), corpus.mandarin3()):
        for res in (96, 128, 192):
            t0 = time.time()
            fld = sample_field(g, res)
            connected_components(fld)
            if res == 192:
                t192 += time.time() - t0
            assert fld.n_components == 2, (res, fld.n_components)
            consistent, bad = two_coloring_consistent(fld)
            assert consistent, f"{bad} smooth cells disagree at res {res}"
    assert t192 <= 120.0


def test_criterion_11_theta_path_index_shift():
    g = corpus.star3((1.0, 1.23, 1.57))
    path = trace_theta_path(g, "v1", 4, 2)
    positives = [r.lam for r in scan_spectrum(g, 4.5) if r.lam > 0]
    assert path.samples[-1].lam == pytest.approx(positives[1], rel=1e-8)
    assert path.max_phi_residual <= 1e-7
