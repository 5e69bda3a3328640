"""Eigenfunction reconstruction, evaluation and support classification."""

import math

import numpy as np
import pytest

import graphspectra as gs
from graphspectra import corpus
from graphspectra.eigenmode import (
    LOOP_SUPPORTED,
    NONVANISHING,
    VANISHES,
    classify_support,
    eigenfunctions_at,
    evaluate,
    l2_inner,
    sample_on_edges,
    vertex_condition_residuals,
    vertex_values,
)
from graphspectra.errors import CoordinateOutOfRange, NullSpaceDimensionMismatch
from graphspectra.spectral import EigenvalueRecord, direct_matrix, scan_spectrum, scan_up_to_count


def first_record_at(g, lam_target, k_max, tol=1e-6):
    for r in scan_spectrum(g, k_max):
        if abs(r.lam - lam_target) < tol:
            return r
    raise AssertionError(f"no eigenvalue near {lam_target}")


def test_circle_double_eigenspace():
    g = corpus.circle(2 * math.pi)
    rec = first_record_at(g, 1.0, 1.5)
    fs = eigenfunctions_at(g, rec)
    assert len(fs) == 2
    # gram close to identity
    for i in range(2):
        for j in range(2):
            ip = l2_inner(g, 1.0, fs[i].coefficients, fs[j].coefficients)
            assert ip == pytest.approx(1.0 if i == j else 0.0, abs=1e-8)
    kinds = sorted(classify_support(g, f).kind for f in fs)
    assert kinds == [LOOP_SUPPORTED, NONVANISHING]


def test_dirichlet_interval_mode_sign_convention():
    g = corpus.interval_dirichlet(math.pi)
    rec = first_record_at(g, 4.0, 2.5)
    (f,) = eigenfunctions_at(g, rec)
    # + sqrt(2/pi) sin(2x): first coefficient of the first edge above
    # threshold is the sine coefficient, made positive
    assert evaluate(f, "e", math.pi / 4) == pytest.approx(math.sqrt(2 / math.pi), abs=1e-9)
    assert evaluate(f, "e", 0.0) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(CoordinateOutOfRange):
        evaluate(f, "e", 4.0)


def test_lollipop_loop_states():
    g = corpus.lollipop(2 * math.pi, 1.3)
    tail_idx = g.edge_index("tail")
    for n in (1, 2, 3):
        rec = first_record_at(g, float(n * n), 3.5)
        fs = eigenfunctions_at(g, rec)
        loopstates = [f for f in fs if classify_support(g, f).kind == LOOP_SUPPORTED]
        assert len(loopstates) == 1
        f = loopstates[0]
        assert np.abs(f.coefficients[tail_idx]).max() <= 1e-8
        assert abs(evaluate(f, "loop", 0.0)) <= 1e-8
        assert abs(vertex_values(f)["a"]) <= 1e-8


def test_continuity_at_shared_vertex():
    g = gs.build_graph({
        "vertices": [("u", gs.dirichlet()), ("m", gs.nk()), ("v", gs.dirichlet())],
        "edges": [("e1", "u", "m", 1.0), ("e2", "m", "v", 1.4)],
    })
    records = scan_up_to_count(g, 4)
    for r in records[:4]:
        for f in eigenfunctions_at(g, r):
            v_via_e1 = evaluate(f, "e1", 1.0)
            v_via_e2 = evaluate(f, "e2", 0.0)
            assert v_via_e1 == pytest.approx(v_via_e2, abs=1e-8)


def test_vertex_condition_residuals_small():
    for g in (corpus.star3(), corpus.lollipop(), corpus.impure_loop()):
        for r in scan_up_to_count(g, 6)[:6]:
            for f in eigenfunctions_at(g, r):
                res = vertex_condition_residuals(f)
                assert max(res.values()) <= 1e-8 * (1 + f.k)


def test_constant_ground_state_values():
    g = corpus.star3(leaves="nk")  # all NK: ground state is the constant
    rec = scan_spectrum(g, 1.0)[0]
    assert rec.lam == pytest.approx(0.0, abs=1e-12)
    (f,) = eigenfunctions_at(g, rec)
    t = g.total_length
    for vid, val in vertex_values(f).items():
        assert abs(val) == pytest.approx(1 / math.sqrt(t), abs=1e-9)
    assert classify_support(g, f).kind == NONVANISHING


def test_dirichlet_leaf_always_zero():
    g = corpus.star3()
    rec = scan_up_to_count(g, 1)[0]
    (f,) = eigenfunctions_at(g, rec)
    vals = vertex_values(f)
    for leaf in ("v1", "v2", "v3"):
        assert abs(vals[leaf]) < 1e-9
    # Dirichlet zeros are exempt: generic lengths give a nonvanishing verdict
    assert classify_support(g, f).kind == NONVANISHING


def test_equilateral_star_antisymmetric_modes_vanish_at_center():
    g = corpus.star3((1.0, 1.0, 1.0))
    rec = first_record_at(g, math.pi**2, 4.0)
    assert rec.multiplicity == 2
    fs = eigenfunctions_at(g, rec)
    for f in fs:
        cl = classify_support(g, f)
        assert cl.kind == VANISHES
        assert cl.vanishing_vertices == ("c",)


def test_orthonormality_across_corpus():
    for name, g in corpus.acceptance_corpus().items():
        records = scan_up_to_count(g, 6)
        funcs = []
        for r in records:
            funcs.extend(eigenfunctions_at(g, r))
            if len(funcs) >= 6:
                break
        for i, fi in enumerate(funcs):
            for j, fj in enumerate(funcs):
                if fi.lam != fj.lam:
                    continue  # cross-eigenvalue orthogonality is automatic
                ip = l2_inner(g, fi.lam, fi.coefficients, fj.coefficients)
                assert ip == pytest.approx(1.0 if i == j else 0.0, abs=1e-8), name


def test_loop_state_uniqueness_per_loop():
    g = corpus.figure8()
    rec = first_record_at(g, 1.0, 1.5)  # loop 1 family n=1
    fs = eigenfunctions_at(g, rec)
    states = [classify_support(g, f) for f in fs]
    loops = [s.loop.edge_chain for s in states if s.kind == LOOP_SUPPORTED]
    assert len(loops) == len(set(loops)) == 1


def test_flip_symmetrization_stays_in_eigenspace():
    g = corpus.lollipop(2 * math.pi, 1.3)
    rec = [r for r in scan_spectrum(g, 2.5) if r.lam > 0.2][0]
    (f,) = eigenfunctions_at(g, rec)
    k, l = f.k, 2 * math.pi
    j = g.edge_index("loop")
    a, b = f.coefficients[j]
    flipped = f.coefficients.copy()
    flipped[j] = (
        a * math.cos(k * l) + b * math.sin(k * l),
        a * math.sin(k * l) - b * math.cos(k * l),
    )
    sym = (f.coefficients + flipped) / 2.0
    H = direct_matrix(g, rec.lam)
    resid = np.linalg.norm(H @ sym.reshape(-1))
    assert resid < 1e-8 * max(1.0, np.linalg.norm(sym))


def test_nullspace_dimension_mismatch():
    g = corpus.interval_dirichlet(math.pi)
    bogus = EigenvalueRecord(lam=4.0, k=2.0, multiplicity=3, index_start=0, residual=0.0)
    with pytest.raises(NullSpaceDimensionMismatch):
        eigenfunctions_at(g, bogus)


def test_sample_rows():
    g = corpus.interval_dirichlet(math.pi)
    rec = first_record_at(g, 1.0, 1.5)
    (f,) = eigenfunctions_at(g, rec)
    rows = sample_on_edges(f, 11)
    assert len(rows) == 11
    eid, x, val = rows[5]
    assert eid == "e" and x == pytest.approx(math.pi / 2)
    assert abs(val) == pytest.approx(math.sqrt(2 / math.pi), abs=1e-9)
