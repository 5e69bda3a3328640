"""Secular function, torus function and closed-form oracle tests."""

import math

import numpy as np
import pytest

import graphspectra as gs
from graphspectra import corpus
from graphspectra.errors import NonpositiveK, RobinNotSupportedOnTorus
from graphspectra.secular import (
    assemble_secular_system,
    bond_scattering,
    mandarin3_closed_form,
    secular_value,
    secular_values,
    star3_dirichlet_closed_form,
    star3_neumann_closed_form,
    torus_gradient,
    torus_value,
    torus_values,
    vertex_scattering,
)

RNG = np.random.default_rng(20240817)


def test_vertex_scattering_nk_degree2():
    s = vertex_scattering(gs.nk(), 2, 1.0)
    assert np.allclose(s, [[0, 1], [1, 0]])


def test_vertex_scattering_dirichlet():
    s = vertex_scattering(gs.dirichlet(), 1, 2.3)
    assert np.allclose(s, [[-1.0]])


def test_vertex_scattering_robin_value():
    # 2/(1+i) - 1 = -i at alpha=1, degree 1, k=1
    s = vertex_scattering(gs.delta(1.0), 1, 1.0)
    assert abs(s[0, 0] - (-1j)) < 1e-14
    assert abs(abs(s[0, 0]) - 1.0) < 1e-14


def test_vertex_scattering_unitary_random():
    for _ in range(20):
        d = int(RNG.integers(1, 6))
        alpha = float(RNG.normal() * 3)
        k = float(RNG.uniform(0.1, 8.0))
        s = vertex_scattering(gs.delta(alpha), d, k)
        assert np.linalg.norm(s @ s.conj().T - np.eye(d)) < 1e-12


def test_vertex_scattering_k_guard():
    with pytest.raises(NonpositiveK):
        vertex_scattering(gs.nk(), 2, 0.0)


def test_bond_matrix_interval_dirichlet():
    S = bond_scattering(corpus.interval_dirichlet())
    assert np.allclose(S, [[0, -1], [-1, 0]])


def test_bond_matrix_unitary_all_corpus():
    for name, g in corpus.acceptance_corpus().items():
        for k in (0.7, 3.1):
            S = bond_scattering(g, k)
            n = S.shape[0]
            assert np.linalg.norm(S @ S.conj().T - np.eye(n)) < 1e-12, name


def test_bond_matrix_k_independent_for_nk_dirichlet():
    g = corpus.star3()
    assert np.allclose(bond_scattering(g, 0.5), bond_scattering(g, 7.3))


def test_bond_matrix_k_dependent_for_robin():
    g = corpus.impure_loop()
    assert not np.allclose(bond_scattering(g, 0.5), bond_scattering(g, 7.3))


def test_secular_zeros_dirichlet_interval():
    g = corpus.interval_dirichlet(math.pi)
    for k in (1.0, 2.0, 3.0):
        assert abs(secular_value(g, k)) < 1e-9
    assert abs(secular_value(g, 2.5)) > 0.1


def test_secular_nonzero_off_spectrum_circle():
    g = corpus.circle(2 * math.pi)
    assert abs(secular_value(g, 0.5)) > 0.1
    assert abs(secular_value(g, 1.0)) < 1e-9


def test_secular_zero_figure8_pinched_family():
    g = corpus.figure8()
    k = 1.0 / (1.0 + math.sqrt(2.0))
    assert abs(secular_value(g, k)) < 1e-9


def test_secular_reality_over_scan():
    ks = np.linspace(0.05, 30.0, 700)
    for name, g in corpus.acceptance_corpus().items():
        S = bond_scattering(g)
        C = 1j ** gs.secular._calibration_power(g)
        lb = np.repeat(g.lengths, 2)
        ph = np.exp(0.5j * ks[:, None] * lb)
        M = (1.0 / ph)[:, :, None] * np.eye(len(lb)) - ph[:, :, None] * S
        vals = C * np.linalg.det(M)
        rel = np.abs(vals.imag) / (1.0 + np.abs(vals))
        assert rel.max() < 1e-10, name


def test_defining_identity_random_k():
    for g in (corpus.star3(), corpus.mandarin3(), corpus.figure8()):
        ks = RNG.uniform(0.1, 25.0, 50)
        F = secular_values(g, ks)
        phi = torus_values(g, np.mod(np.outer(ks, g.lengths), 2 * math.pi))
        assert np.max(np.abs(F - phi) / (1.0 + np.abs(F))) < 1e-9


def test_torus_periodicity():
    g = corpus.star3()
    p = RNG.uniform(0, 2 * math.pi, 3)
    for j in range(3):
        q = p.copy()
        q[j] += 2 * math.pi
        assert torus_value(g, q) == pytest.approx(torus_value(g, p), rel=1e-12, abs=1e-12)


def test_torus_refused_for_robin():
    with pytest.raises(RobinNotSupportedOnTorus):
        torus_value(corpus.impure_loop(), [1.0, 1.0])


def test_star_closed_form_values():
    assert star3_dirichlet_closed_form((math.pi / 2,) * 3) == pytest.approx(0.0, abs=1e-15)
    assert star3_dirichlet_closed_form((math.pi / 2, math.pi / 2, 0.0)) == pytest.approx(1.0)
    assert star3_dirichlet_closed_form((0.0, 0.0, 0.0)) == 0.0
    assert star3_neumann_closed_form((math.pi / 2,) * 3) == pytest.approx(0.0, abs=1e-15)
    assert star3_neumann_closed_form((0.0, 0.0, math.pi / 2)) == pytest.approx(1.0)


def test_neumann_shift_identity():
    pts = RNG.uniform(0, 2 * math.pi, (200, 3))
    for p in pts:
        lhs = star3_neumann_closed_form(p)
        rhs = star3_dirichlet_closed_form(p - math.pi / 2)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_mandarin_closed_form_values():
    assert mandarin3_closed_form((math.pi,) * 3) == pytest.approx(0.0, abs=1e-15)
    p = RNG.uniform(0, 2 * math.pi, 3)
    assert mandarin3_closed_form(p) == pytest.approx(
        star3_dirichlet_closed_form(p / 2) * star3_neumann_closed_form(p / 2)
    )


def test_star_determinant_proportional_to_closed_form():
    g = corpus.star3()
    pts = RNG.uniform(0, 2 * math.pi, (100, 3))
    det_vals = torus_values(g, pts)
    cf = np.array([star3_dirichlet_closed_form(p) for p in pts])
    c = float(np.dot(det_vals, cf) / np.dot(cf, cf))
    resid = np.abs(det_vals - c * cf)
    assert resid.max() <= 1e-8 * max(1.0, np.abs(det_vals).max())


def test_torus_zero_at_3star_dirichlet_halfpi():
    g = corpus.star3()
    assert abs(torus_value(g, (math.pi / 2,) * 3)) < 1e-12
    # (pi/2, pi/2, 0) is proportional to the closed-form value 1, hence nonzero
    assert abs(torus_value(g, (math.pi / 2, math.pi / 2, 0.0))) > 0.1


def test_gradient_single_signed_at_smooth_zeros():
    g = corpus.star3((1.0, 1.23, 1.57))
    records = gs.scan_spectrum(g, 6.0)
    checked = 0
    for r in records:
        if r.lam <= 0 or r.multiplicity != 1:
            continue
        kap = np.mod(r.k * g.lengths, 2 * math.pi)
        grad = torus_gradient(g, kap)
        strong = grad[np.abs(grad) > 1e-8]
        if len(strong):
            assert (strong > 0).all() or (strong < 0).all()
            checked += 1
    assert checked >= 5


def test_secular_system_unitary_and_real():
    sys = assemble_secular_system(corpus.mandarin3(), 2.0)
    n = sys.S.shape[0]
    assert np.linalg.norm(sys.S @ sys.S.conj().T - np.eye(n)) < 1e-12
    assert sys.k_independent
    assert np.abs(sys.S.imag).max() < 1e-14


def test_secular_value_complex_for_robin():
    v = secular_value(corpus.impure_loop(), 1.3)
    assert isinstance(v, complex)
