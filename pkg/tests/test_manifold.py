"""Torus-field sampling, classification, components and exports."""

import math

import numpy as np
import pytest

import graphspectra as gs
from graphspectra import corpus
from graphspectra.errors import (
    DimensionNot3,
    DimensionTooLarge,
    ResolutionTooSmall,
    RobinNotSupportedOnTorus,
)
from graphspectra.manifold import (
    TorusField,
    classify_points,
    connected_components,
    export_field,
    export_mesh,
    gradient_sign_labels,
    sample_field,
    two_coloring_consistent,
)
from graphspectra.spectral import scan_spectrum


def cell_of(fld, point):
    return tuple(int(x // fld.cell_size) % fld.resolution for x in point)


def test_sample_guards():
    with pytest.raises(ResolutionTooSmall):
        sample_field(corpus.star3(), 8)
    with pytest.raises(RobinNotSupportedOnTorus):
        sample_field(corpus.impure_loop(), 32)
    star5 = gs.build_graph({
        "vertices": [("c", gs.nk())] + [(f"v{i}", gs.dirichlet()) for i in range(5)],
        "edges": [(f"e{i}", "c", f"v{i}", 1.0 + 0.1 * i) for i in range(5)],
    })
    with pytest.raises(DimensionTooLarge):
        sample_field(star5, 16)


def test_sampled_values_match_pointwise():
    g = corpus.star3()
    fld = sample_field(g, 16)
    from graphspectra.secular import torus_value

    h = fld.cell_size
    for idx in [(0, 0, 0), (3, 7, 11), (15, 1, 8)]:
        kap = [i * h for i in idx]
        assert fld.values[idx] == pytest.approx(torus_value(g, kap), rel=1e-12, abs=1e-12)


def test_classification_star_known_points():
    g = corpus.star3()
    fld = sample_field(g, 64)
    classify_points(fld)
    # (pi, pi, pi) is a conical point: the cells around it are singular
    c = cell_of(fld, (math.pi - 1e-9, math.pi - 1e-9, math.pi - 1e-9))
    neighborhood = [
        tuple((c[d] + o[d]) % fld.resolution for d in range(3))
        for o in [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)]
    ]
    assert any(fld.singular[n] for n in neighborhood)
    # (pi/2, pi/2, pi/2) lies on a smooth sheet
    s = cell_of(fld, (math.pi / 2, math.pi / 2, math.pi / 2))
    assert fld.zero_cells[s]
    assert not fld.singular[s]


def test_components_star_and_mandarin_at_64():
    for g in (corpus.star3(), corpus.mandarin3()):
        fld = sample_field(g, 64)
        connected_components(fld)
        assert fld.n_components == 2
        ok, bad = two_coloring_consistent(fld)
        assert ok, f"{bad} cells break the two-coloring"


def test_component_signs_opposite():
    fld = sample_field(corpus.star3(), 64)
    connected_components(fld)
    signs = gradient_sign_labels(fld)
    s1 = signs[fld.labels == 1]
    s2 = signs[fld.labels == 2]
    assert set(np.unique(s1)) == {1} or set(np.unique(s1)) == {-1}
    assert set(np.unique(s2)) != set(np.unique(s1))


def test_interval_field_degenerate_dimension():
    g = corpus.interval_dirichlet(math.pi)
    fld = sample_field(g, 64)
    connected_components(fld)
    assert fld.degenerate_dimension
    # zero set of the one-variable secular function is a finite point set
    assert 0 < int(fld.zero_cells.sum()) <= 6


def test_figure8_two_axis_field():
    g = corpus.figure8()
    fld = sample_field(g, 48)
    connected_components(fld)
    assert fld.values.shape == (48, 48)
    assert int(fld.zero_cells.sum()) > 0
    assert fld.n_components >= 1


def test_eigenvalue_rays_land_in_zero_cells_with_alternating_signs():
    g = corpus.star3((1.0, 1.23, 1.57))  # rationally independent in practice
    fld = sample_field(g, 64)
    connected_components(fld)
    signs = gradient_sign_labels(fld)
    records = [r for r in scan_spectrum(g, 6.0) if r.lam > 0]
    parities = {}
    for n, r in enumerate(records):
        kap = np.mod(r.k * g.lengths, 2 * math.pi)
        c = cell_of(fld, kap)
        assert fld.zero_cells[c]
        if fld.labels[c] > 0:
            parities.setdefault(n % 2, set()).add(int(signs[c]))
    # odd and even eigenvalue indices map to opposite gradient signs
    if 0 in parities and 1 in parities:
        assert parities[0].isdisjoint(parities[1])


def test_export_mesh_and_groups(tmp_path):
    fld = sample_field(corpus.star3(), 32)
    connected_components(fld)
    path = tmp_path / "star.mesh"
    export_mesh(fld, path)
    lines = path.read_text().splitlines()
    nv = sum(1 for l in lines if l.startswith("v "))
    nf = sum(1 for l in lines if l.startswith("f "))
    ng = sum(1 for l in lines if l.startswith("g "))
    assert nv > 1000 and nf > 500 and ng >= 2
    # face indices are valid 1-based vertex references
    max_ref = max(
        int(tok) for l in lines if l.startswith("f ") for tok in l.split()[1:]
    )
    assert max_ref <= nv


def test_export_mesh_needs_three_axes(tmp_path):
    fld = sample_field(corpus.figure8(), 32)
    with pytest.raises(DimensionNot3):
        export_mesh(fld, tmp_path / "no.mesh")


def test_export_empty_mesh_for_constant_sign_field(tmp_path):
    g = corpus.star3()
    fld = TorusField(g, 16, np.ones((16, 16, 16)))
    connected_components(fld)
    path = tmp_path / "empty.mesh"
    export_mesh(fld, path)
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    assert all(not l.startswith(("v ", "f ")) for l in lines)


def test_export_field_rows(tmp_path):
    g = corpus.figure8()
    fld = sample_field(g, 16)
    path = tmp_path / "field.tsv"
    export_field(fld, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "kappa_1\tkappa_2\tphi"
    assert len(lines) == 1 + 16 * 16
    k1, k2, phi = lines[1].split("\t")
    assert float(k1) == 0.0 and float(k2) == 0.0
    from graphspectra.secular import torus_value

    assert float(phi) == pytest.approx(torus_value(g, (0.0, 0.0)), abs=1e-9)


def test_multiplicity_crosscheck_singular_cells():
    from graphspectra.manifold import multiplicity_crosscheck

    for g in (corpus.star3(), corpus.mandarin3()):
        fld = sample_field(g, 64)
        checked, confirmed = multiplicity_crosscheck(fld, 6)
        assert checked == 6
        assert confirmed == checked


def test_resolution_stability_small():
    counts = set()
    for res in (64, 96):
        fld = sample_field(corpus.star3(), res)
        connected_components(fld)
        counts.add(fld.n_components)
    assert counts == {2}
