import dataclasses

import numpy as np
import pytest

import grovertails as gt
from grovertails.dynamics import DriveConfig, inflow_source
from grovertails.errors import (
    AmbiguousClassification,
    ConstructionFailed,
    JordanBlockOnCircle,
    SpanMismatch,
    UnstableEigenvalueFound,
)
from grovertails.spectral import (
    alternating_basis,
    center_basis,
    center_span_report,
    check_center_span,
    circulation_basis,
    eigen_classify,
    interior_mode_basis,
    spectrum_csv,
    stable_pencil_residual,
)

from conftest import C3_UNIT_EIGENVECTOR, make_walk, sampled_pairs


def test_triangle_center_is_plus_one(c3):
    decomp = eigen_classify(c3.ops)
    assert decomp.center_dim == 1
    lam = decomp.center_values[0]
    assert abs(lam - 1.0) < 1e-10
    vector = decomp.center_vectors[:, 0]
    # proportional to the known alternating arc vector
    reference = C3_UNIT_EIGENVECTOR / np.linalg.norm(C3_UNIT_EIGENVECTOR)
    overlap = reference @ vector
    assert np.max(np.abs(vector - overlap * reference)) < 1e-10


def test_single_edge_all_zero_spectrum(p2):
    decomp = eigen_classify(p2.ops)
    assert decomp.center_dim == 0
    assert np.allclose(decomp.eigenvalues, 0.0)


def test_path_center_empty_radius_below_one():
    walk = make_walk(gt.parse_edge_list("0 1\n1 2"), [0, 2])
    decomp = eigen_classify(walk.ops)
    assert decomp.center_dim == 0
    assert decomp.max_modulus < 1.0


def test_unstable_guard():
    walk = make_walk(gt.parse_edge_list("0 1"), [0, 1])
    bad = dataclasses.replace(walk.ops, internal_step=1.5 * np.eye(2, dtype=complex))
    with pytest.raises(UnstableEigenvalueFound):
        eigen_classify(bad)


def test_jordan_guard():
    walk = make_walk(gt.parse_edge_list("0 1"), [0, 1])
    jordan = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)
    bad = dataclasses.replace(walk.ops, internal_step=jordan)
    with pytest.raises(JordanBlockOnCircle):
        eigen_classify(bad)


def test_annulus_guard():
    walk = make_walk(gt.parse_edge_list("0 1"), [0, 1])
    nearly = (1 - 1e-7) * np.eye(2, dtype=complex)
    bad = dataclasses.replace(walk.ops, internal_step=nearly)
    with pytest.raises(AmbiguousClassification):
        eigen_classify(bad)


def test_eps_validation(c3):
    with pytest.raises(ValueError):
        eigen_classify(c3.ops, eps=1e-3)
    with pytest.raises(ValueError):
        eigen_classify(c3.ops, eps=1e-8, guard=1e-9)


# ---------------------------------------------------------------------------
# circulation vectors (+1)


def test_triangle_circulation(c3):
    vectors = circulation_basis(c3.cycles, c3.arcs)
    assert len(vectors) == 1
    w = vectors[0]
    assert set(np.round(w.real, 12)) == {1.0, -1.0}
    assert np.max(np.abs(c3.ops.internal_step @ w - w)) < 1e-12


def test_tree_has_no_circulations():
    walk = make_walk(gt.parse_edge_list("0 1\n1 2\n1 3"), [0, 3])
    assert circulation_basis(walk.cycles, walk.arcs) == []


def test_square_circulation():
    walk = make_walk(gt.parse_edge_list("0 1\n1 2\n2 3\n0 3"), [0, 2])
    vectors = circulation_basis(walk.cycles, walk.arcs)
    assert len(vectors) == 1
    assert np.max(np.abs(walk.ops.internal_step @ vectors[0] - vectors[0])) < 1e-12


# ---------------------------------------------------------------------------
# alternating vectors (-1)


def test_triangle_has_no_alternating_vector(c3):
    assert alternating_basis(c3.cycles, c3.arcs, c3.graph, c3.ops.internal_step) == []


def test_square_alternating_vector():
    walk = make_walk(gt.parse_edge_list("0 1\n1 2\n2 3\n0 3"), [0, 2])
    vectors = alternating_basis(walk.cycles, walk.arcs, walk.graph, walk.ops.internal_step)
    assert len(vectors) == 1
    w = vectors[0]
    assert np.max(np.abs(w - w[walk.arcs.reversal])) < 1e-15  # reversal symmetric
    assert np.max(np.abs(walk.ops.internal_step @ w + w)) < 1e-12


def test_two_triangles_sharing_vertex_pair_vector():
    walk = make_walk(
        gt.parse_edge_list("0 1\n1 2\n0 2\n2 3\n3 4\n2 4"), [0, 4]
    )
    vectors = alternating_basis(walk.cycles, walk.arcs, walk.graph, walk.ops.internal_step)
    assert len(vectors) == 1
    assert np.max(np.abs(walk.ops.internal_step @ vectors[0] + vectors[0])) < 1e-10


def test_disjoint_triangles_pair_vector_doubles_connector():
    walk = make_walk(
        gt.parse_edge_list("0 1\n1 2\n0 2\n2 3\n3 4\n4 5\n3 5"), [0, 5]
    )
    vectors = alternating_basis(walk.cycles, walk.arcs, walk.graph, walk.ops.internal_step)
    assert len(vectors) == 1
    w = vectors[0]
    assert np.max(np.abs(walk.ops.internal_step @ w + w)) < 1e-10
    connector = walk.arcs.index(2, 3)
    assert abs(abs(w[connector]) - 2.0) < 1e-12


def test_alternating_rejects_wrong_vector(c3):
    square = make_walk(gt.parse_edge_list("0 1\n1 2\n2 3\n0 3"), [0, 2])
    with pytest.raises(ConstructionFailed):
        # triangle step cannot negate the square's vector
        alternating_basis(square.cycles, square.arcs, square.graph,
                          np.eye(8, dtype=complex))


# ---------------------------------------------------------------------------
# interior modes


def test_triangle_has_no_interior_modes(c3):
    assert interior_mode_basis(c3.ops) == []


def test_square_opposite_tails_interior_mode():
    walk = make_walk(gt.parse_edge_list("0 1\n1 2\n2 3\n0 3"), [0, 2])
    modes = interior_mode_basis(walk.ops)
    assert len(modes) == 2
    assert np.allclose(sorted([lam for lam, _ in modes], key=lambda z: z.imag), [-1j, 1j])
    for lam, vector in modes:
        assert np.max(np.abs(walk.ops.internal_step @ vector - lam * vector)) < 1e-10


def test_path_has_no_interior_modes():
    walk = make_walk(gt.parse_edge_list("0 1\n1 2\n2 3"), [0, 3])
    assert interior_mode_basis(walk.ops) == []


def test_sigma_per_of_square():
    walk = make_walk(gt.parse_edge_list("0 1\n1 2\n2 3\n0 3"), [0, 2])
    basis = center_basis(walk.ops, walk.cycles)
    assert basis.sigma_per == (0.0,)
    assert basis.dim == 4  # circulation + alternating + two rotating modes


# ---------------------------------------------------------------------------
# span comparison


def test_center_span_triangle(c3):
    decomp = eigen_classify(c3.ops)
    basis = center_basis(c3.ops, c3.cycles)
    report = check_center_span(decomp, basis)
    assert report.ok and report.center_dim == 1


def test_center_span_single_edge(p2):
    decomp = eigen_classify(p2.ops)
    basis = center_basis(p2.ops, p2.cycles)
    report = check_center_span(decomp, basis)
    assert report.ok and report.center_dim == 0


def test_center_span_mismatch_raises(c3):
    decomp = eigen_classify(c3.ops)
    empty = gt.CenterBasis(circulations=(), alternations=(), interior_modes=(), sigma_per=())
    with pytest.raises(SpanMismatch):
        check_center_span(decomp, empty)


def test_center_span_random_pool(graph_pool):
    for gi, g in enumerate(graph_pool[:12]):
        pair = sampled_pairs(g, gi)[0]
        walk = make_walk(g, pair)
        decomp = eigen_classify(walk.ops)
        basis = center_basis(walk.ops, walk.cycles)
        report = center_span_report(decomp, basis)
        assert report.ok, (gi, pair, report)
        assert len(basis.circulations) == g.cycle_count
        evens = sum(1 for c in walk.cycles if not c.odd)
        odds = sum(1 for c in walk.cycles if c.odd)
        assert len(basis.alternations) == evens + max(odds - 1, 0)


def test_center_eigenvectors_satisfy_boundary_kirchhoff(graph_pool):
    for gi, g in enumerate(graph_pool[:12]):
        pair = sampled_pairs(g, gi)[0]
        walk = make_walk(g, pair)
        decomp = eigen_classify(walk.ops)
        for idx in np.nonzero(decomp.center_mask)[0]:
            vector = decomp.eigenvectors[:, idx]
            for u in walk.tg.boundary:
                incoming = sum(vector[a] for a in walk.arcs.arcs_into[u])
                outgoing = sum(vector[a] for a in walk.arcs.arcs_out_of[u])
                assert abs(incoming) < 1e-8 and abs(outgoing) < 1e-8


def test_source_orthogonal_to_center(graph_pool):
    drive = DriveConfig(inflow=(1.0 + 0j, 0j))
    for gi, g in enumerate(graph_pool[:12]):
        pair = sampled_pairs(g, gi)[0]
        walk = make_walk(g, pair)
        basis = center_basis(walk.ops, walk.cycles)
        source = inflow_source(walk.tg, walk.arcs, drive)
        for column in basis.vectors().T:
            unit = column / np.linalg.norm(column)
            assert abs(np.vdot(unit, source)) < 1e-10


def test_center_orthogonal_to_stable(graph_pool):
    for gi, g in enumerate(graph_pool[:12]):
        pair = sampled_pairs(g, gi)[0]
        walk = make_walk(g, pair)
        decomp = eigen_classify(walk.ops)
        if decomp.center_dim == 0:
            continue
        center = decomp.center_vectors
        stable_mask = np.array([c == "stable" for c in decomp.classes])
        clean = stable_mask & (decomp.residuals < 1e-10)
        stable = decomp.eigenvectors[:, clean]
        if stable.size:
            overlaps = np.abs(center.conj().T @ stable)
            assert float(overlaps.max()) < 1e-8


def test_stable_pencil(graph_pool):
    for gi, g in enumerate(graph_pool[:12]):
        pair = sampled_pairs(g, gi)[0]
        walk = make_walk(g, pair)
        decomp = eigen_classify(walk.ops)
        assert stable_pencil_residual(walk.ops, decomp) < 1e-8


def test_spectrum_csv(c3):
    decomp = eigen_classify(c3.ops)
    lines = spectrum_csv(decomp).strip().splitlines()
    assert lines[0] == "re,im,modulus,class"
    assert len(lines) == 7
    assert any(line.endswith("center") for line in lines[1:])


def test_cosine_map():
    lam = np.exp(1j * np.arccos(0.25))
    assert abs(gt.CenterBasis.cosine_of(lam) - 0.25) < 1e-14
