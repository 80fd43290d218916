"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import numpy as np
import pytest

from pyfracrigid.Decomposition import Decomposition
from pyfracrigid.engine.config import EngineConfig
from pyfracrigid.enums.Kinematics import Kinematics
from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.fields.matrices import skew
from pyfracrigid.grid.grid_set import extract_components
from pyfracrigid.grid.lattice import Lattice
from pyfracrigid.harness.generators import gen_piecewise_rigid
from pyfracrigid.partition.displacement import build_displacement, essential_jumps, reconstruct
from pyfracrigid.partition.extension import assemble_extension, fill_pending
from pyfracrigid.partition.linear import linear_variant
from pyfracrigid.partition.partition import (EXCLUDED, PENDING, CaccioppoliPartition, Piece, assign_rigid_motions,
                                             extract_partition, merge_equivalent_pieces, omega_rho)
from pyfracrigid.partition.separator import jordan_separator
from pyfracrigid.rigidity.fits import RigidMotion


def slit_set(lat, column):
    mask = np.ones(lat.shape, dtype=bool)
    mask[:, column] = False
    return extract_components(mask, lat)


@pytest.fixture(scope="module", params=[3, 11])
def recovered(request):
    f, truth, motions = gen_piecewise_rigid(request.param, 5)
    result = Decomposition(EngineConfig(max_steps=1, coverage_c=0.1)).run(f)
    return f, truth, motions, result


def test_pieces_match_the_ground_truth(recovered):
    f, truth, motions, result = recovered
    part = result.partition
    assert part.complete
    assert len(part.pieces) == 5
    pairs = set(zip(truth.ravel().tolist(), part.labels.ravel().tolist()))
    assert len(pairs) == 5
    assert len({a for a, _ in pairs}) == 5 and len({b for _, b in pairs}) == 5
    for p in part.pieces:
        t = int(truth[p.cells][0])
        assert p.motion.distance(motions[t - 1]) < 1e-8


def test_displacement_vanishes_on_rigid_pieces(recovered):
    f, _, _, result = recovered
    u = result.displacement
    assert np.nanmax(np.abs(u.corners)) < 1e-9
    assert essential_jumps(u, 1e-9).is_empty
    assert np.allclose(reconstruct(u, result.partition), result.extension.field.corners, atol=1e-9)
    rep = result.report
    assert rep.passed
    assert rep.H1_Ju == 0.0
    assert rep.structural_length == pytest.approx(f.jumps.length)
    assert rep.to_dict()["kinematics"] == "NONLINEAR"
    assert result.engine.trace.ledger_ok


def test_separator_of_a_recovered_partition(recovered):
    _, _, _, result = recovered
    sep = result.separator
    assert sep.flagged == []
    assert sep.audits["jordan"]["passed"] == 1.0
    assert sep.audits["cycles"]["passed"] == 1.0
    assert sep.audits["complement"]["passed"] == 1.0
    assert sep.length == pytest.approx(result.report.structural_length)
    assert len(sep.rows()) == sep.edges.count
    assert all(n == 0 for n in sep.loops.values())


def test_omega_rho_margin(lat16):
    active = np.ones(lat16.shape, dtype=bool)
    assert omega_rho(active, lat16.side, 0.1, 0.0).all()
    om = omega_rho(active, lat16.side, 0.1, 1.0)
    assert om.sum() == 144
    assert om[2:14, 2:14].all()


def test_extracted_pieces_and_perimeters(lat16):
    part = extract_partition(slit_set(lat16, 8), 0.1)
    assert [p.label for p in part.pieces] == [1, 2]
    assert part.pending[:, 8].all() and part.pending.sum() == 16
    assert part.total_perimeter == pytest.approx(2.0)
    lhs, rhs = part.perimeter_check()
    assert lhs == pytest.approx(rhs)
    assert part.min_area_constant() == pytest.approx(112 / 256 / 0.1)


def test_equal_motions_merge_within_reach(lat16):
    f = DeformationField.from_function(lat16, lambda p, _: p + 0.25)
    part = assign_rigid_motions(f, extract_partition(slit_set(lat16, 8), 0.1))
    assert all(p.motion.distance(RigidMotion(np.eye(2), (0.25, 0.25))) < 1e-12 for p in part.pieces)
    assert all(p.chain is None or p.chain["passed"] for p in part.pieces)
    assert len(merge_equivalent_pieces(f, part, 1.0 / 16, 1e-8).pieces) == 2
    merged = merge_equivalent_pieces(f, part, 0.125, 1e-8)
    assert len(merged.pieces) == 1
    assert merged.pieces[0].area_cells == 240
    assert merged.labels[:, 8].tolist() == [PENDING] * 16


def test_threaded_motion_fits_match_the_serial_ones(lat16):
    right = RigidMotion.from_angle(0.3, (0.1, 0.0))
    f = DeformationField.from_function(lat16, lambda p, _: np.where(p[..., :1] < 0.5, p, right.apply(p)))
    part = extract_partition(slit_set(lat16, 8), 0.1)
    serial = assign_rigid_motions(f, part)
    threaded = assign_rigid_motions(f, part, threads=3)
    assert len(serial.pieces) == 2
    assert [p.label for p in serial.pieces] == [p.label for p in threaded.pieces]
    assert all(a.motion.distance(b.motion) == 0.0 for a, b in zip(serial.pieces, threaded.pieces))
    assert np.array_equal(serial.labels, threaded.labels)


def corner_partition():
    """A on x < 1/2, C on the lower right, P on the upper right with its west column and south row pending."""
    lat = Lattice(0.5 / 8, 8, 8)
    motions = {1: RigidMotion.identity(), 2: RigidMotion.from_angle(0.0, (0.0, 0.5)),
               3: RigidMotion.from_angle(0.5, (1.0, 0.0))}
    truth = np.ones(lat.shape, dtype=np.int64)
    truth[:4, 4:] = 2
    truth[4:, 4:] = 3
    f = DeformationField.from_function(lat, lambda p, lab: motions[lab].apply(p), truth)
    labels = truth.copy()
    labels[4:, 4] = PENDING
    labels[4, 4:] = PENDING
    pieces = [Piece(q, labels == q, 0.0, motions[q]) for q in (1, 2, 3)]
    part = CaccioppoliPartition(lat, labels, pieces, np.ones(lat.shape, dtype=bool), 0.1)
    return f, truth, part, motions


def test_pending_cells_go_to_the_piece_that_fits():
    f, truth, part, motions = corner_partition()
    labels, unreached = fill_pending(f, part, motions)
    assert not unreached.any()
    assert np.array_equal(labels, truth)


def test_extension_of_the_corner_partition():
    f, truth, part, _ = corner_partition()
    ext = assemble_extension(f, f, part, 1e-4)
    assert ext.partition.complete
    assert ext.filled.sum() == 7
    assert ext.flagged == []
    assert np.allclose(ext.field.corners, f.corners)
    u = build_displacement(ext.field, ext.partition)
    assert np.abs(u.corners).max() < 1e-12
    assert u.jumps.count == ext.field.jumps.count


def test_unreached_pending_region_gets_the_identity():
    lat = Lattice(0.5 / 8, 8, 8)
    f = DeformationField.from_function(lat, lambda p, _: p + np.array([0.1, 0.0]))
    om = np.ones(lat.shape, dtype=bool)
    om[:, 3] = False
    labels = np.full(lat.shape, PENDING, dtype=np.int64)
    labels[:, :3] = 1
    labels[:, 3] = EXCLUDED
    motion = RigidMotion(np.eye(2), (0.1, 0.0))
    part = CaccioppoliPartition(lat, labels, [Piece(1, labels == 1, 0.0, motion)], om, 0.1)
    ext = assemble_extension(f, f, part, 1e-4)
    assert ext.flagged == [2]
    piece = ext.partition.piece(2)
    assert piece.flagged and piece.area_cells == 32
    assert piece.motion.distance(RigidMotion.identity()) == 0.0
    X = lat.corner_coords()
    assert np.allclose(ext.field.corners[:, 4:], X[:, 4:])


def test_separator_audits_a_partition_with_pending_cells(lat16):
    part = extract_partition(slit_set(lat16, 8), 0.1)
    sep = jordan_separator(part, part.labels > 0, 0.1, 4)
    assert sep.length == 0.0
    # both rims run along the pending column, outside S
    assert sep.flagged == [1, 2]
    assert sep.audits["jordan"]["passed"] == 0.0
    assert sep.audits["cycles"]["regions"] == 1.0
    assert sep.audits["distance"]["measured"] == float("inf")


def test_separator_lies_next_to_the_excluded_cells():
    _, _, part, _ = corner_partition()
    sep = jordan_separator(part, part.labels > 0, 0.1, 4)
    # the only interface runs between pieces 1 and 2, both retained
    assert sep.audits["complement"]["edges"] == 4.0
    assert sep.audits["complement"]["retained_both_sides"] == 4.0
    assert sep.audits["complement"]["passed"] == 0.0
    hat = part.labels > 0
    hat[:, 4] = False
    sep = jordan_separator(part, hat, 0.1, 4)
    assert sep.audits["complement"]["retained_both_sides"] == 0.0
    assert sep.audits["complement"]["passed"] == 1.0


def test_linear_variant_recovers_infinitesimal_motions():
    lat = Lattice(0.5 / 64, 64, 64)
    labels = np.zeros(lat.shape, dtype=np.int64)
    labels[:, 32:] = 1

    def displacement(p, lab):
        if lab:
            return p @ skew(-0.2).T + np.array([0.05, 0.0])
        return p @ skew(0.1).T

    u = DeformationField.from_function(lat, displacement, labels)
    rep = linear_variant(u, 1e-4, 0.1, EngineConfig(max_steps=1, coverage_c=0.1))
    assert rep.kinematics == Kinematics.LINEAR
    assert rep.u_L2_sq < 1e-16
    assert rep.extras["sym_strain_hat_sq"] < 1e-16
    assert rep.structural_length == pytest.approx(1.0)


def test_decomposition_rejects_unknown_kinematics():
    with pytest.raises(ValueError):
        Decomposition(kinematics="linear")
