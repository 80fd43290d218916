"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pyfracrigid.engine.config import EngineConfig
from pyfracrigid.enums.NormKind import NormKind
from pyfracrigid.grid.edges import EdgeSet
from pyfracrigid.grid.grid_set import (GridSet, StarMeasureConfig, extract_components, label_components,
                                       make_component, measure_infty, set_norm, theta_partition_ok)
from pyfracrigid.grid.lattice import CellRect, Lattice, WorldRect, cells_per_length
from pyfracrigid.grid.set_calculus import (fill_holes, merge_small_components, perimeter, perimeter_count,
                                           rectangle_hull, rectangleize, refine_grid_set, subtract_and_mark,
                                           union_star_bound)
from pyfracrigid.utils.errors import ConfigError


def hole_set(lat, *rects):
    mask = np.ones(lat.shape, dtype=bool)
    for r in rects:
        mask &= ~r.mask(lat.nx, lat.ny)
    return extract_components(mask, lat)


def test_lower_left_matches_origin_for_shift_four():
    lat = Lattice(0.25, 4, 3, 4, (1.0, -2.0))
    assert np.allclose(lat.lower_left, [1.0, -2.0])
    assert lat.bounds == WorldRect(1.0, -2.0, 3.0, -0.5)


@pytest.mark.parametrize("shift,offset", [(1, (-1, -1)), (2, (0, -1)), (3, (-1, 0)), (4, (0, 0))])
def test_shifted_lattices_move_by_half_a_cell(shift, offset):
    lat = Lattice(0.5, 2, 2, shift)
    assert np.allclose(lat.lower_left, np.array(offset) * 0.5)


def test_invalid_lattices_are_rejected():
    with pytest.raises(ValueError):
        Lattice(0.0, 2, 2)
    with pytest.raises(ValueError):
        Lattice(0.5, 2, 2, shift=5)
    with pytest.raises(ValueError):
        Lattice(0.5, 0, 2)


def test_refined_lattice_keeps_its_extent():
    lat = Lattice(0.1, 5, 3, 2, (0.3, 0.7))
    fine = lat.refined(2)
    assert fine.shape == (6, 10)
    b, fb = lat.bounds, fine.bounds
    assert np.allclose([b.x0, b.y0, b.x1, b.y1], [fb.x0, fb.y0, fb.x1, fb.y1])


def test_to_cell_rect_rejects_unaligned_rectangles():
    lat = Lattice(0.5, 4, 4)
    assert lat.to_cell_rect(WorldRect(1.0, 0.0, 3.0, 2.0)) == CellRect(1, 0, 3, 2)
    with pytest.raises(ValueError):
        lat.to_cell_rect(WorldRect(0.5, 0.0, 1.0, 1.0))


def test_cells_per_length():
    lat = Lattice(0.5 / 16, 16, 16)
    assert cells_per_length(lat, 0.25) == 4
    with pytest.raises(ValueError):
        cells_per_length(lat, 0.1)


@settings(deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(1, 6), st.sampled_from([1, 2, 3, 4]))
def test_blocks_tile_the_lattice(nx, ny, block, shift):
    lat = Lattice(0.5, nx, ny)
    cover = np.zeros(lat.shape, dtype=int)
    bi, bj = lat.block_index(block, shift)
    for r in lat.blocks(block, shift):
        cover[r.slices] += 1
        assert len(set(bi[r.i0:r.i1].tolist())) == 1
        assert len(set(bj[r.j0:r.j1].tolist())) == 1
    assert np.all(cover == 1)


def test_boundary_and_interfaces():
    cells = np.zeros((3, 3), dtype=bool)
    cells[1, 1] = True
    b = EdgeSet.boundary_of(cells, 0.5)
    assert b.count == 4
    assert b.measure == pytest.approx(2.0)
    iface = EdgeSet.interfaces(np.array([[1, 2]]), 1.0)
    assert iface.count == 1 and iface.vertical[0, 1]
    assert (b - b).is_empty
    assert b.is_subset_of(b | EdgeSet.empty(3, 3, 0.5))


def test_projections_of_a_block():
    cells = CellRect(1, 1, 4, 3).mask(6, 5)
    px, py = EdgeSet.boundary_of(cells, 0.5).projections()
    assert (px, py) == (1.5, 1.0)
    with pytest.raises(ValueError):
        EdgeSet.empty(2, 2, 1.0).node_extents()


def test_label_components_uses_four_connectivity():
    n, labels = label_components(np.array([[1, 0], [0, 1]], dtype=bool))
    assert n == 2
    assert labels[0, 0] != labels[1, 1] and labels[0, 1] == 0
    assert label_components(np.zeros((3, 3), dtype=bool))[0] == 0


def test_single_hole_norms(lat16):
    W = hole_set(lat16, CellRect(6, 6, 10, 10))
    h = lat16.side
    assert len(W.interior_components) == 1
    c = W.interior_components[0]
    assert measure_infty(c) == pytest.approx(4 * math.sqrt(2) * h)
    assert set_norm(W, NormKind.HAUSDORFF) == pytest.approx(16 * h)
    star = set_norm(W, NormKind.STAR, StarMeasureConfig(0.1))
    assert star == pytest.approx(0.1 * 16 * h + 0.9 * 4 * math.sqrt(2) * h)


@pytest.mark.parametrize("h_star", [0.0, 1.0, -0.1, 1.5])
def test_star_weight_must_be_strictly_inside_the_unit_interval(h_star):
    with pytest.raises(ConfigError):
        StarMeasureConfig(h_star)
    with pytest.raises(ConfigError):
        EngineConfig(h_star=h_star)
    assert StarMeasureConfig(0.5).h_star == 0.5


def test_boundary_components_do_not_count(lat16):
    W = hole_set(lat16, CellRect(0, 0, 3, 16))
    assert W.interior_components == []
    assert set_norm(W, NormKind.STAR) == 0.0


def test_canonical_ordering_puts_larger_holes_first(lat16):
    W = hole_set(lat16, CellRect(1, 1, 3, 3), CellRect(8, 8, 13, 13))
    first, second = W.interior_components
    assert measure_infty(first) > measure_infty(second)
    assert first.min_cell == (8, 8)


def test_theta_assigns_shared_edges_to_the_earlier_component(lat16):
    left = CellRect(4, 4, 6, 6).mask(16, 16)
    right = CellRect(6, 4, 8, 6).mask(16, 16)
    W = GridSet.build(lat16, ~(left | right), [left, right], ordering=[1, 0])
    first, second = W.components
    assert first.index == 1
    assert first.theta.count == 8
    assert second.theta.count == 6
    assert theta_partition_ok(W)


@settings(deadline=None, max_examples=20)
@given(st.permutations([0, 1, 2]))
def test_hausdorff_norm_does_not_depend_on_the_ordering(order):
    lat16 = Lattice(0.5 / 16, 16, 16)
    sets = [CellRect(4, 4, 6, 6).mask(16, 16), CellRect(6, 4, 8, 6).mask(16, 16), CellRect(4, 6, 8, 8).mask(16, 16)]
    union = sets[0] | sets[1] | sets[2]
    W = GridSet.build(lat16, ~union, sets, ordering=list(order))
    gammas = EdgeSet.boundary_of(sets[0], lat16.side) | EdgeSet.boundary_of(sets[1], lat16.side)
    gammas = gammas | EdgeSet.boundary_of(sets[2], lat16.side)
    assert theta_partition_ok(W)
    assert set_norm(W, NormKind.HAUSDORFF) == pytest.approx(gammas.measure)


def test_build_rejects_inconsistent_components(lat16):
    left = CellRect(4, 4, 6, 6).mask(16, 16)
    with pytest.raises(ValueError):
        GridSet.build(lat16, np.ones(lat16.shape, dtype=bool), [left])
    with pytest.raises(ValueError):
        GridSet.build(lat16, ~left, [left, left])


def test_fill_holes_threshold(lat16):
    W = hole_set(lat16, CellRect(6, 6, 10, 10))
    h = lat16.side
    assert fill_holes(W, 6 * h).mask.all()
    assert fill_holes(W, 5 * h) is W
    with pytest.raises(ValueError):
        fill_holes(W, -1.0)


def test_subtract_and_mark_records_the_square_first(lat16):
    W = extract_components(np.ones(lat16.shape, dtype=bool), lat16)
    out = subtract_and_mark(W, CellRect(2, 2, 5, 5))
    assert out.ordering[0] == 0
    assert out.component(0).area_cells == 9
    assert out.mask.sum() == 256 - 9


def test_merging_diagonal_holes_keeps_the_norm(lat16):
    W = hole_set(lat16, CellRect(5, 5, 6, 6), CellRect(6, 6, 7, 7))
    assert len(W.interior_components) == 2
    before = set_norm(W, NormKind.STAR)
    U = merge_small_components(W, k=1.0)
    assert len(U.components) == 1
    assert set_norm(U, NormKind.STAR) <= before * (1 + 1e-12)


def test_merge_class_check(lat16):
    W = hole_set(lat16, CellRect(2, 2, 10, 10))
    with pytest.raises(ValueError):
        merge_small_components(W, k=1.0, t=0.01)
    with pytest.raises(ValueError):
        merge_small_components(W, k=1.0, part="iii")


def test_rectangleize_an_l_shape(lat16):
    mask = np.ones(lat16.shape, dtype=bool)
    mask[4:6, 4:8] = False
    mask[6:8, 4:6] = False
    V = extract_components(mask, lat16)
    hull = rectangle_hull(V.interior_components[0], lat16)
    assert hull == CellRect(4, 4, 8, 8)
    res = rectangleize(V, [hull], 0.0)
    assert not res.grid_set.mask[hull.slices].any()
    assert res.norm_after == pytest.approx(res.norm_before)
    assert res.constant == 0.0


def test_perimeter_count_ignores_the_lattice_border(lat16):
    full = np.ones(lat16.shape, dtype=bool)
    assert perimeter_count(CellRect(5, 5, 7, 7).mask(16, 16), full) == 8
    assert perimeter_count(CellRect(0, 0, 2, 2).mask(16, 16), full) == 4
    W = extract_components(full, lat16)
    assert perimeter(CellRect(5, 5, 7, 7).mask(16, 16), W) == pytest.approx(8 * lat16.side)


@settings(deadline=None, max_examples=20)
@given(st.integers(1, 10), st.integers(1, 10), st.integers(1, 4), st.integers(1, 4))
def test_refinement_keeps_the_star_norm(i0, j0, w, hgt):
    lat = Lattice(0.5 / 16, 16, 16)
    W = hole_set(lat, CellRect(i0, j0, i0 + w, j0 + hgt))
    fine = refine_grid_set(W)
    assert fine.refinements == 1
    assert set_norm(fine, NormKind.STAR) == pytest.approx(set_norm(W, NormKind.STAR))


def test_json_dict_keeps_the_ordering(lat16):
    W = hole_set(lat16, CellRect(1, 1, 3, 3), CellRect(8, 8, 13, 13))
    back = GridSet.from_json_dict(W.to_json_dict())
    assert back.ordering == W.ordering
    assert np.array_equal(back.mask, W.mask)


@settings(deadline=None, max_examples=30)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(1, 6), st.integers(1, 6),
       st.integers(1, 8), st.integers(1, 8), st.integers(1, 6), st.integers(1, 6))
def test_union_star_bound_holds(i0, j0, w, hgt, a0, b0, aw, bh):
    lat = Lattice(0.5 / 16, 16, 16)
    V = CellRect(i0, j0, i0 + w, j0 + hgt)
    X = make_component(CellRect(a0, b0, a0 + aw, b0 + bh).mask(16, 16), lat.side)
    lhs, rhs = union_star_bound(V, X, lat, StarMeasureConfig())
    assert lhs <= rhs + 1e-12
