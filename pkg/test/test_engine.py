"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import dataclasses
import json

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from pyfracrigid.engine.carving import carve_squares, piecewise_rotation_map, threshold_carve
from pyfracrigid.engine.config import EngineConfig
from pyfracrigid.engine.healing import heal
from pyfracrigid.engine.iteration import initial_crack_set, iterate
from pyfracrigid.engine.local_maps import local_rigid_motion_map
from pyfracrigid.engine.pou import bump, healable, shift_weights, smoothstep
from pyfracrigid.engine.schedule import budget_B, desk_ladder, make_schedule
from pyfracrigid.engine.subatomistic import RESOLVED, SUBGRID, crack_spacing_below, curl_repair, subatomistic_fit
from pyfracrigid.enums.Kinematics import Kinematics
from pyfracrigid.enums.TraceEvent import TraceEvent
from pyfracrigid.fields.deformation_field import DeformationField
from pyfracrigid.fields.matrices import skew
from pyfracrigid.grid.grid_set import extract_components
from pyfracrigid.grid.lattice import CellRect, Lattice
from pyfracrigid.harness.generators import gen_beam
from pyfracrigid.observer.TraceWriter import TraceCollector
from pyfracrigid.rigidity.fits import RigidMotion
from pyfracrigid.utils.errors import ConfigError, ScheduleInfeasible


def full_set(f):
    return extract_components(np.ones(f.shape, dtype=bool), f.lattice)


def test_config_rejects_bad_values():
    with pytest.raises(ConfigError):
        EngineConfig(rho=1.5)
    with pytest.raises(ConfigError):
        EngineConfig(t=0.5, rho=0.1)
    with pytest.raises(ConfigError):
        EngineConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigError):
        EngineConfig.from_dict({"max_steps": 2.5})
    assert EngineConfig.from_dict({"max_steps": 2.0}).max_steps == 2


def test_config_defaults_and_derived_values():
    cfg = EngineConfig()
    assert cfg.m_value == cfg.rho
    assert cfg.omega_value == pytest.approx(0.2 / 36.0)
    assert cfg.C_m() == pytest.approx(0.1 ** -4)
    assert cfg.star.h_star == 0.1
    assert EngineConfig(log_eps=-50.0).log_epsilon == -50.0


def test_config_from_json(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"eps": 1e-3, "m": None, "subatomistic_prepass": False}))
    cfg = EngineConfig.from_json(path)
    assert cfg.eps == 1e-3 and cfg.m is None and cfg.subatomistic_prepass is False
    assert EngineConfig.from_dict(cfg.to_dict()) == cfg


def test_environment_overrides():
    env = {"PYFRACRIGID_MAX_STEPS": "3", "PYFRACRIGID_SUBATOMISTIC_PREPASS": "off", "PYFRACRIGID_M": "none",
           "HOME": "/tmp"}
    cfg = EngineConfig(m=0.5).with_env_overrides(env)
    assert cfg.max_steps == 3 and isinstance(cfg.max_steps, int)
    assert cfg.subatomistic_prepass is False
    assert cfg.m is None
    assert EngineConfig().with_env_overrides({}) == EngineConfig()
    with pytest.raises(ConfigError):
        EngineConfig().with_env_overrides({"PYFRACRIGID_SUBATOMISTIC_PREPASS": "maybe"})
    with pytest.raises(ConfigError):
        EngineConfig().with_env_overrides({"PYFRACRIGID_RHO": "7"})


def test_default_schedule_is_feasible():
    sched = make_schedule(EngineConfig())
    assert sched.J_star > 0
    assert len(sched) == sched.J_star + 1
    assert sched.identity_ok and sched.vartheta_ok
    # s0 / eps0 is far above eps^(-eta/2), so no step is inside the asserted range
    assert sched.J_hat == -1
    assert all(b.log_s > a.log_s for a, b in zip(sched.steps, sched.steps[1:]))
    assert sched.to_dict()["J_star"] == sched.J_star


@pytest.mark.parametrize("cfg,norm,inequality", [
    (EngineConfig(z_bar=0.5), 0.0, "T^-z_bar >= T^-1"),
    (EngineConfig(), 1e30, "T^-1 >= c^4 P^2"),
    (EngineConfig(kappa=1e-10), 0.0, "q0 T^(1/r) > 1"),
    (EngineConfig(r=1.0, omega=0.5, log_eps=-1e4), 0.0, "vartheta_j <= eps0 T_j / (c^2 eps_(j+1))"),
])
def test_infeasible_schedules_name_the_inequality(cfg, norm, inequality):
    with pytest.raises(ScheduleInfeasible) as err:
        make_schedule(cfg, norm)
    assert err.value.inequality == inequality
    assert isinstance(err.value, ValueError)


@settings(max_examples=10, deadline=None)
@given(st.floats(-5e6, -1e6), st.floats(0.05, 0.5), st.floats(0.05, 0.9), st.floats(0.0, 8.0))
def test_q_recursion_is_exact_on_random_feasible_schedules(log_eps, rho, t_ratio, z):
    cfg = EngineConfig(log_eps=log_eps, rho=rho, t=t_ratio * rho, z=z)
    try:
        sched = make_schedule(cfg)
    except ScheduleInfeasible as e:
        assert not e.inequality.startswith(("q_", "vartheta")), str(e)
        assume(False)
    assert sched.identity_ok and sched.vartheta_ok
    assert sched.J_hat >= 0
    inside = sched.steps[:sched.J_hat + 1]
    for a, b in zip(inside, inside[1:]):
        assert b.log_q == pytest.approx(sched.log_T + (1.0 + cfg.r) * a.log_q, rel=1e-12, abs=1e-12)
    assert all(s.vartheta_ok and not s.capped for s in inside)


def test_budget_limit():
    cfg = EngineConfig()
    assert budget_B(cfg, 0.0, 0) == 0.0
    assert budget_B(cfg, 0.0, 30) == pytest.approx(budget_B(cfg, 0.0))
    assert budget_B(cfg, 2.0) > budget_B(cfg, 1.0)


def test_desk_ladder():
    lat = Lattice(0.5 / 64, 64, 64)
    steps, skipped = desk_ladder(EngineConfig(), lat, make_schedule(EngineConfig()))
    assert [s.k_cells for s in steps] == [16, 32, 64]
    assert [s.lam_cells for s in steps] == [8, 16, 32]
    assert steps[1].eps == pytest.approx(2e-4)
    assert skipped >= 0
    assert len(desk_ladder(EngineConfig(max_steps=1), lat)[0]) == 1
    with pytest.raises(ConfigError):
        desk_ladder(EngineConfig(), Lattice(0.5 / 8, 8, 8))


def test_threshold_carving_on_a_beam():
    f = gen_beam(0.25, 1.0 / 32)
    W = full_set(f)
    res = threshold_carve(f, W, 0.25, 1e-3)
    assert len(res.squares) == 4
    assert not res.grid_set.mask.any()
    assert res.budget_lhs <= res.budget_rhs
    assert res.gamma == pytest.approx(0.25 ** 3 / 3, rel=0.05)
    calm = threshold_carve(f, W, 0.25, 1.0)
    assert calm.squares == [] and calm.grid_set is W
    with pytest.raises(ValueError):
        threshold_carve(f, W, 0.25, 0.0)


def test_carving_splits_old_components(lat16):
    mask = np.ones(lat16.shape, dtype=bool)
    mask[4:6, 2:14] = False
    W = extract_components(mask, lat16)
    out = carve_squares(W, [CellRect(6, 2, 8, 8)])
    assert out.mask.sum() == mask.sum() - 8
    # the carved square comes first, the old slit falls apart in two
    assert out.components[0].area_cells == 12
    assert len(out.components) == 3


def test_rotation_maps_of_a_rigid_field(rigid_field, rigid_motion):
    rot = piecewise_rotation_map(rigid_field, full_set(rigid_field), 0.25, 0.1, 1e-4, 0.125, EngineConfig())
    assert rot.carve.squares == []
    assert rot.flagged == 0
    for R in rot.maps:
        assert np.allclose(R, rigid_motion.R)
    assert rot.metrics["delta2"] == pytest.approx(0.0, abs=1e-20)
    assert rot.metrics["star_norm"] == 0.0


def test_linear_rotation_maps_are_identities(lat16):
    u = DeformationField.from_function(lat16, lambda p, _: 0.01 * p)
    rot = piecewise_rotation_map(u, full_set(u), 0.25, 0.1, 1.0, 0.0625, EngineConfig(),
                                 kinematics=Kinematics.LINEAR)
    assert np.allclose(rot.maps[0], np.eye(2))


def bent_field(lat):
    return DeformationField.from_function(lat, lambda p, _: np.stack(
        [p[..., 0] + 0.1 * p[..., 1] ** 2, p[..., 1] + 0.05 * np.sin(3.0 * p[..., 0])], axis=-1))


def test_thread_count_does_not_change_the_fits(lat16):
    f = bent_field(lat16)
    W = full_set(f)
    one, three = EngineConfig(threads=1), EngineConfig(threads=3)
    a = piecewise_rotation_map(f, W, 0.25, 0.1, 1.0, 0.0625, one)
    b = piecewise_rotation_map(f, W, 0.25, 0.1, 1.0, 0.0625, three)
    assert a.flagged == b.flagged
    assert all(np.array_equal(x, y, equal_nan=True) for x, y in zip(a.maps, b.maps))
    la = local_rigid_motion_map(f, a.grid_set, 0.25, 0.1, one, a.maps)
    lb = local_rigid_motion_map(f, b.grid_set, 0.25, 0.1, three, b.maps)
    for idx in range(4):
        assert np.array_equal(la.matrices[idx], lb.matrices[idx], equal_nan=True)
        assert np.array_equal(la.translations[idx], lb.translations[idx], equal_nan=True)
        assert np.array_equal(la.covered[idx], lb.covered[idx])
    assert la.dropped == lb.dropped
    assert la.metrics == lb.metrics


def test_bump_profile():
    assert bump(0.0, 1.0) == 1.0
    assert bump(0.75, 1.0) == 0.0
    assert float(smoothstep(0.5)) == 0.5
    assert bump(0.375, 1.0) == 0.5
    assert bump(0.1, 1.0) < 1.0


@given(st.floats(-2.0, 2.0), st.floats(0.1, 3.0))
def test_bump_is_a_weight(t, half):
    b = float(bump(t, half))
    assert 0.0 <= b <= 1.0
    assert float(bump(-t, half)) == b


@settings(deadline=None)
@given(st.floats(0.1, 3.0))
def test_bump_slope_stays_within_four_over_the_side(half):
    t = np.linspace(-2.0 * half, 2.0 * half, 4001)
    slope = np.abs(np.diff(bump(t, half))) / np.diff(t)
    side = 2.0 * half
    assert slope.max() <= 4.0 / side * (1.0 + 1e-9)
    assert slope.max() == pytest.approx(4.0 / side, rel=1e-4)


def test_shift_weights_cover_every_corner(lat16):
    total = sum(shift_weights(lat16, 8))
    # smallest where two shifts of both axes overlap halfway: (2 smoothstep(1/3))^2
    assert total.min() == pytest.approx((14.0 / 27.0) ** 2)
    assert total.max() <= 1.0 + 1e-12


def test_healable_cells(lat16):
    weights = shift_weights(lat16, 8)
    none = np.zeros(lat16.shape, dtype=bool)
    every = np.ones(lat16.shape, dtype=bool)
    only_four = healable([none, none, none, every], weights)
    assert only_four[3, 3]
    assert not only_four[0, 0]
    assert not only_four[3, 7]
    assert healable([every] * 4, weights).all()


def test_local_maps_and_healing_of_a_rigid_field(rigid_field):
    cfg = EngineConfig()
    maps = local_rigid_motion_map(rigid_field, full_set(rigid_field), 0.25, 0.1, cfg)
    assert maps.block == 8
    assert maps.dropped == 0
    assert maps.metrics["motion_l2"] == pytest.approx(0.0, abs=1e-20)
    assert maps.metrics["uncovered_area"] == 0.0
    assert maps.U.mask.all()
    healed = heal(rigid_field, maps.U, maps, 0.25)
    assert healed.metrics["value_change"] == pytest.approx(0.0, abs=1e-20)
    assert healed.metrics["filled_cells"] == 0.0
    assert healed.metrics["pou_gradient_constant"] == pytest.approx(4.0)
    assert healed.field.jumps.count == 0
    with pytest.raises(ValueError):
        heal(rigid_field, maps.U, maps, 0.125)


def test_coverage_drops_thin_components(rigid_field):
    mask = np.zeros(rigid_field.shape, dtype=bool)
    mask[:, :2] = True
    W = extract_components(mask, rigid_field.lattice)
    maps = local_rigid_motion_map(rigid_field, W, 0.25, 0.1, EngineConfig(coverage_c=8.0))
    assert maps.dropped > 0
    assert maps.metrics["dropped"] == float(maps.dropped)


def test_subatomistic_regimes(rigid_field):
    cells = np.ones(rigid_field.shape, dtype=bool)
    assert subatomistic_fit(rigid_field, cells, rigid_field.h, 1e-4).regime == SUBGRID
    fit = subatomistic_fit(rigid_field, cells, 0.25, 1e-4)
    assert fit.regime == RESOLVED
    assert len(fit.squares) == 16
    assert fit.residual == pytest.approx(0.0, abs=1e-20)
    assert fit.to_dict()["squares"] == 16


def test_curl_repair_lowers_the_subatomistic_residual():
    lat = Lattice(0.5 / 16, 16, 16)
    labels = np.zeros(lat.shape, dtype=np.int64)
    labels[:, 8:] = 1
    motions = {0: RigidMotion.identity(), 1: RigidMotion.from_angle(0.3, (0.05, 0.0))}
    f = DeformationField.from_function(lat, lambda p, lab: motions[lab].apply(p), labels)
    # one square over the whole lattice
    fit = subatomistic_fit(f, np.ones(lat.shape, dtype=bool), 1.0, 1e-4)
    assert fit.regime == RESOLVED and len(fit.squares) == 1
    assert fit.curl > 0
    assert fit.repair_l2 > 0
    assert fit.residual < fit.raw_residual
    assert fit.residual == pytest.approx(fit.raw_residual - fit.repair_l2, rel=1e-6)


def test_curl_repair_keeps_compatible_gradients(rigid_field):
    G = curl_repair(rigid_field)
    assert np.allclose(G, rigid_field.gradients, atol=1e-9)


def test_prepass_rotations_reach_the_trace():
    lat = Lattice(0.5 / 32, 32, 32)
    labels = np.zeros(lat.shape, dtype=np.int64)
    labels[:, 8:] = 1
    labels[:, 10:] = 2
    f = DeformationField.from_function(lat, lambda p, lab: p + np.array([0.0, 0.01 * lab]), labels)
    res = iterate(f, initial_crack_set(f), EngineConfig(max_steps=1, coverage_c=0.1))
    assert res.trace.prepass["regime"] == RESOLVED
    assert res.trace.prepass["repair_l2"] == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(res.trace.prepass_rotations, np.eye(2))
    assert "prepass_rotations" not in res.trace.to_dict()


def test_crack_spacing(lat16):
    mask = np.ones(lat16.shape, dtype=bool)
    mask[:, 3] = False
    mask[:, 6] = False
    W = extract_components(mask, lat16)
    assert crack_spacing_below(W, 4)
    assert not crack_spacing_below(W, 1)
    assert not crack_spacing_below(full_set(DeformationField.from_function(lat16, lambda p, _: p)), 4)


def test_initial_crack_set_drops_plus_cells(lat16):
    labels = np.zeros(lat16.shape, dtype=np.int64)
    labels[:, 8:] = 1
    f = DeformationField.from_function(lat16, lambda p, lab: p + lab, labels)
    W0 = initial_crack_set(f)
    assert not W0.mask[:, 8].any()
    assert W0.mask[:, 7].all() and W0.mask[:, 9].all()
    assert len(W0.components) == 1


def test_iterate_keeps_a_rigid_field(rigid_field):
    collector = TraceCollector()
    collector.startLoop()
    try:
        res = iterate(rigid_field, initial_crack_set(rigid_field), EngineConfig(max_steps=1), collector)
    finally:
        collector.stopLoop()
    assert res.trace.ledger_ok
    assert res.trace.carved_total == 0
    rec = res.trace.records[0]
    assert rec["local_motion_l2"] == pytest.approx(0.0, abs=1e-20)
    assert rec["heal_value_change"] == pytest.approx(0.0, abs=1e-20)
    assert rec["extent_constant"] == 0.0
    assert res.lam == pytest.approx(0.25)
    assert [what for what, _ in collector.records] == [TraceEvent.STEP, TraceEvent.DONE]
    assert collector.records[-1][1]["ledger_ok"]


@settings(deadline=None, max_examples=5)
@given(st.floats(-0.5, 0.5))
def test_iterate_in_linear_kinematics(a):
    lat = Lattice(0.5 / 32, 32, 32)
    u = DeformationField.from_function(lat, lambda p, _: p @ skew(a).T + np.array([0.1, 0.0]))
    cfg = dataclasses.replace(EngineConfig(), max_steps=1)
    res = iterate(u, initial_crack_set(u), cfg, kinematics=Kinematics.LINEAR)
    assert res.trace.ledger_ok
    assert res.trace.records[0]["local_motion_l2"] == pytest.approx(0.0, abs=1e-18)
