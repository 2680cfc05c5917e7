import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coopsdf.scenario import (
    Condition,
    ConditionTimeline,
    ScenarioError,
    TrajectorySegment,
    UavConfig,
    build_local_frame,
    check_scenario,
    condition_at,
    max_doppler,
    scenario_digest,
    uav_position_at,
    validate_scenario,
)

from conftest import single_pass_scenario

SEG = TrajectorySegment((0, 0, 100), (1, 0, 0), 10.0, 0.0, 20.0)


def test_position_at_start_and_later():
    uav = UavConfig(1, [SEG])
    np.testing.assert_array_equal(uav_position_at(uav, 0.0), [0, 0, 100])
    np.testing.assert_allclose(uav_position_at(uav, 5.0), [50, 0, 100])


def test_position_continuous_at_boundary():
    s2 = TrajectorySegment(SEG.position(20.0), (0, 1, 0), 10.0, 20.0, 10.0)
    uav = UavConfig(1, [SEG, s2])
    np.testing.assert_allclose(uav_position_at(uav, 20.0), [200, 0, 100], atol=1e-9)
    left = uav_position_at(uav, 20.0 - 1e-9)
    assert np.linalg.norm(left - uav_position_at(uav, 20.0)) < 1e-6


def test_position_out_of_span():
    with pytest.raises(ValueError):
        uav_position_at(UavConfig(1, [SEG]), 21.0)


def test_frame_identity_heading():
    fr = build_local_frame(SEG)
    np.testing.assert_allclose(fr.to_local([100, 50, 0]), [100, 50, -100], atol=1e-12)


def test_frame_rotated_heading():
    seg = TrajectorySegment((0, 0, 100), (0, 1, 0), 10.0, 0.0, 10.0)
    p = build_local_frame(seg).to_local([50, 100, 100])
    assert p[0] == pytest.approx(100)
    assert abs(p[1]) == pytest.approx(50)
    assert p[2] == pytest.approx(0, abs=1e-12)


def test_frame_own_position():
    fr = build_local_frame(SEG)
    np.testing.assert_allclose(fr.to_local(SEG.position(3.0)), [30, 0, 0], atol=1e-12)


def test_vertical_heading_rejected():
    seg = TrajectorySegment((0, 0, 100), (0, 0, 1), 10.0, 0.0, 10.0)
    with pytest.raises(ScenarioError):
        build_local_frame(seg)


@settings(max_examples=50, deadline=None)
@given(
    az=st.floats(-math.pi, math.pi),
    origin=st.lists(st.floats(-1e4, 1e4), min_size=3, max_size=3),
    seed=st.integers(0, 2**32 - 1),
)
def test_frame_round_trip(az, origin, seed):
    seg = TrajectorySegment(origin, (math.cos(az), math.sin(az), 0.0), 7.0, 0.0, 10.0)
    fr = build_local_frame(seg)
    np.testing.assert_allclose(fr.rotation @ fr.rotation.T, np.eye(3), atol=1e-9)
    pts = np.random.default_rng(seed).uniform(-5e3, 5e3, size=(1000, 3))
    back = np.array([fr.to_world(fr.to_local(p)) for p in pts])
    assert np.max(np.abs(back - pts)) < 1e-9
    for t in np.linspace(0, 10, 11):
        q = fr.to_local(seg.position(t))
        assert abs(q[1]) < 1e-9 and abs(q[2]) < 1e-9
        assert q[0] == pytest.approx(7.0 * t, abs=1e-9)


def test_condition_at_boundary_rule():
    tl = ConditionTimeline({1: [(0, "NLOS"), (30, "LOS")]})
    assert condition_at(tl, 1, 10) is Condition.NLOS
    assert condition_at(tl, 1, 30) is Condition.LOS
    assert condition_at(tl, 1, 45) is Condition.LOS
    with pytest.raises(KeyError):
        condition_at(tl, 9, 1.0)


def test_max_doppler_value():
    assert max_doppler(300e6, 10.0) == pytest.approx(10.00692, abs=1e-5)


def test_valid_scenario_has_no_violations():
    assert validate_scenario(single_pass_scenario()) == []


def test_all_violations_reported():
    sc = single_pass_scenario(sample_rate=30.0, dfs_history_len=1)
    problems = validate_scenario(sc)
    assert any("sample_rate" in p for p in problems)
    assert any("dfs_history_len" in p for p in problems)
    with pytest.raises(ScenarioError) as exc:
        check_scenario(sc)
    assert len(exc.value.violations) == len(problems)


def test_non_contiguous_segments_rejected():
    s2 = TrajectorySegment(SEG.position(20.0), (0, 1, 0), 10.0, 25.0, 10.0)
    sc = replace(single_pass_scenario(), uavs=(UavConfig(1, [SEG, s2]),))
    assert any("contiguous" in p for p in validate_scenario(sc))


def test_bad_heading_norm_rejected():
    seg = TrajectorySegment((0, 0, 100), (1.0, 1e-4, 0), 10.0, 0.0, 20.0)
    sc = replace(single_pass_scenario(), uavs=(UavConfig(1, [seg]),))
    assert any("norm" in p for p in validate_scenario(sc))


def test_digest_tracks_content():
    a = single_pass_scenario()
    assert scenario_digest(a) == scenario_digest(single_pass_scenario())
    assert scenario_digest(a) != scenario_digest(replace(a, seed=1))
