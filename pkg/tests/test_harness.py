import math
from dataclasses import replace

import numpy as np
import pytest

from coopsdf.harness import _UavTrack, resolve_workers, rms_error, run_simulation, run_sweep
from coopsdf.dfs import DopplerSample, Mode
from coopsdf.scenario import (
    ChannelParams,
    ConditionTimeline,
    EmitterConfig,
    Scenario,
    ScenarioError,
    TrajectorySegment,
    UavConfig,
)

from conftest import single_pass_scenario


def two_uav(nlos_loss=40.0, duration=20.0):
    segs = [
        TrajectorySegment((-100, -80, 100), (1, 0, 0), 10.0, 0.0, duration),
        TrajectorySegment((-100, 120, 100), (1, 0, 0), 10.0, 0.0, duration),
    ]
    return Scenario(
        emitter=EmitterConfig((0, 0, 0), 300e6),
        uavs=[UavConfig(1, [segs[0]]), UavConfig(2, [segs[1]])],
        timeline=ConditionTimeline({1: [(0, "LOS")], 2: [(0, "NLOS")]}),
        channel=ChannelParams(noise_floor=-110.0, nlos_excess_loss=nlos_loss, nlos_angular_spread=0.8),
        seed=7,
    )


def _rows(records):
    # repr compares NaN fields as equal and floats bit for bit
    return [repr(r) for r in records]


def test_noise_free_single_pass():
    res = run_simulation(single_pass_scenario(), seed=1)
    assert res.uav_errors[1][-1] < 0.01
    assert len(res.records) == 20


def test_bit_identical_reruns_and_threads():
    sc = two_uav()
    a = run_simulation(sc, workers=1)
    b = run_simulation(sc, workers=1)
    c = run_simulation(sc, workers=3)
    for other in (b, c):
        for u in a.uav_ids:
            assert np.array_equal(a.uav_errors[u], other.uav_errors[u])
        for name in a.fused_errors:
            assert np.array_equal(a.fused_errors[name], other.fused_errors[name])
        assert _rows(a.records) == _rows(other.records)


def test_seed_changes_errors_not_axes():
    sc = two_uav()
    a, b = run_simulation(sc, seed=1), run_simulation(sc, seed=2)
    assert np.array_equal(a.t, b.t)
    assert not np.array_equal(a.uav_errors[2], b.uav_errors[2])
    ca = [r.condition_classified for r in a.records]
    assert ca == [r.condition_classified for r in b.records]


def test_series_consistency():
    res = run_simulation(two_uav(), seed=3)
    for u, e in res.uav_errors.items():
        assert len(e) == len(res.t)
        assert res.uav_route_avg[u] == pytest.approx(float(np.mean(e)))
    for name, e in res.fused_errors.items():
        assert len(e) == len(res.t)
        assert res.fused_route_avg[name] == pytest.approx(float(np.mean(e)))
    stacked = np.vstack([res.uav_errors[u] for u in res.uav_ids])
    np.testing.assert_array_equal(res.envelope_min, stacked.min(axis=0))
    np.testing.assert_array_equal(res.envelope_max, stacked.max(axis=0))


def test_nlos_uav_still_estimates_and_weighted_uses_los():
    res = run_simulation(two_uav(), seed=3)
    nlos = [r for r in res.records if r.uav_id == 2]
    assert all(r.mode == "NLOS-centroid" for r in nlos)
    assert nlos[-1].has_estimate
    weighted = [r for r in res.fused_records if r.rule == "weighted"]
    assert all(r.n_contributors == 1 for r in weighted)


def test_causality():
    sc = two_uav()
    full = run_simulation(sc, seed=5)
    short = run_simulation(replace(sc, duration=12.0), seed=5)
    assert _rows(full.records[: len(short.records)]) == _rows(short.records)


def test_history_bound():
    sc = replace(single_pass_scenario(), dfs_history_len=5)
    track = _UavTrack(sc.uavs[0], sc)
    track.enter_segment(0)
    for k in range(12):
        F = math.cos(0.1 + 0.2 * k)
        track.push(DopplerSample(k + 0.5, 10 * F, F, 0.0, Mode.LOS_PEAK, 10.0))
        assert len(track.history) <= 5


def test_invalid_scenario_propagates():
    with pytest.raises(ScenarioError):
        run_simulation(replace(single_pass_scenario(), dfs_history_len=1))


def test_rms_error():
    assert rms_error([10.0] * 7) == pytest.approx(10.0)
    assert rms_error([(0, 3.0), (1, 4.0)]) == pytest.approx(math.sqrt(12.5))
    with pytest.raises(ValueError):
        rms_error([])
    with pytest.raises(ValueError):
        rms_error([1.0, float("nan")])


def test_sweep_one_seed_matches_run():
    sc = two_uav()
    sw = run_sweep(sc, [11])
    assert sw.mean == run_simulation(sc, seed=11).summary()
    assert all(v == 0 for v in sw.std.values())


def test_sweep_aggregates():
    sw = run_sweep(two_uav(), [1, 2, 3])
    assert len(sw.runs) == 3 and len(sw.ratios) == 3
    assert sw.mean["weighted"] == pytest.approx(np.mean([r["weighted"] for r in sw.runs]))
    with pytest.raises(ValueError):
        run_sweep(two_uav(), [])


def test_thread_env(monkeypatch):
    monkeypatch.setenv("SDF_SIM_THREADS", "3")
    assert resolve_workers() == 3
    monkeypatch.setenv("SDF_SIM_THREADS", "0")
    assert resolve_workers() >= 1
    monkeypatch.setenv("SDF_SIM_THREADS", "many")
    with pytest.raises(ValueError):
        resolve_workers()
