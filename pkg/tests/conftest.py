"""Shared oracles and fixtures.

The oracles are written from the forward geometry only and do not call the
package's estimators, so they can judge them.
"""

import math
import sys

import numpy as np
import pytest

from coopsdf.dfs import DopplerSample, Mode
from coopsdf.scenario import (
    ChannelParams,
    ConditionTimeline,
    EmitterConfig,
    LocalFrame,
    Scenario,
    TrajectorySegment,
    UavConfig,
)

C = 299_792_458.0
F0_10HZ = 10.0 * C / 10.0  # carrier giving f_Dmax = 10 Hz at 10 m/s


def oracle_F(p_local, v, tau):
    """cos of the angle between velocity and line of sight, by direct geometry."""
    x0, y0, z0 = p_local
    along = x0 - v * np.asarray(tau, dtype=float)
    return along / np.sqrt(along**2 + y0**2 + z0**2)


def oracle_samples(p_local, v, times, f_dmax=10.0, t0=0.0):
    """Exact, noise-free DopplerSamples for a receiver on the local x-axis."""
    out = []
    for t in times:
        F = float(oracle_F(p_local, v, t - t0))
        out.append(DopplerSample(t, f_dmax * F, F, 0.0, Mode.LOS_PEAK, f_dmax))
    return out


def tone(freq, fs=200.0, n=200, phase=0.0):
    t = np.arange(n) / fs
    return np.exp(1j * (2 * math.pi * freq * t + phase))


def canonical_frame():
    # start (0,0,100), heading +x: emitter world (100, 50, 0) is local (100, 50, -100)
    return LocalFrame(np.array([0.0, 0.0, 100.0]), np.eye(3), 10.0, 0.0)


def single_pass_scenario(
    emitter=(100.0, 50.0, 0.0),
    condition="LOS",
    noise_floor=-math.inf,
    duration=20.0,
    f0=F0_10HZ,
    **kw,
):
    seg = TrajectorySegment((0.0, 0.0, 100.0), (1.0, 0.0, 0.0), 10.0, 0.0, duration)
    return Scenario(
        emitter=EmitterConfig(emitter, f0),
        uavs=[UavConfig(1, [seg])],
        timeline=ConditionTimeline({1: [(0.0, condition)]}),
        channel=ChannelParams(noise_floor=noise_floor),
        **kw,
    )


@pytest.fixture
def frame():
    return canonical_frame()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
