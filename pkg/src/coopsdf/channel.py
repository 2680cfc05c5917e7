"""Surrogate radio channel: Doppler tone synthesis for LOS, OLOS and NLOS.

LOS is a single direct path. OLOS is the same path with extra attenuation.
NLOS replaces the direct path by a ring of scatterers whose Doppler offsets
``f_Dmax * cos(theta + delta_k)`` spread around the direct-path angle
``theta``, which yields a dispersive Doppler spectrum. Every component's
phase is the exact time integral of its instantaneous frequency, so the
curvature of the Doppler curve inside a window is preserved.

Power convention: 0 dBm corresponds to unit mean-square complex amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import (
    SPEED_OF_LIGHT,
    Condition,
    LocalFrame,
    Scenario,
    active_segment_index,
    build_local_frame,
    condition_at,
    max_doppler,
)

#: Returned by :func:`received_power_dbm` for an all-zero window.
POWER_FLOOR_DBM = -300.0


@dataclass(frozen=True)
class ReceivedWindow:
    uav_id: int
    t_start: float
    samples: np.ndarray
    true_condition: Condition
    received_power: float
    sample_rate: float
    segment_index: int = 0

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def t_center(self) -> float:
        return self.t_start + 0.5 * self.duration


def true_dfs(emitter_local, v, f0, t):
    """Noise-free Doppler shift seen by a receiver on the local x-axis.

    Parameters
    ----------
    emitter_local : array-like, shape (3,)
        Emitter position in the pass frame, meters.
    v : float
        Receiver speed along +x, m/s.
    f0 : float
        Carrier frequency, Hz.
    t : float or ndarray
        Time since the receiver passed the frame origin, s.

    Returns
    -------
    float or ndarray
        ``f_Dmax * (x0 - v t) / |emitter - receiver|`` in Hz.
    """
    x0, y0, z0 = (float(c) for c in np.asarray(emitter_local, dtype=float).reshape(3))
    t = np.asarray(t, dtype=float)
    along = x0 - v * t
    dist = np.sqrt(along**2 + y0**2 + z0**2)
    if np.any(dist == 0.0):
        raise ZeroDivisionError("receiver coincides with the emitter")
    out = max_doppler(f0, v) * along / dist
    return float(out) if out.ndim == 0 else out


def _direct_phase_cycles(emitter_local, v, f0, tau):
    """Integral of the direct-path DFS from ``tau[0]``, in cycles.

    ``d/dt r = -v (x0 - v t) / r`` so the integral is ``-(f0/c) (r - r_ref)``.
    """
    x0, y0, z0 = emitter_local
    along = x0 - v * tau
    r = np.sqrt(along**2 + y0**2 + z0**2)
    return -(f0 / SPEED_OF_LIGHT) * (r - r[0]), along


def _cross_phase_cycles(emitter_local, v, f0, tau, along):
    """Integral of ``f_Dmax * sqrt(1 - F^2)`` from ``tau[0]``, in cycles."""
    _, y0, z0 = emitter_local
    rho = math.hypot(y0, z0)
    if rho == 0.0:
        return np.zeros_like(tau)
    arc = np.arcsinh(along / rho)
    return -(f0 / SPEED_OF_LIGHT) * rho * (arc - arc[0])


def path_loss_db(distance: float, params) -> float:
    d = max(float(distance), 1.0)
    return params.reference_loss_at_1m + 10.0 * params.path_loss_exponent * math.log10(d)


def synthesize_baseband(
    emitter_local,
    v: float,
    f0: float,
    tau: np.ndarray,
    condition: Condition,
    rx_power_dbm: float,
    params,
    rng: np.random.Generator,
) -> np.ndarray:
    """Complex baseband samples for one window at local times ``tau``.

    ``rx_power_dbm`` is the LOS received power before any condition excess loss.
    """
    emitter_local = tuple(float(c) for c in emitter_local)
    tau = np.asarray(tau, dtype=float)
    direct, along = _direct_phase_cycles(emitter_local, v, f0, tau)
    condition = Condition(condition)

    if condition is Condition.NLOS:
        amp = 10.0 ** ((rx_power_dbm - params.nlos_excess_loss) / 20.0)
        k = int(params.nlos_scatterer_count)
        spread = float(params.nlos_angular_spread)
        delta = rng.uniform(-spread, spread, size=k)
        phi0 = rng.uniform(0.0, 2.0 * np.pi, size=k)
        cross = _cross_phase_cycles(emitter_local, v, f0, tau, along)
        # cos(theta + d) = cos(theta) cos(d) - sin(theta) sin(d)
        cycles = np.outer(np.cos(delta), direct) - np.outer(np.sin(delta), cross)
        signal = (amp / math.sqrt(k)) * np.exp(1j * (2.0 * np.pi * cycles + phi0[:, None])).sum(
            axis=0
        )
    else:
        loss = params.olos_excess_loss if condition is Condition.OLOS else 0.0
        amp = 10.0 ** ((rx_power_dbm - loss) / 20.0)
        phi0 = rng.uniform(0.0, 2.0 * np.pi)
        signal = amp * np.exp(1j * (2.0 * np.pi * direct + phi0))

    if math.isfinite(params.noise_floor):
        sigma = math.sqrt(10.0 ** (params.noise_floor / 10.0) / 2.0)
        noise = rng.standard_normal(len(tau)) + 1j * rng.standard_normal(len(tau))
        signal = signal + sigma * noise
    return signal


def received_power_dbm(samples, reference_offset_db: float = 0.0) -> float:
    """Mean received power of a window in dBm (0 dBm = unit mean square)."""
    x = samples.samples if isinstance(samples, ReceivedWindow) else np.asarray(samples)
    if x.size == 0:
        raise ValueError("empty window")
    ms = float(np.mean(np.abs(x) ** 2))
    if ms == 0.0:
        return POWER_FLOOR_DBM
    return 10.0 * math.log10(ms) + reference_offset_db


def window_rng(seed: int, uav_id: int, window_index: int) -> np.random.Generator:
    """Independent generator for one (uav, window) pair.

    Depends only on its arguments, so windows can be synthesized in any order.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(uav_id), int(window_index)]))


def synthesize_window(
    scenario: Scenario, uav_id: int, t_start: float, rng: np.random.Generator
) -> ReceivedWindow:
    """Received window for ``uav_id`` starting at ``t_start``.

    The window must lie inside one trajectory segment; the propagation
    condition is read from the timeline at the window midpoint.
    """
    uav = scenario.uav(uav_id)
    n = scenario.samples_per_window
    fs = scenario.sample_rate
    seg_idx = active_segment_index(uav, t_start)
    seg = uav.trajectory[seg_idx]
    t_end = t_start + n / fs
    if t_end > seg.end_time + 1e-9 or t_start < seg.start_time - 1e-9:
        raise ValueError(
            f"window [{t_start}, {t_end}] of uav {uav_id} crosses a segment boundary"
        )
    frame = build_local_frame(seg)
    emitter_local = frame.to_local(scenario.emitter.position_world)
    # sample instants at cell centers so their centroid is the window midpoint
    tau = frame.tau(t_start + (np.arange(n) + 0.5) / fs)
    t_mid = t_start + 0.5 * n / fs
    condition = condition_at(scenario.timeline, uav_id, t_mid)

    dist = float(np.linalg.norm(emitter_local - np.array([seg.speed_v * frame.tau(t_mid), 0.0, 0.0])))
    rx_dbm = scenario.emitter.transmit_power - path_loss_db(dist, scenario.channel)
    samples = synthesize_baseband(
        emitter_local,
        seg.speed_v,
        scenario.emitter.carrier_frequency_f0,
        tau,
        condition,
        rx_dbm,
        scenario.channel,
        rng,
    )
    samples.setflags(write=False)
    return ReceivedWindow(
        uav_id=uav_id,
        t_start=float(t_start),
        samples=samples,
        true_condition=condition,
        received_power=received_power_dbm(samples),
        sample_rate=fs,
        segment_index=seg_idx,
    )


def frame_for(scenario: Scenario, uav_id: int, segment_index: int) -> LocalFrame:
    return build_local_frame(scenario.uav(uav_id).trajectory[segment_index])
