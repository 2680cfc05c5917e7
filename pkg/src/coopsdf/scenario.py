"""World description: emitter, UAV routes, propagation timeline, local frames."""

from __future__ import annotations

import bisect
import enum
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

#: Speed of light in vacuum, m/s (exact).
SPEED_OF_LIGHT = 299_792_458.0

_UP = np.array([0.0, 0.0, 1.0])


class ScenarioError(ValueError):
    """Raised when a scenario violates one or more invariants.

    ``violations`` holds every problem found, not only the first one.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class Condition(str, enum.Enum):
    LOS = "LOS"
    OLOS = "OLOS"
    NLOS = "NLOS"


def _vec3(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(3)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class EmitterConfig:
    position_world: np.ndarray
    carrier_frequency_f0: float
    transmit_power: float = 30.0

    def __post_init__(self):
        object.__setattr__(self, "position_world", _vec3(self.position_world))


@dataclass(frozen=True)
class TrajectorySegment:
    start_world: np.ndarray
    heading_unit: np.ndarray
    speed_v: float
    start_time: float
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "start_world", _vec3(self.start_world))
        object.__setattr__(self, "heading_unit", _vec3(self.heading_unit))

    @property
    def end_time(self) -> float:
        return self.start_time + self.duration

    def position(self, t: float) -> np.ndarray:
        return self.start_world + self.heading_unit * self.speed_v * (t - self.start_time)


@dataclass(frozen=True)
class UavConfig:
    id: int
    trajectory: tuple[TrajectorySegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "trajectory", tuple(self.trajectory))

    @property
    def start_time(self) -> float:
        return self.trajectory[0].start_time

    @property
    def end_time(self) -> float:
        return self.trajectory[-1].end_time

    @property
    def altitude(self) -> float:
        return float(self.trajectory[0].start_world[2])


@dataclass(frozen=True)
class ConditionTimeline:
    """Scripted propagation condition per UAV.

    ``intervals`` maps a UAV id to ``(start_time, condition)`` pairs sorted by
    start time; each interval runs until the next one starts.
    """

    intervals: dict

    def __post_init__(self):
        norm = {}
        for uav_id, items in self.intervals.items():
            norm[int(uav_id)] = tuple((float(t), Condition(c)) for t, c in items)
        object.__setattr__(self, "intervals", norm)


@dataclass(frozen=True)
class ChannelParams:
    """Surrogate channel settings. ``noise_floor`` of ``-inf`` disables noise."""

    noise_floor: float = -100.0
    path_loss_exponent: float = 2.0
    olos_excess_loss: float = 10.0
    nlos_excess_loss: float = 20.0
    nlos_scatterer_count: int = 32
    nlos_angular_spread: float = math.pi
    reference_loss_at_1m: float = 22.0


@dataclass(frozen=True)
class Scenario:
    emitter: EmitterConfig
    uavs: tuple[UavConfig, ...]
    timeline: ConditionTimeline
    sample_rate: float = 200.0
    window_duration: float = 1.0
    dfs_history_len: int = 20
    seed: int = 0
    channel: ChannelParams = field(default_factory=ChannelParams)
    los_threshold_db: float = 6.0
    duration: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "uavs", tuple(self.uavs))

    def uav(self, uav_id: int) -> UavConfig:
        for u in self.uavs:
            if u.id == uav_id:
                return u
        raise KeyError(f"unknown uav id {uav_id}")

    @property
    def span(self) -> tuple[float, float]:
        """Simulated time span shared by every UAV."""
        start = max(u.start_time for u in self.uavs)
        end = min(u.end_time for u in self.uavs)
        if self.duration is not None:
            end = min(end, start + self.duration)
        return start, end

    @property
    def n_windows(self) -> int:
        start, end = self.span
        return int(math.floor((end - start) / self.window_duration + 1e-9))

    @property
    def samples_per_window(self) -> int:
        return int(round(self.sample_rate * self.window_duration))

    def f_dmax(self, speed_v: float) -> float:
        return max_doppler(self.emitter.carrier_frequency_f0, speed_v)


@dataclass(frozen=True)
class LocalFrame:
    """Frame of one rectilinear pass.

    The UAV moves along local +x at ``speed_v`` and sits at the origin at
    ``t0``; local z is world vertical for a level heading.
    """

    origin_world: np.ndarray
    rotation: np.ndarray
    speed_v: float
    t0: float = 0.0

    def to_local(self, p_world) -> np.ndarray:
        p = np.asarray(p_world, dtype=float)
        return (p - self.origin_world) @ self.rotation.T

    def to_world(self, p_local) -> np.ndarray:
        p = np.asarray(p_local, dtype=float)
        return p @ self.rotation + self.origin_world

    def tau(self, t):
        """Elapsed time since the frame origin was passed."""
        return np.asarray(t, dtype=float) - self.t0


def max_doppler(f0: float, speed_v: float) -> float:
    """Largest possible Doppler shift, ``f0 * v / c``."""
    return f0 * speed_v / SPEED_OF_LIGHT


def active_segment_index(uav: UavConfig, t: float) -> int:
    """Index of the segment flown at ``t``; a shared boundary goes to the later one."""
    segs = uav.trajectory
    tol = 1e-9 * max(1.0, abs(t))
    if t < segs[0].start_time - tol or t > segs[-1].end_time + tol:
        raise ValueError(
            f"t={t} outside trajectory span [{segs[0].start_time}, {segs[-1].end_time}] "
            f"of uav {uav.id}"
        )
    starts = [s.start_time for s in segs]
    idx = bisect.bisect_right(starts, t + tol) - 1
    return max(0, min(idx, len(segs) - 1))


def uav_position_at(uav: UavConfig, t: float) -> np.ndarray:
    seg = uav.trajectory[active_segment_index(uav, t)]
    return seg.position(t)


def build_local_frame(segment: TrajectorySegment) -> LocalFrame:
    x_axis = np.asarray(segment.heading_unit, dtype=float)
    x_axis = x_axis / np.linalg.norm(x_axis)
    y_axis = np.cross(_UP, x_axis)
    norm_y = np.linalg.norm(y_axis)
    if norm_y < 1e-9:
        raise ScenarioError("heading is parallel to the vertical axis; frame is degenerate")
    y_axis /= norm_y
    z_axis = np.cross(x_axis, y_axis)
    rotation = np.vstack([x_axis, y_axis, z_axis])
    rotation.setflags(write=False)
    return LocalFrame(
        origin_world=segment.start_world,
        rotation=rotation,
        speed_v=float(segment.speed_v),
        t0=float(segment.start_time),
    )


def condition_at(timeline: ConditionTimeline, uav_id: int, t: float) -> Condition:
    try:
        items = timeline.intervals[int(uav_id)]
    except KeyError:
        raise KeyError(f"no timeline for uav id {uav_id}") from None
    starts = [s for s, _ in items]
    idx = bisect.bisect_right(starts, t) - 1
    if idx < 0:
        raise ValueError(f"t={t} precedes the timeline of uav {uav_id}")
    return items[idx][1]


def validate_scenario(sc: Scenario) -> list[str]:
    """Return every invariant violation found in ``sc`` (empty when valid)."""
    problems = []
    em = sc.emitter
    if not (em.carrier_frequency_f0 > 0 and math.isfinite(em.carrier_frequency_f0)):
        problems.append("emitter.carrier_frequency_f0 must be positive")
    if not math.isfinite(em.transmit_power):
        problems.append("emitter.transmit_power must be finite")
    if not np.all(np.isfinite(em.position_world)):
        problems.append("emitter.position_world must be finite")
    if not sc.uavs:
        problems.append("scenario needs at least one uav")

    seen = set()
    max_speed = 0.0
    for uav in sc.uavs:
        label = f"uav {uav.id}"
        if uav.id in seen:
            problems.append(f"{label}: duplicate id")
        seen.add(uav.id)
        if not uav.trajectory:
            problems.append(f"{label}: no trajectory segments")
            continue
        prev = None
        for i, seg in enumerate(uav.trajectory):
            where = f"{label} segment {i}"
            if not seg.speed_v > 0:
                problems.append(f"{where}: speed_v must be > 0")
            max_speed = max(max_speed, seg.speed_v)
            if not seg.duration > 0:
                problems.append(f"{where}: duration must be > 0")
            if abs(np.linalg.norm(seg.heading_unit) - 1.0) > 1e-9:
                problems.append(f"{where}: heading_unit must have norm 1")
            if abs(seg.heading_unit[2]) > 1e-9:
                problems.append(f"{where}: heading must be horizontal (constant altitude)")
            steps = (seg.start_time - uav.trajectory[0].start_time) / sc.window_duration
            if abs(steps - round(steps)) > 1e-9:
                problems.append(f"{where}: start_time must fall on a window boundary")
            if prev is not None:
                if abs(prev.end_time - seg.start_time) > 1e-9:
                    problems.append(
                        f"{where}: not contiguous (previous ends at {prev.end_time}, "
                        f"this starts at {seg.start_time})"
                    )
                gap = np.linalg.norm(prev.position(prev.end_time) - seg.start_world)
                if gap > 1e-6:
                    problems.append(f"{where}: start_world is {gap:.3g} m from previous end")
            prev = seg
        if uav.id not in sc.timeline.intervals:
            problems.append(f"{label}: missing from timeline")

    for uav_id, items in sc.timeline.intervals.items():
        label = f"timeline {uav_id}"
        if uav_id not in seen:
            problems.append(f"{label}: no uav with this id")
        if not items:
            problems.append(f"{label}: empty")
            continue
        starts = [s for s, _ in items]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            problems.append(f"{label}: intervals must be sorted and non-overlapping")
        if sc.uavs and uav_id in seen and starts[0] > sc.span[0] + 1e-9:
            problems.append(f"{label}: does not cover the start of the simulation")

    ch = sc.channel
    if ch.nlos_scatterer_count < 1:
        problems.append("channel.nlos_scatterer_count must be >= 1")
    for name in ("olos_excess_loss", "nlos_excess_loss"):
        if getattr(ch, name) < 0:
            problems.append(f"channel.{name} must be >= 0")
    if not sc.sample_rate > 0:
        problems.append("sim.sample_rate must be positive")
    elif max_speed > 0 and em.carrier_frequency_f0 > 0:
        need = 4.0 * max_doppler(em.carrier_frequency_f0, max_speed)
        if sc.sample_rate < need:
            problems.append(
                f"sim.sample_rate {sc.sample_rate} Hz is below 4 x max |DFS| = {need:.4g} Hz"
            )
    if not sc.window_duration > 0:
        problems.append("sim.window_duration must be positive")
    elif sc.sample_rate > 0 and sc.samples_per_window < 64:
        problems.append("sim: a window must hold at least 64 samples")
    if sc.dfs_history_len < 2:
        problems.append("sim.dfs_history_len must be >= 2")
    if sc.uavs and all(u.trajectory for u in sc.uavs) and sc.window_duration > 0:
        if sc.n_windows < 1:
            problems.append("sim: the common time span holds no complete window")
    if not 0 <= sc.seed < 2**64:
        problems.append("sim.seed must be an unsigned 64-bit integer")
    return problems


def check_scenario(sc: Scenario) -> Scenario:
    problems = validate_scenario(sc)
    if problems:
        raise ScenarioError(problems)
    return sc


def _canonical(obj):
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return {f: _canonical(getattr(obj, f)) for f in obj.__dataclass_fields__}
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def scenario_digest(sc: Scenario) -> str:
    """SHA-256 over a canonical JSON rendering of the scenario content."""
    text = json.dumps(_canonical(sc), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()
