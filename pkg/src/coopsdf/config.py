"""Scenario files: TOML with ``[emitter]``, ``[[uav]]``, ``[[uav.segment]]``,
``[timeline]``, ``[channel]`` and ``[sim]`` sections, SI units throughout.

Example::

    [emitter]
    position_world = [0.0, 0.0, 0.0]
    carrier_frequency_f0 = 300e6

    [[uav]]
    id = 1
    [[uav.segment]]
    start_world = [-500.0, 80.0, 100.0]
    heading_unit = [1.0, 0.0, 0.0]
    speed_v = 10.0
    duration = 60.0

    [timeline]
    1 = [[0.0, "NLOS"], [30.0, "LOS"]]

Inside a UAV, ``start_time`` and ``start_world`` of a segment default to the
end of the previous one, and ``heading_deg`` (azimuth from +x towards +y)
may replace ``heading_unit``.
"""

from __future__ import annotations

import hashlib
import math
import re
import sys
from importlib import resources
from pathlib import Path

from .scenario import (
    ChannelParams,
    ConditionTimeline,
    EmitterConfig,
    Scenario,
    TrajectorySegment,
    UavConfig,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXAMPLE_SCENARIO = "five_uav_city.scn"

_EMITTER_KEYS = {"position_world", "carrier_frequency_f0", "transmit_power"}
_UAV_KEYS = {"id", "segment"}
_SEGMENT_KEYS = {"start_world", "heading_unit", "heading_deg", "speed_v", "start_time", "duration"}
_CHANNEL_KEYS = set(ChannelParams.__dataclass_fields__)
_SIM_KEYS = {
    "sample_rate",
    "window_duration",
    "dfs_history_len",
    "seed",
    "los_threshold_db",
    "duration",
}
_SECTIONS = {"emitter", "uav", "timeline", "channel", "sim"}


class ScenarioFileError(ValueError):
    """Malformed scenario file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.message = message
        where = f"line {line}: " if line else ""
        super().__init__(where + message)


def _find_line(text: str, key: str, header: str | None = None) -> int | None:
    lines = text.splitlines()
    start = 0
    if header is not None:
        pat = re.compile(r"^\s*\[+\s*" + re.escape(header) + r"\s*\]+")
        for i, ln in enumerate(lines):
            if pat.match(ln):
                start = i
                break
    pat = re.compile(r'^\s*["\']?' + re.escape(key) + r'["\']?\s*=')
    for i in range(start, len(lines)):
        if pat.match(lines[i]):
            return i + 1
    return None


def _check_keys(table: dict, allowed: set, section: str, text: str):
    for key in table:
        if key not in allowed:
            raise ScenarioFileError(
                f"unknown key '{key}' in [{section}]", _find_line(text, key, section)
            )


def _require(table: dict, key: str, section: str, text: str):
    if key not in table:
        raise ScenarioFileError(f"missing key '{key}' in [{section}]", _find_line(text, section))
    return table[key]


def _heading(seg: dict, text: str):
    if "heading_unit" in seg and "heading_deg" in seg:
        raise ScenarioFileError(
            "give either heading_unit or heading_deg, not both",
            _find_line(text, "heading_deg", "uav.segment"),
        )
    if "heading_deg" in seg:
        a = math.radians(float(seg["heading_deg"]))
        return (math.cos(a), math.sin(a), 0.0)
    return tuple(float(c) for c in _require(seg, "heading_unit", "uav.segment", text))


def parse_scenario(text: str) -> Scenario:
    """Build a :class:`Scenario` from scenario-file text.

    Only structure is checked here; call
    :func:`coopsdf.scenario.validate_scenario` for the physical invariants.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ScenarioFileError(f"syntax error: {exc}", int(m.group(1)) if m else None) from None

    for key in doc:
        if key not in _SECTIONS:
            raise ScenarioFileError(f"unknown section '{key}'", _find_line(text, key) or _header_line(text, key))

    try:
        em = _require(doc, "emitter", "emitter", text)
        _check_keys(em, _EMITTER_KEYS, "emitter", text)
        emitter = EmitterConfig(
            position_world=_require(em, "position_world", "emitter", text),
            carrier_frequency_f0=float(_require(em, "carrier_frequency_f0", "emitter", text)),
            transmit_power=float(em.get("transmit_power", 30.0)),
        )

        uavs = []
        for u in _require(doc, "uav", "uav", text):
            _check_keys(u, _UAV_KEYS, "uav", text)
            segments = []
            prev = None
            for seg in _require(u, "segment", "uav.segment", text):
                _check_keys(seg, _SEGMENT_KEYS, "uav.segment", text)
                if prev is None:
                    start_time = float(seg.get("start_time", 0.0))
                    start_world = _require(seg, "start_world", "uav.segment", text)
                else:
                    start_time = float(seg.get("start_time", prev.end_time))
                    start_world = seg.get("start_world", prev.position(prev.end_time))
                prev = TrajectorySegment(
                    start_world=start_world,
                    heading_unit=_heading(seg, text),
                    speed_v=float(_require(seg, "speed_v", "uav.segment", text)),
                    start_time=start_time,
                    duration=float(_require(seg, "duration", "uav.segment", text)),
                )
                segments.append(prev)
            uavs.append(UavConfig(id=int(_require(u, "id", "uav", text)), trajectory=segments))

        tl = doc.get("timeline", {})
        intervals = {}
        for key, items in tl.items():
            if not re.fullmatch(r"\d+", key):
                raise ScenarioFileError(
                    f"unknown key '{key}' in [timeline] (expected a uav id)",
                    _find_line(text, key, "timeline"),
                )
            try:
                intervals[int(key)] = [(float(t), str(c).upper()) for t, c in items]
            except (TypeError, ValueError) as exc:
                raise ScenarioFileError(
                    f"bad timeline entry for uav {key}: {exc}", _find_line(text, key, "timeline")
                ) from None
        timeline = ConditionTimeline(intervals)

        ch = doc.get("channel", {})
        _check_keys(ch, _CHANNEL_KEYS, "channel", text)
        channel = ChannelParams(**{k: (int(v) if k == "nlos_scatterer_count" else float(v)) for k, v in ch.items()})

        sim = doc.get("sim", {})
        _check_keys(sim, _SIM_KEYS, "sim", text)
        kwargs = {}
        for key in ("sample_rate", "window_duration", "los_threshold_db", "duration"):
            if key in sim:
                kwargs[key] = float(sim[key])
        for key in ("dfs_history_len", "seed"):
            if key in sim:
                kwargs[key] = int(sim[key])
    except ScenarioFileError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioFileError(f"bad value: {exc}") from None

    return Scenario(emitter=emitter, uavs=uavs, timeline=timeline, channel=channel, **kwargs)


def _header_line(text: str, name: str):
    pat = re.compile(r"^\s*\[+\s*" + re.escape(name) + r"[\].]")
    for i, ln in enumerate(text.splitlines()):
        if pat.match(ln):
            return i + 1
    return None


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def example_scenario_path() -> Path:
    """Path of the bundled five-UAV urban scenario."""
    return Path(str(resources.files("coopsdf") / "data" / EXAMPLE_SCENARIO))


def load_example_scenario() -> Scenario:
    return load_scenario(example_scenario_path())
