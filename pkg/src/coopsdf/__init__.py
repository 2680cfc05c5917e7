"""Cooperative single-pass Doppler emitter localization with a UAV fleet."""

__version__ = "0.1.0"

from .scenario import (  # noqa: E402
    SPEED_OF_LIGHT,
    ChannelParams,
    Condition,
    ConditionTimeline,
    EmitterConfig,
    LocalFrame,
    Scenario,
    ScenarioError,
    TrajectorySegment,
    UavConfig,
    build_local_frame,
    condition_at,
    max_doppler,
    validate_scenario,
)
from .channel import ReceivedWindow, synthesize_baseband, synthesize_window, true_dfs  # noqa: E402
from .dfs import DopplerSample, Mode, estimate_dfs  # noqa: E402
from .sdf import LocalEstimate, estimate_from_window, pairwise_estimate  # noqa: E402
from .fusion import (  # noqa: E402
    Classified,
    FusedEstimate,
    NodeReport,
    Rule,
    classify_conditions,
    fuse_arithmetic,
    fuse_weighted,
    resolve_mirror_ambiguity,
)
from .harness import SimResult, SweepResult, run_simulation, run_sweep  # noqa: E402
from .config import load_example_scenario, load_scenario, parse_scenario  # noqa: E402

__all__ = [
    "SPEED_OF_LIGHT",
    "ChannelParams",
    "Classified",
    "Condition",
    "ConditionTimeline",
    "DopplerSample",
    "EmitterConfig",
    "FusedEstimate",
    "LocalEstimate",
    "LocalFrame",
    "Mode",
    "NodeReport",
    "ReceivedWindow",
    "Rule",
    "Scenario",
    "ScenarioError",
    "SimResult",
    "SweepResult",
    "TrajectorySegment",
    "UavConfig",
    "build_local_frame",
    "classify_conditions",
    "condition_at",
    "estimate_dfs",
    "estimate_from_window",
    "fuse_arithmetic",
    "fuse_weighted",
    "load_example_scenario",
    "load_scenario",
    "max_doppler",
    "pairwise_estimate",
    "parse_scenario",
    "resolve_mirror_ambiguity",
    "run_simulation",
    "run_sweep",
    "synthesize_baseband",
    "synthesize_window",
    "true_dfs",
    "validate_scenario",
]
