"""Fleet-level condition classification and position fusion."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, replace

import numpy as np


class Classified(str, enum.Enum):
    LOS_USABLE = "LOS-usable"
    NLOS = "NLOS"


class Rule(str, enum.Enum):
    ARITHMETIC = "arithmetic"
    WEIGHTED = "weighted"
    WEIGHTED_FALLBACK = "weighted-fallback-arithmetic"


class FusionError(ValueError):
    pass


@dataclass(frozen=True)
class NodeReport:
    """What one UAV shares with the fleet at a time step."""

    uav_id: int
    t: float
    power: float
    estimate: object = None
    classified_condition: Classified = Classified.NLOS


@dataclass(frozen=True)
class FusedEstimate:
    t: float
    position_world: np.ndarray
    rule_used: Rule
    contributing_ids: tuple
    error_m: float = float("nan")


def classify_conditions(reports, los_threshold_db: float = 6.0):
    """Mark each report LOS-usable when its power is within the threshold of the strongest."""
    reports = list(reports)
    if not reports:
        raise FusionError("no reports to classify")
    powers = [r.power for r in reports if np.isfinite(r.power)]
    if not powers:
        raise FusionError("no report carries a finite power")
    ceiling = max(powers) - los_threshold_db
    return [
        replace(
            r,
            classified_condition=Classified.LOS_USABLE if r.power >= ceiling else Classified.NLOS,
        )
        for r in reports
    ]


def _with_estimates(reports):
    have = [r for r in reports if r.estimate is not None]
    if not have:
        raise FusionError("no report carries an estimate")
    return have


def _mean(reports, rule):
    # sort by id so the float sum does not depend on report order
    reports = sorted(reports, key=lambda r: r.uav_id)
    pts = np.array([np.asarray(r.estimate.position_world, dtype=float) for r in reports])
    return FusedEstimate(
        t=max(r.t for r in reports),
        position_world=pts.mean(axis=0),
        rule_used=rule,
        contributing_ids=tuple(r.uav_id for r in reports),
    )


def fuse_arithmetic(reports) -> FusedEstimate:
    return _mean(_with_estimates(reports), Rule.ARITHMETIC)


def fuse_weighted(reports) -> FusedEstimate:
    """Average only LOS-usable nodes; plain mean of everyone if none are usable.

    Weights are binary, so this is a selection followed by an equal-weight mean.
    """
    have = _with_estimates(reports)
    usable = [r for r in have if r.classified_condition == Classified.LOS_USABLE]
    if usable:
        return _mean(usable, Rule.WEIGHTED)
    return _mean(have, Rule.WEIGHTED_FALLBACK)


def resolve_mirror_ambiguity(reports, max_exhaustive: int = 12):
    """Pick the side of track for estimates a single pass could not resolve.

    Each ambiguous estimate may be replaced by its mirror image. The sign
    pattern kept is the one whose horizontal positions, together with the
    unambiguous estimates, have the least squared spread about their mean.
    Up to ``max_exhaustive`` ambiguous nodes are searched exhaustively,
    beyond that by coordinate descent restarted from every node's two
    candidates (all other nodes snapped to their nearer option).
    """
    reports = sorted(reports, key=lambda r: r.uav_id)
    idx = [
        i
        for i, r in enumerate(reports)
        if r.estimate is not None and r.estimate.ambiguous and r.estimate.mirror_world is not None
    ]
    fixed = [
        np.asarray(r.estimate.position_world, dtype=float)[:2]
        for i, r in enumerate(reports)
        if r.estimate is not None and i not in idx
    ]
    if not idx or len(idx) + len(fixed) < 2:
        return reports
    options = [
        (
            np.asarray(reports[i].estimate.position_world, dtype=float)[:2],
            np.asarray(reports[i].estimate.mirror_world, dtype=float)[:2],
        )
        for i in idx
    ]

    def spread(bits):
        pts = np.array(fixed + [opt[b] for opt, b in zip(options, bits)])
        return float(np.sum((pts - pts.mean(axis=0)) ** 2))

    if len(idx) <= max_exhaustive:
        best = min(itertools.product((0, 1), repeat=len(idx)), key=spread)
    else:
        best = min((_descend(s, spread) for s in _anchored_starts(options, fixed)), key=spread)
    out = list(reports)
    for i, b in zip(idx, best):
        if b:
            out[i] = replace(out[i], estimate=out[i].estimate.mirrored())
    return out


def _anchored_starts(options, fixed):
    # snap every node to the option nearest an anchor; one start per candidate anchor
    anchors = [opt[b] for opt in options for b in (0, 1)]
    if fixed:
        anchors.append(np.mean(fixed, axis=0))
    for a in anchors:
        yield [int(np.sum((o[1] - a) ** 2) < np.sum((o[0] - a) ** 2)) for o in options]


def _descend(bits, spread):
    bits = list(bits)
    improved = True
    while improved:
        improved = False
        for j in range(len(bits)):
            trial = list(bits)
            trial[j] ^= 1
            if spread(trial) < spread(bits):
                bits, improved = trial, True
    return bits

