"""End-to-end time-stepped simulation and Monte Carlo sweeps."""

from __future__ import annotations

import logging
import math
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import synthesize_window, true_dfs, window_rng
from .dfs import NoSignalError, estimate_dfs, select_mode
from .fusion import (
    NodeReport,
    classify_conditions,
    fuse_arithmetic,
    fuse_weighted,
    resolve_mirror_ambiguity,
)
from .scenario import Scenario, build_local_frame, check_scenario, scenario_digest
from .sdf import EstimationFailedError, estimate_from_window

log = logging.getLogger(__name__)

THREADS_ENV = "SDF_SIM_THREADS"
FUSED_RULES = ("arithmetic", "weighted")


@dataclass
class WindowRecord:
    """Diagnostics for one UAV and one window."""

    t: float
    uav_id: int
    f_d_hat: float
    f_d_true: float
    mode: str
    condition_true: str
    condition_classified: str
    power: float
    has_estimate: bool
    error_m: float


@dataclass
class FusedRecord:
    t: float
    rule: str
    error_m: float
    n_contributors: int


@dataclass
class SimResult:
    """Scored error series of one run.

    All series share ``t``, which starts at the first window whose history
    can be full. Entries are NaN while a UAV has no estimate yet; route
    averages and envelopes skip those.
    """

    seed: int
    scenario_digest: str
    t: np.ndarray
    uav_ids: tuple
    uav_errors: dict
    fused_errors: dict
    uav_route_avg: dict
    fused_route_avg: dict
    envelope_min: np.ndarray
    envelope_max: np.ndarray
    records: list = field(default_factory=list, repr=False)
    fused_records: list = field(default_factory=list, repr=False)

    @property
    def improvement_ratio(self) -> float:
        """Arithmetic over weighted route-average error."""
        return self.fused_route_avg["arithmetic"] / self.fused_route_avg["weighted"]

    def summary(self) -> dict:
        out = {f"uav{u}": self.uav_route_avg[u] for u in self.uav_ids}
        out.update(self.fused_route_avg)
        return out


def resolve_workers(workers=None) -> int:
    if workers is None:
        raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
        try:
            workers = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if workers < 0:
        raise ValueError("worker count must be >= 0")
    return workers or (os.cpu_count() or 1)


def horizontal_error(estimate, truth) -> float:
    d = np.asarray(estimate, dtype=float)[:2] - np.asarray(truth, dtype=float)[:2]
    return float(math.hypot(d[0], d[1]))


def rms_error(series) -> float:
    """Root mean square of an error series.

    ``series`` is either a 1-D sequence of errors or ``(t, error)`` rows.
    """
    arr = np.asarray(series, dtype=float)
    if arr.ndim == 2:
        arr = arr[:, 1]
    if arr.size == 0:
        raise ValueError("empty error series")
    if not np.all(np.isfinite(arr)):
        raise ValueError("error series contains NaN or inf")
    return float(np.sqrt(np.mean(arr**2)))


def _finite_mean(e) -> float:
    e = np.asarray(e, dtype=float)
    e = e[np.isfinite(e)]
    return float(np.mean(e)) if e.size else float("nan")


def _envelope(arr, fn):
    out = np.full(arr.shape[0], np.nan)
    for i, row in enumerate(arr):
        row = row[np.isfinite(row)]
        if row.size:
            out[i] = fn(row)
    return out


class _UavTrack:
    """Sliding Doppler history of one UAV."""

    def __init__(self, uav, scenario: Scenario):
        self.uav = uav
        self.capacity = scenario.dfs_history_len
        self.history = deque(maxlen=self.capacity)
        self.evidence = deque(maxlen=self.capacity)
        self.segment = None
        self.frame = None
        self.estimate = None
        self.z_tilde = 0.0
        self._emitter = scenario.emitter.position_world

    def enter_segment(self, index: int):
        if index == self.segment:
            return
        if self.frame is not None:
            # earlier headings still disambiguate left/right of the new track
            self.evidence.extend((s, self.frame) for s in self.history)
        self.history.clear()
        self.segment = index
        self.frame = build_local_frame(self.uav.trajectory[index])
        self.z_tilde = float(self.frame.to_local(self._emitter)[2])

    def push(self, sample):
        self.history.append(sample)
        if sum(s.usable for s in self.history) < 2:
            return
        try:
            self.estimate = estimate_from_window(
                list(self.history),
                self.frame,
                self.z_tilde,
                uav_id=self.uav.id,
                evidence=list(self.evidence),
            )
        except EstimationFailedError as exc:
            log.debug("uav %s at t=%.3f keeps previous estimate: %s", self.uav.id, sample.t, exc)


def run_simulation(scenario: Scenario, seed=None, workers=None) -> SimResult:
    """Simulate every whole window of the scenario and score the estimates.

    Parameters
    ----------
    scenario : Scenario
    seed : int, optional
        Overrides ``scenario.seed``.
    workers : int, optional
        Thread count for per-UAV window processing; ``None`` reads
        ``SDF_SIM_THREADS`` and 0 means one per CPU. Results do not depend
        on it.
    """
    check_scenario(scenario)
    seed = scenario.seed if seed is None else int(seed)
    n_workers = resolve_workers(workers)
    truth = scenario.emitter.position_world
    f0 = scenario.emitter.carrier_frequency_f0
    uavs = scenario.uavs
    tracks = {u.id: _UavTrack(u, scenario) for u in uavs}
    t_begin, _ = scenario.span
    wd = scenario.window_duration

    # score from the first window whose history can hold dfs_history_len samples;
    # a fixed start keeps the time axis independent of the seed
    warmup = min(scenario.dfs_history_len, scenario.n_windows) - 1
    records, fused_records = [], []
    rows_t, rows_uav, rows_fused = [], [], []

    def synthesize(job):
        uav, k = job
        return synthesize_window(scenario, uav.id, t_begin + k * wd, window_rng(seed, uav.id, k))

    pool = ThreadPoolExecutor(max_workers=n_workers) if n_workers > 1 else None
    try:
        for k in range(scenario.n_windows):
            jobs = [(u, k) for u in uavs]
            windows = list(pool.map(synthesize, jobs)) if pool else [synthesize(j) for j in jobs]
            fleet_max = max(w.received_power for w in windows)

            def estimate(window):
                uav = scenario.uav(window.uav_id)
                seg = uav.trajectory[window.segment_index]
                mode = select_mode(window.received_power, fleet_max, scenario.los_threshold_db)
                try:
                    return estimate_dfs(window, scenario.f_dmax(seg.speed_v), mode), mode
                except NoSignalError:
                    return None, mode

            est = list(pool.map(estimate, windows)) if pool else [estimate(w) for w in windows]

            reports = []
            for uav, window, (sample, mode) in zip(uavs, windows, est):
                track = tracks[uav.id]
                track.enter_segment(window.segment_index)
                if sample is not None:
                    track.push(sample)
                reports.append(
                    NodeReport(uav.id, window.t_center, window.received_power, track.estimate)
                )
            reports = resolve_mirror_ambiguity(reports)
            reports = classify_conditions(reports, scenario.los_threshold_db)
            by_id = {r.uav_id: r for r in reports}

            t_mid = windows[0].t_center
            errs = {}
            for uav, window, (sample, mode) in zip(uavs, windows, est):
                track = tracks[uav.id]
                rep = by_id[uav.id]
                emitter_local = track.frame.to_local(truth)
                f_true = true_dfs(emitter_local, track.frame.speed_v, f0, track.frame.tau(t_mid))
                err = (
                    horizontal_error(rep.estimate.position_world, truth)
                    if rep.estimate is not None
                    else float("nan")
                )
                errs[uav.id] = err
                records.append(
                    WindowRecord(
                        t=t_mid,
                        uav_id=uav.id,
                        f_d_hat=sample.f_d_hat if sample is not None else float("nan"),
                        f_d_true=f_true,
                        mode=mode.value,
                        condition_true=window.true_condition.value,
                        condition_classified=rep.classified_condition.value,
                        power=window.received_power,
                        has_estimate=track.estimate is not None,
                        error_m=err,
                    )
                )

            if any(r.estimate is not None for r in reports):
                fused = {"arithmetic": fuse_arithmetic(reports), "weighted": fuse_weighted(reports)}
                ferr = {}
                for name, fe in fused.items():
                    ferr[name] = horizontal_error(fe.position_world, truth)
                    fused_records.append(
                        FusedRecord(t_mid, fe.rule_used.value, ferr[name], len(fe.contributing_ids))
                    )
            else:
                ferr = {name: float("nan") for name in FUSED_RULES}
            if k >= warmup:
                rows_t.append(t_mid)
                rows_uav.append([errs[u.id] for u in uavs])
                rows_fused.append([ferr[name] for name in FUSED_RULES])
    finally:
        if pool is not None:
            pool.shutdown()

    uav_arr = np.array(rows_uav)
    fused_arr = np.array(rows_fused)
    ids = tuple(u.id for u in uavs)
    uav_errors = {u: uav_arr[:, i] for i, u in enumerate(ids)}
    fused_errors = {name: fused_arr[:, i] for i, name in enumerate(FUSED_RULES)}
    return SimResult(
        seed=seed,
        scenario_digest=scenario_digest(scenario),
        t=np.array(rows_t),
        uav_ids=ids,
        uav_errors=uav_errors,
        fused_errors=fused_errors,
        uav_route_avg={u: _finite_mean(e) for u, e in uav_errors.items()},
        fused_route_avg={n: _finite_mean(e) for n, e in fused_errors.items()},
        envelope_min=_envelope(uav_arr, np.min),
        envelope_max=_envelope(uav_arr, np.max),
        records=records,
        fused_records=fused_records,
    )


@dataclass
class SweepResult:
    seeds: tuple
    runs: list
    mean: dict
    std: dict
    ratios: np.ndarray

    @property
    def ratio_mean(self) -> float:
        return float(np.mean(self.ratios))

    @property
    def ratio_std(self) -> float:
        return float(np.std(self.ratios))

    @property
    def ratio_median(self) -> float:
        return float(np.median(self.ratios))

    def median(self, scope: str) -> float:
        return float(np.median([r[scope] for r in self.runs]))


def run_sweep(scenario: Scenario, seeds, workers=None) -> SweepResult:
    """Run one simulation per seed and aggregate the route-average errors."""
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    runs, ratios = [], []
    for s in seeds:
        res = run_simulation(scenario, seed=s, workers=workers)
        runs.append(res.summary())
        ratios.append(res.improvement_ratio)
    scopes = list(runs[0])
    mean = {k: float(np.mean([r[k] for r in runs])) for k in scopes}
    std = {k: float(np.std([r[k] for r in runs])) for k in scopes}
    return SweepResult(seeds=seeds, runs=runs, mean=mean, std=std, ratios=np.array(ratios))

