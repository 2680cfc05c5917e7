"""Command line: ``coopsdf run | sweep | validate``.

Exit codes: 0 success, 2 input error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import file_digest, load_scenario
from .harness import resolve_workers, rms_error, run_simulation, run_sweep
from .scenario import ScenarioError, max_doppler, validate_scenario

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RUNTIME = 3

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return value


def _fmt(x: float, digits: int = 6) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{x:.{digits}f}"


def _finite_rms(series) -> float:
    # windows without an estimate carry NaN; RMS is over the scored ones
    e = np.asarray(series, dtype=float)
    e = e[np.isfinite(e)]
    return rms_error(e) if e.size else float("nan")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _load_checked(path):
    """Parse and validate a scenario; raise with every problem found."""
    sc = load_scenario(path)
    resolve_workers()  # a malformed SDF_SIM_THREADS is an input error too
    problems = validate_scenario(sc)
    if problems:
        raise ScenarioError(problems)
    return sc


def _report_input_error(exc) -> int:
    if isinstance(exc, ScenarioError):
        print("scenario is invalid:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INPUT


def _write_manifest(out: Path, scenario_path, seeds, files):
    manifest = {
        "scenario": str(scenario_path),
        "seeds": list(seeds),
        "output_dir": str(out),
        "files": sorted(files),
        "tool_version": __version__,
        "scenario_digest": file_digest(scenario_path),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def cmd_run(scenario_path, seed, out_dir) -> int:
    try:
        sc = _load_checked(scenario_path)
    except (ValueError, OSError) as exc:
        return _report_input_error(exc)
    seed = sc.seed if seed is None else seed
    try:
        res = run_simulation(sc, seed=seed)
    except Exception as exc:  # noqa: BLE001 - any failure inside the run maps to exit 3
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "per_uav_errors.csv",
        ["t_s", "uav_id", "error_m", "condition_true", "condition_classified"],
        [
            [_fmt(r.t, 3), r.uav_id, _fmt(r.error_m), r.condition_true, r.condition_classified]
            for r in res.records
        ],
    )
    _write_csv(
        out / "fused_errors.csv",
        ["t_s", "rule", "error_m", "n_contributors"],
        [[_fmt(r.t, 3), r.rule, _fmt(r.error_m), r.n_contributors] for r in res.fused_records],
    )
    _write_csv(
        out / "doppler_curves.csv",
        ["t_s", "uav_id", "f_d_hat_hz", "f_d_true_hz", "mode"],
        [
            [_fmt(r.t, 3), r.uav_id, _fmt(r.f_d_hat), _fmt(r.f_d_true), r.mode]
            for r in res.records
        ],
    )
    rows = [
        [f"uav{u}", _fmt(res.uav_route_avg[u]), _fmt(_finite_rms(res.uav_errors[u]))]
        for u in res.uav_ids
    ]
    rows += [
        [name, _fmt(res.fused_route_avg[name]), _fmt(_finite_rms(res.fused_errors[name]))]
        for name in res.fused_errors
    ]
    _write_csv(out / "summary.csv", ["scope", "route_avg_error_m", "rms_error_m"], rows)
    files = ["per_uav_errors.csv", "fused_errors.csv", "doppler_curves.csv", "summary.csv"]
    _write_manifest(out, scenario_path, [seed], files + ["manifest.json"])
    for name, value in res.summary().items():
        print(f"{name:>12s}  route-average error {value:9.2f} m")
    return EXIT_OK


def cmd_sweep(scenario_path, n_seeds, base_seed, out_dir) -> int:
    if n_seeds < 1:
        print("error: --seeds must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        sc = _load_checked(scenario_path)
    except (ValueError, OSError) as exc:
        return _report_input_error(exc)
    base = sc.seed if base_seed is None else base_seed
    seeds = [(base + i) % 2**64 for i in range(n_seeds)]
    try:
        sw = run_sweep(sc, seeds)
    except Exception as exc:  # noqa: BLE001
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scopes = list(sw.runs[0])
    rows = []
    for scope in scopes:
        rows += [[s, scope, _fmt(run[scope])] for s, run in zip(sw.seeds, sw.runs)]
    rows += [[s, "improvement_ratio", _fmt(r)] for s, r in zip(sw.seeds, sw.ratios)]
    for scope in scopes:
        rows.append(["mean", scope, _fmt(sw.mean[scope])])
        rows.append(["std", scope, _fmt(sw.std[scope])])
    rows.append(["mean", "improvement_ratio", _fmt(sw.ratio_mean)])
    rows.append(["std", "improvement_ratio", _fmt(sw.ratio_std)])
    rows.append(["median", "improvement_ratio", _fmt(sw.ratio_median)])
    _write_csv(out / "sweep_summary.csv", ["seed", "rule_or_uav", "route_avg_error_m"], rows)
    _write_manifest(out, scenario_path, seeds, ["sweep_summary.csv", "manifest.json"])
    print(
        f"{len(seeds)} seeds: arithmetic {sw.mean['arithmetic']:.2f} m, "
        f"weighted {sw.mean['weighted']:.2f} m, improvement ratio "
        f"{sw.ratio_mean:.2f} +/- {sw.ratio_std:.2f} (median {sw.ratio_median:.2f})"
    )
    return EXIT_OK


def cmd_validate(scenario_path) -> int:
    try:
        sc = _load_checked(scenario_path)
    except (ValueError, OSError) as exc:
        return _report_input_error(exc)
    f0 = sc.emitter.carrier_frequency_f0
    worst = 0.0
    for uav in sc.uavs:
        fd = max(max_doppler(f0, s.speed_v) for s in uav.trajectory)
        worst = max(worst, fd)
        print(f"uav {uav.id}: f_Dmax = {fd:.3f} Hz, {len(uav.trajectory)} segment(s)")
    print(f"sample rate {sc.sample_rate:g} Hz; Nyquist margin {sc.sample_rate / (2.0 * worst):.2f}x")
    print(f"{sc.n_windows} windows of {sc.window_duration:g} s; scenario OK")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="coopsdf", description="Cooperative Doppler emitter localization simulator")
    p.add_argument("--version", action="version", version=f"coopsdf {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="simulate one seed and write CSV series")
    r.add_argument("--scenario", required=True)
    r.add_argument("--seed", type=_u64)
    r.add_argument("--out", required=True)

    s = sub.add_parser("sweep", help="Monte Carlo over consecutive seeds")
    s.add_argument("--scenario", required=True)
    s.add_argument("--seeds", type=int, required=True)
    s.add_argument("--base-seed", type=_u64)
    s.add_argument("--out", required=True)

    v = sub.add_parser("validate", help="check a scenario without running it")
    v.add_argument("--scenario", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.command == "run":
        return cmd_run(args.scenario, args.seed, args.out)
    if args.command == "sweep":
        return cmd_sweep(args.scenario, args.seeds, args.base_seed, args.out)
    return cmd_validate(args.scenario)


if __name__ == "__main__":
    sys.exit(main())
