"""Command-line front end: clustering, planning, comparison and the example.

Exit codes: 0 on success, 1 when a golden assertion fails, 2 on input errors
(missing files, malformed configs, bad arguments).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .aggregation import HiResSeries, cluster_adjacent, normalize_features
from .ingestion import (
    LoadedTrace,
    ScenarioConfig,
    build_portfolio,
    compute_installed_capacity,
    illustrative_case,
    load_scenario,
    load_timeseries,
)
from .simulation import (
    MODE_CH,
    MODE_TA,
    ComparisonReport,
    DayAheadPlan,
    PowerSystem,
    RealTimeResult,
    fix_from_plan,
    reports_to_csv,
    run_day_ahead,
    run_real_time,
    run_rolling_horizon,
)

GOLDEN_COST_CH = 18500.0
GOLDEN_COST_TA = 11500.0
GOLDEN_DELTA = 37.84

SUMMARY_COLUMNS = (
    "days",
    "c_ch_total",
    "c_ta_total",
    "delta_pct",
    "n_ta_lt_ch",
    "n_ta_eq_ch",
    "n_ta_gt_ch",
    "n_skipped",
)


def _scaled_trace(config: ScenarioConfig) -> LoadedTrace:
    trace = load_timeseries(config.data_path, config.step_minutes)
    if config.demand_scale == 1.0:
        return trace
    series = trace.series
    scaled = HiResSeries(
        demand=series.demand * config.demand_scale,
        wind_cf=series.wind_cf,
        solar_cf=series.solar_cf,
        step_minutes=series.step_minutes,
        start_offset_hours=series.start_offset_hours,
    )
    return LoadedTrace(series=scaled, start=trace.start)


def _system_for(config: ScenarioConfig, trace: LoadedTrace) -> PowerSystem:
    """Portfolio plus renewable fleets sized over the whole trace."""
    series = trace.series
    wind_cap = compute_installed_capacity(config.alpha_wind, series.demand, series.wind_cf)
    solar_cap = compute_installed_capacity(config.alpha_solar, series.demand, series.solar_cf)
    return PowerSystem(
        units=build_portfolio(config.portfolio),
        wind_capacity=wind_cap,
        solar_capacity=solar_cap,
        load_shed_cost=config.resolved_shed_cost(),
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _effective(config: ScenarioConfig, args) -> ScenarioConfig:
    """Apply command-line overrides on top of the config file."""
    updates = {}
    if getattr(args, "gap", None) is not None:
        updates["gap"] = args.gap
    if getattr(args, "lookahead_hours", None) is not None:
        updates["lookahead_hours"] = args.lookahead_hours
    return dataclasses.replace(config, **updates) if updates else config


def cmd_cluster(args) -> int:
    config = _effective(load_scenario(args.config), args)
    trace = _scaled_trace(config)
    system = _system_for(config, trace)
    series = trace.series
    feats = normalize_features(
        series, config.features, system.wind_capacity, system.solar_capacity
    )
    target = args.target if args.target is not None else round(series.horizon_hours)
    grid = cluster_adjacent(feats, target, series.step_minutes)
    out = _out_dir(args)
    with open(out / "durations.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["period", "start_sample", "stop_sample", "duration_h"])
        for k, ((a, b), dur) in enumerate(zip(grid.cluster_bounds, grid.durations), start=1):
            writer.writerow([k, a, b, f"{dur:g}"])
    feature_names = (
        ["net_demand"] if config.features == "net_demand_only" else ["demand", "wind_cf", "solar_cf"]
    )
    with open(out / "centroids.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["period"] + feature_names)
        for k, row in enumerate(grid.centroids, start=1):
            writer.writerow([k] + [f"{v:.6f}" for v in np.atleast_1d(row)])
    print(f"wrote {len(grid.cluster_bounds)} periods to {out / 'durations.csv'}")
    return 0


def _first_day_window(trace: LoadedTrace, lookahead_hours: float) -> HiResSeries:
    series = trace.series
    step = series.step_minutes
    per_hour = 60 // step
    skip = ((24.0 - series.start_offset_hours) % 24.0) * per_hour
    if abs(skip - round(skip)) > 1e-9:
        raise ValueError("trace start is not aligned to the sampling step")
    first = int(round(skip))
    per_day = 24 * per_hour
    if first + per_day > series.n_points:
        raise ValueError("trace does not contain one complete midnight-to-midnight day")
    tail = min(int(round(lookahead_hours * per_hour)), series.n_points - first - per_day)
    tail -= tail % per_hour
    stop = first + per_day + tail
    return HiResSeries(
        demand=series.demand[first:stop],
        wind_cf=series.wind_cf[first:stop],
        solar_cf=series.solar_cf[first:stop],
        step_minutes=step,
    )


def _write_plan(path: Path, system: PowerSystem, plan: DayAheadPlan) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["period", "duration_h", "unit_id", "commit", "dispatch_mw"])
        for k, dur in enumerate(plan.grid.durations, start=1):
            for i, unit in enumerate(system.units):
                writer.writerow(
                    [
                        k,
                        f"{dur:g}",
                        unit.unit_id,
                        int(plan.commitment[i, k - 1]),
                        f"{plan.dispatch[i, k - 1]:.3f}",
                    ]
                )


def cmd_plan(args) -> int:
    config = _effective(load_scenario(args.config), args)
    trace = _scaled_trace(config)
    system = _system_for(config, trace)
    window = _first_day_window(trace, config.lookahead_hours)
    out = _out_dir(args)
    modes = {"ch": [MODE_CH], "ta": [MODE_TA], "both": [MODE_CH, MODE_TA]}[args.mode]
    for mode in modes:
        plan = run_day_ahead(
            system, window, mode, config.features, config.solver_config(), label="day 1"
        )
        path = out / f"plan_{mode.lower()}.csv"
        _write_plan(path, system, plan)
        print(f"{mode}: {len(plan.grid.durations)} periods, objective {plan.objective:.2f}, {path}")
    return 0


def _summary_counts(reports: list[ComparisonReport]) -> dict[str, float]:
    solved = [r for r in reports if not r.warning]
    lt = eq = gt = 0
    for r in solved:
        scale = max(1.0, abs(r.c_ch))
        if abs(r.c_ta - r.c_ch) <= 1e-6 * scale:
            eq += 1
        elif r.c_ta < r.c_ch:
            lt += 1
        else:
            gt += 1
    c_ch_total = sum(r.c_ch for r in solved)
    c_ta_total = sum(r.c_ta for r in solved)
    delta = 100.0 * (c_ch_total - c_ta_total) / c_ch_total if c_ch_total > 0 else 0.0
    return {
        "days": len(solved),
        "c_ch_total": c_ch_total,
        "c_ta_total": c_ta_total,
        "delta_pct": delta,
        "n_ta_lt_ch": lt,
        "n_ta_eq_ch": eq,
        "n_ta_gt_ch": gt,
        "n_skipped": len(reports) - len(solved),
    }


def _write_summary(path: Path, summary: dict[str, float]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_COLUMNS)
        writer.writerow(
            [
                summary["days"],
                f"{summary['c_ch_total']:.2f}",
                f"{summary['c_ta_total']:.2f}",
                f"{summary['delta_pct']:.4f}",
                summary["n_ta_lt_ch"],
                summary["n_ta_eq_ch"],
                summary["n_ta_gt_ch"],
                summary["n_skipped"],
            ]
        )


def _run_comparison(config: ScenarioConfig) -> tuple[list[ComparisonReport], dict[str, float]]:
    trace = _scaled_trace(config)
    system = _system_for(config, trace)
    reports = run_rolling_horizon(
        system,
        trace,
        lookahead_hours=config.lookahead_hours,
        features=config.features,
        config=config.solver_config(),
        start_date=config.start_date,
        end_date=config.end_date,
    )
    return reports, _summary_counts(reports)


def cmd_compare(args) -> int:
    config = _effective(load_scenario(args.config), args)
    reports, summary = _run_comparison(config)
    for rep in reports:
        if rep.warning:
            print(f"{rep.date}: {rep.warning}", file=sys.stderr)
    if summary["days"] == 0:
        print("error: no day could be compared", file=sys.stderr)
        return 2
    out = _out_dir(args)
    (out / "comparison.csv").write_text(reports_to_csv(reports))
    _write_summary(out / "summary.csv", summary)
    print(
        f"{summary['days']} days: delta {summary['delta_pct']:.2f}%, "
        f"TA<CH {summary['n_ta_lt_ch']}, TA=CH {summary['n_ta_eq_ch']}, "
        f"TA>CH {summary['n_ta_gt_ch']}"
    )
    return 0


def cmd_sweep(args) -> int:
    configs = []
    for path in args.configs:
        configs.append((Path(path).stem, _effective(load_scenario(path), args)))
    results: list[tuple[str, list[ComparisonReport], dict[str, float]]] = []
    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            futures = [pool.submit(_run_comparison, cfg) for _, cfg in configs]
            for (name, _), future in zip(configs, futures):
                reports, summary = future.result()
                results.append((name, reports, summary))
    else:
        for name, cfg in configs:
            reports, summary = _run_comparison(cfg)
            results.append((name, reports, summary))
    out = _out_dir(args)
    with open(out / "sweep_summary.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(("scenario",) + SUMMARY_COLUMNS)
        for name, _, summary in results:
            writer.writerow(
                [
                    name,
                    summary["days"],
                    f"{summary['c_ch_total']:.2f}",
                    f"{summary['c_ta_total']:.2f}",
                    f"{summary['delta_pct']:.4f}",
                    summary["n_ta_lt_ch"],
                    summary["n_ta_eq_ch"],
                    summary["n_ta_gt_ch"],
                    summary["n_skipped"],
                ]
            )
    for name, reports, _ in results:
        (out / f"comparison_{name}.csv").write_text(reports_to_csv(reports))
    print(f"swept {len(results)} scenarios into {out / 'sweep_summary.csv'}")
    return 0


def _class_row(system: PowerSystem, matrix: np.ndarray, flex: str, col: int) -> float:
    return float(
        sum(matrix[i, col] for i, u in enumerate(system.units) if u.flex_class == flex)
    )


def _plan_block(title: str, system: PowerSystem, plan: DayAheadPlan) -> list[str]:
    lines = [title, "  period  dur_h   base_mw  medium_mw  peak_mw"]
    for k, dur in enumerate(plan.grid.durations):
        lines.append(
            f"  {k + 1:>6}  {dur:5.1f}  {_class_row(system, plan.dispatch, 'base', k):8.1f}"
            f"  {_class_row(system, plan.dispatch, 'medium', k):9.1f}"
            f"  {_class_row(system, plan.dispatch, 'peak', k):7.1f}"
        )
    return lines


def _operation_block(title: str, system: PowerSystem, rt: RealTimeResult) -> list[str]:
    lines = [
        title,
        "  period  dur_h   base_mw  medium_mw  peak_mw  solar_mw  shed_mw  spill_mw",
    ]
    dur = rt.step_minutes / 60.0
    sched = rt.schedule
    for t in range(rt.day_periods):
        lines.append(
            f"  {t + 1:>6}  {dur:5.1f}  {_class_row(system, sched.dispatch, 'base', t):8.1f}"
            f"  {_class_row(system, sched.dispatch, 'medium', t):9.1f}"
            f"  {_class_row(system, sched.dispatch, 'peak', t):7.1f}"
            f"  {sched.p_solar[t]:8.1f}  {sched.shed[t]:7.1f}"
            f"  {sched.solar_spill[t] + sched.wind_spill[t]:8.1f}"
        )
    return lines


def cmd_reproduce_example(args) -> int:
    case = illustrative_case()
    system = PowerSystem(
        units=case.units,
        wind_capacity=case.wind_capacity,
        solar_capacity=case.solar_capacity,
        load_shed_cost=case.load_shed_cost,
    )
    series = case.series
    lines: list[str] = ["Teaching example: 6 x 30-minute periods", ""]
    results = {}
    for mode, name in ((MODE_CH, "Hourly"), (MODE_TA, "Adaptive")):
        plan = run_day_ahead(system, series, mode, label="example")
        rt = run_real_time(
            system, series, fix_from_plan(plan, system.units, series.n_points), label="example"
        )
        results[mode] = rt
        lines.extend(_plan_block(f"{name} day-ahead plan:", system, plan))
        lines.append("")
        lines.extend(_operation_block(f"{name} real-time operation:", system, rt))
        lines.append("")
    c_ch = results[MODE_CH].cost
    c_ta = results[MODE_TA].cost
    delta = 100.0 * (c_ch - c_ta) / c_ch
    lines.append(
        f"Costs: hourly {c_ch:.2f} EUR, adaptive {c_ta:.2f} EUR, saving {delta:.2f}%"
    )
    print("\n".join(lines))
    failures = []
    if abs(c_ch - GOLDEN_COST_CH) > 1e-6 * GOLDEN_COST_CH:
        failures.append(f"hourly cost {c_ch:.6f} differs from expected {GOLDEN_COST_CH}")
    if abs(c_ta - GOLDEN_COST_TA) > 1e-6 * GOLDEN_COST_TA:
        failures.append(f"adaptive cost {c_ta:.6f} differs from expected {GOLDEN_COST_TA}")
    if round(delta, 2) != GOLDEN_DELTA:
        failures.append(f"saving {delta:.4f}% differs from expected {GOLDEN_DELTA}%")
    for failure in failures:
        print(f"assertion failed: {failure}", file=sys.stderr)
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tauc",
        description="Compare hourly and time-adaptive unit commitment schedules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mode_flag=False):
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--gap", type=float, default=None, help="override MIP gap")
        p.add_argument(
            "--lookahead-hours", type=float, default=None, help="override look-ahead window"
        )
        if mode_flag:
            p.add_argument("--mode", choices=("ch", "ta", "both"), default="both")

    p_cluster = sub.add_parser("cluster", help="reduce a trace to a coarse grid")
    common(p_cluster)
    p_cluster.add_argument(
        "--target", type=int, default=None, help="number of periods (default: one per hour)"
    )
    p_cluster.set_defaults(func=cmd_cluster)

    p_plan = sub.add_parser("plan", help="day-ahead plan for the first complete day")
    common(p_plan, mode_flag=True)
    p_plan.set_defaults(func=cmd_plan)

    p_compare = sub.add_parser("compare", help="rolling day-by-day comparison")
    common(p_compare)
    p_compare.set_defaults(func=cmd_compare)

    p_sweep = sub.add_parser("sweep", help="compare several scenarios")
    p_sweep.add_argument("configs", nargs="+", help="scenario JSON files")
    p_sweep.add_argument("--out", default=".", help="output directory")
    p_sweep.add_argument("--gap", type=float, default=None)
    p_sweep.add_argument("--lookahead-hours", type=float, default=None)
    p_sweep.add_argument("--workers", type=int, default=1, help="parallel scenario workers")
    p_sweep.set_defaults(func=cmd_sweep)

    p_repro = sub.add_parser(
        "reproduce-example", help="print and check the built-in teaching example"
    )
    p_repro.set_defaults(func=cmd_reproduce_example)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
