"""Day-ahead planning against real-time operation, on one day or a sequence.

The comparison works the same way in both modes. A day (plus a look-ahead
tail) is reduced to a coarse grid: uniform hourly periods in CH mode, or the
same number of variable-duration periods from adjacent clustering in TA mode.
The commitment problem is solved on that grid, then the high-resolution day
is re-solved with the plan partially frozen: base units keep commitment and
dispatch, medium units keep commitment only, peak units stay free. The cost
difference between the two real-time outcomes is the value of the adaptive
grid. Rolling runs chain each day's terminal unit states into the next day's
initial conditions, independently per mode.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from datetime import date, timedelta
from io import StringIO

import csv

import numpy as np

from .aggregation import (
    HiResSeries,
    TimeGrid,
    cluster_adjacent,
    hourly_grid,
    normalize_features,
    reduce_series,
    singleton_grid,
)
from .ingestion import LoadedTrace
from .model import (
    Schedule,
    SystemInstance,
    ThermalUnit,
    build_uc_model,
    extract_schedule,
    operating_cost,
    pg_name,
    u_name,
)
from .solver import BackendConfig, solve

MODE_CH = "CH"
MODE_TA = "TA"
MODES = (MODE_CH, MODE_TA)

TECHNOLOGIES = ("wind", "solar", "base", "medium", "peak")


@dataclass(frozen=True)
class PowerSystem:
    """Generators and renewable fleet sizes, independent of any window."""

    units: tuple[ThermalUnit, ...]
    wind_capacity: float
    solar_capacity: float
    load_shed_cost: float

    def instance(self, periods) -> SystemInstance:
        return SystemInstance(
            units=self.units,
            wind_capacity=self.wind_capacity,
            solar_capacity=self.solar_capacity,
            load_shed_cost=self.load_shed_cost,
            periods=periods,
        )

    def with_units(self, units: tuple[ThermalUnit, ...]) -> "PowerSystem":
        return dataclasses.replace(self, units=tuple(units))


@dataclass(frozen=True)
class DayAheadPlan:
    """Commitment and dispatch solved on a reduced grid."""

    mode: str
    grid: TimeGrid
    commitment: np.ndarray
    dispatch: np.ndarray
    objective: float
    solve_time: float


@dataclass(frozen=True)
class UnitState:
    """Initial-condition snapshot for one unit at a day boundary."""

    u0: int
    hours_on0: float
    hours_off0: float
    p0: float


@dataclass(frozen=True)
class RealTimeResult:
    """High-resolution operation of one window under a plan's fixings.

    cost covers only the first day_periods periods (the look-ahead tail is
    planned but its cost belongs to the next day). terminal_states snapshot
    each unit at the end of that day, ready to seed the following one.
    """

    cost: float
    schedule: Schedule
    step_minutes: int
    day_periods: int
    terminal_states: dict[str, UnitState]
    objective: float
    solve_time: float


@dataclass(frozen=True)
class ComparisonReport:
    """One day's outcome under both modes. A nonempty warning marks a day
    that was skipped (costs are NaN then)."""

    date: str
    c_ch: float
    c_ta: float
    delta_pct: float
    shares_ch: dict[str, float]
    shares_ta: dict[str, float]
    solve_time_ch: float
    solve_time_ta: float
    warning: str = ""


def day_ahead_grid(
    series: HiResSeries,
    mode: str,
    features: str = "net_demand_only",
    wind_capacity: float = 0.0,
    solar_capacity: float = 0.0,
) -> TimeGrid:
    """Reduced grid for the planning stage: hourly in CH, clustered in TA.

    TA uses one cluster per hour of window on average, so both modes hand
    the solver the same number of periods.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    feats = normalize_features(series, features, wind_capacity, solar_capacity)
    if mode == MODE_CH:
        return hourly_grid(feats, series.step_minutes)
    target = round(series.horizon_hours)
    return cluster_adjacent(feats, target, series.step_minutes)


def run_day_ahead(
    system: PowerSystem,
    series: HiResSeries,
    mode: str,
    features: str = "net_demand_only",
    config: BackendConfig | None = None,
    label: str = "window",
) -> DayAheadPlan:
    """Solve the commitment problem on the reduced grid for one window."""
    grid = day_ahead_grid(series, mode, features, system.wind_capacity, system.solar_capacity)
    instance = system.instance(reduce_series(series, grid))
    model = build_uc_model(instance)
    result = solve(model, config)
    if result.status != "optimal":
        raise RuntimeError(f"day-ahead {mode} solve for {label} ended {result.status}: {result.message}")
    schedule = extract_schedule(instance, result.values)
    return DayAheadPlan(
        mode=mode,
        grid=grid,
        commitment=schedule.commitment,
        dispatch=schedule.dispatch,
        objective=result.objective,
        solve_time=result.wall_time,
    )


def fix_from_plan(
    plan: DayAheadPlan, units: tuple[ThermalUnit, ...], n_hi_periods: int
) -> dict[str, float]:
    """Freeze plan decisions onto the high-resolution grid, by flexibility.

    Base units carry commitment and dispatch into every member period,
    medium units carry commitment only, peak units nothing. Sample index i
    of the window is high-resolution period i+1.
    """
    covered = plan.grid.cluster_bounds[-1][1]
    if n_hi_periods > covered:
        raise ValueError(
            f"plan covers {covered} high-resolution periods, window has {n_hi_periods}"
        )
    owner = np.empty(covered, dtype=int)
    for k, (a, b) in enumerate(plan.grid.cluster_bounds):
        owner[a:b] = k
    fixings: dict[str, float] = {}
    for i, unit in enumerate(units):
        if unit.flex_class == "peak":
            continue
        for t in range(1, n_hi_periods + 1):
            k = owner[t - 1]
            fixings[u_name(unit.unit_id, t)] = float(plan.commitment[i, k])
            if unit.flex_class == "base":
                fixings[pg_name(unit.unit_id, t)] = float(plan.dispatch[i, k])
    return fixings


def _terminal_states(
    units: tuple[ThermalUnit, ...],
    schedule: Schedule,
    day_periods: int,
    step_minutes: int,
) -> dict[str, UnitState]:
    """Snapshot commitment streaks and output at the end of the day."""
    hours_per_period = step_minutes / 60.0
    states: dict[str, UnitState] = {}
    for i, unit in enumerate(units):
        row = schedule.commitment[i, :day_periods]
        u_end = int(row[-1])
        streak = 1
        while streak < day_periods and row[-1 - streak] == u_end:
            streak += 1
        hours = min(streak * hours_per_period, 24.0)
        if u_end:
            p_end = float(np.clip(schedule.dispatch[i, day_periods - 1], unit.pmin, unit.pmax))
            states[unit.unit_id] = UnitState(1, hours, 24.0, p_end)
        else:
            states[unit.unit_id] = UnitState(0, 24.0, hours, 0.0)
    return states


def run_real_time(
    system: PowerSystem,
    series: HiResSeries,
    fixings: dict[str, float],
    day_hours: float = 24.0,
    features: str = "net_demand_only",
    config: BackendConfig | None = None,
    label: str = "window",
) -> RealTimeResult:
    """Re-solve one window at full resolution under a plan's fixings.

    The model keeps the load-shed slack, so this stays feasible for any
    plan; rows fully pinned by fixings are dropped rather than enforced.
    """
    feats = normalize_features(series, features, system.wind_capacity, system.solar_capacity)
    grid = singleton_grid(feats, series.step_minutes)
    instance = system.instance(reduce_series(series, grid))
    model = build_uc_model(instance, fixings=fixings, prune_fixed_rows=True)
    result = solve(model, config)
    if result.status != "optimal":
        raise RuntimeError(
            f"real-time solve for {label} ended {result.status} despite load-shed slack: "
            f"{result.message}"
        )
    schedule = extract_schedule(instance, result.values)
    n = instance.n_periods
    day_periods = min(n, int(math.ceil(round(day_hours * 60.0 / series.step_minutes, 9))))
    cost = operating_cost(instance, schedule, slice(0, day_periods))
    return RealTimeResult(
        cost=cost,
        schedule=schedule,
        step_minutes=series.step_minutes,
        day_periods=day_periods,
        terminal_states=_terminal_states(system.units, schedule, day_periods, series.step_minutes),
        objective=result.objective,
        solve_time=result.wall_time,
    )


def cost_delta(c_ch: float, c_ta: float) -> float:
    """Relative saving of the adaptive schedule, in percent of the hourly cost."""
    if c_ch <= 0:
        raise ValueError(f"cost delta needs a positive reference cost, got {c_ch}")
    return 100.0 * (c_ch - c_ta) / c_ch


def generation_shares(result: RealTimeResult, system: PowerSystem) -> dict[str, float]:
    """Energy share per technology over the day, in percent of served energy."""
    sl = slice(0, result.day_periods)
    d = result.step_minutes / 60.0
    energy = dict.fromkeys(TECHNOLOGIES, 0.0)
    energy["wind"] = float(np.sum(result.schedule.p_wind[sl]) * d)
    energy["solar"] = float(np.sum(result.schedule.p_solar[sl]) * d)
    for i, unit in enumerate(system.units):
        energy[unit.flex_class] += float(np.sum(result.schedule.dispatch[i, sl]) * d)
    total = sum(energy.values())
    if total <= 0:
        raise ValueError("no energy served; shares are undefined")
    return {tech: 100.0 * energy[tech] / total for tech in TECHNOLOGIES}


def _run_one_mode(
    system: PowerSystem,
    window: HiResSeries,
    mode: str,
    day_hours: float,
    features: str,
    config: BackendConfig | None,
    label: str,
) -> tuple[DayAheadPlan, RealTimeResult]:
    plan = run_day_ahead(system, window, mode, features, config, label)
    fixings = fix_from_plan(plan, system.units, window.n_points)
    result = run_real_time(system, window, fixings, day_hours, features, config, label)
    return plan, result


def compare_day(
    system_ch: PowerSystem,
    system_ta: PowerSystem,
    window: HiResSeries,
    day_label: str,
    day_hours: float = 24.0,
    features: str = "net_demand_only",
    config: BackendConfig | None = None,
) -> tuple[ComparisonReport, RealTimeResult, RealTimeResult]:
    """Run both modes on one window and assemble the day's report."""
    plan_ch, rt_ch = _run_one_mode(system_ch, window, MODE_CH, day_hours, features, config, day_label)
    plan_ta, rt_ta = _run_one_mode(system_ta, window, MODE_TA, day_hours, features, config, day_label)
    if rt_ch.cost > 0:
        delta = cost_delta(rt_ch.cost, rt_ta.cost)
    else:
        delta = 0.0
    report = ComparisonReport(
        date=day_label,
        c_ch=rt_ch.cost,
        c_ta=rt_ta.cost,
        delta_pct=delta,
        shares_ch=generation_shares(rt_ch, system_ch),
        shares_ta=generation_shares(rt_ta, system_ta),
        solve_time_ch=plan_ch.solve_time + rt_ch.solve_time,
        solve_time_ta=plan_ta.solve_time + rt_ta.solve_time,
    )
    return report, rt_ch, rt_ta


def apply_states(
    units: tuple[ThermalUnit, ...], states: dict[str, UnitState]
) -> tuple[ThermalUnit, ...]:
    """New unit records with initial conditions taken from a day's end."""
    out = []
    for unit in units:
        s = states[unit.unit_id]
        out.append(
            dataclasses.replace(
                unit, u0=s.u0, hours_on0=s.hours_on0, hours_off0=s.hours_off0, p0=s.p0
            )
        )
    return tuple(out)


def _parse_date(value) -> date | None:
    if value is None or isinstance(value, date):
        return value
    return date.fromisoformat(value)


def run_rolling_horizon(
    system: PowerSystem,
    trace: LoadedTrace,
    lookahead_hours: float = 8.0,
    features: str = "net_demand_only",
    config: BackendConfig | None = None,
    start_date=None,
    end_date=None,
) -> list[ComparisonReport]:
    """Compare both modes over every complete midnight-to-midnight day.

    Each day is planned over its 24 hours plus a look-ahead tail (truncated
    to whole hours at the end of the trace). Terminal states chain into the
    next day separately per mode. Days without complete data, or outside the
    requested date range, produce warning records instead of results.
    """
    series = trace.series
    step = series.step_minutes
    per_hour = 60 // step
    per_day = 24 * per_hour
    lo_date = _parse_date(start_date)
    hi_date = _parse_date(end_date)
    if lookahead_hours < 0:
        raise ValueError("lookahead_hours must be nonnegative")

    offset_hours = series.start_offset_hours
    to_midnight = (24.0 - offset_hours) % 24.0
    skip = to_midnight * per_hour
    if abs(skip - round(skip)) > 1e-9:
        raise ValueError(
            f"trace starts {offset_hours} h past midnight, which the {step}-minute "
            "step cannot align to a day boundary"
        )
    first = int(round(skip))

    lookahead_periods = int(round(lookahead_hours * per_hour))
    lookahead_periods -= lookahead_periods % per_hour

    units_ch = system.units
    units_ta = system.units
    reports: list[ComparisonReport] = []
    day_start = first
    while day_start + per_day <= series.n_points:
        day = (trace.start + timedelta(minutes=day_start * step)).date()
        label = day.isoformat()
        day_start_next = day_start + per_day
        in_range = (lo_date is None or day >= lo_date) and (hi_date is None or day <= hi_date)
        if not in_range:
            day_start = day_start_next
            continue
        tail = min(lookahead_periods, series.n_points - day_start_next)
        tail -= tail % per_hour
        stop = day_start_next + tail
        window = HiResSeries(
            demand=series.demand[day_start:stop],
            wind_cf=series.wind_cf[day_start:stop],
            solar_cf=series.solar_cf[day_start:stop],
            step_minutes=step,
        )
        try:
            report, rt_ch, rt_ta = compare_day(
                system.with_units(units_ch),
                system.with_units(units_ta),
                window,
                label,
                day_hours=24.0,
                features=features,
                config=config,
            )
        except (RuntimeError, ValueError) as exc:
            reports.append(
                ComparisonReport(
                    date=label,
                    c_ch=math.nan,
                    c_ta=math.nan,
                    delta_pct=math.nan,
                    shares_ch={},
                    shares_ta={},
                    solve_time_ch=0.0,
                    solve_time_ta=0.0,
                    warning=f"day skipped: {exc}",
                )
            )
            day_start = day_start_next
            continue
        reports.append(report)
        units_ch = apply_states(units_ch, rt_ch.terminal_states)
        units_ta = apply_states(units_ta, rt_ta.terminal_states)
        day_start = day_start_next

    if first + per_day > series.n_points:
        reports.append(
            ComparisonReport(
                date=(trace.start + timedelta(minutes=first * step)).date().isoformat(),
                c_ch=math.nan,
                c_ta=math.nan,
                delta_pct=math.nan,
                shares_ch={},
                shares_ta={},
                solve_time_ch=0.0,
                solve_time_ta=0.0,
                warning="day skipped: trace shorter than one full day",
            )
        )
    return reports


CSV_COLUMNS = (
    "date",
    "c_ch",
    "c_ta",
    "delta_pct",
    "share_wind_ch",
    "share_solar_ch",
    "share_base_ch",
    "share_medium_ch",
    "share_peak_ch",
    "share_wind_ta",
    "share_solar_ta",
    "share_base_ta",
    "share_medium_ta",
    "share_peak_ta",
    "solve_time_ch",
    "solve_time_ta",
)


def reports_to_csv(reports: list[ComparisonReport]) -> str:
    """Render solved days as CSV; warning records carry no numbers and are left out."""
    buf = StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rep in reports:
        if rep.warning:
            continue
        row = [rep.date, f"{rep.c_ch:.2f}", f"{rep.c_ta:.2f}", f"{rep.delta_pct:.4f}"]
        row.extend(f"{rep.shares_ch[tech]:.4f}" for tech in TECHNOLOGIES)
        row.extend(f"{rep.shares_ta[tech]:.4f}" for tech in TECHNOLOGIES)
        row.append(f"{rep.solve_time_ch:.3f}")
        row.append(f"{rep.solve_time_ta:.3f}")
        writer.writerow(row)
    return buf.getvalue()
