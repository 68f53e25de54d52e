"""Loading of system data: traces, generator portfolios and scenario configs.

A trace is a CSV of timestamped demand and renewable capacity factors on a
uniform step. Portfolios are either one of the built-in generator sets or a
user CSV. Scenario configs are JSON documents that bundle a trace, a
portfolio and run settings; paths inside a config resolve relative to the
config file so a scenario directory can be moved as a whole.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .aggregation import FEATURE_SELECTORS, HiResSeries
from .model import ThermalUnit
from .solver import BackendConfig

PORTFOLIO_IDS = ("example6", "study13", "spanish70")

TRACE_HEADER = ("timestamp", "demand_mw", "wind_cf", "solar_cf")

CONFIG_STEPS = (5, 10, 30, 60)


@dataclass(frozen=True)
class LoadedTrace:
    """A high-resolution series together with the UTC instant it starts at.

    The series itself only knows its offset from midnight; the start datetime
    is what lets a rolling run name calendar days.
    """

    series: HiResSeries
    start: datetime


def _parse_timestamp(raw: str, line_no: int) -> datetime:
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        stamp = datetime.fromisoformat(text)
    except ValueError:
        raise ValueError(f"line {line_no}: cannot parse timestamp {raw!r}") from None
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return stamp.astimezone(timezone.utc)


def _parse_float(raw: str, column: str, line_no: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"line {line_no}: {column} value {raw!r} is not a number") from None
    if not math.isfinite(value):
        raise ValueError(f"line {line_no}: {column} value {raw!r} is not finite")
    return value


def load_timeseries(path: str | Path, step_minutes: int) -> LoadedTrace:
    """Read a trace CSV and validate it against the expected uniform step.

    The header must be exactly timestamp,demand_mw,wind_cf,solar_cf.
    Timestamps are ISO 8601; a trailing Z and naive stamps both mean UTC.
    Errors carry the 1-based line number of the offending row.
    """
    path = Path(path)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file is empty") from None
        if tuple(cell.strip() for cell in header) != TRACE_HEADER:
            raise ValueError(
                f"{path} line 1: header must be {','.join(TRACE_HEADER)}, "
                f"got {','.join(header)}"
            )
        stamps: list[datetime] = []
        demand: list[float] = []
        wind: list[float] = []
        solar: list[float] = []
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise ValueError(f"{path} line {line_no}: expected 4 fields, got {len(row)}")
            stamps.append(_parse_timestamp(row[0], line_no))
            demand.append(_parse_float(row[1], "demand_mw", line_no))
            wind.append(_parse_float(row[2], "wind_cf", line_no))
            solar.append(_parse_float(row[3], "solar_cf", line_no))
            if demand[-1] < 0:
                raise ValueError(f"{path} line {line_no}: demand_mw must be nonnegative")
            for column, value in (("wind_cf", wind[-1]), ("solar_cf", solar[-1])):
                if not 0.0 <= value <= 1.0:
                    raise ValueError(f"{path} line {line_no}: {column} must lie in [0, 1]")
    if not stamps:
        raise ValueError(f"{path}: no data rows")
    step = timedelta(minutes=step_minutes)
    for i in range(1, len(stamps)):
        if stamps[i] - stamps[i - 1] != step:
            raise ValueError(
                f"{path} line {i + 2}: expected timestamp "
                f"{stamps[i - 1] + step:%Y-%m-%dT%H:%M:%SZ}, got "
                f"{stamps[i]:%Y-%m-%dT%H:%M:%SZ}"
            )
    start = stamps[0]
    offset = start.hour + start.minute / 60.0 + start.second / 3600.0
    series = HiResSeries(
        demand=np.array(demand),
        wind_cf=np.array(wind),
        solar_cf=np.array(solar),
        step_minutes=step_minutes,
        start_offset_hours=offset,
    )
    return LoadedTrace(series=series, start=start)


def write_timeseries(path: str | Path, series: HiResSeries, start: datetime) -> None:
    """Write a trace CSV that load_timeseries reads back bit-for-bit.

    Floats are written with repr so the round trip is exact.
    """
    if start.tzinfo is None:
        start = start.replace(tzinfo=timezone.utc)
    start = start.astimezone(timezone.utc)
    step = timedelta(minutes=series.step_minutes)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRACE_HEADER)
        for i in range(series.n_points):
            stamp = start + i * step
            writer.writerow(
                [
                    f"{stamp:%Y-%m-%dT%H:%M:%SZ}",
                    repr(float(series.demand[i])),
                    repr(float(series.wind_cf[i])),
                    repr(float(series.solar_cf[i])),
                ]
            )


def compute_installed_capacity(alpha: float, demand: np.ndarray, cf: np.ndarray) -> float:
    """Size a renewable fleet so its energy is a target share of demand energy.

    Returns the installed capacity P such that sum(cf * P) == alpha *
    sum(demand) over the sizing window. alpha is a fraction of demand energy
    in [0, 1]; alpha == 0 means no fleet at all.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if alpha == 0.0:
        return 0.0
    demand = np.asarray(demand, dtype=float)
    cf = np.asarray(cf, dtype=float)
    cf_total = float(cf.sum())
    if cf_total <= 0.0:
        raise ValueError("cannot size a fleet with zero capacity factors everywhere")
    return float(alpha * demand.sum() / cf_total)


def default_shed_cost(portfolio: str) -> float:
    """Value of lost load paired with a built-in portfolio, in currency/MWh."""
    if portfolio == "example6":
        return 100.0
    return 10000.0


def _example6() -> tuple[ThermalUnit, ...]:
    base = [
        ThermalUnit(
            unit_id=f"b{i}",
            flex_class="base",
            pmin=200.0,
            pmax=200.0,
            marginal_cost=10.0,
            u0=1,
            hours_on0=24.0,
            p0=200.0,
        )
        for i in range(1, 5)
    ]
    medium = ThermalUnit(
        unit_id="m1", flex_class="medium", pmin=50.0, pmax=100.0, marginal_cost=30.0
    )
    peak = ThermalUnit(
        unit_id="p1", flex_class="peak", pmin=0.0, pmax=50.0, marginal_cost=50.0
    )
    return (*base, medium, peak)


# unit_id: (flex_class, pmin, pmax, ramp, min_up/min_down, startup_cost, marginal_cost)
_STUDY13_ROWS = {
    "g1": ("base", 200.0, 400.0, 120.0, 9.0, 1000.0, 20.0),
    "g2": ("base", 200.0, 400.0, 130.0, 8.5, 1000.0, 21.0),
    "g3": ("base", 200.0, 400.0, 140.0, 8.0, 1000.0, 22.0),
    "g4": ("medium", 100.0, 300.0, 105.0, 5.0, 800.0, 50.0),
    "g5": ("medium", 100.0, 300.0, 120.0, 4.7, 800.0, 51.0),
    "g6": ("medium", 100.0, 300.0, 135.0, 4.3, 800.0, 52.0),
    "g7": ("medium", 100.0, 300.0, 150.0, 4.0, 800.0, 53.0),
    "g8": ("peak", 0.0, 250.0, 125.0, 0.0, 500.0, 80.0),
    "g9": ("peak", 0.0, 250.0, 130.0, 0.0, 500.0, 81.0),
    "g10": ("peak", 0.0, 250.0, 135.0, 0.0, 500.0, 82.0),
    "g11": ("peak", 0.0, 250.0, 140.0, 0.0, 500.0, 83.0),
    "g12": ("peak", 0.0, 250.0, 145.0, 0.0, 500.0, 84.0),
    "g13": ("peak", 0.0, 250.0, 150.0, 0.0, 500.0, 85.0),
}


def _initial_state(flex_class: str, pmin: float) -> dict:
    """Base units start the horizon online at minimum; everything else is cold."""
    if flex_class == "base":
        return {"u0": 1, "hours_on0": 24.0, "p0": pmin}
    return {"u0": 0, "hours_off0": 24.0}


def _study13() -> tuple[ThermalUnit, ...]:
    units = []
    for unit_id, row in _STUDY13_ROWS.items():
        flex_class, pmin, pmax, ramp, min_time, su_cost, cost = row
        units.append(
            ThermalUnit(
                unit_id=unit_id,
                flex_class=flex_class,
                pmin=pmin,
                pmax=pmax,
                marginal_cost=cost,
                startup_cost=su_cost,
                ramp_up=ramp,
                ramp_down=ramp,
                min_up=min_time,
                min_down=min_time,
                **_initial_state(flex_class, pmin),
            )
        )
    return tuple(units)


def _spread(lo: float, hi: float, n: int) -> np.ndarray:
    """Evenly spaced values over a published range, rounded to tame the floats."""
    return np.round(np.linspace(lo, hi, n), 6)


def _spanish70() -> tuple[ThermalUnit, ...]:
    units: list[ThermalUnit] = []
    classes = [
        ("base", 8, 500.0, 1000.0, 3000.0, _spread(7.5, 9.0, 8), 2000.0, _spread(20.0, 25.0, 8)),
        ("medium", 12, 400.0, 800.0, 4800.0, _spread(4.0, 5.0, 12), 1000.0, _spread(50.0, 55.0, 12)),
        ("peak", 50, 0.0, 500.0, 4500.0, np.zeros(50), 500.0, _spread(80.0, 90.0, 50)),
    ]
    index = 1
    for flex_class, count, pmin, pmax, ramp, min_times, su_cost, costs in classes:
        for i in range(count):
            units.append(
                ThermalUnit(
                    unit_id=f"g{index}",
                    flex_class=flex_class,
                    pmin=pmin,
                    pmax=pmax,
                    marginal_cost=float(costs[i]),
                    startup_cost=su_cost,
                    ramp_up=ramp,
                    ramp_down=ramp,
                    min_up=float(min_times[i]),
                    min_down=float(min_times[i]),
                    **_initial_state(flex_class, pmin),
                )
            )
            index += 1
    return tuple(units)


PORTFOLIO_HEADER = (
    "unit_id",
    "flex_class",
    "pmin",
    "pmax",
    "marginal_cost",
    "startup_cost",
    "ramp_up",
    "ramp_down",
    "min_up",
    "min_down",
)


def _read_portfolio_csv(path: Path) -> tuple[ThermalUnit, ...]:
    """Read generators from a CSV with the PORTFOLIO_HEADER columns.

    Empty ramp cells mean not ramp limited. Initial state follows the same
    rule as the built-in sets: base units online at minimum, the rest cold.
    """
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file is empty") from None
        if tuple(cell.strip() for cell in header) != PORTFOLIO_HEADER:
            raise ValueError(
                f"{path} line 1: header must be {','.join(PORTFOLIO_HEADER)}"
            )
        units: list[ThermalUnit] = []
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(PORTFOLIO_HEADER):
                raise ValueError(
                    f"{path} line {line_no}: expected {len(PORTFOLIO_HEADER)} fields,"
                    f" got {len(row)}"
                )
            unit_id = row[0].strip()
            flex_class = row[1].strip()
            numbers = []
            for column, cell in zip(PORTFOLIO_HEADER[2:], row[2:]):
                cell = cell.strip()
                if cell == "" and column in ("ramp_up", "ramp_down"):
                    numbers.append(None)
                    continue
                numbers.append(_parse_float(cell, column, line_no))
            pmin, pmax, cost, su_cost, ramp_up, ramp_down, min_up, min_down = numbers
            try:
                units.append(
                    ThermalUnit(
                        unit_id=unit_id,
                        flex_class=flex_class,
                        pmin=pmin,
                        pmax=pmax,
                        marginal_cost=cost,
                        startup_cost=su_cost,
                        ramp_up=ramp_up,
                        ramp_down=ramp_down,
                        min_up=min_up,
                        min_down=min_down,
                        **_initial_state(flex_class, pmin),
                    )
                )
            except ValueError as exc:
                raise ValueError(f"{path} line {line_no}: {exc}") from None
    if not units:
        raise ValueError(f"{path}: no generator rows")
    return tuple(units)


def build_portfolio(portfolio: str | Path) -> tuple[ThermalUnit, ...]:
    """Materialize a generator set from a built-in id or a CSV path."""
    if portfolio == "example6":
        return _example6()
    if portfolio == "study13":
        return _study13()
    if portfolio == "spanish70":
        return _spanish70()
    path = Path(portfolio)
    if path.suffix.lower() == ".csv":
        if not path.exists():
            raise ValueError(f"portfolio file not found: {path}")
        return _read_portfolio_csv(path)
    raise ValueError(
        f"unknown portfolio {str(portfolio)!r}; expected one of {PORTFOLIO_IDS} or a CSV path"
    )


@dataclass(frozen=True)
class CaseData:
    """A self-contained small system: trace plus generators plus fleet sizes."""

    series: HiResSeries
    units: tuple[ThermalUnit, ...]
    wind_capacity: float
    solar_capacity: float
    load_shed_cost: float


def illustrative_case() -> CaseData:
    """The six-period teaching example used by the reproduce-example command.

    Three hours in 30-minute steps: flat 500 MW demand with full solar for
    two hours, then solar fades while demand climbs to 850 MW. Solar fleet
    is 300 MW, no wind.
    """
    series = HiResSeries(
        demand=np.array([500.0, 500.0, 500.0, 500.0, 650.0, 850.0]),
        wind_cf=np.zeros(6),
        solar_cf=np.array([1.0, 1.0, 1.0, 1.0, 2.0 / 3.0, 0.0]),
        step_minutes=30,
    )
    return CaseData(
        series=series,
        units=_example6(),
        wind_capacity=0.0,
        solar_capacity=300.0,
        load_shed_cost=default_shed_cost("example6"),
    )


@dataclass(frozen=True)
class ScenarioConfig:
    """Run settings for a rolling comparison, loadable from JSON.

    data_path points at a trace CSV; portfolio is a built-in id or a CSV
    path. Relative paths in a config file resolve against the file's own
    directory. start_date / end_date (ISO dates, inclusive) clip the trace;
    None means use everything. shed_cost None means the portfolio default.
    """

    data_path: str
    step_minutes: int = 10
    demand_scale: float = 1.0
    alpha_wind: float = 0.2
    alpha_solar: float = 0.2
    portfolio: str = "study13"
    features: str = "net_demand_only"
    lookahead_hours: float = 8.0
    start_date: str | None = None
    end_date: str | None = None
    shed_cost: float | None = None
    backend: str = "auto"
    gap: float = 0.0
    time_limit: float | None = None
    threads: int | None = None

    def __post_init__(self) -> None:
        if self.step_minutes not in CONFIG_STEPS:
            raise ValueError(
                f"step_minutes must be one of {CONFIG_STEPS}, got {self.step_minutes}"
            )
        if not self.demand_scale > 0:
            raise ValueError(f"demand_scale must be positive, got {self.demand_scale}")
        for name in ("alpha_wind", "alpha_solar"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.features not in FEATURE_SELECTORS:
            raise ValueError(
                f"features must be one of {FEATURE_SELECTORS}, got {self.features!r}"
            )
        if self.lookahead_hours < 0:
            raise ValueError("lookahead_hours must be nonnegative")
        if self.gap < 0:
            raise ValueError("gap must be nonnegative")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive or None")
        if self.shed_cost is not None and self.shed_cost <= 0:
            raise ValueError("shed_cost must be positive or None")
        if not self.portfolio:
            raise ValueError("portfolio must be a built-in id or a CSV path")
        bounds = []
        for name in ("start_date", "end_date"):
            value = getattr(self, name)
            if value is None:
                bounds.append(None)
                continue
            try:
                bounds.append(date.fromisoformat(value))
            except ValueError:
                raise ValueError(f"{name} must be an ISO date, got {value!r}") from None
        if bounds[0] is not None and bounds[1] is not None and bounds[0] > bounds[1]:
            raise ValueError("start_date is after end_date")

    def solver_config(self) -> BackendConfig:
        return BackendConfig(
            backend=self.backend,
            gap=self.gap,
            time_limit=self.time_limit,
            threads=self.threads,
        )

    def resolved_shed_cost(self) -> float:
        if self.shed_cost is not None:
            return self.shed_cost
        return default_shed_cost(self.portfolio)


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Read a scenario config from JSON, resolving paths against its directory."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"{path}: unknown config keys: {', '.join(unknown)}")
    if "data_path" not in data:
        raise ValueError(f"{path}: config is missing data_path")
    base = path.parent
    data["data_path"] = str((base / data["data_path"]).resolve())
    portfolio = data.get("portfolio")
    if portfolio is not None and portfolio not in PORTFOLIO_IDS:
        data["portfolio"] = str((base / portfolio).resolve())
    return ScenarioConfig(**data)


def scenario_to_json(config: ScenarioConfig) -> str:
    """Serialize a config to JSON with stable key order."""
    return json.dumps(dataclasses.asdict(config), indent=2, sort_keys=True) + "\n"
