"""Round-input generators for the three application scenarios.

Synthetic rounds draw values from a uniform distribution and costs from a
normal centered on the value. Grid rounds turn household production/baseline
records plus EV charging demand into renounce-to-fit rounds. Sensing rounds
turn vehicle traces into speed-change values and proximity costs. CSV
ingestion and synthetic trace/grid generators stand in for the proprietary
datasets, which are not shipped.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DataError
from .game import RoundInput

log = logging.getLogger("contribsim.scenarios")

TRACE_COLUMNS = ("vehicle_id", "timestep", "speed", "trip_position")
GRID_COLUMNS = ("timestep", "household_id", "production", "baseline")


# --- synthetic ------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticConfig:
    """Distribution-driven rounds; the default supports give mean value 1."""

    n: int = 10
    value_low: float = 0.5
    value_high: float = 1.5
    cost_sigma: float = 0.2
    threshold_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ContractViolation("n must be >= 1")
        if self.value_low < 0 or self.value_high < self.value_low:
            raise ContractViolation("need 0 <= value_low <= value_high")
        if self.cost_sigma < 0:
            raise ContractViolation("cost_sigma must be >= 0")
        if not 0 < self.threshold_fraction <= 1:
            raise ContractViolation("threshold_fraction must be in (0, 1]")


def synthetic_round(cfg: SyntheticConfig, t: int, rng) -> RoundInput:
    """One synthetic round: uniform values, value-centered normal costs.

    The requirement is the threshold fraction of the population's expected
    total value, capped at the round's actual total so that full contribution
    always succeeds.
    """
    values = rng.uniform(cfg.value_low, cfg.value_high, cfg.n).tolist()
    costs = np.maximum(rng.normal(values, cfg.cost_sigma), 0.0).tolist()
    nominal = cfg.threshold_fraction * cfg.n * (cfg.value_low + cfg.value_high) / 2.0
    threshold = min(nominal, math.fsum(values))
    return RoundInput(
        values=values,
        costs=costs,
        privacy_costs=list(costs),
        threshold=threshold,
    )


class SyntheticScenario:
    """Infinite synthetic round stream with bookkeeping of capped rounds."""

    name = "synthetic"

    def __init__(self, cfg: SyntheticConfig):
        self.cfg = cfg
        self.capped_rounds = 0
        self.rounds_emitted = 0

    @property
    def value_range(self) -> tuple[float, float]:
        return (self.cfg.value_low, self.cfg.value_high)

    @property
    def cost_range(self) -> tuple[float, float]:
        return (0.0, self.cfg.value_high + 3.0 * self.cfg.cost_sigma)

    @property
    def mean_cost(self) -> float:
        return (self.cfg.value_low + self.cfg.value_high) / 2.0

    def stream(self, rng):
        cfg = self.cfg
        nominal = cfg.threshold_fraction * cfg.n * (cfg.value_low + cfg.value_high) / 2.0
        t = 0
        while True:
            inp = synthetic_round(cfg, t, rng)
            self.rounds_emitted += 1
            if inp.threshold < nominal:
                self.capped_rounds += 1
            yield inp
            t += 1


# --- smart grid -----------------------------------------------------------


@dataclass(frozen=True)
class GridRecord:
    """One timestep of household production and baseline consumption."""

    timestep: int
    production_per_household: list[float]
    baseline_per_household: list[float]

    def __post_init__(self) -> None:
        if len(self.production_per_household) != len(self.baseline_per_household):
            raise ContractViolation("production and baseline lengths differ")
        if len(self.production_per_household) < 1:
            raise ContractViolation("a grid record needs at least one household")
        if (
            min(self.production_per_household) < 0
            or min(self.baseline_per_household) < 0
        ):
            raise ContractViolation("production and baseline must be >= 0")

    @property
    def surplus(self) -> float:
        return math.fsum(self.production_per_household) - math.fsum(
            self.baseline_per_household
        )


def grid_round(
    record: GridRecord,
    ev_need: list[float],
    rng=None,
    comfort_factor: float = 1.0,
    comfort_noise: float = 0.0,
) -> RoundInput:
    """EV charging round: contribute by renouncing charge until demand fits.

    The requirement is the charge that must be renounced so that total
    demand fits the energy surplus; with abundant surplus it is zero and the
    round succeeds whatever the agents do. Comfort costs are proportional to
    the renounced charge, optionally with multiplicative noise.
    """
    n = len(record.production_per_household)
    if len(ev_need) != n:
        raise ContractViolation(
            f"ev_need has {len(ev_need)} entries for {n} households"
        )
    if min(ev_need, default=0.0) < 0:
        raise ContractViolation("ev_need entries must be >= 0")

    values = [float(v) for v in ev_need]
    if comfort_noise > 0:
        if rng is None:
            raise ContractViolation("comfort_noise needs an rng")
        factors = comfort_factor + comfort_noise * rng.standard_normal(n)
        costs = [max(0.0, v * f) for v, f in zip(values, factors)]
    else:
        costs = [comfort_factor * v for v in values]
    threshold = max(0.0, math.fsum(values) - record.surplus)
    return RoundInput(
        values=values,
        costs=costs,
        privacy_costs=list(costs),
        threshold=threshold,
    )


# --- participatory sensing ------------------------------------------------


@dataclass(frozen=True)
class TraceRecord:
    """One vehicle observation: speed plus normalized trip progress."""

    vehicle_id: str
    timestep: int
    speed: float
    trip_position: float

    def __post_init__(self) -> None:
        if self.speed < 0:
            raise ContractViolation("speed must be >= 0")
        if not 0 <= self.trip_position <= 1:
            raise ContractViolation("trip_position must be in [0, 1]")


@dataclass(frozen=True)
class SensingConfig:
    """Knobs for turning trace records into rounds.

    ``speed_scale`` divides absolute speed changes so the population mean
    contribution is about 1; leave it None to have the scenario calibrate it
    from the loaded data.
    """

    speed_scale: float | None = None
    cost_scale: float = 1.0
    threshold_fraction: float = 0.8
    strict: bool = False

    def __post_init__(self) -> None:
        if self.speed_scale is not None and self.speed_scale <= 0:
            raise ContractViolation("speed_scale must be > 0")
        if self.cost_scale < 0:
            raise ContractViolation("cost_scale must be >= 0")
        if not 0 < self.threshold_fraction <= 1:
            raise ContractViolation("threshold_fraction must be in (0, 1]")


def sensing_round(
    records: list[TraceRecord],
    previous_speeds: dict[str, float],
    cfg: SensingConfig,
) -> RoundInput:
    """One sensing round from the vehicles observed at a single timestep.

    Measurement value is the normalized speed change since the previous
    observation (0 for a first observation unless strict). Cost is proximity
    to the trip's endpoints, the only identifiable locations: highest at the
    origin/destination, zero at the midpoint.
    """
    if not records:
        raise ContractViolation("a sensing round needs at least one record")
    ordered = sorted(records, key=lambda r: r.vehicle_id)
    values = []
    costs = []
    for rec in ordered:
        prev = previous_speeds.get(rec.vehicle_id)
        if prev is None:
            if cfg.strict:
                raise DataError(
                    f"vehicle {rec.vehicle_id} has no previous speed at "
                    f"timestep {rec.timestep}"
                )
            prev = rec.speed
        values.append(abs(rec.speed - prev) / (cfg.speed_scale or 1.0))
        proximity = 1.0 - 2.0 * min(rec.trip_position, 1.0 - rec.trip_position)
        costs.append(cfg.cost_scale * proximity)
    threshold = cfg.threshold_fraction * len(ordered)
    return RoundInput(
        values=values,
        costs=costs,
        privacy_costs=list(costs),
        threshold=threshold,
    )


# --- CSV ingestion ---------------------------------------------------------


def _open_rows(path, expected_columns):
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected header "
                            f"{','.join(expected_columns)}") from None
        if [h.strip() for h in header] != list(expected_columns):
            raise DataError(
                f"{path}: header {','.join(header)} does not match "
                f"{','.join(expected_columns)}"
            )
        yield from ((lineno, row) for lineno, row in enumerate(reader, start=2))


def _parse_number(path, lineno, name, raw):
    try:
        return float(raw)
    except ValueError:
        raise DataError(
            f"{path}:{lineno}: non-numeric {name} {raw!r}"
        ) from None


def ingest_trace_csv(path) -> list[TraceRecord]:
    """Load a vehicle trace file; schema vehicle_id,timestep,speed,trip_position."""
    records = []
    last_seen: dict[str, tuple[int, int]] = {}
    for lineno, row in _open_rows(path, TRACE_COLUMNS):
        if len(row) != len(TRACE_COLUMNS):
            raise DataError(f"{path}:{lineno}: expected {len(TRACE_COLUMNS)} fields")
        vehicle, raw_t, raw_speed, raw_pos = row
        vehicle = vehicle.strip()
        if not vehicle:
            raise DataError(f"{path}:{lineno}: empty vehicle_id")
        t = _parse_number(path, lineno, "timestep", raw_t)
        if t != int(t):
            raise DataError(f"{path}:{lineno}: timestep {raw_t!r} is not an integer")
        t = int(t)
        speed = _parse_number(path, lineno, "speed", raw_speed)
        if speed < 0:
            raise DataError(f"{path}:{lineno}: negative speed {speed}")
        pos = _parse_number(path, lineno, "trip_position", raw_pos)
        if not 0 <= pos <= 1:
            raise DataError(f"{path}:{lineno}: trip_position {pos} outside [0, 1]")
        if vehicle in last_seen and t <= last_seen[vehicle][0]:
            raise DataError(
                f"{path}:{lineno}: timestep {t} for vehicle {vehicle} does not "
                f"increase (previous {last_seen[vehicle][0]} at line "
                f"{last_seen[vehicle][1]})"
            )
        last_seen[vehicle] = (t, lineno)
        records.append(TraceRecord(vehicle, t, speed, pos))
    records.sort(key=lambda r: (r.timestep, r.vehicle_id))
    return records


def ingest_grid_csv(path) -> list[GridRecord]:
    """Load a grid file; schema timestep,household_id,production,baseline."""
    per_step: dict[int, dict[str, tuple[float, float]]] = {}
    last_t: int | None = None
    for lineno, row in _open_rows(path, GRID_COLUMNS):
        if len(row) != len(GRID_COLUMNS):
            raise DataError(f"{path}:{lineno}: expected {len(GRID_COLUMNS)} fields")
        raw_t, household, raw_prod, raw_base = row
        t = _parse_number(path, lineno, "timestep", raw_t)
        if t != int(t):
            raise DataError(f"{path}:{lineno}: timestep {raw_t!r} is not an integer")
        t = int(t)
        household = household.strip()
        if not household:
            raise DataError(f"{path}:{lineno}: empty household_id")
        prod = _parse_number(path, lineno, "production", raw_prod)
        base = _parse_number(path, lineno, "baseline", raw_base)
        if prod < 0 or base < 0:
            raise DataError(f"{path}:{lineno}: negative production or baseline")
        if last_t is not None and t < last_t:
            raise DataError(
                f"{path}:{lineno}: timestep {t} is out of order (after {last_t})"
            )
        last_t = t
        step = per_step.setdefault(t, {})
        if household in step:
            raise DataError(
                f"{path}:{lineno}: duplicate household {household} at timestep {t}"
            )
        step[household] = (prod, base)

    records = []
    households: list[str] | None = None
    for t in sorted(per_step):
        step = per_step[t]
        if households is None:
            households = sorted(step)
        elif sorted(step) != households:
            raise DataError(
                f"{path}: timestep {t} lists households "
                f"{sorted(step)} instead of {households}"
            )
        records.append(
            GridRecord(
                timestep=t,
                production_per_household=[step[h][0] for h in households],
                baseline_per_household=[step[h][1] for h in households],
            )
        )
    return records


def write_trace_csv(records: list[TraceRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRACE_COLUMNS)
        for r in records:
            writer.writerow([r.vehicle_id, r.timestep, repr(r.speed), repr(r.trip_position)])


def write_grid_csv(records: list[GridRecord], households: list[str], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(GRID_COLUMNS)
        for rec in records:
            for name, prod, base in zip(
                households, rec.production_per_household, rec.baseline_per_household
            ):
                writer.writerow([rec.timestep, name, repr(prod), repr(base)])


# --- synthetic stand-ins for the proprietary datasets ----------------------


def synthetic_traces(
    n_vehicles: int, steps: int, seed: int, speed_mean: float = 30.0,
    accel_sigma: float = 2.0,
) -> list[TraceRecord]:
    """Random-walk speeds and sawtooth trip progress, shaped like real traces."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    records = []
    speeds = rng.uniform(0.5 * speed_mean, 1.5 * speed_mean, n_vehicles)
    trip_len = rng.integers(20, 60, n_vehicles)
    phase = rng.integers(0, 1000, n_vehicles)
    for t in range(steps):
        for i in range(n_vehicles):
            pos = ((t + phase[i]) % trip_len[i]) / (trip_len[i] - 1)
            records.append(
                TraceRecord(f"veh{i:03d}", t, float(speeds[i]), float(min(pos, 1.0)))
            )
        speeds = np.maximum(speeds + rng.normal(0.0, accel_sigma, n_vehicles), 0.0)
    return records


def synthetic_grid(
    n_households: int, steps: int, seed: int,
    production_mean: float = 2.0, baseline_mean: float = 1.2,
) -> list[GridRecord]:
    """Uniformly fluctuating production and baseline, shaped like meter data."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    records = []
    for t in range(steps):
        production = rng.uniform(0.5 * production_mean, 1.5 * production_mean, n_households)
        baseline = rng.uniform(0.5 * baseline_mean, 1.5 * baseline_mean, n_households)
        records.append(
            GridRecord(
                timestep=t,
                production_per_household=production.tolist(),
                baseline_per_household=baseline.tolist(),
            )
        )
    return records


# --- scenario drivers for the harness --------------------------------------


class GridScenario:
    """Grid rounds from records (CSV or synthetic) plus sampled EV demand."""

    name = "grid"

    def __init__(
        self,
        records: list[GridRecord],
        ev_low: float = 0.5,
        ev_high: float = 1.5,
        comfort_factor: float = 1.0,
        comfort_noise: float = 0.0,
    ):
        if not records:
            raise ContractViolation("grid scenario needs at least one record")
        n = len(records[0].production_per_household)
        if any(len(r.production_per_household) != n for r in records):
            raise ContractViolation("grid records disagree on household count")
        self.records = records
        self.n = n
        self.ev_low = ev_low
        self.ev_high = ev_high
        self.comfort_factor = comfort_factor
        self.comfort_noise = comfort_noise
        self.wrapped = False

    @property
    def value_range(self) -> tuple[float, float]:
        return (self.ev_low, self.ev_high)

    @property
    def cost_range(self) -> tuple[float, float]:
        spread = 1.0 + 3.0 * self.comfort_noise
        return (0.0, self.ev_high * self.comfort_factor * spread)

    @property
    def mean_cost(self) -> float:
        return self.comfort_factor * (self.ev_low + self.ev_high) / 2.0

    def stream(self, rng):
        t = 0
        while True:
            if t > 0 and t % len(self.records) == 0 and not self.wrapped:
                self.wrapped = True
                log.info("grid records exhausted after %d steps, wrapping around",
                         len(self.records))
            record = self.records[t % len(self.records)]
            ev_need = rng.uniform(self.ev_low, self.ev_high, self.n).tolist()
            yield grid_round(
                record, ev_need, rng,
                comfort_factor=self.comfort_factor,
                comfort_noise=self.comfort_noise,
            )
            t += 1


class SensingScenario:
    """Sensing rounds replayed from trace records (CSV or synthetic)."""

    name = "sensing"

    def __init__(self, records: list[TraceRecord], cfg: SensingConfig | None = None):
        if not records:
            raise ContractViolation("sensing scenario needs at least one record")
        vehicles = sorted({r.vehicle_id for r in records})
        by_step: dict[int, list[TraceRecord]] = {}
        for r in records:
            by_step.setdefault(r.timestep, []).append(r)
        # Rounds need the full population; drop partially observed timesteps.
        complete = [
            t for t in sorted(by_step)
            if len({r.vehicle_id for r in by_step[t]}) == len(vehicles)
        ]
        if not complete:
            raise DataError("no timestep observes every vehicle")
        dropped = len(by_step) - len(complete)
        if dropped:
            log.info("sensing data: dropped %d partial timesteps", dropped)
        self.vehicles = vehicles
        self.steps = [sorted(by_step[t], key=lambda r: r.vehicle_id) for t in complete]

        cfg = cfg or SensingConfig()
        if cfg.speed_scale is None:
            cfg = SensingConfig(
                speed_scale=self._calibrate_speed_scale(),
                cost_scale=cfg.cost_scale,
                threshold_fraction=cfg.threshold_fraction,
                strict=cfg.strict,
            )
        self.cfg = cfg
        self.wrapped = False

    def _calibrate_speed_scale(self) -> float:
        deltas = []
        prev: dict[str, float] = {}
        for step in self.steps:
            for rec in step:
                if rec.vehicle_id in prev:
                    deltas.append(abs(rec.speed - prev[rec.vehicle_id]))
                prev[rec.vehicle_id] = rec.speed
        mean = math.fsum(deltas) / len(deltas) if deltas else 0.0
        return mean if mean > 0 else 1.0

    @property
    def n(self) -> int:
        return len(self.vehicles)

    @property
    def value_range(self) -> tuple[float, float]:
        return (0.0, 4.0)

    @property
    def cost_range(self) -> tuple[float, float]:
        return (0.0, self.cfg.cost_scale)

    @property
    def mean_cost(self) -> float:
        return self.cfg.cost_scale / 2.0

    def stream(self, rng):
        prev: dict[str, float] = {}
        t = 0
        while True:
            index = t % len(self.steps)
            if t > 0 and index == 0:
                if not self.wrapped:
                    self.wrapped = True
                    log.info("sensing records exhausted after %d steps, wrapping around",
                             len(self.steps))
                prev = {}
            step = self.steps[index]
            yield sensing_round(step, prev, self.cfg)
            for rec in step:
                prev[rec.vehicle_id] = rec.speed
            t += 1
