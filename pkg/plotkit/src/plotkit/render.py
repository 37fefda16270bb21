"""Figure rendering for contribution-game result CSVs.

Input is the long-format results file written by the simulation harness
(header ``scenario,strategy,population,repetition,timestep,measure,value,ci``).
For every measure one chart is produced: aggregated value versus population
size, one line per strategy, baselines (full, random) dashed and strategies
solid, with 95% confidence intervals across repetitions as error bars.

Points aggregate each repetition's mean over its final 10% of timesteps,
then average across repetitions; the CI comes from the t-distribution over
those per-repetition means.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from collections import defaultdict
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from scipy import stats

log = logging.getLogger("plotkit")

RESULT_HEADER = (
    "scenario", "strategy", "population", "repetition",
    "timestep", "measure", "value", "ci",
)
MEASURES = (
    "success", "efficiency", "welfare", "privacy", "fairness",
    "fairness_over_time",
)
BASELINES = ("full", "random")
UNIT_RANGE_MEASURES = (
    "success", "efficiency", "privacy", "fairness", "fairness_over_time",
)
TAIL_FRACTION = 0.1


class PlotDataError(ValueError):
    """Raised for malformed input files or inconsistent plot requests."""


@dataclass(frozen=True)
class PlotSpec:
    """What to plot: input CSV, measures, output directory and format."""

    input_csv: str
    measures: tuple[str, ...] = MEASURES
    out_dir: str = "figs"
    image_format: str = "png"

    def __post_init__(self) -> None:
        unknown = [m for m in self.measures if m not in MEASURES]
        if unknown:
            raise PlotDataError(
                f"unknown measure {unknown[0]!r}; expected one of {', '.join(MEASURES)}"
            )
        if self.image_format not in ("png", "svg"):
            raise PlotDataError(
                f"unsupported image format {self.image_format!r}; use png or svg"
            )


@dataclass
class ResultTable:
    """Detail rows keyed for aggregation plus the strategies seen."""

    # (measure, strategy, population) -> repetition -> [(timestep, value)]
    detail: dict = field(default_factory=lambda: defaultdict(lambda: defaultdict(list)))
    strategies: list[str] = field(default_factory=list)
    populations: list[int] = field(default_factory=list)


def load_results(path) -> ResultTable:
    """Parse a results CSV; diagnostics name the offending line or column."""
    table = ResultTable()
    strategies: set[str] = set()
    populations: set[int] = set()
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise PlotDataError(f"cannot read {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise PlotDataError(f"{path}: empty file, expected header "
                                f"{','.join(RESULT_HEADER)}")
        if tuple(h.strip() for h in header) != RESULT_HEADER:
            missing = set(RESULT_HEADER) - {h.strip() for h in header}
            what = f"missing column {sorted(missing)[0]!r}" if missing else "bad header"
            raise PlotDataError(f"{path}:1: {what}")
        rows = 0
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(RESULT_HEADER):
                raise PlotDataError(
                    f"{path}:{lineno}: expected {len(RESULT_HEADER)} fields, "
                    f"got {len(row)}"
                )
            _, strategy, raw_pop, repetition, raw_t, measure, raw_value, _ = row
            if measure not in MEASURES:
                raise PlotDataError(f"{path}:{lineno}: unknown measure {measure!r}")
            try:
                population = int(raw_pop)
                timestep = int(raw_t)
                value = float(raw_value)
            except ValueError as exc:
                raise PlotDataError(f"{path}:{lineno}: {exc}") from None
            rows += 1
            if repetition == "agg":
                continue
            strategies.add(strategy)
            populations.add(population)
            table.detail[(measure, strategy, population)][repetition].append(
                (timestep, value)
            )
        if rows == 0:
            raise PlotDataError(f"{path}: no data rows")
    table.strategies = sorted(strategies)
    table.populations = sorted(populations)
    return table


def _tail_mean(points: list[tuple[int, float]]) -> float:
    points = sorted(points)
    k = max(1, int(len(points) * TAIL_FRACTION))
    tail = points[-k:]
    return math.fsum(v for _, v in tail) / len(tail)


def aggregate_points(table: ResultTable, measure: str, strategy: str):
    """Per population: (mean, ci_half_width or None) over repetition tails."""
    xs, means, cis = [], [], []
    for population in table.populations:
        reps = table.detail.get((measure, strategy, population))
        if not reps:
            continue
        tails = [_tail_mean(points) for points in reps.values()]
        mean = math.fsum(tails) / len(tails)
        if len(tails) >= 2:
            var = math.fsum((x - mean) ** 2 for x in tails) / (len(tails) - 1)
            t_crit = float(stats.t.ppf(0.975, len(tails) - 1))
            ci = t_crit * math.sqrt(var / len(tails))
        else:
            ci = None
        xs.append(population)
        means.append(mean)
        cis.append(ci)
    return xs, means, cis


def build_figure(table: ResultTable, measure: str):
    """One measure's chart; returns the figure for saving or inspection."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    warned_no_ci = False
    for strategy in table.strategies:
        xs, means, cis = aggregate_points(table, measure, strategy)
        if not xs:
            continue
        if any(c is None for c in cis):
            if not warned_no_ci:
                log.warning(
                    "%s: single repetition for %s, drawing lines without error bars",
                    measure, strategy,
                )
                warned_no_ci = True
            yerr = None
        else:
            yerr = cis
        ax.errorbar(
            xs, means, yerr=yerr,
            label=strategy,
            linestyle="--" if strategy in BASELINES else "-",
            marker="o", markersize=3, capsize=3,
        )
    ax.set_xlabel("population size")
    ax.set_ylabel(measure.replace("_", " "))
    if measure in UNIT_RANGE_MEASURES:
        ax.set_ylim(0.0, 1.0)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def plot_measures(spec: PlotSpec) -> dict[str, str]:
    """Render one image per requested measure; returns measure -> file path."""
    table = load_results(spec.input_csv)
    os.makedirs(spec.out_dir, exist_ok=True)
    written = {}
    with plt.rc_context({"svg.hashsalt": "plotkit"}):
        for measure in spec.measures:
            fig = build_figure(table, measure)
            path = os.path.join(spec.out_dir, f"{measure}.{spec.image_format}")
            fig.savefig(path, metadata={"Date": None} if spec.image_format == "svg" else None)
            plt.close(fig)
            written[measure] = path
    return written
