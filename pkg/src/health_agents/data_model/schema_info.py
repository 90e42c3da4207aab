"""Table schema descriptions and the data summary consumed by agent prompts.

Column descriptions are the fixed reference texts the analysis prompts were
built around; do not reword them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .types import WearableTables, derive_sleep_percents
from .loaders import DERIVED_PERCENT_COLUMNS


@dataclass(frozen=True)
class ColumnInfo:
    name: str
    dtype: str
    description: str


@dataclass(frozen=True)
class TableInfo:
    name: str
    variable_name: str
    description: str
    columns: tuple[ColumnInfo, ...]


SUMMARY_TABLE = TableInfo(
    name="Summary DataFrame",
    variable_name="summary_df",
    description=(
        "This is a summary of the user's activity, sleep, and personal health"
        " records data. Each row in the summary dataframe represents a single"
        " day."
    ),
    columns=(
        ColumnInfo(
            "datetime",
            "datetime64[ns]",
            "The date of the record. This is the index column",
        ),
        ColumnInfo("steps", "float64", "The number of steps taken each day."),
        ColumnInfo(
            "sleep_minutes",
            "float64",
            "The total sleep time (in minutes) for each day.",
        ),
        ColumnInfo("bed_time", "datetime64[ns]", "The time the user went to bed."),
        ColumnInfo("wake_up_time", "datetime64[ns]", "The time the user woke up."),
        ColumnInfo(
            "resting_heart_rate",
            "float64",
            "The average resting heart rate (in beats per minute) for each day.",
        ),
        ColumnInfo(
            "heart_rate_variability",
            "float64",
            "The user's heart rate variability.",
        ),
        ColumnInfo(
            "active_zone_minutes",
            "float64",
            "The number of active zone minutes earned each day",
        ),
        ColumnInfo(
            "deep_sleep_minutes",
            "float64",
            "The amount of deep sleep (in minutes) for each day.",
        ),
        ColumnInfo(
            "rem_sleep_minutes",
            "float64",
            "The amount of REM sleep (in minutes) for each day",
        ),
        ColumnInfo(
            "light_sleep_minutes",
            "float64",
            "The amount of light sleep (in minutes) for each day.",
        ),
        ColumnInfo(
            "awake_minutes",
            "float64",
            "The amount of awake time (in minutes) for each day.",
        ),
        ColumnInfo(
            "stress_management_score",
            "float64",
            "The user's stress management score for each day.",
        ),
        ColumnInfo(
            "fatburn_active_zone_minutes",
            "float64",
            "Part of the active zone minutes spent in the fat burn active zone"
            " which is calculated as (220 - age - resting_heart_rate) * 0.4 +"
            " resting_heart_rate.",
        ),
        ColumnInfo(
            "cardio_active_zone_minutes",
            "float64",
            "Part of the active zone minutes spent in the cardio active zone"
            " which is calculated as (220 - age - resting_heart_rate) * 0.6 +"
            " resting_heart_rate.",
        ),
        ColumnInfo(
            "peak_active_zone_minutes",
            "float64",
            "Part of the active zone minutes spent in the peak active zone"
            " which is calculated as (220 - age - resting_heart_rate) * 0.85 +"
            " resting_heart_rate.",
        ),
        ColumnInfo(
            "deep_sleep_percent",
            "float64",
            "The percentage of sleep time spent in deep sleep.",
        ),
        ColumnInfo(
            "rem_sleep_percent",
            "float64",
            "The percentage of sleep time spent in REM sleep.",
        ),
        ColumnInfo(
            "light_sleep_percent",
            "float64",
            "The percentage of sleep time spent in light sleep.",
        ),
        ColumnInfo(
            "awake_percent",
            "float64",
            "The percentage of sleep time spent awake.",
        ),
    ),
)

ACTIVITIES_TABLE = TableInfo(
    name="Activities DataFrame",
    variable_name="activities_df",
    description=(
        "This is a table of the user's physical activities. Each row in the"
        " activities dataframe represents a single recorded activity."
    ),
    columns=(
        ColumnInfo("start_time", "datetime64[ns]", "The start time of the activity."),
        ColumnInfo("end_time", "datetime64[ns]", "The end time of the activity."),
        ColumnInfo(
            "activity_name",
            "str",
            'The name of the activity, e.g., "WALKING", "SPORT", "RUNNING", etc.',
        ),
        ColumnInfo(
            "distance",
            "float64",
            "The distance covered during the activity in miles.",
        ),
        ColumnInfo("duration", "float64", "The duration of the activity in minutes."),
        ColumnInfo(
            "elevation_gain",
            "float64",
            "The total elevation gain during the activity in meters.",
        ),
        ColumnInfo(
            "average_heart_rate",
            "float64",
            "The average heart rate during the activity in beats per minute.",
        ),
        ColumnInfo(
            "calories",
            "float64",
            "The number of calories burned during the activity.",
        ),
        ColumnInfo(
            "steps", "float64", "The number of steps taken during the activity."
        ),
        ColumnInfo(
            "active_zone_minutes",
            "float64",
            "The number of active zone minutes earned during the activity.",
        ),
    ),
)

POPULATION_TABLE = TableInfo(
    name="Population DataFrame",
    variable_name="population_df",
    description=(
        "The population dataframe represents data for each percentile of the"
        " population broken down by age and gender. Each row in the population"
        " dataframe represents a single percentile for a given age group and"
        " gender."
    ),
    columns=(
        ColumnInfo("percentile", "int", "The percentile of the population."),
        ColumnInfo(
            "age",
            "str",
            'The age group of the percentile, one of ["18-24", "25-34", "35-44",'
            ' "45-54", "55-64", "65+"].',
        ),
        ColumnInfo(
            "gender",
            "str",
            'The gender of the percentile, one of ["male", "female"].',
        ),
        ColumnInfo(
            "resting_heart_rate",
            "float64",
            "The resting heart rate for the percentile.",
        ),
        ColumnInfo(
            "heart_rate_variability",
            "float64",
            "The heart rate variability for the percentile.",
        ),
        ColumnInfo(
            "fatburn_active_zone_minutes",
            "float64",
            "Part of the active zone minutes spent in the fat burn active zone"
            " for the percentile.",
        ),
        ColumnInfo(
            "cardio_active_zone_minutes",
            "float64",
            "Part of the active zone minutes spent in the cardio active zone"
            " for the percentile.",
        ),
        ColumnInfo(
            "peak_active_zone_minutes",
            "float64",
            "Part of the active zone minutes spent in the peak active zone"
            " for the percentile.",
        ),
        ColumnInfo(
            "steps",
            "float64",
            "The number of steps taken each day for the percentile.",
        ),
        ColumnInfo(
            "rem_sleep_minutes",
            "float64",
            "The amount of REM sleep (in minutes) for the percentile.",
        ),
        ColumnInfo(
            "deep_sleep_minutes",
            "float64",
            "The amount of deep sleep (in minutes) for the percentile.",
        ),
        ColumnInfo(
            "light_sleep_minutes",
            "float64",
            "The amount of light sleep (in minutes) for the percentile.",
        ),
        ColumnInfo(
            "stress_management_score",
            "float64",
            "The stress management score for the percentile.",
        ),
    ),
)

TABLE_INFOS = (SUMMARY_TABLE, ACTIVITIES_TABLE, POPULATION_TABLE)


@dataclass(frozen=True)
class ColumnStats:
    count: int
    missing_fraction: float
    mean: float | None = None
    min: float | None = None
    max: float | None = None


@dataclass(frozen=True)
class TableSummary:
    info: TableInfo
    row_count: int
    date_span: tuple[str, str] | None
    stats: tuple[tuple[str, ColumnStats], ...]


@dataclass(frozen=True)
class DataSummary:
    tables: tuple[TableSummary, ...]

    def render(self) -> str:
        return render_data_summary(self)


def _numeric_stats(values: list[float | None], total: int) -> ColumnStats:
    present = [v for v in values if v is not None and not (
        isinstance(v, float) and math.isnan(v)
    )]
    missing = 1.0 - (len(present) / total) if total else 0.0
    if not present:
        return ColumnStats(count=0, missing_fraction=missing if total else 0.0)
    return ColumnStats(
        count=len(present),
        missing_fraction=missing,
        mean=sum(present) / len(present),
        min=min(present),
        max=max(present),
    )


def _plain_stats(values: list, total: int) -> ColumnStats:
    present = [v for v in values if v is not None]
    missing = 1.0 - (len(present) / total) if total else 0.0
    return ColumnStats(count=len(present), missing_fraction=missing if total else 0.0)


def summarize_schema(tables: WearableTables) -> DataSummary:
    """Pure summary of schemas plus per-column stats; rendering is stable."""
    summaries: list[TableSummary] = []

    rows = tables.summary
    total = len(rows)
    percents = [derive_sleep_percents(r) for r in rows]
    col_values: dict[str, list] = {}
    for col in SUMMARY_TABLE.columns:
        if col.name == "datetime":
            col_values[col.name] = [r.date for r in rows]
        elif col.name in DERIVED_PERCENT_COLUMNS:
            col_values[col.name] = [p.get(col.name) for p in percents]
        else:
            col_values[col.name] = [getattr(r, col.name) for r in rows]
    stats = tuple(
        (
            col.name,
            _numeric_stats(col_values[col.name], total)
            if col.dtype == "float64"
            else _plain_stats(col_values[col.name], total),
        )
        for col in SUMMARY_TABLE.columns
    )
    dates = [r.date for r in rows if r.date is not None]
    span = (min(dates).isoformat(), max(dates).isoformat()) if dates else None
    summaries.append(TableSummary(SUMMARY_TABLE, total, span, stats))

    records = tables.activities
    total = len(records)
    stats = tuple(
        (
            col.name,
            _numeric_stats([getattr(r, col.name) for r in records], total)
            if col.dtype == "float64"
            else _plain_stats([getattr(r, col.name) for r in records], total),
        )
        for col in ACTIVITIES_TABLE.columns
    )
    starts = [r.start_time for r in records if r.start_time is not None]
    span = (
        (min(starts).date().isoformat(), max(starts).date().isoformat())
        if starts
        else None
    )
    summaries.append(TableSummary(ACTIVITIES_TABLE, total, span, stats))

    prows = tables.population
    total = len(prows)

    def _pop_attr(col_name: str) -> str:
        return "age_group" if col_name == "age" else col_name

    stats = tuple(
        (
            col.name,
            _numeric_stats([getattr(r, _pop_attr(col.name)) for r in prows], total)
            if col.dtype == "float64"
            else _plain_stats([getattr(r, _pop_attr(col.name)) for r in prows], total),
        )
        for col in POPULATION_TABLE.columns
    )
    summaries.append(TableSummary(POPULATION_TABLE, total, None, stats))

    return DataSummary(tables=tuple(summaries))


def render_table_infos(infos: tuple[TableInfo, ...] = TABLE_INFOS) -> str:
    """Schema-only render (no stats) for prompts that take schemas separately."""
    lines: list[str] = []
    for info in infos:
        lines.append(f"## {info.name} (`{info.variable_name}`)")
        lines.append(info.description)
        lines.append("Columns:")
        for col in info.columns:
            lines.append(f"- {col.name} ({col.dtype}): {col.description}")
        lines.append("")
    return "\n".join(lines)


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def render_data_summary(summary: DataSummary) -> str:
    lines: list[str] = []
    for table in summary.tables:
        lines.append(f"## {table.info.name} (`{table.info.variable_name}`)")
        lines.append(table.info.description)
        if table.date_span is not None:
            lines.append(
                f"Rows: {table.row_count}. Date span: "
                f"{table.date_span[0]} to {table.date_span[1]}."
            )
        else:
            lines.append(f"Rows: {table.row_count}.")
        lines.append("Columns:")
        stat_map = dict(table.stats)
        for col in table.info.columns:
            stat = stat_map[col.name]
            parts = [f"count={stat.count}", f"missing={stat.missing_fraction:.3f}"]
            if stat.mean is not None:
                parts.append(f"mean={_fmt(stat.mean)}")
                parts.append(f"min={_fmt(stat.min)}")
                parts.append(f"max={_fmt(stat.max)}")
            lines.append(
                f"- {col.name} ({col.dtype}): {col.description} [{', '.join(parts)}]"
            )
        lines.append("")
    return "\n".join(lines)
