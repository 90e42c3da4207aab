"""Domain types for persona and wearable data, with row-level validation.

All types are frozen; loaders validate rows and attach row-indexed
diagnostics instead of failing the whole load.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field, fields


class FormatError(Exception):
    """Source not parseable in the declared format."""


class SchemaError(Exception):
    """Unknown column, or a required column is missing."""


# minute-resolution slack for sums and duration reconciliation
MINUTE_TOLERANCE = 1.0

AGE_GROUPS = ("18-24", "25-34", "35-44", "45-54", "55-64", "65+")
GENDERS = ("male", "female")

ACTIVITY_NAMES = frozenset(
    {
        "AEROBIC_WORKOUT",
        "AEROBICS_NEW",
        "BIKING",
        "BOOTCAMP",
        "CANOEING_NEW",
        "CIRCUIT_TRAINING",
        "CORE_TRAINING",
        "CROSS_COUNTRY_SKI",
        "CROSSFIT",
        "DANCING",
        "ELLIPTICAL",
        "ELLIPTICAL_AUTO",
        "GOLF",
        "HIIT",
        "HIKE",
        "INDOOR_CLIMBING",
        "INTERVAL_WORKOUT",
        "KAYAKING",
        "KICKBOXING",
        "MARTIAL_ARTS",
        "MEDITATE",
        "OUTDOOR_BIKE",
        "OUTDOOR_WORKOUT",
        "PADDLEBOARDING",
        "PILATES",
        "POWERLIFTING",
        "ROLLERBLADING",
        "ROWING_MACHINE",
        "RUNNING",
        "SKATING",
        "SKIING",
        "SNOWBOARDING",
        "SPINNING_TACKER_RECORDED",
        "SPINNING_USER_LOG",
        "SPORT",
        "STAIRCLIMBER",
        "STRENGTH_TRAINING",
        "STRETCHING",
        "SURFING",
        "SWIMMING",
        "TENNIS",
        "TREADMILL_TRACKER_RECORDED",
        "TREADMILL_USER_LOG",
        "WALKING",
        "WEIGHTLIFTING",
        "WEIGHTS_TRACKER_RECORDED",
        "WEIGHTS_USER_LOG",
        "WORKOUT",
        "YOGA",
    }
)


@dataclass(frozen=True)
class DailySummaryRow:
    date: dt.date | None = None
    steps: float | None = None
    sleep_minutes: float | None = None
    bed_time: dt.datetime | None = None
    wake_up_time: dt.datetime | None = None
    resting_heart_rate: float | None = None
    heart_rate_variability: float | None = None
    active_zone_minutes: float | None = None
    deep_sleep_minutes: float | None = None
    rem_sleep_minutes: float | None = None
    light_sleep_minutes: float | None = None
    awake_minutes: float | None = None
    stress_management_score: float | None = None
    fatburn_active_zone_minutes: float | None = None
    cardio_active_zone_minutes: float | None = None
    peak_active_zone_minutes: float | None = None


@dataclass(frozen=True)
class ActivityRecord:
    start_time: dt.datetime | None = None
    end_time: dt.datetime | None = None
    activity_name: str | None = None
    distance: float | None = None
    duration: float | None = None
    elevation_gain: float | None = None
    average_heart_rate: float | None = None
    calories: float | None = None
    steps: float | None = None
    active_zone_minutes: float | None = None


@dataclass(frozen=True)
class PopulationPercentileRow:
    percentile: int | None = None
    age_group: str | None = None
    gender: str | None = None
    resting_heart_rate: float | None = None
    heart_rate_variability: float | None = None
    steps: float | None = None
    deep_sleep_minutes: float | None = None
    rem_sleep_minutes: float | None = None
    light_sleep_minutes: float | None = None
    stress_management_score: float | None = None
    fatburn_active_zone_minutes: float | None = None
    cardio_active_zone_minutes: float | None = None
    peak_active_zone_minutes: float | None = None


@dataclass(frozen=True)
class LabValue:
    biomarker: str
    value: float
    unit: str
    reference_range: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if not self.unit:
            raise FormatError(f"lab value {self.biomarker!r} has an empty unit")
        if self.reference_range is not None:
            low, high = self.reference_range
            if not low < high:
                raise FormatError(
                    f"lab value {self.biomarker!r} reference range {low}..{high} inverted"
                )


@dataclass(frozen=True)
class PersonaProfile:
    demographics: tuple[tuple[str, str], ...] = ()
    blood_panel: tuple[LabValue, ...] = ()
    conditions: tuple[tuple[str, str], ...] = ()
    user_story: str = ""
    goal: str = ""
    raw_sections: tuple[tuple[str, str], ...] = ()

    def demographic(self, key: str) -> str | None:
        for name, value in self.demographics:
            if name == key:
                return value
        return None


@dataclass(frozen=True)
class RowDiagnostic:
    table: str
    row_index: int
    problems: tuple[str, ...]


@dataclass(frozen=True)
class WearableTables:
    summary: tuple[DailySummaryRow, ...] = ()
    activities: tuple[ActivityRecord, ...] = ()
    population: tuple[PopulationPercentileRow, ...] = ()
    diagnostics: tuple[RowDiagnostic, ...] = field(default=(), compare=False)


def _nonneg(problems: list[str], name: str, value: float | None) -> None:
    if value is not None and value < 0:
        problems.append(f"{name} must be >= 0, got {value}")


def summary_row_problems(row: DailySummaryRow) -> list[str]:
    """Return the invariant violations for one daily summary row."""
    problems: list[str] = []
    if row.date is None:
        problems.append("date is required")
    _nonneg(problems, "steps", row.steps)
    _nonneg(problems, "sleep_minutes", row.sleep_minutes)
    for name in (
        "active_zone_minutes",
        "deep_sleep_minutes",
        "rem_sleep_minutes",
        "light_sleep_minutes",
        "awake_minutes",
        "fatburn_active_zone_minutes",
        "cardio_active_zone_minutes",
        "peak_active_zone_minutes",
    ):
        _nonneg(problems, name, getattr(row, name))
    score = row.stress_management_score
    if score is not None and not 0 <= score <= 100:
        problems.append(f"stress_management_score must be in 0..100, got {score}")
    if row.bed_time is not None and row.wake_up_time is not None:
        if not row.bed_time < row.wake_up_time:
            problems.append("bed_time must be before wake_up_time")
    zones = (
        row.fatburn_active_zone_minutes,
        row.cardio_active_zone_minutes,
        row.peak_active_zone_minutes,
    )
    if row.active_zone_minutes is not None and all(z is not None for z in zones):
        if sum(zones) > row.active_zone_minutes + MINUTE_TOLERANCE:
            problems.append("zone minutes exceed active_zone_minutes")
    stages = (row.deep_sleep_minutes, row.rem_sleep_minutes, row.light_sleep_minutes)
    if row.sleep_minutes is not None:
        if all(s is not None for s in stages):
            if sum(stages) > row.sleep_minutes + MINUTE_TOLERANCE:
                problems.append("sleep stage minutes exceed sleep_minutes")
        for name in ("deep_sleep_minutes", "rem_sleep_minutes", "light_sleep_minutes"):
            value = getattr(row, name)
            if value is not None and value > row.sleep_minutes + MINUTE_TOLERANCE:
                problems.append(f"{name} exceeds sleep_minutes")
    return problems


def activity_problems(record: ActivityRecord) -> list[str]:
    problems: list[str] = []
    if record.start_time is not None and record.end_time is not None:
        if not record.start_time < record.end_time:
            problems.append("start_time must be before end_time")
        if record.duration is not None:
            span = (record.end_time - record.start_time).total_seconds() / 60.0
            if abs(span - record.duration) > MINUTE_TOLERANCE:
                problems.append(
                    f"duration {record.duration} disagrees with end-start {span:.2f}"
                )
    if record.activity_name is not None and record.activity_name not in ACTIVITY_NAMES:
        problems.append(f"unknown activity_name {record.activity_name!r}")
    for name in ("distance", "duration", "calories", "steps", "active_zone_minutes"):
        _nonneg(problems, name, getattr(record, name))
    return problems


def population_row_problems(row: PopulationPercentileRow) -> list[str]:
    problems: list[str] = []
    if row.percentile is None:
        problems.append("percentile is required")
    elif not 1 <= row.percentile <= 99:
        problems.append(f"percentile must be in 1..99, got {row.percentile}")
    if row.age_group is None:
        problems.append("age_group is required")
    elif row.age_group not in AGE_GROUPS:
        problems.append(f"unknown age_group {row.age_group!r}")
    if row.gender is None:
        problems.append("gender is required")
    elif row.gender not in GENDERS:
        problems.append(f"unknown gender {row.gender!r}")
    return problems


def derive_sleep_percents(row: DailySummaryRow) -> dict[str, float]:
    """Share of total sleep time per stage; empty when sleep is 0 or missing."""
    if not row.sleep_minutes:
        return {}
    out: dict[str, float] = {}
    for stage, key in (
        (row.deep_sleep_minutes, "deep_sleep_percent"),
        (row.rem_sleep_minutes, "rem_sleep_percent"),
        (row.light_sleep_minutes, "light_sleep_percent"),
        (row.awake_minutes, "awake_percent"),
    ):
        if stage is not None:
            out[key] = stage / row.sleep_minutes * 100.0
    return out


def validate_tables(
    summary: list[DailySummaryRow],
    activities: list[ActivityRecord],
    population: list[PopulationPercentileRow],
) -> WearableTables:
    """Keep rows passing all invariants; reject the rest with diagnostics.

    Cross-row invariants (unique summary date, unique population key) reject
    the later duplicate.
    """
    diagnostics: list[RowDiagnostic] = []

    kept_summary: list[DailySummaryRow] = []
    seen_dates: set[dt.date] = set()
    for index, row in enumerate(summary):
        problems = summary_row_problems(row)
        if not problems and row.date in seen_dates:
            problems.append(f"duplicate date {row.date.isoformat()}")
        if problems:
            diagnostics.append(RowDiagnostic("summary", index, tuple(problems)))
        else:
            assert row.date is not None
            seen_dates.add(row.date)
            kept_summary.append(row)

    kept_activities: list[ActivityRecord] = []
    for index, record in enumerate(activities):
        problems = activity_problems(record)
        if problems:
            diagnostics.append(RowDiagnostic("activities", index, tuple(problems)))
        else:
            kept_activities.append(record)

    kept_population: list[PopulationPercentileRow] = []
    seen_keys: set[tuple] = set()
    for index, row in enumerate(population):
        problems = population_row_problems(row)
        key = (row.percentile, row.age_group, row.gender)
        if not problems and key in seen_keys:
            problems.append(f"duplicate (percentile, age_group, gender) {key}")
        if problems:
            diagnostics.append(RowDiagnostic("population", index, tuple(problems)))
        else:
            seen_keys.add(key)
            kept_population.append(row)

    return WearableTables(
        summary=tuple(kept_summary),
        activities=tuple(kept_activities),
        population=tuple(kept_population),
        diagnostics=tuple(diagnostics),
    )


def field_names(row_type: type) -> tuple[str, ...]:
    return tuple(f.name for f in fields(row_type))
