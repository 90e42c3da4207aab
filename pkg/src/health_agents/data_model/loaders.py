"""Loading, interchange, and dataframe construction for wearable tables.

Canonical interchange is column-oriented JSON with ISO-8601 timestamps;
CSV is accepted on ingest only (one file per table in a directory).
"""

from __future__ import annotations

import csv
import datetime as dt
import json
from pathlib import Path
from typing import Any, Mapping

import pandas as pd

from .types import (
    ActivityRecord,
    DailySummaryRow,
    FormatError,
    PersonaProfile,
    PopulationPercentileRow,
    SchemaError,
    WearableTables,
    derive_sleep_percents,
    field_names,
    validate_tables,
)

TABLE_NAMES = ("summary", "activities", "population")

# cell parser kind per column, per table
_COLUMN_KINDS: dict[str, dict[str, str]] = {
    "summary": {
        "date": "date",
        "bed_time": "datetime",
        "wake_up_time": "datetime",
        **{
            name: "float"
            for name in field_names(DailySummaryRow)
            if name not in ("date", "bed_time", "wake_up_time")
        },
    },
    "activities": {
        "start_time": "datetime",
        "end_time": "datetime",
        "activity_name": "str",
        **{
            name: "float"
            for name in field_names(ActivityRecord)
            if name not in ("start_time", "end_time", "activity_name")
        },
    },
    "population": {
        "percentile": "int",
        "age_group": "str",
        "gender": "str",
        **{
            name: "float"
            for name in field_names(PopulationPercentileRow)
            if name not in ("percentile", "age_group", "gender")
        },
    },
}

_ROW_TYPES = {
    "summary": DailySummaryRow,
    "activities": ActivityRecord,
    "population": PopulationPercentileRow,
}


def _parse_cell(kind: str, raw: Any) -> Any:
    if raw is None or raw == "":
        return None
    if kind == "str":
        return str(raw)
    if kind == "int":
        value = int(str(raw))
        return value
    if kind == "float":
        return float(raw)
    if kind == "date":
        if isinstance(raw, dt.date) and not isinstance(raw, dt.datetime):
            return raw
        return dt.date.fromisoformat(str(raw))
    if kind == "datetime":
        if isinstance(raw, dt.datetime):
            return raw
        return dt.datetime.fromisoformat(str(raw))
    raise AssertionError(kind)


def _check_columns(table: str, columns: list[str]) -> None:
    known = _COLUMN_KINDS[table]
    unknown = [c for c in columns if c not in known]
    if unknown:
        raise SchemaError(f"table {table!r}: unknown columns {unknown}")


def _rows_from_columns(table: str, data: Mapping[str, list]) -> list[dict]:
    _check_columns(table, list(data))
    lengths = {len(v) for v in data.values()}
    if len(lengths) > 1:
        raise FormatError(f"table {table!r}: columns have unequal lengths {lengths}")
    count = lengths.pop() if lengths else 0
    return [{col: values[i] for col, values in data.items()} for i in range(count)]


def _typed_rows(table: str, raw_rows: list[dict]) -> tuple[list, list[tuple[int, str]]]:
    """Parse raw row dicts into typed rows; unparseable cells void the row."""
    kinds = _COLUMN_KINDS[table]
    row_type = _ROW_TYPES[table]
    rows: list = []
    failures: list[tuple[int, str]] = []
    for index, raw in enumerate(raw_rows):
        unknown = [k for k in raw if k not in kinds]
        if unknown:
            raise SchemaError(f"table {table!r}: unknown columns {sorted(unknown)}")
        parsed: dict[str, Any] = {}
        problem = None
        for key, value in raw.items():
            try:
                parsed[key] = _parse_cell(kinds[key], value)
            except (ValueError, TypeError) as exc:
                problem = f"column {key!r}: cannot parse {value!r} ({exc})"
                break
        if problem is not None:
            failures.append((index, problem))
            rows.append(None)
        else:
            rows.append(row_type(**parsed))
    return rows, failures


def load_tables(source: Any, format: str = "json") -> WearableTables:
    """Load and validate the three wearable tables.

    source: a file path (JSON file, or a directory of per-table CSVs), or an
    in-memory mapping {table: column-dict or list of row dicts}.
    Rows failing invariants are dropped and reported in .diagnostics.
    """
    if format not in ("json", "csv"):
        raise FormatError(f"unknown format {format!r}")
    if format == "csv":
        raw_tables = _read_csv_dir(Path(source))
    elif isinstance(source, (str, Path)):
        try:
            payload = json.loads(Path(source).read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"not valid JSON: {exc}") from exc
        raw_tables = _normalize_payload(payload)
    elif isinstance(source, Mapping):
        raw_tables = _normalize_payload(source)
    else:
        raise FormatError(f"unsupported source type {type(source).__name__}")

    typed: dict[str, list] = {}
    parse_failures: dict[str, list[tuple[int, str]]] = {}
    for table in TABLE_NAMES:
        typed[table], parse_failures[table] = _typed_rows(table, raw_tables[table])

    valid = validate_tables(
        [r for r in typed["summary"] if r is not None],
        [r for r in typed["activities"] if r is not None],
        [r for r in typed["population"] if r is not None],
    )
    # re-index validation diagnostics to source row numbers and merge parse failures
    from .types import RowDiagnostic

    diagnostics: list[RowDiagnostic] = []
    for table in TABLE_NAMES:
        source_index = [i for i, r in enumerate(typed[table]) if r is not None]
        for diag in valid.diagnostics:
            if diag.table == table:
                diagnostics.append(
                    RowDiagnostic(table, source_index[diag.row_index], diag.problems)
                )
        for index, problem in parse_failures[table]:
            diagnostics.append(RowDiagnostic(table, index, (problem,)))
    diagnostics.sort(key=lambda d: (d.table, d.row_index))
    return WearableTables(
        summary=valid.summary,
        activities=valid.activities,
        population=valid.population,
        diagnostics=tuple(diagnostics),
    )


def _normalize_payload(payload: Mapping) -> dict[str, list[dict]]:
    if not isinstance(payload, Mapping):
        raise FormatError("top level must be a mapping of table names")
    unknown = [k for k in payload if k not in TABLE_NAMES]
    if unknown:
        raise SchemaError(f"unknown tables {sorted(unknown)}")
    out: dict[str, list[dict]] = {}
    for table in TABLE_NAMES:
        block = payload.get(table)
        if block is None:
            out[table] = []
        elif isinstance(block, Mapping):
            out[table] = _rows_from_columns(table, block)
        elif isinstance(block, list):
            out[table] = list(block)
        else:
            raise FormatError(f"table {table!r}: expected mapping or list")
    return out


def _read_csv_dir(root: Path) -> dict[str, list[dict]]:
    if not root.is_dir():
        raise FormatError(f"{root} is not a directory of per-table CSVs")
    out: dict[str, list[dict]] = {}
    for table in TABLE_NAMES:
        path = root / f"{table}.csv"
        if not path.exists():
            out[table] = []
            continue
        with path.open(newline="") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None:
                out[table] = []
                continue
            _check_columns(table, list(reader.fieldnames))
            out[table] = list(reader)
    return out


def tables_to_wire(tables: WearableTables) -> dict:
    """Column-oriented JSON-able form; inverse of load_tables on valid data."""
    out: dict[str, dict[str, list]] = {}
    for table in TABLE_NAMES:
        rows = getattr(tables, table)
        columns = field_names(_ROW_TYPES[table])
        block: dict[str, list] = {name: [] for name in columns}
        for row in rows:
            for name in columns:
                value = getattr(row, name)
                if isinstance(value, (dt.date, dt.datetime)):
                    value = value.isoformat()
                block[name].append(value)
        out[table] = block
    return out


_SUMMARY_ORDER = field_names(DailySummaryRow)
DERIVED_PERCENT_COLUMNS = (
    "deep_sleep_percent",
    "rem_sleep_percent",
    "light_sleep_percent",
    "awake_percent",
)


def tables_to_frames(
    tables: WearableTables, persona: PersonaProfile | None = None
) -> dict[str, pd.DataFrame]:
    """Build the four analysis dataframes the generated code runs against.

    summary_df gets a DatetimeIndex named "datetime", keeps the datetime
    column too, and carries the derived sleep-percent columns.
    """
    summary_data: dict[str, list] = {"datetime": []}
    for name in _SUMMARY_ORDER:
        if name != "date":
            summary_data[name] = []
    for name in DERIVED_PERCENT_COLUMNS:
        summary_data[name] = []
    for row in tables.summary:
        summary_data["datetime"].append(pd.Timestamp(row.date))
        percents = derive_sleep_percents(row)
        for name in _SUMMARY_ORDER:
            if name == "date":
                continue
            value = getattr(row, name)
            if isinstance(value, dt.datetime):
                value = pd.Timestamp(value)
            summary_data[name].append(value)
        for name in DERIVED_PERCENT_COLUMNS:
            summary_data[name].append(percents.get(name))
    summary_df = pd.DataFrame(summary_data)
    for col in summary_df.columns:
        if col in ("datetime", "bed_time", "wake_up_time"):
            summary_df[col] = pd.to_datetime(summary_df[col])
        else:
            summary_df[col] = pd.to_numeric(summary_df[col], errors="coerce")
    summary_df.index = pd.DatetimeIndex(summary_df["datetime"], name="datetime")

    activity_data: dict[str, list] = {n: [] for n in field_names(ActivityRecord)}
    for record in tables.activities:
        for name in activity_data:
            value = getattr(record, name)
            if isinstance(value, dt.datetime):
                value = pd.Timestamp(value)
            activity_data[name].append(value)
    activities_df = pd.DataFrame(activity_data)
    for col in ("start_time", "end_time"):
        activities_df[col] = pd.to_datetime(activities_df[col])
    for col in activities_df.columns:
        if col not in ("start_time", "end_time", "activity_name"):
            activities_df[col] = pd.to_numeric(activities_df[col], errors="coerce")

    # population frame uses the schema column name "age" for the age group
    population_data: dict[str, list] = {
        "percentile": [],
        "age": [],
        "gender": [],
    }
    metric_names = [
        n
        for n in field_names(PopulationPercentileRow)
        if n not in ("percentile", "age_group", "gender")
    ]
    for name in metric_names:
        population_data[name] = []
    for prow in tables.population:
        population_data["percentile"].append(prow.percentile)
        population_data["age"].append(prow.age_group)
        population_data["gender"].append(prow.gender)
        for name in metric_names:
            population_data[name].append(getattr(prow, name))
    population_df = pd.DataFrame(population_data)
    if len(population_df):
        population_df["percentile"] = population_df["percentile"].astype("int64")
    for name in metric_names:
        population_df[name] = pd.to_numeric(population_df[name], errors="coerce")

    profile_rows: list[dict] = []
    if persona is not None:
        for key, value in persona.demographics:
            profile_rows.append({"field": key, "value": value, "unit": ""})
        for lab in persona.blood_panel:
            profile_rows.append(
                {"field": lab.biomarker, "value": lab.value, "unit": lab.unit}
            )
        for name, duration in persona.conditions:
            profile_rows.append({"field": name, "value": duration, "unit": ""})
    profile_df = pd.DataFrame(profile_rows, columns=["field", "value", "unit"])

    return {
        "summary_df": summary_df,
        "activities_df": activities_df,
        "population_df": population_df,
        "profile_df": profile_df,
    }
