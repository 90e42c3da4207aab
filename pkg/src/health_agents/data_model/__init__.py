"""Persona and wearable data: types, validation, loading, schema summaries."""

from .loaders import (
    DERIVED_PERCENT_COLUMNS,
    TABLE_NAMES,
    load_tables,
    tables_to_frames,
    tables_to_wire,
)
from .persona import load_persona, render_persona
from .schema_info import (
    ACTIVITIES_TABLE,
    POPULATION_TABLE,
    SUMMARY_TABLE,
    TABLE_INFOS,
    ColumnInfo,
    ColumnStats,
    DataSummary,
    TableInfo,
    TableSummary,
    render_data_summary,
    render_table_infos,
    summarize_schema,
)
from .synthetic import PERCENTILE_GRID, make_synthetic_tables
from .types import (
    ACTIVITY_NAMES,
    AGE_GROUPS,
    GENDERS,
    MINUTE_TOLERANCE,
    ActivityRecord,
    DailySummaryRow,
    FormatError,
    LabValue,
    PersonaProfile,
    PopulationPercentileRow,
    RowDiagnostic,
    SchemaError,
    WearableTables,
    activity_problems,
    derive_sleep_percents,
    population_row_problems,
    summary_row_problems,
    validate_tables,
)

__all__ = [
    "ACTIVITIES_TABLE",
    "ACTIVITY_NAMES",
    "AGE_GROUPS",
    "ActivityRecord",
    "ColumnInfo",
    "ColumnStats",
    "DERIVED_PERCENT_COLUMNS",
    "DailySummaryRow",
    "DataSummary",
    "FormatError",
    "GENDERS",
    "LabValue",
    "MINUTE_TOLERANCE",
    "PERCENTILE_GRID",
    "PersonaProfile",
    "POPULATION_TABLE",
    "PopulationPercentileRow",
    "RowDiagnostic",
    "SUMMARY_TABLE",
    "SchemaError",
    "TABLE_INFOS",
    "TABLE_NAMES",
    "TableInfo",
    "TableSummary",
    "WearableTables",
    "activity_problems",
    "derive_sleep_percents",
    "load_persona",
    "load_tables",
    "make_synthetic_tables",
    "population_row_problems",
    "render_data_summary",
    "render_persona",
    "render_table_infos",
    "summarize_schema",
    "summary_row_problems",
    "tables_to_frames",
    "tables_to_wire",
    "validate_tables",
]
