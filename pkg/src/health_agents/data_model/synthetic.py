"""Seeded synthetic wearable fixture generator with exact ground truth.

The returned ground-truth mapping is computed from the generated arrays, so
tests can compare loader and summary output against it exactly.
"""

from __future__ import annotations

import datetime as dt

import numpy as np

from .types import (
    ActivityRecord,
    DailySummaryRow,
    PopulationPercentileRow,
    WearableTables,
    validate_tables,
)

PERCENTILE_GRID = (10, 20, 25, 30, 40, 50, 60, 70, 75, 80, 90)

_ACTIVITY_POOL = ("WALKING", "RUNNING", "BIKING", "YOGA", "SWIMMING", "HIKE")


def make_synthetic_tables(
    seed: int = 7, days: int = 90, start: dt.date = dt.date(2024, 1, 1)
) -> tuple[WearableTables, dict]:
    rng = np.random.default_rng(seed)

    dates = [start + dt.timedelta(days=i) for i in range(days)]
    sleep = np.clip(rng.normal(430.0, 45.0, days), 240.0, None).round(1)
    deep = (sleep * 0.17).round(1)
    rem = (sleep * 0.22).round(1)
    light = (sleep * 0.55).round(1)
    awake = (sleep * 0.10).round(1)
    steps = np.clip(rng.normal(8200.0, 2100.0, days), 0.0, None).round(0)
    rhr = rng.normal(62.0, 2.5, days).round(1)
    hrv = rng.normal(48.0, 8.0, days).round(1)
    fatburn = np.clip(rng.normal(22.0, 6.0, days), 0.0, None).round(1)
    cardio = np.clip(rng.normal(10.0, 4.0, days), 0.0, None).round(1)
    peak = np.clip(rng.normal(3.0, 2.0, days), 0.0, None).round(1)
    azm = (fatburn + cardio + peak).round(1)
    stress = np.clip(rng.normal(78.0, 6.0, days), 1.0, 99.0).round(1)

    hrv_missing = rng.random(days) < 0.05
    stress_missing = rng.random(days) < 0.05

    summary_rows = []
    for i, day in enumerate(dates):
        bed_minute = int(rng.integers(-40, 41))
        bed = dt.datetime.combine(
            day - dt.timedelta(days=1), dt.time(22, 45)
        ) + dt.timedelta(minutes=bed_minute)
        wake = bed + dt.timedelta(minutes=float(sleep[i] + awake[i]))
        summary_rows.append(
            DailySummaryRow(
                date=day,
                steps=float(steps[i]),
                sleep_minutes=float(sleep[i]),
                bed_time=bed,
                wake_up_time=wake,
                resting_heart_rate=float(rhr[i]),
                heart_rate_variability=None if hrv_missing[i] else float(hrv[i]),
                active_zone_minutes=float(azm[i]),
                deep_sleep_minutes=float(deep[i]),
                rem_sleep_minutes=float(rem[i]),
                light_sleep_minutes=float(light[i]),
                awake_minutes=float(awake[i]),
                stress_management_score=None if stress_missing[i] else float(stress[i]),
                fatburn_active_zone_minutes=float(fatburn[i]),
                cardio_active_zone_minutes=float(cardio[i]),
                peak_active_zone_minutes=float(peak[i]),
            )
        )

    activity_count = max(6, days // 3)
    activity_rows = []
    for _ in range(activity_count):
        day = dates[int(rng.integers(0, days))]
        name = _ACTIVITY_POOL[int(rng.integers(0, len(_ACTIVITY_POOL)))]
        start_dt = dt.datetime.combine(day, dt.time(17, 0)) + dt.timedelta(
            minutes=int(rng.integers(-120, 121))
        )
        duration = float(np.clip(rng.normal(42.0, 12.0), 10.0, None).round(1))
        activity_rows.append(
            ActivityRecord(
                start_time=start_dt,
                end_time=start_dt + dt.timedelta(minutes=duration),
                activity_name=name,
                distance=float(max(0.0, rng.normal(2.2, 0.8)).__round__(2)),
                duration=duration,
                elevation_gain=float(max(0.0, rng.normal(30.0, 20.0)).__round__(1)),
                average_heart_rate=float(rng.normal(112.0, 12.0).__round__(1)),
                calories=float(max(0.0, rng.normal(280.0, 90.0)).__round__(1)),
                steps=float(max(0.0, rng.normal(4200.0, 1500.0)).__round__(0)),
                active_zone_minutes=float(max(0.0, rng.normal(18.0, 8.0)).__round__(1)),
            )
        )

    population_rows = []
    from .types import AGE_GROUPS, GENDERS

    for age_index, age_group in enumerate(AGE_GROUPS):
        for gender_index, gender in enumerate(GENDERS):
            base = 1.0 + 0.05 * age_index + 0.03 * gender_index
            for percentile in PERCENTILE_GRID:
                p = percentile / 100.0
                population_rows.append(
                    PopulationPercentileRow(
                        percentile=percentile,
                        age_group=age_group,
                        gender=gender,
                        resting_heart_rate=round(50.0 * base + 25.0 * p, 2),
                        heart_rate_variability=round(20.0 * base + 55.0 * p, 2),
                        steps=round(2500.0 * base + 11000.0 * p, 0),
                        deep_sleep_minutes=round(40.0 * base + 60.0 * p, 2),
                        rem_sleep_minutes=round(55.0 * base + 70.0 * p, 2),
                        light_sleep_minutes=round(150.0 * base + 130.0 * p, 2),
                        stress_management_score=round(55.0 * base + 35.0 * p, 2),
                        fatburn_active_zone_minutes=round(8.0 * base + 28.0 * p, 2),
                        cardio_active_zone_minutes=round(3.0 * base + 17.0 * p, 2),
                        peak_active_zone_minutes=round(1.0 * base + 9.0 * p, 2),
                    )
                )

    tables = validate_tables(summary_rows, activity_rows, population_rows)
    assert not tables.diagnostics, tables.diagnostics

    hrv_present = [float(v) for v, m in zip(hrv, hrv_missing) if not m]
    ground_truth = {
        "days": days,
        "summary_rows": len(summary_rows),
        "activity_rows": len(activity_rows),
        "population_rows": len(population_rows),
        "percentile_grid": list(PERCENTILE_GRID),
        "steps_mean": float(steps.mean()),
        "steps_min": float(steps.min()),
        "steps_max": float(steps.max()),
        "sleep_mean": float(sleep.mean()),
        "hrv_count": len(hrv_present),
        "hrv_missing_fraction": 1.0 - len(hrv_present) / days,
        "stress_count": int((~stress_missing).sum()),
    }
    return tables, ground_truth
