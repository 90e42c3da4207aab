from typing import Any, Dict

import pandas as pd


def analysis(
    summary_df: pd.DataFrame,
    activities_df: pd.DataFrame,
    profile_df: pd.DataFrame,
    population_df: pd.DataFrame,
) -> Dict[str, Any]:
    """Compare activity levels between days that follow short (<4h) and
    regular sleep nights.

    Groups each day by the previous night's sleep duration, requires at
    least 30 days in both groups, and compares steps and active zone
    minutes with a t-test when both groups look normal (Shapiro-Wilk,
    p > 0.05) and a Mann-Whitney U test otherwise.
    """
    from scipy import stats

    df = summary_df.copy()
    df["prior_sleep_minutes"] = df["sleep_minutes"].shift(1)
    df = df.dropna(subset=["prior_sleep_minutes"])

    short_sleep = df[df["prior_sleep_minutes"] < 240]
    regular_sleep = df[df["prior_sleep_minutes"] >= 240]
    if len(short_sleep) < 30 or len(regular_sleep) < 30:
        return (
            "Insufficient data for analysis. Less than 30 days in one or both"
            " groups."
        )

    results: Dict[str, Any] = {
        "group_sizes": {
            "short_sleep_days": int(len(short_sleep)),
            "regular_sleep_days": int(len(regular_sleep)),
        },
        "summary_statistics": {},
        "statistical_tests": {},
    }
    for metric in ("steps", "active_zone_minutes"):
        short_values = short_sleep[metric]
        regular_values = regular_sleep[metric]
        results["summary_statistics"][metric] = {
            "short_sleep_mean": float(short_values.mean()),
            "regular_sleep_mean": float(regular_values.mean()),
        }
        short_normal = stats.shapiro(short_values).pvalue > 0.05
        regular_normal = stats.shapiro(regular_values).pvalue > 0.05
        if short_normal and regular_normal:
            outcome = stats.ttest_ind(short_values, regular_values, equal_var=False)
            test_used = "t-test"
        else:
            outcome = stats.mannwhitneyu(
                short_values, regular_values, alternative="two-sided"
            )
            test_used = "Mann-Whitney U"
        results["statistical_tests"][metric] = {
            "test_used": test_used,
            "statistic": float(outcome.statistic),
            "p_value": float(outcome.pvalue),
        }
    return results
