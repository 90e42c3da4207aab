"""Evaluation harnesses: plan rubric scoring, generated-code unit suites,
diagnosis-ranking accuracy, and per-mode cost reporting."""

from .autorater import (
    ALIGNMENT_TEMPLATE,
    TOPIC_TEMPLATE,
    AutorateResult,
    autorate_plan,
)
from .code_suite import (
    CATEGORIES,
    CodeSuite,
    CodeSuiteResult,
    DEFAULT_TOLERANCE,
    ExpectedSpec,
    SuiteError,
    SuiteTest,
    TestOutcome,
    build_test_script,
    bundled_suite_names,
    compare_values,
    floats_match,
    load_suite,
    run_code_suite,
)
from .cost import CostReport, ModeCost, cost_report
from .ddx import (
    DdxCase,
    DdxScore,
    ExactMatchJudge,
    JUDGE_TEMPLATE,
    JudgeParseError,
    LlmDdxJudge,
    PENALTY_RANK,
    load_ddx_fixture,
    score_ddx,
)
from .rubric import (
    ANSWERS,
    InconsistentSheet,
    PlanScore,
    Rubric,
    RubricError,
    RubricItem,
    TOPICS,
    load_rubric,
    normalize_answer,
    satisfactory_sheet,
    score_plan,
    validate_sheet,
)

__all__ = [
    "ALIGNMENT_TEMPLATE",
    "ANSWERS",
    "AutorateResult",
    "CATEGORIES",
    "CodeSuite",
    "CodeSuiteResult",
    "CostReport",
    "DEFAULT_TOLERANCE",
    "DdxCase",
    "DdxScore",
    "ExactMatchJudge",
    "ExpectedSpec",
    "InconsistentSheet",
    "JUDGE_TEMPLATE",
    "JudgeParseError",
    "LlmDdxJudge",
    "ModeCost",
    "PENALTY_RANK",
    "PlanScore",
    "Rubric",
    "RubricError",
    "RubricItem",
    "SuiteError",
    "SuiteTest",
    "TOPICS",
    "TestOutcome",
    "autorate_plan",
    "build_test_script",
    "bundled_suite_names",
    "compare_values",
    "cost_report",
    "floats_match",
    "load_ddx_fixture",
    "load_rubric",
    "load_suite",
    "normalize_answer",
    "run_code_suite",
    "satisfactory_sheet",
    "score_ddx",
    "score_plan",
    "validate_sheet",
]
