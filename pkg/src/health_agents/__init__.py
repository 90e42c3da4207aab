"""Multi-agent conversational engine for personal health queries.

Subpackages:
  data_model    persona + wearable table types, validation, schema summaries
  gateway       prompt templates, model backends, call ledger
  sandbox       subprocess sandbox for generated analysis code
  ds_agent      plan -> code -> execute -> narrate pipeline
  de_agent      tool-using domain expert loop and structured outputs
  hc_agent      coaching turn pipeline
  orchestrator  routing, reflection, memory, conversation engine, baselines
  evals         plan rubric, code suites, diagnosis ranking, cost reports
  service       HTTP API, CLI, session persistence
"""

__version__ = "0.1.0"
