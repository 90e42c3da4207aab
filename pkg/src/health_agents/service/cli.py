"""Command line front door.

Subcommands: serve, chat, eval plan, eval code, eval ddx, ingest, cost.
Bad flags or unknown subcommands exit 2 with usage; eval subcommands exit
1 when a threshold flag is violated."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..data_model import FormatError, SchemaError, load_tables, tables_to_wire
from ..ds_agent import DataScienceAgent
from ..evals import (
    ExactMatchJudge,
    LlmDdxJudge,
    autorate_plan,
    cost_report,
    load_ddx_fixture,
    load_rubric,
    load_suite,
    run_code_suite,
    score_ddx,
    score_plan,
)
from ..gateway import Gateway
from ..orchestrator import ConversationEngine, SessionTrace
from .config import ApiConfig, ConfigError, load_config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="health-agents",
        description="Multi-agent health conversation service and eval runner.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    serve = commands.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", required=True, help="JSON config file")

    chat = commands.add_parser("chat", help="interactive terminal session")
    chat.add_argument("--mode", default="pha", choices=("pha", "parallel", "single"))
    chat.add_argument("--persona", default="", help="persona id from the data dir")
    chat.add_argument("--config", default=None, help="JSON config file")

    evals = commands.add_parser("eval", help="batch evaluation jobs")
    eval_kinds = evals.add_subparsers(dest="eval_kind", required=True)

    plan = eval_kinds.add_parser("plan", help="rubric-grade analysis plans")
    plan.add_argument("--queries", required=True, help="JSON file of plans to grade")
    plan.add_argument("--out", required=True, help="output JSON path")
    plan.add_argument("--config", default=None, help="JSON config file")
    plan.add_argument("--min-score", type=float, default=None)

    code = eval_kinds.add_parser("code", help="run generated-code unit suites")
    code.add_argument("--suites", required=True, help="directory of suite JSON files")
    code.add_argument("--out", required=True, help="output JSON path")
    code.add_argument("--config", default=None, help="JSON config file")
    code.add_argument("--min-pass-rate", type=float, default=None)

    ddx = eval_kinds.add_parser("ddx", help="score differential-diagnosis ranking")
    ddx.add_argument("--cases", required=True, help="JSON file of ranked cases")
    ddx.add_argument("--out", required=True, help="output JSON path")
    ddx.add_argument("--judge", default="exact", choices=("exact", "llm"))
    ddx.add_argument("--config", default=None, help="JSON config file")
    ddx.add_argument("--min-top10", type=float, default=None)

    ingest = commands.add_parser(
        "ingest", help="convert a directory of per-table CSVs to canonical JSON"
    )
    ingest.add_argument("--dir", required=True, help="directory with *.csv tables")
    ingest.add_argument(
        "--out", default=None, help="output JSON path (default DIR/tables.json)"
    )

    cost = commands.add_parser("cost", help="per-mode cost table from saved traces")
    cost.add_argument("--traces", required=True, help="JSON file of session traces")
    cost.add_argument("--json", action="store_true", help="print JSON, not a table")

    return parser


def _load_optional_config(path: str | None) -> ApiConfig:
    if path is None:
        return ApiConfig()
    return load_config(path)


def _gateway(config: ApiConfig) -> Gateway:
    return Gateway(config.build_backend())


# ---------------------------------------------------------------- commands


def _cmd_serve(args) -> int:
    import uvicorn

    from .app import create_app

    config = load_config(args.config)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


def _cmd_chat(args) -> int:
    config = _load_optional_config(args.config)
    engine = ConversationEngine(
        _gateway(config), matrix=config.build_matrix()
    )
    personas = config.load_personas()
    persona = None
    tables = None
    if args.persona:
        bundle = personas.get(args.persona)
        if bundle is None:
            print(f"unknown persona {args.persona!r}", file=sys.stderr)
            return 1
        persona, tables = bundle.profile, bundle.tables
    session = engine.open_session(
        session_id="terminal",
        mode=args.mode,
        persona=persona,
        tables=tables,
        persona_id=args.persona,
    )
    print(f"mode={args.mode}; empty line or /quit ends the chat")
    for line in sys.stdin:
        text = line.strip()
        if not text or text == "/quit":
            break
        try:
            reply, turn = engine.respond(session, text)
        except Exception as exc:
            print(f"error: {exc}", file=sys.stderr)
            continue
        print(f"[turn {turn.turn_id}] {reply}")
        if session.ended:
            print("(session concluded)")
            break
    return 0


def _cmd_eval_plan(args) -> int:
    config = _load_optional_config(args.config)
    gateway = _gateway(config)
    rubric = load_rubric()
    entries = json.loads(Path(args.queries).read_text(encoding="utf-8"))
    if isinstance(entries, dict):
        entries = entries.get("plans", [])
    results = []
    for entry in entries:
        rated = autorate_plan(
            gateway,
            query=str(entry.get("query", "")),
            data_summary=str(entry.get("data_summary", "")),
            plan=str(entry.get("plan", "")),
            rubric=rubric,
        )
        score = score_plan(rubric, rated.sheet)
        results.append(
            {
                "query": entry.get("query", ""),
                "deducted": score.deducted,
                "normalized": score.normalized,
                "by_topic": dict(score.by_topic),
                "flagged": list(rated.flagged),
            }
        )
    mean = (
        sum(r["normalized"] for r in results) / len(results) if results else 0.0
    )
    payload = {"plans": results, "mean_normalized": mean}
    Path(args.out).write_text(json.dumps(payload, indent=1), encoding="utf-8")
    print(f"graded {len(results)} plans; mean normalized score {mean:.3f}")
    if args.min_score is not None and mean < args.min_score:
        print(f"below threshold {args.min_score}", file=sys.stderr)
        return 1
    return 0


def _cmd_eval_code(args) -> int:
    config = _load_optional_config(args.config)
    agent = DataScienceAgent(_gateway(config))
    suite_dir = Path(args.suites)
    suite_files = sorted(suite_dir.glob("*.json"))
    if not suite_files:
        print(f"no suite files in {suite_dir}", file=sys.stderr)
        return 1
    reports = []
    worst = 1.0
    for path in suite_files:
        suite = load_suite(path)
        result = run_code_suite(suite, agent)
        reports.append(result.to_json_dict())
        worst = min(worst, result.pass_rate)
        print(result.render_text())
    Path(args.out).write_text(
        json.dumps({"suites": reports}, indent=1), encoding="utf-8"
    )
    if args.min_pass_rate is not None and worst < args.min_pass_rate:
        print(f"pass rate below threshold {args.min_pass_rate}", file=sys.stderr)
        return 1
    return 0


def _cmd_eval_ddx(args) -> int:
    cases = load_ddx_fixture(args.cases)
    if args.judge == "exact":
        judge = ExactMatchJudge()
    else:
        config = _load_optional_config(args.config)
        judge = LlmDdxJudge(_gateway(config))
    score = score_ddx(cases, judge)
    payload = score.to_json_dict()
    Path(args.out).write_text(json.dumps(payload, indent=1), encoding="utf-8")
    print(
        f"cases={len(cases)} scored={len(score.ranks)} excluded={score.excluded}"
        f" top1={score.top1:.3f} top5={score.top5:.3f} top10={score.top10:.3f}"
    )
    if args.min_top10 is not None and score.top10 < args.min_top10:
        print(f"top-10 accuracy below threshold {args.min_top10}", file=sys.stderr)
        return 1
    return 0


def _cmd_ingest(args) -> int:
    source = Path(args.dir)
    try:
        tables = load_tables(source, format="csv")
    except (FormatError, SchemaError, OSError) as exc:
        print(f"ingest failed: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out) if args.out else source / "tables.json"
    out.write_text(json.dumps(tables_to_wire(tables), indent=1), encoding="utf-8")
    kept = {
        "summary": len(tables.summary),
        "activities": len(tables.activities),
        "population": len(tables.population),
    }
    print(f"wrote {out}; rows kept {kept}; dropped {len(tables.diagnostics)}")
    for diagnostic in tables.diagnostics[:10]:
        print(
            f"  dropped {diagnostic.table}[{diagnostic.row_index}]:"
            f" {'; '.join(diagnostic.problems)}"
        )
    return 0


def _cmd_cost(args) -> int:
    payload = json.loads(Path(args.traces).read_text(encoding="utf-8"))
    if isinstance(payload, dict):
        payload = payload.get("traces", [])
    traces = [SessionTrace.from_dict(raw) for raw in payload]
    report = cost_report(traces)
    if args.json:
        print(json.dumps(report.to_json_dict(), indent=1))
    else:
        print(report.render_text())
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "chat":
            return _cmd_chat(args)
        if args.command == "eval":
            if args.eval_kind == "plan":
                return _cmd_eval_plan(args)
            if args.eval_kind == "code":
                return _cmd_eval_code(args)
            return _cmd_eval_ddx(args)
        if args.command == "ingest":
            return _cmd_ingest(args)
        return _cmd_cost(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
