"""Per-mode cost aggregation over recorded session traces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from ..orchestrator.trace import SessionTrace


@dataclass(frozen=True)
class ModeCost:
    mode: str
    turns: int
    mean_calls_per_turn: float
    mean_wall_time: float


@dataclass(frozen=True)
class CostReport:
    modes: tuple[ModeCost, ...]

    @property
    def total_turns(self) -> int:
        return sum(entry.turns for entry in self.modes)

    def by_mode(self) -> Mapping[str, ModeCost]:
        return {entry.mode: entry for entry in self.modes}

    def to_json_dict(self) -> dict:
        return {
            "total_turns": self.total_turns,
            "modes": {
                entry.mode: {
                    "turns": entry.turns,
                    "mean_calls_per_turn": entry.mean_calls_per_turn,
                    "mean_wall_time": entry.mean_wall_time,
                }
                for entry in self.modes
            },
        }

    def render_text(self) -> str:
        header = f"{'mode':<10} {'turns':>6} {'calls/turn':>11} {'wall_time':>10}"
        lines = [header, "-" * len(header)]
        for entry in self.modes:
            lines.append(
                f"{entry.mode:<10} {entry.turns:>6}"
                f" {entry.mean_calls_per_turn:>11.2f}"
                f" {entry.mean_wall_time:>10.3f}"
            )
        if not self.modes:
            lines.append("(no turns recorded)")
        return "\n".join(lines)


def cost_report(traces: Iterable[SessionTrace]) -> CostReport:
    """Group every recorded turn by its mode and average the per-turn
    model-call count and wall time. An empty trace set yields an empty
    report rather than a division error."""
    calls: dict[str, list[int]] = {}
    times: dict[str, list[float]] = {}
    for trace in traces:
        for turn in trace.turns:
            calls.setdefault(turn.mode, []).append(turn.llm_calls)
            times.setdefault(turn.mode, []).append(turn.wall_time)
    modes = tuple(
        ModeCost(
            mode=mode,
            turns=len(calls[mode]),
            mean_calls_per_turn=sum(calls[mode]) / len(calls[mode]),
            mean_wall_time=sum(times[mode]) / len(times[mode]),
        )
        for mode in sorted(calls)
    )
    return CostReport(modes=modes)
