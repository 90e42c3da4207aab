"""Service configuration: listen address, model backend, tool fixtures,
routing matrix, persona/data directory, session store, and auth token.

Every referenced path must exist when the config is validated, so a
misconfigured deployment fails at startup instead of mid-conversation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..data_model import PersonaProfile, WearableTables, load_persona, load_tables
from ..gateway import Backend, ScriptedBackend, backend_from_config
from ..orchestrator import CollaborationMatrix, load_matrix

PERSONAS_SUBDIR = "personas"
TABLES_SUBDIR = "tables"


class ConfigError(Exception):
    """The service configuration is unusable."""


@dataclass(frozen=True)
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    backend: dict = field(default_factory=lambda: {"kind": "scripted"})
    tool_fixture_dir: str | None = None
    matrix_path: str | None = None
    data_dir: str | None = None
    store_dir: str | None = None
    bearer_token: str = ""
    base_dir: Path = field(default_factory=Path)

    def _resolve(self, value: str) -> Path:
        path = Path(value)
        return path if path.is_absolute() else self.base_dir / path

    def validate(self) -> None:
        problems: list[str] = []
        if not 0 < self.port < 65536:
            problems.append(f"port out of range: {self.port}")
        if self.backend.get("kind") not in ("scripted", "http"):
            problems.append(f"unknown backend kind {self.backend.get('kind')!r}")
        playbook = self.backend.get("playbook")
        if playbook is not None and not self._resolve(str(playbook)).is_file():
            problems.append(f"backend playbook missing: {playbook}")
        for label, value, want_dir in (
            ("tool fixture dir", self.tool_fixture_dir, True),
            ("matrix file", self.matrix_path, False),
            ("data dir", self.data_dir, True),
        ):
            if value is None:
                continue
            path = self._resolve(value)
            if want_dir and not path.is_dir():
                problems.append(f"{label} missing: {value}")
            if not want_dir and not path.is_file():
                problems.append(f"{label} missing: {value}")
        if problems:
            raise ConfigError("; ".join(problems))

    # ------------------------------------------------------------ builders

    def build_backend(self) -> Backend:
        backend = backend_from_config(
            {k: v for k, v in self.backend.items() if k != "playbook"}
        )
        playbook = self.backend.get("playbook")
        if playbook is not None:
            if not isinstance(backend, ScriptedBackend):
                raise ConfigError("playbook applies to scripted backends only")
            _apply_playbook(backend, self._resolve(str(playbook)))
        return backend

    def build_matrix(self) -> CollaborationMatrix:
        if self.matrix_path is None:
            return load_matrix()
        return load_matrix(self._resolve(self.matrix_path))

    def load_personas(self) -> dict[str, "PersonaBundle"]:
        if self.data_dir is None:
            return {}
        root = self._resolve(self.data_dir)
        personas_dir = root / PERSONAS_SUBDIR
        bundles: dict[str, PersonaBundle] = {}
        if personas_dir.is_dir():
            for path in sorted(personas_dir.glob("*.txt")):
                persona_id = path.stem
                profile = load_persona(path)
                tables = None
                tables_path = root / TABLES_SUBDIR / f"{persona_id}.json"
                if tables_path.is_file():
                    tables = load_tables(tables_path)
                bundles[persona_id] = PersonaBundle(
                    persona_id=persona_id, profile=profile, tables=tables
                )
        return bundles

    def resolved_store_dir(self) -> Path | None:
        if self.store_dir is None:
            return None
        return self._resolve(self.store_dir)


@dataclass(frozen=True)
class PersonaBundle:
    persona_id: str
    profile: PersonaProfile
    tables: WearableTables | None = None


def _apply_playbook(backend: ScriptedBackend, path: Path) -> None:
    """Preload scripted completions: {"scripted": [{template_id, variables,
    response}], "queue": [response, ...]}."""
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read playbook {path}: {exc}") from exc
    for entry in payload.get("scripted", ()):
        backend.script(
            template_id=str(entry["template_id"]),
            variables=dict(entry.get("variables", {})),
            response=str(entry["response"]),
        )
    queued = payload.get("queue", ())
    if queued:
        backend.enqueue(*[str(item) for item in queued])


def load_config(path: str | Path) -> ApiConfig:
    """Read a JSON config file; relative paths resolve against its parent."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("config top level must be a JSON object")
    known = {
        "host",
        "port",
        "backend",
        "tool_fixture_dir",
        "matrix_path",
        "data_dir",
        "store_dir",
        "bearer_token",
    }
    unknown = set(payload) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    config = ApiConfig(
        host=str(payload.get("host", "127.0.0.1")),
        port=int(payload.get("port", 8000)),
        backend=dict(payload.get("backend", {"kind": "scripted"})),
        tool_fixture_dir=payload.get("tool_fixture_dir"),
        matrix_path=payload.get("matrix_path"),
        data_dir=payload.get("data_dir"),
        store_dir=payload.get("store_dir"),
        bearer_token=str(payload.get("bearer_token", "")),
        base_dir=path.parent,
    )
    config.validate()
    return config
