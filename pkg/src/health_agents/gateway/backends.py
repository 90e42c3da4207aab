"""Model backends: a deterministic scripted mock and a minimal HTTP client.

The scripted backend matches requests by a fingerprint of the template id plus
the sorted variable bindings, so cosmetic whitespace changes in template
bodies never break a script. Unmatched requests fall through to an ordered
queue; in strict mode an unmatched request with an empty queue is an error.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import urllib.error
import urllib.request
from collections import deque
from typing import TYPE_CHECKING, Mapping, Protocol

if TYPE_CHECKING:
    from .core import CompletionRequest


class BackendError(Exception):
    pass


class UnscriptedPrompt(Exception):
    pass


def fingerprint(template_id: str, variables: Mapping[str, object]) -> str:
    canonical = json.dumps(
        {
            "template_id": template_id,
            "variables": sorted((str(k), str(v)) for k, v in variables.items()),
        },
        ensure_ascii=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class Backend(Protocol):
    def generate(self, request: "CompletionRequest", prompt: str) -> str: ...


class ScriptedBackend:
    def __init__(self, strict: bool = True) -> None:
        self.strict = strict
        self._by_fingerprint: dict[str, str] = {}
        self._queue: deque[str] = deque()
        self._lock = threading.Lock()

    def script(
        self, template_id: str, variables: Mapping[str, object], response: str
    ) -> None:
        with self._lock:
            self._by_fingerprint[fingerprint(template_id, variables)] = response

    def enqueue(self, *responses: str) -> None:
        with self._lock:
            self._queue.extend(responses)

    def pending(self) -> int:
        with self._lock:
            return len(self._queue)

    def generate(self, request: "CompletionRequest", prompt: str) -> str:
        with self._lock:
            key = fingerprint(request.template_id, request.variables)
            if key in self._by_fingerprint:
                return self._by_fingerprint[key]
            if self._queue:
                return self._queue.popleft()
            if self.strict:
                raise UnscriptedPrompt(
                    f"no scripted response for template {request.template_id!r} "
                    f"with variables {sorted(request.variables)}"
                )
            return "unscripted-response"


class HttpBackend:
    """POSTs {model, prompt, params} as JSON and expects {"text": ...} back."""

    def __init__(
        self,
        endpoint: str,
        model_name: str,
        auth_env_var: str | None = None,
        timeout: float = 60.0,
    ) -> None:
        self.endpoint = endpoint
        self.model_name = model_name
        self.auth_env_var = auth_env_var
        self.timeout = timeout

    def generate(self, request: "CompletionRequest", prompt: str) -> str:
        payload = {
            "model": self.model_name,
            "prompt": prompt,
            "max_tokens": request.params.max_tokens,
            "temperature": request.params.temperature,
            "stop_sequences": list(request.params.stop_sequences),
        }
        headers = {"Content-Type": "application/json"}
        if self.auth_env_var:
            token = os.environ.get(self.auth_env_var)
            if not token:
                raise BackendError(
                    f"auth env var {self.auth_env_var!r} is not set"
                )
            headers["Authorization"] = f"Bearer {token}"
        http_request = urllib.request.Request(
            self.endpoint,
            data=json.dumps(payload).encode("utf-8"),
            headers=headers,
            method="POST",
        )
        try:
            with urllib.request.urlopen(http_request, timeout=self.timeout) as reply:
                body = json.loads(reply.read().decode("utf-8"))
        except (urllib.error.URLError, TimeoutError, json.JSONDecodeError) as exc:
            raise BackendError(f"completion request failed: {exc}") from exc
        text = body.get("text")
        if not isinstance(text, str):
            raise BackendError("backend reply carries no text field")
        return text


def backend_from_config(config: Mapping[str, object]) -> Backend:
    """Build a backend from {kind: scripted|http, endpoint, auth-env-var, model-name}."""
    kind = config.get("kind")
    if kind == "scripted":
        return ScriptedBackend(strict=bool(config.get("strict", True)))
    if kind == "http":
        endpoint = config.get("endpoint")
        model_name = config.get("model-name")
        if not isinstance(endpoint, str) or not isinstance(model_name, str):
            raise BackendError("http backend config needs endpoint and model-name")
        auth = config.get("auth-env-var")
        return HttpBackend(
            endpoint=endpoint,
            model_name=model_name,
            auth_env_var=auth if isinstance(auth, str) else None,
        )
    raise BackendError(f"unknown backend kind {kind!r}")
