"""Generated-script parsing and the static network-import screen."""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass


class CodeParseError(Exception):
    pass


class NetworkImportRejected(Exception):
    pass


ANALYSIS_SIGNATURE = (
    "def analysis(summary_df, activities_df, profile_df, population_df)"
    " -> Dict[str, Any]"
)

# the open-docstring prelude the code prompt primes the model with
CODE_PRELUDE = (
    "from typing import Any, Dict\n"
    "import pandas as pd\n"
    "import numpy as np\n"
    "import datetime\n"
    "\n"
    "def analysis(summary_df: pd.DataFrame | None ,\n"
    " activities_df: pd.DataFrame | None ,\n"
    " profile_df: pd.DataFrame | None,\n"
    " population_df: pd.DataFrame | None,) -> Dict[str, Any]:\n"
    ' """'
)

NETWORK_MODULES = frozenset(
    {
        "socket",
        "ssl",
        "http",
        "urllib",
        "urllib3",
        "requests",
        "httpx",
        "aiohttp",
        "ftplib",
        "smtplib",
        "telnetlib",
        "websockets",
        "xmlrpc",
        "poplib",
        "imaplib",
    }
)


@dataclass(frozen=True)
class ScriptSource:
    function_header: str
    body: str  # complete runnable script text
    attempt: int = 1

    def __post_init__(self) -> None:
        if self.attempt < 1:
            raise ValueError("attempt starts at 1")


_FENCE = re.compile(r"```(?:python)?\s*\n(.*?)```", re.DOTALL)


def screen_network_imports(source: str) -> None:
    """Static screen: reject imports of network-facing modules."""
    tree = ast.parse(source)
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                root = alias.name.split(".")[0]
                if root in NETWORK_MODULES:
                    raise NetworkImportRejected(f"import of {alias.name!r} rejected")
        elif isinstance(node, ast.ImportFrom):
            root = (node.module or "").split(".")[0]
            if root in NETWORK_MODULES:
                raise NetworkImportRejected(f"import from {node.module!r} rejected")


def _has_analysis_def(source: str) -> bool:
    try:
        tree = ast.parse(source)
    except SyntaxError:
        return False
    for node in ast.walk(tree):
        if isinstance(node, ast.FunctionDef) and node.name == "analysis":
            return len(node.args.args) == 4
    return False


def parse_script(response: str, attempt: int = 1) -> ScriptSource:
    """Parse a code response into a runnable ScriptSource.

    Accepts a fenced code block containing the full analysis function, or a
    bare continuation of the prompt's open docstring.
    """
    fenced = _FENCE.search(response)
    if fenced is not None:
        source = fenced.group(1).strip() + "\n"
    else:
        # repair responses are primed by an open fence: strip stray fence markers
        candidate = response.strip()
        if candidate.endswith("```"):
            candidate = candidate[:-3].rstrip()
        if candidate.startswith("```python"):
            candidate = candidate[len("```python") :].lstrip("\n")
        elif candidate.startswith("```"):
            candidate = candidate[3:].lstrip("\n")
        if "def analysis" in candidate:
            source = candidate + "\n"
        else:
            # docstring continuation: stitch onto the primed prelude
            source = CODE_PRELUDE + response.rstrip() + "\n"
    try:
        compile(source, "<generated>", "exec")
    except SyntaxError as exc:
        raise CodeParseError(f"generated code does not compile: {exc}") from exc
    if not _has_analysis_def(source):
        raise CodeParseError(
            "generated code lacks the four-argument analysis(...) function"
        )
    screen_network_imports(source)
    return ScriptSource(function_header=ANALYSIS_SIGNATURE, body=source, attempt=attempt)
