"""Adapter configuration and output parsing.

An adapter tells the runner how to obtain findings for one tool:

* ``replay`` — look the contract up in a pre-recorded fixture file
  (deterministic, no process spawn); the fixture is a JSON object keyed
  by contract id.
* ``stub`` — return the findings configured inline (test plumbing).
* ``json`` — spawn ``command`` and parse stdout as
  ``{"findings": [{"check": <rule id>, "line": <int?>}, ...]}``.
* ``text`` — spawn ``command`` and scan stdout lines for rule-map keys.

Native rule ids are mapped to taxonomy classes through ``rule_map``.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import ScbenchError

logger = logging.getLogger(__name__)

ADAPTER_KINDS = ("replay", "stub", "json", "text")

DEFAULT_TIMEOUT = 300.0  # seconds per scan task

# findings: class id -> set of flagged lines (possibly empty)
Findings = dict[str, frozenset[int]]

_CLASS_IDS = frozenset(f"V{i}" for i in range(1, 11))


@dataclass(frozen=True)
class AdapterConfig:
    """How to run one tool and turn its output into taxonomy findings."""

    kind: str = "replay"
    command: str | None = None       # template with {input} and {solc}
    timeout: float = DEFAULT_TIMEOUT
    rule_map: Mapping[str, str] = field(default_factory=dict)
    fixture: str | None = None       # replay: file, or dir resolved per tool
    findings: tuple[tuple[str, tuple[int, ...]], ...] = ()  # stub payload
    line_pattern: str | None = None  # text: regex with one integer group

    def __post_init__(self):
        if self.kind not in ADAPTER_KINDS:
            raise ScbenchError(f"unknown adapter kind {self.kind!r}")
        if self.kind in ("json", "text") and not self.command:
            raise ScbenchError(f"{self.kind} adapter requires a command")
        if self.kind == "replay" and self.command:
            raise ScbenchError("replay adapter takes a fixture, not a command")
        bad = set(self.rule_map.values()) - _CLASS_IDS
        if bad:
            raise ScbenchError(f"rule_map targets outside V1..V10: {sorted(bad)}")

    @classmethod
    def from_mapping(cls, raw: Mapping) -> "AdapterConfig":
        return cls(
            kind=raw.get("kind", "replay"),
            command=raw.get("command"),
            timeout=float(raw.get("timeout", DEFAULT_TIMEOUT)),
            rule_map=dict(raw.get("rule_map", {})),
            fixture=raw.get("fixture"),
            findings=tuple(
                (f["class"], tuple(f.get("lines", ())))
                for f in raw.get("findings", ())
            ),
            line_pattern=raw.get("line_pattern"),
        )


def merge_finding(findings: Findings, class_id: str, lines=()) -> None:
    findings[class_id] = findings.get(class_id, frozenset()) | frozenset(lines)


def parse_json_output(stdout: str, rule_map: Mapping[str, str]) -> Findings:
    """Parse the reference JSON schema and map rule ids to classes.

    Unknown rule ids are logged and dropped; they cannot be scored.
    """
    doc = json.loads(stdout)
    findings: Findings = {}
    for item in doc.get("findings", ()):
        rule = item.get("check")
        class_id = rule_map.get(rule)
        if class_id is None:
            logger.warning("adapter emitted unmapped rule id %r", rule)
            continue
        lines = item.get("line")
        merge_finding(findings, class_id, [lines] if isinstance(lines, int) else lines or [])
    return findings


def parse_text_output(
    stdout: str,
    rule_map: Mapping[str, str],
    line_pattern: str | None = None,
) -> Findings:
    """Scan output lines for rule-map keys (plain substring match)."""
    pattern = re.compile(line_pattern) if line_pattern else None
    findings: Findings = {}
    for out_line in stdout.splitlines():
        for rule, class_id in rule_map.items():
            if rule in out_line:
                lines: list[int] = []
                if pattern:
                    m = pattern.search(out_line)
                    if m:
                        lines = [int(m.group(1))]
                merge_finding(findings, class_id, lines)
    return findings


class ReplayFixture:
    """Pre-recorded results for one tool, keyed by contract id."""

    def __init__(self, entries: Mapping[str, Mapping]):
        self._entries = dict(entries)

    @classmethod
    def load(cls, path: str | Path) -> "ReplayFixture":
        return cls(json.loads(Path(path).read_text("utf-8")))

    def lookup(self, contract_id: str) -> tuple[str, int, Findings]:
        """Return (status, duration_ms, findings); absent ids scan clean."""
        entry = self._entries.get(contract_id)
        if entry is None:
            return "ok", 0, {}
        findings: Findings = {}
        for f in entry.get("findings", ()):
            merge_finding(findings, f["class"], f.get("lines", ()))
        return entry.get("status", "ok"), int(entry.get("duration_ms", 0)), findings


def resolve_replay_fixture(config: AdapterConfig, tool_name: str,
                           replay_dir: str | Path | None) -> Path:
    """Fixture resolution order: explicit config path, then <dir>/<tool>.json."""
    if config.fixture:
        p = Path(config.fixture)
        if p.is_dir():
            return p / f"{tool_name}.json"
        return p
    if replay_dir is not None:
        return Path(replay_dir) / f"{tool_name}.json"
    raise ScbenchError(
        f"replay adapter for {tool_name} has no fixture and no --replay dir was given"
    )
