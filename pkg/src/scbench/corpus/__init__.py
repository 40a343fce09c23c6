"""Contract corpus loading, annotation parsing, curation, and statistics.

A corpus is a list of :class:`ContractCase`. The labelled layout is
``<root>/<class_dir>/<name>.sol`` plus ``<root>/safe/``; scaled corpora
are flat directories or a CSV export of (address, source). An optional
``metadata.csv`` sidecar (id, ISO-8601 timestamp, wei value) feeds the
time-series reports.
"""

from __future__ import annotations

import csv
import hashlib
import re
import warnings
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Callable, Iterable, Mapping

from ..errors import AnnotationMismatch, ScbenchError
from ..taxonomy import Taxonomy, default_taxonomy
from .lexer import (BACKEND, count_loc, has_pragma, normalize_source,
                    strip_comments)

__all__ = [
    "BACKEND",
    "ContractCase",
    "ClassStat",
    "CorpusStats",
    "count_loc",
    "dedup",
    "has_pragma",
    "load_csv_corpus",
    "load_flat",
    "load_labelled",
    "load_metadata",
    "normalize_source",
    "parse_annotations",
    "pragma_filter",
    "scan_problems",
    "stats",
    "strip_comments",
]

_HEADER_RE = re.compile(r"@vulnerable_at_lines\s*:\s*([0-9][0-9,\s]*)")
_MARKER_RE = re.compile(r"<yes>\s*<report>\s*([A-Za-z0-9_\-]+)")


@dataclass(frozen=True)
class ContractCase:
    """One corpus entry: source text plus its ground-truth labels."""

    id: str
    source: str
    expected: Mapping[str, frozenset[int]] = field(default_factory=dict)
    created_at: datetime | None = None
    tx_value: int | None = None  # wei

    @property
    def safe(self) -> bool:
        return not self.expected

    def line_count(self) -> int:
        return len(self.source.splitlines())


def parse_annotations(
    source: str, taxonomy: Taxonomy | None = None
) -> dict[str, frozenset[int]]:
    """Extract ground-truth labels from an annotated contract.

    Inline ``<yes> <report> MARKER`` comments label the first non-comment
    line below them; a ``@vulnerable_at_lines`` header contributes extra
    line numbers. Header lines fold into the single inline class when
    there is exactly one; otherwise unattributable header lines trigger an
    :class:`AnnotationMismatch` warning, as does any header whose line set
    disagrees with the inline markers.
    """
    taxonomy = taxonomy or default_taxonomy()
    stripped_lines = strip_comments(source, strict=False).splitlines()
    raw_lines = source.splitlines()

    inline: dict[str, set[int]] = {}
    for idx, raw in enumerate(raw_lines):
        m = _MARKER_RE.search(raw)
        if not m:
            continue
        cls = taxonomy.class_for_marker(m.group(1))
        target = None
        for k in range(idx + 1, len(stripped_lines)):
            if stripped_lines[k].strip():
                target = k + 1  # line numbers are 1-based
                break
        if target is None:
            warnings.warn(
                AnnotationMismatch(
                    f"marker {m.group(1)!r} on line {idx + 1} has no "
                    "following statement"
                )
            )
            continue
        inline.setdefault(cls.id, set()).add(target)

    header: set[int] = set()
    hm = _HEADER_RE.search(source)
    if hm:
        header = {int(tok) for tok in hm.group(1).split(",") if tok.strip()}

    result = {cid: set(lines) for cid, lines in inline.items()}
    if header:
        inline_union = set().union(*inline.values()) if inline else set()
        if len(result) == 1:
            if header != inline_union:
                warnings.warn(
                    AnnotationMismatch(
                        f"header lines {sorted(header)} disagree with inline "
                        f"marker lines {sorted(inline_union)}"
                    )
                )
            (only,) = result
            result[only] |= header
        elif not result:
            warnings.warn(
                AnnotationMismatch(
                    f"header declares lines {sorted(header)} but no inline "
                    "markers are present"
                )
            )
        else:
            stray = header - inline_union
            if stray:
                warnings.warn(
                    AnnotationMismatch(
                        f"header lines {sorted(stray)} match no inline marker "
                        "in a multi-class file"
                    )
                )

    return {cid: frozenset(lines) for cid, lines in result.items()}


def dedup(
    cases: Iterable[ContractCase],
    digest: Callable[[bytes], "hashlib._Hash"] = hashlib.md5,
) -> tuple[list[ContractCase], int]:
    """Drop cases whose normalized source repeats an earlier checksum.

    The checksum is a dedup key, not a security boundary, so MD5 is the
    default; pass any hashlib constructor to swap it.
    """
    seen: set[str] = set()
    kept: list[ContractCase] = []
    removed = 0
    for case in cases:
        key = digest(normalize_source(case.source, strict=False).encode("utf-8")).hexdigest()
        if key in seen:
            removed += 1
        else:
            seen.add(key)
            kept.append(case)
    return kept, removed


def pragma_filter(cases: Iterable[ContractCase]) -> list[ContractCase]:
    """Keep only cases with a ``pragma solidity`` directive outside comments."""
    return [case for case in cases if has_pragma(case.source)]


@dataclass(frozen=True)
class ClassStat:
    class_id: str
    name: str
    count: int
    loc: int


@dataclass(frozen=True)
class CorpusStats:
    per_class: tuple[ClassStat, ...]
    safe_count: int
    safe_loc: int

    @property
    def total_cases(self) -> int:
        return sum(s.count for s in self.per_class) + self.safe_count

    @property
    def total_loc(self) -> int:
        return sum(s.loc for s in self.per_class) + self.safe_loc


def stats(cases: Iterable[ContractCase], taxonomy: Taxonomy | None = None) -> CorpusStats:
    """Per-class case counts and LoC; a multi-label case counts once per class."""
    taxonomy = taxonomy or default_taxonomy()
    counts = {c.id: 0 for c in taxonomy}
    locs = {c.id: 0 for c in taxonomy}
    safe_count = 0
    safe_loc = 0
    for case in cases:
        loc = count_loc(case.source)
        if case.safe:
            safe_count += 1
            safe_loc += loc
        for cid in case.expected:
            counts[cid] += 1
            locs[cid] += loc
    return CorpusStats(
        per_class=tuple(
            ClassStat(c.id, c.name, counts[c.id], locs[c.id]) for c in taxonomy
        ),
        safe_count=safe_count,
        safe_loc=safe_loc,
    )


# ---------------------------------------------------------------------------
# loading

def load_metadata(path: str | Path) -> dict[str, tuple[datetime | None, int | None]]:
    """Sidecar rows: contract id, ISO-8601 timestamp, wei value."""
    meta: dict[str, tuple[datetime | None, int | None]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            created = row.get("created_at") or None
            ts = datetime.fromisoformat(created.replace("Z", "+00:00")) if created else None
            value = row.get("tx_value_wei")
            meta[row["id"]] = (ts, int(value) if value else None)
    return meta


def _attach_metadata(case: ContractCase, meta) -> ContractCase:
    if case.id not in meta:
        return case
    ts, value = meta[case.id]
    return ContractCase(case.id, case.source, case.expected, ts, value)


def load_labelled(
    root: str | Path,
    taxonomy: Taxonomy | None = None,
    metadata: str | Path | None = None,
) -> list[ContractCase]:
    """Load ``<root>/<class_dir>/*.sol`` (including ``safe/``), sorted by id."""
    taxonomy = taxonomy or default_taxonomy()
    root = Path(root)
    if not root.is_dir():
        raise ScbenchError(f"corpus root {root} is not a directory")
    meta = load_metadata(metadata) if metadata else (
        load_metadata(root / "metadata.csv") if (root / "metadata.csv").is_file() else {}
    )
    cases = []
    for path in sorted(root.glob("*/*.sol")):
        source = path.read_text("utf-8")
        case = ContractCase(
            id=path.relative_to(root).with_suffix("").as_posix(),
            source=source,
            expected=parse_annotations(source, taxonomy),
        )
        cases.append(_attach_metadata(case, meta))
    return cases


def load_flat(
    directory: str | Path,
    taxonomy: Taxonomy | None = None,
    metadata: str | Path | None = None,
) -> list[ContractCase]:
    """Load a flat directory of ``*.sol`` files (scaled-corpus layout)."""
    taxonomy = taxonomy or default_taxonomy()
    directory = Path(directory)
    meta = load_metadata(metadata) if metadata else {}
    cases = []
    for path in sorted(directory.glob("*.sol")):
        source = path.read_text("utf-8")
        case = ContractCase(
            id=path.stem,
            source=source,
            expected=parse_annotations(source, taxonomy),
        )
        cases.append(_attach_metadata(case, meta))
    return cases


def load_csv_corpus(
    path: str | Path,
    taxonomy: Taxonomy | None = None,
    metadata: str | Path | None = None,
) -> list[ContractCase]:
    """Load a CSV export with ``address`` and ``source`` columns."""
    taxonomy = taxonomy or default_taxonomy()
    meta = load_metadata(metadata) if metadata else {}
    cases = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            case = ContractCase(
                id=row["address"],
                source=row["source"],
                expected=parse_annotations(row["source"], taxonomy),
            )
            cases.append(_attach_metadata(case, meta))
    return cases


def scan_problems(root: str | Path, taxonomy: Taxonomy | None = None) -> list[str]:
    """Validation sweep over a labelled corpus; returns human-readable issues.

    Checks alias totality, annotation line bounds, directory/label
    agreement, missing pragma directives, and annotation mismatches.
    """
    taxonomy = taxonomy or default_taxonomy()
    root = Path(root)
    problems: list[str] = []
    for path in sorted(root.glob("*/*.sol")):
        rel = path.relative_to(root).as_posix()
        source = path.read_text("utf-8")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                expected = parse_annotations(source, taxonomy)
            except ScbenchError as exc:
                problems.append(f"{rel}: {exc}")
                continue
        for w in caught:
            problems.append(f"{rel}: {w.message}")
        n_lines = len(source.splitlines())
        for cid, lines in expected.items():
            past_end = [ln for ln in lines if ln > n_lines]
            if past_end:
                problems.append(
                    f"{rel}: {cid} annotates lines {sorted(past_end)} beyond "
                    f"the {n_lines}-line source"
                )
        dir_name = path.parent.name
        dir_class = taxonomy.by_dir(dir_name)
        if dir_name == "safe":
            if expected:
                problems.append(f"{rel}: file under safe/ carries labels "
                                f"{sorted(expected)}")
        elif dir_class is not None and dir_class.id not in expected:
            problems.append(
                f"{rel}: directory says {dir_class.id} but labels are "
                f"{sorted(expected) or 'empty'}"
            )
        if not has_pragma(source):
            problems.append(f"{rel}: no pragma solidity directive")
    return problems
