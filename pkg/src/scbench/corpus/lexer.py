"""Lexer backend selection and the public normalization operations.

The compiled extension is preferred when it built; the pure-Python kernel
is the fallback. ``SCBENCH_PURE_PYTHON=1`` forces the fallback, which the
parity tests and the benchmark use to compare both paths.
"""

from __future__ import annotations

import os
import re

from ..errors import UnterminatedBlockComment, UnterminatedString
from . import _lexer_py

if os.environ.get("SCBENCH_PURE_PYTHON"):
    _kernel = _lexer_py
    BACKEND = "python"
else:
    try:
        from . import _lexer as _kernel  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _kernel = _lexer_py
        BACKEND = "python"

_PRAGMA_RE = re.compile(r"pragma\s+solidity")


def _raise_for(err: int, pos: int) -> None:
    if err == _lexer_py.ERR_BLOCK_COMMENT:
        raise UnterminatedBlockComment(pos)
    if err == _lexer_py.ERR_STRING:
        raise UnterminatedString(pos)


def normalize_source(source: str, strict: bool = True) -> str:
    """Checksum form: comments and all whitespace removed.

    String literal contents (other than whitespace) are preserved, so
    ``s = "//x";`` normalizes to ``s="//x";``. Whitespace removal can butt
    two slashes into a fresh comment delimiter (``a / /*c*/ b``), so the
    scan folds until stable; that keeps normalization idempotent.
    """
    out, err, pos = _kernel.scan(source, True)
    if strict and err:
        _raise_for(err, pos)
    while True:
        # delimiters synthesized by earlier folds are canonicalized
        # leniently; the caller's source was already error-checked
        nxt, _, _ = _kernel.scan(out, True)
        if nxt == out:
            return out
        out = nxt


def strip_comments(source: str, strict: bool = True) -> str:
    """Comments removed, line structure kept (for LoC and line lookups)."""
    out, err, pos = _kernel.scan(source, False)
    if strict and err:
        _raise_for(err, pos)
    return out


def count_loc(source: str) -> int:
    """Lines that remain non-blank once comments (and the annotation
    markers they carry) are removed."""
    return sum(1 for line in strip_comments(source, strict=False).splitlines()
               if line.strip())


def has_pragma(source: str) -> bool:
    """True iff a ``pragma solidity`` directive survives comment removal."""
    return _PRAGMA_RE.search(strip_comments(source, strict=False)) is not None
