#!/usr/bin/env python3
"""Throughput benchmark: compiled lexer kernel vs pure-Python fallback.

Normalization dominates large-corpus deduplication (tens of thousands of
mined contracts), which is why the kernel has a compiled twin. Run:

    python benchmarks/bench_normalize.py [--repeat N]
"""

from __future__ import annotations

import argparse
import random
import time
from pathlib import Path

from scbench.corpus import _lexer_py

try:
    from scbench.corpus import _lexer as _lexer_c
except ImportError:
    _lexer_c = None

REPO_ROOT = Path(__file__).resolve().parent.parent
LABELLED = REPO_ROOT / "datasets" / "labelled"


def synthetic_source(lines: int, seed: int) -> str:
    rng = random.Random(seed)
    atoms = [
        "    balances[msg.sender] += msg.value;",
        "    require(balances[msg.sender] >= amount); // guard",
        "    /* transfer out */ msg.sender.transfer(amount);",
        '    emit Log("state: // updated", amount);',
        "    uint rate = total / count;",
        "",
    ]
    body = [rng.choice(atoms) for _ in range(lines)]
    return "pragma solidity ^0.8.0;\ncontract Big {\n" + "\n".join(body) + "\n}\n"


def gather_inputs() -> list[str]:
    sources = []
    if LABELLED.is_dir():
        sources = [p.read_text("utf-8") for p in sorted(LABELLED.glob("*/*.sol"))]
    sources.append(synthetic_source(20_000, seed=1))
    return sources


def run(kernel, sources: list[str], repeat: int) -> float:
    timings = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        for src in sources:
            kernel.scan(src, True)
            kernel.scan(src, False)
        timings.append(time.perf_counter() - t0)
    return min(timings)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    sources = gather_inputs()
    total_bytes = sum(len(s.encode()) for s in sources)
    print(f"inputs: {len(sources)} sources, {total_bytes / 1e6:.1f} MB total "
          f"(two passes each)")

    py_time = run(_lexer_py, sources, args.repeat)
    print(f"pure python : {py_time:.3f}s  "
          f"({2 * total_bytes / py_time / 1e6:.1f} MB/s)")
    if _lexer_c is None:
        print("compiled    : not built (install with a C toolchain to compare)")
        return
    c_time = run(_lexer_c, sources, args.repeat)
    print(f"compiled    : {c_time:.3f}s  "
          f"({2 * total_bytes / c_time / 1e6:.1f} MB/s)")
    print(f"speedup     : {py_time / c_time:.1f}x")

    mismatches = sum(
        _lexer_c.scan(s, True) != _lexer_py.scan(s, True) for s in sources
    )
    print(f"parity      : {len(sources) - mismatches}/{len(sources)} identical")


if __name__ == "__main__":
    main()
