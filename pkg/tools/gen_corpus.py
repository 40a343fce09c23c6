#!/usr/bin/env python3
"""Regenerate the shipped labelled corpus and replay fixtures.

Deterministic: a fixed seed drives every choice, so re-running this script
reproduces datasets/ byte for byte. Run from the repository root:

    python tools/gen_corpus.py

Layout produced:
    datasets/labelled/<class_dir>/*.sol   annotated contracts (+ safe/)
    datasets/labelled/metadata.csv        id, created_at, tx_value_wei
    datasets/replay/labelled/<Tool>.json  pre-recorded scan results
"""

from __future__ import annotations

import csv
import hashlib
import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

from scbench.taxonomy import Registry, default_taxonomy

SEED = 9021
ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "datasets"

# per-class case counts for the labelled corpus
COUNTS = {
    "V1": 81, "V2": 65, "V3": 52, "V4": 12, "V5": 60,
    "V6": 60, "V7": 10, "V8": 10, "V9": 11, "V10": 11,
}
SAFE_COUNT = 17

PRAGMAS = ["^0.4.24", "^0.5.0", "^0.5.12", "^0.6.0", "^0.7.6", "0.8.0"]

# (marker, vulnerable statement) variants per class; the statement must sit
# on the line right below its marker comment
SNIPPETS = {
    "V1": [
        ("REENTRANCY", '(bool ok, ) = msg.sender.call.value(amount)("");'),
        ("REENTRANCY", "msg.sender.call.value(balances[msg.sender])();"),
        ("RE_ENTRANCY", "caller.call.value(pending)();"),
    ],
    "V2": [
        ("ARITHMETIC", "balances[to] += value;"),
        ("INTEGER_OVERFLOW", "total = total + deposit;"),
        ("UNDERFLOW", "balances[msg.sender] -= value;"),
    ],
    "V3": [
        ("UNCHECKED_SEND", "beneficiary.send(value);"),
        ("UNHANDLED_EXCEPTION", "target.call(payload);"),
        ("UNCHECKED_LL_CALLS", "sink.call.value(fee)();"),
    ],
    "V4": [
        ("DELEGATECALL", "target.delegatecall(payload);"),
        ("UNSAFE_DELEGATECALL", "lib.delegatecall(msg.data);"),
    ],
    "V5": [
        ("TOD", "winner.transfer(reward);"),
        ("TRANSACTION_ORDER_DEPENDENCE", "payable(first).transfer(pot);"),
    ],
    "V6": [
        ("TIME_MANIPULATION", "if (block.timestamp % 2 == 0) { prize = pot; }"),
        ("TIMESTAMP", "require(now > deadline);"),
    ],
    "V7": [
        ("BAD_RANDOMNESS", "uint lucky = uint(blockhash(block.number - 1)) % span;"),
        ("RANDOMNESS", "uint draw = uint(keccak256(abi.encodePacked(now))) % 10;"),
    ],
    "V8": [
        ("TX_ORIGIN", "require(tx.origin == owner);"),
        ("AUTHORIZATION_THROUGH_TX_ORIGIN", "if (tx.origin == admin) { locked = false; }"),
    ],
    "V9": [
        ("SUICIDAL", "selfdestruct(msg.sender);"),
        ("UNPROTECTED_SELFDESTRUCT", "selfdestruct(payable(beneficiary));"),
    ],
    "V10": [
        ("GASLESS_SEND", "recipient.send(msg.value);"),
        ("GASLESS_SEND", "payable(user).send(refund);"),
    ],
}

FILLERS = [
    [
        "    function deposit() public payable {",
        "        balances[msg.sender] += msg.value;",
        "    }",
    ],
    [
        "    function balanceOf(address who) public view returns (uint) {",
        "        return balances[who];",
        "    }",
    ],
    [
        "    function setOwner(address next) public {",
        "        require(msg.sender == owner);",
        "        owner = next;",
        "    }",
    ],
    [
        "    function totalSupply() public view returns (uint) {",
        "        return total;",
        "    }",
    ],
    [
        "    function lock() public {",
        "        locked = true;",
        "    }",
    ],
]

LISTING = '''/*
 * @source: https://consensys.github.io/smart-contract-best-practices/known_attacks/
 * @author: consensys
 * @vulnerable_at_lines: 17
 */

pragma solidity ^0.5.0;

contract Reentrancy_insecure {

    // INSECURE
    mapping (address => uint) private userBalances;

    function withdrawBalance() public {
        uint amountToWithdraw = userBalances[msg.sender];
        // <yes> <report> REENTRANCY
        (bool success, ) = msg.sender.call.value(amountToWithdraw)(""); // At this point, the caller's code is executed, and can call withdrawBalance again
        require(success);
        userBalances[msg.sender] = 0;
    }
}
'''


def render_case(rng: random.Random, class_id: str, name: str) -> str:
    """One annotated contract; header line numbers computed after layout."""
    snippets = SNIPPETS[class_id]
    n_marks = 2 if rng.random() < 0.2 else 1
    pragma = rng.choice(PRAGMAS)

    body: list[str] = []
    body.append(f"contract {name} {{")
    body.append("")
    body.append("    mapping (address => uint) balances;")
    body.append("    address owner;")
    body.append("    uint total;")
    body.append("    bool locked;")
    body.append("")
    for filler in rng.sample(FILLERS, rng.randint(1, 3)):
        body.extend(filler)
        body.append("")
    for k in range(n_marks):
        marker, statement = rng.choice(snippets)
        body.append(f"    function risky{k}(address target, uint amount) public {{")
        body.append("        uint value = amount + 1;")
        body.append(f"        // <yes> <report> {marker}")
        body.append(f"        {statement}")
        body.append("    }")
        body.append("")
    for filler in rng.sample(FILLERS, rng.randint(0, 2)):
        body.extend(filler)
        body.append("")
    if body[-1] == "":
        body.pop()
    body.append("}")

    # the final file: 5 header lines, blank, pragma, blank, then the body
    prefix = 8
    vulnerable = [
        prefix + i + 2  # 1-based line right below each marker
        for i, line in enumerate(body)
        if "<yes> <report>" in line
    ]
    header = [
        "/*",
        f" * @source: generated/{name}",
        " * @author: scbench corpus generator",
        f" * @vulnerable_at_lines: {', '.join(map(str, vulnerable))}",
        " */",
        "",
        f"pragma solidity {pragma};",
        "",
    ]
    return "\n".join(header + body) + "\n"


def render_safe(rng: random.Random, name: str) -> str:
    pragma = rng.choice(PRAGMAS)
    body = [
        f"contract {name} {{",
        "",
        "    mapping (address => uint) balances;",
        "    address owner;",
        "    uint total;",
        "    bool locked;",
        "",
    ]
    for filler in rng.sample(FILLERS, rng.randint(2, 4)):
        body.extend(filler)
        body.append("")
    body.append("    function withdraw(uint amount) public {")
    body.append("        require(balances[msg.sender] >= amount);")
    body.append("        balances[msg.sender] -= amount;")
    body.append("        msg.sender.transfer(amount);")
    body.append("    }")
    body.append("}")
    header = [
        "/*",
        f" * @source: generated/{name}",
        " * @author: scbench corpus generator",
        " */",
        "",
        f"pragma solidity {pragma};",
        "",
    ]
    return "\n".join(header + body) + "\n"


def stable_fraction(*parts: str) -> float:
    """Deterministic pseudo-random in [0, 1) from the given strings."""
    digest = hashlib.md5("|".join(parts).encode()).hexdigest()
    return int(digest[:8], 16) / 0xFFFFFFFF


def write_corpus() -> dict[str, dict[str, frozenset[int]]]:
    taxonomy = default_taxonomy()
    rng = random.Random(SEED)
    root = OUT / "labelled"
    expected: dict[str, dict[str, frozenset[int]]] = {}

    for cls in taxonomy:
        class_dir = root / cls.dir_name
        class_dir.mkdir(parents=True, exist_ok=True)
        count = COUNTS[cls.id]
        start = 1
        if cls.id == "V1":
            (class_dir / "reentrancy_insecure.sol").write_text(LISTING, "utf-8")
            expected[f"{cls.dir_name}/reentrancy_insecure"] = {"V1": frozenset({17})}
            count -= 1
        for i in range(start, start + count):
            name = f"{cls.dir_name.title().replace('_', '')}Case{i:03d}"
            text = render_case(rng, cls.id, name)
            fname = f"{cls.dir_name}_{i:03d}"
            (class_dir / f"{fname}.sol").write_text(text, "utf-8")
            lines = frozenset(
                int(tok)
                for tok in text.split("@vulnerable_at_lines:")[1].splitlines()[0].split(",")
            )
            expected[f"{cls.dir_name}/{fname}"] = {cls.id: lines}

    safe_dir = root / "safe"
    safe_dir.mkdir(parents=True, exist_ok=True)
    for i in range(1, SAFE_COUNT + 1):
        name = f"SafeCase{i:03d}"
        (safe_dir / f"safe_{i:03d}.sol").write_text(render_safe(rng, name), "utf-8")
        expected[f"safe/safe_{i:03d}"] = {}
    return expected


def write_metadata(ids: list[str]) -> None:
    rng = random.Random(SEED + 1)
    t0 = datetime(2016, 10, 25, tzinfo=timezone.utc)
    span_days = (datetime(2023, 2, 23, tzinfo=timezone.utc) - t0).days
    rows = []
    for cid in sorted(ids):
        created = t0 + timedelta(days=rng.randint(0, span_days),
                                 seconds=rng.randint(0, 86399))
        value = rng.randint(0, 5000) * 10**16  # 0 .. 50 ether in 0.01 steps
        rows.append([cid, created.isoformat(), value])
    with open(OUT / "labelled" / "metadata.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "created_at", "tx_value_wei"])
        writer.writerows(rows)


def write_replay(expected: dict[str, dict[str, frozenset[int]]]) -> None:
    """Pre-recorded results: ground truth filtered by capability, with a
    deterministic miss rate and occasional false alarms on safe cases."""
    registry = Registry.load()
    replay_dir = OUT / "replay" / "labelled"
    replay_dir.mkdir(parents=True, exist_ok=True)
    avg_ms = {
        "Securify": 13370, "VeriSmart": 61460, "Mythril": 608400,
        "Oyente": 4310, "ConFuzzius": 887100, "sFuzz": 891900,
        "Slither": 1010, "Conkas": 78400, "GNNSCVD": 24720,
        "Eth2Vec": 2190, "Solhint": 1480, "SmartCheck": 2730,
        "Maian": 61130,
    }
    for tool in registry:
        entries = {}
        for cid in sorted(expected):
            truth = expected[cid]
            findings = []
            for class_id, lines in sorted(truth.items()):
                if class_id not in tool.capabilities:
                    continue
                if stable_fraction(tool.name, cid, class_id, "miss") < 0.15:
                    continue  # deterministic false negative
                findings.append({"class": class_id, "lines": sorted(lines)})
            if not truth and stable_fraction(tool.name, cid, "fp") < 0.05:
                spurious = sorted(tool.capabilities)[0]
                findings.append({"class": spurious, "lines": []})
            duration = int(avg_ms[tool.name] *
                           (0.5 + stable_fraction(tool.name, cid, "t")))
            entries[cid] = {
                "status": "ok",
                "duration_ms": duration,
                "findings": findings,
            }
        path = replay_dir / f"{tool.name}.json"
        path.write_text(json.dumps(entries, indent=1, sort_keys=True) + "\n", "utf-8")


def main() -> None:
    expected = write_corpus()
    write_metadata(list(expected))
    write_replay(expected)
    n_vuln = sum(1 for v in expected.values() if v)
    print(f"wrote {len(expected)} cases ({n_vuln} vulnerable) under {OUT}")


if __name__ == "__main__":
    main()
