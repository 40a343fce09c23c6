"""Multi-criteria scoring: entropy weights, AHP weights, weighted sum.

All criteria here are benefit-type (higher is better). Matrices are tiny
(a dozen tools by four criteria), so the routines favour clarity and
determinism over vectorized cleverness.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
import numpy as np

from .errors import (DimensionMismatch, NonConvergence, NotReciprocal,
                     ScbenchError)
from .metrics import IndicatorMatrix

logger = logging.getLogger(__name__)

RECIPROCITY_TOL = 1e-9
WEIGHT_SUM_TOL = 1e-9
POWER_RESIDUAL = 1e-12
POWER_MAX_ITER = 100_000

# Saaty random-index constants; n=1,2 are consistent by construction.
RANDOM_INDEX = {1: 0.0, 2: 0.0, 3: 0.58, 4: 0.90, 5: 1.12,
                6: 1.24, 7: 1.32, 8: 1.41, 9: 1.45, 10: 1.49}

CONSISTENCY_LIMIT = 0.1


@dataclass(frozen=True)
class WeightVector:
    """Non-negative criterion weights summing to one."""

    values: tuple[float, ...]
    method: str = ""

    def __post_init__(self):
        if any(v < -WEIGHT_SUM_TOL for v in self.values):
            raise ScbenchError(f"negative weight in {self.values}")
        if abs(sum(self.values) - 1.0) > WEIGHT_SUM_TOL:
            raise ScbenchError(f"weights sum to {sum(self.values)}, not 1")

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class ConsistencyReport:
    lambda_max: float
    ci: float
    ri: float
    cr: float

    @property
    def consistent(self) -> bool:
        return self.cr <= CONSISTENCY_LIMIT


@dataclass(frozen=True)
class ScoreRow:
    tool: str
    score: float  # 0-100 scale
    rank: int


@dataclass(frozen=True)
class ScoreTable:
    method: str
    rows: tuple[ScoreRow, ...]

    def ranked_names(self) -> list[str]:
        return [r.tool for r in self.rows]

    def score_of(self, tool: str) -> float:
        for r in self.rows:
            if r.tool == tool:
                return r.score
        raise ScbenchError(f"tool {tool!r} not in score table")


def standardize(matrix: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Range-normalize each column to [0, 1].

    Constant columns carry no ranking information; they map to all-zeros
    and their indices are returned as the degeneracy flags.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise ScbenchError("decision matrix must be 2-dimensional")
    if not np.isfinite(m).all():
        raise ScbenchError("decision matrix contains non-finite values")
    lo = m.min(axis=0)
    hi = m.max(axis=0)
    degenerate = [j for j in range(m.shape[1]) if hi[j] == lo[j]]
    span = np.where(hi > lo, hi - lo, 1.0)
    out = (m - lo) / span
    for j in degenerate:
        out[:, j] = 0.0
    return out, degenerate


def ewm_weights(matrix: np.ndarray, method: str = "EWM") -> WeightVector:
    """Entropy weights: the more dispersed a criterion's standardized
    values, the lower its entropy and the higher its weight.

    Proportions are taken over the standardized columns; 0*ln(0) counts as
    zero. A fully degenerate matrix (every column constant) falls back to
    uniform weights with a warning.
    """
    m = np.asarray(matrix, dtype=float)
    if m.shape[0] < 2:
        raise ScbenchError("entropy weighting needs at least two alternatives")
    x, degenerate = standardize(m)
    n_alt, n_crit = x.shape
    k = 1.0 / math.log(n_alt)
    entropy = np.ones(n_crit)
    for j in range(n_crit):
        col_sum = x[:, j].sum()
        if col_sum == 0.0:
            continue  # degenerate: no information, entropy stays 1
        p = x[:, j] / col_sum
        nz = p[p > 0]
        entropy[j] = -k * float(np.sum(nz * np.log(nz)))
    divergence = 1.0 - entropy
    total = divergence.sum()
    if total <= 0.0:
        logger.warning("all criteria degenerate; falling back to uniform weights")
        return WeightVector(tuple([1.0 / n_crit] * n_crit), method)
    w = divergence / total
    return WeightVector(tuple(float(v) for v in w), method)


def parse_pairwise(text: str) -> np.ndarray:
    """Parse the plain-text judgment matrix format: the order n on the
    first line, then n rows of space-separated rationals like ``1/4``."""
    lines = [ln for ln in (raw.strip() for raw in text.splitlines())
             if ln and not ln.startswith("#")]
    if not lines:
        raise ScbenchError("empty pairwise matrix file")
    try:
        n = int(lines[0])
    except ValueError:
        raise ScbenchError(f"first line must be the order, got {lines[0]!r}") from None
    if len(lines) != n + 1:
        raise ScbenchError(f"expected {n} matrix rows, found {len(lines) - 1}")
    rows = []
    for ln in lines[1:]:
        entries = ln.split()
        if len(entries) != n:
            raise ScbenchError(f"row {ln!r} does not have {n} entries")
        rows.append([float(Fraction(tok)) for tok in entries])
    return np.array(rows, dtype=float)


def load_pairwise(path: str | Path) -> np.ndarray:
    return parse_pairwise(Path(path).read_text("utf-8"))


def _check_reciprocal(a: np.ndarray) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotReciprocal("judgment matrix must be square")
    if (a <= 0).any():
        raise NotReciprocal("judgment matrix entries must be positive")
    n = a.shape[0]
    for i in range(n):
        if abs(a[i, i] - 1.0) > RECIPROCITY_TOL:
            raise NotReciprocal(f"diagonal entry a[{i}][{i}] != 1")
        for j in range(i + 1, n):
            if abs(a[j, i] - 1.0 / a[i, j]) > RECIPROCITY_TOL:
                raise NotReciprocal(f"a[{j}][{i}] != 1/a[{i}][{j}]")


def ahp_weights(
    matrix: np.ndarray, method: str = "AHP"
) -> tuple[WeightVector, ConsistencyReport]:
    """Principal-eigenvector weights plus the consistency check.

    Power iteration runs until the eigen residual drops below 1e-12; the
    dominant eigenvalue comes from the Rayleigh quotient. CI is
    (lambda_max - n)/(n - 1); CR is CI over the Saaty random index and is
    defined as 0 for n <= 2.
    """
    a = np.asarray(matrix, dtype=float)
    _check_reciprocal(a)
    n = a.shape[0]

    w = np.full(n, 1.0 / n)
    lam = float(n)
    for _ in range(POWER_MAX_ITER):
        aw = a @ w
        lam = float(w @ aw) / float(w @ w)
        residual = float(np.max(np.abs(aw - lam * w)))
        w = aw / aw.sum()
        if residual < POWER_RESIDUAL:
            break
    else:
        raise NonConvergence(
            f"power iteration stalled at residual {residual:.3e}"
        )

    if n <= 2:
        report = ConsistencyReport(lambda_max=lam, ci=0.0, ri=0.0, cr=0.0)
    else:
        try:
            ri = RANDOM_INDEX[n]
        except KeyError:
            raise ScbenchError(f"no random-index constant for n={n}") from None
        ci = (lam - n) / (n - 1)
        report = ConsistencyReport(lambda_max=lam, ci=ci, ri=ri, cr=ci / ri)
    return WeightVector(tuple(float(v) for v in w), method), report


def overall_scores(
    indicators: IndicatorMatrix,
    weights: WeightVector,
    method: str | None = None,
    standardize_indicators: bool = False,
) -> ScoreTable:
    """Weighted sum of the indicator columns, on a 0-100 scale.

    Scores round half-to-even at three decimals before the x100; ranks are
    descending with ties broken by tool name. ``standardize_indicators``
    range-normalizes each column first, which rewards relative rather than
    absolute indicator positions.
    """
    if len(weights) != indicators.values.shape[1]:
        raise DimensionMismatch(
            f"{len(weights)} weights vs {indicators.values.shape[1]} criteria"
        )
    values = indicators.values
    if standardize_indicators:
        values, _ = standardize(values)
    raw = values @ weights.as_array()
    scored = sorted(
        ((tool, round(round(float(s), 3) * 100, 1))
         for tool, s in zip(indicators.tools, raw)),
        key=lambda item: (-item[1], item[0]),
    )
    rows = tuple(
        ScoreRow(tool=t, score=s, rank=i + 1) for i, (t, s) in enumerate(scored)
    )
    return ScoreTable(method=method or weights.method or "weighted-sum", rows=rows)
