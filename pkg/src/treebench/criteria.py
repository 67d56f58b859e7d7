"""Split-quality kernels: entropy, information gain, cost-weighted Gini,
Gini decrease, and chi-square statistics.

All functions are pure and operate on plain count vectors / matrices, so they
are safe to call from any number of threads.  Class counts are non-negative
integers; proportions are always re-derived from the counts.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaincc


class DegenerateTableError(ValueError):
    """Raised when a contingency table has fewer than two informative rows
    or columns (zero marginals carry no association information)."""


def _as_counts(counts: Sequence[int] | np.ndarray) -> np.ndarray:
    c = np.asarray(counts, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("class counts must be a non-empty 1-D vector")
    if np.any(c < 0):
        raise ValueError("class counts must be non-negative")
    return c


def unit_cost_matrix(m: int = 2) -> np.ndarray:
    """Default misclassification cost: 1 off the diagonal, 0 on it."""
    return np.ones((m, m)) - np.eye(m)


def _check_cost(cost: np.ndarray, m: int) -> np.ndarray:
    cost = np.asarray(cost, dtype=float)
    if cost.shape != (m, m):
        raise ValueError(f"cost matrix must be {m}x{m}, got {cost.shape}")
    if np.any(np.diag(cost) != 0.0):
        raise ValueError("cost matrix diagonal must be zero")
    if np.any(cost < 0):
        raise ValueError("cost matrix entries must be non-negative")
    return cost


def entropy(counts: Sequence[int] | np.ndarray) -> float:
    """Shannon entropy of a class-count vector, in bits.

    Zero-count classes contribute nothing (0 * log 0 taken as 0 by
    continuity).  Raises on an all-zero vector.
    """
    c = _as_counts(counts)
    total = c.sum()
    if total <= 0:
        raise ValueError("entropy undefined for an empty node")
    p = c[c > 0] / total
    return float(-(p * np.log2(p)).sum())


def info_gain(
    parent: Sequence[int] | np.ndarray,
    children: Sequence[Sequence[int] | np.ndarray],
) -> float:
    """Information gain of a partition: parent entropy minus the
    size-weighted entropy of the children.

    Children with zero rows carry zero weight.  Child totals must sum to the
    parent total.
    """
    p = _as_counts(parent)
    kids = [_as_counts(k) for k in children]
    total = p.sum()
    if total <= 0:
        raise ValueError("info_gain undefined for an empty parent")
    child_total = sum(k.sum() for k in kids)
    if child_total != total:
        raise ValueError(
            f"partition totals ({child_total:g}) do not match parent ({total:g})"
        )
    weighted = 0.0
    for k in kids:
        n = k.sum()
        if n > 0:
            weighted += (n / total) * entropy(k)
    return entropy(p) - weighted


def gini(
    counts: Sequence[int] | np.ndarray,
    cost: np.ndarray | None = None,
) -> float:
    """Cost-weighted Gini impurity sum_{i,j} C(i|j) p_i p_j.

    With the default unit cost and two classes this reduces to 2p(1-p).
    """
    c = _as_counts(counts)
    total = c.sum()
    if total <= 0:
        raise ValueError("gini undefined for an empty node")
    p = c / total
    m = c.size
    cm = unit_cost_matrix(m) if cost is None else _check_cost(cost, m)
    return float(p @ cm @ p)


def gini_decrease(
    parent: Sequence[int] | np.ndarray,
    left: Sequence[int] | np.ndarray,
    right: Sequence[int] | np.ndarray,
    cost: np.ndarray | None = None,
) -> float:
    """Impurity decrease of a binary split: Gini(parent) minus the
    probability-weighted child Ginis.  An empty child contributes weight 0.
    """
    p = _as_counts(parent)
    l, r = _as_counts(left), _as_counts(right)
    total = p.sum()
    if total <= 0:
        raise ValueError("gini_decrease undefined for an empty parent")
    if l.sum() + r.sum() != total:
        raise ValueError("left + right totals must equal the parent total")
    delta = gini(p, cost)
    for child in (l, r):
        n = child.sum()
        if n > 0:
            delta -= (n / total) * gini(child, cost)
    return float(delta)


def chi_square_sf(statistic: float, dof: int) -> float:
    """Survival function of the chi-square distribution (the p-value for a
    given statistic), via the regularized upper incomplete gamma function."""
    if statistic < 0:
        raise ValueError("chi-square statistic must be non-negative")
    if dof < 1:
        raise ValueError("degrees of freedom must be at least 1")
    return float(gammaincc(dof / 2.0, statistic / 2.0))


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float
    variant: str


def chi_square(
    table: Sequence[Sequence[int]] | np.ndarray,
    variant: str = "pearson",
) -> ChiSquareResult:
    """Chi-square test of independence on an r x c contingency table.

    ``variant`` selects the Pearson statistic sum (O-E)^2/E or the
    likelihood-ratio statistic 2 sum O ln(O/E).  Rows and columns whose
    marginal is zero are dropped before computing; if fewer than two rows or
    columns remain the table is degenerate and an error is raised.  The
    p-value is the chi-square survival function, evaluated through the
    regularized upper incomplete gamma function.
    """
    if variant not in ("pearson", "likelihood"):
        raise ValueError(f"unknown chi-square variant: {variant!r}")
    obs = np.asarray(table, dtype=float)
    if obs.ndim != 2:
        raise ValueError("contingency table must be 2-D")
    if np.any(obs < 0):
        raise ValueError("contingency counts must be non-negative")
    row_sums = obs.sum(axis=1)
    col_sums = obs.sum(axis=0)
    obs = obs[row_sums > 0][:, col_sums > 0]
    r, c = obs.shape
    if r < 2 or c < 2:
        raise DegenerateTableError(
            "need at least 2 rows and 2 columns with positive marginals"
        )
    total = obs.sum()
    expected = np.outer(obs.sum(axis=1), obs.sum(axis=0)) / total
    if variant == "pearson":
        stat = float(((obs - expected) ** 2 / expected).sum())
    else:
        nz = obs > 0
        stat = float(2.0 * (obs[nz] * np.log(obs[nz] / expected[nz])).sum())
    dof = (r - 1) * (c - 1)
    return ChiSquareResult(
        statistic=stat, dof=dof, p_value=chi_square_sf(stat, dof), variant=variant
    )
