"""Cross-validation, coincidence matrices, hyper-parameter search, and the
multi-model leaderboard.

A trainer here is any callable taking a CategoricalTable and returning a
fitted model; fitted models are scored through one shared label-prediction
dispatch so tree, forest, and baseline families plug into the same folds.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import baselines
from .dataset import CategoricalTable
from .forest import Forest
from .tree import DecisionTree
from .tree import predict_batch as tree_predict_batch

__all__ = [
    "EvalError",
    "FoldPlan",
    "make_folds",
    "CvResult",
    "cross_validate",
    "CoincidenceMatrix",
    "coincidence",
    "overall_accuracy",
    "SearchSpec",
    "TrialRecord",
    "SearchResult",
    "search",
    "RosterEntry",
    "LeaderboardRow",
    "Leaderboard",
    "ComparisonReport",
    "compare_models",
    "predict_labels",
]


class EvalError(ValueError):
    """Invalid evaluation input or a trainer failure inside a fold."""


# ---------------------------------------------------------------------------
# Fold plans


@dataclass(frozen=True)
class FoldPlan:
    """Partition of row indices into k held-out folds."""

    k: int
    folds: tuple[tuple[int, ...], ...]
    stratified: bool
    seed: int
    n_rows: int = field(default=0)

    def __post_init__(self):
        if self.k != len(self.folds):
            raise EvalError("fold count does not match k")
        seen: list[int] = []
        for fold in self.folds:
            seen.extend(fold)
        n = self.n_rows or len(seen)
        object.__setattr__(self, "n_rows", n)
        if sorted(seen) != list(range(n)):
            raise EvalError("folds must partition the row indices")
        sizes = [len(f) for f in self.folds]
        if max(sizes) - min(sizes) > 1:
            raise EvalError("fold sizes must differ by at most 1")

    def train_indices(self, fold_index: int) -> np.ndarray:
        held = set(self.folds[fold_index])
        return np.array([i for i in range(self.n_rows) if i not in held])

    def plan_hash(self) -> str:
        payload = json.dumps(
            {
                "k": self.k,
                "seed": self.seed,
                "stratified": self.stratified,
                "folds": [list(f) for f in self.folds],
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def make_folds(n: int, k: int, stratified: bool = True, labels=None,
               seed: int = 0) -> FoldPlan:
    """Seeded shuffle then round-robin assignment into k folds.

    Stratified mode walks the classes in sorted order with one shared
    cursor, so fold sizes and per-fold class counts each differ by at
    most one row.
    """
    if k < 2 or k > n:
        raise EvalError(f"fold count {k} must be in [2, {n}]")
    if stratified:
        if labels is None:
            raise EvalError("stratified folds require labels")
        y = np.asarray(labels, dtype=np.int64)
        if y.shape != (n,):
            raise EvalError("labels length does not match n")
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(k)]
    cursor = 0
    if stratified:
        for klass in np.unique(y):
            idx = np.flatnonzero(y == klass)
            rng.shuffle(idx)
            for i in idx:
                buckets[cursor % k].append(int(i))
                cursor += 1
    else:
        idx = np.arange(n)
        rng.shuffle(idx)
        for i in idx:
            buckets[cursor % k].append(int(i))
            cursor += 1
    folds = tuple(tuple(sorted(b)) for b in buckets)
    return FoldPlan(k, folds, stratified, int(seed), n)


# ---------------------------------------------------------------------------
# Label prediction dispatch


def predict_labels(model, rows) -> np.ndarray:
    """Hard 0/1 labels from any model family this package trains."""
    rows = np.asarray(rows, dtype=np.int64)
    if isinstance(model, DecisionTree):
        return tree_predict_batch(model, rows)
    if isinstance(model, Forest):
        return model.predict_batch(rows)
    if isinstance(model, (baselines.LogisticModel, baselines.MlpModel,
                          baselines.BayesNetModel,
                          baselines.DecisionListModel)):
        return baselines.predict_batch(model, rows)
    if callable(model):
        return np.asarray(model(rows), dtype=np.int64)
    raise EvalError(f"cannot predict with model type {type(model).__name__}")


# ---------------------------------------------------------------------------
# Cross-validation


@dataclass(frozen=True)
class CvResult:
    """Per-fold accuracies plus pooled out-of-fold predictions."""

    fold_accuracies: tuple[float, ...]
    truth: tuple[int, ...]
    predicted: tuple[int, ...]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracies))

    @property
    def pooled_accuracy(self) -> float:
        t = np.array(self.truth)
        p = np.array(self.predicted)
        return float(np.mean(t == p))


def cross_validate(trainer, data: CategoricalTable, plan: FoldPlan) -> CvResult:
    """Train on each fold complement and score the held-out rows."""
    if plan.n_rows != data.n_rows:
        raise EvalError("fold plan does not match table size")
    predicted = np.full(data.n_rows, -1, dtype=np.int64)
    accuracies = []
    for fold_index, held in enumerate(plan.folds):
        train_idx = plan.train_indices(fold_index)
        try:
            model = trainer(data.take_rows(train_idx))
            labels = predict_labels(model, data.rows[list(held)])
        except EvalError:
            raise
        except Exception as exc:
            raise EvalError(f"trainer failed on fold {fold_index}: {exc}") from exc
        held_arr = np.array(held)
        predicted[held_arr] = labels
        accuracies.append(float(np.mean(labels == data.target[held_arr])))
    return CvResult(tuple(accuracies), tuple(int(t) for t in data.target),
                    tuple(int(p) for p in predicted))


# ---------------------------------------------------------------------------
# Coincidence matrix and accuracy


@dataclass(frozen=True)
class CoincidenceMatrix:
    """2x2 counts, rows = truth 0/1, columns = predicted 0/1."""

    counts: tuple[tuple[int, int], tuple[int, int]]

    def __post_init__(self):
        flat = [c for row in self.counts for c in row]
        if len(flat) != 4 or any(c < 0 for c in flat):
            raise EvalError("coincidence counts must be a 2x2 non-negative grid")

    @property
    def total(self) -> int:
        return sum(c for row in self.counts for c in row)

    @property
    def row_percentages(self) -> tuple[float, float]:
        out = []
        for i, row in enumerate(self.counts):
            s = sum(row)
            out.append(100.0 * row[i] / s if s else 0.0)
        return tuple(out)

    def render(self) -> str:
        lines = ["truth  pred=0  pred=1  correct%"]
        for i, row in enumerate(self.counts):
            pct = self.row_percentages[i]
            lines.append(f"{i:<5}  {row[0]:>6}  {row[1]:>6}  {round(pct):>7}")
        return "\n".join(lines)


def coincidence(truth, predicted) -> CoincidenceMatrix:
    t = np.asarray(truth, dtype=np.int64)
    p = np.asarray(predicted, dtype=np.int64)
    if t.shape != p.shape or t.ndim != 1:
        raise EvalError("truth and predicted must be equal-length vectors")
    if not (np.isin(t, (0, 1)).all() and np.isin(p, (0, 1)).all()):
        raise EvalError("labels must be binary")
    counts = tuple(
        tuple(int(np.sum((t == i) & (p == j))) for j in (0, 1)) for i in (0, 1)
    )
    return CoincidenceMatrix(counts)


def overall_accuracy(matrix) -> float:
    """Percentage of diagonal mass; accepts a CoincidenceMatrix or 2x2 grid."""
    if isinstance(matrix, CoincidenceMatrix):
        counts = matrix.counts
    else:
        arr = np.asarray(matrix)
        if arr.shape != (2, 2):
            raise EvalError("matrix must be 2x2")
        counts = tuple(tuple(int(v) for v in row) for row in arr)
    total = sum(c for row in counts for c in row)
    if total <= 0:
        raise EvalError("matrix is empty")
    return 100.0 * (counts[0][0] + counts[1][1]) / total


# ---------------------------------------------------------------------------
# Hyper-parameter search


@dataclass(frozen=True)
class SearchSpec:
    """Grid or seeded-random search over named parameter domains."""

    mode: str
    domains: dict
    budget: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("grid", "random"):
            raise EvalError(f"unknown search mode {self.mode!r}")
        if not self.domains or any(len(v) == 0 for v in self.domains.values()):
            raise EvalError("every parameter domain must be non-empty")
        if self.mode == "random" and self.budget < 1:
            raise EvalError("random search needs a budget of at least 1")


@dataclass(frozen=True)
class TrialRecord:
    params: dict
    mean_accuracy: float
    fold_accuracies: tuple[float, ...]


@dataclass(frozen=True)
class SearchResult:
    best_params: dict
    best_accuracy: float
    trials: tuple[TrialRecord, ...]


def _candidate_stream(spec: SearchSpec):
    names = sorted(spec.domains)
    if spec.mode == "grid":
        for values in itertools.product(*(spec.domains[n] for n in names)):
            yield dict(zip(names, values))
    else:
        rng = np.random.default_rng(spec.seed)
        for _ in range(spec.budget):
            yield {
                n: spec.domains[n][int(rng.integers(len(spec.domains[n])))]
                for n in names
            }


def search(spec: SearchSpec, trainer_family, data: CategoricalTable,
           plan: FoldPlan) -> SearchResult:
    """Score every candidate by cross-validated mean accuracy.

    ``trainer_family`` maps a parameter dict to a trainer callable.  Best
    candidate is the argmax; exact ties keep the earlier trial.
    """
    trials = []
    best = None
    for params in _candidate_stream(spec):
        result = cross_validate(trainer_family(params), data, plan)
        record = TrialRecord(dict(params), result.mean_accuracy,
                             result.fold_accuracies)
        trials.append(record)
        if best is None or record.mean_accuracy > best.mean_accuracy:
            best = record
    return SearchResult(dict(best.params), best.mean_accuracy, tuple(trials))


# ---------------------------------------------------------------------------
# Multi-model leaderboard


@dataclass(frozen=True)
class RosterEntry:
    """One model family: display name, trainer, and its parameter record."""

    name: str
    trainer: object
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class LeaderboardRow:
    name: str
    accuracy_pct: float
    pooled_accuracy_pct: float
    params: dict
    fold_accuracies: tuple[float, ...]


@dataclass(frozen=True)
class Leaderboard:
    rows: tuple[LeaderboardRow, ...]
    fold_plan_hash: str

    def __post_init__(self):
        keys = [(-r.accuracy_pct, r.name) for r in self.rows]
        if keys != sorted(keys):
            raise EvalError("leaderboard rows must be sorted")


@dataclass(frozen=True)
class ComparisonReport:
    """Leaderboard plus per-family coincidence matrices on shared folds."""

    leaderboard: Leaderboard
    coincidence: dict
    fold_plan_hash: str

    def render(self) -> str:
        lines = [
            f"fold plan {self.fold_plan_hash}",
            "",
            f"{'model':<20} {'accuracy%':>9}  {'pooled%':>8}",
        ]
        for row in self.leaderboard.rows:
            lines.append(
                f"{row.name:<20} {row.accuracy_pct:>9.3f}  "
                f"{row.pooled_accuracy_pct:>8.3f}"
            )
        for row in self.leaderboard.rows:
            lines.append("")
            lines.append(f"coincidence: {row.name}")
            lines.append(self.coincidence[row.name].render())
        return "\n".join(lines) + "\n"


def compare_models(data: CategoricalTable, roster, plan: FoldPlan
                   ) -> ComparisonReport:
    """Evaluate every roster family on one shared fold plan."""
    entries = tuple(roster)
    if not entries:
        raise EvalError("roster is empty")
    rows = []
    matrices = {}
    for entry in entries:
        try:
            result = cross_validate(entry.trainer, data, plan)
        except EvalError as exc:
            raise EvalError(f"{entry.name}: {exc}") from exc
        rows.append(
            LeaderboardRow(
                entry.name,
                100.0 * result.mean_accuracy,
                100.0 * result.pooled_accuracy,
                dict(entry.params),
                result.fold_accuracies,
            )
        )
        matrices[entry.name] = coincidence(result.truth, result.predicted)
    rows.sort(key=lambda r: (-r.accuracy_pct, r.name))
    board = Leaderboard(tuple(rows), plan.plan_hash())
    return ComparisonReport(board, matrices, plan.plan_hash())
