"""Random forest over binary Gini trees, used for feature screening.

Each member tree trains on a seeded bootstrap sample and draws a fresh
random feature subset at every node.  Per-tree generators depend only on
(seed, tree index), so training order and parallelism cannot change the
result, and out-of-bag rows give an internal accuracy estimate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dataset import CategoricalTable
from .tree import DecisionTree, TreeParams, _grow_binary_gini, predict


class ForestError(ValueError):
    """Raised for invalid forest parameters or unusable out-of-bag state."""


@dataclass(frozen=True)
class ForestParams:
    """Ensemble knobs.  ``features_per_split`` defaults to ceil(sqrt(m));
    ``sample_size`` defaults to n; ``bootstrap=False`` uses the identity
    sample (every tree sees all rows, still with feature subsampling)."""

    n_trees: int = 500
    features_per_split: int | None = None
    sample_size: int | None = None
    bootstrap: bool = True
    min_records: int = 2
    max_depth: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ForestError("n_trees must be at least 1")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ForestError("features_per_split must be at least 1")
        if self.sample_size is not None and self.sample_size < 1:
            raise ForestError("sample_size must be at least 1")

    def resolve_features_per_split(self, m: int) -> int:
        if self.features_per_split is None:
            return int(np.ceil(np.sqrt(m)))
        if self.features_per_split > m:
            raise ForestError(
                f"features_per_split {self.features_per_split} exceeds "
                f"feature count {m}"
            )
        return self.features_per_split

    def tree_params(self) -> TreeParams:
        return TreeParams(min_records=self.min_records, max_depth=self.max_depth)


def bootstrap_indices(params: ForestParams, n: int, tree_index: int) -> np.ndarray:
    """Row multiset for one tree, a pure function of (seed, tree index)."""
    if not params.bootstrap:
        return np.arange(n)
    size = params.sample_size or n
    rng = np.random.default_rng([params.seed, tree_index])
    return np.sort(rng.integers(0, n, size=size))


@dataclass(eq=False)
class Forest:
    trees: tuple[DecisionTree, ...]
    bags: tuple[np.ndarray, ...]
    params: ForestParams
    feature_names: tuple[str, ...]
    schema_hash: str
    n_rows: int

    def predict_proba(self, row) -> float:
        """Fraction of trees voting class 1."""
        votes = sum(predict(t, row)[0] for t in self.trees)
        return votes / len(self.trees)

    def predict(self, row) -> tuple[int, float]:
        """Majority vote; exact ties go to class 1."""
        p = self.predict_proba(row)
        return (1 if p >= 0.5 else 0), p

    def predict_batch(self, rows: np.ndarray) -> np.ndarray:
        return np.array([self.predict(r)[0] for r in np.asarray(rows)], dtype=np.int64)

    def to_json(self) -> str:
        return json.dumps(
            {
                "params": {
                    "n_trees": self.params.n_trees,
                    "features_per_split": self.params.features_per_split,
                    "sample_size": self.params.sample_size,
                    "bootstrap": self.params.bootstrap,
                    "min_records": self.params.min_records,
                    "max_depth": self.params.max_depth,
                    "seed": self.params.seed,
                },
                "feature_names": list(self.feature_names),
                "schema_hash": self.schema_hash,
                "n_rows": self.n_rows,
                "trees": [json.loads(t.to_json()) for t in self.trees],
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "Forest":
        payload = json.loads(text)
        params = ForestParams(**payload["params"])
        n = payload["n_rows"]
        trees = tuple(
            DecisionTree.from_json(json.dumps(t)) for t in payload["trees"]
        )
        bags = tuple(
            bootstrap_indices(params, n, i) for i in range(len(trees))
        )
        return cls(
            trees=trees,
            bags=bags,
            params=params,
            feature_names=tuple(payload["feature_names"]),
            schema_hash=payload["schema_hash"],
            n_rows=n,
        )


def train_forest(
    data: CategoricalTable,
    params: ForestParams | None = None,
    subset_audit: list | None = None,
) -> Forest:
    """Train the ensemble.  ``subset_audit``, when given, collects
    (chosen feature, sampled candidate features) pairs from every split for
    debugging the per-node feature-subset rule."""
    params = params or ForestParams()
    if data.n_rows < 2:
        raise ForestError("forest training needs at least 2 rows")
    k = params.resolve_features_per_split(data.n_features)
    tree_params = params.tree_params()

    trees = []
    bags = []
    for i in range(params.n_trees):
        bag = bootstrap_indices(params, data.n_rows, i)
        sample = data.take_rows(bag)
        rng = np.random.default_rng([params.seed, i, 1])
        root = _grow_binary_gini(
            sample, tree_params, rng=rng, features_per_split=k,
            subset_audit=subset_audit,
        )
        trees.append(
            DecisionTree(
                root=root,
                algorithm="forest_member",
                params=tree_params,
                feature_names=data.feature_names,
                schema_hash=data.schema_hash(),
                n_rows=len(bag),
            )
        )
        bags.append(bag)
    return Forest(
        trees=tuple(trees),
        bags=tuple(bags),
        params=params,
        feature_names=data.feature_names,
        schema_hash=data.schema_hash(),
        n_rows=data.n_rows,
    )


def oob_accuracy(forest: Forest, data: CategoricalTable) -> float:
    """Accuracy over rows predicted only by trees whose bag excluded them.

    Rows present in every bag are left out of the estimate; if no row is
    out of bag anywhere, there is nothing to score and an error is raised.
    """
    if data.n_rows != forest.n_rows:
        raise ForestError("data row count does not match the trained forest")
    in_bag = np.zeros((len(forest.trees), data.n_rows), dtype=bool)
    for t, bag in enumerate(forest.bags):
        in_bag[t, bag] = True

    correct = 0
    scored = 0
    for i in range(data.n_rows):
        votes = [
            predict(tree, data.rows[i])[0]
            for t, tree in enumerate(forest.trees)
            if not in_bag[t, i]
        ]
        if not votes:
            continue
        scored += 1
        p = sum(votes) / len(votes)
        label = 1 if p >= 0.5 else 0
        if label == data.target[i]:
            correct += 1
    if scored == 0:
        raise ForestError("no out-of-bag rows")
    return correct / scored
