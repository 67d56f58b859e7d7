"""Non-tree comparison classifiers behind one shared contract.

Four model families live here: penalized logistic regression, a small
feed-forward network, a discrete Bayesian network, and a sequential-covering
decision list.  Every trained model answers ``predict_proba(model, row)``
with the probability of class 1, and ``predict`` thresholds that at 0.5.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import CategoricalTable

__all__ = [
    "BaselineError",
    "ConvergenceError",
    "LogisticModel",
    "MlpModel",
    "BayesNetModel",
    "DecisionRule",
    "DecisionListModel",
    "train_logistic",
    "train_mlp",
    "train_bayes_net",
    "train_decision_list",
    "mlp_loss_and_gradients",
    "predict_proba",
    "predict",
    "predict_batch",
    "model_to_json",
    "model_from_json",
]


class BaselineError(ValueError):
    """Invalid input or row/schema mismatch for a baseline model."""


class ConvergenceError(BaselineError):
    """Optimization failed to converge; carries the final diagnostics."""

    def __init__(self, message: str, iterations: int, gradient_norm: float):
        super().__init__(message)
        self.iterations = iterations
        self.gradient_norm = gradient_norm


# ---------------------------------------------------------------------------
# One-hot encoding shared by logistic and MLP models


@dataclass(frozen=True)
class _Encoding:
    """Dummy coding: one indicator per non-reference code of each feature."""

    feature_names: tuple[str, ...]
    levels: tuple[tuple[int, ...], ...]

    @property
    def width(self) -> int:
        return sum(len(lv) - 1 for lv in self.levels)

    def encode(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim == 1:
            rows = rows[None, :]
        if rows.shape[1] != len(self.levels):
            raise BaselineError(
                f"row has {rows.shape[1]} features, model expects "
                f"{len(self.levels)}"
            )
        cols = []
        for j, lv in enumerate(self.levels):
            for code in lv[1:]:
                cols.append(rows[:, j] == code)
        if not cols:
            return np.zeros((rows.shape[0], 0))
        return np.stack(cols, axis=1).astype(float)


def _encoding_for(table: CategoricalTable) -> _Encoding:
    return _Encoding(
        table.feature_names,
        tuple(spec.allowed_codes for spec in table.schema),
    )


def _check_row(model, row) -> np.ndarray:
    arr = np.asarray(row, dtype=np.int64)
    if arr.shape != (len(model.feature_names),):
        raise BaselineError(
            f"row has {arr.size} values, model expects {len(model.feature_names)}"
        )
    return arr


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# ---------------------------------------------------------------------------
# Logistic regression


@dataclass(frozen=True)
class LogisticModel:
    feature_names: tuple[str, ...]
    levels: tuple[tuple[int, ...], ...]
    intercept: float
    coefficients: tuple[float, ...]
    schema_hash: str
    iterations: int

    def __post_init__(self):
        values = (self.intercept,) + self.coefficients
        if not all(math.isfinite(v) for v in values):
            raise BaselineError("logistic coefficients must be finite")

    def _encoding(self) -> _Encoding:
        return _Encoding(self.feature_names, self.levels)


def _penalized_ll(y, x, beta, l2):
    z = x @ beta
    ll = float(np.sum(y * z - np.logaddexp(0.0, z)))
    return ll - 0.5 * l2 * float(beta @ beta)


def train_logistic(data: CategoricalTable, max_iterations: int = 100,
                   tolerance: float = 1e-8, l2: float = 1e-6) -> LogisticModel:
    """Fit a ridge-penalized logistic model by Newton iteration.

    The design matrix is the dummy coding of every feature (reference code
    dropped) plus an intercept column.  Iteration stops when the penalized
    score vector has infinity norm below ``tolerance``.
    """
    enc = _encoding_for(data)
    x = np.hstack([np.ones((data.n_rows, 1)), enc.encode(data.rows)])
    y = data.target.astype(float)
    n, p = x.shape
    if n < p + 1:
        warnings.warn(
            f"logistic fit with {n} rows and {p} parameters may be unstable",
            UserWarning,
            stacklevel=2,
        )
    beta = np.zeros(p)
    grad = x.T @ (y - _sigmoid(x @ beta)) - l2 * beta
    for iteration in range(1, max_iterations + 1):
        if float(np.abs(grad).max()) < tolerance:
            return LogisticModel(
                enc.feature_names, enc.levels, float(beta[0]),
                tuple(float(b) for b in beta[1:]), data.schema_hash(),
                iteration - 1,
            )
        prob = _sigmoid(x @ beta)
        w = prob * (1.0 - prob)
        hessian = (x * w[:, None]).T @ x + l2 * np.eye(p)
        step = np.linalg.solve(hessian, grad)
        current = _penalized_ll(y, x, beta, l2)
        scale = 1.0
        for _ in range(40):
            trial = beta + scale * step
            if _penalized_ll(y, x, trial, l2) >= current - 1e-12:
                break
            scale *= 0.5
        beta = beta + scale * step
        grad = x.T @ (y - _sigmoid(x @ beta)) - l2 * beta
    norm = float(np.abs(grad).max())
    if norm < tolerance:
        return LogisticModel(
            enc.feature_names, enc.levels, float(beta[0]),
            tuple(float(b) for b in beta[1:]), data.schema_hash(),
            max_iterations,
        )
    raise ConvergenceError(
        f"logistic regression did not converge in {max_iterations} iterations "
        f"(gradient norm {norm:.3e})",
        max_iterations, norm,
    )


# ---------------------------------------------------------------------------
# Feed-forward network


@dataclass(frozen=True, eq=False)
class MlpModel:
    feature_names: tuple[str, ...]
    levels: tuple[tuple[int, ...], ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    activation: str
    schema_hash: str
    seed: int

    def __post_init__(self):
        widths = [w.shape for w in self.weights]
        for k in range(1, len(widths)):
            if widths[k][1] != widths[k - 1][0]:
                raise BaselineError("layer dimensions do not chain")
        if widths and widths[-1][0] != 1:
            raise BaselineError("output layer must have width 1")
        if self.activation != "tanh":
            raise BaselineError(f"unknown activation {self.activation!r}")

    def _encoding(self) -> _Encoding:
        return _Encoding(self.feature_names, self.levels)


def _mlp_forward(weights, biases, x):
    """Return per-layer activations; the last entry is the output logit."""
    activations = [x]
    a = x
    with np.errstate(over="ignore", invalid="ignore"):
        for k, (w, b) in enumerate(zip(weights, biases)):
            z = a @ w.T + b
            a = z if k == len(weights) - 1 else np.tanh(z)
            activations.append(a)
    return activations


def _mlp_logits(model: MlpModel, x: np.ndarray) -> np.ndarray:
    return _mlp_forward(model.weights, model.biases, x)[-1][:, 0]


def mlp_loss_and_gradients(model: MlpModel, rows, targets):
    """Mean cross-entropy and its analytic gradients for a row batch."""
    x = model._encoding().encode(np.asarray(rows))
    y = np.asarray(targets, dtype=float)
    acts = _mlp_forward(model.weights, model.biases, x)
    z = acts[-1][:, 0]
    n = x.shape[0]
    with np.errstate(over="ignore", invalid="ignore"):
        loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
        delta = ((_sigmoid(z) - y) / n)[:, None]
        grads_w, grads_b = [], []
        for k in range(len(model.weights) - 1, -1, -1):
            grads_w.append(delta.T @ acts[k])
            grads_b.append(delta.sum(axis=0))
            if k > 0:
                delta = (delta @ model.weights[k]) * (1.0 - acts[k] ** 2)
    return loss, list(reversed(grads_w)), list(reversed(grads_b))


def _init_layers(sizes, rng):
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def train_mlp(data: CategoricalTable, widths: tuple[int, ...] = (16,) * 5,
              learning_rate: float = 0.1, epochs: int = 200,
              batch_size: int = 32, patience: int = 10,
              seed: int = 0) -> MlpModel:
    """Train the feed-forward network with early stopping.

    Five tanh hidden layers by default, logistic output, mini-batch gradient
    descent on cross-entropy.  A seeded 10% holdout supplies the validation
    error; training keeps the weights from the best validation epoch and
    stops after ``patience`` epochs without improvement.
    """
    if any(w < 1 for w in widths):
        raise BaselineError("hidden widths must be positive")
    if learning_rate <= 0 or epochs < 0 or batch_size < 1 or patience < 1:
        raise BaselineError("invalid training options")
    enc = _encoding_for(data)
    x_all = enc.encode(data.rows)
    y_all = data.target.astype(float)
    n = data.n_rows
    rng = np.random.default_rng([int(seed), 0])
    order = rng.permutation(n)
    n_val = n // 10
    val_idx, train_idx = order[:n_val], order[n_val:]
    if train_idx.size == 0:
        train_idx = order
    x_train, y_train = x_all[train_idx], y_all[train_idx]
    x_val = x_all[val_idx] if n_val else x_train
    y_val = y_all[val_idx] if n_val else y_train

    sizes = [x_all.shape[1], *widths, 1]
    weights, biases = _init_layers(sizes, np.random.default_rng([int(seed), 1]))
    model = MlpModel(enc.feature_names, enc.levels, tuple(weights),
                     tuple(biases), "tanh", data.schema_hash(), int(seed))
    best = (_bce(model, x_val, y_val), weights, biases)
    stale = 0
    shuffle_rng = np.random.default_rng([int(seed), 2])
    for epoch in range(epochs):
        perm = shuffle_rng.permutation(train_idx.size)
        for start in range(0, train_idx.size, batch_size):
            batch = perm[start:start + batch_size]
            loss, gw, gb = mlp_loss_and_gradients(
                model, data.rows[train_idx[batch]], y_train[batch]
            )
            if not math.isfinite(loss):
                raise ConvergenceError(
                    f"training loss became non-finite at epoch {epoch}",
                    epoch, float("inf"),
                )
            weights = [w - learning_rate * g for w, g in zip(weights, gw)]
            biases = [b - learning_rate * g for b, g in zip(biases, gb)]
            model = MlpModel(enc.feature_names, enc.levels, tuple(weights),
                             tuple(biases), "tanh", data.schema_hash(),
                             int(seed))
        val_loss = _bce(model, x_val, y_val)
        if not math.isfinite(val_loss):
            raise ConvergenceError(
                f"validation loss became non-finite at epoch {epoch}",
                epoch, float("inf"),
            )
        if val_loss < best[0] - 1e-12:
            best = (val_loss, weights, biases)
            stale = 0
        else:
            stale += 1
            if stale >= patience:
                break
    return MlpModel(enc.feature_names, enc.levels,
                    tuple(np.array(w) for w in best[1]),
                    tuple(np.array(b) for b in best[2]),
                    "tanh", data.schema_hash(), int(seed))


def _bce(model: MlpModel, x: np.ndarray, y: np.ndarray) -> float:
    z = _mlp_logits(model, x)
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.mean(np.logaddexp(0.0, z) - y * z))


# ---------------------------------------------------------------------------
# Discrete Bayesian network


@dataclass(frozen=True, eq=False)
class BayesNetModel:
    """DAG over the target plus features with smoothed conditional tables.

    ``parents`` maps each node to its parent tuple; ``cpts`` maps each node
    to an array whose leading axes follow the parent order and whose last
    axis runs over the node's own levels.
    """

    feature_names: tuple[str, ...]
    levels: tuple[tuple[int, ...], ...]
    parents: dict
    cpts: dict
    alpha: float
    score: float
    schema_hash: str

    def __post_init__(self):
        order = _topological_order(self.parents)
        if order is None:
            raise BaselineError("bayes net graph contains a cycle")
        for node, table in self.cpts.items():
            sums = np.asarray(table).sum(axis=-1)
            if not np.allclose(sums, 1.0, atol=1e-12):
                raise BaselineError(f"CPT rows for {node!r} do not sum to 1")

    def node_levels(self, node: str) -> tuple[int, ...]:
        if node == "target":
            return (0, 1)
        return self.levels[self.feature_names.index(node)]


def _topological_order(parents: dict) -> list | None:
    remaining = {node: set(par) for node, par in parents.items()}
    order = []
    while remaining:
        ready = sorted(n for n, par in remaining.items() if not par)
        if not ready:
            return None
        for node in ready:
            order.append(node)
            del remaining[node]
        for par in remaining.values():
            par.difference_update(ready)
    return order


def _node_values(data: CategoricalTable, node: str, levels_of) -> np.ndarray:
    """Column of level indices (not raw codes) for one node."""
    column = data.column(node)
    lookup = {code: i for i, code in enumerate(levels_of(node))}
    return np.array([lookup[int(v)] for v in column], dtype=np.int64)


def _fit_cpt(data, node, parents, levels_of, alpha):
    shape = [len(levels_of(p)) for p in parents] + [len(levels_of(node))]
    counts = np.zeros(shape)
    cols = [_node_values(data, p, levels_of) for p in parents]
    cols.append(_node_values(data, node, levels_of))
    np.add.at(counts, tuple(cols), 1.0)
    smoothed = counts + alpha
    return smoothed / smoothed.sum(axis=-1, keepdims=True)


def _log_likelihood(data, parents, cpts, levels_of) -> float:
    total = 0.0
    for node, par in parents.items():
        idx = tuple(_node_values(data, p, levels_of) for p in par)
        idx = idx + (_node_values(data, node, levels_of),)
        total += float(np.log(cpts[node][idx]).sum())
    return total


def _parameter_count(parents, levels_of) -> int:
    count = 0
    for node, par in parents.items():
        rows = 1
        for p in par:
            rows *= len(levels_of(p))
        count += rows * (len(levels_of(node)) - 1)
    return count


def train_bayes_net(data: CategoricalTable, structure: str = "naive",
                    alpha: float = 1.0) -> BayesNetModel:
    """Fit CPTs over a naive (target-to-feature) or greedily searched DAG.

    Greedy search starts from the naive structure and keeps adding the
    feature-to-feature edge that most improves a penalized log-likelihood
    score (penalty (log n / 2) per free parameter) until no addition helps.
    """
    if structure not in ("naive", "greedy-search"):
        raise BaselineError(f"unknown structure {structure!r}")
    if alpha <= 0:
        raise BaselineError("smoothing alpha must be positive")
    names = data.feature_names
    levels = tuple(spec.allowed_codes for spec in data.schema)

    def levels_of(node: str) -> tuple[int, ...]:
        if node == "target":
            return (0, 1)
        return levels[names.index(node)]

    parents = {"target": ()}
    for name in names:
        parents[name] = ("target",)

    def score_of(structure_parents) -> float:
        cpts = {
            node: _fit_cpt(data, node, par, levels_of, alpha)
            for node, par in structure_parents.items()
        }
        ll = _log_likelihood(data, structure_parents, cpts, levels_of)
        penalty = 0.5 * math.log(data.n_rows) * _parameter_count(
            structure_parents, levels_of
        )
        return ll - penalty

    best_score = score_of(parents)
    if structure == "greedy-search":
        improved = True
        while improved:
            improved = False
            best_edge = None
            for child in names:
                for parent in names:
                    if parent == child or parent in parents[child]:
                        continue
                    trial = dict(parents)
                    trial[child] = tuple(sorted(parents[child] + (parent,)))
                    if _topological_order(trial) is None:
                        continue
                    trial_score = score_of(trial)
                    if trial_score > best_score + 1e-9 and (
                        best_edge is None or trial_score > best_edge[0]
                    ):
                        best_edge = (trial_score, parent, child)
            if best_edge is not None:
                score, parent, child = best_edge
                parents[child] = tuple(sorted(parents[child] + (parent,)))
                best_score = score
                improved = True

    cpts = {
        node: _fit_cpt(data, node, par, levels_of, alpha)
        for node, par in parents.items()
    }
    return BayesNetModel(names, levels, dict(parents), cpts, float(alpha),
                         float(best_score), data.schema_hash())


def _bayes_log_joint(model: BayesNetModel, assignment: dict) -> float:
    # fixed node order so serialization round trips preserve float sums
    total = 0.0
    for node in sorted(model.parents):
        par = model.parents[node]
        idx = tuple(assignment[p] for p in par) + (assignment[node],)
        total += math.log(float(model.cpts[node][idx]))
    return total


def bayes_joint_probability(model: BayesNetModel, target: int,
                            codes) -> float:
    """Joint probability of one full assignment (target plus all features)."""
    assignment = {"target": int(target)}
    for name, code in zip(model.feature_names, codes):
        lv = model.node_levels(name)
        if int(code) not in lv:
            raise BaselineError(f"column {name!r}: code {code} not in schema")
        assignment[name] = lv.index(int(code))
    return math.exp(_bayes_log_joint(model, assignment))


# ---------------------------------------------------------------------------
# Decision list


@dataclass(frozen=True)
class DecisionRule:
    """Conjunction of (feature, code) literals with a class and precision."""

    literals: tuple[tuple[int, int], ...]
    klass: int
    precision: float
    coverage: int

    def matches(self, row: np.ndarray) -> bool:
        return all(int(row[j]) == code for j, code in self.literals)


@dataclass(frozen=True)
class DecisionListModel:
    feature_names: tuple[str, ...]
    levels: tuple[tuple[int, ...], ...]
    rules: tuple[DecisionRule, ...]
    default_class: int
    default_precision: float
    schema_hash: str


def _laplace(class_count: int, covered: int) -> float:
    return (class_count + 1.0) / (covered + 2.0)


def _majority(y: np.ndarray) -> tuple[int, int]:
    counts = np.bincount(y, minlength=2)
    klass = int(np.argmax(counts))
    return klass, int(counts[klass])


def _grow_rule(rows, y, levels, max_literals):
    """Greedy literal growth; returns the rule or None for the empty prefix."""
    mask = np.ones(len(y), dtype=bool)
    literals: list[tuple[int, int]] = []
    klass, majority = _majority(y)
    precision = _laplace(majority, len(y))
    while len(literals) < max_literals:
        used = {j for j, _ in literals}
        best = None
        for j in range(rows.shape[1]):
            if j in used:
                continue
            for code in levels[j]:
                sub = mask & (rows[:, j] == code)
                covered = int(sub.sum())
                if covered == 0:
                    continue
                sub_class, sub_majority = _majority(y[sub])
                cand = (_laplace(sub_majority, covered), covered, -j, -code)
                if best is None or cand > best[0]:
                    best = (cand, j, code, sub, sub_class)
        if best is None or best[0][0] <= precision + 1e-12:
            break
        cand, j, code, sub, sub_class = best
        literals.append((j, code))
        mask = sub
        precision = cand[0]
        klass = sub_class
    if not literals:
        return None
    return DecisionRule(tuple(literals), klass, precision, int(mask.sum())), mask


def train_decision_list(data: CategoricalTable, min_coverage: int = 2,
                        purity_threshold: float = 0.5,
                        max_literals: int = 5) -> DecisionListModel:
    """Sequential covering: grow a rule, remove its rows, repeat.

    Rule growth adds the literal with the best Laplace-corrected precision
    (ties broken toward higher coverage, then lower feature and code) and
    stops when no literal strictly improves.  A rule is kept only when it
    meets the coverage and purity thresholds.
    """
    if min_coverage < 1 or max_literals < 1:
        raise BaselineError("invalid decision list options")
    levels = tuple(spec.allowed_codes for spec in data.schema)
    rows = data.rows
    y = data.target
    remaining = np.arange(data.n_rows)
    rules = []
    while remaining.size:
        grown = _grow_rule(rows[remaining], y[remaining], levels, max_literals)
        if grown is None:
            break
        rule, covered_mask = grown
        if rule.coverage < min_coverage or rule.precision < purity_threshold:
            break
        rules.append(rule)
        remaining = remaining[~covered_mask]
    if remaining.size:
        default_class, default_majority = _majority(y[remaining])
        default_precision = _laplace(default_majority, remaining.size)
    else:
        default_class, default_majority = _majority(y)
        default_precision = _laplace(default_majority, y.size)
    return DecisionListModel(
        data.feature_names, levels, tuple(rules), default_class,
        default_precision, data.schema_hash(),
    )


# ---------------------------------------------------------------------------
# Shared prediction contract


def predict_proba(model, row) -> float:
    """Probability of class 1 for one row under any baseline model."""
    if not isinstance(model, (LogisticModel, MlpModel, BayesNetModel,
                              DecisionListModel)):
        raise BaselineError(f"unknown model type {type(model).__name__}")
    arr = _check_row(model, row)
    if isinstance(model, LogisticModel):
        x = model._encoding().encode(arr)[0]
        z = model.intercept + float(np.dot(np.array(model.coefficients), x))
        return float(_sigmoid(np.array([z]))[0])
    if isinstance(model, MlpModel):
        x = model._encoding().encode(arr)
        return float(_sigmoid(_mlp_logits(model, x))[0])
    if isinstance(model, BayesNetModel):
        logs = []
        for t in (0, 1):
            assignment = {"target": t}
            for name, code in zip(model.feature_names, arr):
                lv = model.node_levels(name)
                if int(code) not in lv:
                    raise BaselineError(
                        f"column {name!r}: code {int(code)} not in schema"
                    )
                assignment[name] = lv.index(int(code))
            logs.append(_bayes_log_joint(model, assignment))
        peak = max(logs)
        w = [math.exp(v - peak) for v in logs]
        return w[1] / (w[0] + w[1])
    if isinstance(model, DecisionListModel):
        for rule in model.rules:
            if rule.matches(arr):
                p = rule.precision
                return p if rule.klass == 1 else 1.0 - p
        p = model.default_precision
        return p if model.default_class == 1 else 1.0 - p
    raise BaselineError(f"unknown model type {type(model).__name__}")


def predict(model, row) -> int:
    return 1 if predict_proba(model, row) >= 0.5 else 0


def predict_batch(model, rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    return np.array([predict(model, r) for r in rows], dtype=np.int64)


# ---------------------------------------------------------------------------
# Serialization


def _schema_payload(model) -> dict:
    return {
        "feature_names": list(model.feature_names),
        "levels": [list(lv) for lv in model.levels],
        "schema_hash": model.schema_hash,
    }


def model_to_json(model) -> str:
    """Serialize any baseline model to structured text."""
    if isinstance(model, LogisticModel):
        payload = {
            "kind": "logistic",
            **_schema_payload(model),
            "intercept": model.intercept,
            "coefficients": list(model.coefficients),
            "iterations": model.iterations,
        }
    elif isinstance(model, MlpModel):
        payload = {
            "kind": "mlp",
            **_schema_payload(model),
            "activation": model.activation,
            "seed": model.seed,
            "weights": [w.tolist() for w in model.weights],
            "biases": [b.tolist() for b in model.biases],
        }
    elif isinstance(model, BayesNetModel):
        payload = {
            "kind": "bayes_net",
            **_schema_payload(model),
            "alpha": model.alpha,
            "score": model.score,
            "parents": {k: list(v) for k, v in sorted(model.parents.items())},
            "cpts": {k: v.tolist() for k, v in sorted(model.cpts.items())},
        }
    elif isinstance(model, DecisionListModel):
        payload = {
            "kind": "decision_list",
            **_schema_payload(model),
            "rules": [
                {
                    "literals": [list(l) for l in r.literals],
                    "class": r.klass,
                    "precision": r.precision,
                    "coverage": r.coverage,
                }
                for r in model.rules
            ],
            "default_class": model.default_class,
            "default_precision": model.default_precision,
        }
    else:
        raise BaselineError(f"unknown model type {type(model).__name__}")
    return json.dumps(payload, sort_keys=True)


def model_from_json(text: str):
    """Rebuild a baseline model serialized by model_to_json."""
    payload = json.loads(text)
    names = tuple(payload["feature_names"])
    levels = tuple(tuple(lv) for lv in payload["levels"])
    kind = payload["kind"]
    if kind == "logistic":
        return LogisticModel(names, levels, float(payload["intercept"]),
                             tuple(payload["coefficients"]),
                             payload["schema_hash"], int(payload["iterations"]))
    if kind == "mlp":
        return MlpModel(names, levels,
                        tuple(np.array(w) for w in payload["weights"]),
                        tuple(np.array(b) for b in payload["biases"]),
                        payload["activation"], payload["schema_hash"],
                        int(payload["seed"]))
    if kind == "bayes_net":
        return BayesNetModel(
            names, levels,
            {k: tuple(v) for k, v in payload["parents"].items()},
            {k: np.array(v) for k, v in payload["cpts"].items()},
            float(payload["alpha"]), float(payload["score"]),
            payload["schema_hash"],
        )
    if kind == "decision_list":
        rules = tuple(
            DecisionRule(tuple((int(j), int(c)) for j, c in r["literals"]),
                         int(r["class"]), float(r["precision"]),
                         int(r["coverage"]))
            for r in payload["rules"]
        )
        return DecisionListModel(names, levels, rules,
                                 int(payload["default_class"]),
                                 float(payload["default_precision"]),
                                 payload["schema_hash"])
    raise BaselineError(f"unknown model kind {kind!r}")
