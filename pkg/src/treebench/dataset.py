"""Coded categorical tables: ingestion, recoding, cohort filtering,
crosstabs, and a seeded synthetic generator.

The raw side of this module deals with delimiter-separated police-report
extracts whose cells are integer codes (including "not reported" style
missing codes).  ``recode`` turns a raw table into a ``CategoricalTable``
of small recoded values plus a binary target, dropping rows with missing
source values.  Tables are immutable after construction and safe to share
across threads.
"""
from __future__ import annotations

import csv
import hashlib
import json
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


class DatasetError(ValueError):
    """Raised for malformed input files, schemas, or rule sets."""


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureSpec:
    """One categorical column: its code domain, missing codes, and labels.

    ``allowed_codes`` is the set of valid recoded values.  ``missing_codes``
    are raw codes that mean "not reported" / "unknown"; they never overlap
    the allowed set.  ``code_labels`` maps every allowed code to a display
    label (filled with the code's digits when not given).
    """

    name: str
    allowed_codes: tuple[int, ...]
    missing_codes: frozenset[int] = frozenset()
    code_labels: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        codes = tuple(sorted(set(int(c) for c in self.allowed_codes)))
        if not codes:
            raise DatasetError(f"feature {self.name!r}: allowed_codes is empty")
        if any(c < 0 for c in codes):
            raise DatasetError(f"feature {self.name!r}: codes must be non-negative")
        missing = frozenset(int(c) for c in self.missing_codes)
        if missing & set(codes):
            raise DatasetError(
                f"feature {self.name!r}: missing_codes overlap allowed_codes"
            )
        labels = {int(k): str(v) for k, v in self.code_labels.items()}
        for c in codes:
            labels.setdefault(c, str(c))
        object.__setattr__(self, "allowed_codes", codes)
        object.__setattr__(self, "missing_codes", missing)
        object.__setattr__(self, "code_labels", labels)

    def label(self, code: int) -> str:
        return self.code_labels.get(code, str(code))


def feature(name: str, codes: Iterable[int], labels: Mapping[int, str] | None = None,
            missing: Iterable[int] = ()) -> FeatureSpec:
    """Shorthand constructor for a FeatureSpec."""
    return FeatureSpec(name, tuple(codes), frozenset(missing), dict(labels or {}))


def schema_to_json(schema: Sequence[FeatureSpec]) -> str:
    payload = [
        {
            "name": f.name,
            "codes": list(f.allowed_codes),
            "missing": sorted(f.missing_codes),
            "labels": {str(k): v for k, v in sorted(f.code_labels.items())},
        }
        for f in schema
    ]
    return json.dumps(payload, indent=2, sort_keys=True)


def schema_from_json(text: str) -> tuple[FeatureSpec, ...]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise DatasetError(f"bad schema JSON: {e}") from e
    return tuple(
        FeatureSpec(
            name=item["name"],
            allowed_codes=tuple(item["codes"]),
            missing_codes=frozenset(item.get("missing", ())),
            code_labels={int(k): v for k, v in item.get("labels", {}).items()},
        )
        for item in payload
    )


def schema_hash(schema: Sequence[FeatureSpec]) -> str:
    return hashlib.sha256(schema_to_json(schema).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

class RawTable:
    """Columns of raw integer codes, exactly as read from the source file."""

    def __init__(self, columns: Sequence[str], rows: np.ndarray):
        self.columns = tuple(columns)
        self.rows = np.asarray(rows, dtype=np.int64)
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.columns):
            raise DatasetError("row matrix does not match column list")
        self.rows.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise DatasetError(f"column not found: {name}") from None

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.column_index(name)]

    def take(self, row_indices: np.ndarray) -> "RawTable":
        return RawTable(self.columns, self.rows[row_indices])


class CategoricalTable:
    """Recoded feature matrix plus a binary target.

    Every cell is validated against its column's allowed codes at
    construction; the target holds 0 (no injury) / 1 (injury) style labels.
    """

    def __init__(self, schema: Sequence[FeatureSpec], rows: np.ndarray,
                 target: np.ndarray):
        self.schema = tuple(schema)
        self.rows = np.ascontiguousarray(rows, dtype=np.int64)
        self.target = np.ascontiguousarray(target, dtype=np.int64)
        n, m = self.rows.shape if self.rows.ndim == 2 else (0, 0)
        if m != len(self.schema):
            raise DatasetError("row matrix width does not match schema")
        if self.target.shape != (n,):
            raise DatasetError("target length does not match row count")
        if n < 1:
            raise DatasetError("table must contain at least one row")
        if not np.isin(self.target, (0, 1)).all():
            raise DatasetError("target values must be 0 or 1")
        for j, spec in enumerate(self.schema):
            bad = ~np.isin(self.rows[:, j], spec.allowed_codes)
            if bad.any():
                i = int(np.argmax(bad))
                raise DatasetError(
                    f"row {i}, column {spec.name!r}: code "
                    f"{int(self.rows[i, j])} not in allowed codes"
                )
        self.rows.setflags(write=False)
        self.target.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return len(self.schema)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.schema)

    def feature_index(self, name: str) -> int:
        for j, f in enumerate(self.schema):
            if f.name == name:
                return j
        raise DatasetError(f"column not found: {name}")

    def column(self, name: str) -> np.ndarray:
        if name == "target":
            return self.target
        return self.rows[:, self.feature_index(name)]

    def observed_codes(self, j: int) -> tuple[int, ...]:
        return tuple(int(c) for c in np.unique(self.rows[:, j]))

    def take_rows(self, row_indices) -> "CategoricalTable":
        idx = np.asarray(row_indices)
        return CategoricalTable(self.schema, self.rows[idx], self.target[idx])

    def take_features(self, feature_indices: Sequence[int]) -> "CategoricalTable":
        idx = list(feature_indices)
        return CategoricalTable(
            [self.schema[j] for j in idx], self.rows[:, idx], self.target
        )

    def schema_hash(self) -> str:
        return schema_hash(self.schema)

    # -- CSV round trip (header = feature names + "target") -----------------

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(self.feature_names) + ["target"])
            for i in range(self.n_rows):
                writer.writerow(
                    [int(v) for v in self.rows[i]] + [int(self.target[i])]
                )

    @classmethod
    def from_csv(cls, path, schema: Sequence[FeatureSpec]) -> "CategoricalTable":
        raw = load_delimited(path, [f.name for f in schema] + ["target"])
        cols = [raw.column(f.name) for f in schema]
        rows = np.column_stack(cols) if cols else np.empty((raw.n_rows, 0), int)
        return cls(schema, rows, raw.column("target"))


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def load_delimited(path, schema, delimiter: str = ",", header: bool = True) -> RawTable:
    """Read a delimited text file into a RawTable.

    ``schema`` lists the columns to extract, either as FeatureSpec objects or
    plain names; header matching is case-insensitive.  Cells must parse as
    integers; raw codes (including missing codes) pass through untouched.
    """
    names = [s.name if isinstance(s, FeatureSpec) else str(s) for s in schema]
    try:
        fh = open(path, newline="")
    except OSError as e:
        raise DatasetError(f"cannot read {path}: {e}") from e
    with fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            first = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: file is empty") from None
        if header:
            lookup = {h.strip().lower(): i for i, h in enumerate(first)}
            indices = []
            for name in names:
                if name.lower() not in lookup:
                    raise DatasetError(f"column not found: {name}")
                indices.append(lookup[name.lower()])
            data_rows = reader
        else:
            if len(first) < len(names):
                raise DatasetError(f"{path}: fewer columns than requested")
            indices = list(range(len(names)))
            data_rows = _chain_first(first, reader)
        out = []
        for r, row in enumerate(data_rows):
            parsed = []
            for name, i in zip(names, indices):
                cell = row[i].strip() if i < len(row) else ""
                try:
                    parsed.append(int(cell))
                except ValueError:
                    raise DatasetError(
                        f"{path}: non-integer value {cell!r} at row {r}, "
                        f"column {name!r}"
                    ) from None
            out.append(parsed)
    rows = np.array(out, dtype=np.int64) if out else np.empty((0, len(names)), np.int64)
    return RawTable(names, rows)


def _chain_first(first, rest):
    yield first
    yield from rest


# ---------------------------------------------------------------------------
# Recoding
# ---------------------------------------------------------------------------

_PREDICATE_KEYS = ("in", "lt", "le", "gt", "ge", "any")


def _match(predicate: Mapping, value: int) -> bool:
    if len(predicate) != 1:
        raise DatasetError(f"predicate must have exactly one key: {predicate}")
    key, arg = next(iter(predicate.items()))
    if key == "in":
        return value in set(int(v) for v in arg)
    if key == "lt":
        return value < int(arg)
    if key == "le":
        return value <= int(arg)
    if key == "gt":
        return value > int(arg)
    if key == "ge":
        return value >= int(arg)
    if key == "any":
        return True
    raise DatasetError(f"unknown predicate key {key!r} (expected one of {_PREDICATE_KEYS})")


@dataclass(frozen=True)
class RecodeRule:
    """Mapping from one (or several combined) raw columns to one coded feature.

    ``cases`` is an ordered list of (predicate, output code) pairs; the first
    matching predicate wins.  ``missing`` lists raw codes treated as
    not-reported.  ``default`` handles raw values no case covers: ``None``
    makes such values an error (rules must be exhaustive), ``"drop"`` drops
    the row, an integer assigns that code.
    """

    name: str
    source: tuple[str, ...]
    cases: tuple[tuple[Mapping, int], ...]
    missing: frozenset[int] = frozenset()
    default: int | str | None = None
    combine: str = "first"
    labels: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        src = (self.source,) if isinstance(self.source, str) else tuple(self.source)
        if not src:
            raise DatasetError(f"rule {self.name!r}: no source column")
        if self.combine not in ("first", "max", "min"):
            raise DatasetError(f"rule {self.name!r}: unknown combine mode {self.combine!r}")
        if isinstance(self.default, str) and self.default != "drop":
            raise DatasetError(f"rule {self.name!r}: default must be None, 'drop', or a code")
        if not self.cases and self.default in (None, "drop"):
            raise DatasetError(f"rule {self.name!r}: no cases and no assigning default")
        object.__setattr__(self, "source", src)
        object.__setattr__(self, "cases", tuple((dict(p), int(c)) for p, c in self.cases))
        object.__setattr__(self, "missing", frozenset(int(v) for v in self.missing))

    def output_codes(self) -> tuple[int, ...]:
        codes = {c for _, c in self.cases}
        if isinstance(self.default, int):
            codes.add(self.default)
        return tuple(sorted(codes))

    def combined_value(self, raw: RawTable, row: int) -> int | None:
        """Resolve the source value for one row; None means missing."""
        values = [int(raw.rows[row, raw.column_index(s)]) for s in self.source]
        present = [v for v in values if v not in self.missing]
        if self.combine == "first":
            if values[0] in self.missing:
                return None
            return values[0]
        if not present or len(present) != len(values):
            # max/min combinations need every source reported
            return None
        return max(present) if self.combine == "max" else min(present)

    def apply(self, value: int) -> int | str | None:
        for predicate, code in self.cases:
            if _match(predicate, value):
                return code
        return self.default


@dataclass(frozen=True)
class RecodeRuleSet:
    """Ordered recode rules for the predictors plus one rule for the target."""

    features: tuple[RecodeRule, ...]
    target: RecodeRule

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        names = [r.name for r in self.features]
        if len(set(names)) != len(names):
            raise DatasetError("duplicate output feature names in rule set")

    def output_schema(self) -> tuple[FeatureSpec, ...]:
        return tuple(
            FeatureSpec(r.name, r.output_codes(), frozenset(), dict(r.labels))
            for r in self.features
        )

    def to_json(self) -> str:
        def rule_payload(r: RecodeRule) -> dict:
            return {
                "name": r.name,
                "source": list(r.source),
                "combine": r.combine,
                "missing": sorted(r.missing),
                "cases": [{"when": dict(p), "code": c} for p, c in r.cases],
                "default": r.default,
                "labels": {str(k): v for k, v in sorted(r.labels.items())},
            }

        payload = {
            "features": [rule_payload(r) for r in self.features],
            "target": rule_payload(self.target),
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RecodeRuleSet":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as e:
            raise DatasetError(f"bad rules JSON: {e}") from e

        def parse_rule(item: Mapping) -> RecodeRule:
            return RecodeRule(
                name=item["name"],
                source=tuple(item["source"]),
                cases=tuple((c["when"], c["code"]) for c in item.get("cases", ())),
                missing=frozenset(item.get("missing", ())),
                default=item.get("default"),
                combine=item.get("combine", "first"),
                labels={int(k): v for k, v in item.get("labels", {}).items()},
            )

        return cls(
            features=tuple(parse_rule(r) for r in payload["features"]),
            target=parse_rule(payload["target"]),
        )


@dataclass
class RecodeAudit:
    """Droppage accounting from one recode pass."""

    input_rows: int
    retained_rows: int
    dropped_missing: dict[str, int]
    dropped_default: dict[str, int]

    @property
    def dropped_rows(self) -> int:
        return self.input_rows - self.retained_rows

    def to_json(self) -> str:
        return json.dumps(
            {
                "input_rows": self.input_rows,
                "retained_rows": self.retained_rows,
                "dropped_rows": self.dropped_rows,
                "dropped_missing_by_rule": dict(sorted(self.dropped_missing.items())),
                "dropped_default_by_rule": dict(sorted(self.dropped_default.items())),
            },
            indent=2,
            sort_keys=True,
        )


def recode(raw: RawTable, rules: RecodeRuleSet, strict: bool = True
           ) -> tuple[CategoricalTable, RecodeAudit]:
    """Apply a rule set to a raw table, producing a coded table and an audit.

    In strict mode a row is dropped as soon as any rule's source value is a
    missing code; the audit counts drops per rule.  With ``strict=False``
    missing codes get no special treatment and must be covered by the rule's
    cases or default.  A raw value covered by no case and no default raises.
    """
    all_rules = list(rules.features) + [rules.target]
    for rule in all_rules:
        for src in rule.source:
            raw.column_index(src)  # raises on unknown column

    dropped_missing: dict[str, int] = {r.name: 0 for r in all_rules}
    dropped_default: dict[str, int] = {r.name: 0 for r in all_rules}
    out_rows: list[list[int]] = []
    out_target: list[int] = []

    for i in range(raw.n_rows):
        coded: list[int] = []
        keep = True
        for rule in all_rules:
            value = rule.combined_value(raw, i)
            if value is None:
                if strict:
                    dropped_missing[rule.name] += 1
                    keep = False
                    break
                value = int(raw.rows[i, raw.column_index(rule.source[0])])
            result = rule.apply(value)
            if result is None:
                raise DatasetError(
                    f"rule {rule.name!r}: raw value {value} at row {i} is not "
                    "covered by any case (rules must be exhaustive)"
                )
            if result == "drop":
                dropped_default[rule.name] += 1
                keep = False
                break
            coded.append(int(result))
        if keep:
            out_target.append(coded.pop())
            out_rows.append(coded)

    audit = RecodeAudit(
        input_rows=raw.n_rows,
        retained_rows=len(out_rows),
        dropped_missing=dropped_missing,
        dropped_default=dropped_default,
    )
    if not out_rows:
        raise DatasetError("recode dropped every row; nothing to train on")
    table = CategoricalTable(
        rules.output_schema(),
        np.array(out_rows, dtype=np.int64),
        np.array(out_target, dtype=np.int64),
    )
    return table, audit


def as_raw(table: CategoricalTable) -> RawTable:
    """View a coded table as a raw table (target becomes a plain column),
    so recode passes can be chained."""
    return RawTable(
        list(table.feature_names) + ["target"],
        np.column_stack([table.rows, table.target]),
    )


def identity_rules(schema: Sequence[FeatureSpec]) -> RecodeRuleSet:
    """Rule set that maps every allowed code of an already-coded table to
    itself.  Recoding with it is the identity, which makes repeated recode
    passes idempotent."""

    def identity(name: str, codes: Iterable[int], labels: Mapping[int, str]) -> RecodeRule:
        return RecodeRule(
            name=name,
            source=(name,),
            cases=tuple(({"in": [c]}, c) for c in codes),
            labels=dict(labels),
        )

    return RecodeRuleSet(
        features=tuple(
            identity(f.name, f.allowed_codes, f.code_labels) for f in schema
        ),
        target=identity("target", (0, 1), {}),
    )


# ---------------------------------------------------------------------------
# Cohort filter
# ---------------------------------------------------------------------------

def filter_curve_cohort(
    raw: RawTable,
    alignment_field: str,
    curve_codes: Iterable[int],
    negotiating_field: str | None = None,
    negotiating_codes: Iterable[int] = (),
) -> tuple[RawTable, int, int]:
    """Keep rows on a curve (right / left / unknown direction) whose vehicle
    was negotiating the curve before the critical event.

    Returns (filtered table, retained count, discarded count).  An empty
    result is a warning, not an error.
    """
    mask = np.isin(raw.column(alignment_field), list(curve_codes))
    if negotiating_field is not None:
        mask &= np.isin(raw.column(negotiating_field), list(negotiating_codes))
    retained = int(mask.sum())
    discarded = raw.n_rows - retained
    if retained == 0:
        warnings.warn("curve-cohort filter retained zero rows", stacklevel=2)
    return raw.take(np.flatnonzero(mask)), retained, discarded


# ---------------------------------------------------------------------------
# Crosstab
# ---------------------------------------------------------------------------

@dataclass
class CrosstabReport:
    """Counts of one variable against another with row/column/cell
    percentages.  Percentages are exact fractions internally; ``render``
    rounds to whole percent for display."""

    row_variable: str
    col_variable: str
    row_codes: tuple[int, ...]
    col_codes: tuple[int, ...]
    counts: np.ndarray
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    @property
    def grand_total(self) -> int:
        return int(self.counts.sum())

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def row_pct(self) -> np.ndarray:
        totals = self.row_totals[:, None]
        return np.divide(100.0 * self.counts, totals, where=totals > 0,
                         out=np.zeros_like(self.counts, dtype=float))

    @property
    def col_pct(self) -> np.ndarray:
        totals = self.col_totals[None, :]
        return np.divide(100.0 * self.counts, totals, where=totals > 0,
                         out=np.zeros_like(self.counts, dtype=float))

    @property
    def cell_pct(self) -> np.ndarray:
        return 100.0 * self.counts / self.grand_total

    def render(self) -> str:
        row_names = self.row_labels or tuple(str(c) for c in self.row_codes)
        col_names = self.col_labels or tuple(str(c) for c in self.col_codes)
        lines = [f"{self.row_variable} x {self.col_variable}"]
        header = ["category"] + [
            f"{c} (n / row% / col% / cell%)" for c in col_names
        ] + ["total"]
        lines.append(" | ".join(header))
        for i, name in enumerate(row_names):
            cells = [
                f"{int(self.counts[i, j])} / {round(self.row_pct[i, j])} / "
                f"{round(self.col_pct[i, j])} / {round(self.cell_pct[i, j])}"
                for j in range(len(col_names))
            ]
            lines.append(" | ".join([str(name)] + cells + [str(int(self.row_totals[i]))]))
        lines.append(
            " | ".join(
                ["total"]
                + [str(int(t)) for t in self.col_totals]
                + [str(self.grand_total)]
            )
        )
        return "\n".join(lines)


def crosstab(table: RawTable | CategoricalTable, row_var: str, col_var: str
             ) -> CrosstabReport:
    """Contingency table of ``row_var`` against ``col_var`` (``"target"``
    resolves to the target column of a coded table)."""
    row_values = table.column(row_var)
    col_values = table.column(col_var)
    row_codes = tuple(int(c) for c in np.unique(row_values))
    col_codes = tuple(int(c) for c in np.unique(col_values))
    counts = np.zeros((len(row_codes), len(col_codes)), dtype=np.int64)
    row_pos = {c: i for i, c in enumerate(row_codes)}
    col_pos = {c: j for j, c in enumerate(col_codes)}
    for rv, cv in zip(row_values, col_values):
        counts[row_pos[int(rv)], col_pos[int(cv)]] += 1

    def labels_for(name, codes):
        if isinstance(table, CategoricalTable) and name != "target":
            spec = table.schema[table.feature_index(name)]
            return tuple(spec.label(c) for c in codes)
        return tuple(str(c) for c in codes)

    return CrosstabReport(
        row_variable=row_var,
        col_variable=col_var,
        row_codes=row_codes,
        col_codes=col_codes,
        counts=counts,
        row_labels=labels_for(row_var, row_codes),
        col_labels=labels_for(col_var, col_codes),
    )


# ---------------------------------------------------------------------------
# Synthetic generator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticRules:
    """Generative recipe for synthetic coded tables.

    Feature columns are drawn independently from per-feature categorical
    distributions (uniform over allowed codes when unspecified).  The target
    is either a copy of one feature (``copy_of``) or a Bernoulli draw from a
    logistic score: intercept + sum of weight * code over ``weights`` plus
    ``disagreements`` terms that add weight whenever two named features carry
    different codes (an interaction invisible to main-effects models).
    """

    intercept: float = 0.0
    weights: Mapping[str, float] = field(default_factory=dict)
    disagreements: tuple[tuple[str, str, float], ...] = ()
    feature_probs: Mapping[str, Sequence[float]] = field(default_factory=dict)
    copy_of: str | None = None

    def relevant_features(self) -> tuple[str, ...]:
        if self.copy_of is not None:
            return (self.copy_of,)
        names = [n for n, w in self.weights.items() if w != 0.0]
        for a, b, w in self.disagreements:
            if w != 0.0:
                names.extend((a, b))
        return tuple(dict.fromkeys(names))


def generate_synthetic(
    schema: Sequence[FeatureSpec],
    n: int,
    seed: int,
    rules: SyntheticRules,
) -> CategoricalTable:
    """Draw a deterministic synthetic table from a generative recipe.

    The same (schema, n, seed, rules) always produces the identical table.
    """
    if n < 1:
        raise DatasetError("n must be at least 1")
    rng = np.random.default_rng(seed)
    columns = []
    for spec in schema:
        codes = np.array(spec.allowed_codes)
        probs = rules.feature_probs.get(spec.name)
        if probs is None:
            p = np.full(len(codes), 1.0 / len(codes))
        else:
            p = np.asarray(probs, dtype=float)
            if p.shape != codes.shape or abs(p.sum() - 1.0) > 1e-9:
                raise DatasetError(
                    f"feature_probs for {spec.name!r} must match its code count "
                    "and sum to 1"
                )
        columns.append(rng.choice(codes, size=n, p=p))
    rows = np.column_stack(columns)
    by_name = {spec.name: j for j, spec in enumerate(schema)}

    if rules.copy_of is not None:
        target = rows[:, by_name[rules.copy_of]].copy()
        if not np.isin(target, (0, 1)).all():
            raise DatasetError("copy_of target requires a binary source feature")
    else:
        score = np.full(n, rules.intercept)
        for name, w in rules.weights.items():
            score += w * rows[:, by_name[name]]
        for a, b, w in rules.disagreements:
            score += w * (rows[:, by_name[a]] != rows[:, by_name[b]])
        p1 = 1.0 / (1.0 + np.exp(-score))
        target = (rng.random(n) < p1).astype(np.int64)
    return CategoricalTable(schema, rows, target)


def binary_schema(n_features: int, prefix: str = "f") -> tuple[FeatureSpec, ...]:
    """n binary features named f00, f01, ... (two-digit suffix keeps sort
    order stable)."""
    return tuple(
        FeatureSpec(f"{prefix}{j:02d}", (0, 1)) for j in range(n_features)
    )


def planted_relevance_rules(
    relevant: Sequence[str] = ("f00", "f01"),
    weight: float = 2.0,
    shift: float = 0.18,
) -> SyntheticRules:
    """Strong main-effect features among noise.

    The intercept centers the logistic score at ``shift`` for the average
    row, putting the positive rate near 0.53 at the defaults, which matches
    the injury balance of the curve-crash cohort this toolkit targets.
    """
    return SyntheticRules(
        intercept=shift - weight * len(relevant) / 2.0,
        weights={name: weight for name in relevant},
    )


def planted_interaction_rules(
    pair: tuple[str, str] = ("f00", "f01"),
    weight: float = 2.5,
    intercept: float = -1.1,
) -> SyntheticRules:
    """A pure two-feature interaction with no main effects: the logistic
    score moves only when the pair's codes disagree."""
    return SyntheticRules(intercept=intercept, disagreements=((pair[0], pair[1], weight),))
