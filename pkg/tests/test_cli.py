import hashlib
import json

import numpy as np
import pytest

from treebench import cli
from treebench.cli import ConfigError, load_config
from treebench.dataset import (
    RecodeRule,
    RecodeRuleSet,
    binary_schema,
    generate_synthetic,
    planted_relevance_rules,
    schema_to_json,
)
from treebench.shapley import EliminationTrace
from treebench.tree import TreeParams, predictor_importance, prune_c50, train_c50


def write_fixture(path, n=120, m=4, seed=5):
    schema = binary_schema(m)
    data = generate_synthetic(
        schema, n, seed=seed, rules=planted_relevance_rules(("f00", "f01"))
    )
    data.to_csv(path / "coded.csv")
    (path / "schema.json").write_text(schema_to_json(schema))
    return data


def write_config(path, **overrides):
    payload = {
        "seed": 11,
        "table": "coded.csv",
        "schema": "schema.json",
        "folds": 5,
        "roster": ["c50", "cart", "logistic"],
        "forest": {"n_trees": 8, "max_depth": 3},
        "background": 8,
        "out_dir": "artifacts",
    }
    payload.update(overrides)
    payload = {k: v for k, v in payload.items() if v is not None}
    (path / "config.json").write_text(json.dumps(payload))
    return path / "config.json"


def hash_dir(path):
    return {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(path.iterdir())
    }


# ---------------------------------------------------------------------------
# Config parsing


def test_config_requires_seed(tmp_path):
    cfg = write_config(tmp_path, seed=None)
    with pytest.raises(ConfigError, match="seed"):
        load_config(cfg)


def test_config_rejects_unknown_keys(tmp_path):
    cfg = write_config(tmp_path, typo_key=1)
    with pytest.raises(ConfigError, match="typo_key"):
        load_config(cfg)


def test_config_file_must_exist(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.json")


def test_config_overrides(tmp_path):
    cfg = write_config(tmp_path)
    config = load_config(cfg, out_dir=tmp_path / "elsewhere", seed=99)
    assert config.seed == 99
    assert config.out_dir == tmp_path / "elsewhere"


def test_config_paths_resolve_relative_to_file(tmp_path):
    cfg = write_config(tmp_path)
    config = load_config(cfg)
    assert config.table == tmp_path / "coded.csv"
    assert config.out_dir == tmp_path / "artifacts"


def test_config_validation_errors(tmp_path):
    for overrides, fragment in [
        ({"roster": ["c50", "c50"]}, "duplicate"),
        ({"roster": ["ghost"]}, "ghost"),
        ({"roster": []}, "roster"),
        ({"folds": 1}, "folds"),
        ({"seed": -1}, "seed"),
        ({"forest": {"seed": 4}}, "forest.seed"),
        ({"explain_rows": [-2]}, "explain_rows"),
        ({"cohort": {"curve_codes": [2]}}, "alignment_field"),
        ({"roster_params": {"ghost": {}}}, "ghost"),
        ({"background": 0}, "background"),
    ]:
        cfg = write_config(tmp_path, **overrides)
        with pytest.raises(ConfigError, match=fragment):
            load_config(cfg)


def test_bad_json_is_config_error(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(path)


def test_bad_roster_params_rejected_before_training(tmp_path):
    write_fixture(tmp_path)
    cfg = write_config(
        tmp_path, roster_params={"c50": {"no_such_knob": 3}}
    )
    assert cli.main(["compare", "--config", str(cfg)]) == 2


# ---------------------------------------------------------------------------
# Exit codes


def test_missing_schema_file_is_usage_error(tmp_path, capsys):
    write_fixture(tmp_path)
    (tmp_path / "schema.json").unlink()
    cfg = write_config(tmp_path)
    assert cli.main(["compare", "--config", str(cfg)]) == 2
    assert "schema" in capsys.readouterr().err


def test_unknown_command_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate", "--config", "x"])
    assert exc.value.code == 2


def test_computation_error_is_exit_1(tmp_path, capsys):
    write_fixture(tmp_path)
    (tmp_path / "coded.csv").write_text("f00,target\n0,caterpillar\n")
    schema = binary_schema(1)
    (tmp_path / "schema.json").write_text(schema_to_json(schema))
    cfg = write_config(tmp_path, roster=["logistic"])
    assert cli.main(["compare", "--config", str(cfg)]) == 1
    assert "error" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# compare


def test_compare_writes_sorted_leaderboard(tmp_path):
    write_fixture(tmp_path)
    cfg = write_config(tmp_path)
    assert cli.main(["compare", "--config", str(cfg)]) == 0
    out = tmp_path / "artifacts"
    lines = (out / "leaderboard.tsv").read_text().strip().split("\n")
    assert lines[0] == "rank\tmodel\taccuracy_pct\tpooled_pct"
    body = [line.split("\t") for line in lines[1:]]
    assert [row[0] for row in body] == ["1", "2", "3"]
    accuracies = [float(row[2]) for row in body]
    assert accuracies == sorted(accuracies, reverse=True)
    report = (out / "report.txt").read_text()
    assert report.startswith("fold plan ")
    assert "coincidence:" in report


def test_compare_importance_file_matches_library(tmp_path):
    data = write_fixture(tmp_path)
    cfg = write_config(tmp_path)
    cli.main(["compare", "--config", str(cfg)])
    lines = (tmp_path / "artifacts" / "importance.tsv").read_text().strip().split("\n")
    assert lines[0] == "feature\tweight"
    parsed = {}
    for line in lines[1:]:
        name, value = line.split("\t")
        parsed[name] = float(value)
    expected = predictor_importance(prune_c50(train_c50(data, TreeParams())))
    assert set(parsed) == set(expected)
    for name in parsed:
        assert abs(parsed[name] - expected[name]) <= 5e-5
    assert abs(sum(parsed.values()) - 1.0) <= 0.01
    weights = [parsed[line.split("\t")[0]] for line in lines[1:]]
    assert weights == sorted(weights, reverse=True)


def test_compare_dot_file_well_formed(tmp_path):
    write_fixture(tmp_path)
    cfg = write_config(tmp_path)
    cli.main(["compare", "--config", str(cfg)])
    dot = (tmp_path / "artifacts" / "best_tree.dot").read_text()
    assert dot.startswith("digraph")
    assert dot.rstrip().endswith("}")
    assert dot.count("[label=") >= 3
    assert all(line.count('"') % 2 == 0 for line in dot.split("\n"))


def test_compare_rerun_byte_identical(tmp_path):
    write_fixture(tmp_path)
    cfg = write_config(tmp_path)
    cli.main(["compare", "--config", str(cfg)])
    first = hash_dir(tmp_path / "artifacts")
    cli.main(["compare", "--config", str(cfg)])
    assert hash_dir(tmp_path / "artifacts") == first


def test_compare_seed_changes_fold_plan(tmp_path):
    write_fixture(tmp_path)
    cfg = write_config(tmp_path)
    cli.main(["compare", "--config", str(cfg), "--out", str(tmp_path / "a")])
    cli.main(["compare", "--config", str(cfg), "--out", str(tmp_path / "b"),
              "--seed", "12"])
    line_a = (tmp_path / "a" / "report.txt").read_text().split("\n")[0]
    line_b = (tmp_path / "b" / "report.txt").read_text().split("\n")[0]
    assert line_a != line_b


def test_compare_full_roster(tmp_path):
    write_fixture(tmp_path, n=60, m=3)
    cfg = write_config(
        tmp_path,
        roster=list(cli.DEFAULT_ROSTER),
        roster_params={"mlp": {"epochs": 10, "widths": [4]}},
    )
    assert cli.main(["compare", "--config", str(cfg)]) == 0
    lines = (tmp_path / "artifacts" / "leaderboard.tsv").read_text().strip().split("\n")
    assert len(lines) == 1 + 8
    names = {line.split("\t")[1] for line in lines[1:]}
    assert names == set(cli.DEFAULT_ROSTER)


def test_compare_without_tree_families(tmp_path):
    write_fixture(tmp_path)
    cfg = write_config(tmp_path, roster=["logistic", "decision-list"])
    assert cli.main(["compare", "--config", str(cfg)]) == 0
    out = tmp_path / "artifacts"
    assert not (out / "best_tree.dot").exists()
    assert not (out / "importance.tsv").exists()
    assert (out / "leaderboard.tsv").exists()


# ---------------------------------------------------------------------------
# select-features


def test_select_features_trace_round_trips(tmp_path):
    write_fixture(tmp_path, m=2)
    cfg = write_config(tmp_path)
    assert cli.main(["select-features", "--config", str(cfg)]) == 0
    out = tmp_path / "artifacts"
    trace = EliminationTrace.from_json((out / "elimination.json").read_text())
    assert len(trace.steps) == 2
    assert trace.to_json() + "\n" == (out / "elimination.json").read_text()
    selected = (out / "selected.txt").read_text().strip().split("\n")
    assert tuple(selected) == trace.selected_features


def test_select_features_keeps_planted_pair(tmp_path):
    write_fixture(tmp_path, n=200, m=5, seed=9)
    cfg = write_config(tmp_path, forest={"n_trees": 12, "max_depth": 3})
    cli.main(["select-features", "--config", str(cfg)])
    selected = (tmp_path / "artifacts" / "selected.txt").read_text().split()
    assert {"f00", "f01"} <= set(selected)


# ---------------------------------------------------------------------------
# explain


def test_explain_local_accuracy_in_file(tmp_path):
    write_fixture(tmp_path)
    cfg = write_config(tmp_path, explain_rows=[0, 3, 7])
    assert cli.main(["explain", "--config", str(cfg)]) == 0
    lines = (tmp_path / "artifacts" / "attributions.tsv").read_text().strip().split("\n")
    assert lines[0] == "row\tfeature\tphi\tbase\toutput"
    assert len(lines) == 1 + 3 * 4
    by_row = {}
    for line in lines[1:]:
        rid, _, phi, base, output = line.split("\t")
        entry = by_row.setdefault(rid, [0.0, float(base), float(output)])
        entry[0] += float(phi)
    assert sorted(by_row) == ["0", "3", "7"]
    for total, base, output in by_row.values():
        assert abs(base + total - output) < 1e-9


def test_explain_ranking_descends(tmp_path):
    write_fixture(tmp_path)
    cfg = write_config(tmp_path)
    cli.main(["explain", "--config", str(cfg)])
    lines = (tmp_path / "artifacts" / "shap_ranking.tsv").read_text().strip().split("\n")
    values = [float(line.split("\t")[1]) for line in lines[1:]]
    assert len(values) == 4
    assert values == sorted(values, reverse=True)


def test_explain_constant_target_all_zero(tmp_path):
    schema = binary_schema(3)
    rng = np.random.default_rng(0)
    rows = rng.integers(0, 2, size=(30, 3))
    from treebench.dataset import CategoricalTable

    CategoricalTable(schema, rows, np.zeros(30, dtype=np.int64)).to_csv(
        tmp_path / "coded.csv"
    )
    (tmp_path / "schema.json").write_text(schema_to_json(schema))
    cfg = write_config(tmp_path, explain_rows=[0, 5])
    assert cli.main(["explain", "--config", str(cfg)]) == 0
    lines = (tmp_path / "artifacts" / "attributions.tsv").read_text().strip().split("\n")
    assert all(float(line.split("\t")[2]) == 0.0 for line in lines[1:])


def test_explain_row_out_of_range(tmp_path, capsys):
    write_fixture(tmp_path, n=50)
    cfg = write_config(tmp_path, explain_rows=[49, 50])
    assert cli.main(["explain", "--config", str(cfg)]) == 2
    assert "out of range" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# ingest


def ingest_fixture(tmp_path):
    rows = [
        "ALIGN,PRE,SEX,SEV",
        "2,13,1,0",
        "2,13,2,3",
        "3,13,1,2",
        "1,13,2,4",
        "3,5,1,1",
        "2,13,9,2",
        "3,13,2,0",
        "2,13,1,4",
    ]
    (tmp_path / "raw.csv").write_text("\n".join(rows) + "\n")
    rules = RecodeRuleSet(
        features=(
            RecodeRule(
                name="sex",
                source=("SEX",),
                cases=(({"in": [1]}, 0), ({"in": [2]}, 1)),
                missing=frozenset({9}),
            ),
        ),
        target=RecodeRule(
            name="injury",
            source=("SEV",),
            cases=(({"in": [0]}, 0), ({"ge": 1}, 1)),
            missing=frozenset({9}),
        ),
    )
    (tmp_path / "rules.json").write_text(rules.to_json())
    return write_config(
        tmp_path,
        table=None,
        schema=None,
        raw="raw.csv",
        rules="rules.json",
        cohort={
            "alignment_field": "ALIGN",
            "curve_codes": [2, 3],
            "negotiating_field": "PRE",
            "negotiating_codes": [13],
        },
        expected_rows=5,
        out_dir="ingested",
    )


def test_ingest_applies_filter_and_rules(tmp_path, capsys):
    cfg = ingest_fixture(tmp_path)
    assert cli.main(["ingest", "--config", str(cfg)]) == 0
    captured = capsys.readouterr().out
    assert "cohort filter retained 6, discarded 2" in captured
    assert "expected 5 rows: matched" in captured
    out = tmp_path / "ingested"
    coded = (out / "coded.csv").read_text().strip().split("\n")
    assert coded[0] == "sex,target"
    assert len(coded) == 1 + 5
    audit = json.loads((out / "audit.json").read_text())
    assert audit["cohort"] == {"retained": 6, "discarded": 2}
    assert audit["recode"]["dropped_missing_by_rule"]["sex"] == 1
    assert audit["rows_out"] == 5
    assert audit["expected_rows"]["matched"] is True


def test_ingest_unmatched_expectation_still_succeeds(tmp_path, capsys):
    cfg = ingest_fixture(tmp_path)
    payload = json.loads(cfg.read_text())
    payload["expected_rows"] = 740
    cfg.write_text(json.dumps(payload))
    assert cli.main(["ingest", "--config", str(cfg)]) == 0
    assert "expected 740 rows: unmatched (got 5)" in capsys.readouterr().out
    audit = json.loads((tmp_path / "ingested" / "audit.json").read_text())
    assert audit["expected_rows"]["matched"] is False


def test_ingest_rerun_byte_identical(tmp_path):
    cfg = ingest_fixture(tmp_path)
    cli.main(["ingest", "--config", str(cfg)])
    first = hash_dir(tmp_path / "ingested")
    cli.main(["ingest", "--config", str(cfg)])
    assert hash_dir(tmp_path / "ingested") == first


def test_ingest_output_feeds_compare(tmp_path):
    cfg = ingest_fixture(tmp_path)
    cli.main(["ingest", "--config", str(cfg)])
    follow = write_config(
        tmp_path,
        table="ingested/coded.csv",
        schema="ingested/schema.json",
        roster=["c50"],
        folds=2,
    )
    follow = follow.rename(tmp_path / "compare.json")
    assert cli.main(["compare", "--config", str(follow)]) == 0


def test_ingest_missing_rules_is_usage_error(tmp_path, capsys):
    cfg = ingest_fixture(tmp_path)
    (tmp_path / "rules.json").unlink()
    assert cli.main(["ingest", "--config", str(cfg)]) == 2
    assert "rules" in capsys.readouterr().err
