import json
from pathlib import Path

import jsonschema
import pytest

import htmob

SCHEMA_DIR = Path(__file__).resolve().parents[2] / "schema"


def load_schema(name):
    schema = json.loads((SCHEMA_DIR / name).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    return schema


def test_version():
    assert htmob.__version__ == "0.1.0"


def test_head_tail_breaks_three_classes():
    r = htmob.head_tail_breaks([1] * 6 + [2, 2, 4, 8, 16, 32])
    assert r["ht_index"] == 3
    assert r["breaks"] == [35 / 6, 56 / 3]
    assert r["class_of"] == [1] * 9 + [2, 2, 3]


def test_head_tail_breaks_constant():
    r = htmob.head_tail_breaks([1.0, 1.0, 1.0, 1.0])
    assert r["ht_index"] == 1
    assert r["breaks"] == []


def test_bad_input_raises_contract_violation():
    with pytest.raises(htmob.ContractViolation):
        htmob.head_tail_breaks([])
    with pytest.raises(htmob.HtmobError):
        htmob.ccdf([])


def test_ccdf():
    assert htmob.ccdf([1, 2, 2, 4]) == [(1, 0.75), (2, 0.25), (4, 0.0)]


def test_relevance_half_and_full():
    visits = [("home", d) for d in range(10)] + [("gym", d) for d in range(0, 10, 2)]
    table = {r["place"]: r for r in htmob.relevance(visits)}
    assert table["home"]["rr"] == 1.0
    assert table["gym"]["rr"] == 0.5
    assert table["gym"]["d_total"] == 10


def test_relevance_window_span():
    table = htmob.relevance([("a", 0), ("a", 3)], d_total="window-span", window=(0, 9))
    assert table[0]["rr"] == 0.2


def test_classify_planted_user():
    rr = {f"e{i}": 0.03 for i in range(50)}
    rr.update({f"o{i}": 0.3 for i in range(5)})
    rr.update({"m0": 1.0, "m1": 1.0})
    c = htmob.classify(rr)
    assert c["group"] == 3
    labels = [c["places"][p][1] for p in ("e0", "o0", "m0")]
    assert labels == ["EVP", "OVP", "MVP"]


def test_kmeans_and_rand_index():
    r = htmob.kmeans_1d([0, 0, 10, 10], k=2)
    assert r["centroids"] == [0, 10]
    assert r["objective"] == 0.0
    assert htmob.rand_index([0, 0, 1], [1, 1, 0]) == 1.0


def test_spearman_constant_is_zero():
    assert htmob.spearman([1, 2, 3], [5, 5, 5]) == 0.0


def test_cohort_summary():
    s = htmob.cohort_summary(json.dumps({"user_count": 7, "seed": 3}))
    assert s["users"] == 7
    assert s["events"] > 0
    with pytest.raises(htmob.ConfigError):
        htmob.cohort_summary(json.dumps({"colour": "red"}))


def test_cli_round_trip_matches_schemas(tmp_path):
    syn = tmp_path / "syn"
    code, _, err = htmob.run_cli(["synth", "--mode", "wifi", "--users", "12", "--days", "30", "-o", str(syn)])
    assert code == 0, err

    out = tmp_path / "a"
    code, _, err = htmob.run_cli(["analyze", "-k", "wifi", "-i", str(syn / "wifi.csv"), "-o", str(out)])
    assert code == 0, err
    report = json.loads((out / "report.json").read_text())
    jsonschema.validate(report, load_schema("report.schema.json"))
    for curve in report["curves"]:
        assert (out / curve["file"]).exists()

    cmp_out = tmp_path / "c"
    code, _, err = htmob.run_cli(["compare", "-k", "wifi", "-i", str(syn / "wifi.csv"), "-o", str(cmp_out)])
    assert code == 0, err
    comparison = json.loads((cmp_out / "comparison.json").read_text())
    jsonschema.validate(comparison, load_schema("comparison.schema.json"))


def test_cli_error_codes(tmp_path):
    code, _, err = htmob.run_cli(["analyze", "-i", str(tmp_path / "missing.csv"), "-o", str(tmp_path / "a")])
    assert code == 3
    assert err.startswith("io_error: ")
    assert htmob.run_cli(["analyze", "--bogus"])[0] == 2
