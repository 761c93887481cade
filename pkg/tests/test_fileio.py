"""JSON round-trips for instances, policies, and hypothesis classes."""

import json

import pytest

import adaptsel as a
from adaptsel import fileio
from conftest import corpus_instance

TOL = 1e-9


def test_instance_round_trip(tmp_path):
    instance = corpus_instance(4)
    path = tmp_path / "instance.json"
    fileio.save_instance(path, instance)
    loaded = fileio.load_instance(path)
    assert loaded.elements == instance.elements
    assert loaded.states == instance.states
    assert loaded.realizations == instance.realizations
    assert loaded.prior == instance.prior
    assert loaded.utility == instance.utility


def test_instance_files_are_stable(tmp_path):
    instance = corpus_instance(1)
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    fileio.save_instance(first, instance)
    fileio.save_instance(second, instance)
    assert first.read_bytes() == second.read_bytes()


def test_policy_round_trip(tmp_path):
    instance = corpus_instance(2)
    greedy = a.build_greedy(instance)
    path = tmp_path / "policy.json"
    fileio.save_policy(path, instance, greedy)
    loaded = fileio.load_policy(path, instance)
    assert loaded == greedy


def test_threshold_policy_round_trip(tmp_path):
    instance, chain = a.gen_theorem5(3, 0.5)
    sp = a.threshold_subpolicy(chain, 0.25, 0.4)
    path = tmp_path / "sp.json"
    fileio.save_policy(path, instance, sp)
    loaded = fileio.load_policy(path, instance)
    assert loaded == sp


def test_builtin_coverage_utility_matches_library(tmp_path,
                                                  demo_hypotheses):
    bare = a.instance_from_hypotheses(demo_hypotheses)
    data = fileio.instance_to_dict(bare)
    data["utility"] = {"kind": "builtin", "name": "coverage", "params": {}}
    loaded = fileio.instance_from_dict(data)
    assert loaded.utility == a.coverage_utility(bare)
    data["utility"] = {
        "kind": "builtin", "name": "coverage", "params": {"modified": True}
    }
    modified = fileio.instance_from_dict(data)
    assert modified.utility == a.coverage_utility(
        bare, a.modified_prior(bare.prior)
    )


def test_builtin_theorem_utilities_match_generators():
    for name, build in (
        ("theorem5", lambda: a.gen_theorem5(3, 0.5)),
        ("theorem4", lambda: a.gen_theorem4(3)),
    ):
        instance, _ = build()
        data = fileio.instance_to_dict(instance)
        data["utility"] = {"kind": "builtin", "name": name,
                           "params": {"epsilon": 0.5}}
        loaded = fileio.instance_from_dict(data)
        assert loaded.utility == instance.utility


def test_hypotheses_round_trip(tmp_path, demo_hypotheses):
    path = tmp_path / "h.json"
    fileio.save(path, fileio.hypotheses_to_dict(demo_hypotheses))
    loaded = fileio.load_hypotheses(path)
    assert loaded == demo_hypotheses


def test_parse_errors_are_reported(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(a.ParseError):
        fileio.load_instance(bad)
    bad.write_text(json.dumps({"elements": ["v1"]}))
    with pytest.raises(a.ParseError):
        fileio.load_instance(bad)


def test_policy_parse_rejects_incomplete_children(thm5):
    instance, _ = thm5
    with pytest.raises(a.ParseError):
        fileio.policy_from_dict(
            instance, {"select": "v1", "children": {"0": "terminal"}}
        )
    with pytest.raises(a.ParseError):
        fileio.policy_from_dict(instance, {"children": {}})


def test_incomplete_utility_table_rejected():
    instance = corpus_instance(0)
    data = fileio.instance_to_dict(instance)
    data["utility"]["entries"].pop()
    with pytest.raises(a.ParseError):
        fileio.instance_from_dict(data)


def test_jsonable_handles_non_finite_floats():
    out = fileio.jsonable({"x": float("inf")})
    json.dumps(out)
    assert out["x"] == "inf"
