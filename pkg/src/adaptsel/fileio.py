"""JSON serialization for instances, policies, hypothesis classes, and
reports.

Formats:

* instance: ``{"elements": [...], "states": [...], "realizations":
  [{"v1": "0", ...}, ...], "prior": [...], "utility": ...}`` where the
  utility is either an explicit table ``{"kind": "table", "entries":
  [{"set": ["v1"], "realization": 0, "value": 1.5}, ...]}`` or a builtin
  reference ``{"kind": "builtin", "name": "coverage" | "theorem4" |
  "theorem5", "params": {...}}`` expanded against the instance's own
  elements and realizations.
* policy: a decision tree ``{"select": "v1", "children": {"0": ..., "1":
  ...}}`` with ``"terminal"`` leaves, or the threshold form ``{"base":
  <tree>, "tau": x, "rho": y}``.
* hypotheses: ``{"examples": [...], "labels": [[...], ...], "prior":
  [...]}``.

All writers emit stable-ordered (sorted-key) JSON so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math

from .core import Instance, UtilityTable, subset_key
from .errors import ParseError
from .policy import Node, Policy, Select, TERMINAL, Terminal, ThresholdSubPolicy

_BUILTIN_NAMES = ("coverage", "theorem4", "theorem5")


def _fail(message: str) -> None:
    raise ParseError(message)


def _expect(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        _fail(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        _fail(f"{where}: field {key!r} has the wrong type")
    return value


# -- instances -------------------------------------------------------------


def _builtin_utility(instance: Instance, name: str, params: dict) -> UtilityTable:
    from . import gen, learn

    if name == "coverage":
        prior = instance.prior
        if params.get("modified", False):
            prior = learn.modified_prior(prior)
        return learn.coverage_utility(instance, prior)
    if name == "theorem5":
        epsilon = params.get("epsilon")
        if not isinstance(epsilon, (int, float)) or not 0.0 < epsilon < 1.0:
            _fail("builtin theorem5 needs params.epsilon in (0, 1)")
        k = instance.num_elements
        return gen._tabulate_set_function(
            k,
            instance.num_realizations,
            lambda subset: sum(epsilon**i for i in range(len(subset) + 1)),
        )
    if name == "theorem4":
        k = instance.num_elements
        return gen._tabulate_set_function(
            k,
            instance.num_realizations,
            lambda subset: gen._staircase_value(subset, k),
        )
    _fail(f"unknown builtin utility {name!r}")


def _parse_utility(instance: Instance, spec) -> UtilityTable:
    kind = _expect(spec, "kind", str, "utility")
    if kind == "builtin":
        name = _expect(spec, "name", str, "utility")
        params = spec.get("params", {})
        if not isinstance(params, dict):
            _fail("utility: params must be an object")
        return _builtin_utility(instance, name, params)
    if kind != "table":
        _fail(f"utility: unknown kind {kind!r}")
    entries = _expect(spec, "entries", list, "utility")
    table: UtilityTable = {}
    rows: dict[tuple[int, ...], dict[int, float]] = {}
    for entry in entries:
        members = _expect(entry, "set", list, "utility entry")
        indices = []
        for member in members:
            if isinstance(member, str):
                indices.append(instance.element_index(member))
            elif isinstance(member, int):
                indices.append(member)
            else:
                _fail("utility entry: set members must be element names")
        phi_index = _expect(entry, "realization", int, "utility entry")
        value = _expect(entry, "value", (int, float), "utility entry")
        rows.setdefault(subset_key(indices), {})[phi_index] = float(value)
    m = instance.num_realizations
    for size in range(instance.num_elements + 1):
        for subset in itertools.combinations(range(instance.num_elements), size):
            key = subset_key(subset)
            row = rows.get(key)
            if row is None or set(row) != set(range(m)):
                _fail(f"utility table is missing entries for subset {key!r}")
            table[key] = tuple(row[i] for i in range(m))
    return table


def instance_from_dict(data: dict) -> Instance:
    elements = tuple(_expect(data, "elements", list, "instance"))
    states = tuple(_expect(data, "states", list, "instance"))
    if not all(isinstance(x, str) for x in elements + states):
        _fail("instance: elements and states must be strings")
    state_of = {s: i for i, s in enumerate(states)}
    realizations = []
    for row in _expect(data, "realizations", list, "instance"):
        if not isinstance(row, dict) or set(row) != set(elements):
            _fail("instance: each realization must map every element to a state")
        try:
            realizations.append(tuple(state_of[row[e]] for e in elements))
        except KeyError as exc:
            _fail(f"instance: realization uses unknown state {exc.args[0]!r}")
    prior = _expect(data, "prior", list, "instance")
    if not all(isinstance(p, (int, float)) for p in prior):
        _fail("instance: prior must be numeric")
    try:
        instance = Instance(
            elements=elements,
            states=states,
            realizations=tuple(realizations),
            prior=tuple(float(p) for p in prior),
            name=str(data.get("name", "")),
        )
        if "utility" in data and data["utility"] is not None:
            instance = instance.with_utility(
                _parse_utility(instance, data["utility"])
            )
    except ParseError:
        raise
    except (ValueError, KeyError) as exc:
        _fail(f"instance: {exc}")
    return instance


def instance_to_dict(instance: Instance) -> dict:
    data = {
        "elements": list(instance.elements),
        "states": list(instance.states),
        "realizations": [
            {e: instance.states[phi[i]] for i, e in enumerate(instance.elements)}
            for phi in instance.realizations
        ],
        "prior": list(instance.prior),
    }
    if instance.name:
        data["name"] = instance.name
    if instance.utility is not None:
        entries = []
        for key in sorted(instance.utility, key=lambda k: (len(k), k)):
            for i, value in enumerate(instance.utility[key]):
                entries.append(
                    {
                        "set": [instance.elements[e] for e in key],
                        "realization": i,
                        "value": value,
                    }
                )
        data["utility"] = {"kind": "table", "entries": entries}
    return data


# -- policies --------------------------------------------------------------


def policy_from_dict(instance: Instance, data) -> Policy:
    if isinstance(data, dict) and "base" in data:
        base = _tree_from_dict(instance, data["base"])
        tau = _expect(data, "tau", (int, float), "policy")
        rho = _expect(data, "rho", (int, float), "policy")
        return ThresholdSubPolicy(base, float(tau), float(rho))
    return _tree_from_dict(instance, data)


def _tree_from_dict(instance: Instance, data) -> Node:
    if data == "terminal":
        return TERMINAL
    if not isinstance(data, dict) or "select" not in data:
        _fail("policy: node must be \"terminal\" or have a \"select\" field")
    element = _expect(data, "select", str, "policy node")
    children_spec = _expect(data, "children", dict, "policy node")
    if set(children_spec) != set(instance.states):
        _fail(f"policy: children of {element!r} must cover every state")
    try:
        index = instance.element_index(element)
    except KeyError:
        _fail(f"policy: unknown element {element!r}")
    children = tuple(
        _tree_from_dict(instance, children_spec[state])
        for state in instance.states
    )
    return Select(index, children)


def policy_to_dict(instance: Instance, policy: Policy):
    if isinstance(policy, ThresholdSubPolicy):
        return {
            "base": policy_to_dict(instance, policy.base),
            "tau": policy.tau,
            "rho": policy.rho,
        }
    if isinstance(policy, Terminal):
        return "terminal"
    return {
        "select": instance.elements[policy.element],
        "children": {
            state: policy_to_dict(instance, child)
            for state, child in zip(instance.states, policy.children)
        },
    }


# -- hypothesis classes ----------------------------------------------------


def hypotheses_from_dict(data: dict):
    from .learn import HypothesisClass

    examples = _expect(data, "examples", list, "hypotheses")
    labels = _expect(data, "labels", list, "hypotheses")
    prior = _expect(data, "prior", list, "hypotheses")
    try:
        return HypothesisClass(
            examples=tuple(str(x) for x in examples),
            labels=tuple(tuple(str(y) for y in row) for row in labels),
            prior=tuple(float(p) for p in prior),
        )
    except (ValueError, TypeError) as exc:
        _fail(f"hypotheses: {exc}")


def hypotheses_to_dict(hc) -> dict:
    return {
        "examples": list(hc.examples),
        "labels": [list(row) for row in hc.labels],
        "prior": list(hc.prior),
    }


# -- reports ---------------------------------------------------------------


def jsonable(value):
    """Recursively convert dataclasses/tuples to plain JSON values, mapping
    non-finite floats to strings so the output is strict JSON."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            f.name: jsonable(getattr(value, f.name))
            for f in dataclasses.fields(value)
        }
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


# -- files -----------------------------------------------------------------


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        _fail(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        _fail(f"{path} is not valid JSON: {exc}")


def dumps(data) -> str:
    return json.dumps(jsonable(data), indent=2, sort_keys=True) + "\n"


def save(path: str, data) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps(data))


def load_instance(path: str) -> Instance:
    return instance_from_dict(_load_json(path))


def save_instance(path: str, instance: Instance) -> None:
    save(path, instance_to_dict(instance))


def load_policy(path: str, instance: Instance) -> Policy:
    return policy_from_dict(instance, _load_json(path))


def save_policy(path: str, instance: Instance, policy: Policy) -> None:
    save(path, policy_to_dict(instance, policy))


def load_hypotheses(path: str):
    return hypotheses_from_dict(_load_json(path))
