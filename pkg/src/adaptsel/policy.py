"""Policy trees, greedy construction, and threshold/tie-break sub-policies.

A deterministic policy is a tree whose internal nodes select an element and
branch on its observed state.  The randomized form used by the gain-ratio
machinery is a :class:`ThresholdSubPolicy` (base tree, threshold tau,
tie-break probability rho): a single coin is drawn at the start of a run;
with probability rho the run terminates as soon as every remaining element
has expected marginal gain strictly below tau, and with probability 1 - rho
as soon as every remaining gain is at most tau.  Run-level (not
per-decision) randomization is what makes the average cost of the mixture
exactly the two-point interpolation used by the threshold-pair construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .core import (
    EMPTY,
    TOL,
    Instance,
    PartialRealization,
    c_avg,
    subset_key,
)
from .errors import BudgetExceedsCost, MalformedPolicy

#: Gains at or below this are treated as "no remaining value" by the greedy
#: builder's threshold-0 stopping rule.
GREEDY_STOP = 1e-12


@dataclass(frozen=True)
class Terminal:
    """Leaf node: the policy stops."""


@dataclass(frozen=True)
class Select:
    """Internal node: select ``element`` and branch on its observed state.

    ``children`` has one subtree per state index, covering every state.
    """

    element: int
    children: tuple["Node", ...]


Node = Union[Terminal, Select]
Policy = Union[Terminal, Select, "ThresholdSubPolicy"]

TERMINAL = Terminal()

#: The policy that terminates before selecting any element.
IMMEDIATE = TERMINAL


@dataclass(frozen=True)
class ThresholdSubPolicy:
    base: Node
    tau: float
    rho: float

    def __post_init__(self) -> None:
        if self.tau < -TOL:
            raise MalformedPolicy(f"negative threshold {self.tau}")
        if not -TOL <= self.rho <= 1.0 + TOL:
            raise MalformedPolicy(f"tie-break probability {self.rho} outside [0,1]")


def threshold_subpolicy(base: Node, tau: float, rho: float) -> ThresholdSubPolicy:
    return ThresholdSubPolicy(base, tau, rho)


@dataclass(frozen=True)
class RunTrace:
    """One randomness branch of a policy run on a fixed realization."""

    selected: tuple[int, ...]
    observed: PartialRealization
    weight: float


# -- structural helpers ----------------------------------------------------


def tree_height(node: Node) -> int:
    """Maximal number of selections on any root-to-leaf path."""
    if isinstance(node, Terminal):
        return 0
    return 1 + max(tree_height(child) for child in node.children)


def validate_policy(instance: Instance, policy: Policy) -> None:
    """Raise :class:`MalformedPolicy` on structural violations."""
    if isinstance(policy, ThresholdSubPolicy):
        validate_policy(instance, policy.base)
        return

    def walk(node: Node, path: frozenset[int]) -> None:
        if isinstance(node, Terminal):
            return
        if not 0 <= node.element < instance.num_elements:
            raise MalformedPolicy(f"element index {node.element} outside ground set")
        if node.element in path:
            raise MalformedPolicy(
                f"element {instance.elements[node.element]!r} repeats on a path"
            )
        if len(node.children) != instance.num_states:
            raise MalformedPolicy("children do not cover every state")
        for child in node.children:
            walk(child, path | {node.element})

    walk(policy, frozenset())


def chain_policy(instance: Instance, element_indices: list[int]) -> Node:
    """A fixed-order chain that selects the given elements regardless of
    observed states."""
    node: Node = TERMINAL
    for e in reversed(element_indices):
        node = Select(e, (node,) * instance.num_states)
    validate_policy(instance, node)
    return node


# -- reachability ----------------------------------------------------------

Support = list[tuple[int, float]]


def _full_support(instance: Instance) -> Support:
    total = sum(p for p in instance.prior if p > 0.0)
    return [(i, p / total) for i, p in enumerate(instance.prior) if p > 0.0]


def _split_support(
    instance: Instance, support: Support, element: int
) -> dict[int, Support]:
    """Partition a support by the observed state of ``element`` and
    renormalize each part."""
    parts: dict[int, list[tuple[int, float]]] = {}
    for phi_index, w in support:
        y = instance.realizations[phi_index][element]
        parts.setdefault(y, []).append((phi_index, w))
    out = {}
    for y, entries in parts.items():
        total = sum(w for _, w in entries)
        out[y] = [(i, w / total) for i, w in entries]
    return out


def _gains(
    instance: Instance, psi: PartialRealization, support: Support
) -> dict[int, float]:
    """Expected marginal gain of every unobserved element given a support."""
    table = instance.utility
    if table is None:
        raise ValueError("instance has no utility table attached")
    dom = psi.dom
    before = table[subset_key(dom)]
    gains = {}
    for v in range(instance.num_elements):
        if v in psi:
            continue
        after = table[subset_key(dom + (v,))]
        gains[v] = sum(w * (after[i] - before[i]) for i, w in support)
    return gains


def reachable_nodes(
    instance: Instance, tree: Node
) -> Iterator[tuple[PartialRealization, Support, Node]]:
    """Positive-mass nodes of a deterministic tree, root first.

    Yields (observations so far, renormalized consistent support, node);
    includes terminal nodes.
    """
    stack = [(EMPTY, _full_support(instance), tree)]
    while stack:
        psi, support, node = stack.pop()
        yield psi, support, node
        if isinstance(node, Terminal):
            continue
        if node.element in psi:
            raise MalformedPolicy(
                f"element {instance.elements[node.element]!r} re-selected"
            )
        for y, part in _split_support(instance, support, node.element).items():
            stack.append((psi.extended(node.element, y), part, node.children[y]))


# -- running policies ------------------------------------------------------


def _run_tree(instance: Instance, tree: Node, phi_index: int) -> RunTrace:
    phi = instance.realizations[phi_index]
    psi = EMPTY
    node = tree
    while isinstance(node, Select):
        if not 0 <= node.element < instance.num_elements:
            raise MalformedPolicy(f"element index {node.element} outside ground set")
        if node.element in psi:
            raise MalformedPolicy(
                f"element {instance.elements[node.element]!r} re-selected"
            )
        y = phi[node.element]
        psi = psi.extended(node.element, y)
        node = node.children[y]
    return RunTrace(psi.dom, psi, 1.0)


def cut_tree(
    instance: Instance, base: Node, tau: float, strict: bool, tol: float = TOL
) -> Node:
    """The deterministic tree obtained by terminating ``base`` at threshold
    ``tau`` under one coin outcome.

    ``strict=True`` stops where every remaining gain is strictly below tau
    (within tolerance); ``strict=False`` stops where every remaining gain is
    at most tau.  Branches with zero prior mass are cut to terminals, since
    no gain is defined there and no expectation ever reaches them.
    """

    def build(node: Node, psi: PartialRealization, support: Support) -> Node:
        if isinstance(node, Terminal):
            return TERMINAL
        gains = _gains(instance, psi, support)
        gmax = max(gains.values()) if gains else 0.0
        stop = gmax < tau - tol if strict else gmax <= tau + tol
        if stop:
            return TERMINAL
        parts = _split_support(instance, support, node.element)
        children = tuple(
            build(node.children[y], psi.extended(node.element, y), parts[y])
            if y in parts
            else TERMINAL
            for y in range(instance.num_states)
        )
        return Select(node.element, children)

    return build(base, EMPTY, _full_support(instance))


def components(
    instance: Instance, policy: Policy, tol: float = TOL
) -> list[tuple[float, Node]]:
    """A policy as a finite mixture of deterministic trees.

    Deterministic trees are their own single component; a threshold
    sub-policy yields its strict-rule cut with weight rho and its at-most
    rule cut with weight 1 - rho (zero-weight components are dropped).
    """
    if isinstance(policy, ThresholdSubPolicy):
        out = []
        if policy.rho > 0.0:
            out.append((policy.rho, cut_tree(instance, policy.base, policy.tau, True, tol)))
        if policy.rho < 1.0:
            out.append(
                (1.0 - policy.rho, cut_tree(instance, policy.base, policy.tau, False, tol))
            )
        return out
    return [(1.0, policy)]


def materialize(instance: Instance, policy: Policy, tol: float = TOL) -> Node:
    """Flatten a policy to a single deterministic tree.

    Only defined for deterministic trees and threshold sub-policies whose
    coin is degenerate (rho 0 or 1); a proper mixture has no tree form.
    """
    comps = components(instance, policy, tol)
    if len(comps) != 1:
        raise MalformedPolicy(
            "policy with tie-break probability strictly inside (0,1) has no "
            "deterministic tree form"
        )
    return comps[0][1]


def run(instance: Instance, policy: Policy, phi_index: int) -> list[RunTrace]:
    """Enumerate all randomness branches of one run, with branch weights.

    Deterministic trees give exactly one trace of weight 1; threshold
    sub-policies give at most two, one per coin outcome, merged when the
    outcomes coincide.
    """
    if not 0 <= phi_index < instance.num_realizations:
        raise ValueError(f"realization index {phi_index} out of range")
    traces: dict[tuple[int, ...], RunTrace] = {}
    for weight, tree in components(instance, policy):
        trace = _run_tree(instance, tree, phi_index)
        prev = traces.get(trace.selected)
        if prev is None:
            traces[trace.selected] = RunTrace(trace.selected, trace.observed, weight)
        else:
            traces[trace.selected] = RunTrace(
                prev.selected, prev.observed, prev.weight + weight
            )
    return list(traces.values())


def canonical_traces(
    instance: Instance, policy: Policy
) -> dict[int, tuple[tuple[tuple[int, ...], float], ...]]:
    """Per-realization trace sets in a canonical order, for comparing whether
    two policies behave identically."""
    out = {}
    for phi_index, p in enumerate(instance.prior):
        if p <= 0.0:
            continue
        merged = sorted(
            (t.selected, round(t.weight, 9))
            for t in run(instance, policy, phi_index)
            if round(t.weight, 9) > 0.0
        )
        out[phi_index] = tuple(merged)
    return out


def policy_height(instance: Instance, policy: Policy) -> int:
    """Maximal number of selections over realizations and random bits."""
    if isinstance(policy, ThresholdSubPolicy):
        return max(tree_height(tree) for _, tree in components(instance, policy))
    return tree_height(policy)


# -- annotated trees (shared gain computations) ----------------------------


@dataclass(frozen=True)
class AnnotatedNode:
    """A positive-mass node of a deterministic tree with its expected
    marginal gains precomputed, so repeated threshold cuts of the same base
    tree do not recompute expectations."""

    psi: PartialRealization
    mass: float  # probability of reaching this node under the prior
    gains: dict[int, float]
    gmax: float
    element: Optional[int]  # None at termination nodes
    children: tuple["AnnotatedNode", ...]


def annotate_tree(instance: Instance, tree: Node) -> AnnotatedNode:
    """Precompute reach probabilities and gain tables for every
    positive-mass node of a deterministic tree."""

    def build(node: Node, psi: PartialRealization, support: Support,
              mass: float) -> AnnotatedNode:
        gains = _gains(instance, psi, support)
        gmax = max(gains.values(), default=0.0)
        if isinstance(node, Terminal):
            return AnnotatedNode(psi, mass, gains, gmax, None, ())
        outcome_mass: dict[int, float] = {}
        for phi_index, w in support:
            y = instance.realizations[phi_index][node.element]
            outcome_mass[y] = outcome_mass.get(y, 0.0) + w
        parts = _split_support(instance, support, node.element)
        children = tuple(
            build(
                node.children[y],
                psi.extended(node.element, y),
                part,
                mass * outcome_mass[y],
            )
            for y, part in sorted(parts.items())
        )
        return AnnotatedNode(
            psi, mass, gains, gmax, node.element, children
        )

    return build(tree, EMPTY, _full_support(instance), 1.0)


def cut_stats(
    annot: AnnotatedNode, tau: float, strict: bool, tol: float = TOL
) -> tuple[float, float, float]:
    """(average cost, max termination-frontier gain, min selected gain) of
    the threshold-``tau`` cut of an annotated tree under one coin outcome.

    The frontier maximum over an empty remaining set is 0; the selection
    minimum over an empty selection set is +inf (the caller converts).
    """
    mu = 0.0
    delta_u = 0.0
    delta_l = math.inf

    def walk(node: AnnotatedNode) -> None:
        nonlocal mu, delta_u, delta_l
        stop = node.element is None or (
            node.gmax < tau - tol if strict else node.gmax <= tau + tol
        )
        if stop:
            delta_u = max(delta_u, node.gmax, 0.0)
            return
        mu += node.mass
        delta_l = min(delta_l, node.gains[node.element])
        for child in node.children:
            walk(child)

    walk(annot)
    return mu, delta_u, delta_l


# -- greedy construction ---------------------------------------------------


def build_greedy(instance: Instance, tol: float = TOL) -> Node:
    """The lexicographic-tie-break greedy tree, run to the threshold-0 stop.

    At every reachable positive-mass node the selected element attains the
    maximal expected marginal gain (within tolerance); construction stops
    once no remaining element has positive gain.
    """

    def build(psi: PartialRealization, support: Support) -> Node:
        gains = _gains(instance, psi, support)
        if not gains:
            return TERMINAL
        gmax = max(gains.values())
        if gmax <= GREEDY_STOP:
            return TERMINAL
        element = min(v for v, g in gains.items() if g >= gmax - tol)
        parts = _split_support(instance, support, element)
        children = tuple(
            build(psi.extended(element, y), parts[y]) if y in parts else TERMINAL
            for y in range(instance.num_states)
        )
        return Select(element, children)

    return build(EMPTY, _full_support(instance))


# -- threshold pairs (existence/uniqueness construction) -------------------


def achievable_gains(instance: Instance, tree: Node) -> list[float]:
    """All expected marginal gains of remaining elements at reachable
    positive-mass nodes of a deterministic tree."""
    values = []
    for psi, support, _node in reachable_nodes(instance, tree):
        values.extend(_gains(instance, psi, support).values())
    return values


def _gain_classes(values: list[float], tol: float) -> list[float]:
    """Distinct gain values grouped at tolerance; class maxima, descending."""
    reps: list[float] = []
    for value in sorted(values, reverse=True):
        if not reps or value < reps[-1] - tol:
            reps.append(value)
    return reps


def find_threshold_pair(
    instance: Instance, policy: Policy, i: int, tol: float = TOL
) -> tuple[float, float, ThresholdSubPolicy]:
    """The canonical (tau_i, rho_i) whose sub-policy has average cost i.

    Follows the constructive existence proof: candidate thresholds are the
    achievable gain values (grouped at tolerance) plus a sentinel above the
    maximum; mu(tau) is the cost of the strict-rule cut; the pair
    interpolates between the two adjacent threshold classes.  Any other
    valid pair induces the same policy, which the test suite checks
    directly on run traces.
    """
    if i != int(i) or i < 0:
        raise ValueError(f"budget must be a non-negative integer, got {i!r}")
    i = int(i)
    base = policy.base if isinstance(policy, ThresholdSubPolicy) else policy
    validate_policy(instance, base)
    total_cost = c_avg(instance, policy)
    if i > total_cost + tol:
        raise BudgetExceedsCost(
            f"budget {i} exceeds the policy's average cost {total_cost}"
        )
    values = achievable_gains(instance, base)
    sentinel = (max(values) if values else 0.0) + 1.0
    if i == 0:
        return sentinel, 0.0, ThresholdSubPolicy(base, sentinel, 0.0)

    reps = _gain_classes(values, tol)
    # Deduplicate threshold classes by their mu value; mu is non-decreasing
    # as the threshold decreases.
    taus = [sentinel]
    mus = [0.0]
    for rep in reps:
        mu = c_avg(instance, ThresholdSubPolicy(base, rep, 1.0))
        if mu > mus[-1] + tol:
            taus.append(rep)
            mus.append(mu)
    for j in range(1, len(taus)):
        if i <= mus[j] + tol:
            # Snap to the pure strict rule when the budget sits on the class
            # boundary, so float noise cannot leave a vanishing-weight
            # non-strict component behind.
            if mus[j] - i <= tol:
                rho = 1.0
            else:
                rho = (i - mus[j - 1]) / (mus[j] - mus[j - 1])
                rho = min(1.0, max(0.0, rho))
            return taus[j], rho, ThresholdSubPolicy(base, taus[j], rho)
    raise BudgetExceedsCost(
        f"budget {i} exceeds the policy's average cost {mus[-1]}"
    )


def sub_policy_at_cost(
    instance: Instance, policy: Policy, i: int, tol: float = TOL
) -> Policy:
    """pi_i: the canonical sub-policy with average cost i (pi_0 terminates
    immediately)."""
    if i == 0:
        return IMMEDIATE
    return find_threshold_pair(instance, policy, i, tol)[2]


# -- concatenation ---------------------------------------------------------


def concat(instance: Instance, first: Policy, second: Policy) -> Node:
    """first@second: run ``first``, then ``second`` from its own root.

    The second policy ignores what the first observed except that selecting
    an already-selected element is skipped as a no-op, preserving
    E(first@second, phi) = E(first, phi) union E(second, phi).  Both
    arguments must have a deterministic tree form.
    """
    tree_a = materialize(instance, first)
    tree_b = materialize(instance, second)

    def skipped(node: Node, observed: dict[int, int]) -> Node:
        if isinstance(node, Terminal):
            return TERMINAL
        if node.element in observed:
            return skipped(node.children[observed[node.element]], observed)
        children = tuple(
            skipped(node.children[y], {**observed, node.element: y})
            for y in range(instance.num_states)
        )
        return Select(node.element, children)

    def append(node: Node, observed: dict[int, int]) -> Node:
        if isinstance(node, Terminal):
            return skipped(tree_b, observed)
        children = tuple(
            append(node.children[y], {**observed, node.element: y})
            for y in range(instance.num_states)
        )
        return Select(node.element, children)

    result = append(tree_a, {})
    validate_policy(instance, result)
    return result
