"""Bayesian active learning: coverage utility, modified prior, GBS.

A hypothesis class maps directly onto an instance: examples are the ground
elements, labels are the states, and each hypothesis row is a realization.
The coverage utility rewards shrinking the version space, reaching its
maximum of 1 exactly when the true hypothesis is identified.  The modified
prior floors every probability at 1 / |Phi|^2 (then renormalizes), which is
what removes the dependence on the smallest prior probability from the
coverage guarantees.  Generalized binary search is the greedy policy for
the coverage utility built on the modified prior.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import Instance, TOL, UtilityTable, subset_key
from .errors import DuplicateHypothesis
from .policy import Node, build_greedy


@dataclass(frozen=True)
class HypothesisClass:
    """A finite hypothesis class: labels[h][x] is the label hypothesis h
    assigns to example x."""

    examples: tuple[str, ...]
    labels: tuple[tuple[str, ...], ...]
    prior: tuple[float, ...]

    def __post_init__(self) -> None:
        for row in self.labels:
            if len(row) != len(self.examples):
                raise ValueError("label row length does not match examples")
        if len(set(self.labels)) != len(self.labels):
            raise DuplicateHypothesis("two hypotheses assign identical labels")
        if len(self.prior) != len(self.labels):
            raise ValueError("prior length does not match hypotheses")
        if abs(sum(self.prior) - 1.0) > TOL:
            raise ValueError(f"prior sums to {sum(self.prior)}, not 1")


def instance_from_hypotheses(hc: HypothesisClass) -> Instance:
    """The bare instance of a hypothesis class; no utility attached yet
    (attach a coverage utility under the plain or modified prior)."""
    states = tuple(sorted({label for row in hc.labels for label in row}))
    state_of = {s: i for i, s in enumerate(states)}
    realizations = tuple(
        tuple(state_of[label] for label in row) for row in hc.labels
    )
    return Instance(
        elements=tuple(hc.examples),
        states=states,
        realizations=realizations,
        prior=tuple(hc.prior),
    )


def coverage_utility(
    instance: Instance, prior: Optional[Sequence[float]] = None
) -> UtilityTable:
    """Tabulate f_p(A, phi) = 1 - p(version space of phi restricted to A)
    + p(phi) for every subset and every realization.

    The value is 1 exactly when observing A under phi identifies phi.
    Zero-probability realizations get rows too; their version-space mass
    simply never includes them.
    """
    p = tuple(instance.prior if prior is None else prior)
    realizations = instance.realizations
    m = len(realizations)
    table: UtilityTable = {}
    for size in range(instance.num_elements + 1):
        for subset in itertools.combinations(range(instance.num_elements), size):
            key = subset_key(subset)
            row = []
            for i in range(m):
                phi = realizations[i]
                mass = sum(
                    p[j]
                    for j in range(m)
                    if all(realizations[j][e] == phi[e] for e in subset)
                )
                row.append(1.0 - mass + p[i])
            table[key] = tuple(row)
    return table


def modified_prior(prior: Sequence[float]) -> tuple[float, ...]:
    """Floor every probability at 1/|Phi|^2 and renormalize.

    The normalizer Z lies in [1, 1 + 1/|Phi|], so every output probability
    is at least 1 / (2 |Phi|^2).
    """
    m = len(prior)
    if m < 1:
        raise ValueError("empty realization list")
    floor = 1.0 / (m * m)
    lifted = [max(p, floor) for p in prior]
    z = sum(lifted)
    return tuple(p / z for p in lifted)


def coverage_instance(instance: Instance, modified: bool = False) -> Instance:
    """The instance re-equipped with a coverage utility.

    With ``modified=True`` both the prior and the utility use the modified
    prior, which is the configuration GBS is built on.
    """
    prior = modified_prior(instance.prior) if modified else instance.prior
    out = instance if not modified else instance.with_prior(prior)
    return out.with_utility(coverage_utility(instance, prior))


def gbs_policy(instance: Instance) -> Node:
    """Generalized binary search: the greedy policy of an instance carrying
    a coverage utility.

    The caller attaches the utility (normally via
    ``coverage_instance(inst, modified=True)``); the greedy threshold-0
    stop then runs every positive-mass branch down to a singleton version
    space.
    """
    if instance.utility is None:
        raise ValueError(
            "attach a coverage utility first (see coverage_instance)"
        )
    return build_greedy(instance)
