"""Instances, partial realizations, and exact expectation primitives.

An :class:`Instance` is a fully enumerated Bayesian selection problem: a
ground set of elements, a finite state alphabet, an explicit list of
realizations (full element-to-state maps) with prior probabilities, and a
tabular utility defined for every (subset, realization) pair.  Everything
downstream (policies, parameters, oracles, bound checks) is an exact
computation over this table; no sampling is used anywhere.

All operations are pure functions of immutable inputs.  Internal caches are
per-call only, so concurrent use of the same ``Instance`` is safe.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .errors import EmptyVersionSpace, MalformedPolicy

#: Absolute comparison tolerance used throughout the library.
TOL = 1e-9

UtilityTable = dict[tuple[int, ...], tuple[float, ...]]


def subset_key(indices: Iterable[int]) -> tuple[int, ...]:
    """Canonical key for a subset of element indices (sorted, deduplicated)."""
    return tuple(sorted(set(indices)))


@dataclass(frozen=True)
class PartialRealization:
    """An ordered set of (element index, state index) observations.

    The observation order is the selection order of the policy that produced
    it; set-level operations (consistency, conditioning, the utility of the
    domain) depend only on the underlying set.
    """

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        seen = [e for e, _ in self.pairs]
        if len(seen) != len(set(seen)):
            raise MalformedPolicy(f"element observed twice in {self.pairs!r}")

    @property
    def dom(self) -> tuple[int, ...]:
        """Observed element indices, in selection order."""
        return tuple(e for e, _ in self.pairs)

    @property
    def mapping(self) -> dict[int, int]:
        return dict(self.pairs)

    def key(self) -> frozenset[tuple[int, int]]:
        """Order-independent canonical key, suitable for memoization."""
        return frozenset(self.pairs)

    def extended(self, element: int, state: int) -> "PartialRealization":
        return PartialRealization(self.pairs + ((element, state),))

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, element: int) -> bool:
        return any(e == element for e, _ in self.pairs)


#: The empty partial realization (conditioning on nothing).
EMPTY = PartialRealization()


@dataclass(frozen=True)
class ConditionalPrior:
    """Renormalized prior over the realizations consistent with some psi."""

    support: tuple[int, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.support:
            raise EmptyVersionSpace("conditional prior with empty support")
        total = sum(self.weights)
        if abs(total - 1.0) > TOL:
            raise ValueError(f"conditional weights sum to {total}, not 1")

    def items(self) -> Iterator[tuple[int, float]]:
        return zip(self.support, self.weights)


@dataclass(frozen=True)
class Instance:
    """A fully enumerated adaptive selection problem.

    ``realizations[i][e]`` is the state index of element ``e`` under the
    i-th realization.  ``utility[subset_key][i]`` is the utility of selecting
    that subset when realization ``i`` is the truth.  ``utility`` may be
    ``None`` for bare hypothesis-class instances until a table is attached
    with :meth:`with_utility`.

    Zero-probability realizations are allowed in the list (the modified
    prior can lift them later); conditioning under the instance prior
    silently excludes them.
    """

    elements: tuple[str, ...]
    states: tuple[str, ...]
    realizations: tuple[tuple[int, ...], ...]
    prior: tuple[float, ...]
    utility: Optional[UtilityTable] = None
    name: str = ""

    def __post_init__(self) -> None:
        n = len(self.elements)
        if len(set(self.elements)) != n:
            raise ValueError("duplicate element identifiers")
        if len(set(self.states)) != len(self.states):
            raise ValueError("duplicate state identifiers")
        for phi in self.realizations:
            if len(phi) != n:
                raise ValueError("realization arity does not match elements")
            if any(not 0 <= y < len(self.states) for y in phi):
                raise ValueError("realization uses an unknown state index")
        if len(set(self.realizations)) != len(self.realizations):
            raise ValueError("duplicate realization maps")
        if len(self.prior) != len(self.realizations):
            raise ValueError("prior length does not match realization list")
        if any(p < -TOL for p in self.prior):
            raise ValueError("negative prior probability")
        if abs(sum(self.prior) - 1.0) > TOL:
            raise ValueError(f"prior sums to {sum(self.prior)}, not 1")
        if self.utility is not None:
            self._check_utility(self.utility)

    def _check_utility(self, table: UtilityTable) -> None:
        m = len(self.realizations)
        expected = 1 << len(self.elements)
        if len(table) != expected:
            raise ValueError(
                f"utility table has {len(table)} subsets, expected {expected}"
            )
        for key, values in table.items():
            if key != subset_key(key):
                raise ValueError(f"non-canonical subset key {key!r}")
            if len(values) != m:
                raise ValueError("utility row length does not match realizations")
            if any(v < -TOL for v in values):
                raise ValueError(f"negative utility value at {key!r}")

    # -- basic accessors ---------------------------------------------------

    @property
    def num_elements(self) -> int:
        return len(self.elements)

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def num_realizations(self) -> int:
        return len(self.realizations)

    def element_index(self, name: str) -> int:
        try:
            return self.elements.index(name)
        except ValueError:
            raise KeyError(f"unknown element {name!r}") from None

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise KeyError(f"unknown state {name!r}") from None

    def value(self, subset: Iterable[int], phi_index: int) -> float:
        """Utility f(A, phi) for a subset of element indices."""
        if self.utility is None:
            raise ValueError("instance has no utility table attached")
        return self.utility[subset_key(subset)][phi_index]

    def with_utility(self, table: UtilityTable) -> "Instance":
        return Instance(
            self.elements, self.states, self.realizations, tuple(self.prior),
            table, self.name,
        )

    def with_prior(self, prior: Iterable[float]) -> "Instance":
        return Instance(
            self.elements, self.states, self.realizations, tuple(prior),
            self.utility, self.name,
        )

    def consistent(self, phi_index: int, psi: PartialRealization) -> bool:
        phi = self.realizations[phi_index]
        return all(phi[e] == y for e, y in psi.pairs)

    def describe_psi(self, psi: PartialRealization) -> dict[str, str]:
        """Human-readable form of a partial realization, for witnesses."""
        return {self.elements[e]: self.states[y] for e, y in psi.pairs}


# -- conditioning ---------------------------------------------------------


def version_space(instance: Instance, psi: PartialRealization) -> ConditionalPrior:
    """Realizations consistent with ``psi``, with renormalized prior weights.

    Raises :class:`EmptyVersionSpace` if the consistent realizations carry no
    prior mass (conditioning on a measure-zero event).
    """
    support = []
    masses = []
    for i, p in enumerate(instance.prior):
        if p > 0.0 and instance.consistent(i, psi):
            support.append(i)
            masses.append(p)
    total = sum(masses)
    if total <= 0.0:
        raise EmptyVersionSpace(
            f"no positive-probability realization consistent with "
            f"{instance.describe_psi(psi)}"
        )
    return ConditionalPrior(tuple(support), tuple(m / total for m in masses))


def marginal_gain(
    instance: Instance,
    element: int,
    psi: PartialRealization,
    vs: Optional[ConditionalPrior] = None,
) -> float:
    """Expected marginal gain of selecting ``element`` after observing psi.

    Exactly 0 when the element was already observed (set union is
    idempotent).  ``vs`` may carry a precomputed version space for psi.
    """
    if element in psi:
        return 0.0
    if vs is None:
        vs = version_space(instance, psi)
    dom = psi.dom
    before = subset_key(dom)
    after = subset_key(dom + (element,))
    table = instance.utility
    if table is None:
        raise ValueError("instance has no utility table attached")
    row_after = table[after]
    row_before = table[before]
    return sum(w * (row_after[i] - row_before[i]) for i, w in vs.items())


def policy_gain(instance: Instance, policy, psi: PartialRealization) -> float:
    """Expected gain of running ``policy`` from scratch after observing psi.

    The expectation is over realizations consistent with psi and over the
    policy's randomness, computed exactly by tree traversal with branch
    weights.
    """
    from . import policy as policy_mod

    vs = version_space(instance, psi)
    dom = psi.dom
    base = subset_key(dom)
    total = 0.0
    for phi_index, w in vs.items():
        for trace in policy_mod.run(instance, policy, phi_index):
            combined = subset_key(dom + trace.selected)
            gain = instance.value(combined, phi_index) - instance.value(base, phi_index)
            total += w * trace.weight * gain
    return total


def f_avg(instance: Instance, policy) -> float:
    """Expected final utility of a policy under the instance prior."""
    from . import policy as policy_mod

    total = 0.0
    for phi_index, p in enumerate(instance.prior):
        if p <= 0.0:
            continue
        for trace in policy_mod.run(instance, policy, phi_index):
            total += p * trace.weight * instance.value(trace.selected, phi_index)
    return total


def c_avg(instance: Instance, policy) -> float:
    """Expected number of elements a policy selects under the prior."""
    from . import policy as policy_mod

    total = 0.0
    for phi_index, p in enumerate(instance.prior):
        if p <= 0.0:
            continue
        for trace in policy_mod.run(instance, policy, phi_index):
            total += p * trace.weight * len(trace.selected)
    return total


# -- positive-mass partial realizations -----------------------------------


def positive_partial_realizations(
    instance: Instance, max_size: Optional[int] = None
) -> Iterator[PartialRealization]:
    """All partial realizations with positive prior mass, as canonical
    (sorted-domain) observation tuples.

    Enumerates, for every subset of elements up to ``max_size``, the
    observation patterns realized by at least one positive-probability
    realization.
    """
    n = instance.num_elements
    limit = n if max_size is None else min(max_size, n)
    positive = [
        phi for phi, p in zip(instance.realizations, instance.prior) if p > 0.0
    ]
    for size in range(limit + 1):
        for dom in itertools.combinations(range(n), size):
            patterns = {tuple(phi[e] for e in dom) for phi in positive}
            for pattern in sorted(patterns):
                yield PartialRealization(tuple(zip(dom, pattern)))


# -- structural checks ----------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a quantified property check, with a witness on failure."""

    ok: bool
    witness: Optional[dict] = field(default=None)

    def __bool__(self) -> bool:
        return self.ok


def check_adaptive_monotone(instance: Instance, tol: float = TOL) -> CheckResult:
    """True iff every expected marginal gain is non-negative (within tol)."""
    for psi in positive_partial_realizations(instance):
        vs = version_space(instance, psi)
        for v in range(instance.num_elements):
            if v in psi:
                continue
            gain = marginal_gain(instance, v, psi, vs)
            if gain < -tol:
                return CheckResult(
                    False,
                    {
                        "psi": instance.describe_psi(psi),
                        "element": instance.elements[v],
                        "gain": gain,
                    },
                )
    return CheckResult(True)


def check_adaptive_submodular(instance: Instance, tol: float = TOL) -> CheckResult:
    """True iff gains never increase as observations accumulate.

    The full quantifier over pairs psi subseteq psi' is checked, not just
    single-step extensions.
    """
    nodes = list(positive_partial_realizations(instance))
    gains: dict[frozenset, dict[int, float]] = {}
    for psi in nodes:
        vs = version_space(instance, psi)
        gains[psi.key()] = {
            v: marginal_gain(instance, v, psi, vs)
            for v in range(instance.num_elements)
            if v not in psi
        }
    for psi_big in nodes:
        big_key = psi_big.key()
        big_gains = gains[big_key]
        for r in range(len(psi_big.pairs) + 1):
            for sub in itertools.combinations(psi_big.pairs, r):
                sub_key = frozenset(sub)
                if sub_key == big_key:
                    continue
                small_gains = gains[sub_key]
                for v, late in big_gains.items():
                    if small_gains[v] < late - tol:
                        small = PartialRealization(sub)
                        return CheckResult(
                            False,
                            {
                                "psi": instance.describe_psi(small),
                                "psi_prime": instance.describe_psi(psi_big),
                                "element": instance.elements[v],
                                "gain_early": small_gains[v],
                                "gain_late": late,
                            },
                        )
    return CheckResult(True)
