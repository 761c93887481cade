"""Shared fixtures: witness instances, hypothesis classes, and the seeded
random corpus helpers used by the property suites."""

import pytest

import adaptsel as a


@pytest.fixture
def thm5():
    """Greedy chain with gain ratio 0.5 on 3 elements."""
    return a.gen_theorem5(3, 0.5)


@pytest.fixture
def thm4():
    """2-approximate-greedy chain with gain ratio 1 on 3 elements."""
    return a.gen_theorem4(3)


@pytest.fixture
def demo_hypotheses():
    """Three threshold functions on two points, uniform prior."""
    return a.HypothesisClass(
        examples=("x1", "x2"),
        labels=(("0", "0"), ("0", "1"), ("1", "1")),
        prior=(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
    )


@pytest.fixture
def two_feature_hypotheses():
    """Four hypotheses in bijection with {0,1}^2 over two binary features."""
    return a.HypothesisClass(
        examples=("x1", "x2"),
        labels=(("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")),
        prior=(0.25, 0.25, 0.25, 0.25),
    )


def corpus_instance(seed, num_elements=None, monotone=True):
    """One member of the seeded random corpus (|V| in 2..4, |Y| = 2)."""
    if num_elements is None:
        num_elements = 2 + seed % 3
    return a.gen_random(num_elements, 2, seed, monotone=monotone)


def coverage_demo(hc):
    """Bare instance plus its coverage-utility forms (plain and modified)."""
    bare = a.instance_from_hypotheses(hc)
    return (
        bare,
        a.coverage_instance(bare, modified=False),
        a.coverage_instance(bare, modified=True),
    )
