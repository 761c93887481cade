"""Core primitives: instances, conditioning, gains, exact expectations."""

import itertools

import pytest

import adaptsel as a
from conftest import corpus_instance

TOL = 1e-9


def brute_force_marginal_gain(instance, element, psi):
    """Independent oracle: compute the gain directly from the prior, without
    the library's version-space machinery."""
    total = 0.0
    mass = 0.0
    for i, p in enumerate(instance.prior):
        if p <= 0.0:
            continue
        if any(instance.realizations[i][e] != y for e, y in psi.pairs):
            continue
        before = instance.value(psi.dom, i)
        after = instance.value(psi.dom + (element,), i)
        total += p * (after - before)
        mass += p
    return total / mass


def test_subset_key_canonicalizes():
    assert a.subset_key([2, 0, 1]) == (0, 1, 2)
    assert a.subset_key([1, 1, 0]) == (0, 1)
    assert a.subset_key([]) == ()


def test_version_space_weights_sum_to_one():
    for seed in range(10):
        instance = corpus_instance(seed)
        for psi in a.positive_partial_realizations(instance):
            vs = a.version_space(instance, psi)
            assert abs(sum(vs.weights) - 1.0) <= TOL


def test_version_space_empty_raises():
    instance = corpus_instance(0)
    # Force a zero-mass observation by zeroing out all realizations with
    # state 1 at element 0.
    prior = tuple(
        0.0 if phi[0] == 1 else p
        for phi, p in zip(instance.realizations, instance.prior)
    )
    total = sum(prior)
    instance = instance.with_prior(tuple(p / total for p in prior))
    with pytest.raises(a.EmptyVersionSpace):
        a.version_space(instance, a.PartialRealization(((0, 1),)))


def test_marginal_gain_matches_brute_force():
    for seed in range(15):
        instance = corpus_instance(seed)
        for psi in a.positive_partial_realizations(instance):
            for v in range(instance.num_elements):
                if v in psi:
                    continue
                expected = brute_force_marginal_gain(instance, v, psi)
                assert abs(a.marginal_gain(instance, v, psi) - expected) <= TOL


def test_marginal_gain_of_observed_element_is_zero():
    instance = corpus_instance(3)
    psi = a.PartialRealization(((0, instance.realizations[0][0]),))
    assert a.marginal_gain(instance, 0, psi) == 0.0


def test_policy_gain_from_empty_equals_f_avg_shift():
    for seed in range(10):
        instance = corpus_instance(seed)
        policy = a.build_greedy(instance)
        base = sum(
            p * instance.value((), i)
            for i, p in enumerate(instance.prior)
            if p > 0.0
        )
        gain = a.policy_gain(instance, policy, a.EMPTY)
        assert abs(gain - (a.f_avg(instance, policy) - base)) <= TOL


def test_f_avg_c_avg_affine_in_mixture_weight():
    instance, chain = a.gen_theorem5(3, 0.5)
    tau = 0.25
    strict = a.threshold_subpolicy(chain, tau, 1.0)
    weak = a.threshold_subpolicy(chain, tau, 0.0)
    for rho in (0.0, 0.3, 0.5, 0.8, 1.0):
        mixed = a.threshold_subpolicy(chain, tau, rho)
        for measure in (a.f_avg, a.c_avg):
            blended = (1 - rho) * measure(instance, weak) + rho * measure(
                instance, strict
            )
            assert abs(measure(instance, mixed) - blended) <= TOL


def test_monotone_corpus_passes_monotone_check():
    for seed in range(15):
        instance = corpus_instance(seed, monotone=True)
        assert a.check_adaptive_monotone(instance).ok


def test_non_monotone_instance_fails_with_witness():
    found = False
    for seed in range(30):
        instance = corpus_instance(seed, monotone=False)
        result = a.check_adaptive_monotone(instance)
        if not result.ok:
            assert result.witness is not None
            assert result.witness["gain"] < -TOL
            found = True
            break
    assert found, "no non-monotone draw in 30 seeds"


def test_submodular_check_accepts_theorem5(thm5):
    instance, _ = thm5
    assert a.check_adaptive_submodular(instance).ok


def test_submodular_check_rejects_theorem4_with_witness(thm4):
    instance, _ = thm4
    result = a.check_adaptive_submodular(instance)
    assert not result.ok
    witness = result.witness
    assert witness["psi"] == {}
    assert set(witness["psi_prime"]) == {"v1"}
    assert witness["element"] == "v3"
    assert abs(witness["gain_early"] - 1.0 / 3.0) <= TOL
    assert abs(witness["gain_late"] - 2.0 / 3.0) <= TOL


def test_instance_validation_rejects_bad_priors():
    base = corpus_instance(0)
    with pytest.raises(ValueError):
        base.with_prior((0.5,) * base.num_realizations)
    with pytest.raises(ValueError):
        a.Instance(
            elements=("v1",),
            states=("0", "1"),
            realizations=((0,), (0,)),
            prior=(0.5, 0.5),
        )


def test_instance_validation_rejects_bad_utility():
    base = corpus_instance(0)
    incomplete = dict(base.utility)
    incomplete.pop(())
    with pytest.raises(ValueError):
        base.with_utility(incomplete)
    negative = dict(base.utility)
    negative[()] = tuple(-1.0 for _ in range(base.num_realizations))
    with pytest.raises(ValueError):
        base.with_utility(negative)


def test_positive_partial_realizations_cover_all_observable_patterns():
    instance = corpus_instance(1)
    nodes = list(a.positive_partial_realizations(instance, max_size=2))
    keys = {psi.key() for psi in nodes}
    assert len(keys) == len(nodes)
    # Every 2-subset pattern of every positive realization must appear.
    for i, p in enumerate(instance.prior):
        if p <= 0.0:
            continue
        phi = instance.realizations[i]
        for dom in itertools.combinations(range(instance.num_elements), 2):
            key = frozenset((e, phi[e]) for e in dom)
            assert key in keys
