"""Active learning: coverage utility, modified prior, GBS."""

import pytest

import adaptsel as a
from conftest import coverage_demo

TOL = 1e-9


def test_coverage_utility_empty_set_is_prior_mass(demo_hypotheses):
    bare = a.instance_from_hypotheses(demo_hypotheses)
    table = a.coverage_utility(bare)
    for i, p in enumerate(bare.prior):
        assert abs(table[()][i] - p) <= TOL


def test_coverage_utility_identification_reaches_one(demo_hypotheses):
    bare = a.instance_from_hypotheses(demo_hypotheses)
    table = a.coverage_utility(bare)
    full = a.subset_key(range(bare.num_elements))
    for i in range(bare.num_realizations):
        assert abs(table[full][i] - 1.0) <= TOL


def test_coverage_utility_two_hypotheses_separated_by_one_example():
    hc = a.HypothesisClass(("x1",), (("0",), ("1",)), (0.5, 0.5))
    bare = a.instance_from_hypotheses(hc)
    table = a.coverage_utility(bare)
    assert abs(table[(0,)][0] - 1.0) <= TOL
    assert abs(table[(0,)][1] - 1.0) <= TOL


def test_coverage_utility_values_in_unit_interval(two_feature_hypotheses):
    bare = a.instance_from_hypotheses(two_feature_hypotheses)
    table = a.coverage_utility(bare)
    for row in table.values():
        for value in row:
            assert -TOL <= value <= 1.0 + TOL


def test_coverage_utility_is_monotone_and_submodular(demo_hypotheses,
                                                     two_feature_hypotheses):
    for hc in (demo_hypotheses, two_feature_hypotheses):
        _, cov_plain, cov_mod = coverage_demo(hc)
        for instance in (cov_plain, cov_mod):
            assert a.check_adaptive_monotone(instance).ok
            assert a.check_adaptive_submodular(instance).ok


def test_modified_prior_uniform_is_unchanged():
    prior = (0.25, 0.25, 0.25, 0.25)
    assert a.modified_prior(prior) == prior


def test_modified_prior_two_point_closed_form():
    lifted = a.modified_prior((0.9, 0.1))
    assert abs(lifted[0] - 0.9 / 1.15) <= TOL
    assert abs(lifted[1] - 0.25 / 1.15) <= TOL


def test_modified_prior_lifts_zero_mass_and_bounds():
    prior = (0.7, 0.3, 0.0, 0.0)
    m = len(prior)
    lifted = a.modified_prior(prior)
    z = sum(max(p, 1.0 / (m * m)) for p in prior)
    assert 1.0 <= z <= 1.0 + 1.0 / m
    assert min(lifted) >= 1.0 / (2 * m * m) - TOL
    assert abs(sum(lifted) - 1.0) <= TOL
    assert lifted[2] > 0.0


def test_instance_from_hypotheses_shape(demo_hypotheses):
    bare = a.instance_from_hypotheses(demo_hypotheses)
    assert bare.elements == ("x1", "x2")
    assert bare.states == ("0", "1")
    assert bare.num_realizations == 3
    assert bare.utility is None


def test_duplicate_hypotheses_rejected():
    with pytest.raises(a.DuplicateHypothesis):
        a.HypothesisClass(
            ("x1",), (("0",), ("0",)), (0.5, 0.5)
        )


def test_gbs_demo_root_and_cost(demo_hypotheses):
    _, cov_plain, cov_mod = coverage_demo(demo_hypotheses)
    gbs = a.gbs_policy(cov_mod)
    assert cov_mod.elements[gbs.element] == "x1"
    assert abs(a.c_avg(cov_plain, gbs) - 5.0 / 3.0) <= TOL


def test_gbs_single_hypothesis_is_immediate():
    hc = a.HypothesisClass(("x1",), (("0",),), (1.0,))
    _, _, cov_mod = coverage_demo(hc)
    assert a.gbs_policy(cov_mod) == a.TERMINAL


def test_gbs_two_hypotheses_single_query():
    hc = a.HypothesisClass(("x1",), (("0",), ("1",)), (0.5, 0.5))
    _, cov_plain, cov_mod = coverage_demo(hc)
    gbs = a.gbs_policy(cov_mod)
    assert abs(a.c_avg(cov_plain, gbs) - 1.0) <= TOL


def test_gbs_requires_attached_utility(demo_hypotheses):
    bare = a.instance_from_hypotheses(demo_hypotheses)
    with pytest.raises(ValueError):
        a.gbs_policy(bare)


def test_gbs_identifies_on_every_modified_prior_branch(two_feature_hypotheses):
    bare, _, cov_mod = coverage_demo(two_feature_hypotheses)
    gbs = a.gbs_policy(cov_mod)
    for phi_index in range(cov_mod.num_realizations):
        for trace in a.run(cov_mod, gbs, phi_index):
            assert abs(cov_mod.value(trace.selected, phi_index) - 1.0) <= TOL


def test_cost_relations_between_priors(demo_hypotheses, two_feature_hypotheses):
    for hc in (demo_hypotheses, two_feature_hypotheses):
        bare, cov_plain, cov_mod = coverage_demo(hc)
        m = bare.num_realizations
        gbs = a.gbs_policy(cov_mod)
        opt, _ = a.optimal_coverage(cov_plain)
        for policy in (gbs, opt):
            cost_p = a.c_avg(cov_plain, policy)
            cost_mod = a.c_avg(cov_mod, policy)
            assert cost_p <= 2.0 * cost_mod + TOL
            if a.policy_height(cov_plain, policy) <= m:
                assert cost_mod <= cost_p + 1.0 + TOL
