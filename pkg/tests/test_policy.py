"""Policy trees, greedy construction, and the threshold/tie-break
sub-policy machinery."""

import pytest

import adaptsel as a
from conftest import corpus_instance, coverage_demo

TOL = 1e-9


def alternative_threshold_pairs(instance, base, i, tol=TOL):
    """Independent oracle for threshold-pair uniqueness: scan many candidate
    thresholds (achievable gains, class midpoints, and the sentinel) and
    solve for every tie-break probability that yields average cost i."""
    values = sorted(set(a.policy.achievable_gains(instance, base)), reverse=True)
    candidates = list(values) + [(max(values) if values else 0.0) + 1.0]
    for low, high in zip(values[1:], values):
        candidates.append((low + high) / 2.0)
    pairs = []
    for tau in candidates:
        if tau < 0.0:
            continue
        strict = a.c_avg(instance, a.threshold_subpolicy(base, tau, 1.0))
        weak = a.c_avg(instance, a.threshold_subpolicy(base, tau, 0.0))
        if weak - tol <= i <= strict + tol:
            if strict - weak > tol:
                rho = (i - weak) / (strict - weak)
            elif abs(weak - i) <= tol:
                rho = 0.0
            else:
                continue
            rho = min(1.0, max(0.0, rho))
            pairs.append((tau, rho))
    return pairs


def test_run_chain_is_single_full_trace(thm5):
    instance, chain = thm5
    for phi_index in range(instance.num_realizations):
        traces = a.run(instance, chain, phi_index)
        assert len(traces) == 1
        assert traces[0].weight == 1.0
        assert traces[0].selected == (0, 1, 2)


def test_run_immediate_policy_selects_nothing(thm5):
    instance, _ = thm5
    traces = a.run(instance, a.IMMEDIATE, 0)
    assert len(traces) == 1
    assert traces[0].selected == ()


def test_run_theorem4_threshold_policy_is_all_or_nothing(thm4):
    instance, chain = thm4
    k = instance.num_elements
    for i in (1, 2):
        sp = a.threshold_subpolicy(chain, 1.0 / k, i / k)
        for phi_index in range(instance.num_realizations):
            traces = {t.selected: t.weight for t in a.run(instance, sp, phi_index)}
            assert set(traces) == {(0, 1, 2), ()}
            assert abs(traces[(0, 1, 2)] - i / k) <= TOL
            assert abs(traces[()] - (1 - i / k)) <= TOL


def test_trace_weights_sum_to_one():
    instance, chain = a.gen_theorem5(3, 0.5)
    sp = a.threshold_subpolicy(chain, 0.25, 0.4)
    for phi_index in range(instance.num_realizations):
        total = sum(t.weight for t in a.run(instance, sp, phi_index))
        assert abs(total - 1.0) <= TOL


def test_build_greedy_on_theorem5_is_the_chain(thm5):
    instance, chain = thm5
    greedy = a.build_greedy(instance)
    assert greedy == chain


def test_build_greedy_coverage_demo_root_breaks_tie_lexicographically(
    demo_hypotheses,
):
    _, _, cov_mod = coverage_demo(demo_hypotheses)
    greedy = a.build_greedy(cov_mod)
    assert cov_mod.elements[greedy.element] == "x1"


def test_build_greedy_root_picks_unique_argmax():
    for seed in range(10):
        instance = corpus_instance(seed)
        greedy = a.build_greedy(instance)
        gains = {
            v: a.marginal_gain(instance, v, a.EMPTY)
            for v in range(instance.num_elements)
        }
        best = max(gains.values())
        assert gains[greedy.element] >= best - TOL


def test_build_greedy_is_greedy_at_every_reachable_node():
    for seed in range(20):
        instance = corpus_instance(seed)
        greedy = a.build_greedy(instance)
        assert abs(a.alpha(instance, greedy) - 1.0) <= TOL


def test_threshold_zero_rho_one_behaves_as_base(thm5):
    instance, chain = thm5
    sp = a.threshold_subpolicy(chain, 0.0, 1.0)
    assert a.canonical_traces(instance, sp) == a.canonical_traces(instance, chain)


def test_threshold_above_every_gain_terminates_immediately(thm5):
    instance, chain = thm5
    sp = a.threshold_subpolicy(chain, 100.0, 0.5)
    for phi_index in range(instance.num_realizations):
        for trace in a.run(instance, sp, phi_index):
            assert trace.selected == ()


def test_threshold_half_on_theorem5_selects_one_or_zero(thm5):
    instance, chain = thm5
    strict = a.materialize(instance, a.threshold_subpolicy(chain, 0.5, 1.0))
    weak = a.materialize(instance, a.threshold_subpolicy(chain, 0.5, 0.0))
    assert a.c_avg(instance, strict) == 1.0
    assert a.c_avg(instance, weak) == 0.0


def test_find_threshold_pair_theorem4_matches_closed_form(thm4):
    instance, chain = thm4
    tau, rho, sp = a.find_threshold_pair(instance, chain, 2)
    assert abs(tau - 1.0 / 3.0) <= TOL
    assert abs(rho - 2.0 / 3.0) <= TOL
    assert abs(a.c_avg(instance, sp) - 2.0) <= TOL


def test_find_threshold_pair_theorem5_budget_one(thm5):
    instance, chain = thm5
    tau, rho, sp = a.find_threshold_pair(instance, chain, 1)
    assert abs(tau - 0.5) <= TOL
    assert abs(rho - 1.0) <= TOL
    assert abs(a.c_avg(instance, sp) - 1.0) <= TOL


def test_find_threshold_pair_budget_zero_is_immediate(thm5):
    instance, chain = thm5
    tau, rho, sp = a.find_threshold_pair(instance, chain, 0)
    assert rho == 0.0
    assert a.c_avg(instance, sp) == 0.0


def test_find_threshold_pair_rejects_budget_beyond_cost(thm5):
    instance, chain = thm5
    with pytest.raises(a.BudgetExceedsCost):
        a.find_threshold_pair(instance, chain, 4)


def test_threshold_pair_cost_and_uniqueness_on_corpus():
    for seed in range(25):
        instance = corpus_instance(seed)
        greedy = a.build_greedy(instance)
        top = int(a.c_avg(instance, greedy) + TOL)
        for i in range(1, top + 1):
            tau, rho, sp = a.find_threshold_pair(instance, greedy, i)
            assert abs(a.c_avg(instance, sp) - i) <= TOL
            canonical = a.canonical_traces(instance, sp)
            for alt_tau, alt_rho in alternative_threshold_pairs(
                instance, greedy, i
            ):
                alt = a.threshold_subpolicy(greedy, alt_tau, alt_rho)
                assert abs(a.c_avg(instance, alt) - i) <= 1e-6
                assert a.canonical_traces(instance, alt) == canonical


def test_sub_policies_are_nested_by_budget():
    for seed in range(15):
        instance = corpus_instance(seed)
        greedy = a.build_greedy(instance)
        top = int(a.c_avg(instance, greedy) + TOL)
        for i in range(1, top):
            small = a.sub_policy_at_cost(instance, greedy, i)
            large = a.sub_policy_at_cost(instance, greedy, i + 1)
            for phi_index, p in enumerate(instance.prior):
                if p <= 0.0:
                    continue
                small_sets = [t.selected for t in a.run(instance, small, phi_index)]
                large_sets = [t.selected for t in a.run(instance, large, phi_index)]
                for selected in small_sets:
                    assert any(
                        big[: len(selected)] == selected for big in large_sets
                    )


def test_mixture_affinity_of_c_avg():
    instance, chain = a.gen_theorem5(4, 0.25)
    for tau in (0.0625, 0.25, 0.7):
        strict = a.c_avg(instance, a.threshold_subpolicy(chain, tau, 1.0))
        weak = a.c_avg(instance, a.threshold_subpolicy(chain, tau, 0.0))
        for rho in (0.2, 0.5, 0.9):
            mixed = a.c_avg(instance, a.threshold_subpolicy(chain, tau, rho))
            assert abs(mixed - ((1 - rho) * weak + rho * strict)) <= TOL


def test_concat_with_immediate_is_identity(thm5):
    instance, chain = thm5
    combined = a.concat(instance, a.IMMEDIATE, chain)
    assert abs(a.f_avg(instance, combined) - a.f_avg(instance, chain)) <= TOL
    assert abs(a.c_avg(instance, combined) - a.c_avg(instance, chain)) <= TOL


def test_concat_with_itself_is_idempotent():
    for seed in range(10):
        instance = corpus_instance(seed)
        greedy = a.build_greedy(instance)
        doubled = a.concat(instance, greedy, greedy)
        assert abs(a.f_avg(instance, doubled) - a.f_avg(instance, greedy)) <= TOL
        assert abs(a.c_avg(instance, doubled) - a.c_avg(instance, greedy)) <= TOL


def test_concat_truncation_with_full_chain_restores_full_value(thm5):
    instance, chain = thm5
    pi_1 = a.materialize(instance, a.sub_policy_at_cost(instance, chain, 1))
    combined = a.concat(instance, pi_1, chain)
    assert abs(a.f_avg(instance, combined) - 1.875) <= TOL


def test_validate_policy_rejects_repeats_and_bad_arity(thm5):
    instance, _ = thm5
    repeat = a.Select(0, (a.Select(0, (a.TERMINAL, a.TERMINAL)), a.TERMINAL))
    with pytest.raises(a.MalformedPolicy):
        a.validate_policy(instance, repeat)
    bad_arity = a.Select(0, (a.TERMINAL,))
    with pytest.raises(a.MalformedPolicy):
        a.validate_policy(instance, bad_arity)


def test_materialize_rejects_proper_mixtures(thm5):
    instance, chain = thm5
    with pytest.raises(a.MalformedPolicy):
        a.materialize(instance, a.threshold_subpolicy(chain, 0.25, 0.5))
