import numpy as np
import pytest

from colgen import (DualStore, DwdConfig, FilterMode, GaBlockProblem,
                    McBlockProblem, Strategy, generate_ga_instance,
                    generate_mc_instance, parse_mc_instance, reduced_cost,
                    run_dwd)
from colgen.model import Column

import oracles


def ga_problem(bins=5, items=6, seed=0):
    return GaBlockProblem(generate_ga_instance(bins, items, seed))


def mc_problem(nodes=7, arcs=16, commodities=4, seed=0):
    return McBlockProblem(generate_mc_instance(nodes, arcs, commodities, seed))


def config(mode=FilterMode.BASELINE, strategy=Strategy.ALL, **kw):
    return DwdConfig(mode=mode, strategy=strategy, **kw)


# ----------------------------------------------------------------------
# dual store

def test_dual_store_bounded_retention():
    store = DualStore(retain=1)
    for t in (1, 2, 3):
        store.push(t, np.full(2, float(t)))
    assert store.get(3) is not None
    assert store.get(2) is None and store.get(1) is None
    assert store.retained_iterations == (3,)


def test_dual_store_unbounded():
    store = DualStore()
    for t in (1, 2, 3):
        store.push(t, np.zeros(1))
    assert all(store.get(t) is not None for t in (1, 2, 3))
    assert len(store) == 3


def test_dual_store_copies_and_orders():
    store = DualStore()
    pi = np.zeros(2)
    store.push(1, pi)
    pi[0] = 99.0  # caller mutation must not leak in
    assert store.get(1)[0] == 0.0
    with pytest.raises(ValueError):
        store.push(1, pi)
    with pytest.raises(ValueError):
        DualStore(retain=0)


# ----------------------------------------------------------------------
# reduced cost helper

def test_reduced_cost_zero_duals_is_cost():
    col = Column(0, 7.5, ((0, 2.0), (3, -1.0)))
    assert reduced_cost(col, np.zeros(4), 0.0, 1.0) == 7.5


def test_reduced_cost_arithmetic():
    col = Column(0, 10.0, ((0, 2.0),))
    # 10 - 3*2 - 1*4 = 0
    assert reduced_cost(col, np.array([3.0]), 4.0, 1.0) == pytest.approx(0.0)
    # sigma -1 flips the convexity part: 10 - 6 + 4 = 8
    assert reduced_cost(col, np.array([3.0]), 4.0, -1.0) == pytest.approx(8.0)


# ----------------------------------------------------------------------
# whole runs

def test_single_bin_single_item():
    from colgen import GaInstance
    inst = GaInstance(1, 1, [[5]], [[3]], [10])
    result = run_dwd(GaBlockProblem(inst), config())
    assert result.objective == pytest.approx(5.0)
    assert result.termination == "optimal"
    assert result.stats.iterations <= 2


def test_tiny_mc_against_hand_enumeration():
    text = """
    nodes 3
    arc 0 1 10 1 2
    arc 1 2 10 1 2
    arc 0 2 10 5 1
    commodity 0 2 2 3
    """
    inst = parse_mc_instance(text)
    result = run_dwd(McBlockProblem(inst), config())
    # budget 3 rules out the direct arc (delay 5): route 0-1-2, cost 2*(2+2)
    assert result.objective == pytest.approx(8.0)
    oracles.check_mc_primal(inst, result)


def test_initial_columns_already_optimal():
    # min-delay and min-cost coincide on a single-arc instance
    inst = parse_mc_instance("nodes 2\narc 0 1 10 1 4\ncommodity 0 1 2 5\n")
    result = run_dwd(McBlockProblem(inst), config())
    assert result.stats.iterations == 1
    assert result.termination == "optimal"
    assert result.objective == pytest.approx(8.0)


def test_exact_strategies_match_baseline():
    for make in (lambda s: ga_problem(seed=s), lambda s: mc_problem(seed=s)):
        for seed in range(4):
            base = run_dwd(make(seed), config())
            for strategy in Strategy:
                again = run_dwd(make(seed), config(FilterMode.EXACT, strategy))
                rel = abs(again.objective - base.objective) / max(1.0, abs(base.objective))
                assert rel <= 1e-6, f"seed {seed} {strategy} diverged by {rel}"
                assert again.termination == "optimal"


def test_heuristic_runs_stay_feasible_and_above_optimum():
    for seed in range(4):
        inst = generate_ga_instance(8, 6, seed)
        base = run_dwd(GaBlockProblem(inst), config())
        for strategy in Strategy:
            res = run_dwd(GaBlockProblem(inst), config(FilterMode.HEURISTIC, strategy))
            oracles.check_ga_primal(inst, res)
            gap = (res.objective - base.objective) / abs(base.objective)
            assert gap >= -1e-6
    for seed in range(3):
        inst = generate_mc_instance(8, 20, 5, seed)
        base = run_dwd(McBlockProblem(inst), config())
        res = run_dwd(McBlockProblem(inst), config(FilterMode.HEURISTIC, Strategy.ALL))
        oracles.check_mc_primal(inst, res)
        assert (res.objective - base.objective) / abs(base.objective) >= -1e-6


def test_stats_invariants_and_counts():
    problem = ga_problem(bins=7, items=5, seed=3)
    result = run_dwd(problem, config(FilterMode.EXACT, Strategy.ALL, trace=True))
    stats = result.stats
    k = 7
    assert stats.pricing_calls <= stats.iterations * k
    assert stats.columns_added <= stats.pricing_calls
    assert sum(result.per_block_added) == stats.columns_added
    assert result.initial_column_count == k
    assert len(result.columns) == k + stats.columns_added
    assert stats.filters_succeeded <= stats.filters_attempted
    assert stats.wall_time_s > 0
    priced = sum(1 for it in result.trace for b in it.blocks if b.decision == "priced")
    assert priced == stats.pricing_calls
    added = sum(it.columns_added for it in result.trace)
    assert added == stats.columns_added


def test_trace_objectives_non_increasing():
    result = run_dwd(mc_problem(seed=5), config(trace=True))
    objectives = [it.objective for it in result.trace]
    assert all(b <= a + 1e-7 for a, b in zip(objectives, objectives[1:]))
    assert objectives[-1] == pytest.approx(result.objective)


def test_trace_filtered_blocks_show_clearing_bound():
    result = run_dwd(ga_problem(bins=10, items=5, seed=1),
                     config(FilterMode.EXACT, Strategy.ALL, trace=True))
    filtered = [b for it in result.trace for b in it.blocks if b.decision == "filtered"]
    assert filtered, "expected some filtering on this instance"
    for b in filtered:
        assert b.bounds, "a filtered block must carry its bound evidence"
        assert b.bounds[-1][1] >= -1e-4  # the short-circuiting bound
        assert b.reduced_cost is None
        assert not b.column_added


def test_audit_clean_on_exact_runs():
    for make, k in ((lambda: ga_problem(bins=8, items=5, seed=2), 8),
                    (lambda: mc_problem(seed=2), 4)):
        result = run_dwd(make(), config(FilterMode.EXACT, Strategy.ALL, audit=True,
                                        trace=True))
        audit = result.audit
        assert audit.ok
        assert audit.reduced_cost_checks > 0 and not audit.reduced_cost_mismatches
        filtered = sum(1 for it in result.trace for b in it.blocks
                       if b.decision == "filtered")
        assert audit.filter_checks == filtered
        assert audit.final_checks == k  # sweep prices every block at the end
        assert not audit.final_violations


def test_audit_baseline_final_sweep_only():
    result = run_dwd(ga_problem(seed=4), config(audit=True))
    assert result.audit.ok
    assert result.audit.filter_checks == 0
    assert result.audit.final_checks == 5


def test_basic_columns_price_to_zero():
    result = run_dwd(ga_problem(bins=6, items=6, seed=7), config(audit=True))
    pi = result.duals.linking
    mu = result.duals.convexity
    for col, value in zip(result.columns, result.column_values):
        if value > 1e-9:
            rc = reduced_cost(col, pi, float(mu[col.block]), -1.0)
            assert abs(rc) <= 1e-7, f"basic column with reduced cost {rc}"


def test_iteration_limit_reported():
    result = run_dwd(ga_problem(bins=8, items=6, seed=1), config(max_iterations=1))
    assert result.termination == "iteration_limit"
    assert result.stats.iterations == 1


def test_full_eviction_degrades_to_baseline_trajectory():
    inst = generate_ga_instance(8, 6, 11)
    base = run_dwd(GaBlockProblem(inst), config())
    evicted = run_dwd(GaBlockProblem(inst),
                      config(FilterMode.EXACT, Strategy.COMPUTED, retain_duals=1))
    # with one retained vector, every record's duals are gone by the next
    # iteration, so nothing is ever skipped and the runs coincide
    assert evicted.objective == base.objective
    assert evicted.stats.pricing_calls == base.stats.pricing_calls
    assert evicted.stats.records_skipped_evicted > 0
    assert evicted.stats.filters_succeeded == 0


def test_short_retention_still_exact():
    for alpha in (2, 3):
        inst = generate_ga_instance(9, 6, 12)
        base = run_dwd(GaBlockProblem(inst), config())
        res = run_dwd(GaBlockProblem(inst),
                      config(FilterMode.EXACT, Strategy.ALL, retain_duals=alpha,
                             audit=True))
        rel = abs(res.objective - base.objective) / abs(base.objective)
        assert rel <= 1e-6
        assert res.audit.ok


class LyingBoundProblem(GaBlockProblem):
    """Claims a huge lower bound for every block: every skip is unsound."""

    def hypercube_bound_term(self, block, pi_prev, pi_now):
        return 1e6

    def heuristic_bound_term(self, block, pi_prev, pi_now, support):
        return 1e6


def test_audit_catches_invalid_exact_bounds():
    inst = generate_ga_instance(6, 5, 0)
    result = run_dwd(LyingBoundProblem(inst),
                     config(FilterMode.EXACT, Strategy.ALL, audit=True))
    assert result.audit.soundness_violations
    assert not result.audit.ok


def test_heuristic_unsound_skips_are_informational():
    inst = generate_ga_instance(6, 5, 0)
    result = run_dwd(LyingBoundProblem(inst),
                     config(FilterMode.HEURISTIC, Strategy.ALL, audit=True))
    assert result.audit.heuristic_unsound_skips > 0
    assert result.audit.ok  # expected behavior for a heuristic, not an error


def test_flags_off_mean_no_payloads():
    result = run_dwd(ga_problem(seed=0), config())
    assert result.trace is None and result.audit is None


def test_engine_determinism():
    a = run_dwd(mc_problem(seed=9), config(FilterMode.EXACT, Strategy.ALL, trace=True))
    b = run_dwd(mc_problem(seed=9), config(FilterMode.EXACT, Strategy.ALL, trace=True))
    assert a.objective == b.objective
    assert a.trace == b.trace
    assert a.per_block_added == b.per_block_added
    assert np.array_equal(a.column_values, b.column_values)


def test_config_validation():
    with pytest.raises(ValueError):
        DwdConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        DwdConfig(retain_duals=0)
    with pytest.raises(ValueError):
        DwdConfig(max_iterations=0)
