import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from railevac.errors import InstanceTooLarge, MultiOriginUnsupported, ValidationError
from railevac.oracles import brute_force_oracle, greedy_oracle
from railevac.solver import Flow, PlanStatus, SolverInstance, solve

from _instances import multi_origin, single_origin, small_integer

# A=0 evacuates to B=1 (2 min) and C=2 (12 min)
TOY = SolverInstance(((0, 1, 2.0), (0, 2, 12.0)), {0: 150.0}, {1: 100.0, 2: 100.0})


def flows_of(plan):
    return {(f.origin, f.destination): f.persons for f in plan.flows}


def assert_feasible(plan, inst):
    assert plan.status is PlanStatus.OPTIMAL
    out, into = plan.outflow(), plan.inflow()
    for i, y in inst.demands.items():
        assert out.get(i, 0.0) == pytest.approx(y, rel=1e-6, abs=1e-12)
    for j, x in into.items():
        assert x <= inst.capacities[j] + 1e-6
    allowed = {(i, j) for i, j, _ in inst.variables}
    for f in plan.flows:
        assert (f.origin, f.destination) in allowed and f.persons > 0


def support_is_forest(plan) -> bool:
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            x = parent[x]
        return x

    for f in plan.flows:
        a, b = find(("o", f.origin)), find(("d", f.destination))
        if a == b:
            return False
        parent[a] = b
    return True


class TestSolveExamples:
    def test_two_destinations(self):
        plan = solve(TOY)
        assert flows_of(plan) == {(0, 1): 100.0, (0, 2): 50.0}
        assert plan.objective_att == pytest.approx((2 * 100 + 12 * 50) / 150, rel=1e-6)
        assert plan.att() == pytest.approx(16 / 3, rel=1e-12)
        assert plan.total_evacuated == 150.0

    def test_zero_demand(self):
        plan = solve(SolverInstance(((0, 1, 3.0),), {0: 0.0}, {1: 10.0}))
        assert plan.status is PlanStatus.OPTIMAL
        assert plan.flows == () and plan.total_evacuated == 0.0
        assert plan.objective_att == 0.0

    def test_epsilon_only_in_ratio(self):
        plan = solve(TOY)
        assert plan.objective_att == plan.total_cost / (plan.total_evacuated + 1e-6)

    def test_two_origins_match_enumeration(self):
        inst = SolverInstance(((0, 2, 3.0), (0, 3, 5.0), (1, 2, 1.0), (1, 3, 4.0)),
                              {0: 6.0, 1: 5.0}, {2: 6.0, 3: 7.0})
        plan, oracle = solve(inst), brute_force_oracle(inst)
        # origin 1 takes the cheap destination; origin 0 fills the rest
        assert flows_of(oracle) == {(0, 2): 1.0, (0, 3): 5.0, (1, 2): 5.0}
        assert plan.total_cost == oracle.total_cost == 3 + 25 + 5

    def test_shared_capacity_goes_to_larger_saving(self):
        # both origins prefer destination 2; origin 1 saves more by using it
        inst = SolverInstance(((0, 2, 1.0), (0, 3, 2.0), (1, 2, 1.0), (1, 3, 9.0)),
                              {0: 5.0, 1: 5.0}, {2: 5.0, 3: 10.0})
        assert flows_of(solve(inst)) == {(0, 3): 5.0, (1, 2): 5.0}

    def test_infeasible_reports_shortfall(self):
        inst = SolverInstance(((0, 2, 1.0), (1, 2, 1.0), (1, 3, 1.0)),
                              {0: 5.0, 1: 2.0}, {2: 4.0, 3: 10.0})
        plan = solve(inst)
        assert plan.status is PlanStatus.INFEASIBLE
        assert plan.shortfall == {0: pytest.approx(1.0)}
        assert plan.flows == ()

    def test_equal_costs_fill_lowest_index_first(self):
        inst = SolverInstance(tuple((0, j, 5.0) for j in (3, 1, 2)), {0: 15.0},
                              {1: 10.0, 2: 10.0, 3: 10.0})
        assert flows_of(solve(inst)) == {(0, 1): 10.0, (0, 2): 5.0}

    def test_flows_sorted_and_positive(self):
        plan = solve(multi_origin(np.random.default_rng(5)))
        keys = [(f.origin, f.destination) for f in plan.flows]
        assert keys == sorted(keys)
        assert all(f.persons > 0 for f in plan.flows)


class TestInstanceValidation:
    @pytest.mark.parametrize("variables, demands, capacities", [
        (((0, 0, 1.0),), {0: 1.0}, {0: 1.0}),
        (((0, 1, math.inf),), {0: 1.0}, {1: 1.0}),
        (((0, 1, -1.0),), {0: 1.0}, {1: 1.0}),
        (((0, 1, 1.0),), {0: -1.0}, {1: 1.0}),
        (((0, 1, 1.0),), {0: 1.0}, {1: -1.0}),
        (((2, 1, 1.0),), {0: 1.0}, {1: 1.0}),
        (((0, 1, 1.0), (0, 1, 2.0)), {0: 1.0}, {1: 1.0}),
    ])
    def test_rejected(self, variables, demands, capacities):
        with pytest.raises(ValidationError):
            SolverInstance(variables, demands, capacities)


class TestGreedyOracle:
    def test_toy_matches_solver(self):
        assert greedy_oracle(TOY) == solve(TOY)

    def test_equal_costs_by_index(self):
        inst = SolverInstance(tuple((0, j, 5.0) for j in (3, 1, 2)), {0: 15.0},
                              {1: 10.0, 2: 10.0, 3: 10.0})
        assert flows_of(greedy_oracle(inst)) == {(0, 1): 10.0, (0, 2): 5.0}

    def test_exact_total_capacity_saturates_all(self):
        inst = SolverInstance(((0, 1, 4.0), (0, 2, 1.0)), {0: 7.0}, {1: 3.0, 2: 4.0})
        assert flows_of(greedy_oracle(inst)) == {(0, 1): 3.0, (0, 2): 4.0}

    def test_multi_origin_refused(self):
        with pytest.raises(MultiOriginUnsupported):
            greedy_oracle(SolverInstance((), {0: 1.0, 1: 1.0}, {}))

    def test_infeasible(self):
        plan = greedy_oracle(SolverInstance(((0, 1, 1.0),), {0: 3.0}, {1: 2.0}))
        assert plan.status is PlanStatus.INFEASIBLE


class TestBruteForceOracle:
    def test_forced(self):
        plan = brute_force_oracle(SolverInstance(((0, 1, 2.0),), {0: 5.0}, {1: 5.0}))
        assert flows_of(plan) == {(0, 1): 5.0}

    def test_infeasible(self):
        inst = SolverInstance(((0, 1, 1.0), (0, 2, 1.0)), {0: 3.0}, {1: 1.0, 2: 1.0})
        assert brute_force_oracle(inst).status is PlanStatus.INFEASIBLE
        assert solve(inst).status is PlanStatus.INFEASIBLE

    def test_ties_take_lexicographically_smallest_vector(self):
        inst = SolverInstance(((0, 1, 1.0), (0, 2, 1.0)), {0: 2.0}, {1: 2.0, 2: 2.0})
        assert flows_of(brute_force_oracle(inst)) == {(0, 2): 2.0}

    def test_bounds(self):
        too_many = SolverInstance(tuple((0, j, 1.0) for j in range(1, 8)), {0: 1.0},
                                  {j: 1.0 for j in range(1, 8)})
        with pytest.raises(InstanceTooLarge):
            brute_force_oracle(too_many)
        with pytest.raises(InstanceTooLarge):
            brute_force_oracle(SolverInstance(((0, 1, 1.0),), {0: 31.0}, {1: 40.0}))
        with pytest.raises(InstanceTooLarge):
            brute_force_oracle(SolverInstance(((0, 1, 1.0),), {0: 1.5}, {1: 4.0}))


@pytest.mark.parametrize("seed", range(50))
def test_single_origin_vs_greedy(seed):
    inst = single_origin(np.random.default_rng(seed))
    plan, ref = solve(inst), greedy_oracle(inst)
    assert_feasible(plan, inst)
    assert plan.total_cost == pytest.approx(ref.total_cost, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("seed", range(50))
def test_small_integer_vs_brute_force(seed):
    inst = small_integer(np.random.default_rng(1000 + seed))
    plan, ref = solve(inst), brute_force_oracle(inst)
    assert plan.status is ref.status
    if ref.status is PlanStatus.OPTIMAL:
        assert_feasible(plan, inst)
        assert plan.total_cost == ref.total_cost


@pytest.mark.parametrize("seed", range(30))
def test_vertex_solution(seed):
    inst = multi_origin(np.random.default_rng(seed))
    plan = solve(inst)
    assert_feasible(plan, inst)
    assert support_is_forest(plan)
    assert len(plan.flows) <= len(inst.demands) + len(inst.capacities) - 1


def test_degenerate_equal_costs_gives_vertex():
    # every pair costs the same; any split is optimal but only vertices are sparse
    inst = SolverInstance(tuple((i, j, 3.0) for i in range(3) for j in range(3, 6)),
                          {0: 4.0, 1: 4.0, 2: 4.0}, {3: 5.0, 4: 5.0, 5: 5.0})
    plan = solve(inst)
    assert_feasible(plan, inst)
    assert support_is_forest(plan)
    assert plan.att() == 3.0


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(seeds, st.floats(0.01, 100.0))
def test_scale_equivariance(seed, lam):
    inst = multi_origin(np.random.default_rng(seed))
    base, scaled = solve(inst), solve(inst.scaled(lam))
    assert scaled.att() == pytest.approx(base.att(), rel=1e-9)
    assert scaled.total_cost == pytest.approx(lam * base.total_cost, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(seeds, st.floats(0.0, 30.0))
def test_cost_shift(seed, delta):
    inst = multi_origin(np.random.default_rng(seed))
    base, shifted = solve(inst), solve(inst.shifted(delta))
    assert shifted.att() == pytest.approx(base.att() + delta, rel=1e-9, abs=1e-9)
    assert set(flows_of(shifted)) == set(flows_of(base))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_att_within_cost_range(seed):
    inst = multi_origin(np.random.default_rng(seed))
    plan = solve(inst)
    costs = [a for _, _, a in inst.variables]
    assert min(costs) - 1e-12 <= plan.att() <= max(costs) + 1e-12
    assert 0.0 <= plan.objective_att <= 30.0


def test_solve_is_pure():
    inst = multi_origin(np.random.default_rng(9))
    assert solve(inst) == solve(inst)


def test_plan_helpers():
    plan = solve(TOY)
    assert plan.outflow() == {0: 150.0}
    assert plan.inflow() == {1: 100.0, 2: 50.0}
    assert plan.flows[0] == Flow(0, 1, 100.0, 2.0)


@pytest.mark.parametrize("seed", range(40))
def test_multi_origin_vs_linprog(seed):
    optimize = pytest.importorskip("scipy.optimize")
    inst = multi_origin(np.random.default_rng(500 + seed), max_origins=5, max_dests=15)
    var = list(inst.variables)
    origins, dests = inst.origins, inst.destinations
    a_eq = np.array([[1.0 if v[0] == i else 0.0 for v in var] for i in origins])
    a_ub = np.array([[1.0 if v[1] == j else 0.0 for v in var] for j in dests])
    res = optimize.linprog([v[2] for v in var], A_ub=a_ub,
                           b_ub=[inst.capacities[j] for j in dests], A_eq=a_eq,
                           b_eq=[inst.demands[i] for i in origins], method="highs")
    assert res.status == 0
    assert solve(inst).total_cost == pytest.approx(res.fun, rel=1e-7)
