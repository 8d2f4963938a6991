"""Reference solvers used to cross-check :func:`railevac.solver.solve`.

Both are deliberately naive and share no code with the flow solver beyond the
instance/plan types.
"""

from __future__ import annotations

import itertools
import math

from .errors import InstanceTooLarge, MultiOriginUnsupported
from .solver import EvacuationPlan, Flow, PlanStatus, SolverInstance, make_plan

BRUTE_FORCE_MAX_DEMAND = 30
BRUTE_FORCE_MAX_VARIABLES = 6


def greedy_oracle(instance: SolverInstance) -> EvacuationPlan:
    """Single origin: fill destinations in (cost, index) order."""
    if len(instance.demands) != 1:
        raise MultiOriginUnsupported(
            f"greedy oracle needs exactly one origin, got {len(instance.demands)}")
    (origin, demand), = instance.demands.items()
    remaining = demand
    flows = []
    for i, j, a in sorted(instance.variables, key=lambda v: (v[2], v[1])):
        if remaining <= 0:
            break
        x = min(instance.capacities[j], remaining)
        if x > 0:
            flows.append(Flow(i, j, x, a))
            remaining -= x
    if remaining > 1e-9 * max(1.0, demand):
        return make_plan((), instance, PlanStatus.INFEASIBLE, {origin: remaining})
    return make_plan(flows, instance)


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` nonnegative ints summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


def brute_force_oracle(instance: SolverInstance) -> EvacuationPlan:
    """Enumerate every integer allocation and keep the cheapest.

    Ties go to the lexicographically smallest flow vector, ordered like
    ``instance.variables``.
    """
    values = [*instance.demands.values(), *instance.capacities.values()]
    if any(not float(v).is_integer() for v in values):
        raise InstanceTooLarge("brute force needs integer demands and capacities")
    total = sum(int(y) for y in instance.demands.values())
    if total > BRUTE_FORCE_MAX_DEMAND or len(instance.variables) > BRUTE_FORCE_MAX_VARIABLES:
        raise InstanceTooLarge(
            f"brute force limited to demand <= {BRUTE_FORCE_MAX_DEMAND} and "
            f"<= {BRUTE_FORCE_MAX_VARIABLES} variables")

    variables = list(instance.variables)
    origins = sorted(instance.demands)
    slots = {i: [t for t, v in enumerate(variables) if v[0] == i] for i in origins}
    choices = [list(_compositions(int(instance.demands[i]), len(slots[i]))) for i in origins]

    best = None
    for combo in itertools.product(*choices):
        vector = [0] * len(variables)
        for i, parts in zip(origins, combo):
            for t, x in zip(slots[i], parts):
                vector[t] = x
        inflow: dict[int, int] = {}
        for (_, j, _), x in zip(variables, vector):
            inflow[j] = inflow.get(j, 0) + x
        if any(x > instance.capacities[j] for j, x in inflow.items()):
            continue
        cost = math.fsum(a * x for (_, _, a), x in zip(variables, vector))
        candidate = (cost, vector)
        if best is None or candidate < best:
            best = candidate

    if best is None:
        shortfall = {i: instance.demands[i] for i in origins if instance.demands[i] > 0}
        return make_plan((), instance, PlanStatus.INFEASIBLE, shortfall)
    return make_plan((Flow(i, j, float(x), a) for (i, j, a), x in zip(variables, best[1])),
                     instance)
