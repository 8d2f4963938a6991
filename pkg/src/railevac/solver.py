"""Exact evacuation assignment.

Every blocked origin must send out exactly its load, so the total evacuated
flow is a constant of the problem. Minimizing the average cost per evacuee
is therefore the same as minimizing total cost, which is a transportation
problem. It is solved here as a min-cost flow

    source -> origin (cap y_i) -> destination (cost a_ij) -> sink (cap c_j)

by successive shortest paths with Dijkstra on reduced costs. The resulting
flow is then pushed to a vertex of the feasible polytope by cancelling
zero-cost cycles, which keeps plans sparse: the nonzero flows form a forest
over origins and destinations.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .errors import NumericFailure, ValidationError

DEFAULT_EPSILON = 1e-6


class PlanStatus(str, Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"


@dataclass(frozen=True)
class Flow:
    origin: int
    destination: int
    persons: float
    cost: float


@dataclass(frozen=True)
class SolverInstance:
    """Transportation instance over station indices.

    ``variables`` lists the allowed ``(origin, destination, cost_minutes)``
    pairs. ``demands`` maps each origin to the persons it must evacuate and
    ``capacities`` maps each destination to the persons it can absorb.
    """

    variables: tuple[tuple[int, int, float], ...]
    demands: Mapping[int, float]
    capacities: Mapping[int, float]
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(
            (int(i), int(j), float(a)) for i, j, a in self.variables))
        seen = set()
        for i, j, a in self.variables:
            if not (math.isfinite(a) and a >= 0):
                raise ValidationError(f"variable ({i}, {j}) has invalid cost {a}")
            if i == j:
                raise ValidationError(f"diagonal variable ({i}, {i}) not allowed")
            if i not in self.demands:
                raise ValidationError(f"variable ({i}, {j}) leaves a non-origin station")
            if j not in self.capacities:
                raise ValidationError(f"variable ({i}, {j}) enters a non-destination station")
            if (i, j) in seen:
                raise ValidationError(f"duplicate variable ({i}, {j})")
            seen.add((i, j))
        for i, y in self.demands.items():
            if not (math.isfinite(y) and y >= 0):
                raise ValidationError(f"origin {i} has invalid demand {y}")
            if i in self.capacities:
                raise ValidationError(f"station {i} is both origin and destination")
        for j, c in self.capacities.items():
            if not (math.isfinite(c) and c >= 0):
                raise ValidationError(f"destination {j} has invalid capacity {c}")
        if not self.epsilon >= 0:
            raise ValidationError(f"epsilon must be >= 0, got {self.epsilon}")

    @property
    def origins(self) -> list[int]:
        return sorted(self.demands)

    @property
    def destinations(self) -> list[int]:
        return sorted(self.capacities)

    @property
    def total_demand(self) -> float:
        return math.fsum(self.demands.values())

    def scaled(self, factor: float) -> "SolverInstance":
        return SolverInstance(self.variables,
                              {i: y * factor for i, y in self.demands.items()},
                              {j: c * factor for j, c in self.capacities.items()},
                              self.epsilon)

    def shifted(self, delta: float) -> "SolverInstance":
        return SolverInstance(tuple((i, j, a + delta) for i, j, a in self.variables),
                              self.demands, self.capacities, self.epsilon)


@dataclass(frozen=True)
class EvacuationPlan:
    """Solver output. ``flows`` is sorted by (origin, destination) and holds
    only positive flows. ``shortfall`` lists unmet demand per origin when the
    instance is infeasible."""

    flows: tuple[Flow, ...]
    objective_att: float
    total_evacuated: float
    status: PlanStatus
    shortfall: Mapping[int, float] = field(default_factory=dict)

    @property
    def total_cost(self) -> float:
        return math.fsum(f.persons * f.cost for f in self.flows)

    def att(self) -> float:
        """Average cost per evacuee without the epsilon guard (0 if nobody moves)."""
        total = math.fsum(f.persons for f in self.flows)
        return self.total_cost / total if total > 0 else 0.0

    def outflow(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for f in self.flows:
            out[f.origin] = out.get(f.origin, 0.0) + f.persons
        return out

    def inflow(self) -> dict[int, float]:
        into: dict[int, float] = {}
        for f in self.flows:
            into[f.destination] = into.get(f.destination, 0.0) + f.persons
        return into


def make_plan(flows, instance: SolverInstance, status=PlanStatus.OPTIMAL,
              shortfall=None) -> EvacuationPlan:
    flows = tuple(sorted((f for f in flows if f.persons > 0),
                         key=lambda f: (f.origin, f.destination)))
    total = math.fsum(f.persons for f in flows)
    total_cost = math.fsum(f.persons * f.cost for f in flows)
    return EvacuationPlan(flows, total_cost / (total + instance.epsilon), total,
                          PlanStatus(status), dict(shortfall or {}))


def _tolerance(instance: SolverInstance) -> float:
    scale = max([1.0, instance.total_demand, *instance.capacities.values()])
    return 1e-12 * scale


class _Graph:
    __slots__ = ("head", "res", "cost", "adj")

    def __init__(self, n_nodes: int):
        self.head: list[int] = []
        self.res: list[float] = []
        self.cost: list[float] = []
        self.adj: list[list[int]] = [[] for _ in range(n_nodes)]

    def add_edge(self, u: int, v: int, cap: float, cost: float) -> int:
        e = len(self.head)
        self.head += [v, u]
        self.res += [cap, 0.0]
        self.cost += [cost, -cost]
        self.adj[u].append(e)
        self.adj[v].append(e + 1)
        return e


def _dijkstra(g: _Graph, src: int, pot: list[float], tol: float):
    n = len(g.adj)
    dist = [math.inf] * n
    prev = [-1] * n
    done = [False] * n
    dist[src] = 0.0
    heap = [(0.0, src)]
    head, res, cost, adj = g.head, g.res, g.cost, g.adj
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        pu = pot[u]
        for e in adj[u]:
            if res[e] <= tol:
                continue
            v = head[e]
            if done[v]:
                continue
            rc = cost[e] + pu - pot[v]
            nd = d + (rc if rc > 0.0 else 0.0)
            if nd < dist[v]:
                dist[v] = nd
                prev[v] = e
                heapq.heappush(heap, (nd, v))
    return dist, prev


def _min_cost_flow(instance: SolverInstance, origins: list[int], tol: float):
    """Successive shortest paths; returns ({(i, j): flow}, {i: pushed})."""
    dests = instance.destinations
    m, k = len(origins), len(dests)
    source, sink = 0, m + k + 1
    onode = {i: 1 + r for r, i in enumerate(origins)}
    dnode = {j: 1 + m + r for r, j in enumerate(dests)}

    g = _Graph(m + k + 2)
    for i in origins:
        g.add_edge(source, onode[i], instance.demands[i], 0.0)
    var_edges = {}
    for i, j, a in sorted(instance.variables, key=lambda v: (v[0], v[1])):
        if i in onode:
            var_edges[(i, j)] = g.add_edge(onode[i], dnode[j], math.inf, a)
    for j in dests:
        g.add_edge(dnode[j], sink, instance.capacities[j], 0.0)

    pot = [0.0] * len(g.adj)
    remaining = math.fsum(instance.demands[i] for i in origins)
    max_iter = 4 * (len(g.head) + len(g.adj)) ** 2 + 100
    for _ in range(max_iter):
        if remaining <= tol:
            break
        dist, prev = _dijkstra(g, source, pot, tol)
        if dist[sink] == math.inf:
            break
        for v, dv in enumerate(dist):
            if dv < math.inf:
                pot[v] += dv
        path = []
        v = sink
        while v != source:
            e = prev[v]
            path.append(e)
            v = g.head[e ^ 1]
        delta = min(g.res[e] for e in path)
        for e in path:
            g.res[e] -= delta
            g.res[e ^ 1] += delta
        remaining -= delta
    else:
        raise NumericFailure("successive shortest paths did not terminate")

    flows = {key: g.res[e ^ 1] for key, e in var_edges.items() if g.res[e ^ 1] > tol}
    pushed = {i: 0.0 for i in origins}
    for (i, _), x in flows.items():
        pushed[i] += x
    return flows, pushed


def _find_cycle(adj: dict) -> list | None:
    """Return the node sequence of some cycle in an undirected simple graph."""
    visited = set()
    for root in sorted(adj):
        if root in visited:
            continue
        parent = {root: None}
        stack = [(root, iter(sorted(adj[root])))]
        visited.add(root)
        while stack:
            u, it = stack[-1]
            for v in it:
                if v == parent[u]:
                    continue
                if v in parent:
                    cycle = [v]
                    w = u
                    while w != v:
                        cycle.append(w)
                        w = parent[w]
                    return cycle
                parent[v] = u
                visited.add(v)
                stack.append((v, iter(sorted(adj[v]))))
                break
            else:
                stack.pop()
    return None


_SLACK = (2, -1)


def _to_vertex(flows: dict, instance: SolverInstance, tol: float) -> dict:
    """Cancel cycles in the flow support until it is a forest.

    Destination slack is modeled as a zero-cost edge from a dummy supply
    node, so an alternating path between two unsaturated destinations also
    counts as a cycle. Each step zeroes at least one edge and never raises
    the total cost.
    """
    inflow: dict[int, float] = {}
    for (_, j), x in flows.items():
        inflow[j] = inflow.get(j, 0.0) + x

    # nodes: (0, origin), (1, destination), _SLACK
    amount: dict[tuple, float] = {}
    cost: dict[tuple, float] = {}
    var_cost = {(i, j): a for i, j, a in instance.variables}
    for (i, j), x in flows.items():
        e = ((0, i), (1, j))
        amount[e] = x
        cost[e] = var_cost[(i, j)]
    for j, c in instance.capacities.items():
        s = c - inflow.get(j, 0.0)
        if s > tol:
            e = (_SLACK, (1, j))
            amount[e] = s
            cost[e] = 0.0

    adj: dict[tuple, set] = {}
    for a, b in amount:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)

    def key(u, v):
        return (u, v) if u[0] != 1 else (v, u)

    while True:
        cycle = _find_cycle(adj)
        if cycle is None:
            break
        edges = [key(cycle[t], cycle[(t + 1) % len(cycle)]) for t in range(len(cycle))]
        signs = [1 if t % 2 == 0 else -1 for t in range(len(edges))]
        gain = math.fsum(s * cost[e] for s, e in zip(signs, edges))
        scale = 1.0 + max(abs(cost[e]) for e in edges)
        if gain < -1e-12 * scale:
            direction = 1
        elif gain > 1e-12 * scale:
            direction = -1
        else:
            # cost-neutral: favor the lowest (destination, origin) real pair
            real = [(e[1][1], e[0][1], s) for s, e in zip(signs, edges) if e[0] != _SLACK]
            direction = min(real)[2] if real else 1
        theta = min(amount[e] for s, e in zip(signs, edges) if s * direction < 0)
        for s, e in zip(signs, edges):
            if s * direction > 0:
                amount[e] += theta
            else:
                amount[e] -= theta
                if amount[e] <= tol:
                    del amount[e]
                    adj[e[0]].discard(e[1])
                    adj[e[1]].discard(e[0])

    return {(a[1], b[1]): x for (a, b), x in amount.items() if a != _SLACK}


def solve(instance: SolverInstance) -> EvacuationPlan:
    """Minimum-cost evacuation plan for ``instance``.

    Returns an INFEASIBLE plan (with per-origin ``shortfall``) when the
    demand cannot be routed. ``objective_att`` is total cost divided by
    total evacuated plus ``epsilon``.
    """
    tol = _tolerance(instance)
    origins = [i for i in instance.origins if instance.demands[i] > 0]
    flows, pushed = _min_cost_flow(instance, origins, tol)

    shortfall = {}
    for i in origins:
        gap = instance.demands[i] - pushed[i]
        if gap > 1e-9 * max(1.0, instance.demands[i]):
            shortfall[i] = gap
    if shortfall:
        return make_plan((), instance, PlanStatus.INFEASIBLE, shortfall)

    flows = _to_vertex(flows, instance, tol)
    var_cost = {(i, j): a for i, j, a in instance.variables}
    return make_plan((Flow(i, j, x, var_cost[(i, j)]) for (i, j), x in flows.items()
                      if x > tol), instance)
