"""Disruption scenarios and their translation into solver instances."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .cost import CostModel
from .errors import InfeasiblePrecheck, ValidationError
from .network import RailNetwork
from .solver import SolverInstance

DEFAULT_T_LM = 30.0
DEFAULT_CAPACITY_RATIO = 1.5
DEFAULT_OPERATING_HOURS = 20.0


def derive_window_load(daily: float, operating_hours: float = DEFAULT_OPERATING_HOURS,
                       t_lm: float = DEFAULT_T_LM) -> float:
    """Passengers present during a ``t_lm``-minute window, assuming a uniform
    daily profile over ``operating_hours``.

    With 20 operating hours and a 30 minute window this is ``daily / 40``.
    """
    if daily < 0:
        raise ValidationError(f"daily passengers must be >= 0, got {daily}")
    if not operating_hours > 0:
        raise ValidationError(f"operating hours must be > 0, got {operating_hours}")
    if not t_lm > 0:
        raise ValidationError(f"t_lm must be > 0, got {t_lm}")
    return daily * t_lm / (operating_hours * 60.0)


@dataclass(frozen=True)
class Scenario:
    """A disruption: blocked stations, window length, loads and capacities.

    ``loads`` replaces the derived window load of the listed stations.
    ``capacity_overrides`` sets the residual capacity (persons) of a station
    directly; ``capacity_ratio_overrides`` replaces the scalar ratio.
    """

    blocked: frozenset[str]
    t_lm: float = DEFAULT_T_LM
    capacity_ratio: float = DEFAULT_CAPACITY_RATIO
    operating_hours: float = DEFAULT_OPERATING_HOURS
    capacity_ratio_overrides: Mapping[str, float] = field(default_factory=dict)
    capacity_overrides: Mapping[str, float] = field(default_factory=dict)
    loads: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "blocked", frozenset(self.blocked))
        if not self.blocked:
            raise ValidationError("scenario must block at least one station")
        if not (self.t_lm > 0 and math.isfinite(self.t_lm)):
            raise ValidationError(f"t_lm must be > 0, got {self.t_lm}")
        if not (self.operating_hours > 0 and math.isfinite(self.operating_hours)):
            raise ValidationError(f"operating hours must be > 0, got {self.operating_hours}")
        if not self.capacity_ratio > 1:
            raise ValidationError(
                f"capacity ratio must be greater than 1, got {self.capacity_ratio}")
        for sid, x in self.capacity_ratio_overrides.items():
            if not x > 1:
                raise ValidationError(
                    f"capacity ratio for {sid!r} must be greater than 1, got {x}")
        for sid, c in self.capacity_overrides.items():
            if not (c >= 0 and math.isfinite(c)):
                raise ValidationError(f"capacity override for {sid!r} must be >= 0, got {c}")
        for sid, y in self.loads.items():
            if not (y >= 0 and math.isfinite(y)):
                raise ValidationError(f"load for {sid!r} must be >= 0, got {y}")

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        known = {"blocked", "t_lm_minutes", "capacity_ratio", "capacity_ratio_overrides",
                 "capacity_overrides", "loads", "operating_hours"}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown scenario field(s): {', '.join(sorted(unknown))}")
        if "blocked" not in data or not isinstance(data["blocked"], list):
            raise ValidationError("scenario needs a 'blocked' list of station ids")
        try:
            return cls(
                blocked=frozenset(str(s) for s in data["blocked"]),
                t_lm=float(data.get("t_lm_minutes", DEFAULT_T_LM)),
                capacity_ratio=float(data.get("capacity_ratio", DEFAULT_CAPACITY_RATIO)),
                operating_hours=float(data.get("operating_hours", DEFAULT_OPERATING_HOURS)),
                capacity_ratio_overrides={k: float(v) for k, v in
                                          data.get("capacity_ratio_overrides", {}).items()},
                capacity_overrides={k: float(v) for k, v in
                                    data.get("capacity_overrides", {}).items()},
                loads={k: float(v) for k, v in data.get("loads", {}).items()},
            )
        except (TypeError, AttributeError) as exc:
            raise ValidationError(f"malformed scenario: {exc}") from None

    @classmethod
    def from_json(cls, path) -> "Scenario":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ValidationError("file not found", path=path) from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc.msg}", path=path, line=exc.lineno) from None
        if not isinstance(data, dict):
            raise ValidationError("scenario must be a JSON object", path=path)
        try:
            return cls.from_dict(data)
        except ValidationError as exc:
            raise ValidationError(str(exc), path=path) from None

    def to_dict(self) -> dict:
        return {
            "blocked": sorted(self.blocked),
            "t_lm_minutes": self.t_lm,
            "capacity_ratio": self.capacity_ratio,
            "capacity_ratio_overrides": dict(sorted(self.capacity_ratio_overrides.items())),
            "capacity_overrides": dict(sorted(self.capacity_overrides.items())),
            "loads": dict(sorted(self.loads.items())),
            "operating_hours": self.operating_hours,
        }

    def validate(self, network: RailNetwork) -> None:
        """Check that every referenced station exists in ``network``."""
        for label, ids in (("blocked", self.blocked),
                           ("capacity_ratio_overrides", self.capacity_ratio_overrides),
                           ("capacity_overrides", self.capacity_overrides),
                           ("loads", self.loads)):
            for sid in sorted(ids):
                if sid not in network.index_of:
                    raise ValidationError(f"{label}: unknown station {sid!r}")

    def blocked_mask(self, network: RailNetwork) -> np.ndarray:
        mask = np.zeros(network.n, dtype=bool)
        for sid in self.blocked:
            mask[network.index(sid)] = True
        return mask

    def loads_y(self, network: RailNetwork) -> np.ndarray:
        """Per-station persons within the window (derived unless supplied)."""
        y = np.array([derive_window_load(d, self.operating_hours, self.t_lm)
                      for d in network.daily_passengers])
        for sid, load in self.loads.items():
            y[network.index(sid)] = load
        return y

    def capacity_ratio_x(self, network: RailNetwork) -> np.ndarray:
        x = np.full(network.n, self.capacity_ratio)
        for sid, ratio in self.capacity_ratio_overrides.items():
            x[network.index(sid)] = ratio
        return x

    def residual_capacity(self, network: RailNetwork) -> np.ndarray:
        """Extra persons each station can absorb, ``(x - 1) * y``.

        Blocked stations absorb nothing; explicit overrides win otherwise.
        """
        c = (self.capacity_ratio_x(network) - 1.0) * self.loads_y(network)
        for sid, cap in self.capacity_overrides.items():
            c[network.index(sid)] = cap
        c[self.blocked_mask(network)] = 0.0
        return c


def build_solver_inputs(network: RailNetwork, cost: CostModel, scenario: Scenario,
                        epsilon: float = 1e-6) -> SolverInstance:
    """Translate a scenario into a transportation instance.

    Origins are blocked stations with a positive load. An origin's candidate
    destinations are the non-blocked stations it can reach within the window.
    Raises InfeasiblePrecheck when some loaded origin has no candidate, or
    when the total load exceeds the capacity of all candidates together.
    """
    scenario.validate(network)
    if cost.n != network.n:
        raise ValidationError(f"cost model has n={cost.n}, network has n={network.n}")
    if cost.t_lm != scenario.t_lm:
        raise ValidationError(
            f"scenario window {scenario.t_lm} min differs from cost model window {cost.t_lm} min")

    blocked = scenario.blocked_mask(network)
    y = scenario.loads_y(network)
    c = scenario.residual_capacity(network)
    reach = cost.reachable

    origins = [i for i in np.flatnonzero(blocked) if y[i] > 0]
    variables = []
    union: set[int] = set()
    diagnostics = {}
    for i in origins:
        dests = [int(j) for j in np.flatnonzero(reach[i] & ~blocked) if j != i]
        union.update(dests)
        variables.extend((int(i), j, float(cost.a_cost[i, j])) for j in dests)
        diagnostics[network.stations[i].station_id] = {
            "load": float(y[i]),
            "candidates": len(dests),
            "reachable_capacity": float(sum(c[j] for j in dests)),
        }

    stranded = [sid for sid, d in diagnostics.items() if d["candidates"] == 0]
    if stranded:
        raise InfeasiblePrecheck(
            f"no destination reachable within {scenario.t_lm:g} min from: "
            + ", ".join(stranded), diagnostics)
    total_load = float(sum(y[i] for i in origins))
    total_cap = float(sum(c[j] for j in union))
    if total_load > total_cap:
        raise InfeasiblePrecheck(
            f"total load {total_load:.6g} exceeds reachable capacity {total_cap:.6g}",
            diagnostics)

    return SolverInstance(
        variables=tuple(variables),
        demands={int(i): float(y[i]) for i in origins},
        capacities={j: float(c[j]) for j in sorted(union)},
        epsilon=epsilon,
    )
