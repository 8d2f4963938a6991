"""Connection, distance and fused travel-cost matrices.

The fused cost of a station pair is the rail hop time when the two stations
are consecutive stops on some line, and the walking time between them
otherwise. Pairs whose cost exceeds the disruption window are marked
unreachable and never become solver variables.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .network import RailNetwork, adjacency_pairs

EARTH_RADIUS_KM = 6371.0

# Sentinel for pairs outside the disruption window. Always test with
# CostModel.reachable (or np.isfinite), never compare costs against it.
UNREACHABLE = math.inf


def haversine(lat1: float, lon1: float, lat2: float, lon2: float,
              R: float = EARTH_RADIUS_KM) -> float:
    """Great-circle distance in km between two points given in degrees."""
    phi1 = math.radians(lat1)
    phi2 = math.radians(lat2)
    dphi = math.radians(lat1 - lat2)
    dlam = math.radians(lon1 - lon2)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    h = min(1.0, max(0.0, h))
    return 2.0 * R * math.asin(math.sqrt(h))


@dataclass(frozen=True)
class CostParams:
    """Cost-matrix parameters.

    walk_speed_s is in km/h, hop_time and t_lm in minutes.
    """

    t_lm: float = 30.0
    walk_speed_s: float = 5.0
    hop_time: float = 2.0
    earth_radius_R: float = EARTH_RADIUS_KM
    one_transfer_refinement: bool = False

    def __post_init__(self):
        if not (self.walk_speed_s > 0 and math.isfinite(self.walk_speed_s)):
            raise ValidationError(f"walk speed must be > 0, got {self.walk_speed_s}")
        if not (self.hop_time >= 0 and math.isfinite(self.hop_time)):
            raise ValidationError(f"hop time must be >= 0, got {self.hop_time}")
        if not (self.t_lm > 0 and math.isfinite(self.t_lm)):
            raise ValidationError(f"t_lm must be > 0, got {self.t_lm}")
        if not self.earth_radius_R > 0:
            raise ValidationError(f"earth radius must be > 0, got {self.earth_radius_R}")


@dataclass(frozen=True)
class CostModel:
    """The n x n matrices for one network and parameter set.

    ``t_train`` holds the hop time on connected pairs and NaN elsewhere.
    ``a_cost`` is in minutes with UNREACHABLE for pairs beyond ``t_lm``.
    """

    a_con: np.ndarray
    a_dis: np.ndarray
    t_train: np.ndarray
    a_cost: np.ndarray
    params: CostParams

    @property
    def n(self) -> int:
        return self.a_cost.shape[0]

    @property
    def t_lm(self) -> float:
        return self.params.t_lm

    @property
    def reachable(self) -> np.ndarray:
        return np.isfinite(self.a_cost)

    def to_dict(self, station_ids: list[str]) -> dict:
        """Sparse dump of the finite cost entries, row-major."""
        ii, jj = np.nonzero(self.reachable)
        return {
            "n": self.n,
            "station_ids": list(station_ids),
            "params": {
                "t_lm": self.params.t_lm,
                "walk_speed_s": self.params.walk_speed_s,
                "hop_time": self.params.hop_time,
                "earth_radius_R": self.params.earth_radius_R,
                "one_transfer_refinement": self.params.one_transfer_refinement,
            },
            "entries": [{"i": int(i), "j": int(j), "minutes": float(self.a_cost[i, j])}
                        for i, j in zip(ii, jj)],
        }

    def to_json(self, station_ids: list[str]) -> str:
        return json.dumps(self.to_dict(station_ids), indent=1) + "\n"


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def build_connection_matrix(network: RailNetwork) -> np.ndarray:
    """Binary symmetric matrix of rail adjacency with a zero diagonal."""
    n = network.n
    a_con = np.zeros((n, n), dtype=np.int8)
    for pair in adjacency_pairs(network):
        i, j = tuple(pair)
        a_con[i, j] = 1
        a_con[j, i] = 1
    return a_con


def build_distance_matrix(network: RailNetwork, R: float = EARTH_RADIUS_KM) -> np.ndarray:
    """Pairwise Haversine distances in km.

    Each entry is computed independently by :func:`haversine`, so the result
    does not depend on evaluation order.
    """
    n = network.n
    lat = [s.lat for s in network.stations]
    lon = [s.lon for s in network.stations]
    a_dis = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = haversine(lat[i], lon[i], lat[j], lon[j], R)
            a_dis[i, j] = d
            a_dis[j, i] = d
    return a_dis


def fuse_costs(a_con: np.ndarray, a_dis: np.ndarray, params: CostParams) -> np.ndarray:
    """Fuse adjacency and distance into masked travel minutes.

    Connected pairs take ``hop_time``; the remaining off-diagonal pairs take
    walking minutes ``60 * d / walk_speed_s``. The diagonal is zero. Optional
    one-transfer refinement runs before masking, and entries strictly above
    ``t_lm`` become UNREACHABLE.
    """
    connected = a_con.astype(bool)
    walk = 60.0 * a_dis / params.walk_speed_s
    cost = np.where(connected, params.hop_time, walk)
    np.fill_diagonal(cost, 0.0)
    if params.one_transfer_refinement:
        cost = one_transfer(cost)
    return np.where(cost > params.t_lm, UNREACHABLE, cost)


def one_transfer(cost: np.ndarray) -> np.ndarray:
    """``min(a_ij, min_m a_im + a_mj)`` using the unrefined matrix on the right."""
    best = cost.copy()
    for m in range(cost.shape[0]):
        np.minimum(best, cost[:, m, None] + cost[None, m, :], out=best)
    return best


def build_cost_matrix(network: RailNetwork, params: CostParams | None = None) -> CostModel:
    params = params or CostParams()
    a_con = build_connection_matrix(network)
    a_dis = build_distance_matrix(network, params.earth_radius_R)
    t_train = np.where(a_con.astype(bool), params.hop_time, np.nan)
    a_cost = fuse_costs(a_con, a_dis, params)
    return CostModel(_readonly(a_con), _readonly(a_dis), _readonly(t_train),
                     _readonly(a_cost), params)
