"""Scenario metrics and plot-ready outputs.

EPF is the number of evacuees a destination receives, PTT the travel minutes
to reach it (flow-weighted over origins when several feed it), and ATT the
flow-weighted mean travel time over all evacuees.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from dataclasses import asdict, dataclass

from .errors import UnknownFormat, ValidationError
from .network import RailNetwork
from .solver import EvacuationPlan, Flow, PlanStatus, SolverInstance

FORMATS = ("csv", "json", "geojson")
CSV_HEADER = ("station_id", "epf", "ptt_minutes", "capacity", "saturated")
SATURATION_TOL = 1e-6


@dataclass(frozen=True)
class DestinationRow:
    station_id: str
    epf: float
    ptt_minutes: float
    capacity: float
    saturated: bool
    lat: float
    lon: float


@dataclass(frozen=True)
class OriginRow:
    station_id: str
    demand: float
    evacuated: float
    lat: float
    lon: float


@dataclass(frozen=True)
class FlowRow:
    origin: str
    destination: str
    persons: float
    cost_minutes: float


@dataclass(frozen=True)
class ScenarioReport:
    """Aggregates for one solved scenario.

    ``per_destination`` only lists stations that receive evacuees, sorted by
    EPF descending then station_id. ``epf_stats``/``ptt_stats`` hold
    median, mean, min and max over those rows (None when there are none).
    """

    att_minutes: float
    objective_att_minutes: float
    total_evacuated: float
    per_destination: tuple[DestinationRow, ...]
    per_origin: tuple[OriginRow, ...]
    flows: tuple[FlowRow, ...]
    epf_stats: dict
    ptt_stats: dict

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioReport":
        return cls(
            att_minutes=data["att_minutes"],
            objective_att_minutes=data["objective_att_minutes"],
            total_evacuated=data["total_evacuated"],
            per_destination=tuple(DestinationRow(**r) for r in data["per_destination"]),
            per_origin=tuple(OriginRow(**r) for r in data["per_origin"]),
            flows=tuple(FlowRow(**r) for r in data["flows"]),
            epf_stats=dict(data["epf_stats"]),
            ptt_stats=dict(data["ptt_stats"]),
        )

    def top(self, k: int | None) -> tuple[DestinationRow, ...]:
        if k is None:
            return self.per_destination
        if k < 0:
            raise ValidationError(f"top_k must be >= 0, got {k}")
        return self.per_destination[:k]


def _stats(values: list[float]) -> dict:
    if not values:
        return {"median": None, "mean": None, "min": None, "max": None}
    return {"median": statistics.median(values), "mean": statistics.fmean(values),
            "min": min(values), "max": max(values)}


def summarize(plan: EvacuationPlan, instance: SolverInstance,
              network: RailNetwork) -> ScenarioReport:
    if plan.status is not PlanStatus.OPTIMAL:
        raise ValidationError("cannot summarize a plan that is not OPTIMAL")
    st = network.stations

    epf: dict[int, float] = {}
    weighted: dict[int, list[float]] = {}
    for f in plan.flows:
        epf[f.destination] = epf.get(f.destination, 0.0) + f.persons
        weighted.setdefault(f.destination, []).append(f.persons * f.cost)

    rows = []
    for j, e in epf.items():
        cap = instance.capacities[j]
        rows.append(DestinationRow(
            station_id=st[j].station_id,
            epf=e,
            ptt_minutes=math.fsum(weighted[j]) / e,
            capacity=cap,
            saturated=e >= cap - SATURATION_TOL,
            lat=st[j].lat, lon=st[j].lon))
    rows.sort(key=lambda r: (-r.epf, r.station_id))

    out = plan.outflow()
    origins = tuple(OriginRow(st[i].station_id, instance.demands[i], out.get(i, 0.0),
                              st[i].lat, st[i].lon)
                    for i in sorted(instance.demands, key=lambda i: st[i].station_id))
    flows = tuple(FlowRow(st[f.origin].station_id, st[f.destination].station_id,
                          f.persons, f.cost) for f in plan.flows)
    return ScenarioReport(
        att_minutes=plan.att(),
        objective_att_minutes=plan.objective_att,
        total_evacuated=plan.total_evacuated,
        per_destination=tuple(rows),
        per_origin=origins,
        flows=flows,
        epf_stats=_stats([r.epf for r in rows]),
        ptt_stats=_stats([r.ptt_minutes for r in rows]),
    )


def _csv(report: ScenarioReport, top_k) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in report.top(top_k):
        # repr keeps full precision so downstream sums reproduce the ATT
        writer.writerow([r.station_id, repr(r.epf), repr(r.ptt_minutes), repr(r.capacity),
                         "true" if r.saturated else "false"])
    return buf.getvalue()


def _geojson(report: ScenarioReport, top_k) -> dict:
    features = []
    for o in report.per_origin:
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [o.lon, o.lat]},
            "properties": {"role": "origin", "station_id": o.station_id,
                           "demand": o.demand, "evacuated": o.evacuated},
        })
    dests = report.top(top_k)
    coords = {d.station_id: [d.lon, d.lat] for d in dests}
    for d in dests:
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [d.lon, d.lat]},
            "properties": {"role": "destination", "station_id": d.station_id,
                           "epf": d.epf, "ptt_minutes": d.ptt_minutes,
                           "capacity": d.capacity, "saturated": d.saturated},
        })
    origin_coords = {o.station_id: [o.lon, o.lat] for o in report.per_origin}
    for f in report.flows:
        if f.destination not in coords:
            continue
        features.append({
            "type": "Feature",
            "geometry": {"type": "LineString",
                         "coordinates": [origin_coords[f.origin], coords[f.destination]]},
            "properties": {"role": "flow", "from": f.origin, "to": f.destination,
                           "persons": f.persons, "cost_minutes": f.cost_minutes},
        })
    return {"type": "FeatureCollection", "features": features}


def emit(report: ScenarioReport, format: str = "csv", top_k: int | None = None) -> str:
    """Serialize ``report`` as csv, json or geojson text."""
    if format == "csv":
        return _csv(report, top_k)
    if format == "json":
        data = report.to_dict()
        if top_k is not None:
            data["per_destination"] = [asdict(r) for r in report.top(top_k)]
        return json.dumps(data, indent=2) + "\n"
    if format == "geojson":
        return json.dumps(_geojson(report, top_k), indent=2) + "\n"
    raise UnknownFormat(f"unknown format {format!r}; expected one of {', '.join(FORMATS)}")


def parse_json(text: str) -> ScenarioReport:
    return ScenarioReport.from_dict(json.loads(text))


def format_table(report: ScenarioReport, top_k: int | None = 10) -> str:
    """Human-readable summary; persons rounded to integers, minutes to 0.1."""
    lines = [f"evacuated {report.total_evacuated:,.0f} persons, "
             f"ATT {report.att_minutes:.1f} min"]
    lines.append(f"{'station':<16}{'EPF':>10}{'PTT':>8}{'capacity':>11}  saturated")
    for r in report.top(top_k):
        lines.append(f"{r.station_id:<16}{r.epf:>10,.0f}{r.ptt_minutes:>8.1f}"
                     f"{r.capacity:>11,.0f}  {'yes' if r.saturated else 'no'}")
    return "\n".join(lines)


def plan_to_dict(plan: EvacuationPlan, network: RailNetwork) -> dict:
    """plan.json payload with station ids instead of indices."""
    ids = network.station_ids
    data = {
        "status": plan.status.value,
        "objective_att_minutes": plan.objective_att,
        "total_evacuated": plan.total_evacuated,
        "flows": [{"from": ids[f.origin], "to": ids[f.destination],
                   "persons": f.persons, "cost_minutes": f.cost} for f in plan.flows],
    }
    if plan.shortfall:
        data["shortfall"] = {ids[i]: x for i, x in sorted(plan.shortfall.items())}
    return data


def plan_from_dict(data: dict, network: RailNetwork) -> EvacuationPlan:
    try:
        flows = tuple(Flow(network.index(f["from"]), network.index(f["to"]),
                           float(f["persons"]), float(f["cost_minutes"]))
                      for f in data["flows"])
        shortfall = {network.index(k): float(v)
                     for k, v in data.get("shortfall", {}).items()}
        return EvacuationPlan(flows, float(data["objective_att_minutes"]),
                              float(data["total_evacuated"]), PlanStatus(data["status"]),
                              shortfall)
    except ValidationError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed plan: {exc}") from None
