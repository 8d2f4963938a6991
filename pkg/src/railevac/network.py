"""Station/line/passenger ingestion and the immutable railway graph.

Three CSV files describe a network:

* ``stations.csv``   -- ``station_id,name,operator,lat,lon``
* ``lines.csv``      -- ``line_id,line_name,operator,seq,station_id``
* ``passengers.csv`` -- ``station_id,daily_passengers``

Matrix row/column order is the sorted order of ``station_id``, independent of
file order, so every matrix built from a network is reproducible.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import ValidationError

log = logging.getLogger(__name__)

STATION_COLUMNS = ("station_id", "name", "operator", "lat", "lon")
LINE_COLUMNS = ("line_id", "line_name", "operator", "seq", "station_id")
PASSENGER_COLUMNS = ("station_id", "daily_passengers")


@dataclass(frozen=True)
class Station:
    station_id: str
    name: str
    operator: str
    lat: float
    lon: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValidationError(f"latitude {self.lat} out of range [-90, 90] "
                                  f"for station {self.station_id!r}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValidationError(f"longitude {self.lon} out of range [-180, 180] "
                                  f"for station {self.station_id!r}")


@dataclass(frozen=True)
class RailLine:
    line_id: str
    line_name: str
    operator: str
    stops: tuple[str, ...]

    def __post_init__(self):
        if len(self.stops) < 2:
            raise ValidationError(f"line {self.line_id!r} has fewer than 2 stops")
        for a, b in zip(self.stops, self.stops[1:]):
            if a == b:
                raise ValidationError(
                    f"line {self.line_id!r} repeats station {a!r} on consecutive stops")


@dataclass(frozen=True)
class LoadSummary:
    """Non-fatal findings from :func:`load_network`."""

    n_stations: int = 0
    n_lines: int = 0
    n_operators: int = 0
    missing_passengers: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "n_stations": self.n_stations,
            "n_lines": self.n_lines,
            "n_operators": self.n_operators,
            "missing_passengers": list(self.missing_passengers),
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class RailNetwork:
    """Stations indexed in sorted ``station_id`` order, plus lines and loads.

    ``daily_passengers`` is a read-only float array aligned with ``stations``.
    """

    stations: tuple[Station, ...]
    lines: tuple[RailLine, ...]
    index_of: Mapping[str, int]
    daily_passengers: np.ndarray
    summary: LoadSummary = field(default_factory=LoadSummary, compare=False)

    @classmethod
    def build(cls, stations: Iterable[Station], lines: Iterable[RailLine] = (),
              daily_passengers: Mapping[str, float] | None = None,
              summary: LoadSummary | None = None) -> "RailNetwork":
        """Validate and index in-memory records.

        Stations are re-ordered by ``station_id``; passenger counts not given
        default to zero.
        """
        ordered = sorted(stations, key=lambda s: s.station_id)
        index_of: dict[str, int] = {}
        for i, st in enumerate(ordered):
            if st.station_id in index_of:
                raise ValidationError(f"duplicate station_id {st.station_id!r}")
            index_of[st.station_id] = i
        lines = tuple(lines)
        for line in lines:
            for sid in line.stops:
                if sid not in index_of:
                    raise ValidationError(
                        f"line {line.line_id!r} references unknown station {sid!r}")
        daily = np.zeros(len(ordered))
        for sid, count in (daily_passengers or {}).items():
            if sid not in index_of:
                raise ValidationError(f"passenger count for unknown station {sid!r}")
            if not count >= 0:
                raise ValidationError(f"negative passenger count for station {sid!r}")
            daily[index_of[sid]] = float(count)
        daily.setflags(write=False)
        if summary is None:
            summary = LoadSummary(
                n_stations=len(ordered), n_lines=len(lines),
                n_operators=len({s.operator for s in ordered}))
        return cls(tuple(ordered), lines, MappingProxyType(index_of), daily, summary)

    @property
    def n(self) -> int:
        return len(self.stations)

    @property
    def station_ids(self) -> list[str]:
        return [s.station_id for s in self.stations]

    def index(self, station_id: str) -> int:
        try:
            return self.index_of[station_id]
        except KeyError:
            raise ValidationError(f"unknown station {station_id!r}") from None


def adjacency_pairs(network: RailNetwork) -> set[frozenset[int]]:
    """Unordered index pairs of stations that are consecutive stops on some line."""
    pairs: set[frozenset[int]] = set()
    idx = network.index_of
    for line in network.lines:
        for a, b in zip(line.stops, line.stops[1:]):
            pairs.add(frozenset((idx[a], idx[b])))
    return pairs


def _read_rows(path: Path, columns: tuple[str, ...]):
    """Yield ``(line_number, row)`` for each data row of a CSV file."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in columns if c not in header]
        if missing:
            raise ValidationError(f"missing column(s) {', '.join(missing)}",
                                  path=path, line=1)
        for row in reader:
            if None in row or any(row[c] is None for c in columns):
                raise ValidationError("wrong number of fields", path=path,
                                      line=reader.line_num)
            yield reader.line_num, {c: row[c].strip() for c in columns}


def _parse_float(value: str, path, line, column) -> float:
    try:
        x = float(value)
    except ValueError:
        raise ValidationError(f"not a number: {value!r}", path=path, line=line,
                              column=column) from None
    if not math.isfinite(x):
        raise ValidationError(f"not a finite number: {value!r}", path=path,
                              line=line, column=column)
    return x


def _parse_int(value: str, path, line, column) -> int:
    try:
        return int(value)
    except ValueError:
        raise ValidationError(f"not an integer: {value!r}", path=path, line=line,
                              column=column) from None


def _read_stations(path: Path) -> list[Station]:
    stations = []
    seen: dict[str, int] = {}
    for line, row in _read_rows(path, STATION_COLUMNS):
        sid = row["station_id"]
        if not sid:
            raise ValidationError("empty station_id", path=path, line=line,
                                  column="station_id")
        if sid in seen:
            raise ValidationError(f"duplicate station_id {sid!r} (first on line {seen[sid]})",
                                  path=path, line=line, column="station_id")
        seen[sid] = line
        lat = _parse_float(row["lat"], path, line, "lat")
        lon = _parse_float(row["lon"], path, line, "lon")
        if not -90.0 <= lat <= 90.0:
            raise ValidationError(f"latitude {lat} out of range [-90, 90]",
                                  path=path, line=line, column="lat")
        if not -180.0 <= lon <= 180.0:
            raise ValidationError(f"longitude {lon} out of range [-180, 180]",
                                  path=path, line=line, column="lon")
        stations.append(Station(sid, row["name"], row["operator"], lat, lon))
    return stations


def _read_lines(path: Path, known: set[str]) -> list[RailLine]:
    grouped: dict[str, list[tuple[int, str, int]]] = {}
    meta: dict[str, tuple[str, str]] = {}
    for line, row in _read_rows(path, LINE_COLUMNS):
        lid = row["line_id"]
        if not lid:
            raise ValidationError("empty line_id", path=path, line=line, column="line_id")
        seq = _parse_int(row["seq"], path, line, "seq")
        sid = row["station_id"]
        if sid not in known:
            raise ValidationError(f"unknown station {sid!r}", path=path, line=line,
                                  column="station_id")
        meta.setdefault(lid, (row["line_name"], row["operator"]))
        grouped.setdefault(lid, []).append((seq, sid, line))

    lines = []
    for lid, rows in grouped.items():
        rows.sort()
        for expected, (seq, _, line) in enumerate(rows, start=1):
            if seq != expected:
                raise ValidationError(
                    f"line {lid!r}: expected seq {expected}, found {seq}",
                    path=path, line=line, column="seq")
        stops = tuple(sid for _, sid, _ in rows)
        if len(stops) < 2:
            raise ValidationError(f"line {lid!r} has fewer than 2 stops",
                                  path=path, line=rows[0][2])
        for (_, a, _), (_, b, line) in zip(rows, rows[1:]):
            if a == b:
                raise ValidationError(f"line {lid!r} repeats station {a!r} on consecutive stops",
                                      path=path, line=line, column="station_id")
        name, operator = meta[lid]
        lines.append(RailLine(lid, name, operator, stops))
    lines.sort(key=lambda ln: ln.line_id)
    return lines


def _read_passengers(path: Path, known: set[str]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for line, row in _read_rows(path, PASSENGER_COLUMNS):
        sid = row["station_id"]
        if sid not in known:
            raise ValidationError(f"unknown station {sid!r}", path=path, line=line,
                                  column="station_id")
        if sid in counts:
            raise ValidationError(f"duplicate passenger row for {sid!r}", path=path,
                                  line=line, column="station_id")
        count = _parse_int(row["daily_passengers"], path, line, "daily_passengers")
        if count < 0:
            raise ValidationError(f"negative count {count}", path=path, line=line,
                                  column="daily_passengers")
        counts[sid] = count
    return counts


def load_network(stations_file, lines_file, passengers_file) -> RailNetwork:
    """Read and validate the three network CSV files.

    Raises ValidationError on the first malformed row, duplicate id, unknown
    station reference or out-of-range coordinate. Stations without a passenger
    row get zero daily passengers and are listed in ``network.summary``.
    """
    stations_file, lines_file, passengers_file = map(
        Path, (stations_file, lines_file, passengers_file))
    for p in (stations_file, lines_file, passengers_file):
        if not p.is_file():
            raise ValidationError("file not found", path=p)

    stations = _read_stations(stations_file)
    known = {s.station_id for s in stations}
    lines = _read_lines(lines_file, known)
    counts = _read_passengers(passengers_file, known)

    missing = tuple(sorted(known - counts.keys()))
    warnings = ()
    if missing:
        warnings = (f"{len(missing)} station(s) have no passenger row; "
                    f"daily_passengers set to 0",)
        log.warning(warnings[0])
    summary = LoadSummary(
        n_stations=len(stations), n_lines=len(lines),
        n_operators=len({s.operator for s in stations}),
        missing_passengers=missing, warnings=warnings)
    return RailNetwork.build(stations, lines, counts, summary=summary)
