"""Seeded synthetic networks in the loader's CSV format."""

from __future__ import annotations

import io
import csv
from pathlib import Path

import numpy as np

from .errors import ValidationError

# Bounding box roughly covering central Greater Tokyo.
LAT_RANGE = (35.55, 35.80)
LON_RANGE = (139.55, 139.90)


def generate_tables(seed: int = 42, n_stations: int = 10, n_lines: int = 2,
                    n_operators: int | None = None) -> dict[str, str]:
    """Return ``{"stations.csv": text, "lines.csv": text, "passengers.csv": text}``.

    Lines are simple paths that step to one of the nearest unused stations,
    which keeps them geographically plausible. Daily passenger counts are
    log-normal. The same arguments always produce the same text.
    """
    if n_stations < 2:
        raise ValidationError(f"n_stations must be >= 2, got {n_stations}")
    if n_lines < 1:
        raise ValidationError(f"n_lines must be >= 1, got {n_lines}")
    if n_operators is None:
        n_operators = min(n_lines, 3)
    if n_operators < 1:
        raise ValidationError(f"n_operators must be >= 1, got {n_operators}")

    rng = np.random.default_rng(seed)
    width = len(str(n_stations - 1))
    ids = [f"S{k:0{width}d}" for k in range(n_stations)]
    lat = np.round(rng.uniform(*LAT_RANGE, n_stations), 6)
    lon = np.round(rng.uniform(*LON_RANGE, n_stations), 6)
    operators = [f"OP{k:02d}" for k in range(n_operators)]
    station_op = rng.integers(0, n_operators, n_stations)
    daily = np.rint(rng.lognormal(mean=10.0, sigma=1.0, size=n_stations)).astype(int)

    # planar approximation is enough to pick neighbors
    xy = np.column_stack([lat, lon * np.cos(np.radians(np.mean(LAT_RANGE)))])
    typical = max(3, 2 * n_stations // n_lines)
    lines = []
    for k in range(n_lines):
        length = int(rng.integers(2, min(n_stations, typical) + 1))
        current = int(rng.integers(n_stations))
        stops = [current]
        used = {current}
        while len(stops) < length:
            d = np.hypot(*(xy - xy[current]).T)
            d[list(used)] = np.inf
            nearest = np.argsort(d, kind="stable")[:3]
            nearest = nearest[np.isfinite(d[nearest])]
            if nearest.size == 0:
                break
            current = int(rng.choice(nearest))
            stops.append(current)
            used.add(current)
        lines.append((f"L{k:03d}", operators[k % n_operators], stops))

    def table(header, rows):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()

    return {
        "stations.csv": table(
            ("station_id", "name", "operator", "lat", "lon"),
            ((ids[i], f"Station {i}", operators[station_op[i]], f"{lat[i]:.6f}", f"{lon[i]:.6f}")
             for i in range(n_stations))),
        "lines.csv": table(
            ("line_id", "line_name", "operator", "seq", "station_id"),
            ((lid, f"Line {lid}", op, seq, ids[s])
             for lid, op, stops in lines for seq, s in enumerate(stops, start=1))),
        "passengers.csv": table(
            ("station_id", "daily_passengers"),
            ((ids[i], int(daily[i])) for i in range(n_stations))),
    }


def generate(out_dir, seed: int = 42, n_stations: int = 10, n_lines: int = 2,
             n_operators: int | None = None) -> dict[str, Path]:
    """Write the generated tables into ``out_dir`` and return their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, text in generate_tables(seed, n_stations, n_lines, n_operators).items():
        path = out_dir / name
        path.write_bytes(text.encode("utf-8"))
        paths[name] = path
    return paths
