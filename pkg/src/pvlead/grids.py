"""Regular lat/lon grids of daily weather values and their basic statistics.

Grids are node-registered: the value at index (i, j) sits exactly at
``(lat_min + i*dlat, lon_min + j*dlon)``, and site extraction uses bilinear
weights over the four enclosing nodes.

Field files are plain columnar text (UTF-8, LF):

    line 1: variable,lead_days,lat_min,lat_max,lon_min,lon_max,n_lat,n_lon
    line 2: the eight values for those columns
    line 3: date,i_lat,i_lon,value
    rows:   one per (day, node), date-major then lat-major then lon-major

Values are written with ``repr`` so a store/load round trip is bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from .errors import (
    DegenerateCellError,
    OutOfDomainError,
    ParseError,
    SchemaError,
    ShapeMismatchError,
    ZeroVarianceError,
)

SSR = "ssr"  # surface solar radiation, Wh/m2/day
T2M = "t2m"  # 2-m air temperature, degC

VARIABLES = (SSR, T2M)

_HEADER_COLUMNS = (
    "variable",
    "lead_days",
    "lat_min",
    "lat_max",
    "lon_min",
    "lon_max",
    "n_lat",
    "n_lon",
)
_ROW_COLUMNS = ("date", "i_lat", "i_lon", "value")

KELVIN_OFFSET = 273.15


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a regular node-registered lat/lon grid."""

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    n_lat: int
    n_lon: int

    def __post_init__(self):
        if not (self.lat_min < self.lat_max and self.lon_min < self.lon_max):
            raise ValueError("grid bounds must satisfy lat_min < lat_max and lon_min < lon_max")
        if self.n_lat < 2 or self.n_lon < 2:
            raise ValueError("grid needs at least 2 nodes per axis")

    @property
    def dlat(self) -> float:
        return (self.lat_max - self.lat_min) / (self.n_lat - 1)

    @property
    def dlon(self) -> float:
        return (self.lon_max - self.lon_min) / (self.n_lon - 1)

    @property
    def lats(self) -> np.ndarray:
        return self.lat_min + self.dlat * np.arange(self.n_lat)

    @property
    def lons(self) -> np.ndarray:
        return self.lon_min + self.dlon * np.arange(self.n_lon)

    def contains(self, lat: float, lon: float) -> bool:
        return (
            self.lat_min <= lat <= self.lat_max and self.lon_min <= lon <= self.lon_max
        )


def _check_daily(dates: tuple[date, ...]) -> None:
    for prev, cur in zip(dates, dates[1:]):
        if cur - prev != timedelta(days=1):
            raise ValueError(f"dates must increase in daily steps; got {prev} -> {cur}")


@dataclass(frozen=True)
class GridField:
    """Daily values of one variable on a grid, observed or at a forecast lead.

    ``values`` has shape (n_days, n_lat, n_lon) and is frozen after
    construction; every operation on fields is a pure function.
    """

    spec: GridSpec
    variable: str
    dates: tuple[date, ...]
    values: np.ndarray
    lead_days: int = 0

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ValueError(f"unknown variable {self.variable!r}")
        if self.lead_days < 0:
            raise ValueError("lead_days must be >= 0")
        object.__setattr__(self, "dates", tuple(self.dates))
        _check_daily(self.dates)
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        expected = (len(self.dates), self.spec.n_lat, self.spec.n_lon)
        if vals.shape != expected:
            raise ValueError(f"values shape {vals.shape} != {expected}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        if self.variable == SSR and np.any(vals < 0):
            raise ValueError("SSR values must be >= 0")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def n_days(self) -> int:
        return len(self.dates)

    def day_index(self, day: date) -> int:
        offset = (day - self.dates[0]).days
        if offset < 0 or offset >= self.n_days:
            raise KeyError(f"{day} not covered by field ({self.dates[0]}..{self.dates[-1]})")
        return offset


@dataclass(frozen=True)
class SiteSeries:
    """Daily values of one variable interpolated to a point location."""

    lat: float
    lon: float
    variable: str
    dates: tuple[date, ...]
    values: np.ndarray
    lead_days: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (len(self.dates),):
            raise ValueError("one value per date required")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


def bilinear_interpolate(fld: GridField, lat: float, lon: float) -> SiteSeries:
    """Extract a site series using the four nodes enclosing (lat, lon).

    Weights are index-space bilinear weights on the regular grid; the result
    reproduces any function separately linear in lat and lon exactly, and
    always lies within [min, max] of the four surrounding node values.
    """
    spec = fld.spec
    if not spec.contains(lat, lon):
        raise OutOfDomainError(
            f"({lat}, {lon}) outside grid nodes "
            f"[{spec.lat_min}, {spec.lat_max}] x [{spec.lon_min}, {spec.lon_max}]"
        )
    fi = (lat - spec.lat_min) / spec.dlat
    fj = (lon - spec.lon_min) / spec.dlon
    i0 = min(int(fi), spec.n_lat - 2)
    j0 = min(int(fj), spec.n_lon - 2)
    wi = fi - i0
    wj = fj - j0
    v = fld.values
    series = (
        (1.0 - wi) * (1.0 - wj) * v[:, i0, j0]
        + (1.0 - wi) * wj * v[:, i0, j0 + 1]
        + wi * (1.0 - wj) * v[:, i0 + 1, j0]
        + wi * wj * v[:, i0 + 1, j0 + 1]
    )
    return SiteSeries(lat, lon, fld.variable, fld.dates, series, fld.lead_days)


def coefficient_of_variation(fld: GridField, mean_floor: float = 1e-6) -> np.ndarray:
    """Per-node ratio of temporal population std to temporal mean.

    Temperature is shifted to Kelvin first so means sit far from zero;
    SSR is used as stored. Raises DegenerateCellError if any node mean
    falls below ``mean_floor``.
    """
    vals = fld.values
    if fld.variable == T2M:
        vals = vals + KELVIN_OFFSET
    mean = vals.mean(axis=0)
    if np.any(mean < mean_floor):
        i, j = np.unravel_index(int(np.argmin(mean)), mean.shape)
        raise DegenerateCellError(
            f"cell ({i}, {j}) has mean {mean[i, j]:.3e} below floor {mean_floor:.3e}"
        )
    return vals.std(axis=0) / mean


def spatial_correlation(a: GridField, b: GridField, day: date) -> float:
    """Pearson correlation across all grid nodes of one day's two fields."""
    if a.spec != b.spec or a.variable != b.variable:
        raise ShapeMismatchError("fields differ in grid geometry or variable")
    x = a.values[a.day_index(day)].ravel()
    y = b.values[b.day_index(day)].ravel()
    return _pearson_cells(x, y)


def daily_spatial_correlations(a: GridField, b: GridField) -> np.ndarray:
    """Spatial correlation for every date shared by both fields, in date order."""
    if a.spec != b.spec or a.variable != b.variable:
        raise ShapeMismatchError("fields differ in grid geometry or variable")
    shared = sorted(set(a.dates) & set(b.dates))
    if not shared:
        raise ValueError("fields share no dates")
    return np.array([spatial_correlation(a, b, d) for d in shared])


def _pearson_cells(x: np.ndarray, y: np.ndarray) -> float:
    xa = x - x.mean()
    ya = y - y.mean()
    nx = float(np.sqrt(np.dot(xa, xa)))
    ny = float(np.sqrt(np.dot(ya, ya)))
    if nx == 0.0 or ny == 0.0:
        raise ZeroVarianceError("a field is spatially constant on this day")
    return float(np.dot(xa, ya) / (nx * ny))


def store_field(fld: GridField, path) -> None:
    """Write a field in the columnar text format (see module docstring)."""
    spec = fld.spec
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(_HEADER_COLUMNS) + "\n")
        fh.write(
            f"{fld.variable},{fld.lead_days},{spec.lat_min!r},{spec.lat_max!r},"
            f"{spec.lon_min!r},{spec.lon_max!r},{spec.n_lat},{spec.n_lon}\n"
        )
        fh.write(",".join(_ROW_COLUMNS) + "\n")
        vals = fld.values
        for d_idx, day in enumerate(fld.dates):
            iso = day.isoformat()
            plane = vals[d_idx]
            for i in range(spec.n_lat):
                row = plane[i]
                for j in range(spec.n_lon):
                    fh.write(f"{iso},{i},{j},{row[j]!r}\n")


def load_field(path, fmt: str = "columnar") -> GridField:
    """Read a field file, rejecting files with missing or out-of-order rows."""
    if fmt != "columnar":
        raise ValueError(f"unknown field format {fmt!r}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if len(lines) < 3:
        raise SchemaError(f"{path}: truncated file ({len(lines)} lines)")
    header_names = lines[0].split(",")
    missing = [c for c in _HEADER_COLUMNS if c not in header_names]
    if missing:
        raise SchemaError(f"{path}: header missing columns {missing}")
    header_vals = lines[1].split(",")
    if len(header_vals) != len(header_names):
        raise SchemaError(f"{path}: header has {len(header_vals)} values for {len(header_names)} columns")
    rec = dict(zip(header_names, header_vals))
    try:
        variable = rec["variable"]
        lead_days = int(rec["lead_days"])
        spec = GridSpec(
            float(rec["lat_min"]),
            float(rec["lat_max"]),
            float(rec["lon_min"]),
            float(rec["lon_max"]),
            int(rec["n_lat"]),
            int(rec["n_lon"]),
        )
    except ValueError as exc:
        raise SchemaError(f"{path}: bad header value: {exc}") from exc
    if lines[2].split(",") != list(_ROW_COLUMNS):
        raise SchemaError(f"{path}: expected row header {','.join(_ROW_COLUMNS)!r} on line 3")

    rows = lines[3:]
    per_day = spec.n_lat * spec.n_lon
    if len(rows) % per_day != 0 or not rows:
        raise ParseError(
            f"{path}: {len(rows)} data rows is not a whole number of {per_day}-node days"
        )
    n_days = len(rows) // per_day
    values = np.empty((n_days, spec.n_lat, spec.n_lon), dtype=np.float64)
    dates: list[date] = []
    k = 0
    for d_idx in range(n_days):
        day: date | None = None
        for i in range(spec.n_lat):
            for j in range(spec.n_lon):
                lineno = 4 + k
                parts = rows[k].split(",")
                if len(parts) != 4:
                    raise ParseError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
                try:
                    row_day = date.fromisoformat(parts[0])
                    ri, rj = int(parts[1]), int(parts[2])
                    val = float(parts[3])
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: {exc}") from exc
                if day is None:
                    day = row_day
                if (row_day, ri, rj) != (day, i, j):
                    raise ParseError(
                        f"{path}:{lineno}: expected row ({day},{i},{j}), got ({row_day},{ri},{rj})"
                    )
                values[d_idx, i, j] = val
                k += 1
        dates.append(day)
    try:
        return GridField(spec, variable, tuple(dates), values, lead_days)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
