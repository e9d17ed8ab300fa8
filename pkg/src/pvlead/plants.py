"""Synthetic PV plant fleet and daily production ground truth.

Daily energy is irradiance-proportional with a temperature derating kink
above a threshold and multiplicative noise:

    y = capacity * eta0 * (ssr / ssr_ref) * (1 - slope * max(0, T - T_d)) * (1 + noise)

clipped at zero. The kink is deliberately outside the linear model class so
the nonlinear-regressor advantage is reproducible on synthetic data.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import DateMismatchError, ParseError, SchemaError
from .grids import SiteSeries
from .solar import clear_sky_insolation

NORTH_SOUTH_LAT = 44.0 + 50.0 / 60.0  # 44 deg 50 min
DEFAULT_SSR_REF = 6000.0  # Wh/m2/day normalization for rated efficiency

NORTH = "North"
SOUTH = "South"

# region sampling boxes (lat_min, lat_max, lon_min, lon_max), Italy-like
_NORTH_BOX = (44.9, 46.4, 7.5, 12.8)
_SOUTH_BOX = (37.0, 44.5, 8.5, 17.5)

# paper-scale fleet aggregates
NORTH_PLANTS = 34
NORTH_CAPACITY_MW = 127.0
SOUTH_PLANTS = 31
SOUTH_CAPACITY_MW = 288.0

MIN_RECORD_DAYS = 550
MAX_RECORD_DAYS = 731


def region_of(lat: float) -> str:
    return NORTH if lat > NORTH_SOUTH_LAT else SOUTH


@dataclass(frozen=True)
class Plant:
    plant_id: str
    lat: float
    lon: float
    capacity_mw: float
    rated_efficiency: float
    derate_threshold_c: float = 25.0
    derate_slope_per_c: float = 0.0
    noise_std: float = 0.0

    def __post_init__(self):
        if self.capacity_mw <= 0:
            raise ValueError("capacity must be positive")
        if not (0.0 < self.rated_efficiency <= 1.0):
            raise ValueError("rated_efficiency must lie in (0, 1]")
        if not (0.0 <= self.derate_slope_per_c < 0.05):
            raise ValueError("derate_slope_per_c must lie in [0, 0.05)")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")

    @property
    def region(self) -> str:
        return region_of(self.lat)


@dataclass(frozen=True)
class Fleet:
    plants: tuple[Plant, ...]

    def __post_init__(self):
        object.__setattr__(self, "plants", tuple(self.plants))
        ids = [p.plant_id for p in self.plants]
        if len(set(ids)) != len(ids):
            raise ValueError("plant ids must be unique")

    def __len__(self) -> int:
        return len(self.plants)

    def region_count(self, region: str) -> int:
        return sum(1 for p in self.plants if p.region == region)

    def region_capacity(self, region: str) -> float:
        return float(sum(p.capacity_mw for p in self.plants if p.region == region))


@dataclass(frozen=True)
class ProductionSeries:
    plant_id: str
    dates: tuple[date, ...]
    values: np.ndarray  # MWh/day

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (len(self.dates),):
            raise ValueError("one value per date required")
        if np.any(vals < 0):
            raise ValueError("production must be >= 0")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


def simulate_production(
    plant: Plant,
    ssr: SiteSeries,
    t2m: SiteSeries,
    seed: int,
    ssr_ref: float = DEFAULT_SSR_REF,
) -> ProductionSeries:
    """Ground-truth daily energy for a plant from site-level weather."""
    if ssr.dates != t2m.dates:
        raise DateMismatchError("ssr and t2m site series must share dates")
    if ssr.lead_days != 0 or t2m.lead_days != 0:
        raise ValueError("production simulation uses observation series (lead 0)")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    derate = 1.0 - plant.derate_slope_per_c * np.maximum(
        0.0, t2m.values - plant.derate_threshold_c
    )
    noise = plant.noise_std * rng.standard_normal(len(ssr.dates))
    y = (
        plant.capacity_mw
        * plant.rated_efficiency
        * (ssr.values / ssr_ref)
        * derate
        * (1.0 + noise)
    )
    return ProductionSeries(plant.plant_id, ssr.dates, np.maximum(y, 0.0))


def normalized_production(plant: Plant, dates, values, ssr_ref: float = DEFAULT_SSR_REF) -> np.ndarray:
    """Daily energy as a fraction of the plant's clear-sky production."""
    doy = np.array([d.timetuple().tm_yday for d in dates])
    ceiling = clear_sky_insolation(plant.lat, doy)
    denom = plant.capacity_mw * plant.rated_efficiency * ceiling / ssr_ref
    return np.asarray(values, dtype=np.float64) / denom


def _sample_region(
    rng: np.random.Generator,
    prefix: str,
    count: int,
    total_capacity: float,
    box: tuple[float, float, float, float],
) -> list[Plant]:
    lat_lo, lat_hi, lon_lo, lon_hi = box
    lats = rng.uniform(lat_lo, lat_hi, count)
    lons = rng.uniform(lon_lo, lon_hi, count)
    raw = rng.lognormal(mean=0.0, sigma=0.5, size=count)
    caps = raw / raw.sum() * total_capacity
    eff = rng.uniform(0.12, 0.18, count)
    slope = rng.uniform(0.010, 0.030, count)
    noise = rng.uniform(0.020, 0.040, count)
    return [
        Plant(
            plant_id=f"{prefix}{i + 1:02d}",
            lat=float(lats[i]),
            lon=float(lons[i]),
            capacity_mw=float(caps[i]),
            rated_efficiency=float(eff[i]),
            derate_slope_per_c=float(slope[i]),
            noise_std=float(noise[i]),
        )
        for i in range(count)
    ]


def build_default_fleet(seed: int) -> Fleet:
    """65 plants matching the reference regional counts and capacity totals."""
    north_ss, south_ss = np.random.SeedSequence(seed).spawn(2)
    north = _sample_region(
        np.random.Generator(np.random.PCG64(north_ss)),
        "N", NORTH_PLANTS, NORTH_CAPACITY_MW, _NORTH_BOX,
    )
    south = _sample_region(
        np.random.Generator(np.random.PCG64(south_ss)),
        "S", SOUTH_PLANTS, SOUTH_CAPACITY_MW, _SOUTH_BOX,
    )
    return Fleet(tuple(north + south))


def sample_record_window(rng: np.random.Generator, n_available: int) -> tuple[int, int]:
    """(start, length) of a plant's production record inside the period.

    Lengths mimic the 550..731-day records; shorter synthetic periods fall
    back to whatever is available.
    """
    lo = min(MIN_RECORD_DAYS, n_available)
    hi = min(MAX_RECORD_DAYS, n_available)
    length = int(rng.integers(lo, hi + 1))
    start = int(rng.integers(0, n_available - length + 1))
    return start, length


_FLEET_COLUMNS = (
    "id",
    "lat",
    "lon",
    "capacity_mw",
    "rated_efficiency",
    "derate_threshold_c",
    "derate_slope_per_c",
    "noise_std",
    "region",
)


def store_fleet(fleet: Fleet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(_FLEET_COLUMNS) + "\n")
        for p in fleet.plants:
            fh.write(
                f"{p.plant_id},{p.lat!r},{p.lon!r},{p.capacity_mw!r},"
                f"{p.rated_efficiency!r},{p.derate_threshold_c!r},"
                f"{p.derate_slope_per_c!r},{p.noise_std!r},{p.region}\n"
            )


def load_fleet(path) -> Fleet:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].split(",") != list(_FLEET_COLUMNS):
        raise SchemaError(f"{path}: expected fleet header {','.join(_FLEET_COLUMNS)!r}")
    plants = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(_FLEET_COLUMNS):
            raise ParseError(f"{path}:{lineno}: expected {len(_FLEET_COLUMNS)} fields")
        try:
            plant = Plant(
                plant_id=parts[0],
                lat=float(parts[1]),
                lon=float(parts[2]),
                capacity_mw=float(parts[3]),
                rated_efficiency=float(parts[4]),
                derate_threshold_c=float(parts[5]),
                derate_slope_per_c=float(parts[6]),
                noise_std=float(parts[7]),
            )
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        if parts[8] != plant.region:
            raise ParseError(
                f"{path}:{lineno}: region label {parts[8]!r} contradicts latitude {plant.lat}"
            )
        plants.append(plant)
    return Fleet(tuple(plants))


def store_production(series: list[ProductionSeries], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("plant_id,date,mwh\n")
        for s in series:
            for d, v in zip(s.dates, s.values):
                fh.write(f"{s.plant_id},{d.isoformat()},{v!r}\n")


def load_production(path) -> dict[str, ProductionSeries]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "plant_id,date,mwh":
        raise SchemaError(f"{path}: expected header 'plant_id,date,mwh'")
    acc: dict[str, tuple[list[date], list[float]]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 3 fields")
        try:
            day = date.fromisoformat(parts[1])
            val = float(parts[2])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        acc.setdefault(parts[0], ([], []))[0].append(day)
        acc[parts[0]][1].append(val)
    out = {}
    for pid, (dates, vals) in acc.items():
        try:
            out[pid] = ProductionSeries(pid, tuple(dates), np.array(vals))
        except ValueError as exc:
            raise ParseError(f"{path}: plant {pid}: {exc}") from exc
    return out
