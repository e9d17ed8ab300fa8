"""Seeded synthetic weather: observed SSR/temperature fields and their
lead-time-degraded forecast counterparts.

Observations come from a clearness-index model: daily SSR is the clear-sky
ceiling scaled by an AR(1)-in-time, spatially smoothed clearness field, with
cloud variance ramping up toward the northern edge of the domain.
Temperature is a latitude-dependent seasonal sinusoid plus correlated noise.

Forecast degradation is statistical, not dynamical: for each day the
forecast field is rebuilt from the observed spatial anomaly mixed with an
orthogonalized noise field, so the spatial correlation against the
observation hits a per-day target exactly (before the nonnegativity clip).
Targets decay as (1-r)^lead and their day-to-day spread widens by a factor
(1+g) per lead, which is what drives growing forecast error downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import LeadOutOfRangeError
from .grids import SSR, T2M, VARIABLES, GridField, GridSpec
from .solar import clear_sky_insolation


@dataclass(frozen=True)
class WeatherGenConfig:
    """Knobs for the observation generator; defaults give an Italy-like box."""

    grid: GridSpec
    start: date
    end: date
    rng_seed: int
    # clearness-index (cloud) process
    cloud_corr_length_deg: float = 1.5
    cloud_persistence: float = 0.6
    k_min: float = 0.25
    k_max: float = 1.0
    k_mean: float = 0.62
    k_std: float = 0.16
    north_variability_gain: float = 1.8
    # temperature process
    t_mean_base: float = 19.5  # annual-mean degC at the southern edge reference (35N)
    t_mean_per_deg: float = -0.55
    t_amp_base: float = 10.5  # seasonal half-amplitude degC
    t_amp_per_deg: float = 0.0
    t_noise_std: float = 1.8
    t_persistence: float = 0.7
    t_peak_doy: int = 204

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("start must be <= end")
        if not (0.0 < self.k_min <= self.k_max <= 1.0):
            raise ValueError("need 0 < k_min <= k_max <= 1")
        for p in (self.cloud_persistence, self.t_persistence):
            if not (0.0 <= p < 1.0):
                raise ValueError("persistence must lie in [0, 1)")
        if self.north_variability_gain < 1.0:
            raise ValueError("north_variability_gain must be >= 1")

    @property
    def dates(self) -> tuple[date, ...]:
        n = (self.end - self.start).days + 1
        return tuple(self.start + timedelta(days=i) for i in range(n))


@dataclass(frozen=True)
class ForecastDegradationConfig:
    """Per-lead skill decay targets for the synthetic forecast fields."""

    rng_seed: int
    correlation_decay: float = 0.025  # fractional correlation loss per lead day
    iqr_growth: float = 0.20  # relative growth of correlation spread per lead day
    max_lead: int = 10
    corr_spread_lead1: float = 0.01  # std of the per-day correlation target at lead 1
    noise_corr_length_deg: float = 1.5
    ssr_noise_scale: float = 1.0
    t2m_noise_scale: float = 0.5  # temperature forecasts track observations more closely

    def __post_init__(self):
        if not (0.0 <= self.correlation_decay < 1.0):
            raise ValueError("correlation_decay must lie in [0, 1)")
        if self.iqr_growth < 0.0:
            raise ValueError("iqr_growth must be >= 0")
        if self.max_lead < 1:
            raise ValueError("max_lead must be >= 1")

    def noise_scale(self, variable: str) -> float:
        return self.ssr_noise_scale if variable == SSR else self.t2m_noise_scale


def _smoothing_gain(shape: tuple[int, int], sigma_cells: float) -> float:
    """RMS gain of the wrap-mode Gaussian filter on unit white noise."""
    if sigma_cells <= 0.0:
        return 1.0
    impulse = np.zeros(shape)
    impulse[shape[0] // 2, shape[1] // 2] = 1.0
    kernel = gaussian_filter(impulse, sigma_cells, mode="wrap")
    return float(np.sqrt(np.sum(kernel**2)))


def _smooth_unit_noise(rng: np.random.Generator, shape: tuple[int, int],
                       sigma_cells: float, gain: float) -> np.ndarray:
    """Spatially correlated field with (near-)unit marginal variance."""
    raw = rng.standard_normal(shape)
    if sigma_cells <= 0.0:
        return raw
    return gaussian_filter(raw, sigma_cells, mode="wrap") / gain


def generate_observations(cfg: WeatherGenConfig) -> tuple[GridField, GridField]:
    """Generate the lead-0 (ssr, t2m) fields for the configured period.

    Pure function of the config: identical seeds give bit-identical fields.
    The generated SSR never exceeds the clear-sky ceiling at the same
    latitude and day of year.
    """
    spec = cfg.grid
    dates = cfg.dates
    n_days = len(dates)
    shape = (spec.n_lat, spec.n_lon)
    lats = spec.lats
    doy = np.array([d.timetuple().tm_yday for d in dates], dtype=np.int64)

    cloud_ss, temp_ss = np.random.SeedSequence(cfg.rng_seed).spawn(2)
    cloud_rng = np.random.Generator(np.random.PCG64(cloud_ss))
    temp_rng = np.random.Generator(np.random.PCG64(temp_ss))

    sigma_cells = cfg.cloud_corr_length_deg / spec.dlat
    gain = _smoothing_gain(shape, sigma_cells)

    # clear-sky ceiling per (day, lat), shared across longitudes
    ceiling = np.empty((n_days, spec.n_lat))
    for i, lat in enumerate(lats):
        ceiling[:, i] = clear_sky_insolation(float(lat), doy)

    lat_frac = (lats - spec.lat_min) / (spec.lat_max - spec.lat_min)
    amp = cfg.k_std * (1.0 + (cfg.north_variability_gain - 1.0) * lat_frac)

    ssr_vals = np.empty((n_days, spec.n_lat, spec.n_lon))
    p = cfg.cloud_persistence
    z = _smooth_unit_noise(cloud_rng, shape, sigma_cells, gain)
    for d in range(n_days):
        if d > 0:
            innov = _smooth_unit_noise(cloud_rng, shape, sigma_cells, gain)
            z = p * z + np.sqrt(1.0 - p * p) * innov
        k = np.clip(cfg.k_mean + amp[:, None] * z, cfg.k_min, cfg.k_max)
        ssr_vals[d] = ceiling[d][:, None] * k

    t_mean = cfg.t_mean_base + cfg.t_mean_per_deg * (lats - 35.0)
    t_amp = cfg.t_amp_base + cfg.t_amp_per_deg * (lats - 35.0)
    season = np.cos(2.0 * np.pi * (doy - cfg.t_peak_doy) / 365.25)
    t2m_vals = np.empty((n_days, spec.n_lat, spec.n_lon))
    tp = cfg.t_persistence
    tz = _smooth_unit_noise(temp_rng, shape, sigma_cells, gain)
    for d in range(n_days):
        if d > 0:
            innov = _smooth_unit_noise(temp_rng, shape, sigma_cells, gain)
            tz = tp * tz + np.sqrt(1.0 - tp * tp) * innov
        t2m_vals[d] = (t_mean + t_amp * season[d])[:, None] + cfg.t_noise_std * tz

    ssr = GridField(spec, SSR, dates, ssr_vals, lead_days=0)
    t2m = GridField(spec, T2M, dates, t2m_vals, lead_days=0)
    return ssr, t2m


def degrade_forecast(obs: GridField, lead: int, cfg: ForecastDegradationConfig) -> GridField:
    """Build the lead-N forecast field for an observation field.

    Each day's forecast keeps the observed spatial mean and mixes the
    observed anomaly with an orthogonal correlated-noise field so that the
    spatial correlation with the observation equals a per-day target drawn
    around (1-r)^lead. SSR is clipped at zero afterwards, which perturbs
    the realized correlation only marginally.
    """
    if obs.lead_days != 0:
        raise ValueError("degrade_forecast expects an observation field (lead 0)")
    if not (1 <= lead <= cfg.max_lead):
        raise LeadOutOfRangeError(f"lead {lead} outside 1..{cfg.max_lead}")

    spec = obs.spec
    shape = (spec.n_lat, spec.n_lon)
    var_code = VARIABLES.index(obs.variable)
    ss = np.random.SeedSequence(cfg.rng_seed, spawn_key=(var_code, lead))
    rng = np.random.Generator(np.random.PCG64(ss))

    sigma_cells = cfg.noise_corr_length_deg / spec.dlat
    gain = _smoothing_gain(shape, sigma_cells)
    scale = cfg.noise_scale(obs.variable)

    rho_target = (1.0 - cfg.correlation_decay) ** lead
    spread = cfg.corr_spread_lead1 * (1.0 + cfg.iqr_growth) ** (lead - 1)

    out = np.empty_like(obs.values)
    for d in range(obs.n_days):
        plane = obs.values[d]
        day_mean = plane.mean()
        u = plane - day_mean
        u_norm2 = float(np.sum(u * u))
        rho_day = float(np.clip(rho_target + spread * rng.standard_normal(), 0.0, 0.999999))
        noise = _smooth_unit_noise(rng, shape, sigma_cells, gain)
        if u_norm2 == 0.0:
            out[d] = plane
            continue
        noise = noise - noise.mean()
        noise -= (np.sum(noise * u) / u_norm2) * u
        w_norm2 = float(np.sum(noise * noise))
        if w_norm2 > 0.0:
            noise *= np.sqrt(u_norm2 / w_norm2)
        # shrink correlation further when the noise amplitude is scaled down
        rho_eff = np.sqrt(max(0.0, 1.0 - scale**2 * (1.0 - rho_day**2)))
        out[d] = day_mean + rho_eff * u + np.sqrt(max(0.0, 1.0 - rho_eff**2)) * noise

    if obs.variable == SSR:
        np.clip(out, 0.0, None, out=out)
    return GridField(spec, obs.variable, obs.dates, out, lead_days=lead)
