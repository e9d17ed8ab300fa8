"""Top-of-atmosphere daily insolation used as the clear-sky ceiling."""

from __future__ import annotations

import numpy as np

from .errors import OutOfRangeError

SOLAR_CONSTANT = 1367.0  # W/m2
MAX_ABS_LATITUDE = 66.5  # polar day/night excluded


def clear_sky_insolation(lat: float, day_of_year) -> float | np.ndarray:
    """Daily extraterrestrial insolation in Wh/m2/day at a latitude.

    Uses the standard daily integral of the solar constant with eccentricity
    correction, solar declination and sunset hour angle. ``day_of_year``
    may be a scalar in 1..366 or an integer array.
    """
    if abs(lat) > MAX_ABS_LATITUDE:
        raise OutOfRangeError(f"latitude {lat} outside +/-{MAX_ABS_LATITUDE} deg")
    doy = np.asarray(day_of_year, dtype=np.float64)
    if np.any(doy < 1) or np.any(doy > 366):
        raise OutOfRangeError("day_of_year must lie in 1..366")

    phi = np.deg2rad(lat)
    decl = np.deg2rad(23.45) * np.sin(2.0 * np.pi * (284.0 + doy) / 365.0)
    ecc = 1.0 + 0.033 * np.cos(2.0 * np.pi * doy / 365.0)
    cos_ws = np.clip(-np.tan(phi) * np.tan(decl), -1.0, 1.0)
    ws = np.arccos(cos_ws)
    daily = (
        (24.0 / np.pi)
        * SOLAR_CONSTANT
        * ecc
        * (np.cos(phi) * np.cos(decl) * np.sin(ws) + ws * np.sin(phi) * np.sin(decl))
    )
    daily = np.maximum(daily, 0.0)
    if np.isscalar(day_of_year):
        return float(daily)
    return daily
