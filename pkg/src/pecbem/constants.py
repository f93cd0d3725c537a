"""Free-space constants and unit conversions."""

import math

SPEED_OF_LIGHT_M_PER_S = 299792458.0
FREE_SPACE_IMPEDANCE_OHM = 376.730313668


def wavenumber_from_frequency(f_hz: float) -> float:
    """Free-space wavenumber k = 2*pi*f/c in rad/m."""
    return 2.0 * math.pi * f_hz / SPEED_OF_LIGHT_M_PER_S


def frequency_from_wavenumber(k_rad_per_m: float) -> float:
    return k_rad_per_m * SPEED_OF_LIGHT_M_PER_S / (2.0 * math.pi)
