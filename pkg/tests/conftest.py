"""Shared builds of the two reference working points.

Both use the 397.5 nm / 129 fs pump on 2 mm of BBO; the band is sized by the
recipe half_width = omega_s + max(width_factor / tau1, 3 Omega_p) so the grid
covers the phase-matched bands plus their pump-broadened wings.
"""

from dataclasses import dataclass

import pytest

from twinbeams.mehler import characteristic_times, gaussian_model_params, mehler_factors
from twinbeams.pdc import (
    PumpConfig,
    bbo_crystal,
    build_frequency_grid,
    build_squeezing_matrix,
    extract_jsa,
)


@dataclass
class WorkingPoint:
    crystal: object
    pump: object
    times: object
    factors: object
    grid: object
    sq: object
    ext: object


def build_working_point(
    theta0_deg=28.81, length_mm=2.0, m=128, gain=10.0, width_factor=4.0
):
    crystal = bbo_crystal(length_mm, theta0_deg)
    pump = PumpConfig(lambda_p_nm=397.5, tau_p_fs=129.0, gain=gain)
    t = characteristic_times(crystal, pump)
    f = mehler_factors(gaussian_model_params(t))
    half_width = t.omega_s + max(width_factor / f.tau1, 3.0 * t.omega_p)
    grid = build_frequency_grid(m, half_width=half_width)
    sq = build_squeezing_matrix(crystal, pump, grid)
    ext = extract_jsa(sq)
    return WorkingPoint(
        crystal=crystal, pump=pump, times=t, factors=f, grid=grid, sq=sq, ext=ext
    )


@pytest.fixture(scope="session")
def nondegenerate():
    """2 mm BBO at 28.81 deg: well-separated twin bands."""
    return build_working_point()


@pytest.fixture(scope="session")
def near_degenerate():
    """2 mm BBO at 29.18 deg: the twin bands almost touch."""
    return build_working_point(theta0_deg=29.18)
