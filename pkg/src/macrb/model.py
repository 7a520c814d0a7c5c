"""Scenario constants, angle handling and array-response vectors.

Positions are in wavelength units and the wavelength defaults to 1, so the
wavenumber is 2*pi. Angles are radians everywhere inside the library; the
``deg``/``rad`` helpers are for the boundaries.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

MAX_ANGLE_DEG = 89.9
MAX_ANGLE_RAD = np.deg2rad(MAX_ANGLE_DEG)


class DomainError(ValueError):
    """Angle outside the admissible AoD domain."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical and statistical constants of one scenario.

    Args:
        num_elements: Number of movable elements ``L``.
        aperture: Segment length ``D`` in wavelengths.
        min_spacing: Minimum inter-element spacing ``d`` in wavelengths.
        wavelength: Carrier wavelength; positions are expressed relative to it.
        snr_linear: ``K P rho^2 / sigma^2`` as a linear ratio.
        gamma: Power fraction on the directional beam, in (0, 1).
    """

    num_elements: int = 6
    aperture: float = 10.0
    min_spacing: float = 0.5
    wavelength: float = 1.0
    snr_linear: float = 1.0
    gamma: float = 0.5

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 2:
            raise ValueError(f"num_elements must be an integer >= 2, got {self.num_elements}")
        if not self.min_spacing > 0:
            raise ValueError(f"min_spacing must be > 0, got {self.min_spacing}")
        if not self.aperture > (self.num_elements - 1) * self.min_spacing:
            raise ValueError(
                f"aperture {self.aperture} too small for {self.num_elements} elements "
                f"at spacing {self.min_spacing}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")
        if not self.snr_linear > 0:
            raise ValueError(f"snr_linear must be > 0, got {self.snr_linear}")
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")

    @property
    def wavenumber(self) -> float:
        return 2 * np.pi / self.wavelength

    @property
    def snr_db(self) -> float:
        return 10 * np.log10(self.snr_linear)

    def with_snr_db(self, snr_db: float) -> "ScenarioConfig":
        return replace(self, snr_linear=db_to_linear(snr_db))


def db_to_linear(value_db: float) -> float:
    return float(10 ** (value_db / 10))


def deg(theta_rad):
    return np.rad2deg(theta_rad)


def rad(theta_deg):
    return np.deg2rad(theta_deg)


def check_angle(theta):
    """Return ``theta`` as a float array, raising if any entry is outside
    ``|theta| <= 89.9 deg``."""
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)) or np.any(np.abs(theta) > MAX_ANGLE_RAD + 1e-12):
        bad = theta[~(np.abs(theta) <= MAX_ANGLE_RAD + 1e-12)]
        raise DomainError(
            f"AoD {np.rad2deg(bad).tolist()} deg outside [-{MAX_ANGLE_DEG}, {MAX_ANGLE_DEG}] deg")
    return theta


def _positions(r) -> np.ndarray:
    return np.asarray(getattr(r, "positions", r), dtype=float)


def steering_vector(theta, r, cfg: ScenarioConfig) -> np.ndarray:
    """Array response ``a(theta, r)`` with entries ``exp(j k sin(theta) r_l)``.

    ``theta`` may be a scalar (returns shape ``(L,)``) or a 1-D array of N
    angles (returns ``(L, N)``, one column per angle).
    """
    theta = check_angle(theta)
    pos = _positions(r)
    return np.exp(1j * cfg.wavenumber * np.multiply.outer(pos, np.sin(theta)))


def steering_derivative(theta, r, cfg: ScenarioConfig) -> np.ndarray:
    """Derivative of :func:`steering_vector` with respect to ``theta``.

    Entry ``l`` is ``j k cos(theta) r_l exp(j k sin(theta) r_l)``. Shapes
    follow :func:`steering_vector`.
    """
    theta = check_angle(theta)
    pos = _positions(r)
    phase = cfg.wavenumber * np.multiply.outer(pos, np.sin(theta))
    scale = 1j * cfg.wavenumber * np.multiply.outer(pos, np.cos(theta))
    return scale * np.exp(1j * phase)
