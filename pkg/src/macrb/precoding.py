"""Directional + derivative two-beam precoder."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ScenarioConfig, steering_derivative, steering_vector

TRACE_TOL = 1e-10


class DegenerateGeometryError(ValueError):
    """Steering derivative vanishes, so no derivative beam can be formed."""


@dataclass(frozen=True, eq=False)
class PrecodingMatrix:
    """Complex ``L x G`` precoder ``F`` with ``tr(F F^H) = 1``."""

    F: np.ndarray

    def __post_init__(self):
        F = np.array(self.F, dtype=complex)
        if F.ndim != 2:
            raise ValueError(f"precoder must be a matrix, got shape {F.shape}")
        power = float(np.real(np.vdot(F, F)))
        if abs(power - 1) > TRACE_TOL:
            raise ValueError(f"tr(F F^H) = {power!r}, expected 1")
        F.setflags(write=False)
        object.__setattr__(self, "F", F)

    @property
    def shape(self):
        return self.F.shape

    @property
    def covariance(self) -> np.ndarray:
        """``X = F F^H``."""
        return self.F @ self.F.conj().T


def power_split(gamma: float) -> np.ndarray:
    """Diagonal allocation ``diag(gamma, 1 - gamma)``."""
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    return np.diag([gamma, 1 - gamma])


def _beams(theta, r, cfg):
    a = steering_vector(theta, r, cfg)
    da = steering_derivative(theta, r, cfg)
    norm_da = np.linalg.norm(da)
    if norm_da <= 1e-12 * cfg.wavenumber:
        raise DegenerateGeometryError(
            "steering derivative is zero (all positions at the origin?); derivative beam undefined")
    return np.column_stack([a.conj() / np.linalg.norm(a), da.conj() / norm_da])


def optimal_precoder(theta: float, r, cfg: ScenarioConfig, gamma: float | None = None) -> PrecodingMatrix:
    """Two-column precoder matched to ``theta``.

    Column 1 is the directional beam ``sqrt(gamma) a*/||a||`` and column 2 the
    derivative beam ``sqrt(1-gamma) da*/||da||``. ``gamma`` defaults to
    ``cfg.gamma``.
    """
    gamma = cfg.gamma if gamma is None else gamma
    B = _beams(theta, r, cfg)
    return PrecodingMatrix(B @ np.sqrt(power_split(gamma)))


def optimal_covariance(theta: float, r, cfg: ScenarioConfig, gamma: float | None = None) -> np.ndarray:
    """``X* = B Lambda(gamma) B^H`` with ``B`` the normalised beam pair.

    Equal to ``F F^H`` of :func:`optimal_precoder`; kept as a separate route
    for cross-checks.
    """
    gamma = cfg.gamma if gamma is None else gamma
    B = _beams(theta, r, cfg)
    return B @ power_split(gamma) @ B.conj().T
