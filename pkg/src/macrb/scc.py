"""Spatial correlation coefficient, main-lobe exclusion and the ambiguity test.

The correlation between the steering vector at the region centre and the one
at another AoD is what exposes grating lobes: a placement is accepted only if
that correlation stays below ``kappa_scc`` everywhere in the uncertainty
region outside the main lobe.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import MAX_ANGLE_DEG, ScenarioConfig, check_angle, steering_vector

DEFAULT_REGION_STEP = 0.1
DEFAULT_FINE_STEP = 0.01
# "amplitude": main lobe is where |SCC| >= 0.5; "power": where |SCC|^2 >= 0.5.
BEAMWIDTH_CRITERIA = ("amplitude", "power")
DEFAULT_CRITERION = "amplitude"


@dataclass(frozen=True, eq=False)
class UncertaintyRegion:
    """Discretised AoD set with its centre and the SCC threshold.

    Angles are held in degrees (rounded to 1e-9 deg so that grid arithmetic
    does not leak into set-membership tests); use :attr:`angles` for radians.
    """

    angles_deg: np.ndarray
    center_deg: float
    grid_step_deg: float = DEFAULT_REGION_STEP
    kappa_scc: float = 0.5

    def __post_init__(self):
        ang = np.round(np.asarray(self.angles_deg, dtype=float).reshape(-1), 9)
        if ang.size == 0:
            raise ValueError("uncertainty region is empty")
        if np.any(np.diff(ang) <= 0):
            raise ValueError("region angles must be strictly ascending")
        check_angle(np.deg2rad(ang))
        if not self.grid_step_deg > 0:
            raise ValueError(f"grid step must be > 0, got {self.grid_step_deg}")
        if not ang[0] - 1e-9 <= self.center_deg <= ang[-1] + 1e-9:
            raise ValueError(f"centre {self.center_deg} deg outside [{ang[0]}, {ang[-1]}] deg")
        if not 0 < self.kappa_scc <= 1:
            raise ValueError(f"kappa_scc must lie in (0, 1], got {self.kappa_scc}")
        ang.setflags(write=False)
        object.__setattr__(self, "angles_deg", ang)

    @classmethod
    def from_bounds(cls, min_deg: float, max_deg: float, center_deg: float | None = None,
                    step_deg: float = DEFAULT_REGION_STEP, kappa_scc: float = 0.5) -> "UncertaintyRegion":
        """Grid ``min_deg, min_deg + step, ...`` closed at ``max_deg``."""
        if max_deg < min_deg:
            raise ValueError(f"region max {max_deg} below min {min_deg}")
        if not step_deg > 0:
            raise ValueError(f"grid step must be > 0, got {step_deg}")
        n = int(np.floor((max_deg - min_deg) / step_deg + 1e-9))
        ang = min_deg + step_deg * np.arange(n + 1)
        if max_deg - ang[-1] > 1e-9:
            ang = np.append(ang, max_deg)
        if center_deg is None:
            center_deg = (min_deg + max_deg) / 2
        return cls(ang, center_deg, step_deg, kappa_scc)

    @classmethod
    def from_span(cls, center_deg: float, span_deg: float, step_deg: float = DEFAULT_REGION_STEP,
                  kappa_scc: float = 0.5) -> "UncertaintyRegion":
        """Region of width ``span_deg`` centred on ``center_deg``."""
        if span_deg < 0:
            raise ValueError(f"span must be >= 0, got {span_deg}")
        return cls.from_bounds(center_deg - span_deg / 2, center_deg + span_deg / 2,
                               center_deg, step_deg, kappa_scc)

    @property
    def angles(self) -> np.ndarray:
        return np.deg2rad(self.angles_deg)

    @property
    def center(self) -> float:
        return float(np.deg2rad(self.center_deg))

    @property
    def span_deg(self) -> float:
        return float(self.angles_deg[-1] - self.angles_deg[0])

    def with_kappa(self, kappa_scc: float) -> "UncertaintyRegion":
        return UncertaintyRegion(self.angles_deg, self.center_deg, self.grid_step_deg, kappa_scc)


def scc(theta_i, theta_j, r, cfg: ScenarioConfig):
    """Magnitude of the normalised correlation ``a(theta_i)^H a(theta_j) / L``.

    ``theta_j`` may be an array; the result then has the same shape.
    """
    a_i = steering_vector(theta_i, r, cfg)
    a_j = steering_vector(theta_j, r, cfg)
    return np.abs(np.tensordot(a_i.conj(), a_j, axes=(0, 0))) / a_i.shape[0]


class Beamwidth(NamedTuple):
    width_deg: float
    lower_deg: float
    upper_deg: float
    truncated: bool  # response never fell below the level before the domain edge


def _crossing(r, theta_c_deg, direction, fine_step, cfg, criterion):
    limit = MAX_ANGLE_DEG
    room = limit - direction * theta_c_deg
    if room <= 0:
        return None
    # scan in growing chunks: the main lobe is usually a few degrees wide
    start, chunk = 0, 1024
    prev_offset, prev_val = 0.0, 1.0
    while start * fine_step < room:
        offsets = fine_step * np.arange(start + 1, start + chunk + 1)
        offsets = offsets[offsets < room]
        offsets = np.append(offsets, room) if offsets.size < chunk else offsets
        vals = scc(np.deg2rad(theta_c_deg), np.deg2rad(theta_c_deg + direction * offsets), r, cfg)
        if criterion == "power":
            vals = vals ** 2
        below = np.flatnonzero(vals < 0.5)
        if below.size:
            i = below[0]
            o0, v0 = (prev_offset, prev_val) if i == 0 else (offsets[i - 1], vals[i - 1])
            o1, v1 = offsets[i], vals[i]
            return o0 + (o1 - o0) * (v0 - 0.5) / (v0 - v1)
        prev_offset, prev_val = offsets[-1], vals[-1]
        start += chunk
        chunk *= 2
    return None


def half_power_beamwidth(r, theta_c: float, cfg: ScenarioConfig, fine_step: float = DEFAULT_FINE_STEP,
                         criterion: str = DEFAULT_CRITERION) -> Beamwidth:
    """Width of the contiguous interval around ``theta_c`` (radians) where the
    correlation with ``a(theta_c)`` stays at or above the half-power level.

    The scan runs outward from ``theta_c`` on a ``fine_step``-degree grid in
    both directions and interpolates linearly at the first sample below the
    level. ``criterion`` selects whether ``|SCC|`` or ``|SCC|^2`` is compared
    with 0.5. If a side never crosses before +-89.9 deg the result spans the
    whole domain and ``truncated`` is set.
    """
    if not fine_step > 0:
        raise ValueError(f"fine_step must be > 0, got {fine_step}")
    if criterion not in BEAMWIDTH_CRITERIA:
        raise ValueError(f"criterion must be one of {BEAMWIDTH_CRITERIA}, got {criterion!r}")
    theta_c_deg = float(np.rad2deg(check_angle(theta_c)))
    up = _crossing(r, theta_c_deg, +1, fine_step, cfg, criterion)
    down = _crossing(r, theta_c_deg, -1, fine_step, cfg, criterion)
    if up is None or down is None:
        warnings.warn(f"main lobe at {theta_c_deg:g} deg never drops below half power; "
                      "treating the whole domain as main lobe", RuntimeWarning, stacklevel=2)
        return Beamwidth(2 * MAX_ANGLE_DEG, -MAX_ANGLE_DEG, MAX_ANGLE_DEG, True)
    return Beamwidth(float(up + down), theta_c_deg - down, theta_c_deg + up, False)


def mainlobe_set(r, region: UncertaintyRegion, cfg: ScenarioConfig, fine_step: float = DEFAULT_FINE_STEP,
                 criterion: str = DEFAULT_CRITERION, beamwidth: Beamwidth | None = None) -> np.ndarray:
    """Boolean mask over ``region.angles_deg``: ``|theta - theta_c| < width/2``."""
    if beamwidth is None:
        beamwidth = half_power_beamwidth(r, region.center, cfg, fine_step, criterion)
    if beamwidth.truncated:
        return np.ones(region.angles_deg.size, dtype=bool)
    return np.abs(region.angles_deg - region.center_deg) < beamwidth.width_deg / 2


@dataclass(frozen=True, eq=False)
class SccProfile:
    angles_deg: np.ndarray
    values: np.ndarray
    beamwidth: Beamwidth
    mainlobe: np.ndarray
    max_sidelobe: float
    feasible: bool


def scc_profile(r, region: UncertaintyRegion, cfg: ScenarioConfig, fine_step: float = DEFAULT_FINE_STEP,
                criterion: str = DEFAULT_CRITERION) -> SccProfile:
    """Correlation with the centre over the whole region, plus the verdict."""
    bw = half_power_beamwidth(r, region.center, cfg, fine_step, criterion)
    mask = mainlobe_set(r, region, cfg, beamwidth=bw)
    values = scc(region.center, region.angles, r, cfg)
    side = values[~mask]
    max_side = float(side.max()) if side.size else 0.0
    return SccProfile(region.angles_deg, values, bw, mask, max_side, max_side <= region.kappa_scc)


def scc_feasible(r, region: UncertaintyRegion, cfg: ScenarioConfig, fine_step: float = DEFAULT_FINE_STEP,
                 criterion: str = DEFAULT_CRITERION) -> tuple[bool, float]:
    """``(max sidelobe SCC <= kappa, max sidelobe SCC)`` over the region
    minus its main lobe. An empty remainder counts as feasible with 0."""
    prof = scc_profile(r, region, cfg, fine_step, criterion)
    return prof.feasible, prof.max_sidelobe
