"""Antenna position vectors (APVs) and the standard placements.

All positions are in wavelengths, measured from the centre of the segment
``[-D/2, D/2]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ScenarioConfig

SPACING_TOL = 1e-9


class ConstraintError(ValueError):
    """Placement violates an aperture, spacing or family-range constraint."""

    def __init__(self, constraint: str, message: str):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint


class AntennaPositionVector:
    """Sorted element positions along the array axis.

    The stored array is read-only so instances can be shared freely between
    workers. Construction only checks that positions are finite and strictly
    ascending; the aperture and spacing constraints depend on the scenario and
    are checked by :meth:`validate`.
    """

    __slots__ = ("positions", "name")

    def __init__(self, positions, name: str | None = None):
        pos = np.array(positions, dtype=float).reshape(-1)
        if pos.size == 0 or not np.all(np.isfinite(pos)):
            raise ValueError("positions must be a non-empty finite vector")
        if np.any(np.diff(pos) <= 0):
            raise ConstraintError("ordering", f"positions must be strictly ascending, got {pos.tolist()}")
        pos.setflags(write=False)
        self.positions = pos
        self.name = name

    def __len__(self):
        return self.positions.size

    def __array__(self, dtype=None, copy=None):
        return self.positions if dtype is None else self.positions.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, AntennaPositionVector):
            return NotImplemented
        return np.array_equal(self.positions, other.positions)

    def __hash__(self):
        return hash(self.positions.tobytes())

    def __repr__(self):
        label = f"{self.name}: " if self.name else ""
        return f"APV({label}{format_apv(self)})"

    @property
    def mean(self) -> float:
        return float(self.positions.mean())

    def validate(self, cfg: ScenarioConfig, tol: float = SPACING_TOL) -> "AntennaPositionVector":
        """Raise :class:`ConstraintError` unless the placement fits ``cfg``."""
        pos = self.positions
        if pos.size != cfg.num_elements:
            raise ConstraintError("element count", f"expected {cfg.num_elements} positions, got {pos.size}")
        if pos[-1] - pos[0] > cfg.aperture + tol:
            raise ConstraintError("aperture", f"span {pos[-1] - pos[0]:.6g} exceeds D = {cfg.aperture:.6g}")
        gaps = np.diff(pos)
        if gaps.size and gaps.min() < cfg.min_spacing - tol:
            raise ConstraintError(
                "min spacing", f"gap {gaps.min():.6g} below d = {cfg.min_spacing:.6g}")
        half = cfg.aperture / 2
        if pos[0] < -half - tol or pos[-1] > half + tol:
            raise ConstraintError("segment", f"positions leave [-{half:.6g}, {half:.6g}]")
        return self

    def is_valid(self, cfg: ScenarioConfig) -> bool:
        try:
            self.validate(cfg)
        except ConstraintError:
            return False
        return True


def format_apv(r) -> str:
    """Comma-separated positions in wavelengths, ascending."""
    return ",".join(repr(float(x)) for x in np.asarray(r, dtype=float))


def parse_apv(text: str, name: str | None = None) -> AntennaPositionVector:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValueError(f"cannot parse APV {text!r}: {exc}") from None
    return AntennaPositionVector(values, name=name)


@dataclass(frozen=True)
class SymmetricFamilyParams:
    """Outer gap ``a`` and next gap ``b`` of the six-element symmetric family."""

    a: float
    b: float

    def inner_gap(self, cfg: ScenarioConfig) -> float:
        return 2 * (cfg.aperture / 2 - self.a - self.b)


def family_bounds(cfg: ScenarioConfig) -> tuple[float, float]:
    """Admissible range ``[d, (D - 3d)/2]`` of both family parameters."""
    return cfg.min_spacing, (cfg.aperture - 3 * cfg.min_spacing) / 2


def symmetric_apv(params: SymmetricFamilyParams, cfg: ScenarioConfig) -> AntennaPositionVector:
    """Six-element placement with extremes pinned at ``+-D/2``.

    From the right end inwards the gaps are ``a`` then ``b``, mirrored about
    the centre, giving ``[-r1, -r2, -r3, r3, r2, r1]`` with ``r1 = D/2``,
    ``r2 = D/2 - a`` and ``r3 = D/2 - a - b``.

    Raises:
        ConstraintError: if ``L != 6``, ``a``/``b`` leave the family range, or
            the gap across the centre is below ``d``.
    """
    if cfg.num_elements != 6:
        raise ConstraintError("element count", f"symmetric family needs L = 6, got {cfg.num_elements}")
    lo, hi = family_bounds(cfg)
    for label, value in (("a", params.a), ("b", params.b)):
        if not lo - SPACING_TOL <= value <= hi + SPACING_TOL:
            raise ConstraintError("family range", f"{label} = {value:.6g} outside [{lo:.6g}, {hi:.6g}]")
    gap = params.inner_gap(cfg)
    if gap < cfg.min_spacing - SPACING_TOL:
        raise ConstraintError(
            "min spacing", f"centre gap 2(D/2 - a - b) = {gap:.6g} below d = {cfg.min_spacing:.6g}")
    r1 = cfg.aperture / 2
    r2 = r1 - params.a
    r3 = r2 - params.b
    # rounding strips grid noise such as 5 - 0.5 - 3.65 = 0.8500000000000001
    pos = np.round([-r1, -r2, -r3, r3, r2, r1], 12)
    apv = AntennaPositionVector(pos, name=f"a={params.a:g},b={params.b:g}")
    return apv.validate(cfg)


def maxvar_apv(cfg: ScenarioConfig) -> AntennaPositionVector:
    """Maximum-variance placement: two tightly packed clusters at the ends.

    ``ceil(L/2)`` elements sit at the ``+D/2`` end and ``floor(L/2)`` at the
    ``-D/2`` end, each cluster at spacing ``d``.
    """
    n_left = cfg.num_elements // 2
    n_right = cfg.num_elements - n_left
    half, d = cfg.aperture / 2, cfg.min_spacing
    left = -half + d * np.arange(n_left)
    right = half - d * np.arange(n_right)[::-1]
    if n_left and right[0] - left[-1] < d - SPACING_TOL:
        raise ConstraintError("aperture", f"D = {cfg.aperture:g} cannot separate the two clusters by d")
    return AntennaPositionVector(np.concatenate([left, right]), name="maxvar").validate(cfg)


def ufa_apv(cfg: ScenarioConfig) -> AntennaPositionVector:
    """Uniform full-aperture array: spacing ``D/(L-1)``, centred."""
    half = cfg.aperture / 2
    pos = np.linspace(-half, half, cfg.num_elements)
    return AntennaPositionVector(pos, name="ufa").validate(cfg)


def uhw_apv(cfg: ScenarioConfig) -> AntennaPositionVector:
    """Uniform half-wavelength array, centred on the segment."""
    spacing = cfg.wavelength / 2
    pos = spacing * (np.arange(cfg.num_elements) - (cfg.num_elements - 1) / 2)
    return AntennaPositionVector(pos, name="uhw").validate(cfg)


def position_moment(r) -> float:
    """``r^T r`` in square wavelengths."""
    pos = np.asarray(r, dtype=float)
    return float(pos @ pos)
