"""Exhaustive min-max placement search over the symmetric (a, b) family."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .crb import CrbEvaluationError, CrbValue, worst_case_crb
from .geometry import (AntennaPositionVector, ConstraintError, SymmetricFamilyParams, family_bounds,
                       maxvar_apv, symmetric_apv, ufa_apv, uhw_apv)
from .model import ScenarioConfig
from .scc import DEFAULT_CRITERION, DEFAULT_FINE_STEP, DEFAULT_REGION_STEP, UncertaintyRegion, scc_profile

log = logging.getLogger(__name__)

DEFAULT_GRID_STEP = 0.05


@dataclass(frozen=True)
class GridSpec:
    """Rectangular (a, b) grid in wavelengths, ``step`` apart, bounds inclusive."""

    a_min: float
    a_max: float
    b_min: float
    b_max: float
    step: float = DEFAULT_GRID_STEP

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"grid step must be > 0, got {self.step}")
        if self.a_min > self.a_max or self.b_min > self.b_max:
            raise ValueError(f"empty grid: a in [{self.a_min}, {self.a_max}], b in [{self.b_min}, {self.b_max}]")

    @classmethod
    def default(cls, cfg: ScenarioConfig, step: float = DEFAULT_GRID_STEP) -> "GridSpec":
        lo, hi = family_bounds(cfg)
        return cls(lo, hi, lo, hi, step)

    def check_bounds(self, cfg: ScenarioConfig) -> "GridSpec":
        lo, hi = family_bounds(cfg)
        for name in ("a_min", "a_max", "b_min", "b_max"):
            v = getattr(self, name)
            if not lo - 1e-9 <= v <= hi + 1e-9:
                raise ValueError(f"{name} = {v} outside the family range [{lo}, {hi}]")
        return self

    @staticmethod
    def _axis(lo, hi, step):
        n = int(np.floor((hi - lo) / step + 1e-9))
        return np.round(lo + step * np.arange(n + 1), 10)

    @property
    def a_values(self) -> np.ndarray:
        return self._axis(self.a_min, self.a_max, self.step)

    @property
    def b_values(self) -> np.ndarray:
        return self._axis(self.b_min, self.b_max, self.step)

    def cells(self):
        return [SymmetricFamilyParams(float(a), float(b)) for a in self.a_values for b in self.b_values]

    def halved(self) -> "GridSpec":
        return GridSpec(self.a_min, self.a_max, self.b_min, self.b_max, self.step / 2)


@dataclass(frozen=True)
class PlacementResult:
    """Evaluation of one placement against one uncertainty region.

    ``a``/``b`` are set for family cells and ``None`` for other placements.
    ``worst_crb`` is ``None`` when it was skipped (SCC-infeasible cell without
    diagnostics) or could not be evaluated (see ``error``).
    """

    apv: AntennaPositionVector | None
    geometry_ok: bool
    feasible: bool
    max_sidelobe_scc: float | None
    worst_crb: CrbValue | None = None
    worst_angle_deg: float | None = None
    error: str | None = None
    a: float | None = None
    b: float | None = None

    @property
    def params(self) -> SymmetricFamilyParams | None:
        return None if self.a is None else SymmetricFamilyParams(self.a, self.b)


def evaluate_placement(r: AntennaPositionVector, region: UncertaintyRegion, cfg: ScenarioConfig,
                       diagnostics: bool = True, fine_step: float = DEFAULT_FINE_STEP,
                       criterion: str = DEFAULT_CRITERION, **extra) -> PlacementResult:
    """SCC verdict plus worst-case CRB for a single placement.

    With ``diagnostics=False`` the CRB of SCC-infeasible placements is skipped.
    """
    prof = scc_profile(r, region, cfg, fine_step, criterion)
    worst = angle = error = None
    if prof.feasible or diagnostics:
        try:
            worst, angle = worst_case_crb(r, region, cfg)
        except (CrbEvaluationError, ValueError) as exc:
            error = str(exc)
    return PlacementResult(r, True, prof.feasible, prof.max_sidelobe, worst, angle, error, **extra)


def evaluate_cell(params: SymmetricFamilyParams, region: UncertaintyRegion, cfg: ScenarioConfig,
                  diagnostics: bool = False, fine_step: float = DEFAULT_FINE_STEP,
                  criterion: str = DEFAULT_CRITERION) -> PlacementResult:
    try:
        r = symmetric_apv(params, cfg)
    except ConstraintError as exc:
        return PlacementResult(None, False, False, None, error=str(exc), a=params.a, b=params.b)
    return evaluate_placement(r, region, cfg, diagnostics, fine_step, criterion, a=params.a, b=params.b)


def _evaluate_batch(args):
    cells, region, cfg, diagnostics, fine_step, criterion = args
    return [evaluate_cell(p, region, cfg, diagnostics, fine_step, criterion) for p in cells]


@dataclass
class OptimizationReport:
    """Per-cell results of one search and its arg-min.

    ``status`` is ``"ok"`` when a feasible cell with a finite worst-case CRB
    exists and ``"infeasible"`` otherwise; in the latter case
    ``least_violating`` holds the geometrically valid cell with the smallest
    sidelobe SCC.
    """

    region: UncertaintyRegion
    grid: GridSpec
    cells: list[PlacementResult]
    best: PlacementResult | None
    least_violating: PlacementResult | None = None
    status: str = field(init=False)

    def __post_init__(self):
        self.status = "ok" if self.best is not None else "infeasible"

    @property
    def best_params(self) -> SymmetricFamilyParams | None:
        return None if self.best is None else self.best.params

    @property
    def best_worst_crb(self) -> CrbValue | None:
        return None if self.best is None else self.best.worst_crb

    @property
    def n_geometry_ok(self) -> int:
        return sum(c.geometry_ok for c in self.cells)

    @property
    def n_feasible(self) -> int:
        return sum(c.feasible for c in self.cells)

    @property
    def feasible_fraction(self) -> float:
        """Share of geometrically valid cells that also pass the SCC test."""
        n = self.n_geometry_ok
        return self.n_feasible / n if n else 0.0

    def feasible_set(self) -> set[tuple[float, float]]:
        return {(c.a, c.b) for c in self.cells if c.feasible}

    def cell(self, a: float, b: float) -> PlacementResult:
        for c in self.cells:
            if abs(c.a - a) < 1e-9 and abs(c.b - b) < 1e-9:
                return c
        raise KeyError((a, b))


def select_best(cells: list[PlacementResult]) -> PlacementResult | None:
    """Feasible cell with the smallest worst-case CRB; ties go to the
    smallest ``a`` then ``b``. Independent of the order of ``cells``."""
    cands = [c for c in cells if c.feasible and c.worst_crb is not None]
    if not cands:
        return None
    return min(cands, key=lambda c: (c.worst_crb.variance, c.a, c.b))


def optimize_placement(grid: GridSpec, region: UncertaintyRegion, cfg: ScenarioConfig,
                       diagnostics: bool = False, workers: int = 1,
                       fine_step: float = DEFAULT_FINE_STEP,
                       criterion: str = DEFAULT_CRITERION) -> OptimizationReport:
    """Minimise the worst-case CRB over the (a, b) grid subject to the
    geometric and SCC constraints.

    Every cell is evaluated independently, so ``workers > 1`` fans the grid
    rows out to a process pool; the arg-min is taken after sorting, so the
    result does not depend on scheduling.
    """
    cells = grid.check_bounds(cfg).cells()
    if not cells:
        raise ValueError("grid has no cells")
    if workers > 1:
        n_b = grid.b_values.size
        rows = [cells[i:i + n_b] for i in range(0, len(cells), n_b)]
        jobs = [(row, region, cfg, diagnostics, fine_step, criterion) for row in rows]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [c for batch in pool.map(_evaluate_batch, jobs) for c in batch]
    else:
        results = _evaluate_batch((cells, region, cfg, diagnostics, fine_step, criterion))
    results.sort(key=lambda c: (c.a, c.b))
    best = select_best(results)
    least = None
    if best is None:
        valid = [c for c in results if c.geometry_ok]
        least = min(valid, key=lambda c: (c.max_sidelobe_scc, c.a, c.b)) if valid else None
        log.warning("no feasible cell for region [%g, %g] deg", region.angles_deg[0], region.angles_deg[-1])
    return OptimizationReport(region, grid, results, best, least)


@dataclass(frozen=True)
class SweepRow:
    span_deg: float
    solution: str
    result: PlacementResult

    @property
    def feasible(self) -> bool:
        return self.result.feasible

    @property
    def worst_crb(self) -> CrbValue | None:
        return self.result.worst_crb


def sweep_region_size(spans, theta_c_deg: float, grid: GridSpec, cfg: ScenarioConfig,
                      region_step: float = DEFAULT_REGION_STEP, kappa_scc: float = 0.5,
                      workers: int = 1, fine_step: float = DEFAULT_FINE_STEP,
                      criterion: str = DEFAULT_CRITERION) -> list[SweepRow]:
    """Worst-case CRB versus region width for the optimised and fixed arrays.

    For each span the rows are, in order: ``opt`` (the per-span optimum),
    ``maxvar``, ``ufa``, ``uhw`` and ``opt@<largest span>``, the optimum of the
    widest region kept fixed and re-evaluated on every span.
    """
    spans = [float(s) for s in spans]
    if not spans or min(spans) < 0:
        raise ValueError("spans must be a non-empty list of non-negative widths")
    regions = {s: UncertaintyRegion.from_span(theta_c_deg, s, region_step, kappa_scc) for s in spans}
    reports = {s: optimize_placement(grid, regions[s], cfg, False, workers, fine_step, criterion)
               for s in spans}
    widest = max(spans)
    pinned = reports[widest].best
    fixed = [("maxvar", maxvar_apv(cfg)), ("ufa", ufa_apv(cfg)), ("uhw", uhw_apv(cfg))]
    rows = []
    for s in spans:
        region = regions[s]
        best = reports[s].best
        if best is None:
            best = PlacementResult(None, False, False, None, error="no feasible placement")
        rows.append(SweepRow(s, "opt", best))
        for name, r in fixed:
            rows.append(SweepRow(s, name, evaluate_placement(r, region, cfg, True, fine_step, criterion)))
        label = f"opt@{widest:g}"
        if pinned is None:
            rows.append(SweepRow(s, label, PlacementResult(None, False, False, None,
                                                           error="no feasible placement for widest span")))
        else:
            rows.append(SweepRow(s, label, evaluate_placement(pinned.apv, region, cfg, True, fine_step,
                                                              criterion, a=pinned.a, b=pinned.b)))
    return rows
