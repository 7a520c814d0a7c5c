"""Monte-Carlo check that the CRB is approached by a maximum-likelihood AoD
estimator.

Observation model: ``y[k, g] = rho e^{j phi} a(theta, r)^T f_g s_k + noise``
with circularly-symmetric complex Gaussian noise of variance ``noise_var``.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .crb import crb_general
from .model import MAX_ANGLE_DEG, ScenarioConfig, steering_vector
from .precoding import PrecodingMatrix, optimal_precoder
from .scc import UncertaintyRegion, half_power_beamwidth

log = logging.getLogger(__name__)

DEFAULT_NUM_SYMBOLS = 16
DEFAULT_ML_STEP = 0.01


def default_pilot(num_symbols: int = DEFAULT_NUM_SYMBOLS) -> np.ndarray:
    """Unit-modulus chirp, so the average pilot power is exactly 1."""
    k = np.arange(num_symbols)
    return np.exp(1j * np.pi * k ** 2 / num_symbols)


@dataclass(frozen=True, eq=False)
class SignalScenario:
    rho: float
    phi: float
    noise_var: float
    pilot: np.ndarray
    num_transmissions: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")
        if self.noise_var < 0:
            raise ValueError(f"noise_var must be >= 0, got {self.noise_var}")
        pilot = np.array(self.pilot, dtype=complex).reshape(-1)
        if pilot.size == 0:
            raise ValueError("pilot must contain at least one symbol")
        pilot.setflags(write=False)
        object.__setattr__(self, "pilot", pilot)

    @classmethod
    def for_snr(cls, snr_linear: float, num_symbols: int = DEFAULT_NUM_SYMBOLS, phi: float = 0.7,
                noise_var: float = 1.0, num_transmissions: int = 2, seed: int = 0) -> "SignalScenario":
        """Scenario whose ``K P rho^2 / sigma^2`` equals ``snr_linear``."""
        pilot = default_pilot(num_symbols)
        power = float(np.mean(np.abs(pilot) ** 2))
        rho = np.sqrt(snr_linear * noise_var / (num_symbols * power))
        return cls(float(rho), phi, noise_var, pilot, num_transmissions, seed)

    @property
    def pilot_power(self) -> float:
        return float(np.mean(np.abs(self.pilot) ** 2))

    @property
    def snr(self) -> float:
        return self.pilot.size * self.pilot_power * self.rho ** 2 / self.noise_var

    @property
    def gain(self) -> complex:
        return self.rho * np.exp(1j * self.phi)

    def check_snr(self, cfg: ScenarioConfig) -> "SignalScenario":
        if abs(self.snr - cfg.snr_linear) > 1e-9 * max(1.0, cfg.snr_linear):
            raise ValueError(f"scenario SNR {self.snr!r} does not match config SNR {cfg.snr_linear!r}")
        return self


class ObservationSet(NamedTuple):
    samples: np.ndarray  # K x G


def _precoder(F) -> np.ndarray:
    return F.F if isinstance(F, PrecodingMatrix) else np.asarray(F, dtype=complex)


def noiseless_observations(theta_true: float, r, F, sc: SignalScenario, cfg: ScenarioConfig) -> np.ndarray:
    beam = steering_vector(theta_true, r, cfg) @ _precoder(F)  # a^T F, length G
    return sc.gain * np.outer(sc.pilot, beam)


def generate_observations(theta_true: float, r, F, sc: SignalScenario, cfg: ScenarioConfig,
                          rng: np.random.Generator | None = None) -> ObservationSet:
    """Draw one ``K x G`` block of received samples.

    Without ``rng`` the draw is seeded from ``sc.seed``, so identical inputs
    give bit-identical samples.
    """
    F = _precoder(F)
    if F.shape[1] != sc.num_transmissions:
        raise ValueError(f"precoder has {F.shape[1]} columns, scenario expects {sc.num_transmissions}")
    if rng is None:
        rng = np.random.default_rng(sc.seed)
    mean = noiseless_observations(theta_true, r, F, sc, cfg)
    noise = rng.standard_normal(mean.shape) + 1j * rng.standard_normal(mean.shape)
    return ObservationSet(mean + np.sqrt(sc.noise_var / 2) * noise)


class MlEstimate(NamedTuple):
    theta_deg: float
    on_boundary: bool


class MlEstimator:
    """Grid search plus parabolic refinement of the concentrated likelihood.

    With ``h(theta)`` the noiseless response for unit gain, the complex gain is
    profiled out and the cost is ``|h^H y|^2 / ||h||^2``.
    """

    def __init__(self, r, F, sc: SignalScenario, cfg: ScenarioConfig, grid_deg, tol_deg: float = 1e-6):
        self.r, self.F, self.cfg = r, _precoder(F), cfg
        self.pilot = sc.pilot
        self.grid_deg = np.asarray(grid_deg, dtype=float)
        if self.grid_deg.size < 3 or np.any(np.diff(self.grid_deg) <= 0):
            raise ValueError("estimation grid needs at least 3 ascending angles")
        self.tol_deg = tol_deg
        self._beams = self._response(self.grid_deg)

    def _response(self, theta_deg):
        return self.F.T @ steering_vector(np.deg2rad(theta_deg), self.r, self.cfg)  # G x N

    def _cost(self, beams, z):
        num = np.abs(beams.conj().T @ z) ** 2
        return num / np.sum(np.abs(beams) ** 2, axis=0)

    def cost(self, obs: ObservationSet, theta_deg) -> np.ndarray:
        """Concentrated log-likelihood (up to constants) at ``theta_deg``."""
        z = obs.samples.T @ self.pilot.conj()  # sum_k conj(s_k) y[k, g]
        return self._cost(self._response(np.atleast_1d(theta_deg)), z) / np.vdot(self.pilot, self.pilot).real

    def estimate(self, obs: ObservationSet) -> MlEstimate:
        z = obs.samples.T @ self.pilot.conj()
        costs = self._cost(self._beams, z)
        i = int(np.argmax(costs))
        boundary = i == 0 or i == costs.size - 1
        if boundary:
            log.debug("ML peak on the grid boundary at %.4f deg", self.grid_deg[i])
        theta = self.grid_deg[i]
        h = self.grid_deg[min(i + 1, costs.size - 1)] - self.grid_deg[max(i - 1, 0)]
        h = h / 2 if not boundary else h
        lo, hi = -MAX_ANGLE_DEG, MAX_ANGLE_DEG
        while h > self.tol_deg:
            pts = np.clip(theta + h * np.array([-1.0, 0.0, 1.0]), lo, hi)
            cm, c0, cp = self._cost(self._response(pts), z)
            if cm > c0 or cp > c0:
                # not bracketed yet: walk uphill
                theta = pts[0] if cm > cp else pts[2]
                continue
            curv = cm - 2 * c0 + cp
            delta = 0.0 if curv == 0 else 0.5 * h * (cm - cp) / curv
            theta = float(np.clip(theta + delta, lo, hi))
            h = max(abs(delta), h / 10) / 2
        return MlEstimate(float(theta), boundary)


def estimation_grid(r, region: UncertaintyRegion, cfg: ScenarioConfig, step_deg: float = DEFAULT_ML_STEP,
                    full_domain: bool = False) -> np.ndarray:
    """Search grid covering the region widened by one main-lobe width on each
    side, or the whole ``+-89.9`` deg domain with ``full_domain``."""
    if full_domain:
        lo, hi = -MAX_ANGLE_DEG, MAX_ANGLE_DEG
    else:
        bw = half_power_beamwidth(r, region.center, cfg).width_deg
        lo = max(-MAX_ANGLE_DEG, region.angles_deg[0] - bw)
        hi = min(MAX_ANGLE_DEG, region.angles_deg[-1] + bw)
    n = int(np.floor((hi - lo) / step_deg + 1e-9))
    return lo + step_deg * np.arange(n + 1)


def ml_estimate_aod(obs: ObservationSet, r, F, sc: SignalScenario, cfg: ScenarioConfig, grid_deg,
                    tol_deg: float = 1e-6) -> MlEstimate:
    return MlEstimator(r, F, sc, cfg, grid_deg, tol_deg).estimate(obs)


def trial_seeds(seed: int, trials: int) -> np.ndarray:
    """Independent per-trial seeds derived from one base seed."""
    return np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint64)


@dataclass
class MonteCarloResult:
    theta_true_deg: float
    seeds: np.ndarray
    estimates_deg: np.ndarray
    boundary_hits: int
    sqrt_crb_deg: float
    snr_db: float

    @property
    def errors_deg(self) -> np.ndarray:
        return self.estimates_deg - self.theta_true_deg

    @property
    def rmse_deg(self) -> float:
        return float(np.sqrt(np.mean(self.errors_deg ** 2)))

    @property
    def rmse_stderr_deg(self) -> float:
        """Delta-method standard error of the RMSE."""
        sq = self.errors_deg ** 2
        return float(np.std(sq, ddof=1) / np.sqrt(sq.size) / (2 * self.rmse_deg))

    @property
    def ratio(self) -> float:
        return self.rmse_deg / self.sqrt_crb_deg


def _run_trials(args):
    theta_true, r, F, sc, cfg, grid, seeds = args
    est = MlEstimator(r, F, sc, cfg, grid)
    out = []
    for s in seeds:
        obs = generate_observations(theta_true, r, F, sc, cfg, np.random.default_rng(int(s)))
        out.append(est.estimate(obs))
    return out


def run_monte_carlo(theta_true_deg: float, r, region: UncertaintyRegion, cfg: ScenarioConfig,
                    trials: int = 1000, seed: int = 0, F: PrecodingMatrix | None = None,
                    num_symbols: int = DEFAULT_NUM_SYMBOLS, step_deg: float = DEFAULT_ML_STEP,
                    full_domain: bool = False, workers: int = 1) -> MonteCarloResult:
    """Empirical ML accuracy against the CRB at ``theta_true_deg``.

    The precoder defaults to the one matched to the region centre. Trial ``i``
    uses seed ``trial_seeds(seed, trials)[i]``, so the results do not depend
    on ``workers``.
    """
    if F is None:
        F = optimal_precoder(region.center, r, cfg)
    sc = SignalScenario.for_snr(cfg.snr_linear, num_symbols, seed=seed).check_snr(cfg)
    theta_true = float(np.deg2rad(theta_true_deg))
    grid = estimation_grid(r, region, cfg, step_deg, full_domain)
    seeds = trial_seeds(seed, trials)
    if workers > 1:
        chunks = np.array_split(seeds, workers)
        jobs = [(theta_true, r, F, sc, cfg, grid, c) for c in chunks]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            ests = [e for part in pool.map(_run_trials, jobs) for e in part]
    else:
        ests = _run_trials((theta_true, r, F, sc, cfg, grid, seeds))
    crb = crb_general(r, F, theta_true, cfg)
    return MonteCarloResult(theta_true_deg, seeds, np.array([e.theta_deg for e in ests]),
                            sum(e.on_boundary for e in ests), crb.deg, cfg.snr_db)
