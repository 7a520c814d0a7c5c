"""Cramer-Rao bounds on the AoD.

Two routes: :func:`crb_general` evaluates the Slepian-Bangs expression for an
arbitrary precoder (the ground truth), and :func:`crb_closed_form` is the
simplification that holds when the precoder is matched to the evaluated angle
and the placement is centred.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ScenarioConfig, check_angle, steering_derivative, steering_vector
from .precoding import PrecodingMatrix, optimal_precoder
from .scc import UncertaintyRegion

BLIND_TOL = 1e-14
FISHER_NEG_TOL = 1e-9
CENTER_TOL = 1e-9


class CrbEvaluationError(ValueError):
    """The Fisher information at some angle is zero or not positive."""

    def __init__(self, message: str, theta_deg: float | None = None):
        if theta_deg is not None:
            message = f"at theta = {theta_deg:.6g} deg: {message}"
        super().__init__(message)
        self.theta_deg = theta_deg


@dataclass(frozen=True)
class CrbValue:
    """Bound on the AoD estimator variance, in rad^2."""

    variance: float

    @property
    def deg(self) -> float:
        """Root CRB in degrees."""
        return float(np.rad2deg(np.sqrt(self.variance)))

    def __float__(self):
        return float(self.variance)


def _as_matrix(F) -> np.ndarray:
    return F.F if isinstance(F, PrecodingMatrix) else np.asarray(F, dtype=complex)


def fisher_terms(r, F, theta, cfg: ScenarioConfig):
    """Bracketed Fisher term (without the ``2 SNR`` factor) and the
    directional power ``||F^H a*||^2`` at each angle in ``theta``.

    The Fisher term is ``||F^H da*||^2 - |a^T F F^H da*|^2 / ||F^H a*||^2``.
    """
    F = _as_matrix(F)
    theta = np.atleast_1d(check_angle(theta))
    u = F.conj().T @ steering_vector(theta, r, cfg).conj()      # G x N, F^H a*
    v = F.conj().T @ steering_derivative(theta, r, cfg).conj()  # G x N, F^H da*
    pu = np.sum(np.abs(u) ** 2, axis=0)
    pv = np.sum(np.abs(v) ** 2, axis=0)
    cross = np.sum(u.conj() * v, axis=0)  # u^H v = a^T F F^H da*
    with np.errstate(divide="ignore", invalid="ignore"):
        term = pv - np.abs(cross) ** 2 / pu
    return term, pu


def crb_curve(r, F, theta, cfg: ScenarioConfig) -> np.ndarray:
    """Vectorised CRB in rad^2; angles where the bound is undefined give ``inf``."""
    term, pu = fisher_terms(r, F, theta, cfg)
    out = np.full(term.shape, np.inf)
    ok = (pu > BLIND_TOL) & (term > 0)
    out[ok] = 1.0 / (2 * cfg.snr_linear * term[ok])
    return out


def _check_terms(term, pu, theta):
    for t, p, th in zip(term, pu, np.atleast_1d(theta)):
        if not p > BLIND_TOL:
            raise CrbEvaluationError("precoder blind at theta (||F^H a*|| = 0)", np.rad2deg(th))
        if t < -FISHER_NEG_TOL:
            raise CrbEvaluationError(f"Fisher term {t:.3e} is negative", np.rad2deg(th))
        if not t > 0:
            raise CrbEvaluationError("Fisher term is not positive", np.rad2deg(th))


def crb_general(r, F, theta: float, cfg: ScenarioConfig) -> CrbValue:
    """Slepian-Bangs CRB for precoder ``F`` at AoD ``theta`` (radians)."""
    term, pu = fisher_terms(r, F, theta, cfg)
    _check_terms(term, pu, theta)
    return CrbValue(float(1.0 / (2 * cfg.snr_linear * term[0])))


def crb_closed_form(r, theta: float, cfg: ScenarioConfig, gamma: float | None = None) -> CrbValue:
    """``[2 SNR (1-gamma) (k cos theta)^2 r^T r]^-1`` for the matched precoder.

    Only valid for centred placements (the cross term vanishes when
    ``sum(r) = 0``); use :func:`crb_general` otherwise.
    """
    gamma = cfg.gamma if gamma is None else gamma
    theta = float(check_angle(theta))
    pos = np.asarray(r, dtype=float)
    moment = float(pos @ pos)
    if not moment > 0:
        raise ValueError("r^T r must be positive")
    if abs(pos.sum()) > CENTER_TOL * max(1.0, np.abs(pos).max()):
        raise ValueError(f"closed form requires a zero-mean placement, sum(r) = {pos.sum():.3e}")
    gain = cfg.wavenumber * np.cos(theta)
    return CrbValue(1.0 / (2 * cfg.snr_linear * (1 - gamma) * gain ** 2 * moment))


def worst_case_crb(r, region: UncertaintyRegion, cfg: ScenarioConfig,
                   F: PrecodingMatrix | None = None) -> tuple[CrbValue, float]:
    """Largest CRB over the region with the precoder matched to its centre.

    Returns the bound and the attaining angle in degrees. Ties (relative
    1e-12) go to the angle nearest the centre, then to the smaller angle.

    Raises:
        CrbEvaluationError: tagged with the first offending angle.
    """
    if F is None:
        F = optimal_precoder(region.center, r, cfg)
    term, pu = fisher_terms(r, F, region.angles, cfg)
    _check_terms(term, pu, region.angles)
    crb = 1.0 / (2 * cfg.snr_linear * term)
    i = _argmax_tiebreak(crb, region.angles_deg, region.center_deg)
    return CrbValue(float(crb[i])), float(region.angles_deg[i])


def _argmax_tiebreak(values, angles_deg, center_deg):
    top = values.max()
    cand = np.flatnonzero(values >= top * (1 - 1e-12))
    # lexsort: last key is primary
    order = np.lexsort((angles_deg[cand], np.abs(angles_deg[cand] - center_deg)))
    return cand[order[0]]
