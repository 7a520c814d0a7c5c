import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macrb.crb import CrbEvaluationError, crb_closed_form, crb_curve, crb_general, worst_case_crb
from macrb.geometry import SymmetricFamilyParams, maxvar_apv, symmetric_apv, ufa_apv, uhw_apv
from macrb.model import DomainError, ScenarioConfig, steering_vector
from macrb.precoding import PrecodingMatrix, optimal_precoder
from macrb.scc import UncertaintyRegion

THETA = np.deg2rad(10)
FAMILY = [(0.5, 0.5), (2.0, 2.0), (0.5, 3.65), (1.25, 2.05), (3.0, 1.0), (4.25, 0.5)]


def fisher_oracle(r, F, theta, cfg, num_symbols=8):
    """CRB on theta from the full 3x3 Fisher matrix of the received samples.

    Mean of y[k, g] is alpha * a(theta)^T f_g * s_k, with unknowns
    (theta, Re alpha, Im alpha) and complex noise of unit variance; the
    theta-derivative is a central difference, not the analytic steering
    derivative.
    """
    F = F.F if isinstance(F, PrecodingMatrix) else F
    s = np.exp(1j * np.pi * np.arange(num_symbols) ** 2 / num_symbols)
    alpha = np.sqrt(cfg.snr_linear / num_symbols) * np.exp(0.4j)

    def mean(th, al):
        return al * np.outer(s, steering_vector(th, r, cfg) @ F).ravel()

    h = 1e-6
    J = np.column_stack([
        (mean(theta + h, alpha) - mean(theta - h, alpha)) / (2 * h),
        mean(theta, 1.0),
        mean(theta, 1j),
    ])
    fim = 2 * np.real(J.conj().T @ J)
    return np.linalg.inv(fim)[0, 0]


def test_matched_maxvar_value(cfg):
    r = maxvar_apv(cfg)
    expected = 1 / (2 * 1 * 0.5 * (2 * np.pi * np.cos(THETA)) ** 2 * 122.5)
    assert expected == pytest.approx(2.132e-4, rel=1e-4)
    crb = crb_general(r, optimal_precoder(THETA, r, cfg), THETA, cfg)
    assert crb.variance == pytest.approx(expected, rel=1e-12)
    assert crb_closed_form(r, THETA, cfg).variance == pytest.approx(expected, rel=1e-12)


def test_closed_form_broadside(cfg):
    assert crb_closed_form(maxvar_apv(cfg), 0.0, cfg).variance == pytest.approx(1 / (4 * np.pi ** 2 * 122.5),
                                                                                 rel=1e-12)


def test_uhw_matches_closed_form(cfg):
    r = uhw_apv(cfg)
    crb = crb_general(r, optimal_precoder(THETA, r, cfg), THETA, cfg)
    expected = 1 / (2 * 0.5 * (2 * np.pi * np.cos(THETA)) ** 2 * 4.375)
    assert crb.variance == pytest.approx(expected, rel=1e-12)


def test_snr_doubling_halves_crb(cfg):
    r = ufa_apv(cfg)
    F = optimal_precoder(THETA, r, cfg)
    c1 = crb_general(r, F, np.deg2rad(17), cfg).variance
    c2 = crb_general(r, F, np.deg2rad(17), ScenarioConfig(snr_linear=2.0)).variance
    assert c2 == pytest.approx(c1 / 2, rel=1e-12)


def test_position_scaling(cfg):
    r = ufa_apv(cfg).positions
    c = 0.37
    assert crb_closed_form(c * r, 0.2, cfg).variance == pytest.approx(crb_closed_form(r, 0.2, cfg).variance / c ** 2,
                                                                      rel=1e-12)


def test_closed_form_grid_equivalence():
    cfg = ScenarioConfig()
    for a in np.linspace(0.5, 2.0, 5):
        for b in np.linspace(0.5, 2.5, 5):
            r = symmetric_apv(SymmetricFamilyParams(a, b), cfg)
            general = crb_general(r, optimal_precoder(THETA, r, cfg), THETA, cfg).variance
            closed = crb_closed_form(r, THETA, cfg).variance
            assert abs(general - closed) / closed < 1e-9


@settings(max_examples=60)
@given(st.sampled_from(FAMILY), st.floats(-1.2, 1.2), st.floats(0.05, 0.95), st.floats(0.01, 1e3))
def test_general_equals_closed_form(ab, theta, gamma, snr):
    cfg = ScenarioConfig(snr_linear=snr, gamma=gamma)
    r = symmetric_apv(SymmetricFamilyParams(*ab), cfg)
    general = crb_general(r, optimal_precoder(theta, r, cfg), theta, cfg).variance
    closed = crb_closed_form(r, theta, cfg).variance
    assert abs(general - closed) / closed < 1e-9


@settings(max_examples=40)
@given(st.sampled_from(FAMILY), st.floats(-0.6, 0.6), st.floats(-0.6, 0.6))
def test_general_matches_fisher_oracle(ab, theta_c, theta):
    cfg = ScenarioConfig(snr_linear=3.0)
    r = symmetric_apv(SymmetricFamilyParams(*ab), cfg)
    F = optimal_precoder(theta_c, r, cfg)
    try:
        crb = crb_general(r, F, theta, cfg).variance
    except CrbEvaluationError:
        return
    oracle = fisher_oracle(r, F, theta, cfg)
    assert crb == pytest.approx(oracle, rel=1e-5)


def test_general_matches_oracle_for_arbitrary_precoder():
    cfg = ScenarioConfig(num_elements=4)
    rng = np.random.default_rng(3)
    r = np.array([-4.0, -1.0, 2.5, 5.0])  # not centred
    F = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    F = PrecodingMatrix(F / np.linalg.norm(F))
    for theta in np.deg2rad([-30, 0, 12, 45]):
        assert crb_general(r, F, theta, cfg).variance == pytest.approx(fisher_oracle(r, F, theta, cfg), rel=1e-5)


@settings(max_examples=30)
@given(st.floats(0, 2 * np.pi), st.floats(-1.0, 1.0))
def test_invariant_to_right_unitary(phase, theta):
    cfg = ScenarioConfig()
    r = symmetric_apv(SymmetricFamilyParams(0.5, 3.65), cfg)
    F = optimal_precoder(THETA, r, cfg)
    base = crb_general(r, F, theta, cfg).variance
    c, s = np.cos(phase), np.sin(phase)
    U = np.array([[c, -s * np.exp(0.3j)], [s * np.exp(-0.3j), c]])
    rotated = PrecodingMatrix(F.F @ U)
    assert crb_general(r, rotated, theta, cfg).variance == pytest.approx(base, rel=1e-9)
    assert crb_general(r, PrecodingMatrix(np.exp(1j * phase) * F.F), theta, cfg).variance == pytest.approx(base,
                                                                                                          rel=1e-9)


def test_larger_moment_lower_crb(cfg):
    vals = []
    for apv in (uhw_apv(cfg), ufa_apv(cfg), maxvar_apv(cfg)):
        vals.append(crb_closed_form(apv, THETA, cfg).variance)
    assert vals[0] > vals[1] > vals[2]


def test_closed_form_rejects_uncentred(cfg):
    with pytest.raises(ValueError, match="zero-mean"):
        crb_closed_form([-4.0, 1.0, 5.0], THETA, ScenarioConfig(num_elements=3))


def test_closed_form_endfire(cfg):
    with pytest.raises(DomainError):
        crb_closed_form(maxvar_apv(cfg), np.pi / 2, cfg)


def test_blind_precoder(cfg):
    # a single directional beam is blind exactly at the first null of a ULA
    r = np.array([-1.5, -0.5, 0.5, 1.5])
    a0 = steering_vector(0.0, r, cfg)
    F = PrecodingMatrix((a0.conj() / 2)[:, None])
    null = np.arcsin(1 / 4)
    with pytest.raises(CrbEvaluationError, match="blind"):
        crb_general(r, F, null, cfg)
    assert np.isinf(crb_curve(r, F, [null], cfg)[0])


def test_single_beam_has_no_angle_information_at_its_peak(cfg):
    r = np.array([-1.5, -0.5, 0.5, 1.5])
    F = PrecodingMatrix((steering_vector(0.0, r, cfg).conj() / 2)[:, None])
    with pytest.raises(CrbEvaluationError) as exc:
        crb_general(r, F, 0.0, cfg)
    assert exc.value.theta_deg == 0.0


def test_worst_case_singleton_equals_closed_form(cfg):
    r = ufa_apv(cfg)
    region = UncertaintyRegion.from_bounds(10, 10, 10)
    worst, angle = worst_case_crb(r, region, cfg)
    assert angle == 10
    assert worst.variance == pytest.approx(crb_closed_form(r, THETA, cfg).variance, rel=1e-12)


def test_worst_case_dominates_members(cfg, region_p1):
    r = maxvar_apv(cfg)
    worst, angle = worst_case_crb(r, region_p1, cfg)
    assert worst.variance >= crb_closed_form(r, THETA, cfg).variance
    F = optimal_precoder(THETA, r, cfg)
    curve = crb_curve(r, F, region_p1.angles, cfg)
    assert worst.variance == curve.max()
    assert curve[np.flatnonzero(region_p1.angles_deg == angle)[0]] == curve.max()


def test_worst_case_tie_break_prefers_center_then_smaller(cfg):
    # broadside centre with a symmetric APV: CRB is even in theta
    r = ufa_apv(cfg)
    region = UncertaintyRegion.from_bounds(-3, 3, 0, step_deg=1.0)
    worst, angle = worst_case_crb(r, region, cfg)
    assert angle == -3


def test_crb_value_degrees():
    from macrb.crb import CrbValue
    v = CrbValue(np.deg2rad(2.0) ** 2)
    assert v.deg == pytest.approx(2.0)
