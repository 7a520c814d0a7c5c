import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macrb.geometry import SymmetricFamilyParams, maxvar_apv, symmetric_apv, ufa_apv, uhw_apv
from macrb.model import ScenarioConfig
from macrb.scc import (Beamwidth, UncertaintyRegion, half_power_beamwidth, mainlobe_set, scc, scc_feasible,
                       scc_profile)

angles = st.floats(-1.4, 1.4)
positions = st.lists(st.floats(-5, 5), min_size=2, max_size=7).map(np.array)


def test_self_correlation(cfg):
    assert scc(0.3, 0.3, maxvar_apv(cfg), cfg) == pytest.approx(1.0, abs=1e-12)


def test_two_element_closed_form(cfg):
    r = np.array([-0.25, 0.25])
    th = np.linspace(-1.5, 1.5, 41)
    np.testing.assert_allclose(scc(0.0, th, r, cfg), np.abs(np.cos(np.pi / 2 * np.sin(th))), atol=1e-12)
    assert scc(0.0, np.deg2rad(89.9), r, cfg) < 1e-5


@given(angles, angles, positions)
def test_symmetric_in_arguments(ti, tj, r):
    cfg = ScenarioConfig()
    assert scc(ti, tj, r, cfg) == pytest.approx(scc(tj, ti, r, cfg), abs=1e-12)


@given(angles, angles, positions, st.floats(-20, 20))
def test_translation_invariant(ti, tj, r, shift):
    cfg = ScenarioConfig()
    assert scc(ti, tj, r + shift, cfg) == pytest.approx(scc(ti, tj, r, cfg), abs=1e-9)


@given(angles, angles, positions)
def test_bounded(ti, tj, r):
    v = scc(ti, tj, r, ScenarioConfig())
    assert -1e-12 <= v <= 1 + 1e-12


def test_two_element_beamwidth_exact(cfg):
    # |cos(pi/2 sin t)| crosses 0.5 at sin t = 2/3 and 1/sqrt(2) at sin t = 1/2
    r = np.array([-0.25, 0.25])
    bw = half_power_beamwidth(r, 0.0, cfg)
    assert bw.width_deg == pytest.approx(2 * np.rad2deg(np.arcsin(2 / 3)), abs=1e-4)
    bw = half_power_beamwidth(r, 0.0, cfg, criterion="power")
    assert bw.width_deg == pytest.approx(60.0, abs=1e-4)
    assert not bw.truncated


@pytest.mark.parametrize("criterion", ["amplitude", "power"])
def test_beamwidth_resolution_consistency(cfg, criterion):
    r = uhw_apv(cfg)
    coarse = half_power_beamwidth(r, 0.0, cfg, fine_step=0.1, criterion=criterion)
    fine = half_power_beamwidth(r, 0.0, cfg, fine_step=0.01, criterion=criterion)
    assert abs(coarse.width_deg - fine.width_deg) < 0.1
    # the uniform-array half-power width is about 0.886 / (L d) radians
    if criterion == "power":
        assert fine.width_deg == pytest.approx(np.rad2deg(0.886 / 3.0), rel=0.03)


def test_wider_aperture_narrower_beam(cfg):
    t = np.deg2rad(10)
    assert half_power_beamwidth(ufa_apv(cfg), t, cfg).width_deg < half_power_beamwidth(uhw_apv(cfg), t, cfg).width_deg
    r = uhw_apv(cfg).positions
    assert half_power_beamwidth(2 * r, t, cfg).width_deg < half_power_beamwidth(r, t, cfg).width_deg


def test_beamwidth_asymmetric_edges_off_broadside(cfg):
    bw = half_power_beamwidth(uhw_apv(cfg), np.deg2rad(30), cfg)
    assert bw.upper_deg - 30 > 30 - bw.lower_deg  # the beam broadens towards endfire


def test_beamwidth_truncated_warns(cfg):
    r = np.array([-0.05, 0.05])
    with pytest.warns(RuntimeWarning):
        bw = half_power_beamwidth(r, 0.0, cfg)
    assert bw.truncated and bw.width_deg == pytest.approx(179.8)


def test_mainlobe_set_definition(cfg):
    region = UncertaintyRegion.from_bounds(0, 20, 10, step_deg=0.1)
    mask = mainlobe_set(None, region, cfg, beamwidth=Beamwidth(2.0, 9.0, 11.0, False))
    np.testing.assert_array_equal(region.angles_deg[mask], np.round(np.arange(9.1, 10.95, 0.1), 9))


def test_mainlobe_smaller_than_step(cfg):
    region = UncertaintyRegion.from_bounds(0, 20, 10, step_deg=0.1)
    mask = mainlobe_set(None, region, cfg, beamwidth=Beamwidth(0.05, 9.975, 10.025, False))
    assert region.angles_deg[mask].tolist() == [10.0]
    off_grid = UncertaintyRegion.from_bounds(0.05, 19.95, 10, step_deg=0.1)
    assert not mainlobe_set(None, off_grid, cfg, beamwidth=Beamwidth(0.05, 9.975, 10.025, False)).any()


def test_mainlobe_full_domain(cfg):
    region = UncertaintyRegion.from_bounds(0, 20, 10)
    mask = mainlobe_set(None, region, cfg, beamwidth=Beamwidth(179.8, -89.9, 89.9, True))
    assert mask.all()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert scc_feasible(np.array([-0.05, 0.05]), region, ScenarioConfig(num_elements=2, aperture=1)) == (True, 0.0)


def test_maxvar_infeasible_p1(cfg, region_p1):
    ok, side = scc_feasible(maxvar_apv(cfg), region_p1, cfg)
    assert not ok and side > 0.5


def test_ufa_feasible_p1(cfg, region_p1):
    ok, side = scc_feasible(ufa_apv(cfg), region_p1, cfg)
    assert ok and side <= 0.5


def test_p1_optimum_infeasible_on_p2(cfg, region_p2):
    # cell found by the (a, b) search on P1 at the default grid
    r = symmetric_apv(SymmetricFamilyParams(0.5, 3.65), cfg)
    ok, side = scc_feasible(r, region_p2, cfg)
    assert not ok and 0.7 <= side <= 0.9


def test_power_criterion_leaves_nothing_feasible(cfg, region_p1):
    # just outside a |SCC|^2 = 0.5 main lobe the correlation is ~0.707 > 0.5
    for r in (ufa_apv(cfg), uhw_apv(cfg), symmetric_apv(SymmetricFamilyParams(0.5, 3.65), cfg)):
        ok, side = scc_feasible(r, region_p1, cfg, criterion="power")
        assert not ok and side > 0.69


def test_profile_contents(cfg, region_p1):
    prof = scc_profile(ufa_apv(cfg), region_p1, cfg)
    assert prof.values[region_p1.angles_deg == 10.0][0] == pytest.approx(1.0)
    assert prof.mainlobe[region_p1.angles_deg == 10.0][0]
    assert np.all((prof.values >= 0) & (prof.values <= 1 + 1e-12))


def test_region_construction():
    reg = UncertaintyRegion.from_span(10, 5)
    assert reg.angles_deg[0] == 7.5 and reg.angles_deg[-1] == 12.5 and reg.angles_deg.size == 51
    assert reg.span_deg == pytest.approx(5)
    assert UncertaintyRegion.from_span(10, 0).angles_deg.tolist() == [10.0]
    odd = UncertaintyRegion.from_bounds(0, 1.05, 0.5, step_deg=0.1)
    assert odd.angles_deg[-1] == 1.05
    for bad in [dict(angles_deg=[], center_deg=0), dict(angles_deg=[0, 1], center_deg=5),
                dict(angles_deg=[1, 0], center_deg=0.5), dict(angles_deg=[0, 1], center_deg=0, kappa_scc=0),
                dict(angles_deg=[0, 95], center_deg=1)]:
        with pytest.raises(ValueError):
            UncertaintyRegion(**bad)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 4.25), st.floats(0.5, 4.25), st.floats(-30, 30))
def test_nested_regions_feasibility_monotone(a, b, center):
    cfg = ScenarioConfig()
    try:
        r = symmetric_apv(SymmetricFamilyParams(a, b), cfg)
    except ValueError:
        return
    small = UncertaintyRegion.from_span(center, 10)
    large = UncertaintyRegion.from_span(center, 30)
    ok_small, s_small = scc_feasible(r, small, cfg)
    ok_large, s_large = scc_feasible(r, large, cfg)
    assert s_small <= s_large + 1e-12
    assert ok_small or not ok_large
