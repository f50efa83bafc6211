import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from bmvm_cim.cell import CellParams, Variant, effective_r_ratio, unit_current, unit_currents
from bmvm_cim.device import DeviceSample, Fault, ResistanceModel, State


def expected_inverse(mean, sigma, floor):
    """E[1/R] for R ~ N(mean, sigma^2) truncated below at floor, by quadrature."""
    dist = stats.norm(mean, sigma)
    num, _ = integrate.quad(lambda r: dist.pdf(r) / r, floor, mean + 12 * sigma)
    return num / dist.sf(floor)


def quadrature_ratio(variant, p=CellParams(), m=ResistanceModel()):
    i_lrs = p.i_unit * p.r_lrs_nominal * expected_inverse(m.lrs_mean, m.lrs_sigma, m.lrs_floor)
    i_hrs = p.i_unit * p.r_hrs_nominal * expected_inverse(m.hrs_mean, m.hrs_sigma, m.hrs_floor) / p.target_ratio(variant)
    return i_lrs / i_hrs


@pytest.mark.parametrize("state, r", [(State.LRS, 6000.0), (State.HRS, 70000.0), (State.HRS, 41000.0)])
def test_input_zero_gives_zero(state, r):
    for variant in Variant:
        assert unit_current(0, state, DeviceSample(r, state), CellParams(), variant) == 0.0
    stuck = DeviceSample(r, state, Fault.STUCK)
    assert unit_current(0, state, stuck, CellParams()) == 0.0


def test_lrs_nominal_is_four_microamps():
    assert unit_current(1, State.LRS, DeviceSample(6000.0, State.LRS), CellParams()) == pytest.approx(4.0)


def test_hrs_nominal_leakage():
    i = unit_current(1, State.HRS, DeviceSample(70000.0, State.HRS), CellParams())
    assert i == pytest.approx(4 / 51.9)


def test_stuck_defaults_to_lrs_current():
    d = DeviceSample(70000.0, State.HRS, Fault.STUCK)
    assert unit_current(1, State.HRS, d, CellParams()) == 4.0
    assert unit_current(1, State.HRS, d, CellParams(stuck_current=0.0)) == 0.0


def test_state_mismatch_rejected():
    with pytest.raises(ValueError):
        unit_current(1, State.LRS, DeviceSample(70000.0, State.HRS), CellParams())


def test_quadrature_oracle_sanity():
    # zero-variance limit reproduces the target exactly
    assert quadrature_ratio(Variant.COMPENSATED) == pytest.approx(50.9, abs=0.3)


def test_mc_ratio_matches_quadrature(rng):
    for variant in Variant:
        mc = effective_r_ratio(variant, CellParams(), ResistanceModel(), 100_000, rng)
        assert mc == pytest.approx(quadrature_ratio(variant), rel=0.01)


def test_compensated_ratio(rng):
    r = effective_r_ratio(Variant.COMPENSATED, CellParams(), ResistanceModel(), 100_000, rng)
    assert r == pytest.approx(51.9, rel=0.05)


def test_baseline_ratio(rng):
    r = effective_r_ratio(Variant.BASELINE, CellParams(), ResistanceModel(), 100_000, rng)
    assert r == pytest.approx(10.4, rel=0.10)


def test_mean_hrs_current_compensated(rng):
    r = ResistanceModel().hrs_mean
    from bmvm_cim.device import sample_resistances
    rs = sample_resistances(ResistanceModel(), np.zeros(100_000, bool), rng)
    i = unit_currents(1, False, rs, CellParams())
    assert i.mean() == pytest.approx(4 / 51.9, rel=0.05)
    assert r == 70_000


def test_zero_sigma_gives_exact_target(rng):
    m = ResistanceModel().ideal()
    for variant, target in ((Variant.COMPENSATED, 51.9), (Variant.BASELINE, 51.9 / 5)):
        assert effective_r_ratio(variant, CellParams(), m, 10_000, rng) == pytest.approx(target, rel=1e-12)


def test_min_trials():
    with pytest.raises(ValueError):
        effective_r_ratio(Variant.COMPENSATED, CellParams(), ResistanceModel(), 100, np.random.default_rng())


@given(st.floats(40_000, 200_000), st.floats(1.0, 5.0))
def test_monotone_in_resistance_and_compensation_helps(r, factor):
    p = CellParams()
    for lrs in (True, False):
        for v in Variant:
            assert unit_currents(1, lrs, r * factor, p, v) <= unit_currents(1, lrs, r, p, v)
    assert unit_currents(1, False, r, p, Variant.COMPENSATED) < unit_currents(1, False, r, p, Variant.BASELINE)


def test_invalid_params():
    with pytest.raises(ValueError):
        CellParams(target_r_ratio_compensated=5.0, target_r_ratio_baseline=10.0)
    with pytest.raises(ValueError):
        CellParams(i_unit=0)
