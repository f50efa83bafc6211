import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmvm_cim.array import (DeploymentError, SubArrayConfig, deploy, margin_analysis, row_current, row_currents,
                            scenario_probability, select_columns)
from bmvm_cim.bitlinalg import BitMatrix, BitVector, DimensionError
from bmvm_cim.cell import CellParams, Variant
from bmvm_cim.device import ResistanceModel

CFG = SubArrayConfig()
P = CellParams()


def faults_in(cols):
    f = np.zeros((CFG.rows, CFG.total_cols), bool)
    for c in cols:
        f[3, c] = True
    return f


def test_geometry():
    assert (CFG.total_cols, CFG.constant_bias_col, CFG.spare_slots) == (12, 11, 2)


def test_fault_free_uses_first_compute_columns(rng):
    sub = deploy(BitMatrix.random(512, 9, rng), ResistanceModel(), rng, faults=faults_in([]))
    assert sub.active_cols == tuple(range(9))
    assert sub.inactive_cols == {9, 10}


def test_single_faulty_column_is_steered(rng):
    sub = deploy(BitMatrix.random(512, 9, rng), ResistanceModel(), rng, faults=faults_in([4]))
    assert 4 in sub.inactive_cols and 4 not in sub.active_cols
    assert sub.active_cols == (0, 1, 2, 3, 5, 6, 7, 8, 9)


def test_two_faulty_columns_fit(rng):
    sub = deploy(BitMatrix.random(512, 9, rng), ResistanceModel(), rng, faults=faults_in([0, 8]))
    assert sub.inactive_cols == {0, 8}


def test_three_faulty_columns_fail(rng):
    with pytest.raises(DeploymentError):
        deploy(BitMatrix.random(512, 9, rng), ResistanceModel(), rng, faults=faults_in([1, 2, 3]))


def test_faulty_bias_column_does_not_consume_spares():
    active, inactive = select_columns([11, 2], CFG)
    assert 2 in inactive and 11 not in active


def test_logical_weights_roundtrip(rng):
    a = BitMatrix.random(512, 9, rng)
    sub = deploy(a, ResistanceModel(), rng, faults=faults_in([5]))
    assert np.array_equal(sub.logical_weights(), a.to_array().astype(bool))
    assert sub.weights[:, 11].all()


def test_wrong_slice_shape(rng):
    with pytest.raises(DimensionError):
        deploy(BitMatrix.random(512, 8, rng), ResistanceModel(), rng)


def test_bias_only_current(rng):
    sub = deploy(BitMatrix.random(512, 9, rng), ResistanceModel(), rng, faults=faults_in([]))
    i = row_currents(sub, BitVector.zeros(9), P)
    assert np.allclose(i, 4.0, rtol=0.05)


def test_all_lrs_all_ones_current(rng):
    ones = BitMatrix(np.ones((512, 9), np.uint8))
    sub = deploy(ones, ResistanceModel(), rng, faults=faults_in([]))
    i = row_currents(sub, BitVector.ones(9), P)
    assert np.allclose(i, 40.0, rtol=0.05)


def test_zero_variance_currents_match_counting(rng):
    m = ResistanceModel().ideal()
    a = BitMatrix.random(512, 9, rng)
    x = BitVector.random(9, rng)
    sub = deploy(a, m, rng)
    lrs = (a.to_array() & x.to_array()).sum(axis=1)
    hrs = ((1 - a.to_array()) & x.to_array()).sum(axis=1)
    expected = 4.0 * (lrs + 1) + hrs * 4.0 / 51.9
    assert np.allclose(row_currents(sub, x, P), expected, rtol=1e-12)


def test_row_current_agrees_with_vector(rng):
    sub = deploy(BitMatrix.random(512, 9, rng), ResistanceModel(), rng)
    x = BitVector.random(9, rng)
    rows = row_currents(sub, x, P)
    for r in (0, 17, 511):
        assert row_current(sub, r, x, P) == pytest.approx(rows[r])


def test_read_noise_changes_currents(rng):
    m = ResistanceModel(read_noise=0.01)
    sub = deploy(BitMatrix.random(512, 9, rng), m, rng)
    x = BitVector.ones(9)
    assert not np.allclose(row_currents(sub, x, P), row_currents(sub, x, P, model=m, rng=rng))


@settings(max_examples=25, deadline=None)
@given(st.permutations(range(9)), st.integers(0, 2**32 - 1))
def test_permutation_invariance(perm, seed):
    # permuting input bits together with matrix columns leaves each row's sum unchanged (zero variance)
    rng = np.random.default_rng(seed)
    m = ResistanceModel().ideal()
    a = rng.integers(0, 2, (512, 9), dtype=np.uint8)
    x = rng.integers(0, 2, 9, dtype=np.uint8)
    s1 = deploy(BitMatrix(a), m, rng, faults=faults_in([]))
    s2 = deploy(BitMatrix(a[:, perm]), m, rng, faults=faults_in([]))
    assert np.allclose(row_currents(s1, BitVector(x), P),
                       row_currents(s2, BitVector(x[list(perm)]), P))


def test_margin_scenarios_per_macv():
    rep = margin_analysis(ResistanceModel(), P, 10_000, seed=1)
    assert rep.scenario_count(6) == 5
    for m in range(11):
        assert rep.scenario_count(m) == 11 - m
    assert rep.non_overlapping


def test_margin_zero_variance_exact():
    rep = margin_analysis(ResistanceModel().ideal(), P, 10_000)
    for s in rep.scenarios:
        assert s.min == pytest.approx(4.0 * s.macv + s.leaking * 4 / 51.9)
        assert s.max == pytest.approx(s.min)


def test_baseline_overlaps_where_compensated_does_not():
    base = margin_analysis(ResistanceModel(), P, 10_000, variant=Variant.BASELINE)
    comp = margin_analysis(ResistanceModel(), P, 10_000)
    assert comp.worst_gap > 0 > base.worst_gap


def test_margin_min_trials():
    with pytest.raises(ValueError):
        margin_analysis(ResistanceModel(), P, 100)


def test_margin_deterministic_across_jobs():
    a = margin_analysis(ResistanceModel(), P, 10_000, seed=3, jobs=1)
    b = margin_analysis(ResistanceModel(), P, 10_000, seed=3, jobs=2)
    assert a.gaps == b.gaps


@pytest.mark.parametrize("m", range(11))
def test_scenario_probabilities_sum_to_one(m):
    assert sum(scenario_probability(m, k, 10) for k in range(11 - m)) == pytest.approx(1.0)
