import numpy as np
import pytest
from scipy import stats

from bmvm_cim.protocol import SyntheticProtocolParams, protocol_impact, protocol_sweep

P = SyntheticProtocolParams()


def analytic_frr(ber, p=P):
    """Reject probability: key recovery fails (then the distance is ~m/2) or too many noisy bits."""
    bit_fail = stats.binom.sf(p.repetition // 2, p.repetition, p.intra_flip_rate)
    key_ok = (1 - bit_fail) ** p.key_bits
    q = p.lpn_noise * (1 - ber) + (1 - p.lpn_noise) * ber
    tail = stats.binom.sf(p.accept_threshold, p.response_bits, q)
    return (1 - key_ok) + key_ok * tail


@pytest.fixture(scope="module")
def sweep():
    return protocol_sweep([0.0, 1.6e-5, 1e-3, 1e-2], P, 60_000, seed=4)


def test_frr_matches_analytic(sweep):
    for r in sweep:
        se = np.sqrt(r.frr_noisy * (1 - r.frr_noisy) / r.genuine_trials)
        assert abs(r.frr_noisy - analytic_frr(r.ber)) < 4 * se


def test_far_zero(sweep):
    assert all(r.far == 0.0 for r in sweep)


def test_zero_ber_no_change(sweep):
    assert sweep[0].frr_delta == 0.0
    assert sweep[0].frr_noisy == sweep[0].frr_clean


def test_common_random_numbers_monotone(sweep):
    # with shared draws a higher BER can only add flips, and well-separated levels dominate MC noise
    deltas = [r.frr_delta for r in sweep[1:]]
    assert deltas == sorted(deltas)
    assert sweep[-1].frr_delta > 0.5


def test_nominal_operating_point_is_negligible(sweep):
    assert abs(sweep[1].frr_delta) < 0.01


def test_deterministic_across_jobs():
    a = protocol_sweep([1e-3], P, 20_000, seed=9, jobs=1)[0]
    b = protocol_sweep([1e-3], P, 20_000, seed=9, jobs=2)[0]
    assert a == b


def test_impact_wrapper():
    r = protocol_impact(0.0, P, 5_000, seed=2)
    assert r.ber == 0.0 and r.genuine_trials == 5_000
    assert set(r.as_dict()) >= {"far_noisy", "frr_noisy", "frr_delta"}


@pytest.mark.parametrize("kw", [dict(repetition=4), dict(key_bits=65), dict(lpn_noise=1.5)])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        SyntheticProtocolParams(**kw)


def test_invalid_ber():
    with pytest.raises(ValueError):
        protocol_sweep([1.5], P, 1000)
