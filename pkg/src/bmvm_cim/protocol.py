"""Synthetic LPN-commitment authentication, used to gauge what a given BMVM
bit error rate does to false accept / false reject rates.

Enrollment draws a secret key ``s`` and a binary biometric template ``b``
and publishes helper data ``b XOR rep(s)`` (repetition code) together with
the commitment ``c = A s``. A probe template ``b'`` recovers ``s'`` by
majority decoding; the prover answers with ``A s'`` computed on the
in-memory array plus LPN noise, and the verifier accepts when the Hamming
distance to ``c`` is within a threshold. Hardware errors are injected into
the array output as independent bit flips at the given BER.

All rates for different BER values reuse the same random draws (common
random numbers): a flip injected at a lower BER is also injected at every
higher BER.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .bitlinalg import BitMatrix
from .streams import parallel_map, rng_for

PROTOCOL_BATCH = 10_000


@dataclass(frozen=True)
class SyntheticProtocolParams:
    key_bits: int = 36
    response_bits: int = 512
    repetition: int = 7
    intra_flip_rate: float = 0.08
    inter_flip_rate: float = 0.5
    lpn_noise: float = 0.1
    accept_threshold: int = 64

    def __post_init__(self):
        if self.key_bits < 1 or self.key_bits > 64:
            raise ValueError("key_bits must be in 1..64")
        if self.repetition < 1 or self.repetition % 2 == 0:
            raise ValueError("repetition must be a positive odd number")
        for r in (self.intra_flip_rate, self.inter_flip_rate, self.lpn_noise):
            if not 0 <= r <= 1:
                raise ValueError("rates must be in [0, 1]")

    @property
    def template_bits(self) -> int:
        return self.key_bits * self.repetition


@dataclass
class ProtocolResult:
    ber: float
    genuine_trials: int
    impostor_trials: int
    far_clean: float
    frr_clean: float
    far_noisy: float
    frr_noisy: float

    @property
    def far(self) -> float:
        return self.far_noisy

    @property
    def frr_delta(self) -> float:
        """Relative FRR increase caused by the injected errors."""
        if self.frr_clean == 0:
            return 0.0 if self.frr_noisy == 0 else float("inf")
        return (self.frr_noisy - self.frr_clean) / self.frr_clean

    def as_dict(self) -> dict:
        d = asdict(self)
        d["frr_delta"] = self.frr_delta
        return d


def _pack_keys(bits: np.ndarray) -> np.ndarray:
    weights = np.uint64(1) << np.arange(bits.shape[-1], dtype=np.uint64)
    return (bits.astype(np.uint64) * weights).sum(axis=-1, dtype=np.uint64)


def _responses(a_rows: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """(n, m) matrix of exact parities <a_i, s> for packed keys."""
    return (np.bitwise_count(keys[:, None] & a_rows[None, :]) & 1).astype(np.uint8)


def _batch(a_rows, params: SyntheticProtocolParams, bers, n, rng, impostor: bool):
    """Rejection counts for each BER in ``bers`` over ``n`` attempts."""
    k, r, m = params.key_bits, params.repetition, params.response_bits
    s = rng.random((n, k)) < 0.5
    b = rng.random((n, k * r)) < 0.5
    helper = b ^ np.repeat(s, r, axis=1)
    flip = params.inter_flip_rate if impostor else params.intra_flip_rate
    probe = b ^ (rng.random((n, k * r)) < flip)
    votes = (probe ^ helper).reshape(n, k, r).sum(axis=2)
    s_rec = votes > r // 2
    c = _responses(a_rows, _pack_keys(s))
    z = _responses(a_rows, _pack_keys(s_rec)) ^ (rng.random((n, m)) < params.lpn_noise)
    u = rng.random((n, m))
    out = []
    for ber in bers:
        noisy = z ^ (u < ber)
        accept = np.count_nonzero(noisy != c, axis=1) <= params.accept_threshold
        out.append(int(np.count_nonzero(~accept)))
    return out


def protocol_sweep(bers: Sequence[float], params: SyntheticProtocolParams = SyntheticProtocolParams(),
                   trials: int = 100_000, seed: int = 0, a: BitMatrix | None = None,
                   jobs: int = 1) -> list[ProtocolResult]:
    """FAR/FRR with and without injected errors, for each BER in ``bers``."""
    bers = [float(x) for x in bers]
    if any(not 0 <= x <= 1 for x in bers):
        raise ValueError("BER values must be in [0, 1]")
    if a is None:
        a = BitMatrix.random(params.response_bits, params.key_bits, rng_for(seed, "protocol-matrix"))
    if a.shape != (params.response_bits, params.key_bits):
        raise ValueError(f"A must be {params.response_bits}x{params.key_bits}")
    a_rows = a.words[:, 0]
    levels = [0.0] + bers
    sizes = [min(PROTOCOL_BATCH, trials - i) for i in range(0, trials, PROTOCOL_BATCH)]
    work = [(a_rows, params, levels, n, seed, idx) for idx, n in enumerate(sizes)]
    parts = parallel_map(_protocol_work, work, jobs)
    gen = np.sum([p[0] for p in parts], axis=0)
    imp = np.sum([p[1] for p in parts], axis=0)
    frr = gen / trials
    far = 1 - imp / trials
    return [ProtocolResult(ber, trials, trials, float(far[0]), float(frr[0]), float(far[i + 1]),
                           float(frr[i + 1])) for i, ber in enumerate(bers)]


def _protocol_work(args):
    a_rows, params, levels, n, seed, idx = args
    g = _batch(a_rows, params, levels, n, rng_for(seed, "protocol-genuine", idx), impostor=False)
    i = _batch(a_rows, params, levels, n, rng_for(seed, "protocol-impostor", idx), impostor=True)
    return g, i


def protocol_impact(ber: float, params: SyntheticProtocolParams = SyntheticProtocolParams(),
                    trials: int = 100_000, seed: int = 0, jobs: int = 1) -> ProtocolResult:
    return protocol_sweep([ber], params, trials, seed, jobs=jobs)[0]
