"""Sensing-matrix ensembles, sparse test signals, and SNR-calibrated noise.

Three measurement ensembles are provided: random Gaussian, partial DCT, and
oversampled DCT (the refinement factor F controls how coherent the columns
become).  Ground-truth signals are exactly s-sparse with standard normal
nonzeros, optionally with a minimum pairwise separation between support
indices.  All generators are deterministic functions of (spec, seed).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .linalg import as_vector

__all__ = [
    "EnsembleKind",
    "EnsembleSpec",
    "SignalSpec",
    "gen_matrix",
    "gen_support",
    "gen_signal",
    "add_noise_snr",
    "trial_rng",
]


class EnsembleKind(enum.Enum):
    GAUSSIAN = "gaussian"
    PARTIAL_DCT = "partial_dct"
    OVERSAMPLED_DCT = "oversampled_dct"


@dataclass(frozen=True)
class EnsembleSpec:
    """Measurement-matrix description: ensemble kind, shape, refinement, seed."""

    kind: EnsembleKind
    m: int
    n: int
    refinement: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise InvalidParameterError("m and n must be positive")
        if self.refinement < 1:
            raise InvalidParameterError("refinement factor must be >= 1")
        if self.kind is not EnsembleKind.OVERSAMPLED_DCT and self.refinement != 1:
            raise InvalidParameterError(
                "refinement factor only applies to the oversampled DCT ensemble"
            )


@dataclass(frozen=True)
class SignalSpec:
    """Ground-truth description: dimension, sparsity, minimum separation, seed."""

    n: int
    sparsity: int
    min_separation: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError("n must be positive")
        if not (0 <= self.sparsity <= self.n):
            raise InvalidParameterError("sparsity must lie in [0, n]")
        if self.min_separation < 0:
            raise InvalidParameterError("min_separation must be nonnegative")
        s, sep = self.sparsity, self.min_separation
        if s > 0 and sep > 0 and (s - 1) * sep + 1 > self.n:
            raise InvalidParameterError(
                f"cannot place {s} indices with separation {sep} in [0, {self.n})"
            )


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def trial_rng(master_seed: int, sweep_index: int, trial_index: int, stream: int = 0):
    """Independent generator for one trial of one sweep point.

    Keyed spawning makes trials order-independent: any worker can draw the
    generator for (sweep, trial) without running earlier trials first.
    """
    ss = np.random.SeedSequence(
        master_seed, spawn_key=(sweep_index, trial_index, stream)
    )
    return np.random.default_rng(ss)


def gen_matrix(spec: EnsembleSpec) -> np.ndarray:
    """Draw a sensing matrix from the given ensemble.

    Gaussian: i.i.d. N(0, 1/m) entries.  DCT kinds: a single frequency
    vector chi ~ U[0,1]^m is shared across columns and column i (1-based) is
    cos(2 pi i chi / F) / sqrt(m), with F = 1 for the partial DCT.  Sharing
    chi across columns is what makes large F produce nearly parallel
    (coherent) columns.
    """
    rng = _rng(spec.seed)
    m, n = spec.m, spec.n
    if spec.kind is EnsembleKind.GAUSSIAN:
        return rng.standard_normal((m, n)) / np.sqrt(m)
    chi = rng.uniform(0.0, 1.0, size=m)
    cols = np.arange(1, n + 1, dtype=float)
    F = float(spec.refinement)
    return np.cos(2.0 * np.pi * np.outer(chi, cols) / F) / np.sqrt(m)


def gen_support(spec: SignalSpec) -> np.ndarray:
    """Sample a sorted support of size s, honoring the minimum separation.

    With separation L > 0 the support is drawn by gap allocation: choose a
    uniform s-subset of the n - (s-1)(L-1) compacted slots, then stretch it
    back by adding (L-1) * rank to each index.  This is uniform over all
    feasible supports and never rejects.
    """
    rng = _rng(spec.seed)
    s, n, sep = spec.sparsity, spec.n, spec.min_separation
    if s == 0:
        return np.empty(0, dtype=np.intp)
    if sep <= 1:
        return np.sort(rng.choice(n, size=s, replace=False))
    free = n - (s - 1) * (sep - 1)
    base = np.sort(rng.choice(free, size=s, replace=False))
    return base + (sep - 1) * np.arange(s)


def gen_signal(spec: SignalSpec) -> np.ndarray:
    """Exactly s-sparse vector with standard normal nonzero entries."""
    support = gen_support(spec)
    rng = _rng((spec.seed, 1))
    x = np.zeros(spec.n)
    if support.size == 0:
        return x
    vals = rng.standard_normal(support.size)
    while np.any(vals == 0.0):  # pragma: no cover - probability zero in practice
        vals[vals == 0.0] = rng.standard_normal(int(np.sum(vals == 0.0)))
    x[support] = vals
    return x


def add_noise_snr(clean, snr_db: float, seed: int) -> tuple[np.ndarray, float]:
    """Add white Gaussian noise at the requested SNR (in dB).

    The per-sample noise variance is P / 10^(snr_db/10) with P the measured
    signal power ||clean||^2 / m.  Returns the noisy vector and the realized
    noise norm ||e||_2, the natural tau for the constrained solvers.
    """
    clean = as_vector(clean)
    if not np.any(clean):
        raise InvalidParameterError("cannot calibrate noise power to a zero signal")
    m = clean.shape[0]
    power = float(clean @ clean) / m
    sigma = np.sqrt(power / 10.0 ** (snr_db / 10.0))
    e = _rng(seed).standard_normal(m) * sigma
    return clean + e, float(np.linalg.norm(e))
